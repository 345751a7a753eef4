#include "fdra/pairwise.hpp"

#include <array>
#include <cmath>

namespace fdra::pairwise {

std::string_view to_string(Candidate c) {
  switch (c) {
    case Candidate::UplinkOnly: return "uplink-only";
    case Candidate::DownlinkOnly: return "downlink-only";
    case Candidate::BothFull: return "both-full";
    case Candidate::InteriorDownlink: return "interior-downlink";
    case Candidate::InteriorUplink: return "interior-uplink";
    case Candidate::Silent: return "silent";
  }
  return "unknown";
}

double pair_objective(const PairInstance& inst, double p_dl, double p_ul) {
  const double dl = inst.g_k * p_dl / (inst.N_k + inst.I_kj * p_ul);
  const double ul = inst.g_j * p_ul / (inst.N0 + inst.beta * p_dl);
  // 0 * log(...) must stay 0 even when a link is noiseless and unpowered.
  const double dl_term = inst.w_k == 0.0 || p_dl == 0.0 ? 0.0 : inst.w_k * std::log2(1.0 + dl);
  const double ul_term = inst.v_j == 0.0 || p_ul == 0.0 ? 0.0 : inst.v_j * std::log2(1.0 + ul);
  return dl_term + ul_term;
}

Quadratic quadratic_coefficients_dl(const PairInstance& s, double p_ul) {
  const double w = s.w_k, v = s.v_j, gk = s.g_k, gj = s.g_j, b = s.beta, q = p_ul;
  Quadratic out;
  out.a = w * gk * b * b;
  out.b = 2.0 * w * s.N0 * gk * b + (w - v) * b * gk * gj * q;
  out.c = w * gk * s.N0 * s.N0 + w * gk * gj * s.N0 * q - v * s.N_k * gj * q * b -
          v * gj * b * s.I_kj * q * q;
  return out;
}

Quadratic quadratic_coefficients_ul(const PairInstance& s, double p_dl) {
  const double w = s.w_k, v = s.v_j, gk = s.g_k, gj = s.g_j, i = s.I_kj, p = p_dl;
  Quadratic out;
  out.a = v * gj * i * i;
  out.b = 2.0 * v * s.N_k * gj * i + (v - w) * i * gk * gj * p;
  out.c = v * gj * s.N_k * s.N_k + v * gk * gj * s.N_k * p - w * s.N0 * gk * p * i -
          w * gk * s.beta * i * p * p;
  return out;
}

std::optional<double> interior_root(const Quadratic& q, double upper_bound) {
  double root = 0.0;
  if (q.a > 0.0) {
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (!(disc >= 0.0)) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Both forms give (-b - sqrt(disc)) / 2a; pick the one free of cancellation.
    if (q.b >= 0.0) {
      root = (-q.b - sq) / (2.0 * q.a);
    } else {
      const double denom = -q.b + sq;
      root = denom > 0.0 ? 2.0 * q.c / denom : 0.0;
    }
  } else if (q.a == 0.0 && q.b != 0.0) {
    root = -q.c / q.b;
  } else {
    return std::nullopt;
  }
  if (root > 0.0 && root < upper_bound) return root;
  return std::nullopt;
}

PairSolution solve_pair(const PairInstance& inst, CandidateSet set) {
  const double p1 = inst.P_max1;
  const double p2 = inst.P_max2;
  const bool dl_useless = inst.g_k == 0.0 || inst.w_k == 0.0 || p1 == 0.0;
  const bool ul_useless = inst.g_j == 0.0 || inst.v_j == 0.0 || p2 == 0.0;

  // A dead direction only adds interference to the other one.
  if (dl_useless && ul_useless) return {};
  if (dl_useless) return {0.0, p2, pair_objective(inst, 0.0, p2), Candidate::UplinkOnly};
  if (ul_useless) return {p1, 0.0, pair_objective(inst, p1, 0.0), Candidate::DownlinkOnly};

  struct Entry {
    double p_dl;
    double p_ul;
    Candidate tag;
  };
  std::array<Entry, 5> entries{};
  std::size_t count = 0;
  entries[count++] = {0.0, p2, Candidate::UplinkOnly};
  entries[count++] = {p1, 0.0, Candidate::DownlinkOnly};
  if (set == CandidateSet::Full) {
    entries[count++] = {p1, p2, Candidate::BothFull};
    if (auto r = interior_root(quadratic_coefficients_dl(inst, p2), p1)) {
      entries[count++] = {*r, p2, Candidate::InteriorDownlink};
    }
    if (auto r = interior_root(quadratic_coefficients_ul(inst, p1), p2)) {
      entries[count++] = {p1, *r, Candidate::InteriorUplink};
    }
  }

  PairSolution best;
  bool have = false;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = entries[i];
    const double value = pair_objective(inst, e.p_dl, e.p_ul);
    const bool better =
        !have || value > best.objective ||
        (value == best.objective && e.p_dl + e.p_ul < best.p_dl + best.p_ul);
    if (better) {
      best = {e.p_dl, e.p_ul, value, e.tag};
      have = true;
    }
  }
  return best;
}

}  // namespace fdra::pairwise
