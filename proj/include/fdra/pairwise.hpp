#pragma once

#include <optional>
#include <string_view>

// Two-link power optimisation on a single sub-channel: one downlink user k
// served by the base station while uplink user j transmits to it. The
// weighted objective is
//
//   L(p, q) = w log2(1 + g_k p / (N_k + I q)) + v log2(1 + g_j q / (N0 + beta p))
//
// with p in [0, P1] the downlink power and q in [0, P2] the uplink power. The
// maximiser lies in a five-point candidate set: the three corners with at
// least one full-power side, plus the two edge stationary points obtained
// from a quadratic in one power with the other fixed at its cap.

namespace fdra::pairwise {

struct PairInstance {
  double w_k = 1.0;     // downlink weight
  double v_j = 1.0;     // uplink weight
  double g_k = 0.0;     // BS <-> downlink user gain
  double g_j = 0.0;     // BS <-> uplink user gain
  double I_kj = 0.0;    // uplink user -> downlink user interference gain (beta on self-pairs)
  double N_k = 0.0;     // downlink user noise, W
  double N0 = 0.0;      // BS noise, W
  double P_max1 = 0.0;  // downlink cap, W
  double P_max2 = 0.0;  // uplink cap, W
  double beta = 0.0;    // BS self-interference coefficient
};

/// Listed in tie-break order.
enum class Candidate {
  UplinkOnly,        // (0, P2)
  DownlinkOnly,      // (P1, 0)
  BothFull,          // (P1, P2)
  InteriorDownlink,  // (p_dl^a, P2)
  InteriorUplink,    // (P1, p_ul^a)
  Silent,            // (0, 0); only returned when no candidate has positive value
};

std::string_view to_string(Candidate c);

/// Which members of the candidate set are searched. `Exclusive` keeps only
/// the single-direction corners, i.e. a half-duplex base station.
enum class CandidateSet { Full, Exclusive };

struct PairSolution {
  double p_dl = 0.0;
  double p_ul = 0.0;
  double objective = 0.0;
  Candidate candidate = Candidate::Silent;
};

struct Quadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

double pair_objective(const PairInstance& inst, double p_dl, double p_ul);

/// Coefficients (A, B, C) whose roots are the stationary points of L in the
/// downlink power with the uplink power held at `p_ul`. dL/dp has the sign of
/// A p^2 + B p + C.
Quadratic quadratic_coefficients_dl(const PairInstance& inst, double p_ul);

/// Coefficients (D, E, F): same for the uplink power with `p_dl` fixed.
Quadratic quadratic_coefficients_ul(const PairInstance& inst, double p_dl);

/// Smaller root of a p^2 + b p + c when it lies strictly inside (0, upper);
/// the linear root -c/b when a == 0. Empty when there is no such point.
std::optional<double> interior_root(const Quadratic& q, double upper_bound);

PairSolution solve_pair(const PairInstance& inst, CandidateSet set = CandidateSet::Full);

}  // namespace fdra::pairwise
