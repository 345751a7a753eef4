#include "fdra/dcpower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fdra::dcpower {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Optimisation variable: one present slot direction with a positive budget.
struct Var {
  std::size_t flat;   // position in the 2N vector
  std::size_t group;  // 0 = base station, 1 + j = uplink user j
  double scale;       // group budget; x = p / scale lives in [0, 1]
};

struct VarLayout {
  std::vector<Var> vars;
  std::vector<std::vector<std::size_t>> groups;  // var indices per group
};

VarLayout layout(const DcProblem& problem) {
  VarLayout out;
  const std::size_t n = problem.slots.size();
  out.groups.resize(1 + problem.user_budgets.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = problem.slots[i];
    if (s.dl_user && problem.bs_budget > 0.0) {
      out.groups[0].push_back(out.vars.size());
      out.vars.push_back({i, 0, problem.bs_budget});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = problem.slots[i];
    if (s.ul_user) {
      const double budget = problem.user_budgets[idx(*s.ul_user)];
      if (budget > 0.0) {
        const std::size_t g = 1 + idx(*s.ul_user);
        out.groups[g].push_back(out.vars.size());
        out.vars.push_back({n + i, g, budget});
      }
    }
  }
  return out;
}

// Signal-plus-interference-plus-noise at the downlink receiver and at the BS.
struct Levels {
  double dl = 0.0;  // N_k + I q + g_k p
  double ul = 0.0;  // N0 + beta p + g_j q
};

Levels levels(const DcProblem& pr, const DcSlot& s, double p, double q) {
  return {s.dl_noise + s.interference * q + s.dl_gain * p, pr.bs_noise + pr.beta * p + s.ul_gain * q};
}

// Gradient of f with respect to the 2N vector (zero on absent slots).
void grad_f(const DcProblem& pr, const std::vector<double>& p, std::vector<double>& g) {
  const std::size_t n = pr.slots.size();
  g.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    const auto lv = levels(pr, s, p[i], p[n + i]);
    if (s.dl_user) {
      const double a = s.dl_weight * kInvLn2 / lv.dl;
      g[i] += a * s.dl_gain;
      if (s.ul_user) g[n + i] += a * s.interference;
    }
    if (s.ul_user) {
      const double b = s.ul_weight * kInvLn2 / lv.ul;
      g[n + i] += b * s.ul_gain;
      if (s.dl_user) g[i] += b * pr.beta;
    }
  }
}

// f(p_new) - f(p_old) accumulated from relative level changes, which keeps
// full precision when the step is tiny compared with the levels.
double delta_f(const DcProblem& pr, const std::vector<double>& p_old,
               const std::vector<double>& p_new) {
  const std::size_t n = pr.slots.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    const double dp = p_new[i] - p_old[i];
    const double dq = p_new[n + i] - p_old[n + i];
    if (dp == 0.0 && dq == 0.0) continue;
    const auto lv = levels(pr, s, p_old[i], p_old[n + i]);
    if (s.dl_user && s.dl_weight != 0.0) {
      total += s.dl_weight * kInvLn2 * std::log1p((s.interference * dq + s.dl_gain * dp) / lv.dl);
    }
    if (s.ul_user && s.ul_weight != 0.0) {
      total += s.ul_weight * kInvLn2 * std::log1p((pr.beta * dp + s.ul_gain * dq) / lv.ul);
    }
  }
  return total;
}

double dot_diff(const std::vector<double>& c, const std::vector<double>& a,
                const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * (a[i] - b[i]);
  return acc;
}

// phi(x) = a1 log(r1 + s1 x) + a2 log(r2 + s2 x) - c x for one variable with
// every other power held fixed; a_t already carry the 1/ln2 factor.
struct Marginal {
  double a1 = 0.0, s1 = 0.0, r1 = 1.0;
  double a2 = 0.0, s2 = 0.0, r2 = 1.0;
  double c = 0.0;

  double gain(double x) const { return a1 * s1 / (r1 + s1 * x) + a2 * s2 / (r2 + s2 * x); }
  double gain_slope(double x) const {
    const double d1 = r1 + s1 * x, d2 = r2 + s2 * x;
    return -a1 * s1 * s1 / (d1 * d1) - a2 * s2 * s2 / (d2 * d2);
  }

  // Maximiser of phi(x) - lambda x over [0, cap].
  double argmax(double lambda, double cap) const {
    const double u = c + lambda;
    if (gain(0.0) <= u) return 0.0;
    if (u <= 0.0 || gain(cap) >= u) return cap;
    // gain(x) = u clears to A x^2 + B x + C = 0 with C < 0 < A, so the
    // positive root is the only one.
    const double A = u * s1 * s2;
    const double B = u * (r1 * s2 + r2 * s1) - (a1 + a2) * s1 * s2;
    const double C = u * r1 * r2 - a1 * s1 * r2 - a2 * s2 * r1;
    double x;
    if (A == 0.0) {
      x = -C / B;
    } else {
      const double sq = std::sqrt(B * B - 4.0 * A * C);
      x = B >= 0.0 ? 2.0 * C / (-B - sq) : (-B + sq) / (2.0 * A);
    }
    double lo = 0.0, hi = cap;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
      const double f = gain(x) - u;
      if (f == 0.0) break;
      if (f > 0.0) lo = x; else hi = x;
      const double step = f / gain_slope(x);
      double next = x - step;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
      x = next;
    }
    return x;
  }
};

// Maximises sum_i phi_i(x_i) subject to sum x_i <= budget and x >= 0 by
// bisection on the budget multiplier.
void solve_block(const std::vector<Marginal>& m, double budget, std::vector<double>& x) {
  x.resize(m.size());
  auto fill = [&](double lambda) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) total += (x[i] = m[i].argmax(lambda, budget));
    return total;
  };
  if (fill(0.0) <= budget) return;
  double lo = 0.0, hi = 0.0;
  for (const auto& mi : m) hi = std::max(hi, mi.gain(0.0) - mi.c);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fill(mid) > budget) lo = mid; else hi = mid;
  }
  fill(hi);
}

class SpgState {
 public:
  SpgState(const DcProblem& pr, const std::vector<double>& p_t)
      : pr_(pr), lay_(layout(pr)), c_(grad_h(pr, p_t)), p_(2 * pr.slots.size(), 0.0) {}

  const VarLayout& lay() const { return lay_; }
  const std::vector<double>& linear() const { return c_; }

  // Projects each group of normalised values onto its capped simplex.
  void project(std::vector<double>& x) const {
    std::vector<double> buf;
    for (const auto& g : lay_.groups) {
      if (g.empty()) continue;
      buf.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) buf[i] = x[g[i]];
      project_capped_simplex(buf, 1.0);
      for (std::size_t i = 0; i < g.size(); ++i) x[g[i]] = buf[i];
    }
  }

  void to_power(const std::vector<double>& x, std::vector<double>& p) const {
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t v = 0; v < lay_.vars.size(); ++v) {
      p[lay_.vars[v].flat] = x[v] * lay_.vars[v].scale;
    }
  }

  std::vector<double> to_normalised(const std::vector<double>& p) const {
    std::vector<double> x(lay_.vars.size());
    for (std::size_t v = 0; v < lay_.vars.size(); ++v) {
      x[v] = std::max(0.0, p[lay_.vars[v].flat]) / lay_.vars[v].scale;
    }
    return x;
  }

  // Surrogate gradient in normalised coordinates.
  void gradient(const std::vector<double>& p, std::vector<double>& gx) {
    grad_f(pr_, p, gfull_);
    gx.resize(lay_.vars.size());
    for (std::size_t v = 0; v < lay_.vars.size(); ++v) {
      const auto f = lay_.vars[v].flat;
      gx[v] = (gfull_[f] - c_[f]) * lay_.vars[v].scale;
    }
  }

  double surrogate_delta(const std::vector<double>& p_old, const std::vector<double>& p_new) const {
    return delta_f(pr_, p_old, p_new) - dot_diff(c_, p_new, p_old);
  }

  // Projected-gradient residual with the gradient scaled to unit max-norm
  // once it exceeds 1; raw marginals can reach 1e9 with real channel gains.
  double residual(const std::vector<double>& x, const std::vector<double>& gx) const {
    double gmax = 1.0;
    for (double v : gx) gmax = std::max(gmax, std::abs(v));
    std::vector<double> y(x.size());
    for (std::size_t v = 0; v < x.size(); ++v) y[v] = x[v] + gx[v] / gmax;
    project(y);
    double r = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) r = std::max(r, std::abs(y[v] - x[v]));
    return r;
  }

 private:
  const DcProblem& pr_;
  VarLayout lay_;
  std::vector<double> c_;
  std::vector<double> p_;
  std::vector<double> gfull_;
};

// Moves from p_new further along p_new - p_old, projected onto the budgets,
// doubling the step while the true objective keeps rising. Returns the
// objective of the point left in p_new.
double boost(const DcProblem& pr, const VarLayout& lay, const std::vector<double>& p_old,
             std::vector<double>& p_new, double value, int max_doublings) {
  std::vector<double> dir(p_new.size());
  bool moved = false;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    dir[i] = p_new[i] - p_old[i];
    moved = moved || dir[i] != 0.0;
  }
  if (!moved) return value;
  std::vector<double> trial(p_new.size()), buf;
  std::vector<double> best = p_new;
  double step = 1.0;
  for (int k = 0; k < max_doublings; ++k, step *= 2.0) {
    std::fill(trial.begin(), trial.end(), 0.0);
    for (const auto& g : lay.groups) {
      if (g.empty()) continue;
      buf.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& v = lay.vars[g[i]];
        buf[i] = (p_new[v.flat] + step * dir[v.flat]) / v.scale;
      }
      project_capped_simplex(buf, 1.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& v = lay.vars[g[i]];
        trial[v.flat] = buf[i] * v.scale;
      }
    }
    const double f = objective(pr, trial);
    if (!(f > value)) break;
    value = f;
    best = trial;
  }
  p_new = std::move(best);
  return value;
}

}  // namespace

bool DcProblem::decoupled() const {
  for (const auto& s : slots) {
    if (s.dl_user && s.ul_user && (beta != 0.0 || s.interference != 0.0)) return false;
  }
  return true;
}

DcProblem DcProblem::build(const NetworkScenario& scenario, const ChannelRealization& channels,
                           const Assignment& assignment) {
  scenario.validate();
  channels.validate_against(scenario);
  if (assignment.num_subchannels() != scenario.num_subchannels ||
      assignment.ul_user.size() != assignment.dl_user.size()) {
    throw DimensionMismatch("assignment does not match the scenario's sub-channel count");
  }
  DcProblem pr;
  pr.bs_budget = scenario.bs_power;
  pr.user_budgets = scenario.user_power;
  pr.bs_noise = scenario.bs_noise;
  pr.beta = scenario.beta;
  pr.slots.resize(idx(scenario.num_subchannels));
  for (int n = 0; n < scenario.num_subchannels; ++n) {
    auto& s = pr.slots[idx(n)];
    s.dl_user = assignment.dl_user[idx(n)];
    s.ul_user = assignment.ul_user[idx(n)];
    if (s.dl_user) {
      s.dl_gain = channels.bs_user(*s.dl_user, n);
      s.dl_noise = scenario.user_noise[idx(*s.dl_user)];
      s.dl_weight = scenario.dl_weight[idx(*s.dl_user)];
    }
    if (s.ul_user) {
      s.ul_gain = channels.bs_user(*s.ul_user, n);
      s.ul_weight = scenario.ul_weight[idx(*s.ul_user)];
    }
    if (s.dl_user && s.ul_user) {
      s.interference = effective_interference_gain(scenario, channels, *s.dl_user, *s.ul_user, n);
    }
  }
  return pr;
}

double objective(const DcProblem& pr, const std::vector<double>& p) {
  const std::size_t n = pr.slots.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    const double pd = s.dl_user ? p[i] : 0.0;
    const double pu = s.ul_user ? p[n + i] : 0.0;
    if (s.dl_user && s.dl_weight != 0.0) {
      total += s.dl_weight * std::log2(1.0 + s.dl_gain * pd / (s.dl_noise + s.interference * pu));
    }
    if (s.ul_user && s.ul_weight != 0.0) {
      total += s.ul_weight * std::log2(1.0 + s.ul_gain * pu / (pr.bs_noise + pr.beta * pd));
    }
  }
  return total;
}

DcSplit split_dc(const DcProblem& pr, const std::vector<double>& p) {
  const std::size_t n = pr.slots.size();
  DcSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    const double pd = s.dl_user ? p[i] : 0.0;
    const double pu = s.ul_user ? p[n + i] : 0.0;
    if (s.dl_user) {
      const double base = s.dl_noise + s.interference * pu;
      out.f += s.dl_weight * std::log2(base + s.dl_gain * pd);
      out.h += s.dl_weight * std::log2(base);
    }
    if (s.ul_user) {
      const double base = pr.bs_noise + pr.beta * pd;
      out.f += s.ul_weight * std::log2(base + s.ul_gain * pu);
      out.h += s.ul_weight * std::log2(base);
    }
  }
  return out;
}

std::vector<double> grad_h(const DcProblem& pr, const std::vector<double>& p) {
  const std::size_t n = pr.slots.size();
  if (p.size() != 2 * n) throw DimensionMismatch("power vector must have length 2N");
  std::vector<double> g(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    if (!(s.dl_user && s.ul_user)) continue;
    g[i] = s.ul_weight * pr.beta * kInvLn2 / (pr.bs_noise + pr.beta * p[i]);
    g[n + i] = s.dl_weight * s.interference * kInvLn2 / (s.dl_noise + s.interference * p[n + i]);
  }
  return g;
}

double surrogate(const DcProblem& pr, const std::vector<double>& p_t, const std::vector<double>& p) {
  const auto split_t = split_dc(pr, p_t);
  const auto c = grad_h(pr, p_t);
  return split_dc(pr, p).f - split_t.h - dot_diff(c, p, p_t);
}

double surrogate_kkt_residual(const DcProblem& pr, const std::vector<double>& p_t,
                              const std::vector<double>& p) {
  SpgState st(pr, p_t);
  std::vector<double> gx;
  st.gradient(p, gx);
  return st.residual(st.to_normalised(p), gx);
}

InnerResult inner_solve(const DcProblem& pr, const std::vector<double>& p_t,
                        const DcSettings& settings) {
  const std::size_t n = pr.slots.size();
  if (p_t.size() != 2 * n) throw DimensionMismatch("power vector must have length 2N");

  SpgState st(pr, p_t);
  InnerResult res;
  res.p.assign(2 * n, 0.0);
  if (st.lay().vars.empty()) return res;

  constexpr double kArmijo = 1e-4;
  constexpr double kStepMin = 1e-12;
  constexpr double kStepMax = 1e12;

  std::vector<double> x = st.to_normalised(p_t);
  st.project(x);
  std::vector<double> p(2 * n, 0.0), p_new(2 * n, 0.0);
  st.to_power(x, p);
  std::vector<double> g, g_new, trial(x.size()), x_new(x.size());
  st.gradient(p, g);

  // Exact block-coordinate ascent over the budget groups. Each block is
  // separable with one sum constraint; SPG below only polishes what this
  // leaves.
  const auto& c = st.linear();
  std::vector<Marginal> marg;
  std::vector<double> block;
  int sweeps = 0;
  for (; sweeps < settings.max_inner_iterations; ++sweeps) {
    res.kkt_residual = st.residual(x, g);
    if (res.kkt_residual <= settings.kkt_tolerance) {
      res.iterations = sweeps;
      res.p = p;
      return res;
    }
    bool moved = false;
    for (std::size_t grp = 0; grp < st.lay().groups.size(); ++grp) {
      const auto& members = st.lay().groups[grp];
      if (members.empty()) continue;
      marg.assign(members.size(), Marginal{});
      for (std::size_t m = 0; m < members.size(); ++m) {
        const auto f = st.lay().vars[members[m]].flat;
        auto& mi = marg[m];
        mi.c = c[f];
        if (f < n) {
          const auto& sl = pr.slots[f];
          const double q = p[n + f];
          if (sl.dl_weight != 0.0) {
            mi.a1 = sl.dl_weight * kInvLn2;
            mi.s1 = sl.dl_gain;
            mi.r1 = sl.dl_noise + sl.interference * q;
          }
          if (sl.ul_user && sl.ul_weight != 0.0) {
            mi.a2 = sl.ul_weight * kInvLn2;
            mi.s2 = pr.beta;
            mi.r2 = pr.bs_noise + sl.ul_gain * q;
          }
        } else {
          const auto& sl = pr.slots[f - n];
          const double pd = p[f - n];
          if (sl.dl_user && sl.dl_weight != 0.0) {
            mi.a1 = sl.dl_weight * kInvLn2;
            mi.s1 = sl.interference;
            mi.r1 = sl.dl_noise + sl.dl_gain * pd;
          }
          if (sl.ul_weight != 0.0) {
            mi.a2 = sl.ul_weight * kInvLn2;
            mi.s2 = sl.ul_gain;
            mi.r2 = pr.bs_noise + pr.beta * pd;
          }
        }
      }
      solve_block(marg, st.lay().vars[members.front()].scale, block);
      for (std::size_t m = 0; m < members.size(); ++m) {
        const auto f = st.lay().vars[members[m]].flat;
        if (p[f] != block[m]) moved = true;
        p[f] = block[m];
      }
    }
    x = st.to_normalised(p);
    st.gradient(p, g);
    if (!moved) break;
  }

  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double step = gmax > 0.0 ? std::clamp(1.0 / gmax, kStepMin, kStepMax) : 1.0;

  for (int it = sweeps;; ++it) {
    res.kkt_residual = st.residual(x, g);
    res.iterations = it;
    if (res.kkt_residual <= settings.kkt_tolerance) break;
    if (it >= settings.max_inner_iterations) {
      res.p = p;
      std::ostringstream os;
      os << "inner solver hit " << settings.max_inner_iterations
         << " iterations with residual " << res.kkt_residual;
      throw InnerSolveError(os.str(), res);
    }

    for (std::size_t v = 0; v < x.size(); ++v) trial[v] = x[v] + step * g[v];
    st.project(trial);
    double slope = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) slope += g[v] * (trial[v] - x[v]);

    double t = 1.0;
    bool accepted = false;
    double gain = 0.0;
    while (t > 1e-30) {
      for (std::size_t v = 0; v < x.size(); ++v) x_new[v] = x[v] + t * (trial[v] - x[v]);
      st.to_power(x_new, p_new);
      gain = st.surrogate_delta(p, p_new);
      if (gain >= kArmijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || gain <= 0.0) {
      // Value differences are lost in rounding this close to the optimum.
      // The surrogate is concave along the segment, so bisect on the sign
      // of its directional derivative instead.
      auto dir_slope = [&](double tt) {
        for (std::size_t v = 0; v < x.size(); ++v) x_new[v] = x[v] + tt * (trial[v] - x[v]);
        st.to_power(x_new, p_new);
        st.gradient(p_new, g_new);
        double d = 0.0;
        for (std::size_t v = 0; v < x.size(); ++v) d += g_new[v] * (trial[v] - x[v]);
        return d;
      };
      double lo = 0.0, hi = 1.0;
      if (dir_slope(1.0) >= 0.0) {
        lo = 1.0;
      } else {
        for (int b = 0; b < 60; ++b) {
          const double mid = 0.5 * (lo + hi);
          if (dir_slope(mid) >= 0.0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
      }
      if (lo == 0.0) break;
      for (std::size_t v = 0; v < x.size(); ++v) x_new[v] = x[v] + lo * (trial[v] - x[v]);
      st.to_power(x_new, p_new);
      if (p_new == p) break;
    }

    st.gradient(p_new, g_new);
    double ss = 0.0, sy = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
      const double s = x_new[v] - x[v];
      ss += s * s;
      sy -= s * (g_new[v] - g[v]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, kStepMin, kStepMax) : kStepMax;
    x.swap(x_new);
    p.swap(p_new);
    g.swap(g_new);
  }
  res.p = p;
  return res;
}

bool feasible(const DcProblem& pr, const std::vector<double>& p) {
  const std::size_t n = pr.slots.size();
  if (p.size() != 2 * n) return false;
  double bs = 0.0;
  std::vector<double> users(pr.user_budgets.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    if (!(p[i] >= 0.0) || !(p[n + i] >= 0.0)) return false;
    if (!s.dl_user && p[i] != 0.0) return false;
    if (!s.ul_user && p[n + i] != 0.0) return false;
    bs += p[i];
    if (s.ul_user) users[idx(*s.ul_user)] += p[n + i];
  }
  if (bs > pr.bs_budget + kPowerTolerance) return false;
  for (std::size_t j = 0; j < users.size(); ++j) {
    if (users[j] > pr.user_budgets[j] + kPowerTolerance) return false;
  }
  return true;
}

std::vector<double> initial_point(const DcProblem& pr, InitialPoint rule,
                                  const PowerAllocation* hint) {
  const std::size_t n = pr.slots.size();
  std::vector<double> p(2 * n, 0.0);
  if (rule == InitialPoint::Zero) return p;

  if (rule == InitialPoint::UniformFullBudget || hint == nullptr) {
    std::size_t dl_count = 0;
    std::vector<std::size_t> ul_count(pr.user_budgets.size(), 0);
    for (const auto& s : pr.slots) {
      if (s.dl_user) ++dl_count;
      if (s.ul_user) ++ul_count[idx(*s.ul_user)];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = pr.slots[i];
      if (s.dl_user) p[i] = pr.bs_budget / static_cast<double>(dl_count);
      if (s.ul_user) {
        const auto j = idx(*s.ul_user);
        p[n + i] = pr.user_budgets[j] / static_cast<double>(ul_count[j]);
      }
    }
    return p;
  }

  if (hint->dl.size() != n || hint->ul.size() != n) {
    throw DimensionMismatch("initial power hint does not match the problem size");
  }
  double bs = 0.0;
  std::vector<double> users(pr.user_budgets.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    if (s.dl_user) {
      p[i] = std::max(0.0, hint->dl[i]);
      bs += p[i];
    }
    if (s.ul_user) {
      p[n + i] = std::max(0.0, hint->ul[i]);
      users[idx(*s.ul_user)] += p[n + i];
    }
  }
  const double bs_scale = bs > pr.bs_budget ? pr.bs_budget / bs : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pr.slots[i];
    p[i] *= bs_scale;
    if (s.ul_user) {
      const auto j = idx(*s.ul_user);
      if (users[j] > pr.user_budgets[j]) p[n + i] *= pr.user_budgets[j] / users[j];
    }
  }
  return p;
}

DcResult dc_iterate(const DcProblem& pr, const DcSettings& settings, const PowerAllocation* hint) {
  DcResult out;
  std::vector<double> p = initial_point(pr, settings.initial_point, hint);
  double current = objective(pr, p);
  out.initial_objective = current;
  const bool exact_surrogate = pr.decoupled();
  const VarLayout lay = layout(pr);

  for (int t = 0; t < settings.max_iterations; ++t) {
    auto inner = inner_solve(pr, p, settings);
    double next = objective(pr, inner.p);
    if (settings.boost_doublings > 0 && !exact_surrogate && next >= current) {
      next = boost(pr, lay, p, inner.p, next, settings.boost_doublings);
    }
    if (next < current) {
      // Rounding-level regression; the previous iterate is kept.
      out.converged = true;
      break;
    }
    const double improvement = next - current;
    p = std::move(inner.p);
    current = next;
    out.trace.push_back(current);
    const double tol = settings.relative_objective_tolerance *
                       std::max({std::abs(out.initial_objective), std::abs(current), 1e-12});
    if (exact_surrogate || (t > 0 && improvement < tol) || (t == 0 && improvement == 0.0)) {
      out.converged = true;
      break;
    }
  }
  out.powers = PowerAllocation::unflatten(p);
  return out;
}

void project_capped_simplex(std::vector<double>& x, double radius) {
  double sum = 0.0;
  for (double& v : x) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (sum <= radius) return;
  // Onto the simplex face sum = radius: x_i = max(0, y_i - tau).
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - radius) / static_cast<double>(i + 1);
    if (i + 1 == sorted.size() || sorted[i + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& v : x) v = std::max(0.0, v - tau);
}

std::vector<double> waterfill(const std::vector<double>& weights, const std::vector<double>& gains,
                              const std::vector<double>& noises, double budget) {
  const std::size_t m = weights.size();
  if (gains.size() != m || noises.size() != m) {
    throw DimensionMismatch("waterfill inputs must have equal length");
  }
  if (budget < 0.0) throw std::invalid_argument("waterfill budget must be >= 0");
  std::vector<double> p(m, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < m; ++i) {
    if (weights[i] > 0.0 && gains[i] > 0.0) active.push_back(i);
  }
  if (active.empty() || budget == 0.0) return p;

  // Channel i is on while lambda < w_i g_i / N_i, with p_i = w_i / lambda - N_i / g_i.
  auto fill = [&](double lambda) {
    double total = 0.0;
    for (auto i : active) total += std::max(0.0, weights[i] / lambda - noises[i] / gains[i]);
    return total;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double weight_sum = 0.0;
  for (auto i : active) {
    lo = std::min(lo, weights[i] * gains[i] / (noises[i] + budget * gains[i]));
    hi = std::max(hi, weights[i] * gains[i] / noises[i]);
    weight_sum += weights[i];
  }
  // fill(lambda) <= sum(w) / lambda, so this also caps a noiseless channel's bracket.
  hi = std::min(hi, weight_sum / budget);
  lo = std::min(lo, hi);

  double lambda = hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = fill(mid);
    if (std::abs(f - budget) <= 1e-12 * budget) {
      lambda = mid;
      break;
    }
    if (f > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
    lambda = 0.5 * (lo + hi);
  }

  // Closed-form level for the identified active set removes the bisection error.
  double ws = 0.0, floors = 0.0;
  for (auto i : active) {
    if (weights[i] / lambda - noises[i] / gains[i] > 0.0) {
      ws += weights[i];
      floors += noises[i] / gains[i];
    }
  }
  if (ws > 0.0) {
    const double exact = ws / (budget + floors);
    bool consistent = true;
    for (auto i : active) {
      const bool on_before = weights[i] / lambda - noises[i] / gains[i] > 0.0;
      const bool on_after = weights[i] / exact - noises[i] / gains[i] > 0.0;
      if (on_before != on_after) consistent = false;
    }
    if (consistent) lambda = exact;
  }
  for (auto i : active) p[i] = std::max(0.0, weights[i] / lambda - noises[i] / gains[i]);

  // w/lambda - N/g cancels badly when N/g dwarfs the budget. The leftover goes
  // to the channel whose marginal is least sensitive to it.
  std::size_t sink = m;
  double depth = -1.0;
  for (auto i : active) {
    if (p[i] > 0.0 && noises[i] / gains[i] + p[i] > depth) {
      depth = noises[i] / gains[i] + p[i];
      sink = i;
    }
  }
  if (sink < m) {
    for (int pass = 0; pass < 2; ++pass) {
      double total = 0.0;
      for (double v : p) total += v;
      p[sink] = std::max(0.0, p[sink] + (budget - total));
    }
  }
  return p;
}

}  // namespace fdra::dcpower
