#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "fdra/core.hpp"

// Power allocation for a fixed sub-channel assignment.
//
// The weighted sum-rate is written as f(p) - h(p) with
//   f = sum w log2(N_k + I q + g_k p) + sum v log2(N0 + beta p + g_j q)
//   h = sum w log2(N_k + I q)         + sum v log2(N0 + beta p)
// both concave. Each outer iteration replaces h by its tangent plane at the
// current point and maximises the resulting concave surrogate over the
// budget polytope; the true objective never decreases along the iterates.
// The maximiser is then pushed further along the step it just took while the
// true objective keeps rising, which shortens the slow linear tail seen when
// self-interference and signal are of similar size.
//
// Power vectors use the fixed 2N layout [p_dl(0..N-1), p_ul(0..N-1)].

namespace fdra::dcpower {

/// One sub-channel of the fixed assignment. Absent directions contribute
/// nothing and their power is pinned to zero.
struct DcSlot {
  std::optional<int> dl_user;
  std::optional<int> ul_user;
  double dl_gain = 0.0;       // g_{k_i}
  double ul_gain = 0.0;       // g_{j_i}
  double interference = 0.0;  // I_{k_i, j_i}, zero without a co-channel uplink
  double dl_noise = 0.0;      // N_{k_i}
  double dl_weight = 0.0;     // w_{k_i}
  double ul_weight = 0.0;     // v_{j_i}
};

struct DcProblem {
  std::vector<DcSlot> slots;
  double bs_budget = 0.0;
  std::vector<double> user_budgets;
  double bs_noise = 0.0;
  double beta = 0.0;

  int num_subchannels() const { return static_cast<int>(slots.size()); }

  /// True when no sub-channel carries both directions with a nonzero
  /// coupling coefficient, i.e. h is constant.
  bool decoupled() const;

  static DcProblem build(const NetworkScenario& scenario, const ChannelRealization& channels,
                         const Assignment& assignment);
};

enum class InitialPoint { Provided, Zero, UniformFullBudget };

struct DcSettings {
  int max_iterations = 50;
  double relative_objective_tolerance = 1e-6;
  /// Bound on the normalised projected-gradient residual of the surrogate.
  double kkt_tolerance = 1e-7;
  int max_inner_iterations = 20000;
  /// Extrapolation steps tried after each surrogate maximisation (0 = plain
  /// iteration). Each accepted step strictly raises the true objective.
  int boost_doublings = 8;
  InitialPoint initial_point = InitialPoint::Provided;
};

struct DcSplit {
  double f = 0.0;
  double h = 0.0;
};

/// Weighted sum-rate of the fixed assignment at p (equals f - h).
double objective(const DcProblem& problem, const std::vector<double>& p);

DcSplit split_dc(const DcProblem& problem, const std::vector<double>& p);

std::vector<double> grad_h(const DcProblem& problem, const std::vector<double>& p);

/// Surrogate f(p) - h(p_t) - grad_h(p_t)^T (p - p_t).
double surrogate(const DcProblem& problem, const std::vector<double>& p_t,
                 const std::vector<double>& p);

struct InnerResult {
  std::vector<double> p;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Raised when the inner solver exhausts its iteration cap.
class InnerSolveError : public std::runtime_error {
 public:
  InnerSolveError(const std::string& what, InnerResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const InnerResult& best() const { return best_; }

 private:
  InnerResult best_;
};

/// Maximises the surrogate linearised at `p_t` subject to the BS budget, the
/// per-user uplink budgets and p >= 0. Spectral projected gradient with a
/// monotone Armijo search, started from p_t.
InnerResult inner_solve(const DcProblem& problem, const std::vector<double>& p_t,
                        const DcSettings& settings);

/// Projected-gradient residual of the surrogate at p, in budget-normalised
/// coordinates (x = p / budget) with the gradient divided by
/// max(1, its max-norm).
double surrogate_kkt_residual(const DcProblem& problem, const std::vector<double>& p_t,
                              const std::vector<double>& p);

struct DcResult {
  PowerAllocation powers;
  std::vector<double> trace;  // objective after each outer iteration
  bool converged = false;
  double initial_objective = 0.0;
};

/// Builds a feasible starting point. For `Provided`, `hint` (typically the
/// allocator's capped powers) is restricted to the assignment and scaled
/// down per budget where it overshoots.
std::vector<double> initial_point(const DcProblem& problem, InitialPoint rule,
                                  const PowerAllocation* hint = nullptr);

DcResult dc_iterate(const DcProblem& problem, const DcSettings& settings,
                    const PowerAllocation* hint = nullptr);

/// True when p satisfies the budgets (within kPowerTolerance), p >= 0 and
/// zero power on absent slots.
bool feasible(const DcProblem& problem, const std::vector<double>& p);

/// Weighted water-filling: maximise sum w_i log2(1 + g_i p_i / N_i) subject to
/// sum p_i <= budget, p_i >= 0. Channels with w_i == 0 or g_i == 0 get nothing.
std::vector<double> waterfill(const std::vector<double>& weights, const std::vector<double>& gains,
                              const std::vector<double>& noises, double budget);

/// Euclidean projection of x onto {y >= 0, sum y <= radius}.
void project_capped_simplex(std::vector<double>& x, double radius);

}  // namespace fdra::dcpower
