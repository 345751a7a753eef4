#include "fdra/allocator.hpp"

#include <algorithm>
#include <numeric>

namespace fdra::allocator {

namespace {
std::size_t idx(int i) { return static_cast<std::size_t>(i); }
}  // namespace

std::vector<int> rank_subchannels(const ChannelRealization& channels) {
  const int n_sub = channels.num_subchannels();
  std::vector<double> best(idx(n_sub), 0.0);
  for (int n = 0; n < n_sub; ++n) {
    for (int k = 0; k < channels.num_users(); ++k) {
      best[idx(n)] = std::max(best[idx(n)], channels.bs_user(k, n));
    }
  }
  std::vector<int> order(idx(n_sub));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&best](int a, int b) { return best[idx(a)] > best[idx(b)]; });
  return order;
}

AllocationResult allocate(const NetworkScenario& scenario, const ChannelRealization& channels,
                          pairwise::CandidateSet candidates) {
  scenario.validate();
  channels.validate_against(scenario);

  const int num_users = scenario.num_users;
  AllocationResult result;
  result.assignment = Assignment(scenario.num_subchannels);
  result.provisional = PowerAllocation(scenario.num_subchannels);

  int bs_divisor = 1;
  std::vector<int> user_divisors(idx(num_users), 1);

  for (int n : rank_subchannels(channels)) {
    AllocationStep step;
    step.subchannel = n;
    step.bs_divisor = bs_divisor;
    step.user_divisors = user_divisors;
    step.dl_cap = scenario.bs_power / bs_divisor;
    step.ul_caps.resize(idx(num_users));
    for (int j = 0; j < num_users; ++j) {
      step.ul_caps[idx(j)] = scenario.user_power[idx(j)] / user_divisors[idx(j)];
    }

    pairwise::PairSolution best;
    int best_k = -1;
    int best_j = -1;
    for (int k = 0; k < num_users; ++k) {
      for (int j = 0; j < num_users; ++j) {
        // A half-duplex user may still take one direction of the sub-channel
        // on its own; only the simultaneous corner is ruled out.
        const bool hd_self = j == k && !scenario.is_full_duplex(k);
        pairwise::PairInstance inst;
        inst.w_k = scenario.dl_weight[idx(k)];
        inst.v_j = scenario.ul_weight[idx(j)];
        inst.g_k = channels.bs_user(k, n);
        inst.g_j = channels.bs_user(j, n);
        inst.I_kj = j == k ? scenario.beta : channels.user_user(k, j, n);
        inst.N_k = scenario.user_noise[idx(k)];
        inst.N0 = scenario.bs_noise;
        inst.P_max1 = step.dl_cap;
        inst.P_max2 = step.ul_caps[idx(j)];
        inst.beta = scenario.beta;
        const auto sol =
            pairwise::solve_pair(inst, hd_self ? pairwise::CandidateSet::Exclusive : candidates);
        // Strict improvement keeps the lexicographically smallest (k, j) on ties.
        if (best_k < 0 || sol.objective > best.objective) {
          best = sol;
          best_k = k;
          best_j = j;
        }
      }
    }

    if (best.p_dl > 0.0) {
      result.assignment.dl_user[idx(n)] = best_k;
      result.provisional.dl[idx(n)] = best.p_dl;
      ++bs_divisor;
    }
    if (best.p_ul > 0.0) {
      result.assignment.ul_user[idx(n)] = best_j;
      result.provisional.ul[idx(n)] = best.p_ul;
      ++user_divisors[idx(best_j)];
    }
    step.dl_user = result.assignment.dl_user[idx(n)];
    step.ul_user = result.assignment.ul_user[idx(n)];
    step.p_dl = best.p_dl;
    step.p_ul = best.p_ul;
    step.objective = best.objective;
    result.steps.push_back(std::move(step));
  }
  return result;
}

}  // namespace fdra::allocator
