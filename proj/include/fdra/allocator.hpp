#pragma once

#include <optional>
#include <vector>

#include "fdra/core.hpp"
#include "fdra/pairwise.hpp"

// Greedy sub-channel assignment. Sub-channels are visited in decreasing order
// of their best BS-user gain; each one goes to the (downlink, uplink) user
// pair whose single-sub-channel optimum is largest, with the power caps of
// the base station and each uplink user divided by the number of
// sub-channels they have already won (plus one).

namespace fdra::allocator {

/// Indices n sorted by max_k g_k(n), largest first; equal keys keep
/// ascending index order.
std::vector<int> rank_subchannels(const ChannelRealization& channels);

/// One greedy iteration, kept for inspection.
struct AllocationStep {
  int subchannel = 0;
  double dl_cap = 0.0;                  // P0 / d_0 at this iteration
  std::vector<double> ul_caps;          // P_k / d_k at this iteration
  std::optional<int> dl_user;
  std::optional<int> ul_user;
  double p_dl = 0.0;
  double p_ul = 0.0;
  double objective = 0.0;
  int bs_divisor = 1;                   // d_0 used for this iteration
  std::vector<int> user_divisors;       // d_k used for this iteration
};

struct AllocationResult {
  Assignment assignment;
  PowerAllocation provisional;  // per-iteration capped powers, not budget-feasible in general
  std::vector<AllocationStep> steps;
};

AllocationResult allocate(const NetworkScenario& scenario, const ChannelRealization& channels,
                          pairwise::CandidateSet candidates = pairwise::CandidateSet::Full);

}  // namespace fdra::allocator
