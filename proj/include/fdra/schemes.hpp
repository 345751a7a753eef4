#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdra/core.hpp"
#include "fdra/dcpower.hpp"

// Resource-allocation schemes compared in the experiments. Every scheme maps
// one drop (scenario + channels) to an assignment, feasible powers and the
// resulting weighted rates.

namespace fdra::schemes {

struct SchemeResult {
  Assignment assignment;
  PowerAllocation powers;
  RateReport rates;
};

/// Greedy pair assignment followed by DC power allocation. The users' duplex
/// flags decide whether self-pairing is allowed.
SchemeResult scheme_fd(const NetworkScenario& scenario, const ChannelRealization& channels,
                       const dcpower::DcSettings& settings = {});

/// Half-duplex downlink only: each sub-channel to the user with the best
/// weighted rate at an equal power split, then multi-level water-filling.
SchemeResult scheme_hd_downlink(const NetworkScenario& scenario,
                                const ChannelRealization& channels);

/// Half-duplex uplink only: greedy marginal-rate assignment, then per-user
/// water-filling over each user's sub-channels.
SchemeResult scheme_hd_uplink(const NetworkScenario& scenario, const ChannelRealization& channels);

/// Hybrid half-duplex BS: every sub-channel is downlink-only or uplink-only.
SchemeResult scheme_hhd(const NetworkScenario& scenario, const ChannelRealization& channels);

/// HD downlink rate plus HD uplink rate, as if the two ran on separate spectrum.
/// `downlink`/`uplink` carry the two parts.
RateReport scheme_upper_bound(const NetworkScenario& scenario, const ChannelRealization& channels);

/// Predicate used by the HD downlink assignment.
double weighted_equal_split_rate(const NetworkScenario& scenario,
                                 const ChannelRealization& channels, int user, int subchannel);

struct ExhaustiveSettings {
  dcpower::DcSettings dc;
  int max_users = 3;
  int max_subchannels = 4;
};

/// Enumerates every legal (downlink, uplink) assignment, runs the DC power
/// allocation from zero, uniform full-budget and allocator warm starts, and
/// keeps the best. Throws std::invalid_argument above the size guard.
SchemeResult exhaustive_oracle(const NetworkScenario& scenario, const ChannelRealization& channels,
                               const ExhaustiveSettings& settings = {});

/// Scheme identifiers used by the experiment runner.
enum class Scheme { HdDownlink, HdUplink, FdHd, FdFd, Fd, Hhd, UpperBound };

std::string_view to_string(Scheme s);
/// Accepts the names printed by to_string.
std::optional<Scheme> parse_scheme(std::string_view name);
std::vector<Scheme> all_schemes();

/// Weighted sum-rate of a scheme on one drop. FD-HD clears every user's FD
/// flag, FD-FD sets all of them, FD keeps the scenario's own flags.
/// `result` receives the full outcome when the scheme has one (not for the bound).
double run_scheme(Scheme scheme, const NetworkScenario& scenario,
                  const ChannelRealization& channels, SchemeResult* result = nullptr);

}  // namespace fdra::schemes
