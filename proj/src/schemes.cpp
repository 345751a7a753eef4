#include "fdra/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fdra/allocator.hpp"

namespace fdra::schemes {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

SchemeResult finish(const NetworkScenario& scenario, const ChannelRealization& channels,
                    Assignment assignment, PowerAllocation powers,
                    std::vector<double> trace = {}) {
  SchemeResult out;
  out.rates = weighted_sum_rate(scenario, channels, assignment, powers);
  out.rates.objective_trace = std::move(trace);
  out.assignment = std::move(assignment);
  out.powers = std::move(powers);
  return out;
}

// Multi-level water-filling of the BS budget over every downlink slot.
void fill_downlink(const NetworkScenario& scenario, const ChannelRealization& channels,
                   const Assignment& assignment, PowerAllocation& powers) {
  std::vector<int> subs;
  std::vector<double> w, g, noise;
  for (int n = 0; n < scenario.num_subchannels; ++n) {
    if (const auto& k = assignment.dl_user[idx(n)]) {
      subs.push_back(n);
      w.push_back(scenario.dl_weight[idx(*k)]);
      g.push_back(channels.bs_user(*k, n));
      noise.push_back(scenario.user_noise[idx(*k)]);
    }
  }
  const auto p = dcpower::waterfill(w, g, noise, scenario.bs_power);
  for (std::size_t i = 0; i < subs.size(); ++i) powers.dl[idx(subs[i])] = p[i];
}

// Each uplink user water-fills its own budget over its own sub-channels.
void fill_uplink(const NetworkScenario& scenario, const ChannelRealization& channels,
                 const Assignment& assignment, PowerAllocation& powers) {
  for (int j = 0; j < scenario.num_users; ++j) {
    const auto subs = assignment.uplink_set(j);
    if (subs.empty()) continue;
    std::vector<double> w(subs.size(), scenario.ul_weight[idx(j)]);
    std::vector<double> g, noise(subs.size(), scenario.bs_noise);
    for (int n : subs) g.push_back(channels.bs_user(j, n));
    const auto p = dcpower::waterfill(w, g, noise, scenario.user_power[idx(j)]);
    for (std::size_t i = 0; i < subs.size(); ++i) powers.ul[idx(subs[i])] = p[i];
  }
}

// Zero-power slots are released so that every reported owner transmits.
void drop_silent_slots(Assignment& assignment, const PowerAllocation& powers) {
  for (int n = 0; n < assignment.num_subchannels(); ++n) {
    if (powers.dl[idx(n)] == 0.0) assignment.dl_user[idx(n)].reset();
    if (powers.ul[idx(n)] == 0.0) assignment.ul_user[idx(n)].reset();
  }
}

NetworkScenario with_duplex(const NetworkScenario& scenario, Duplex d) {
  NetworkScenario s = scenario;
  std::fill(s.duplex.begin(), s.duplex.end(), d);
  return s;
}

}  // namespace

SchemeResult scheme_fd(const NetworkScenario& scenario, const ChannelRealization& channels,
                       const dcpower::DcSettings& settings) {
  const auto alloc = allocator::allocate(scenario, channels);
  const auto problem = dcpower::DcProblem::build(scenario, channels, alloc.assignment);
  auto dc = dcpower::dc_iterate(problem, settings, &alloc.provisional);
  return finish(scenario, channels, alloc.assignment, std::move(dc.powers), std::move(dc.trace));
}

double weighted_equal_split_rate(const NetworkScenario& scenario,
                                 const ChannelRealization& channels, int user, int subchannel) {
  const double p = scenario.bs_power / scenario.num_subchannels;
  return scenario.dl_weight[idx(user)] *
         std::log2(1.0 + channels.bs_user(user, subchannel) * p / scenario.user_noise[idx(user)]);
}

SchemeResult scheme_hd_downlink(const NetworkScenario& scenario,
                                const ChannelRealization& channels) {
  scenario.validate();
  channels.validate_against(scenario);
  Assignment assignment(scenario.num_subchannels);
  for (int n = 0; n < scenario.num_subchannels; ++n) {
    double best = 0.0;
    for (int k = 0; k < scenario.num_users; ++k) {
      const double r = weighted_equal_split_rate(scenario, channels, k, n);
      if (r > best) {
        best = r;
        assignment.dl_user[idx(n)] = k;
      }
    }
  }
  PowerAllocation powers(scenario.num_subchannels);
  fill_downlink(scenario, channels, assignment, powers);
  drop_silent_slots(assignment, powers);
  return finish(scenario, channels, std::move(assignment), std::move(powers));
}

SchemeResult scheme_hd_uplink(const NetworkScenario& scenario, const ChannelRealization& channels) {
  scenario.validate();
  channels.validate_against(scenario);
  const int num_users = scenario.num_users;
  Assignment assignment(scenario.num_subchannels);
  std::vector<std::vector<int>> owned(idx(num_users));

  // Rate of user j over `subs` (plus `extra` when >= 0) with its budget split equally.
  auto equal_split_rate = [&](int j, const std::vector<int>& subs, int extra) {
    const std::size_t count = subs.size() + (extra >= 0 ? 1 : 0);
    if (count == 0) return 0.0;
    const double p = scenario.user_power[idx(j)] / static_cast<double>(count);
    double r = 0.0;
    auto add = [&](int n) { r += std::log2(1.0 + channels.bs_user(j, n) * p / scenario.bs_noise); };
    for (int n : subs) add(n);
    if (extra >= 0) add(extra);
    return scenario.ul_weight[idx(j)] * r;
  };

  for (int n : allocator::rank_subchannels(channels)) {
    double best = 0.0;
    std::optional<int> winner;
    for (int j = 0; j < num_users; ++j) {
      const double marginal =
          equal_split_rate(j, owned[idx(j)], n) - equal_split_rate(j, owned[idx(j)], -1);
      if (marginal > best) {
        best = marginal;
        winner = j;
      }
    }
    if (winner) {
      assignment.ul_user[idx(n)] = *winner;
      owned[idx(*winner)].push_back(n);
    }
  }
  PowerAllocation powers(scenario.num_subchannels);
  fill_uplink(scenario, channels, assignment, powers);
  drop_silent_slots(assignment, powers);
  return finish(scenario, channels, std::move(assignment), std::move(powers));
}

SchemeResult scheme_hhd(const NetworkScenario& scenario, const ChannelRealization& channels) {
  auto alloc = allocator::allocate(scenario, channels, pairwise::CandidateSet::Exclusive);
  PowerAllocation powers(scenario.num_subchannels);
  fill_downlink(scenario, channels, alloc.assignment, powers);
  fill_uplink(scenario, channels, alloc.assignment, powers);
  drop_silent_slots(alloc.assignment, powers);
  return finish(scenario, channels, std::move(alloc.assignment), std::move(powers));
}

RateReport scheme_upper_bound(const NetworkScenario& scenario, const ChannelRealization& channels) {
  RateReport out;
  out.downlink = scheme_hd_downlink(scenario, channels).rates.sum;
  out.uplink = scheme_hd_uplink(scenario, channels).rates.sum;
  out.sum = out.downlink + out.uplink;
  return out;
}

SchemeResult exhaustive_oracle(const NetworkScenario& scenario, const ChannelRealization& channels,
                               const ExhaustiveSettings& settings) {
  scenario.validate();
  channels.validate_against(scenario);
  if (scenario.num_users > settings.max_users || scenario.num_subchannels > settings.max_subchannels) {
    throw std::invalid_argument("exhaustive search is limited to K <= " +
                                std::to_string(settings.max_users) + " and N <= " +
                                std::to_string(settings.max_subchannels));
  }
  const int num_users = scenario.num_users;
  const int n_sub = scenario.num_subchannels;

  // Legal (dl, ul) options for one sub-channel; -1 means unused.
  std::vector<std::pair<int, int>> options;
  for (int k = -1; k < num_users; ++k) {
    for (int j = -1; j < num_users; ++j) {
      if (k >= 0 && k == j && !scenario.is_full_duplex(k)) continue;
      options.emplace_back(k, j);
    }
  }

  const auto warm = allocator::allocate(scenario, channels);
  constexpr std::array starts = {dcpower::InitialPoint::Zero,
                                 dcpower::InitialPoint::UniformFullBudget,
                                 dcpower::InitialPoint::Provided};

  SchemeResult best;
  bool have = false;
  std::vector<std::size_t> digit(idx(n_sub), 0);
  while (true) {
    Assignment a(n_sub);
    for (int n = 0; n < n_sub; ++n) {
      const auto [k, j] = options[digit[idx(n)]];
      if (k >= 0) a.dl_user[idx(n)] = k;
      if (j >= 0) a.ul_user[idx(n)] = j;
    }
    const auto problem = dcpower::DcProblem::build(scenario, channels, a);
    for (auto start : starts) {
      auto dc_settings = settings.dc;
      dc_settings.initial_point = start;
      dcpower::DcResult dc;
      try {
        dc = dcpower::dc_iterate(problem, dc_settings, &warm.provisional);
      } catch (const dcpower::InnerSolveError&) {
        continue;
      }
      const auto rates = weighted_sum_rate(scenario, channels, a, dc.powers);
      if (!have || rates.sum > best.rates.sum) {
        best.assignment = a;
        best.powers = dc.powers;
        best.rates = rates;
        best.rates.objective_trace = dc.trace;
        have = true;
      }
    }

    int pos = 0;
    while (pos < n_sub && ++digit[idx(pos)] == options.size()) digit[idx(pos++)] = 0;
    if (pos == n_sub) break;
  }
  return best;
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::HdDownlink: return "HD-D";
    case Scheme::HdUplink: return "HD-U";
    case Scheme::FdHd: return "FD-HD";
    case Scheme::FdFd: return "FD-FD";
    case Scheme::Fd: return "FD";
    case Scheme::Hhd: return "HHD";
    case Scheme::UpperBound: return "UB";
  }
  return "?";
}

std::vector<Scheme> all_schemes() {
  return {Scheme::HdDownlink, Scheme::HdUplink, Scheme::FdHd, Scheme::FdFd,
          Scheme::Fd,         Scheme::Hhd,      Scheme::UpperBound};
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (auto s : all_schemes()) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

double run_scheme(Scheme scheme, const NetworkScenario& scenario,
                  const ChannelRealization& channels, SchemeResult* result) {
  SchemeResult r;
  switch (scheme) {
    case Scheme::HdDownlink: r = scheme_hd_downlink(scenario, channels); break;
    case Scheme::HdUplink: r = scheme_hd_uplink(scenario, channels); break;
    case Scheme::FdHd: r = scheme_fd(with_duplex(scenario, Duplex::Half), channels); break;
    case Scheme::FdFd: r = scheme_fd(with_duplex(scenario, Duplex::Full), channels); break;
    case Scheme::Fd: r = scheme_fd(scenario, channels); break;
    case Scheme::Hhd: r = scheme_hhd(scenario, channels); break;
    case Scheme::UpperBound: return scheme_upper_bound(scenario, channels).sum;
  }
  const double sum = r.rates.sum;
  if (result != nullptr) *result = std::move(r);
  return sum;
}

}  // namespace fdra::schemes
