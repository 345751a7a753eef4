#include "fdra/core.hpp"

#include <cmath>
#include <sstream>

namespace fdra {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void require_size(std::size_t actual, int expected, const char* what) {
  if (actual != static_cast<std::size_t>(expected)) {
    std::ostringstream os;
    os << what << ": expected " << expected << " entries, got " << actual;
    throw DimensionMismatch(os.str());
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void NetworkScenario::validate() const {
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  if (num_subchannels < 1) throw std::invalid_argument("num_subchannels must be >= 1");
  require_size(duplex.size(), num_users, "duplex");
  require_size(user_power.size(), num_users, "user_power");
  require_size(dl_weight.size(), num_users, "dl_weight");
  require_size(ul_weight.size(), num_users, "ul_weight");
  require_size(user_noise.size(), num_users, "user_noise");
  require_size(user_positions.size(), num_users, "user_positions");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  require_nonnegative(bs_power, "bs_power");
  require_nonnegative(bs_noise, "bs_noise");
  for (int k = 0; k < num_users; ++k) {
    require_nonnegative(user_power[idx(k)], "user_power");
    require_nonnegative(dl_weight[idx(k)], "dl_weight");
    require_nonnegative(ul_weight[idx(k)], "ul_weight");
    require_nonnegative(user_noise[idx(k)], "user_noise");
  }
}

NetworkScenario make_uniform_scenario(int num_users, int num_subchannels, double bs_power,
                                      double user_power, double beta, double bs_noise,
                                      double user_noise, Duplex duplex) {
  NetworkScenario s;
  s.num_users = num_users;
  s.num_subchannels = num_subchannels;
  const auto k = idx(num_users);
  s.duplex.assign(k, duplex);
  s.bs_power = bs_power;
  s.user_power.assign(k, user_power);
  s.dl_weight.assign(k, 1.0);
  s.ul_weight.assign(k, 1.0);
  s.beta = beta;
  s.bs_noise = bs_noise;
  s.user_noise.assign(k, user_noise);
  s.user_positions.assign(k, Point{});
  return s;
}

ChannelRealization::ChannelRealization(int num_users, int num_subchannels)
    : num_users_(num_users),
      num_subchannels_(num_subchannels),
      bs_user_(idx(num_users) * idx(num_subchannels), 0.0),
      user_user_(idx(num_users) * idx(num_users) * idx(num_subchannels), 0.0) {
  if (num_users < 1 || num_subchannels < 1) {
    throw std::invalid_argument("channel realization needs K >= 1 and N >= 1");
  }
}

void ChannelRealization::set_bs_user(int k, int n, double gain) {
  require_nonnegative(gain, "channel gain");
  bs_user_[index(k, n)] = gain;
}

void ChannelRealization::set_user_user(int k, int j, int n, double gain) {
  require_nonnegative(gain, "channel gain");
  user_user_[index(k, j, n)] = gain;
  user_user_[index(j, k, n)] = gain;
}

void ChannelRealization::validate_against(const NetworkScenario& scenario) const {
  if (num_users_ != scenario.num_users || num_subchannels_ != scenario.num_subchannels) {
    std::ostringstream os;
    os << "channel realization is " << num_users_ << "x" << num_subchannels_
       << " but scenario is " << scenario.num_users << "x" << scenario.num_subchannels;
    throw DimensionMismatch(os.str());
  }
}

std::vector<int> Assignment::downlink_set(int k) const {
  std::vector<int> out;
  for (int n = 0; n < num_subchannels(); ++n) {
    if (dl_user[idx(n)] == k) out.push_back(n);
  }
  return out;
}

std::vector<int> Assignment::uplink_set(int k) const {
  std::vector<int> out;
  for (int n = 0; n < num_subchannels(); ++n) {
    if (ul_user[idx(n)] == k) out.push_back(n);
  }
  return out;
}

std::vector<double> PowerAllocation::flatten() const {
  std::vector<double> p;
  p.reserve(dl.size() + ul.size());
  p.insert(p.end(), dl.begin(), dl.end());
  p.insert(p.end(), ul.begin(), ul.end());
  return p;
}

PowerAllocation PowerAllocation::unflatten(const std::vector<double>& p) {
  if (p.size() % 2 != 0) throw DimensionMismatch("power vector length must be even (2N)");
  const auto n = p.size() / 2;
  PowerAllocation out;
  out.dl.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
  out.ul.assign(p.begin() + static_cast<std::ptrdiff_t>(n), p.end());
  return out;
}

double effective_interference_gain(const NetworkScenario& scenario,
                                   const ChannelRealization& channels, int dl_user, int ul_user,
                                   int subchannel) {
  if (dl_user < 0 || dl_user >= scenario.num_users || ul_user < 0 ||
      ul_user >= scenario.num_users) {
    throw std::out_of_range("user index out of range");
  }
  if (subchannel < 0 || subchannel >= scenario.num_subchannels) {
    throw std::out_of_range("sub-channel index out of range");
  }
  if (dl_user == ul_user) {
    if (!scenario.is_full_duplex(dl_user)) {
      throw ConstraintViolation("half-duplex user " + std::to_string(dl_user) +
                                " cannot receive and transmit on the same sub-channel");
    }
    return scenario.beta;
  }
  return channels.user_user(dl_user, ul_user, subchannel);
}

RateReport weighted_sum_rate(const NetworkScenario& scenario, const ChannelRealization& channels,
                             const Assignment& assignment, const PowerAllocation& powers) {
  channels.validate_against(scenario);
  require_size(assignment.dl_user.size(), scenario.num_subchannels, "assignment.dl_user");
  require_size(assignment.ul_user.size(), scenario.num_subchannels, "assignment.ul_user");
  require_size(powers.dl.size(), scenario.num_subchannels, "powers.dl");
  require_size(powers.ul.size(), scenario.num_subchannels, "powers.ul");

  RateReport report;
  for (int n = 0; n < scenario.num_subchannels; ++n) {
    const auto& k = assignment.dl_user[idx(n)];
    const auto& j = assignment.ul_user[idx(n)];
    const double p_dl = k ? powers.dl[idx(n)] : 0.0;
    const double p_ul = j ? powers.ul[idx(n)] : 0.0;
    if (k) {
      const double interference =
          j ? effective_interference_gain(scenario, channels, *k, *j, n) * p_ul : 0.0;
      const double sinr = channels.bs_user(*k, n) * p_dl /
                          (scenario.user_noise[idx(*k)] + interference);
      report.downlink += scenario.dl_weight[idx(*k)] * std::log2(1.0 + sinr);
    }
    if (j) {
      const double self = k ? scenario.beta * p_dl : 0.0;
      const double sinr = channels.bs_user(*j, n) * p_ul / (scenario.bs_noise + self);
      report.uplink += scenario.ul_weight[idx(*j)] * std::log2(1.0 + sinr);
    }
  }
  report.sum = report.downlink + report.uplink;
  return report;
}

FeasibilityReport check_feasible(const NetworkScenario& scenario, const Assignment& assignment,
                                 const PowerAllocation& powers) {
  FeasibilityReport report;
  auto fail = [&report](int constraint, std::string detail) {
    report.feasible = false;
    report.violations.push_back({constraint, std::move(detail)});
  };

  const int n_sub = scenario.num_subchannels;
  if (assignment.dl_user.size() != idx(n_sub) || powers.dl.size() != idx(n_sub)) {
    fail(10, "downlink vectors do not have one entry per sub-channel");
    return report;
  }
  if (assignment.ul_user.size() != idx(n_sub) || powers.ul.size() != idx(n_sub)) {
    fail(9, "uplink vectors do not have one entry per sub-channel");
    return report;
  }

  auto valid_user = [&scenario](const std::optional<int>& u) {
    return !u || (*u >= 0 && *u < scenario.num_users);
  };

  double bs_total = 0.0;
  std::vector<double> user_total(idx(scenario.num_users), 0.0);
  for (int n = 0; n < n_sub; ++n) {
    const auto& k = assignment.dl_user[idx(n)];
    const auto& j = assignment.ul_user[idx(n)];
    const double p_dl = powers.dl[idx(n)];
    const double p_ul = powers.ul[idx(n)];

    // A single owner per slot makes (7) and (8) structural; an out-of-range
    // owner is the only way to break them.
    if (!valid_user(k)) fail(7, "sub-channel " + std::to_string(n) + " has an invalid downlink user");
    if (!valid_user(j)) fail(8, "sub-channel " + std::to_string(n) + " has an invalid uplink user");

    if (!(p_dl >= 0.0) || !(p_ul >= 0.0)) {
      fail(6, "negative power on sub-channel " + std::to_string(n));
    }
    if ((!k && p_dl != 0.0) || (!j && p_ul != 0.0)) {
      fail(6, "nonzero power on unassigned slot of sub-channel " + std::to_string(n));
    }
    if (k && valid_user(k)) bs_total += p_dl;
    if (j && valid_user(j)) user_total[idx(*j)] += p_ul;

    if (k && j && *k == *j && valid_user(k) && !scenario.is_full_duplex(*k)) {
      fail(11, "half-duplex user " + std::to_string(*k) + " both receives and transmits on sub-channel " +
                   std::to_string(n));
    }
  }

  if (bs_total > scenario.bs_power + kPowerTolerance) {
    std::ostringstream os;
    os << "base-station power " << bs_total << " W exceeds budget " << scenario.bs_power << " W";
    fail(4, os.str());
  }
  for (int j = 0; j < scenario.num_users; ++j) {
    if (user_total[idx(j)] > scenario.user_power[idx(j)] + kPowerTolerance) {
      std::ostringstream os;
      os << "user " << j << " power " << user_total[idx(j)] << " W exceeds budget "
         << scenario.user_power[idx(j)] << " W";
      fail(5, os.str());
    }
  }
  return report;
}

}  // namespace fdra
