#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Domain types for single-cell OFDMA with a full-duplex base station, plus
// exact evaluation of the weighted downlink + uplink sum-rate.
//
// Every quantity is linear scale: powers and noises in Watts, gains
// dimensionless. Rates are in bits (log base 2) per sub-channel use.

namespace fdra {

/// Thrown when an operation is asked to do something the system model forbids,
/// e.g. pairing a half-duplex user with itself.
class ConstraintViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when vectors/tensors disagree with the scenario's K or N.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Duplex { Half, Full };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Static description of one cell. Index conventions: users are 0-based
/// `k in [0, num_users)`, sub-channels 0-based `n in [0, num_subchannels)`.
struct NetworkScenario {
  int num_users = 0;
  int num_subchannels = 0;
  std::vector<Duplex> duplex;           // per user
  double bs_power = 0.0;                // P0, Watts
  std::vector<double> user_power;       // P_k, Watts
  std::vector<double> dl_weight;        // w_k
  std::vector<double> ul_weight;        // v_k
  double beta = 0.0;                    // self-interference coefficient in [0, 1]
  double bs_noise = 0.0;                // N0, Watts per sub-channel
  std::vector<double> user_noise;       // N_k, Watts per sub-channel
  Point bs_position;
  std::vector<Point> user_positions;

  bool is_full_duplex(int k) const { return duplex[static_cast<std::size_t>(k)] == Duplex::Full; }

  /// Throws std::invalid_argument (or DimensionMismatch) on any broken invariant.
  void validate() const;
};

/// Convenience: a scenario with uniform per-user parameters and positions at the origin.
NetworkScenario make_uniform_scenario(int num_users, int num_subchannels, double bs_power,
                                      double user_power, double beta, double bs_noise,
                                      double user_noise, Duplex duplex = Duplex::Half);

/// Per-drop channel power gains. BS-user gains are shared by uplink and
/// downlink (reciprocity); user-user gains are symmetric in (k, j).
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(int num_users, int num_subchannels);

  int num_users() const { return num_users_; }
  int num_subchannels() const { return num_subchannels_; }

  double bs_user(int k, int n) const { return bs_user_[index(k, n)]; }
  double user_user(int k, int j, int n) const { return user_user_[index(k, j, n)]; }

  void set_bs_user(int k, int n, double gain);
  /// Sets both (k, j) and (j, k).
  void set_user_user(int k, int j, int n, double gain);

  void validate_against(const NetworkScenario& scenario) const;

 private:
  std::size_t index(int k, int n) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(num_subchannels_) +
           static_cast<std::size_t>(n);
  }
  std::size_t index(int k, int j, int n) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(num_users_) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(num_subchannels_) +
           static_cast<std::size_t>(n);
  }

  int num_users_ = 0;
  int num_subchannels_ = 0;
  std::vector<double> bs_user_;
  std::vector<double> user_user_;
};

/// Per-sub-channel (downlink user, uplink user). An empty slot means the
/// sub-channel carries nothing in that direction.
struct Assignment {
  std::vector<std::optional<int>> dl_user;
  std::vector<std::optional<int>> ul_user;

  Assignment() = default;
  explicit Assignment(int num_subchannels)
      : dl_user(static_cast<std::size_t>(num_subchannels)),
        ul_user(static_cast<std::size_t>(num_subchannels)) {}

  int num_subchannels() const { return static_cast<int>(dl_user.size()); }
  std::vector<int> downlink_set(int k) const;
  std::vector<int> uplink_set(int k) const;
};

/// Fixed-length powers: one downlink and one uplink slot per sub-channel,
/// zero where the slot is unused.
struct PowerAllocation {
  std::vector<double> dl;
  std::vector<double> ul;

  PowerAllocation() = default;
  explicit PowerAllocation(int num_subchannels)
      : dl(static_cast<std::size_t>(num_subchannels), 0.0),
        ul(static_cast<std::size_t>(num_subchannels), 0.0) {}

  int num_subchannels() const { return static_cast<int>(dl.size()); }

  /// Layout [dl(0..N-1), ul(0..N-1)].
  std::vector<double> flatten() const;
  static PowerAllocation unflatten(const std::vector<double>& p);
};

struct RateReport {
  double downlink = 0.0;
  double uplink = 0.0;
  double sum = 0.0;
  std::vector<double> objective_trace;
};

/// I_{k,j}(n): beta when the downlink and uplink user coincide, otherwise the
/// user-user gain. Throws ConstraintViolation for a half-duplex self-pair.
double effective_interference_gain(const NetworkScenario& scenario,
                                   const ChannelRealization& channels, int dl_user, int ul_user,
                                   int subchannel);

RateReport weighted_sum_rate(const NetworkScenario& scenario, const ChannelRealization& channels,
                             const Assignment& assignment, const PowerAllocation& powers);

struct Violation {
  int constraint = 0;  // numbering follows the problem statement: 4..11
  std::string detail;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

inline constexpr double kPowerTolerance = 1e-9;

/// Never throws; malformed inputs are reported as violations.
FeasibilityReport check_feasible(const NetworkScenario& scenario, const Assignment& assignment,
                                 const PowerAllocation& powers);

}  // namespace fdra
