#include "fdra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fdra::channel {

namespace {

// Standard-specified engine plus explicit transforms, so draws are identical
// across standard library implementations.
class Stream {
 public:
  explicit Stream(RngSeed seed) : engine_(seed.value) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Unit-mean exponential, strictly positive.
  double exponential() {
    const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    return -std::log1p(-u);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t kTopologySalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kFadingSalt = 0xd1b54a32d192ed03ULL;

}  // namespace

void ScenarioTemplate::validate() const {
  if (!(cell_radius_m > 0.0)) throw std::invalid_argument("cell_radius must be > 0");
  if (!(carrier_mhz > 0.0)) throw std::invalid_argument("carrier_frequency must be > 0");
  if (num_subchannels < 1) throw std::invalid_argument("num_subchannels must be >= 1");
  if (!(subchannel_bandwidth_hz > 0.0)) {
    throw std::invalid_argument("subchannel_bandwidth must be > 0");
  }
}

ScenarioTemplate outdoor_template() {
  ScenarioTemplate t;
  t.name = "outdoor";
  t.environment = Environment::Outdoor;
  t.cell_radius_m = 1000.0;
  t.bs_power_dbm = 43.0;
  return t;
}

ScenarioTemplate indoor_template() {
  ScenarioTemplate t;
  t.name = "indoor";
  t.environment = Environment::Indoor;
  t.cell_radius_m = 20.0;
  t.bs_power_dbm = 24.0;
  return t;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double subchannel_noise_watts(const ScenarioTemplate& t) {
  return dbm_to_watts(t.noise_density_dbm_hz + 10.0 * std::log10(t.subchannel_bandwidth_hz));
}

std::vector<Point> sample_topology(const ScenarioTemplate& t, int num_users, RngSeed seed) {
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  Stream rng(RngSeed{seed.value ^ kTopologySalt});
  std::vector<Point> users;
  users.reserve(static_cast<std::size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    // Inverse-CDF radius keeps the density uniform over the area.
    const double r = t.cell_radius_m * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    users.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return users;
}

double pathloss_hata_urban(double f_mhz, double h_bs_m, double h_ue_m, double d_km) {
  if (!(d_km > 0.0)) throw std::domain_error("Hata distance must be > 0");
  const double lf = std::log10(f_mhz);
  const double lhb = std::log10(h_bs_m);
  const double a_hm = (1.1 * lf - 0.7) * h_ue_m - (1.56 * lf - 0.8);
  return 46.3 + 33.9 * lf - 13.82 * lhb - a_hm + (44.9 - 6.55 * lhb) * std::log10(d_km) + 3.0;
}

double pathloss_itu_indoor(double f_mhz, double d_m, double distance_coefficient,
                           double floor_loss_db) {
  const double d = std::max(d_m, 1.0);
  return 20.0 * std::log10(f_mhz) + distance_coefficient * std::log10(d) + floor_loss_db - 28.0;
}

double minimum_link_distance_m(Environment env) {
  return env == Environment::Indoor ? 1.0 : 10.0;
}

double bs_ue_pathloss_db(const ScenarioTemplate& t, double d_m) {
  const double d = std::max(d_m, minimum_link_distance_m(t.environment));
  if (t.environment == Environment::Outdoor) {
    return pathloss_hata_urban(t.carrier_mhz, t.bs_height_m, t.ue_height_m, d / 1000.0);
  }
  return pathloss_itu_indoor(t.carrier_mhz, d, t.itu_distance_coefficient, t.itu_floor_loss_db);
}

double ue_ue_pathloss_db(const ScenarioTemplate& t, double d_m) {
  const double d = std::max(d_m, minimum_link_distance_m(t.environment));
  if (t.environment == Environment::Outdoor) {
    return pathloss_hata_urban(t.carrier_mhz, t.ue_ue_tx_height_m, t.ue_height_m, d / 1000.0);
  }
  return pathloss_itu_indoor(t.carrier_mhz, d, t.itu_distance_coefficient, t.itu_floor_loss_db);
}

ChannelRealization sample_channels(const ScenarioTemplate& t, const std::vector<Point>& positions,
                                   RngSeed seed, Fading fading) {
  const int num_users = static_cast<int>(positions.size());
  const int n_sub = t.num_subchannels;
  ChannelRealization ch(num_users, n_sub);
  Stream rng(RngSeed{seed.value ^ kFadingSalt});
  auto draw = [&]() { return fading == Fading::Rayleigh ? rng.exponential() : 1.0; };

  const Point bs{};
  for (int k = 0; k < num_users; ++k) {
    const double mean = db_to_linear(-bs_ue_pathloss_db(t, distance(bs, positions[static_cast<std::size_t>(k)])));
    for (int n = 0; n < n_sub; ++n) ch.set_bs_user(k, n, mean * draw());
  }
  for (int k = 0; k < num_users; ++k) {
    for (int j = k + 1; j < num_users; ++j) {
      const double d = distance(positions[static_cast<std::size_t>(k)], positions[static_cast<std::size_t>(j)]);
      const double mean = db_to_linear(-ue_ue_pathloss_db(t, d));
      for (int n = 0; n < n_sub; ++n) ch.set_user_user(k, j, n, mean * draw());
    }
  }
  return ch;
}

std::vector<double> sample_fading_power(std::size_t count, RngSeed seed) {
  Stream rng(RngSeed{seed.value ^ kFadingSalt});
  std::vector<double> out(count);
  for (auto& x : out) x = rng.exponential();
  return out;
}

NetworkScenario make_scenario(const ScenarioTemplate& t, const std::vector<Point>& positions,
                              double beta, Duplex duplex) {
  const double noise = subchannel_noise_watts(t);
  NetworkScenario s = make_uniform_scenario(static_cast<int>(positions.size()), t.num_subchannels,
                                            dbm_to_watts(t.bs_power_dbm),
                                            dbm_to_watts(t.ue_power_dbm), beta, noise, noise,
                                            duplex);
  s.user_positions = positions;
  return s;
}

}  // namespace fdra::channel
