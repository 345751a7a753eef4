#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdra/core.hpp"

// Topology and channel generation for the indoor/outdoor cell layouts:
// uniform user drops over a disk, deterministic path loss, Rayleigh block
// fading (unit-mean exponential power gain, i.i.d. per link and sub-channel).

namespace fdra::channel {

enum class Environment { Outdoor, Indoor };

struct ScenarioTemplate {
  std::string name;
  Environment environment = Environment::Outdoor;
  double cell_radius_m = 1000.0;
  double carrier_mhz = 2000.0;
  int num_subchannels = 64;
  double subchannel_bandwidth_hz = 150e3;
  double noise_density_dbm_hz = -170.0;
  double bs_power_dbm = 43.0;
  double ue_power_dbm = 23.0;
  double ue_height_m = 1.5;          // h_m
  double bs_height_m = 30.0;         // h_B for BS-UE links
  double ue_ue_tx_height_m = 1.5;    // h_B used for UE-UE links
  double itu_distance_coefficient = 22.0;
  double itu_floor_loss_db = 9.0;

  void validate() const;
};

/// Outdoor cell: 1 km radius, 43 dBm BS, urban Hata path loss.
ScenarioTemplate outdoor_template();
/// Indoor cell: 20 m radius, 24 dBm BS, ITU indoor path loss.
ScenarioTemplate indoor_template();

struct RngSeed {
  std::uint64_t value = 0;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);

/// Thermal noise power over one sub-channel, Watts.
double subchannel_noise_watts(const ScenarioTemplate& t);

/// BS at the origin, users i.i.d. uniform over the disk.
std::vector<Point> sample_topology(const ScenarioTemplate& t, int num_users, RngSeed seed);

/// COST-231 Hata, urban (metropolitan) correction. f in MHz, heights in m,
/// distance in km. Throws std::domain_error for d <= 0.
double pathloss_hata_urban(double f_mhz, double h_bs_m, double h_ue_m, double d_km);

/// ITU indoor attenuation; distances below 1 m are treated as 1 m.
double pathloss_itu_indoor(double f_mhz, double d_m, double distance_coefficient,
                           double floor_loss_db);

/// Minimum link distance applied before evaluating path loss.
double minimum_link_distance_m(Environment env);

double bs_ue_pathloss_db(const ScenarioTemplate& t, double d_m);
double ue_ue_pathloss_db(const ScenarioTemplate& t, double d_m);

enum class Fading { Rayleigh, None };

/// `positions` holds the users only; the BS sits at the origin.
ChannelRealization sample_channels(const ScenarioTemplate& t, const std::vector<Point>& positions,
                                   RngSeed seed, Fading fading = Fading::Rayleigh);

/// Unit-mean exponential draws as used for the fading power; exposed for testing.
std::vector<double> sample_fading_power(std::size_t count, RngSeed seed);

/// Builds a scenario from a template: budgets and noise come from the
/// template, weights default to 1, all users get `duplex`.
NetworkScenario make_scenario(const ScenarioTemplate& t, const std::vector<Point>& positions,
                              double beta, Duplex duplex);

}  // namespace fdra::channel
