#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fdra/channel.hpp"
#include "fdra/core.hpp"
#include "fdra/schemes.hpp"

// Monte-Carlo experiment runner: flat key/value configs, sweeps over user
// count, self-interference level or full-duplex user fraction, and CSV/JSON
// emission of per-point sum-rate statistics or DC convergence traces.
//
// Config format: one `key = value` per line, `#` starts a comment. Keys:
//
//   template       outdoor | indoor | two_user            (default outdoor)
//   schemes        comma list of HD-D, HD-U, FD-HD, FD-FD, FD, HHD, UB, OPT
//   axis           user_count | beta_db | fd_fraction | convergence
//   values         comma list of axis values (user counts for convergence)
//   drops          Monte-Carlo drops per point              (default 200)
//   seed           base seed                                (default 1)
//   users          user count when the axis is not user_count
//   beta           "-90 dB" style or a linear value in [0, 1]
//   fd_fraction    share of full-duplex users in [0, 1]; the first
//                  round(fraction * K) users are full duplex
//   common_drops   true | false (default false): reuse the same drop seeds
//                  at every axis value instead of hashing the value in
//   dl_weights     comma list, one per user
//   ul_weights     comma list, one per user
//   output         output path (stdout when absent)
//   format         csv | json
//
// Template overrides: environment, cell_radius_m, carrier_mhz,
// num_subchannels, subchannel_bandwidth_hz, noise_density_dbm_hz,
// bs_power_dbm, ue_power_dbm, ue_height_m, bs_height_m.

namespace fdra::experiment {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepAxis { UserCount, BetaDb, FdFraction, Convergence };
enum class OutputFormat { Csv, Json };

std::string_view to_string(SweepAxis axis);

/// Extra scheme only the runner knows: exhaustive search (tiny cells only).
inline constexpr std::string_view kOracleScheme = "OPT";

struct SchemeChoice {
  std::optional<schemes::Scheme> scheme;  // empty = exhaustive oracle
  std::string name;
};

struct ExperimentConfig {
  std::string template_name = "outdoor";
  channel::ScenarioTemplate scenario = channel::outdoor_template();
  std::vector<SchemeChoice> schemes;
  SweepAxis axis = SweepAxis::UserCount;
  std::vector<double> axis_values;
  int drops = 200;
  std::uint64_t base_seed = 1;
  int num_users = 20;
  double beta = 0.0;  // linear
  double fd_fraction = 1.0;
  bool common_drops = false;
  std::vector<double> dl_weights;  // empty = all ones
  std::vector<double> ul_weights;
  std::string output_path;
  OutputFormat format = OutputFormat::Csv;

  void validate() const;
};

std::vector<std::string> builtin_template_names();
/// Throws ConfigError for unknown names.
ExperimentConfig builtin_template(std::string_view name);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Accepts "-90 dB", "-90dB", "-inf dB" or a plain linear value.
double parse_beta(std::string_view text);

std::uint64_t drop_seed(std::uint64_t base_seed, double axis_value, int drop_index);

struct Drop {
  NetworkScenario scenario;
  ChannelRealization channels;
  std::uint64_t seed = 0;
};

/// Regenerates one drop exactly as the runner sees it.
Drop draw_drop(const ExperimentConfig& config, double axis_value, int drop_index);

struct Sample {
  int drop = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
};

struct PointResult {
  double axis_value = 0.0;
  std::string scheme;
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
  int drops = 0;
  std::vector<Sample> samples;
};

struct ResultTable {
  SweepAxis axis = SweepAxis::UserCount;
  std::vector<PointResult> points;  // axis-major, then scheme order of the config
  int infeasible_outputs = 0;
};

ResultTable run_experiment(const ExperimentConfig& config, int threads = 1);

struct TraceRow {
  double axis_value = 0.0;
  int drop = 0;
  std::uint64_t seed = 0;
  int iteration = 0;
  double objective = 0.0;
};

struct TraceTable {
  std::vector<TraceRow> rows;
  int infeasible_outputs = 0;
};

/// FD scheme traces for every drop of every axis value (user counts).
TraceTable run_convergence(const ExperimentConfig& config, int threads = 1);

std::string to_csv(const ResultTable& table);
/// Per-drop companion table: axis_value, scheme, drop, seed, sum_rate.
std::string samples_to_csv(const ResultTable& table);
std::string to_json(const ExperimentConfig& config, const ResultTable& table);
std::string to_csv(const TraceTable& table);
std::string to_json(const ExperimentConfig& config, const TraceTable& table);

}  // namespace fdra::experiment
