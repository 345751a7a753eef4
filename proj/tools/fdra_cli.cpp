// Command-line experiment runner.
//
//   fdra run <config> [--out PATH] [--format csv|json] [--threads T]
//   fdra templates

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fdra/experiment.hpp"

namespace {

using fdra::experiment::ExperimentConfig;
using fdra::experiment::OutputFormat;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

int run(const std::string& config_path, const std::string& out_override,
        const std::string& format_override, int threads) {
  ExperimentConfig config = fdra::experiment::load_config(config_path);
  if (!out_override.empty()) config.output_path = out_override;
  if (format_override == "csv") config.format = OutputFormat::Csv;
  if (format_override == "json") config.format = OutputFormat::Json;

  if (config.axis == fdra::experiment::SweepAxis::Convergence) {
    const auto table = fdra::experiment::run_convergence(config, threads);
    emit(config.output_path, config.format == OutputFormat::Json
                                 ? fdra::experiment::to_json(config, table)
                                 : fdra::experiment::to_csv(table));
    if (table.infeasible_outputs > 0) {
      std::cerr << "error: " << table.infeasible_outputs << " infeasible scheme outputs\n";
      return 3;
    }
    return 0;
  }

  const auto table = fdra::experiment::run_experiment(config, threads);
  if (config.format == OutputFormat::Json) {
    emit(config.output_path, fdra::experiment::to_json(config, table));
  } else {
    emit(config.output_path, fdra::experiment::to_csv(table));
    if (!config.output_path.empty() && config.output_path != "-") {
      emit(config.output_path + ".drops.csv", fdra::experiment::samples_to_csv(table));
    }
  }
  if (table.infeasible_outputs > 0) {
    std::cerr << "error: " << table.infeasible_outputs << " infeasible scheme outputs\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex OFDMA resource allocation experiments"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path, out_path, format;
  int threads = 1;
  run_cmd->add_option("config", config_path, "Config file (key = value lines)")->required();
  run_cmd->add_option("--out", out_path, "Output path; '-' for stdout");
  run_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* templates_cmd = app.add_subcommand("templates", "List built-in scenario templates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*templates_cmd) {
      for (const auto& name : fdra::experiment::builtin_template_names()) {
        const auto c = fdra::experiment::builtin_template(name);
        const auto& t = c.scenario;
        std::cout << name << ": "
                  << (t.environment == fdra::channel::Environment::Outdoor ? "outdoor" : "indoor")
                  << ", radius " << t.cell_radius_m << " m, BS " << t.bs_power_dbm << " dBm, UE "
                  << t.ue_power_dbm << " dBm, N=" << t.num_subchannels << "\n";
      }
      return 0;
    }
    return run(config_path, out_path, format, threads);
  } catch (const fdra::experiment::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
