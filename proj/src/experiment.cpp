#include "fdra/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fdra::experiment {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end == text.c_str() || trim(std::string_view(end)).size() != 0 || std::isnan(v)) {
    throw ConfigError("invalid value for key '" + key + "': '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError("key '" + key + "' must be an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& piece : split_list(text)) out.push_back(parse_number(key, piece));
  if (out.empty()) throw ConfigError("key '" + key + "' needs at least one value");
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SchemeChoice parse_scheme_choice(const std::string& name) {
  if (name == kOracleScheme) return {std::nullopt, name};
  if (auto s = schemes::parse_scheme(name)) return {*s, name};
  throw ConfigError("unknown scheme '" + name + "' in key 'schemes'");
}

struct Evaluation {
  double sum_rate = 0.0;
  bool feasible = true;
};

bool passes(const NetworkScenario& s, const schemes::SchemeResult& r) {
  return check_feasible(s, r.assignment, r.powers).feasible;
}

Evaluation evaluate(const SchemeChoice& choice, const Drop& drop) {
  const auto& sc = drop.scenario;
  const auto& ch = drop.channels;
  if (!choice.scheme) {
    const auto r = schemes::exhaustive_oracle(sc, ch);
    return {r.rates.sum, passes(sc, r)};
  }
  if (*choice.scheme == schemes::Scheme::UpperBound) {
    const auto dl = schemes::scheme_hd_downlink(sc, ch);
    const auto ul = schemes::scheme_hd_uplink(sc, ch);
    return {dl.rates.sum + ul.rates.sum, passes(sc, dl) && passes(sc, ul)};
  }
  schemes::SchemeResult r;
  const double sum = schemes::run_scheme(*choice.scheme, sc, ch, &r);
  NetworkScenario checked = sc;
  if (*choice.scheme == schemes::Scheme::FdHd) std::fill(checked.duplex.begin(), checked.duplex.end(), Duplex::Half);
  if (*choice.scheme == schemes::Scheme::FdFd) std::fill(checked.duplex.begin(), checked.duplex.end(), Duplex::Full);
  return {sum, passes(checked, r)};
}

template <typename Task>
void parallel_for(std::size_t count, int threads, Task&& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            task(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto& t = c.scenario;
  if (key == "schemes") {
    c.schemes.clear();
    for (const auto& name : split_list(value)) c.schemes.push_back(parse_scheme_choice(name));
  } else if (key == "axis") {
    if (value == "user_count") c.axis = SweepAxis::UserCount;
    else if (value == "beta_db") c.axis = SweepAxis::BetaDb;
    else if (value == "fd_fraction") c.axis = SweepAxis::FdFraction;
    else if (value == "convergence") c.axis = SweepAxis::Convergence;
    else throw ConfigError("invalid value for key 'axis': '" + value + "'");
  } else if (key == "values") {
    c.axis_values = parse_numbers(key, value);
  } else if (key == "drops") {
    c.drops = parse_int(key, value);
  } else if (key == "seed") {
    const double v = parse_number(key, value);
    if (v < 0 || v != std::floor(v)) throw ConfigError("key 'seed' must be a nonnegative integer");
    c.base_seed = std::strtoull(value.c_str(), nullptr, 10);
  } else if (key == "users") {
    c.num_users = parse_int(key, value);
  } else if (key == "beta") {
    try {
      c.beta = parse_beta(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid value for key 'beta': ") + e.what());
    }
  } else if (key == "fd_fraction") {
    c.fd_fraction = parse_number(key, value);
  } else if (key == "common_drops") {
    if (value == "true") c.common_drops = true;
    else if (value == "false") c.common_drops = false;
    else throw ConfigError("invalid value for key 'common_drops': '" + value + "'");
  } else if (key == "dl_weights") {
    c.dl_weights = parse_numbers(key, value);
  } else if (key == "ul_weights") {
    c.ul_weights = parse_numbers(key, value);
  } else if (key == "output") {
    c.output_path = value;
  } else if (key == "format") {
    if (value == "csv") c.format = OutputFormat::Csv;
    else if (value == "json") c.format = OutputFormat::Json;
    else throw ConfigError("invalid value for key 'format': '" + value + "'");
  } else if (key == "environment") {
    if (value == "outdoor") t.environment = channel::Environment::Outdoor;
    else if (value == "indoor") t.environment = channel::Environment::Indoor;
    else throw ConfigError("invalid value for key 'environment': '" + value + "'");
  } else if (key == "cell_radius_m") {
    t.cell_radius_m = parse_number(key, value);
  } else if (key == "carrier_mhz") {
    t.carrier_mhz = parse_number(key, value);
  } else if (key == "num_subchannels") {
    t.num_subchannels = parse_int(key, value);
  } else if (key == "subchannel_bandwidth_hz") {
    t.subchannel_bandwidth_hz = parse_number(key, value);
  } else if (key == "noise_density_dbm_hz") {
    t.noise_density_dbm_hz = parse_number(key, value);
  } else if (key == "bs_power_dbm") {
    t.bs_power_dbm = parse_number(key, value);
  } else if (key == "ue_power_dbm") {
    t.ue_power_dbm = parse_number(key, value);
  } else if (key == "ue_height_m") {
    t.ue_height_m = parse_number(key, value);
  } else if (key == "bs_height_m") {
    t.bs_height_m = parse_number(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::UserCount: return "user_count";
    case SweepAxis::BetaDb: return "beta_db";
    case SweepAxis::FdFraction: return "fd_fraction";
    case SweepAxis::Convergence: return "convergence";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  if (schemes.empty()) throw ConfigError("key 'schemes' must list at least one scheme");
  if (axis_values.empty()) throw ConfigError("key 'values' must list at least one axis value");
  if (drops < 1) throw ConfigError("key 'drops' must be >= 1");
  if (num_users < 1) throw ConfigError("key 'users' must be >= 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("key 'beta' must lie in [0, 1] (linear)");
  if (!(fd_fraction >= 0.0 && fd_fraction <= 1.0)) {
    throw ConfigError("key 'fd_fraction' must lie in [0, 1]");
  }
  for (double v : axis_values) {
    if ((axis == SweepAxis::UserCount || axis == SweepAxis::Convergence) &&
        (v < 1 || v != std::floor(v))) {
      throw ConfigError("key 'values' must hold positive integer user counts for this axis");
    }
    if (axis == SweepAxis::FdFraction && !(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("key 'values' must lie in [0, 1] for the fd_fraction axis");
    }
    if (axis == SweepAxis::BetaDb && !(v <= 0.0)) {
      throw ConfigError("key 'values' must be <= 0 dB for the beta_db axis");
    }
  }
  if (axis == SweepAxis::Convergence) {
    if (schemes.size() != 1 || !schemes.front().scheme ||
        (*schemes.front().scheme != schemes::Scheme::Fd &&
         *schemes.front().scheme != schemes::Scheme::FdFd &&
         *schemes.front().scheme != schemes::Scheme::FdHd)) {
      throw ConfigError("key 'schemes' must select a single FD scheme for the convergence axis");
    }
  }
}

std::vector<std::string> builtin_template_names() { return {"outdoor", "indoor", "two_user"}; }

ExperimentConfig builtin_template(std::string_view name) {
  ExperimentConfig c;
  c.template_name = std::string(name);
  if (name == "outdoor") {
    c.scenario = channel::outdoor_template();
  } else if (name == "indoor") {
    c.scenario = channel::indoor_template();
  } else if (name == "two_user") {
    // One FD and one HD user on a handful of outdoor sub-channels, compared
    // against exhaustive search.
    c.scenario = channel::outdoor_template();
    c.scenario.name = "two_user";
    c.scenario.num_subchannels = 4;
    c.num_users = 2;
    c.fd_fraction = 0.5;
    c.beta = channel::db_to_linear(-90.0);
    c.dl_weights = {2.0 / 3.0, 1.0 / 3.0};
    c.ul_weights = {1.0 / 3.0, 2.0 / 3.0};
    c.schemes = {{schemes::Scheme::Fd, "FD"}, {std::nullopt, std::string(kOracleScheme)}};
    c.axis = SweepAxis::UserCount;
    c.axis_values = {2};
    c.drops = 100;
  } else {
    throw ConfigError("unknown template '" + std::string(name) + "'");
  }
  return c;
}

double parse_beta(std::string_view text) {
  std::string s = trim(text);
  bool db = false;
  if (s.size() >= 2) {
    std::string tail = s.substr(s.size() - 2);
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (tail == "db") {
      db = true;
      s = trim(std::string_view(s).substr(0, s.size() - 2));
    }
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end == s.c_str() || *end != '\0' || std::isnan(v)) {
    throw std::invalid_argument("cannot parse '" + std::string(text) + "'");
  }
  const double linear = db ? channel::db_to_linear(v) : v;
  if (!(linear >= 0.0 && linear <= 1.0)) {
    throw std::invalid_argument("beta " + std::string(text) + " is outside [0, 1] linear");
  }
  return linear;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::vector<std::string> order;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (entries.count(key) != 0) throw ConfigError("duplicate key '" + key + "'");
    entries[key] = value;
    order.push_back(key);
  }

  ExperimentConfig c = builtin_template(entries.count("template") ? entries["template"] : "outdoor");
  for (const auto& key : order) {
    if (key == "template") continue;
    apply_key(c, key, entries[key]);
  }
  for (const char* required : {"schemes", "axis", "values"}) {
    const bool preset = c.template_name == "two_user";
    if (!preset && entries.count(required) == 0) {
      throw ConfigError(std::string("missing key '") + required + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t drop_seed(std::uint64_t base_seed, double axis_value, int drop_index) {
  const auto bits = std::bit_cast<std::uint64_t>(axis_value == 0.0 ? 0.0 : axis_value);
  return base_seed ^ splitmix64(splitmix64(bits) ^ static_cast<std::uint64_t>(drop_index));
}

Drop draw_drop(const ExperimentConfig& config, double axis_value, int drop_index) {
  int users = config.num_users;
  double beta = config.beta;
  double fraction = config.fd_fraction;
  switch (config.axis) {
    case SweepAxis::UserCount:
    case SweepAxis::Convergence: users = static_cast<int>(axis_value); break;
    case SweepAxis::BetaDb: beta = channel::db_to_linear(axis_value); break;
    case SweepAxis::FdFraction: fraction = axis_value; break;
  }

  Drop drop;
  drop.seed = drop_seed(config.base_seed, config.common_drops ? 0.0 : axis_value, drop_index);
  const auto positions = channel::sample_topology(config.scenario, users, {drop.seed});
  drop.channels = channel::sample_channels(config.scenario, positions, {drop.seed});
  drop.scenario = channel::make_scenario(config.scenario, positions, beta, Duplex::Half);
  const int full = static_cast<int>(std::lround(fraction * users));
  for (int k = 0; k < full; ++k) drop.scenario.duplex[idx(k)] = Duplex::Full;
  auto apply_weights = [users](const std::vector<double>& src, std::vector<double>& dst,
                               const char* key) {
    if (src.empty()) return;
    if (src.size() != idx(users)) {
      throw ConfigError(std::string("key '") + key + "' has " + std::to_string(src.size()) +
                        " entries but the drop has " + std::to_string(users) + " users");
    }
    dst = src;
  };
  apply_weights(config.dl_weights, drop.scenario.dl_weight, "dl_weights");
  apply_weights(config.ul_weights, drop.scenario.ul_weight, "ul_weights");
  return drop;
}

ResultTable run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  const std::size_t n_values = config.axis_values.size();
  const std::size_t n_drops = idx(config.drops);
  const std::size_t n_schemes = config.schemes.size();
  // Fail on weight/user mismatches before any solver work.
  for (double v : config.axis_values) (void)draw_drop(config, v, 0);

  std::vector<Evaluation> evals(n_values * n_drops * n_schemes);
  std::vector<std::uint64_t> seeds(n_values * n_drops);
  parallel_for(n_values * n_drops, threads, [&](std::size_t task) {
    const std::size_t v = task / n_drops;
    const int d = static_cast<int>(task % n_drops);
    const auto drop = draw_drop(config, config.axis_values[v], d);
    seeds[task] = drop.seed;
    for (std::size_t s = 0; s < n_schemes; ++s) {
      evals[task * n_schemes + s] = evaluate(config.schemes[s], drop);
    }
  });

  ResultTable table;
  table.axis = config.axis;
  for (std::size_t v = 0; v < n_values; ++v) {
    for (std::size_t s = 0; s < n_schemes; ++s) {
      PointResult point;
      point.axis_value = config.axis_values[v];
      point.scheme = config.schemes[s].name;
      point.drops = config.drops;
      double sum = 0.0;
      for (std::size_t d = 0; d < n_drops; ++d) {
        const auto task = v * n_drops + d;
        const auto& e = evals[task * n_schemes + s];
        if (!e.feasible) ++table.infeasible_outputs;
        point.samples.push_back({static_cast<int>(d), seeds[task], e.sum_rate});
        sum += e.sum_rate;
      }
      point.mean_sum_rate = sum / static_cast<double>(n_drops);
      if (n_drops > 1) {
        double ss = 0.0;
        for (const auto& sample : point.samples) {
          ss += (sample.sum_rate - point.mean_sum_rate) * (sample.sum_rate - point.mean_sum_rate);
        }
        point.stderr_sum_rate =
            std::sqrt(ss / static_cast<double>(n_drops - 1) / static_cast<double>(n_drops));
      }
      table.points.push_back(std::move(point));
    }
  }
  return table;
}

TraceTable run_convergence(const ExperimentConfig& config, int threads) {
  config.validate();
  if (config.axis != SweepAxis::Convergence) {
    throw ConfigError("key 'axis' must be 'convergence' for a convergence run");
  }
  const std::size_t n_values = config.axis_values.size();
  const std::size_t n_drops = idx(config.drops);
  for (double v : config.axis_values) (void)draw_drop(config, v, 0);

  std::vector<std::vector<TraceRow>> per_task(n_values * n_drops);
  std::vector<char> feasible(n_values * n_drops, 1);
  const auto scheme = *config.schemes.front().scheme;
  parallel_for(n_values * n_drops, threads, [&](std::size_t task) {
    const std::size_t v = task / n_drops;
    const int d = static_cast<int>(task % n_drops);
    auto drop = draw_drop(config, config.axis_values[v], d);
    if (scheme == schemes::Scheme::FdHd) std::fill(drop.scenario.duplex.begin(), drop.scenario.duplex.end(), Duplex::Half);
    if (scheme == schemes::Scheme::FdFd) std::fill(drop.scenario.duplex.begin(), drop.scenario.duplex.end(), Duplex::Full);
    const auto r = schemes::scheme_fd(drop.scenario, drop.channels);
    feasible[task] = passes(drop.scenario, r) ? 1 : 0;
    const auto& trace = r.rates.objective_trace;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      per_task[task].push_back({config.axis_values[v], d, drop.seed, static_cast<int>(i + 1), trace[i]});
    }
  });

  TraceTable table;
  for (std::size_t task = 0; task < per_task.size(); ++task) {
    if (!feasible[task]) ++table.infeasible_outputs;
    table.rows.insert(table.rows.end(), per_task[task].begin(), per_task[task].end());
  }
  return table;
}

std::string to_csv(const ResultTable& table) {
  std::string out = "axis_value,scheme,mean_sum_rate,stderr,drops\n";
  for (const auto& p : table.points) {
    out += fmt_double(p.axis_value) + "," + p.scheme + "," + fmt_double(p.mean_sum_rate) + "," +
           fmt_double(p.stderr_sum_rate) + "," + std::to_string(p.drops) + "\n";
  }
  return out;
}

std::string samples_to_csv(const ResultTable& table) {
  std::string out = "axis_value,scheme,drop,seed,sum_rate\n";
  for (const auto& p : table.points) {
    for (const auto& s : p.samples) {
      out += fmt_double(p.axis_value) + "," + p.scheme + "," + std::to_string(s.drop) + "," +
             std::to_string(s.seed) + "," + fmt_double(s.sum_rate) + "\n";
    }
  }
  return out;
}

std::string to_json(const ExperimentConfig& config, const ResultTable& table) {
  nlohmann::ordered_json j;
  j["template"] = config.template_name;
  j["axis"] = std::string(to_string(table.axis));
  j["base_seed"] = config.base_seed;
  j["common_drops"] = config.common_drops;
  auto& points = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : table.points) {
    nlohmann::ordered_json row;
    row["axis_value"] = p.axis_value;
    row["scheme"] = p.scheme;
    row["mean_sum_rate"] = p.mean_sum_rate;
    row["stderr"] = p.stderr_sum_rate;
    row["drops"] = p.drops;
    auto& samples = row["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : p.samples) {
      samples.push_back({{"drop", s.drop}, {"seed", s.seed}, {"sum_rate", s.sum_rate}});
    }
    points.push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const TraceTable& table) {
  std::string out = "axis_value,drop,seed,iteration,objective\n";
  for (const auto& r : table.rows) {
    out += fmt_double(r.axis_value) + "," + std::to_string(r.drop) + "," + std::to_string(r.seed) +
           "," + std::to_string(r.iteration) + "," + fmt_double(r.objective) + "\n";
  }
  return out;
}

std::string to_json(const ExperimentConfig& config, const TraceTable& table) {
  nlohmann::ordered_json j;
  j["template"] = config.template_name;
  j["axis"] = "convergence";
  j["base_seed"] = config.base_seed;
  auto& rows = j["traces"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"axis_value", r.axis_value},
                    {"drop", r.drop},
                    {"seed", r.seed},
                    {"iteration", r.iteration},
                    {"objective", r.objective}});
  }
  return j.dump(2) + "\n";
}

}  // namespace fdra::experiment
