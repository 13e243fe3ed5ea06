// ergogof command line: calibrate, test, experiment, report.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ergogof/calibrate.hpp"
#include "ergogof/errors.hpp"
#include "ergogof/experiment.hpp"
#include "ergogof/report.hpp"
#include "ergogof/simulate.hpp"
#include "ergogof/stats.hpp"

namespace fs = std::filesystem;
using namespace ergogof;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr const char* table_env = "ERGOGOF_TABLE_DIR";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--seed", c.seed, "master seed (overrides the config)");
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  app->add_option("--out", c.out, "output directory");
}

json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

std::optional<fs::path> env_table_dir() {
  const char* v = std::getenv(table_env);
  if (v && *v) return fs::path(v);
  return std::nullopt;
}

int cmd_calibrate(const Common& c, const std::vector<std::string>& functionals) {
  const json j = c.config.empty() ? json::object() : read_json(c.config);
  LimitParams p;
  p.n_paths = j.value("n_paths", p.n_paths);
  p.time_step = j.value("time_step", p.time_step);
  p.truncation_v = j.value("truncation_v", p.truncation_v);
  p.seed = c.seed ? *c.seed : j.value("seed", p.seed);
  p.threads = c.threads ? *c.threads : j.value("threads", 0u);
  const std::size_t min_samples = j.value("min_samples", default_min_samples);
  fs::path dir = c.out.empty() ? env_table_dir().value_or(fs::path(j.value("out", std::string("tables")))) : fs::path(c.out);
  auto wanted = functionals;
  if (wanted.empty() && j.contains("functionals")) wanted = j.at("functionals").get<std::vector<std::string>>();
  std::map<FunctionalId, CriticalValueTable> tables;
  if (wanted.empty()) {
    tables = calibrate_all(p, dir, min_samples);
  } else {
    fs::create_directories(dir);
    for (const auto& name : wanted) {
      const auto id = functional_from_name(name);
      if (p.n_paths < min_samples)
        throw InsufficientSamples(std::to_string(p.n_paths) + " paths requested, at least " +
                                  std::to_string(min_samples) + " needed");
      const auto samples = sample_limit(id, p);
      auto t = quantile_table(samples, default_levels(), id, p, min_samples);
      save_samples(samples, dir / samples_filename(id));
      save_table(t, dir / table_filename(id));
      tables.emplace(id, std::move(t));
    }
  }
  for (const auto& [id, t] : tables) {
    std::cout << functional_name(id);
    for (const auto& [eps, q] : t.quantiles) std::cout << "  eps=" << eps << " q=" << q;
    std::cout << "  -> " << (dir / table_filename(id)).string() << '\n';
  }
  return exit_ok;
}

int cmd_test(const Common& c) {
  if (c.config.empty()) throw ConfigError("test needs --config");
  const json j = read_json(c.config);
  if (!j.contains("hypothesis")) throw ConfigError("test config needs a 'hypothesis' model");
  const auto hyp = DiffusionModel::from_json(j.at("hypothesis"));
  std::vector<Statistic> stats;
  for (const auto& s : j.value("statistics", std::vector<std::string>{})) stats.push_back(statistic_from_name(s));
  if (stats.empty()) throw ConfigError("test config needs a non-empty 'statistics' list");
  const auto levels = j.value("levels", std::vector<double>{0.05});
  fs::path table_dir = env_table_dir().value_or(fs::path(j.value("table_dir", std::string("tables"))));
  GridPolicy policy;
  if (j.contains("grid")) policy.nodes = j.at("grid").value("nodes", policy.nodes);

  check_conditions(hyp, default_check_grid(hyp));
  const auto law = build_law(hyp, policy);

  SamplePath path;
  if (j.contains("path")) {
    path = load_path(j.at("path").get<std::string>());
  } else if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    const auto data = s.contains("model") ? DiffusionModel::from_json(s.at("model")) : hyp;
    const auto data_law = s.contains("model") ? build_law(data, policy) : law;
    if (!c.seed && !j.contains("seed")) throw ConfigError("simulated test needs a seed");
    const std::uint64_t seed = c.seed ? *c.seed : j.at("seed").get<std::uint64_t>();
    path = simulate_path(data, data_law, s.value("T", 1000.0), s.value("dt", 0.01), seed, s.value("stream", 0ull));
  } else {
    throw ConfigError("test config needs 'path' or 'simulate'");
  }

  const auto values = compute_statistics(path, hyp, law, stats);
  json results = json::array();
  for (auto s : stats) {
    const auto table = load_table(table_dir / table_filename(limit_of(s)));
    for (double eps : levels) {
      auto r = run_test(values.at(s), table, eps);
      r.statistic_name = statistic_name(s);
      r.metadata["T"] = path.T();
      r.metadata["dt"] = path.dt;
      r.metadata["model_hash"] = hyp.hash();
      results.push_back(r.to_json());
      std::cout << statistic_name(s) << " value=" << r.value << " eps=" << eps << " c=" << r.critical_value
                << (r.reject ? " reject" : " accept") << '\n';
    }
  }
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "test_results.json") << results.dump(2) << '\n';
  }
  return exit_ok;
}

int cmd_experiment(const Common& c) {
  if (c.config.empty()) throw ConfigError("experiment needs --config");
  auto cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (auto env = env_table_dir()) cfg.table_dir = *env;
  const auto report = run_experiment(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& s : report.scenarios)
    for (const auto& o : s.outcomes)
      for (const auto& [eps, r] : o.rates)
        std::cout << s.name << ' ' << o.statistic << " eps=" << eps << " rate=" << r.rate << " [" << r.ci_low << ", "
                  << r.ci_high << "] n=" << r.total << '\n';
  std::cout << "report: " << (cfg.out_dir / "report.json").string() << '\n';
  return exit_ok;
}

int cmd_report(const Common& c, const std::string& results) {
  fs::path dir = results;
  if (dir.empty() && !c.config.empty()) dir = read_json(c.config).value("out_dir", std::string("results"));
  if (dir.empty()) dir = "results";
  const fs::path out = c.out.empty() ? dir / "plots" : fs::path(c.out);
  const auto files = make_report(dir, out);
  for (const auto& n : files.notes) std::cerr << "note: " << n << '\n';
  std::cout << files.files.size() << " files written to " << out.string() << '\n';
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit tests for ergodic diffusions"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::string> functionals;
  std::string results;

  auto* cal = app.add_subcommand("calibrate", "sample limit functionals and write critical-value tables");
  add_common(cal, common);
  cal->add_option("--functional", functionals, "int_exp, sup_exp, int_01, sup_01 (default: all)");
  auto* test = app.add_subcommand("test", "test one simulated or imported path");
  add_common(test, common);
  auto* exp = app.add_subcommand("experiment", "size and power study");
  add_common(exp, common);
  auto* rep = app.add_subcommand("report", "plot data from experiment outputs");
  add_common(rep, common);
  rep->add_option("--results", results, "experiment output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (cal->parsed()) return cmd_calibrate(common, functionals);
    if (test->parsed()) return cmd_test(common);
    if (exp->parsed()) return cmd_experiment(common);
    if (rep->parsed()) return cmd_report(common, results);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == ErrorCategory::config ? exit_config : exit_numerical;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_ok;
}
