#include "ergogof/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <boost/math/distributions/beta.hpp>

#include "ergogof/errors.hpp"
#include "ergogof/estimate.hpp"
#include "ergogof/parallel.hpp"
#include "ergogof/simulate.hpp"

namespace ergogof {

namespace {

const std::string corrected_name = "corrected_cvm";
const std::string plugin_name = "plugin_cvm";
const std::string shift_name = "shift_cvm";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

json distances_json(const DistanceNorms& d) {
  return {{"density_l2", d.density_l2}, {"cdf_l2", d.cdf_l2}, {"drift_kl", d.drift_kl}};
}

struct Scenario {
  std::string name;
  std::string kind;
  DiffusionModel data;
  double parameter = 0.0;
};

using Tables = std::map<FunctionalId, CriticalValueTable>;

const CriticalValueTable& table_for(const Tables& tables, FunctionalId id) {
  auto it = tables.find(id);
  if (it == tables.end()) throw ConfigError("no table loaded for " + functional_name(id));
  return it->second;
}

StatisticOutcome summarize(const std::string& stat, FunctionalId id, std::vector<double> values, const Tables& tables,
                           const std::vector<double>& levels) {
  StatisticOutcome out;
  out.statistic = stat;
  out.functional = functional_name(id);
  const auto& table = table_for(tables, id);
  for (double eps : levels) {
    const double c = table.critical_value(eps);
    out.critical_values[eps] = c;
    std::size_t rej = 0;
    for (double v : values) rej += v > c ? 1 : 0;
    out.rates[eps] = rejection_summary(rej, values.size());
  }
  out.values = std::move(values);
  return out;
}

void check_failures(const ScenarioResult& s, std::size_t total) {
  if (total > 0 && static_cast<double>(s.failed.size()) > 0.01 * static_cast<double>(total))
    throw BlowupError("scenario '" + s.name + "': " + std::to_string(s.failed.size()) + " of " + std::to_string(total) +
                      " replications blew up (limit 1%)");
}

bool conditions_converged(const ConditionIntegrals& c) {
  return c.a1.converged && c.a2.converged && c.c9.converged && c.c10.converged;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  ExperimentConfig c;
  if (!j.contains("seed")) throw ConfigError("config needs an explicit 'seed'");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("hypothesis")) c.hypothesis = DiffusionModel::from_json(j.at("hypothesis"));
  if (j.contains("alternatives")) {
    for (const auto& a : j.at("alternatives")) {
      if (!a.contains("name") || !a.contains("model")) throw ConfigError("alternative needs 'name' and 'model'");
      c.alternatives.push_back({a.at("name").get<std::string>(), DiffusionModel::from_json(a.at("model"))});
    }
  }
  c.include_null = get_or(j, "include_null", true);
  for (const auto& s : get_or(j, "statistics", std::vector<std::string>{})) c.statistics.push_back(statistic_from_name(s));
  c.T = get_or(j, "T", c.T);
  c.dt = get_or(j, "dt", c.dt);
  c.replications = get_or<std::size_t>(j, "replications", 0);
  c.levels = get_or(j, "levels", c.levels);
  c.table_dir = get_or<std::string>(j, "table_dir", c.table_dir.string());
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir.string());
  c.threads = get_or<unsigned>(j, "threads", 0);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.nodes = get_or<std::size_t>(g, "nodes", c.grid.nodes);
    c.grid.mass_tol = get_or(g, "mass_tol", c.grid.mass_tol);
    c.grid.weight_tol = get_or(g, "weight_tol", c.grid.weight_tol);
  }
  if (j.contains("oscillation")) {
    OscillationStudy o;
    o.alpha = get_or(j.at("oscillation"), "alpha", o.alpha);
    o.frequencies = get_or(j.at("oscillation"), "frequencies", o.frequencies);
    c.oscillation = o;
  }
  if (j.contains("composite")) {
    const auto& cj = j.at("composite");
    if (!cj.contains("family") || !cj.contains("theta0")) throw ConfigError("composite needs 'family' and 'theta0'");
    CompositeStudy cs;
    cs.family = ParametricModel::from_json(cj.at("family"));
    cs.theta0 = get_or(cj, "theta0", 0.0);
    if (cj.contains("truth")) cs.truth = DiffusionModel::from_json(cj.at("truth"));
    c.composite = cs;
  }
  if (!c.hypothesis) {
    if (!c.composite || !c.alternatives.empty() || c.oscillation || (j.contains("include_null") && c.include_null))
      throw ConfigError("config needs a 'hypothesis' model");
    c.include_null = false;
  }
  if (c.hypothesis && c.statistics.empty()) throw ConfigError("config needs a non-empty 'statistics' list");
  if (!(c.T > 0.0) || !(c.dt > 0.0)) throw ConfigError("T and dt must be positive");
  if (c.levels.empty()) throw ConfigError("config needs at least one level");
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  if (hypothesis) j["hypothesis"] = hypothesis->to_json();
  json alts = json::array();
  for (const auto& a : alternatives) alts.push_back({{"name", a.name}, {"model", a.model.to_json()}});
  j["alternatives"] = alts;
  j["include_null"] = include_null;
  json stats = json::array();
  for (auto s : statistics) stats.push_back(statistic_name(s));
  j["statistics"] = stats;
  j["T"] = T;
  j["dt"] = dt;
  j["replications"] = replications;
  j["levels"] = levels;
  j["table_dir"] = table_dir.string();
  j["seed"] = seed;
  j["out_dir"] = out_dir.string();
  j["grid"] = grid.to_json();
  if (oscillation) j["oscillation"] = {{"alpha", oscillation->alpha}, {"frequencies", oscillation->frequencies}};
  if (composite) {
    j["composite"] = {{"family", composite->family.to_json()}, {"theta0", composite->theta0}};
    if (composite->truth) j["composite"]["truth"] = composite->truth->to_json();
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

json RateSummary::to_json() const {
  return {{"rejected", rejected}, {"total", total}, {"rate", rate}, {"ci_low", ci_low}, {"ci_high", ci_high}};
}

RateSummary rejection_summary(std::size_t rejected, std::size_t total, double alpha) {
  RateSummary r;
  r.rejected = rejected;
  r.total = total;
  if (total == 0) return r;
  const auto k = static_cast<double>(rejected), n = static_cast<double>(total);
  r.rate = k / n;
  namespace bm = boost::math;
  r.ci_low = rejected == 0 ? 0.0 : bm::quantile(bm::beta_distribution<>(k, n - k + 1.0), alpha / 2.0);
  r.ci_high = rejected == total ? 1.0 : bm::quantile(bm::beta_distribution<>(k + 1.0, n - k), 1.0 - alpha / 2.0);
  return r;
}

json ScenarioResult::to_json() const {
  json j = {{"name", name}, {"kind", kind}, {"data_model", data_model}, {"adf", adf}};
  if (kind == "oscillation") j["parameter"] = parameter;
  if (distances) j["distances"] = distances_json(*distances);
  if (!conditions.is_null()) j["conditions"] = conditions;
  j["replications"] = replication_ids.size() + failed.size();
  j["failed"] = failed;
  json outs = json::array();
  for (const auto& o : outcomes) {
    json rates = json::object(), crit = json::object();
    for (const auto& [eps, r] : o.rates) rates[short_num(eps)] = r.to_json();
    for (const auto& [eps, c] : o.critical_values) crit[short_num(eps)] = c;
    outs.push_back({{"statistic", o.statistic},
                    {"functional", o.functional},
                    {"critical_values", crit},
                    {"rates", rates},
                    {"values", o.values}});
  }
  j["outcomes"] = outs;
  if (!fits.empty()) {
    json fj = json::array();
    for (const auto& f : fits) fj.push_back(f.to_json());
    j["fits"] = fj;
  }
  return j;
}

json ExperimentReport::to_json() const {
  json sc = json::array();
  for (const auto& s : scenarios) sc.push_back(s.to_json());
  json samples = json::object();
  for (const auto& [k, v] : table_samples) samples[k] = v;
  return {{"config", config},
          {"hypothesis_conditions", hypothesis_conditions},
          {"table_samples", samples},
          {"scenarios", sc},
          {"warnings", warnings}};
}

bool double_sided(const DiffusionModel& hyp, const DiffusionModel& alt, const InvariantLaw& law) {
  const auto& grid = law.grid();
  for (std::size_t i = 0; i < law.mu_index(); ++i) {
    const double a = hyp.drift_at(grid[i]), b = alt.drift_at(grid[i]);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) return true;
  }
  return false;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const unsigned threads = cfg.threads ? cfg.threads : default_threads();
  ExperimentReport report;
  report.config = cfg.to_json();

  // Tables for every functional in use.
  std::set<FunctionalId> needed;
  for (auto s : cfg.statistics) needed.insert(limit_of(s));
  if (cfg.composite) needed.insert(FunctionalId::int_exp);
  Tables tables;
  for (auto id : needed) {
    const auto file = cfg.table_dir / table_filename(id);
    if (!std::filesystem::exists(file))
      throw ConfigError("table " + file.string() + " is missing; run the calibrate subcommand first");
    tables.emplace(id, load_table(file));
    report.table_samples[functional_name(id)] = (cfg.table_dir / samples_filename(id)).string();
  }

  std::optional<InvariantLaw> hyp_law;
  if (cfg.hypothesis) {
    check_conditions(*cfg.hypothesis, default_check_grid(*cfg.hypothesis));
    hyp_law = build_law(*cfg.hypothesis, cfg.grid);
    hyp_law->require_phi_finite();
    const auto ci = condition_integrals(*hyp_law);
    report.hypothesis_conditions = ci.to_json();
    if (!conditions_converged(ci)) report.warnings.push_back("hypothesis: some condition integrals did not converge");
  }

  std::vector<Scenario> scenarios;
  if (cfg.include_null && cfg.hypothesis) scenarios.push_back({"null", "null", *cfg.hypothesis, 0.0});
  for (const auto& a : cfg.alternatives) scenarios.push_back({a.name, "alternative", a.model, 0.0});
  if (cfg.oscillation && cfg.hypothesis) {
    for (double n : cfg.oscillation->frequencies) {
      DiffusionModel m(DriftSpec::oscillating(cfg.hypothesis->drift(), cfg.oscillation->alpha, n),
                       cfg.hypothesis->diffusion(), "oscillating");
      scenarios.push_back({"oscillation_n" + short_num(n), "oscillation", m, n});
    }
  }

  std::filesystem::create_directories(cfg.out_dir / "paths");
  std::ofstream rows(cfg.out_dir / "rows.csv");
  rows << "scenario,replication,statistic,value,epsilon,critical_value,reject\n";
  auto write_rows = [&](const ScenarioResult& s) {
    for (const auto& o : s.outcomes)
      for (std::size_t r = 0; r < o.values.size(); ++r)
        for (const auto& [eps, c] : o.critical_values)
          rows << s.name << ',' << s.replication_ids[r] << ',' << o.statistic << ',' << fmt(o.values[r]) << ','
               << short_num(eps) << ',' << fmt(c) << ',' << (o.values[r] > c ? 1 : 0) << '\n';
  };
  const std::size_t n = cfg.replications;

  for (const auto& sc : scenarios) {
    check_step(sc.data, cfg.T, cfg.dt);
    ScenarioResult res;
    res.name = sc.name;
    res.kind = sc.kind;
    res.data_model = sc.data.to_json();
    res.parameter = sc.parameter;
    const bool is_null = sc.kind == "null";
    std::optional<InvariantLaw> own;
    if (!is_null) {
      own = build_law(sc.data, cfg.grid);
      res.adf = !double_sided(*cfg.hypothesis, sc.data, *hyp_law);
      if (!res.adf) report.warnings.push_back(sc.name + ": double-sided alternative, limit law not ADF");
      const auto on_grid = build_law_on_grid(sc.data, hyp_law->grid());
      res.distances = distance_norms(on_grid, *hyp_law, sc.data, *cfg.hypothesis);
      const auto ci = condition_integrals(*own);
      res.conditions = ci.to_json();
      if (!conditions_converged(ci))
        report.warnings.push_back(sc.name + ": condition integrals not finite under the alternative");
    }
    const InvariantLaw& data_law = is_null ? *hyp_law : *own;

    std::vector<std::optional<std::map<Statistic, double>>> slots(n);
    parallel_for(n, threads, [&](std::size_t rep) {
      try {
        const auto path = simulate_path(sc.data, data_law, cfg.T, cfg.dt, cfg.seed, rep);
        slots[rep] = compute_statistics(path, *cfg.hypothesis, *hyp_law, cfg.statistics);
        if (rep == 0) save_path(path, cfg.out_dir / "paths" / (sc.name + ".bin"));
      } catch (const BlowupError&) {
        slots[rep].reset();
      }
    });
    std::map<Statistic, std::vector<double>> values;
    for (std::size_t rep = 0; rep < n; ++rep) {
      if (!slots[rep]) {
        res.failed.push_back(rep);
        continue;
      }
      res.replication_ids.push_back(rep);
      for (auto s : cfg.statistics) values[s].push_back(slots[rep]->at(s));
    }
    check_failures(res, n);
    for (auto s : cfg.statistics)
      res.outcomes.push_back(summarize(statistic_name(s), limit_of(s), std::move(values[s]), tables, cfg.levels));
    write_rows(res);
    report.scenarios.push_back(std::move(res));
  }

  std::ofstream fits(cfg.out_dir / "fits.csv");
  fits << "scenario,replication,theta_hat,fisher_info,r_over_T,boundary\n";
  if (cfg.composite) {
    const auto& cs = *cfg.composite;
    const auto& pm = cs.family;
    const DiffusionModel truth = cs.truth ? *cs.truth : pm.at(cs.theta0);
    check_step(truth, cfg.T, cfg.dt);
    const auto truth_law = build_law(truth, cfg.grid);
    ScenarioResult res;
    res.name = "composite";
    res.kind = "composite";
    res.data_model = truth.to_json();
    std::vector<std::string> names;
    if (pm.family() == ParametricModel::Family::switching_shift) {
      names = {shift_name};
    } else if (pm.median_depends_on_theta()) {
      names = {plugin_name};
      report.warnings.push_back("composite: median depends on theta, corrected statistic refused");
    } else {
      names = {corrected_name, plugin_name};
    }
    struct Slot {
      CompositeFit fit;
      std::vector<double> values;
    };
    std::vector<std::optional<Slot>> slots(n);
    parallel_for(n, threads, [&](std::size_t rep) {
      try {
        const auto path = simulate_path(truth, truth_law, cfg.T, cfg.dt, cfg.seed, rep);
        std::optional<InvariantLaw> law_hat;
        Slot slot;
        slot.fit = mle_fit(path, pm, cfg.grid, &law_hat);
        slot.fit.profile_theta.clear();
        slot.fit.profile_loglik.clear();
        if (names.front() == shift_name) {
          slot.values.push_back(shift_corrected_cvm(path, pm, slot.fit, *law_hat));
        } else {
          const auto f_hat = lte(path, law_hat->grid(), law_hat->model()).values;
          if (names.front() == corrected_name) {
            const auto f_dot = law_theta_derivative(pm, slot.fit.theta_hat, *law_hat);
            slot.values.push_back(corrected_cvm(f_hat, pm, slot.fit, *law_hat, f_dot, cfg.T));
          }
          slot.values.push_back(cvm_lte(f_hat, *law_hat, cfg.T));
        }
        if (rep == 0) save_path(path, cfg.out_dir / "paths" / "composite.bin");
        slots[rep] = std::move(slot);
      } catch (const BlowupError&) {
        slots[rep].reset();
      }
    });
    std::vector<std::vector<double>> values(names.size());
    for (std::size_t rep = 0; rep < n; ++rep) {
      if (!slots[rep]) {
        res.failed.push_back(rep);
        continue;
      }
      res.replication_ids.push_back(rep);
      const auto& f = slots[rep]->fit;
      res.fits.push_back(f);
      fits << "composite," << rep << ',' << fmt(f.theta_hat) << ',' << fmt(f.fisher_info) << ',' << fmt(f.r_value)
           << ',' << (f.boundary ? 1 : 0) << '\n';
      for (std::size_t k = 0; k < names.size(); ++k) values[k].push_back(slots[rep]->values[k]);
    }
    check_failures(res, n);
    for (std::size_t k = 0; k < names.size(); ++k)
      res.outcomes.push_back(summarize(names[k], FunctionalId::int_exp, std::move(values[k]), tables, cfg.levels));
    write_rows(res);
    report.scenarios.push_back(std::move(res));
  }

  {
    std::ofstream out(cfg.out_dir / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::ofstream meta(cfg.out_dir / "metadata.json");
  meta << json{{"wall_seconds", seconds}, {"threads", threads}}.dump(2) << '\n';
  return report;
}

}  // namespace ergogof
