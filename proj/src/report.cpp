#include "ergogof/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "ergogof/calibrate.hpp"
#include "ergogof/composite.hpp"
#include "ergogof/errors.hpp"
#include "ergogof/estimate.hpp"
#include "ergogof/law.hpp"
#include "ergogof/simulate.hpp"

namespace ergogof {

namespace {

json read_report(const std::filesystem::path& dir) {
  const auto file = dir / "report.json";
  std::ifstream in(file);
  if (!in) throw MissingInputs(file.string() + " not found; run the experiment subcommand first");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CorruptFile(file.string() + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double upper_quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return upper_quantile(v, 1.0 - q);
}

GridPolicy policy_from(const json& config) {
  GridPolicy p;
  if (config.contains("grid")) {
    const auto& g = config.at("grid");
    p.nodes = g.value("nodes", p.nodes);
    p.mass_tol = g.value("mass_tol", p.mass_tol);
    p.weight_tol = g.value("weight_tol", p.weight_tol);
  }
  return p;
}

}  // namespace

std::size_t Histogram::total() const {
  std::size_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw DomainError("histogram needs bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    const double pos = std::floor((v - lo) / width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[b];
  }
  return h;
}

ReportFiles make_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir,
                        std::size_t bins) {
  const json rep = read_report(results_dir);
  if (!std::filesystem::exists(results_dir / "rows.csv"))
    throw MissingInputs((results_dir / "rows.csv").string() + " not found");
  std::filesystem::create_directories(out_dir);
  ReportFiles out;

  std::map<std::string, std::vector<double>> limit_samples;
  for (const auto& [name, file] : rep.at("table_samples").items()) {
    const std::filesystem::path p = file.get<std::string>();
    if (std::filesystem::exists(p))
      limit_samples[name] = load_samples(p);
    else
      out.notes.push_back("limit samples " + p.string() + " not found; overlay omitted for " + name);
  }

  // Histograms against the limit sample.
  for (const auto& sc : rep.at("scenarios")) {
    for (const auto& o : sc.at("outcomes")) {
      const auto values = o.at("values").get<std::vector<double>>();
      const auto functional = o.at("functional").get<std::string>();
      const auto lim = limit_samples.find(functional);
      double hi = upper_quantile_of(values, 0.995);
      if (lim != limit_samples.end()) hi = std::max(hi, upper_quantile_of(lim->second, 0.995));
      if (!(hi > 0.0)) hi = 1.0;
      const auto h = histogram(values, 0.0, hi, bins);
      std::optional<Histogram> hl;
      if (lim != limit_samples.end()) hl = histogram(lim->second, 0.0, hi, bins);
      const auto file = out_dir / ("hist_" + sc.at("name").get<std::string>() + "_" + o.at("statistic").get<std::string>() + ".csv");
      std::ofstream f(file);
      f << "bin_low,bin_high,count,density,limit_count,limit_density\n";
      const double width = hi / static_cast<double>(bins);
      for (std::size_t b = 0; b < bins; ++b) {
        const double dens = values.empty() ? 0.0 : h.counts[b] / (static_cast<double>(values.size()) * width);
        f << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << ',' << dens << ',';
        if (hl)
          f << hl->counts[b] << ',' << hl->counts[b] / (static_cast<double>(lim->second.size()) * width);
        else
          f << ",";
        f << '\n';
      }
      out.files.push_back(file);
    }
  }

  // Power curves: one row per (scenario, statistic, level).
  {
    const auto file = out_dir / "power.csv";
    std::ofstream f(file);
    f << "scenario,kind,parameter,statistic,epsilon,rate,ci_low,ci_high,rejected,total\n";
    for (const auto& sc : rep.at("scenarios"))
      for (const auto& o : sc.at("outcomes"))
        for (const auto& [eps, r] : o.at("rates").items())
          f << sc.at("name").get<std::string>() << ',' << sc.at("kind").get<std::string>() << ','
            << sc.value("parameter", 0.0) << ',' << o.at("statistic").get<std::string>() << ',' << eps << ','
            << r.at("rate").get<double>() << ',' << r.at("ci_low").get<double>() << ','
            << r.at("ci_high").get<double>() << ',' << r.at("rejected").get<std::size_t>() << ','
            << r.at("total").get<std::size_t>() << '\n';
    out.files.push_back(file);
  }

  // Estimator curves of replication 0 against the hypothesized law.
  const auto& config = rep.at("config");
  const auto policy = policy_from(config);
  std::optional<InvariantLaw> hyp_law;
  for (const auto& sc : rep.at("scenarios")) {
    const auto name = sc.at("name").get<std::string>();
    const auto path_file = results_dir / "paths" / (name + ".bin");
    if (!std::filesystem::exists(path_file)) continue;
    const auto path = load_path(path_file);
    std::optional<InvariantLaw> law;
    if (sc.at("kind") == "composite") {
      if (!sc.contains("fits") || sc.at("fits").empty()) continue;
      const auto pm = ParametricModel::from_json(config.at("composite").at("family"));
      law = build_law(pm.at(sc.at("fits").at(0).at("theta_hat").get<double>()), policy);
    } else {
      if (!hyp_law) hyp_law = build_law(DiffusionModel::from_json(config.at("hypothesis")), policy);
      law = *hyp_law;
    }
    const auto file = out_dir / ("curves_" + name + ".csv");
    write_curves_csv(empirical_curves(path, *law), *law, file);
    out.files.push_back(file);
  }
  return out;
}

bool rows_match_report(const std::filesystem::path& results_dir) {
  const json rep = read_report(results_dir);
  std::ifstream in(results_dir / "rows.csv");
  if (!in) throw MissingInputs((results_dir / "rows.csv").string() + " not found");
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> counted, rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != 7) return false;
    const auto key = std::make_tuple(cells[0], cells[2], cells[4]);
    counted[key] += cells[6] == "1" ? 1 : 0;
    ++rows[key];
  }
  for (const auto& sc : rep.at("scenarios"))
    for (const auto& o : sc.at("outcomes"))
      for (const auto& [eps, r] : o.at("rates").items()) {
        const auto key = std::make_tuple(sc.at("name").get<std::string>(), o.at("statistic").get<std::string>(), eps);
        if (counted[key] != r.at("rejected").get<std::size_t>()) return false;
        if (rows[key] != r.at("total").get<std::size_t>()) return false;
      }
  return true;
}

}  // namespace ergogof
