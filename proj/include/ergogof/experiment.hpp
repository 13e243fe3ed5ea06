#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ergogof/calibrate.hpp"
#include "ergogof/composite.hpp"
#include "ergogof/law.hpp"
#include "ergogof/stats.hpp"

namespace ergogof {

struct AlternativeSpec {
  std::string name;
  DiffusionModel model;
};

/// S_n = S_0 + alpha sigma^2 cos(n x) for each n.
struct OscillationStudy {
  double alpha = 0.5;
  std::vector<double> frequencies = {1.0, 4.0, 16.0};
};

/// Data from `truth` (default: the family at theta0), tested against the family.
struct CompositeStudy {
  ParametricModel family;
  double theta0 = 0.0;
  std::optional<DiffusionModel> truth;
};

struct ExperimentConfig {
  std::optional<DiffusionModel> hypothesis;  // required unless only a composite study runs
  std::vector<AlternativeSpec> alternatives;
  bool include_null = true;
  std::vector<Statistic> statistics;
  double T = 1000.0;
  double dt = 0.01;
  std::size_t replications = 0;
  std::vector<double> levels = {0.05};
  std::filesystem::path table_dir = "tables";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "results";
  unsigned threads = 0;
  GridPolicy grid;
  std::optional<OscillationStudy> oscillation;
  std::optional<CompositeStudy> composite;

  /// ConfigError on missing keys, unknown names or a missing seed.
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

ExperimentConfig load_config(const std::filesystem::path& file);

struct RateSummary {
  std::size_t rejected = 0;
  std::size_t total = 0;
  double rate = 0.0;
  double ci_low = 0.0, ci_high = 1.0;  // Clopper-Pearson 95%
  json to_json() const;
};

/// Exact binomial interval at confidence 1 - alpha.
RateSummary rejection_summary(std::size_t rejected, std::size_t total, double alpha = 0.05);

struct StatisticOutcome {
  std::string statistic;
  std::string functional;
  std::vector<double> values;  // one per successful replication, replication order
  std::map<double, double> critical_values;
  std::map<double, RateSummary> rates;  // epsilon -> rate
};

struct ScenarioResult {
  std::string name;
  std::string kind;  // null, alternative, oscillation, composite
  json data_model;
  double parameter = 0.0;  // n for oscillation scenarios
  bool adf = true;         // false for double-sided alternatives
  std::optional<DistanceNorms> distances;
  json conditions;  // condition integrals of the data law under the alternative
  std::vector<std::size_t> replication_ids;
  std::vector<std::size_t> failed;
  std::vector<StatisticOutcome> outcomes;
  std::vector<CompositeFit> fits;  // composite scenarios only
  json to_json() const;
};

struct ExperimentReport {
  json config;
  json hypothesis_conditions;
  std::map<std::string, std::string> table_samples;  // functional -> raw samples file
  std::vector<ScenarioResult> scenarios;
  std::vector<std::string> warnings;
  json to_json() const;
};

/// Runs every scenario, writes report.json, rows.csv, fits.csv and
/// metadata.json (wall clock) to out_dir. Aborts with BlowupError when more
/// than 1% of a scenario's replications blow up.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Whether alt differs from hyp on the grid nodes below mu.
bool double_sided(const DiffusionModel& hyp, const DiffusionModel& alt, const InvariantLaw& law);

}  // namespace ergogof
