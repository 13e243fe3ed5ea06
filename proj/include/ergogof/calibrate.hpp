#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergogof/law.hpp"

namespace ergogof {

/// Limit functionals of a standard Wiener process w.
enum class FunctionalId {
  int_exp,  // int_1^inf w(v)^2 e^{-v} dv
  sup_exp,  // sup_{v >= 1} |w(v)| e^{-v}
  int_01,   // int_0^1 w(v)^2 dv
  sup_01,   // sup_{0 <= v <= 1} |w(v)|
};

std::string functional_name(FunctionalId id);
FunctionalId functional_from_name(const std::string& name);

inline constexpr int generator_version = 1;
inline constexpr std::size_t default_min_samples = 100000;

/// Levels every table carries.
inline const std::vector<double>& default_levels() {
  static const std::vector<double> levels = {0.01, 0.025, 0.05, 0.10};
  return levels;
}

struct LimitParams {
  std::size_t n_paths = 500000;
  double time_step = 5e-4;
  double truncation_v = 35.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Draws of one functional. Draw i depends only on (seed, i), so any prefix of
/// a larger run reproduces a smaller run exactly.
std::vector<double> sample_limit(FunctionalId id, const LimitParams& params);

/// The integral and the sup functional evaluated on the same Wiener paths.
struct JointSamples {
  std::vector<double> integral, sup;
};
/// exp_weighted: (int_exp, sup_exp) on [1, truncation_v]; otherwise (int_01, sup_01).
JointSamples sample_limit_pair(bool exp_weighted, const LimitParams& params);

struct CriticalValueTable {
  FunctionalId functional_id = FunctionalId::int_exp;
  std::map<double, double> quantiles;        // epsilon -> (1 - epsilon)-quantile
  std::map<double, double> standard_errors;  // epsilon -> bootstrap standard error
  std::size_t n_paths = 0;
  double time_step = 0.0;
  double truncation_v = 0.0;
  std::uint64_t master_seed = 0;
  int generator_version = ergogof::generator_version;

  /// Throws LevelNotTabulated.
  double critical_value(double epsilon) const;
  json to_json() const;
  static CriticalValueTable from_json(const json& j);
  bool operator==(const CriticalValueTable&) const = default;
};

/// Empirical (1 - epsilon)-quantile, linear between order statistics.
double upper_quantile(std::span<const double> sorted, double epsilon);

/// Quantiles with bootstrap standard errors. Throws InsufficientSamples below min_samples.
CriticalValueTable quantile_table(std::span<const double> samples, std::span<const double> levels,
                                  FunctionalId id, const LimitParams& params,
                                  std::size_t min_samples = default_min_samples, int bootstrap_reps = 200);

std::string table_filename(FunctionalId id);
std::string samples_filename(FunctionalId id);

/// JSON with a CRC-32 over the canonical body; load checks checksum, then version.
void save_table(const CriticalValueTable& table, const std::filesystem::path& file);
CriticalValueTable load_table(const std::filesystem::path& file);

void save_samples(std::span<const double> samples, const std::filesystem::path& file);
std::vector<double> load_samples(const std::filesystem::path& file);

/// Samples every functional with `params`, writes tables and raw draws to dir.
/// Returns the tables keyed by functional.
std::map<FunctionalId, CriticalValueTable> calibrate_all(const LimitParams& params, const std::filesystem::path& dir,
                                                         std::size_t min_samples = default_min_samples);

/// Direct samples of the spatial functionals whose distribution-free limits
/// are the Wiener functionals: a Wiener process is evaluated on the law's
/// Phi (or Psi) clock at the grid nodes >= mu.
///   h: 4 int h f0^3 W(Phi)^2 dx         (limit int_exp)
///   H: 4 int H f0 (1 - F0)^2 W(Psi)^2 dx (limit int_exp)
///   g: sup 2 g f0 |W(Phi)|               (limit sup_exp)
std::vector<double> sample_reduction_h(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads = 0);
std::vector<double> sample_reduction_H(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads = 0);
std::vector<double> sample_reduction_g(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads = 0);

/// sup |F_a - F_b| between two empirical distributions.
double two_sample_distance(std::vector<double> a, std::vector<double> b);

}  // namespace ergogof
