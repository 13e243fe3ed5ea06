#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ergogof/grid.hpp"
#include "ergogof/law.hpp"
#include "ergogof/model.hpp"
#include "ergogof/simulate.hpp"

namespace ergogof {

/// Position of every path point X_0..X_{N-1} relative to the grid:
/// lower[k] = #{nodes < X_k}, upper[k] = #{nodes <= X_k}.
struct PathBuckets {
  std::vector<std::uint32_t> lower, upper;
  double outside_fraction = 0.0;  // occupation time outside [left, right]
};

/// Throws GridTooNarrow when more than 1% of the occupation time lies outside the grid.
PathBuckets bucket_path(const SamplePath& path, const SpatialGrid& grid);

/// Occupation fraction of {X_t < x} at each node (left-point rule).
std::vector<double> edf(const SamplePath& path, const SpatialGrid& grid);
std::vector<double> edf(const SamplePath& path, const SpatialGrid& grid, const PathBuckets& buckets);

struct LteResult {
  std::vector<double> values;
  double clipped_mass = 0.0;  // integral of the negative part removed by clipping
};

/// Local-time estimator from the discrete Tanaka formula, sigma from `model`.
LteResult lte(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model);
LteResult lte(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model,
              const PathBuckets& buckets);

/// Gaussian kernel estimator with bandwidth 1/sqrt(T).
std::vector<double> kernel_density(const SamplePath& path, const SpatialGrid& grid);

/// Weight function of the unbiased estimator together with its derivative.
struct EstimatorWeight {
  std::function<double(double)> value = [](double) { return 1.0; };
  std::function<double(double)> derivative = [](double) { return 0.0; };
};

/// Unbiased estimator with weight h~ (WeightVanishes if |h~| < 1e-8 at a node).
std::vector<double> unbiased_density(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model,
                                     const EstimatorWeight& weight = {});
/// f*_T(x) = (2/T) int 1{X_t < x} S_0(X_t) dt
std::vector<double> f_star(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model);

struct EmpiricalCurves {
  SpatialGrid grid;
  std::vector<double> F_hat, f_lte, f_kernel;
  std::optional<std::vector<double>> f_unbiased;
  double T = 0.0;
  double clipped_mass = 0.0;
};

/// All estimators on the law grid; sigma and S_0 from the law's model.
EmpiricalCurves empirical_curves(const SamplePath& path, const InvariantLaw& law, bool with_unbiased = false);

/// CSV columns x, F_hat, f_lte, f_kernel, f0, F0.
void write_curves_csv(const EmpiricalCurves& curves, const InvariantLaw& law, const std::filesystem::path& file);

}  // namespace ergogof
