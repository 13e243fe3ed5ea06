#include "ergogof/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace ergogof {

PathBuckets bucket_path(const SamplePath& path, const SpatialGrid& grid) {
  path.validate();
  const auto nodes = grid.nodes();
  const std::size_t N = path.steps();
  PathBuckets b;
  b.lower.resize(N);
  b.upper.resize(N);
  std::size_t outside = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double x = path.values[k];
    const auto lo = std::lower_bound(nodes.begin(), nodes.end(), x);
    auto hi = lo;
    while (hi != nodes.end() && *hi == x) ++hi;
    b.lower[k] = static_cast<std::uint32_t>(lo - nodes.begin());
    b.upper[k] = static_cast<std::uint32_t>(hi - nodes.begin());
    if (x < grid.left() || x > grid.right()) ++outside;
  }
  b.outside_fraction = static_cast<double>(outside) / static_cast<double>(N);
  if (b.outside_fraction > 0.01)
    throw GridTooNarrow(std::to_string(100.0 * b.outside_fraction) + "% of the occupation time lies outside [" +
                        std::to_string(grid.left()) + ", " + std::to_string(grid.right()) +
                        "]; widen the grid policy (smaller mass_tol) or check that the path matches the model");
  return b;
}

std::vector<double> edf(const SamplePath& path, const SpatialGrid& grid) {
  return edf(path, grid, bucket_path(path, grid));
}

std::vector<double> edf(const SamplePath& path, const SpatialGrid& grid, const PathBuckets& buckets) {
  const std::size_t n = grid.size();
  std::vector<std::size_t> hist(n + 1, 0);
  for (auto u : buckets.upper) ++hist[u];
  std::vector<double> F(n);
  std::size_t acc = 0;
  const double N = static_cast<double>(path.steps());
  for (std::size_t j = 0; j < n; ++j) {
    acc += hist[j];
    F[j] = static_cast<double>(acc) / N;
  }
  return F;
}

LteResult lte(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model) {
  return lte(path, grid, model, bucket_path(path, grid));
}

LteResult lte(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model,
              const PathBuckets& buckets) {
  const std::size_t n = grid.size();
  const std::size_t N = path.steps();
  const auto& X = path.values;
  // below[j] = sum of dX_k over X_k < x_j, above[j] = sum over X_k > x_j
  std::vector<double> by_upper(n + 1, 0.0), by_lower(n + 1, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const double dx = X[k + 1] - X[k];
    by_upper[buckets.upper[k]] += dx;
    by_lower[buckets.lower[k]] += dx;
  }
  std::vector<double> below(n), above(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += by_upper[j];
    below[j] = acc;
  }
  acc = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    acc += by_lower[j + 1];
    above[j] = acc;
  }
  const double T = path.T();
  const auto w = grid.trapezoid_weights();
  LteResult out;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid[j];
    const double ito = above[j] - below[j];
    double v = (std::abs(X[N] - x) - std::abs(X[0] - x) - ito) / (T * model.sigma2_at(x));
    if (v < 0.0) {
      out.clipped_mass -= w[j] * v;
      v = 0.0;
    }
    out.values[j] = v;
  }
  return out;
}

std::vector<double> kernel_density(const SamplePath& path, const SpatialGrid& grid) {
  path.validate();
  const std::size_t N = path.steps();
  const double T = path.T();
  const double bw = 1.0 / std::sqrt(T);
  const double reach = 8.0 * bw;
  const auto nodes = grid.nodes();
  const double scale = path.dt / (std::sqrt(T) * std::sqrt(2.0 * std::numbers::pi));
  // (1/sqrt T) sum K(sqrt T (X_k - x)) dt with K the standard normal density
  std::vector<double> f(grid.size(), 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const double xk = path.values[k];
    auto it = std::lower_bound(nodes.begin(), nodes.end(), xk - reach);
    for (; it != nodes.end() && *it <= xk + reach; ++it) {
      const double z = (xk - *it) / bw;
      f[static_cast<std::size_t>(it - nodes.begin())] += std::exp(-0.5 * z * z);
    }
  }
  for (auto& v : f) v *= scale;
  return f;
}

std::vector<double> unbiased_density(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model,
                                     const EstimatorWeight& weight) {
  const auto buckets = bucket_path(path, grid);
  const std::size_t n = grid.size();
  std::vector<double> hx(n);
  for (std::size_t j = 0; j < n; ++j) {
    hx[j] = weight.value(grid[j]);
    if (!(std::abs(hx[j]) >= 1e-8))
      throw WeightVanishes("estimator weight vanishes at x = " + std::to_string(grid[j]));
  }
  const auto& X = path.values;
  // terms indexed by #{nodes < X_k}: X_k <= x_j iff lower[k] <= j
  std::vector<double> hist(n + 1, 0.0);
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double xk = X[k];
    hist[buckets.lower[k]] += 2.0 * weight.value(xk) * (X[k + 1] - xk) +
                              weight.derivative(xk) * model.sigma2_at(xk) * path.dt;
  }
  const double T = path.T();
  std::vector<double> f(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += hist[j];
    f[j] = acc / (T * model.sigma2_at(grid[j]) * hx[j]);
  }
  return f;
}

std::vector<double> f_star(const SamplePath& path, const SpatialGrid& grid, const DiffusionModel& model) {
  const auto buckets = bucket_path(path, grid);
  const std::size_t n = grid.size();
  std::vector<double> hist(n + 1, 0.0);
  for (std::size_t k = 0; k < path.steps(); ++k) hist[buckets.upper[k]] += model.drift_at(path.values[k]);
  std::vector<double> f(n);
  double acc = 0.0;
  const double scale = 2.0 * path.dt / path.T();
  for (std::size_t j = 0; j < n; ++j) {
    acc += hist[j];
    f[j] = scale * acc;
  }
  return f;
}

EmpiricalCurves empirical_curves(const SamplePath& path, const InvariantLaw& law, bool with_unbiased) {
  const auto& grid = law.grid();
  const auto buckets = bucket_path(path, grid);
  EmpiricalCurves c;
  c.grid = grid;
  c.T = path.T();
  c.F_hat = edf(path, grid, buckets);
  auto l = lte(path, grid, law.model(), buckets);
  c.f_lte = std::move(l.values);
  c.clipped_mass = l.clipped_mass;
  c.f_kernel = kernel_density(path, grid);
  if (with_unbiased) c.f_unbiased = unbiased_density(path, grid, law.model());
  return c;
}

void write_curves_csv(const EmpiricalCurves& curves, const InvariantLaw& law, const std::filesystem::path& file) {
  if (!(curves.grid == law.grid())) throw GridMismatch("curves and law are on different grids");
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  out.precision(12);
  out << "x,F_hat,f_lte,f_kernel,f0,F0\n";
  const auto f0 = law.f0();
  const auto F0 = law.F0();
  for (std::size_t j = 0; j < curves.grid.size(); ++j)
    out << curves.grid[j] << ',' << curves.F_hat[j] << ',' << curves.f_lte[j] << ',' << curves.f_kernel[j] << ','
        << f0[j] << ',' << F0[j] << '\n';
}

}  // namespace ergogof
