#include "ergogof/stats.hpp"

#include <algorithm>
#include <cmath>

namespace ergogof {

namespace {

/// Linear interpolation of several node tables at one point, sharing the cell lookup.
struct Interp {
  const SpatialGrid& grid;
  std::size_t i = 0;
  double t = 0.0;
  Interp(const SpatialGrid& g, double x) : grid(g) {
    if (x <= g.left()) {
      i = 0;
      t = 0.0;
    } else if (x >= g.right()) {
      i = g.size() - 2;
      t = 1.0;
    } else {
      i = g.cell_of(x);
      t = (x - g[i]) / (g[i + 1] - g[i]);
    }
  }
  double operator()(std::span<const double> v) const { return v[i] + t * (v[i + 1] - v[i]); }
};

void require_grid(std::span<const double> curve, const InvariantLaw& law) {
  if (curve.size() != law.grid().size()) throw GridMismatch("curve does not live on the law grid");
}

/// Trapezoid weights on [mu, right]: nodes >= mu plus the partial cell from mu.
std::vector<double> upper_weights(const InvariantLaw& law) {
  const auto& grid = law.grid();
  auto w = grid.trapezoid_weights(law.mu_index());
  const std::size_t m = law.mu_index();
  if (m < grid.size()) w[m] += 0.5 * (grid[m] - law.mu());
  return w;
}

double spatial_cvm(std::span<const double> est, std::span<const double> truth, std::span<const double> weight,
                   const InvariantLaw& law, double T) {
  require_grid(est, law);
  law.require_phi_finite();
  const auto w = upper_weights(law);
  const auto f = law.f0();
  double sum = 0.0;
  for (std::size_t i = law.mu_index(); i < est.size(); ++i) {
    const double d = est[i] - truth[i];
    sum += w[i] * weight[i] * d * d * f[i];
  }
  return T * sum;
}

double temporal_cvm(const SamplePath& path, std::span<const double> est, std::span<const double> truth,
                    std::span<const double> weight, const InvariantLaw& law) {
  require_grid(est, law);
  law.require_phi_finite();
  double sum = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double x = path.values[k];
    if (x < law.mu()) continue;
    const Interp at(law.grid(), x);
    const double d = at(est) - at(truth);
    sum += at(weight) * d * d;
  }
  return sum * path.dt;
}

}  // namespace

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::cvm_lte:
      return "cvm_lte";
    case Statistic::cvm_lte_empirical:
      return "cvm_lte_empirical";
    case Statistic::cvm_edf:
      return "cvm_edf";
    case Statistic::cvm_edf_empirical:
      return "cvm_edf_empirical";
    case Statistic::ks_lte:
      return "ks_lte";
    case Statistic::nn:
      return "nn";
    case Statistic::dk_integral:
      return "dk_integral";
    case Statistic::dk_sup:
      return "dk_sup";
  }
  return "?";
}

const std::vector<Statistic>& all_statistics() {
  static const std::vector<Statistic> all = {Statistic::cvm_lte, Statistic::cvm_lte_empirical, Statistic::cvm_edf,
                                             Statistic::cvm_edf_empirical, Statistic::ks_lte, Statistic::nn,
                                             Statistic::dk_integral, Statistic::dk_sup};
  return all;
}

Statistic statistic_from_name(const std::string& name) {
  for (auto s : all_statistics())
    if (statistic_name(s) == name) return s;
  throw ConfigError("unknown statistic '" + name + "'");
}

FunctionalId limit_of(Statistic s) {
  switch (s) {
    case Statistic::cvm_lte:
    case Statistic::cvm_lte_empirical:
    case Statistic::cvm_edf:
    case Statistic::cvm_edf_empirical:
      return FunctionalId::int_exp;
    case Statistic::ks_lte:
      return FunctionalId::sup_exp;
    case Statistic::nn:
    case Statistic::dk_sup:
      return FunctionalId::sup_01;
    case Statistic::dk_integral:
      return FunctionalId::int_01;
  }
  return FunctionalId::int_exp;
}

double cvm_lte(std::span<const double> f_hat, const InvariantLaw& law, double T) {
  return spatial_cvm(f_hat, law.f0(), law.h_table(), law, T);
}

double cvm_lte(const SamplePath& path, const InvariantLaw& law) {
  return cvm_lte(lte(path, law.grid(), law.model()).values, law, path.T());
}

double cvm_lte_empirical(const SamplePath& path, std::span<const double> f_hat, const InvariantLaw& law) {
  return temporal_cvm(path, f_hat, law.f0(), law.h_table(), law);
}

double cvm_lte_empirical(const SamplePath& path, const InvariantLaw& law) {
  return cvm_lte_empirical(path, lte(path, law.grid(), law.model()).values, law);
}

double cvm_edf(std::span<const double> F_hat, const InvariantLaw& law, double T) {
  return spatial_cvm(F_hat, law.F0(), law.H_table(), law, T);
}

double cvm_edf(const SamplePath& path, const InvariantLaw& law) {
  return cvm_edf(edf(path, law.grid()), law, path.T());
}

double cvm_edf_empirical(const SamplePath& path, std::span<const double> F_hat, const InvariantLaw& law) {
  return temporal_cvm(path, F_hat, law.F0(), law.H_table(), law);
}

double cvm_edf_empirical(const SamplePath& path, const InvariantLaw& law) {
  return cvm_edf_empirical(path, edf(path, law.grid()), law);
}

double ks_lte(std::span<const double> f_hat, const InvariantLaw& law, double T) {
  require_grid(f_hat, law);
  law.require_phi_finite();
  const auto g = law.g_table();
  const auto f = law.f0();
  double sup = 0.0;
  for (std::size_t i = law.mu_index(); i < f_hat.size(); ++i) sup = std::max(sup, g[i] * std::abs(f_hat[i] - f[i]));
  return std::sqrt(T) * sup;
}

double ks_lte(const SamplePath& path, const InvariantLaw& law) {
  return ks_lte(lte(path, law.grid(), law.model()).values, law, path.T());
}

double mean_sigma2(const InvariantLaw& law) {
  return law.expect([&](double x) { return law.model().sigma2_at(x); });
}

namespace {

double nn_from_buckets(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law,
                       const PathBuckets& b) {
  const std::size_t n = law.grid().size();
  std::vector<double> hist(n + 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double m = (path.values[k + 1] - path.values[k]) - model.drift_at(path.values[k]) * path.dt;
    hist[b.upper[k]] += m;
    total += m;
  }
  double sup = std::abs(total);  // x = +inf
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += hist[j];
    sup = std::max(sup, std::abs(acc));
  }
  return sup / std::sqrt(path.T() * mean_sigma2(law));
}

}  // namespace

double nn_stat(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law) {
  return nn_from_buckets(path, model, law, bucket_path(path, law.grid()));
}

double nn_stat_unbiased_form(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law) {
  const auto bar = unbiased_density(path, law.grid(), model);
  const auto star = f_star(path, law.grid(), model);
  double sup = 0.0;
  for (std::size_t j = 0; j < bar.size(); ++j) sup = std::max(sup, std::abs(bar[j] - star[j]));
  return 0.5 * std::sqrt(path.T()) * sup;
}

DkStats dk_stats(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law) {
  path.validate();
  const double s2 = mean_sigma2(law);
  const double T = path.T();
  const auto& X = path.values;
  double drift_sum = 0.0, integral = 0.0, sup = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double m = X[k] - X[0] - drift_sum;
    integral += m * m * path.dt;
    sup = std::max(sup, std::abs(m));
    drift_sum += model.drift_at(X[k]) * path.dt;
  }
  sup = std::max(sup, std::abs(X.back() - X[0] - drift_sum));
  return {integral / (T * T * s2), sup / std::sqrt(T * s2)};
}

std::map<Statistic, double> compute_statistics(const SamplePath& path, const DiffusionModel& model,
                                               const InvariantLaw& law, std::span<const Statistic> which) {
  const auto& grid = law.grid();
  const auto buckets = bucket_path(path, grid);
  const double T = path.T();
  std::optional<std::vector<double>> f_hat, F_hat;
  auto need_f = [&]() -> const std::vector<double>& {
    if (!f_hat) f_hat = lte(path, grid, model, buckets).values;
    return *f_hat;
  };
  auto need_F = [&]() -> const std::vector<double>& {
    if (!F_hat) F_hat = edf(path, grid, buckets);
    return *F_hat;
  };
  std::optional<DkStats> dk;
  std::map<Statistic, double> out;
  for (auto s : which) {
    switch (s) {
      case Statistic::cvm_lte:
        out[s] = cvm_lte(need_f(), law, T);
        break;
      case Statistic::cvm_lte_empirical:
        out[s] = cvm_lte_empirical(path, need_f(), law);
        break;
      case Statistic::cvm_edf:
        out[s] = cvm_edf(need_F(), law, T);
        break;
      case Statistic::cvm_edf_empirical:
        out[s] = cvm_edf_empirical(path, need_F(), law);
        break;
      case Statistic::ks_lte:
        out[s] = ks_lte(need_f(), law, T);
        break;
      case Statistic::nn:
        out[s] = nn_from_buckets(path, model, law, buckets);
        break;
      case Statistic::dk_integral:
      case Statistic::dk_sup:
        if (!dk) dk = dk_stats(path, model, law);
        out[s] = s == Statistic::dk_integral ? dk->integral : dk->sup;
        break;
    }
  }
  return out;
}

json TestResult::to_json() const {
  return {{"statistic", statistic_name},
          {"value", value},
          {"epsilon", epsilon},
          {"critical_value", critical_value},
          {"reject", reject},
          {"metadata", metadata}};
}

TestResult run_test(double value, const CriticalValueTable& table, double epsilon) {
  TestResult r;
  r.value = value;
  r.epsilon = epsilon;
  r.critical_value = table.critical_value(epsilon);
  r.reject = value > r.critical_value;
  r.metadata["table"] = functional_name(table.functional_id) + "_v" + std::to_string(table.generator_version);
  r.metadata["table_seed"] = table.master_seed;
  return r;
}

}  // namespace ergogof
