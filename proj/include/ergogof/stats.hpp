#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergogof/calibrate.hpp"
#include "ergogof/estimate.hpp"
#include "ergogof/law.hpp"
#include "ergogof/simulate.hpp"

namespace ergogof {

enum class Statistic {
  cvm_lte,            // delta_T
  cvm_lte_empirical,  // delta_T*
  cvm_edf,            // Delta_T
  cvm_edf_empirical,  // Delta_T*
  ks_lte,             // gamma_T
  nn,                 // Negri-Nishiyama
  dk_integral,
  dk_sup,
};

std::string statistic_name(Statistic s);
Statistic statistic_from_name(const std::string& name);
const std::vector<Statistic>& all_statistics();
/// Limit functional whose table calibrates the statistic.
FunctionalId limit_of(Statistic s);

// Spatial statistics on the law grid restricted to [mu, right bound]. The
// span overloads take tabulated curves on the law grid (synthetic input).

double cvm_lte(std::span<const double> f_hat, const InvariantLaw& law, double T);
double cvm_lte(const SamplePath& path, const InvariantLaw& law);

/// Time integral of h(X_t) (f_hat - f0)^2(X_t), curves interpolated at X_t.
double cvm_lte_empirical(const SamplePath& path, std::span<const double> f_hat, const InvariantLaw& law);
double cvm_lte_empirical(const SamplePath& path, const InvariantLaw& law);

double cvm_edf(std::span<const double> F_hat, const InvariantLaw& law, double T);
double cvm_edf(const SamplePath& path, const InvariantLaw& law);

double cvm_edf_empirical(const SamplePath& path, std::span<const double> F_hat, const InvariantLaw& law);
double cvm_edf_empirical(const SamplePath& path, const InvariantLaw& law);

double ks_lte(std::span<const double> f_hat, const InvariantLaw& law, double T);
double ks_lte(const SamplePath& path, const InvariantLaw& law);

/// E_0 sigma(xi)^2 by quadrature against f0.
double mean_sigma2(const InvariantLaw& law);

/// sup over the grid (and x = +-inf) of |int 1{X_t < x} [dX_t - S_0(X_t) dt]|, normalized.
double nn_stat(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law);
/// (sqrt T / 2) sup |f_bar - f*| on the grid: equals nn_stat when sigma = 1.
double nn_stat_unbiased_form(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law);

struct DkStats {
  double integral = 0.0;
  double sup = 0.0;
};
DkStats dk_stats(const SamplePath& path, const DiffusionModel& model, const InvariantLaw& law);

/// Every requested statistic of one path, sharing the estimator work.
std::map<Statistic, double> compute_statistics(const SamplePath& path, const DiffusionModel& model,
                                               const InvariantLaw& law, std::span<const Statistic> which);

struct TestResult {
  std::string statistic_name;
  double value = 0.0;
  double epsilon = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  json metadata = json::object();
  json to_json() const;
};

/// reject iff value > the table's (1 - epsilon)-quantile. Throws LevelNotTabulated.
TestResult run_test(double value, const CriticalValueTable& table, double epsilon);

}  // namespace ergogof
