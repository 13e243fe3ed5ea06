#include <doctest.h>

#include <limits>

#include "ergogof/errors.hpp"
#include "ergogof/estimate.hpp"
#include "ergogof/law.hpp"
#include "ergogof/simulate.hpp"
#include "ergogof/stats.hpp"
#include "helpers.hpp"

using namespace ergogof;
using testing::ou_model;

namespace {

const InvariantLaw& law() {
  static const InvariantLaw l = build_law(ou_model());
  return l;
}

CriticalValueTable fake_table() {
  CriticalValueTable t;
  t.functional_id = FunctionalId::int_exp;
  t.quantiles = {{0.01, 4.0}, {0.025, 3.0}, {0.05, 2.5}, {0.10, 1.8}};
  return t;
}

/// Noise-free path that follows the drift exactly.
SamplePath drift_exact_path(const DiffusionModel& m, double x0, double dt, std::size_t n) {
  SamplePath p;
  p.dt = dt;
  p.values = euler_maruyama(m, x0, dt, std::vector<double>(n, 0.0), 1e9);
  return p;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("exact estimates give zero") {
    const auto f0 = std::vector<double>(law().f0().begin(), law().f0().end());
    const auto F0 = std::vector<double>(law().F0().begin(), law().F0().end());
    CHECK(cvm_lte(f0, law(), 1000.0) == 0.0);
    CHECK(ks_lte(f0, law(), 1000.0) == 0.0);
    CHECK(cvm_edf(F0, law(), 1000.0) == 0.0);
  }

  TEST_CASE("monotone response to a positive perturbation") {
    const auto& g = law().grid();
    double prev_cvm = 0.0, prev_ks = 0.0;
    for (double c : {0.01, 0.02, 0.05, 0.1}) {
      std::vector<double> f(law().f0().begin(), law().f0().end());
      for (std::size_t i = 0; i < g.size(); ++i) f[i] += c * law().g_table()[i] * law().f0()[i];
      const double cvm = cvm_lte(f, law(), 1000.0), ks = ks_lte(f, law(), 1000.0);
      CHECK(cvm > prev_cvm);
      CHECK(ks > prev_ks);
      prev_cvm = cvm;
      prev_ks = ks;
    }
  }

  TEST_CASE("curves off the law grid are rejected") {
    std::vector<double> short_curve(100, 0.0);
    CHECK_THROWS_AS(cvm_lte(short_curve, law(), 1.0), GridMismatch);
  }

  TEST_CASE("drift-exact noiseless paths give zero for NN and DK") {
    const auto p = drift_exact_path(ou_model(), 1.5, 0.01, 20000);
    CHECK(nn_stat(p, ou_model(), law()) < 1e-12);
    const auto dk = dk_stats(p, ou_model(), law());
    CHECK(dk.integral < 1e-20);
    CHECK(dk.sup < 1e-12);
  }

  TEST_CASE("NN statistic: integral form and unbiased-estimator form agree for sigma = 1") {
    const auto m = ou_model(1.0, 0.0, 1.0);
    const auto l = build_law(m);
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const auto p = simulate_path(m, l, 500.0, 0.01, 5, rep);
      const double a = nn_stat(p, m, l), b = nn_stat_unbiased_form(p, m, l);
      INFO("rep " << rep);
      CHECK(std::abs(a - b) < 0.02 * std::max(1.0, a));
    }
  }

  TEST_CASE("E sigma^2 by quadrature") {
    const DiffusionModel m(DriftSpec::ou(1, 0), DiffusionSpec::sqrt_quadratic(1.0, 0.5));
    const auto l = build_law(m);
    CHECK(mean_sigma2(l) == doctest::Approx(1.0 + 0.5 * l.expect([](double x) { return x * x; })));
    CHECK(mean_sigma2(law()) == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("compute_statistics agrees with the single calls") {
    const auto p = simulate_path(ou_model(), law(), 200.0, 0.01, 9, 0);
    const auto all = compute_statistics(p, ou_model(), law(), all_statistics());
    CHECK(all.at(Statistic::cvm_lte) == cvm_lte(p, law()));
    CHECK(all.at(Statistic::cvm_edf_empirical) == cvm_edf_empirical(p, law()));
    CHECK(all.at(Statistic::ks_lte) == ks_lte(p, law()));
    CHECK(all.at(Statistic::nn) == nn_stat(p, ou_model(), law()));
    CHECK(all.at(Statistic::dk_sup) == dk_stats(p, ou_model(), law()).sup);
    for (const auto& [s, v] : all) CHECK(v >= 0.0);
  }

  TEST_CASE("decision rule") {
    const auto t = fake_table();
    CHECK_FALSE(run_test(0.0, t, 0.05).reject);
    CHECK(run_test(std::numeric_limits<double>::infinity(), t, 0.05).reject);
    CHECK(run_test(std::nextafter(2.5, 3.0), t, 0.05).reject);
    CHECK_FALSE(run_test(std::nextafter(2.5, 2.0), t, 0.05).reject);
    CHECK_THROWS_AS(run_test(1.0, t, 0.2), LevelNotTabulated);
  }

  TEST_CASE("names and limits") {
    for (auto s : all_statistics()) CHECK(statistic_from_name(statistic_name(s)) == s);
    CHECK(limit_of(Statistic::ks_lte) == FunctionalId::sup_exp);
    CHECK(limit_of(Statistic::dk_integral) == FunctionalId::int_01);
    CHECK_THROWS_AS(statistic_from_name("bogus"), ConfigError);
  }
}
