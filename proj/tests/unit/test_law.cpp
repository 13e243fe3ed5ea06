#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ergogof/errors.hpp"
#include "ergogof/law.hpp"
#include "helpers.hpp"

using namespace ergogof;
using testing::ou_model;
using testing::switching_model;

namespace {

const InvariantLaw& ou_law() {
  static const InvariantLaw law = build_law(ou_model());
  return law;
}

/// Phi(x) of the standard normal law with sigma^2 = 2, by adaptive quadrature.
double phi_oracle(double x) {
  boost::math::normal_distribution<> nd;
  auto left = [&](double y) { return std::pow(boost::math::cdf(nd, y), 2) / (2.0 * boost::math::pdf(nd, y)); };
  auto right = [&](double y) {
    return std::pow(boost::math::cdf(boost::math::complement(nd, y)), 2) / (2.0 * boost::math::pdf(nd, y));
  };
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  return gk::integrate(left, -30.0, x, 15, 1e-12) + gk::integrate(right, x, 30.0, 15, 1e-12);
}

}  // namespace

TEST_SUITE("law") {
  TEST_CASE("OU invariant law is standard normal") {
    const auto& law = ou_law();
    boost::math::normal_distribution<> nd;
    const auto& g = law.grid();
    double worst_f = 0.0, worst_F = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst_f = std::max(worst_f, std::abs(law.f0()[i] - boost::math::pdf(nd, g[i])));
      worst_F = std::max(worst_F, std::abs(law.F0()[i] - boost::math::cdf(nd, g[i])));
    }
    CHECK(worst_f < 1e-8);
    CHECK(worst_F < 1e-8);
    CHECK(std::abs(law.mu()) < 1e-9);
    CHECK(law.phi_finite());
    CHECK(law.left_tail_mass() < 1e-9);
  }

  TEST_CASE("Phi against quadrature") {
    const auto& law = ou_law();
    CHECK(law.phi_mu() == doctest::Approx(phi_oracle(0.0)).epsilon(1e-6));
    for (double x : {-2.0, -0.5, 0.3, 1.0, 2.5, 4.0}) {
      INFO("x = " << x);
      CHECK(phi(law, x) == doctest::Approx(phi_oracle(x)).epsilon(1e-6));
    }
  }

  TEST_CASE("switching law against closed form") {
    const auto law = build_law(switching_model());
    const auto& g = law.grid();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g[i];
      const double F = x < 0 ? 0.5 * std::exp(2 * x) : 1.0 - 0.5 * std::exp(-2 * x);
      worst = std::max(worst, std::abs(law.F0()[i] - F));
      worst = std::max(worst, std::abs(law.f0()[i] - std::exp(-2 * std::abs(x))));
    }
    CHECK(worst < 1e-8);
    CHECK(std::abs(law.mu()) < 1e-9);
  }

  TEST_CASE("point evaluation matches tables and weights are positive above mu") {
    const auto& law = ou_law();
    const auto& g = law.grid();
    const std::size_t i = law.mu_index() + 300;
    const auto p = law.at(g[i]);
    CHECK(p.f == doctest::Approx(law.f0()[i]).epsilon(1e-10));
    CHECK(p.phi() == doctest::Approx(law.phi_table()[i]).epsilon(1e-10));
    CHECK(weight_h(law, g[i]) == doctest::Approx(law.h_table()[i]).epsilon(1e-8));
    for (std::size_t k = law.mu_index() + 1; k < g.size(); ++k) {
      REQUIRE(law.h_table()[k] >= 0.0);
      REQUIRE(law.g_table()[k] >= 0.0);
    }
    CHECK(law.h_table()[0] == 0.0);
  }

  TEST_CASE("Phi derivative and Psi derivative by finite differences") {
    const auto& law = ou_law();
    const auto& g = law.grid();
    const auto ph = law.phi_table();
    const auto ps = law.psi_table();
    const auto dps = law.psi_prime_table();
    for (std::size_t i = law.mu_index() + 2; i + 2 < g.size(); i += 7) {
      const double x = g[i];
      if (std::abs(x) > 5.0) continue;
      const double dphi = (ph[i + 1] - ph[i - 1]) / (g[i + 1] - g[i - 1]);
      const double closed = (2.0 * law.F0()[i] - 1.0) / (law.sigma2_table()[i] * law.f0()[i]);
      REQUIRE(dphi == doctest::Approx(closed).epsilon(1e-4));
      const double dpsi = (ps[i + 1] - ps[i - 1]) / (g[i + 1] - g[i - 1]);
      REQUIRE(dpsi == doctest::Approx(dps[i]).epsilon(1e-4));
    }
  }

  TEST_CASE("shift invariance of the OU law") {
    const auto shifted = build_law(ou_model(1.0, 2.0));
    CHECK(shifted.mu() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(shifted.phi_mu() == doctest::Approx(ou_law().phi_mu()).epsilon(1e-8));
    for (double x : {0.2, 1.0, 2.0}) CHECK(phi(shifted, x + 2.0) == doctest::Approx(phi(ou_law(), x)).epsilon(1e-7));
  }

  TEST_CASE("cache file round trip") {
    testing::TempDir dir("law");
    const auto file = dir.path / "law.json";
    save_law(ou_law(), file);
    const auto back = load_law(file);
    CHECK(back.grid() == ou_law().grid());
    CHECK(back.mu() == ou_law().mu());
    for (std::size_t i = 0; i < back.grid().size(); i += 97) {
      REQUIRE(back.h_table()[i] == ou_law().h_table()[i]);
      REQUIRE(back.F0()[i] == ou_law().F0()[i]);
    }
    const auto cached = build_law_cached(ou_model(), {}, dir.path);
    const auto again = build_law_cached(ou_model(), {}, dir.path);
    CHECK(cached.phi_mu() == again.phi_mu());
  }

  TEST_CASE("condition integrals converge for OU and switching") {
    const auto ci = condition_integrals(ou_law());
    CHECK(ci.a1.converged);
    CHECK(ci.a2.converged);
    CHECK(ci.c9.converged);
    CHECK(ci.c10.converged);
    const auto cs = condition_integrals(build_law(switching_model()));
    CHECK(cs.a1.converged);
    CHECK(cs.c10.converged);
  }

  TEST_CASE("distance norms") {
    const auto& base = ou_law();
    const auto same = distance_norms(base, base, ou_model(), ou_model());
    CHECK(same.density_l2 == doctest::Approx(0.0));
    CHECK(same.drift_kl == doctest::Approx(0.0));
    // drift difference alpha sigma^2 cos(n x): ||.||^2 = alpha^2 sigma^2 E_A cos^2(n x)
    double prev_density = 1e9;
    for (double n : {1.0, 4.0, 16.0}) {
      const DiffusionModel alt(DriftSpec::oscillating(DriftSpec::ou(1, 0), 0.3, n), DiffusionSpec::constant(std::sqrt(2.0)));
      const auto la = build_law_on_grid(alt, base.grid());
      const auto d = distance_norms(la, base, alt, ou_model());
      const double oracle = std::sqrt(0.09 * 2.0 * la.expect([&](double x) { return std::pow(std::cos(n * x), 2); }));
      CHECK(d.drift_kl == doctest::Approx(oracle).epsilon(1e-6));
      CHECK(d.density_l2 < prev_density);
      prev_density = d.density_l2;
    }
    CHECK_THROWS_AS(distance_norms(build_law(switching_model()), base, switching_model(), ou_model()), GridMismatch);
  }
}
