#include <doctest.h>

#include <numeric>

#include "ergogof/errors.hpp"
#include "ergogof/law.hpp"
#include "ergogof/rng.hpp"
#include "ergogof/simulate.hpp"
#include "helpers.hpp"

using namespace ergogof;
using testing::ou_model;
using testing::switching_model;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known answers") {
    using C = Philox4x32::counter_type;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("streams are reproducible and distinct") {
    RngStream a(5, 1), b(5, 1), c(5, 2), d(5, 1, 1);
    for (int i = 0; i < 10; ++i) {
      const auto va = a();
      CHECK(va == b());
      CHECK(va != c());
      CHECK(va != d());
    }
    RngStream u(9, 0);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double x = u.uniform();
      REQUIRE(x > 0.0);
      REQUIRE(x < 1.0);
      sum += x;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("normals: prefix property and moments") {
    const auto big = standard_normals(11, 3, 40000);
    const auto small = standard_normals(11, 3, 1000);
    CHECK(std::equal(small.begin(), small.end(), big.begin()));
    const double mean = std::accumulate(big.begin(), big.end(), 0.0) / big.size();
    double var = 0.0;
    for (double z : big) var += (z - mean) * (z - mean);
    var /= big.size() - 1;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(40000.0));
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  }

  TEST_CASE("coarsening sums consecutive increments") {
    const std::vector<double> z = {1.0, 3.0, -2.0, 0.5};
    const auto c = coarsen_normals(z);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == doctest::Approx(4.0 / std::sqrt(2.0)));
    CHECK(c[1] == doctest::Approx(-1.5 / std::sqrt(2.0)));
  }
}

TEST_SUITE("simulate") {
  TEST_CASE("Euler-Maruyama without noise is the Euler scheme") {
    const std::vector<double> zeros(50, 0.0);
    const auto x = euler_maruyama(ou_model(2.0, 0.0), 1.0, 0.01, zeros, 1e9);
    REQUIRE(x.size() == 51);
    CHECK(x.back() == doctest::Approx(std::pow(1.0 - 0.02, 50)).epsilon(1e-12));
  }

  TEST_CASE("blow-up is reported") {
    const std::vector<double> z(100, 5.0);
    CHECK_THROWS_AS(euler_maruyama(ou_model(), 0.0, 0.1, z, 2.0), BlowupError);
  }

  TEST_CASE("step preconditions") {
    CHECK_THROWS_AS(check_step(ou_model(), 0.5, 0.01), DomainError);
    CHECK_NOTHROW(check_step(switching_model(), 100.0, 0.01));
    CHECK_THROWS_AS(check_step(switching_model(), 100.0, 0.02), DomainError);
    const DiffusionModel nested(DriftSpec::one_sided(DriftSpec::switching(1, 0), 2, 0), DiffusionSpec::constant(1));
    CHECK_THROWS_AS(check_step(nested, 100.0, 0.02), DomainError);
  }

  TEST_CASE("stationary start") {
    const auto law = build_law(ou_model());
    CHECK(stationary_quantile(law, 0.5) == law.mu());
    CHECK(stationary_quantile(law, 0.975) == doctest::Approx(1.959964).epsilon(1e-4));
  }

  TEST_CASE("simulate_path is deterministic and round-trips through a file") {
    const auto law = build_law(ou_model());
    const auto p = simulate_path(ou_model(), law, 10.0, 0.01, 42, 7);
    const auto q = simulate_path(ou_model(), law, 10.0, 0.01, 42, 7);
    const auto r = simulate_path(ou_model(), law, 10.0, 0.01, 42, 8);
    CHECK(p.values == q.values);
    CHECK(p.values != r.values);
    CHECK(p.steps() == 1000);
    CHECK(p.T() == doctest::Approx(10.0));
    testing::TempDir dir("path");
    save_path(p, dir.path / "p.bin");
    const auto back = load_path(dir.path / "p.bin");
    CHECK(back.values == p.values);
    CHECK(back.dt == p.dt);
    CHECK(back.model_hash == p.model_hash);
  }

  TEST_CASE("invalid paths are rejected") {
    SamplePath p;
    p.dt = 0.1;
    p.values = {0.0};
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.values = {0.0, std::nan("")};
    CHECK_THROWS_AS(p.validate(), DomainError);
  }
}
