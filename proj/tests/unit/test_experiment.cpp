#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ergogof/errors.hpp"
#include "ergogof/experiment.hpp"
#include "ergogof/report.hpp"
#include "helpers.hpp"

using namespace ergogof;

namespace {

/// Tables with made-up quantiles: enough for plumbing, not for inference.
void write_tables(const std::filesystem::path& dir) {
  for (auto id : {FunctionalId::int_exp, FunctionalId::sup_exp, FunctionalId::int_01, FunctionalId::sup_01}) {
    CriticalValueTable t;
    t.functional_id = id;
    t.quantiles = {{0.01, 4.0}, {0.025, 3.0}, {0.05, 2.0}, {0.10, 1.0}};
    t.n_paths = 100000;
    save_table(t, dir / table_filename(id));
    save_samples(std::vector<double>{0.5, 1.0, 1.5, 2.5}, dir / samples_filename(id));
  }
}

json base_config(const std::filesystem::path& root) {
  const json ou = testing::ou_model().to_json();
  return {{"seed", 12},
          {"hypothesis", ou},
          {"statistics", {"cvm_lte", "cvm_edf", "nn"}},
          {"T", 100.0},
          {"dt", 0.01},
          {"replications", 6},
          {"levels", {0.05, 0.1}},
          {"table_dir", (root / "tables").string()},
          {"out_dir", (root / "out").string()}};
}

std::string slurp(const std::filesystem::path& f) {
  std::stringstream s;
  s << std::ifstream(f).rdbuf();
  return s.str();
}

/// Smallest p with P(Bin(n, p) >= k) >= a / 2, by bisection on the binomial tail.
double cp_lower(int k, int n, double a) {
  auto tail = [&](double p) {
    double s = 0.0;
    for (int j = k; j <= n; ++j) s += std::exp(std::lgamma(n + 1) - std::lgamma(j + 1) - std::lgamma(n - j + 1) +
                                               j * std::log(p) + (n - j) * std::log1p(-p));
    return s;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) < a / 2 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("Clopper-Pearson interval") {
    const auto r = rejection_summary(3, 40);
    CHECK(r.rate == doctest::Approx(0.075));
    CHECK(r.ci_low == doctest::Approx(cp_lower(3, 40, 0.05)).epsilon(1e-6));
    // upper limit by symmetry: 1 - lower limit of the complementary count
    CHECK(r.ci_high == doctest::Approx(1.0 - cp_lower(37, 40, 0.05)).epsilon(1e-6));
    CHECK(rejection_summary(0, 10).ci_low == 0.0);
    CHECK(rejection_summary(10, 10).ci_high == 1.0);
  }

  TEST_CASE("config validation") {
    testing::TempDir dir("cfg");
    auto j = base_config(dir.path);
    CHECK_NOTHROW(ExperimentConfig::from_json(j));
    j.erase("seed");
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    j = base_config(dir.path);
    j["statistics"] = {"nonsense"};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    j = base_config(dir.path);
    j.erase("hypothesis");
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    const auto c = ExperimentConfig::from_json(base_config(dir.path));
    CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());
  }

  TEST_CASE("missing tables are a configuration error") {
    testing::TempDir dir("notab");
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(base_config(dir.path))), ConfigError);
  }

  TEST_CASE("zero replications give an empty report") {
    testing::TempDir dir("zero");
    std::filesystem::create_directories(dir.path / "tables");
    write_tables(dir.path / "tables");
    auto j = base_config(dir.path);
    j["replications"] = 0;
    const auto rep = run_experiment(ExperimentConfig::from_json(j));
    REQUIRE(rep.scenarios.size() == 1);
    CHECK(rep.scenarios[0].outcomes[0].rates.at(0.05).total == 0);
  }

  TEST_CASE("deterministic output, consistent rows and plot data") {
    testing::TempDir dir("det");
    std::filesystem::create_directories(dir.path / "tables");
    write_tables(dir.path / "tables");
    auto j = base_config(dir.path);
    j["alternatives"] = {{{"name", "doubled"},
                          {"model",
                           {{"drift", {{"family", "one_sided"}, {"base", {{"family", "ou"}, {"a", 1}, {"b", 0}}}, {"factor", 2}, {"split", 0}}},
                            {"diffusion", {{"family", "constant"}, {"sigma", std::sqrt(2.0)}}}}}}};
    j["oscillation"] = {{"alpha", 0.5}, {"frequencies", {1, 4}}};
    j["composite"] = {{"family", ParametricModel::ou_rate(0.0, DiffusionSpec::constant(std::sqrt(2.0)), 0.2, 5.0).to_json()},
                      {"theta0", 1.0}};
    j["threads"] = 1;
    auto rep = run_experiment(ExperimentConfig::from_json(j));
    const auto first = slurp(dir.path / "out" / "report.json");
    const auto first_rows = slurp(dir.path / "out" / "rows.csv");
    j["threads"] = 3;
    run_experiment(ExperimentConfig::from_json(j));
    CHECK(slurp(dir.path / "out" / "report.json") == first);
    CHECK(slurp(dir.path / "out" / "rows.csv") == first_rows);
    CHECK(rows_match_report(dir.path / "out"));

    CHECK(rep.scenarios.size() == 5);
    for (const auto& s : rep.scenarios)
      for (const auto& o : s.outcomes)
        for (const auto& [eps, r] : o.rates) CHECK(r.rate == static_cast<double>(r.rejected) / r.total);
    CHECK_FALSE(rep.scenarios[2].adf);  // oscillating alternatives change the drift below mu
    CHECK(rep.scenarios[1].adf);

    const auto files = make_report(dir.path / "out", dir.path / "plots", 20);
    CHECK(files.files.size() > 10);
    std::ifstream h(dir.path / "plots" / "hist_null_cvm_lte.csv");
    std::string line;
    std::getline(h, line);
    std::size_t count = 0;
    while (std::getline(h, line)) {
      std::stringstream ss(line);
      std::string cell;
      for (int k = 0; k < 3; ++k) std::getline(ss, cell, ',');
      count += std::stoul(cell);
    }
    CHECK(count == 6);
    CHECK(std::filesystem::exists(dir.path / "plots" / "power.csv"));
    CHECK(std::filesystem::exists(dir.path / "plots" / "curves_null.csv"));
  }

  TEST_CASE("histogram and missing inputs") {
    const std::vector<double> v = {-1.0, 0.1, 0.5, 0.9, 7.0};
    const auto h = histogram(v, 0.0, 1.0, 4);
    CHECK(h.total() == v.size());
    CHECK(h.counts.front() == 2);
    CHECK(h.counts.back() == 2);
    testing::TempDir dir("missing");
    CHECK_THROWS_AS(make_report(dir.path, dir.path / "plots"), MissingInputs);
  }
}
