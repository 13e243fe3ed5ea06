#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergogof/grid.hpp"
#include "ergogof/model.hpp"

namespace ergogof {

/// Tolerances of the invariant-law machinery.
struct LawTolerances {
  static constexpr double mass_tol = 1e-10;
  static constexpr double quad_tol = 1e-6;
  static constexpr double root_tol = 1e-10;
};

/// How build_law chooses its grid: truncation where the invariant tail mass
/// drops below mass_tol or exp(-Phi/Phi(mu)) drops below weight_tol, whichever
/// is wider, then `nodes` uniform nodes.
struct GridPolicy {
  std::size_t nodes = 4096;
  double mass_tol = LawTolerances::mass_tol;
  double weight_tol = 1e-12;

  json to_json() const { return {{"nodes", nodes}, {"mass_tol", mass_tol}, {"weight_tol", weight_tol}}; }
  std::string key() const;
};

/// Everything known about the law at a single point.
struct LawPoint {
  double x = 0.0;
  double f = 0.0;
  double log_f = 0.0;
  double F = 0.0;
  double survival = 0.0;  // 1 - F, computed from the right
  double A = 0.0;         // int_{-inf}^x F^2 / (sigma^2 f)
  double B = 0.0;         // int_x^{inf} (1 - F)^2 / (sigma^2 f)
  double C = 0.0;         // int_{-inf}^x F (1 - F) / (sigma^2 f)
  double P = 0.0;         // int_{left}^x F / (sigma^2 f)
  double Q = 0.0;         // int_{left}^x (1 - F) / (sigma^2 f)
  double sigma2 = 1.0;

  double phi() const { return A + B; }
  double psi() const;
  double psi_prime() const;
};

/// Tabulated invariant law of a diffusion model and the quantities derived from it.
/// Immutable after construction.
class InvariantLaw {
 public:
  const DiffusionModel& model() const { return model_; }
  const SpatialGrid& grid() const { return grid_; }

  std::span<const double> f0() const { return f_; }
  std::span<const double> log_f0() const { return log_f_; }
  std::span<const double> F0() const { return F_; }
  std::span<const double> survival() const { return S_; }
  std::span<const double> phi_table() const { return phi_; }
  std::span<const double> psi_table() const { return psi_; }
  std::span<const double> psi_prime_table() const { return dpsi_; }
  /// Weights at the nodes; zero below mu.
  std::span<const double> h_table() const { return h_; }
  std::span<const double> H_table() const { return H_; }
  std::span<const double> g_table() const { return g_; }
  std::span<const double> sigma2_table() const { return sigma2_; }

  double mu() const { return mu_; }
  double phi_mu() const { return phi_mu_; }
  double psi_mu() const { return psi_mu_; }
  /// log G(S) with the potential anchored at zero.
  double log_normalizer() const { return log_g_; }
  /// Index of the first node >= mu.
  std::size_t mu_index() const { return mu_index_; }
  /// Estimated invariant mass beyond each truncation bound.
  double left_tail_mass() const { return tail_left_; }
  double right_tail_mass() const { return tail_right_; }
  /// False when the truncated tail of Phi's integrand is not negligible.
  bool phi_finite() const { return phi_finite_; }
  /// Throws TailDivergence unless phi_finite().
  void require_phi_finite() const;

  /// Exact point evaluation (partial-cell quadrature). x must lie in the grid.
  LawPoint at(double x) const;

  /// E_0 fn(xi) by quadrature against f0.
  template <class Fn>
  double expect(Fn&& fn) const {
    const auto w = grid_.trapezoid_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) sum += w[i] * f_[i] * fn(grid_[i]);
    return sum;
  }

  json to_json() const;
  static InvariantLaw from_json(const json& j);

 private:
  friend InvariantLaw build_law_on_grid(const DiffusionModel&, const SpatialGrid&);
  void derive();

  DiffusionModel model_;
  SpatialGrid grid_;
  std::vector<double> breakpoints_;
  std::vector<double> u_;  // potential relative to node 0 minus log normalizer shift
  std::vector<double> log_f_, f_, F_, S_, A_, B_, C_, P_, Q_, sigma2_;
  std::vector<double> phi_, psi_, dpsi_, h_, H_, g_;
  double log_z_ = 0.0;  // log of int exp(u - log sigma^2)
  double log_g_ = 0.0;
  double tail_left_ = 0.0, tail_right_ = 0.0;
  double mu_ = 0.0, phi_mu_ = 0.0, psi_mu_ = 0.0;
  std::size_t mu_index_ = 0;
  bool phi_finite_ = true;
};

/// Builds the law on an explicit grid (used when several laws must share nodes).
InvariantLaw build_law_on_grid(const DiffusionModel& model, const SpatialGrid& grid);
/// Builds the law, choosing truncation bounds by `policy`.
InvariantLaw build_law(const DiffusionModel& model, const GridPolicy& policy = {});
/// build_law with a file cache keyed by (model hash, policy key).
InvariantLaw build_law_cached(const DiffusionModel& model, const GridPolicy& policy,
                              const std::filesystem::path& cache_dir);

void save_law(const InvariantLaw& law, const std::filesystem::path& file);
InvariantLaw load_law(const std::filesystem::path& file);

double median(const InvariantLaw& law);
/// Phi(x) = int (1{y > x} - F0(y))^2 / (sigma^2 f0) dy
double phi(const InvariantLaw& law, double x);
/// Psi(x) for x >= mu
double psi(const InvariantLaw& law, double x);
/// h(x) = (2F0 - 1) exp(-Phi/Phi(mu)) / (4 Phi(mu)^2 sigma^2 f0^4), x >= mu
double weight_h(const InvariantLaw& law, double x);
/// H(x) = Psi'(x) exp(-Psi/Psi(mu)) / (4 Psi(mu)^2 f0 (1 - F0)^2), x >= mu
double weight_H(const InvariantLaw& law, double x);
/// g(x) = exp(-Phi/Phi(mu)) / (2 f0 sqrt(Phi(mu))), x >= mu
double weight_g(const InvariantLaw& law, double x);
/// Covariance R(x, y) of the limit process behind the local-time estimator.
double limit_covariance(const InvariantLaw& law, double x, double y);

struct ConditionIntegral {
  double value = 0.0;
  bool converged = false;
};

struct ConditionIntegrals {
  ConditionIntegral a1, a2, c9, c10;
  json to_json() const;
};

/// The four integrability conditions, each with its own convergence flag.
ConditionIntegrals condition_integrals(const InvariantLaw& law);

struct DistanceNorms {
  double density_l2 = 0.0;  // || f_A - f_B ||, norm against dF_B
  double cdf_l2 = 0.0;      // || F_A - F_B ||, norm against dF_B
  double drift_kl = 0.0;    // || (S_A - S_B) / sigma ||_*, norm against f_A
};

/// Distances between an alternative (A) and a hypothesis (B) built on the same grid.
DistanceNorms distance_norms(const InvariantLaw& law_a, const InvariantLaw& law_b, const DiffusionModel& model_a,
                             const DiffusionModel& model_b);

}  // namespace ergogof
