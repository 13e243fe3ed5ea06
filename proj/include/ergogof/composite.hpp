#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ergogof/law.hpp"
#include "ergogof/model.hpp"
#include "ergogof/simulate.hpp"

namespace ergogof {

/// Drift known up to a scalar parameter theta in (lower, upper).
class ParametricModel {
 public:
  enum class Family {
    ou_rate,          // S = -theta (x - b)
    ou_mean,          // S = -a (x - theta)
    switching_shift,  // S = -a sgn(x - theta)
  };

  static ParametricModel ou_rate(double b, DiffusionSpec diffusion, double lower, double upper);
  static ParametricModel ou_mean(double a, DiffusionSpec diffusion, double lower, double upper);
  static ParametricModel switching_shift(double a, DiffusionSpec diffusion, double lower, double upper);

  Family family() const { return family_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const DiffusionSpec& diffusion() const { return diffusion_; }

  double drift(double theta, double x) const;
  /// dS/dtheta (zero almost everywhere for the shift family)
  double drift_dtheta(double theta, double x) const;
  /// d^2 S / (dtheta dx)
  double drift_dtheta_dx(double theta, double x) const;

  DiffusionModel at(double theta) const;
  /// True when the median of the invariant law moves with theta.
  bool median_depends_on_theta() const { return family_ != Family::ou_rate; }
  /// False when the likelihood is not differentiable in theta (Fisher information infinite).
  bool regular() const { return family_ != Family::switching_shift; }

  json to_json() const;
  static ParametricModel from_json(const json& j);

 private:
  Family family_ = Family::ou_rate;
  double fixed_ = 0.0;  // b for ou_rate, a otherwise
  double lower_ = 0.0, upper_ = 1.0;
  DiffusionSpec diffusion_;
};

struct CompositeFit {
  double theta_hat = 0.0;
  double fisher_info = 0.0;
  double r_value = 0.0;  // R_T(theta_hat) / T
  bool boundary = false;
  std::vector<double> profile_theta, profile_loglik;
  json to_json() const;
};

/// Discretized log-likelihood int S/sigma^2 dX - 1/2 int S^2/sigma^2 dt (Ito sums).
double log_likelihood(const SamplePath& path, const ParametricModel& pm, double theta);

/// int (dS/dtheta / sigma)^2 f_theta by quadrature on the law grid; +inf for the shift family.
double fisher_information(const ParametricModel& pm, double theta, const InvariantLaw& law_theta);

/// MLE by 256-point grid and golden-section refinement (exact scan for the
/// shift family, whose likelihood is piecewise constant). Fisher information
/// comes from the law at theta_hat built with `policy`; that law is handed
/// back through law_out when given.
CompositeFit mle_fit(const SamplePath& path, const ParametricModel& pm, const GridPolicy& policy = {},
                     std::optional<InvariantLaw>* law_out = nullptr);

/// R_T(theta) without stochastic integrals; x0 is the path's X_0.
double r_statistic(const SamplePath& path, const ParametricModel& pm, double theta);
/// sum dS/dtheta / sigma^2 (dX - S dt), the same quantity as an Ito sum.
double r_statistic_ito(const SamplePath& path, const ParametricModel& pm, double theta);

/// d f0(theta, x) / dtheta at the nodes of law_theta's grid, centered
/// difference with step 1e-4 relative.
std::vector<double> law_theta_derivative(const ParametricModel& pm, double theta, const InvariantLaw& law_theta);

/// T int_mu h (f_hat - f0 + f_dot I^-1 R_T / T)^2 dF0 at theta_hat. Refuses
/// (ConfigError) when the median depends on theta.
double corrected_cvm(std::span<const double> f_hat, const ParametricModel& pm, const CompositeFit& fit,
                     const InvariantLaw& law_theta_hat, std::span<const double> f_dot, double T);
double corrected_cvm(const SamplePath& path, const ParametricModel& pm, const CompositeFit& fit,
                     const InvariantLaw& law_theta_hat);

/// T int_{theta_hat} h (f_hat - f0)^2 dF0 at theta_hat, shift family only.
double shift_corrected_cvm(const SamplePath& path, const ParametricModel& pm, const CompositeFit& fit,
                           const InvariantLaw& law_theta_hat);

struct PseudoTrue {
  double theta = 0.0;
  double distance = 0.0;  // || (S(theta) - S*) / sigma ||_*
  double r_value = 0.0;   // R(theta*)
  bool boundary = false;
  bool stationary = false;  // |R(theta*)| below tolerance
};

/// argmin over theta of || (S(theta) - S*) / sigma ||_* against f_{S*}.
PseudoTrue pseudo_true_theta(const ParametricModel& pm, const DiffusionModel& true_model, const InvariantLaw& law_true,
                             double stationarity_tol = 1e-6);

}  // namespace ergogof
