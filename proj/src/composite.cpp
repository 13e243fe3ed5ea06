#include "ergogof/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ergogof/errors.hpp"
#include "ergogof/estimate.hpp"
#include "ergogof/quadrature.hpp"
#include "ergogof/stats.hpp"

namespace ergogof {

namespace {

constexpr std::size_t profile_points = 256;
constexpr double golden = 0.6180339887498949;

std::string family_name(ParametricModel::Family f) {
  switch (f) {
    case ParametricModel::Family::ou_rate:
      return "ou_rate";
    case ParametricModel::Family::ou_mean:
      return "ou_mean";
    case ParametricModel::Family::switching_shift:
      return "switching_shift";
  }
  return "?";
}

ParametricModel::Family family_from_name(const std::string& s) {
  if (s == "ou_rate") return ParametricModel::Family::ou_rate;
  if (s == "ou_mean") return ParametricModel::Family::ou_mean;
  if (s == "switching_shift") return ParametricModel::Family::switching_shift;
  throw ConfigError("unknown parametric family '" + s + "'");
}

/// Maximizes fn on [a, b] assuming unimodality.
template <class Fn>
double golden_max(Fn&& fn, double a, double b, double tol) {
  double c = b - golden * (b - a), d = a + golden * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - golden * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + golden * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

struct GridMax {
  double theta = 0.0;
  bool boundary = false;
  std::vector<double> thetas, values;
};

/// 256-point profile then golden-section inside the neighbouring cells.
template <class Fn>
GridMax grid_golden_max(Fn&& fn, double lo, double hi) {
  GridMax r;
  r.thetas.resize(profile_points);
  r.values.resize(profile_points);
  const double step = (hi - lo) / static_cast<double>(profile_points - 1);
  for (std::size_t i = 0; i < profile_points; ++i) {
    r.thetas[i] = lo + step * static_cast<double>(i);
    r.values[i] = fn(r.thetas[i]);
  }
  const auto best = static_cast<std::size_t>(std::max_element(r.values.begin(), r.values.end()) - r.values.begin());
  const double a = r.thetas[best == 0 ? 0 : best - 1];
  const double b = r.thetas[std::min(best + 1, profile_points - 1)];
  r.theta = golden_max(fn, a, b, 1e-10 * std::max(1.0, hi - lo));
  r.boundary = best == 0 || best == profile_points - 1;
  return r;
}

void require_interval(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("parameter bounds must satisfy lower < upper");
}

}  // namespace

ParametricModel ParametricModel::ou_rate(double b, DiffusionSpec diffusion, double lower, double upper) {
  require_interval(lower, upper);
  if (lower <= 0.0) throw ConfigError("ou_rate needs a positive lower bound");
  ParametricModel m;
  m.family_ = Family::ou_rate;
  m.fixed_ = b;
  m.lower_ = lower;
  m.upper_ = upper;
  m.diffusion_ = std::move(diffusion);
  return m;
}

ParametricModel ParametricModel::ou_mean(double a, DiffusionSpec diffusion, double lower, double upper) {
  require_interval(lower, upper);
  if (a <= 0.0) throw ConfigError("ou_mean needs a > 0");
  ParametricModel m;
  m.family_ = Family::ou_mean;
  m.fixed_ = a;
  m.lower_ = lower;
  m.upper_ = upper;
  m.diffusion_ = std::move(diffusion);
  return m;
}

ParametricModel ParametricModel::switching_shift(double a, DiffusionSpec diffusion, double lower, double upper) {
  require_interval(lower, upper);
  if (a <= 0.0) throw ConfigError("switching_shift needs a > 0");
  ParametricModel m;
  m.family_ = Family::switching_shift;
  m.fixed_ = a;
  m.lower_ = lower;
  m.upper_ = upper;
  m.diffusion_ = std::move(diffusion);
  return m;
}

double ParametricModel::drift(double theta, double x) const {
  switch (family_) {
    case Family::ou_rate:
      return -theta * (x - fixed_);
    case Family::ou_mean:
      return -fixed_ * (x - theta);
    case Family::switching_shift:
      return x > theta ? -fixed_ : (x < theta ? fixed_ : 0.0);
  }
  return 0.0;
}

double ParametricModel::drift_dtheta(double /*theta*/, double x) const {
  switch (family_) {
    case Family::ou_rate:
      return -(x - fixed_);
    case Family::ou_mean:
      return fixed_;
    case Family::switching_shift:
      return 0.0;
  }
  return 0.0;
}

double ParametricModel::drift_dtheta_dx(double /*theta*/, double /*x*/) const {
  return family_ == Family::ou_rate ? -1.0 : 0.0;
}

DiffusionModel ParametricModel::at(double theta) const {
  if (!(theta >= lower_ && theta <= upper_)) throw DomainError("theta outside the parameter interval");
  switch (family_) {
    case Family::ou_rate:
      return {DriftSpec::ou(theta, fixed_), diffusion_, "ou_rate"};
    case Family::ou_mean:
      return {DriftSpec::ou(fixed_, theta), diffusion_, "ou_mean"};
    case Family::switching_shift:
      return {DriftSpec::switching(fixed_, theta), diffusion_, "switching_shift"};
  }
  return {};
}

json ParametricModel::to_json() const {
  return {{"family", family_name(family_)},
          {"fixed", fixed_},
          {"lower", lower_},
          {"upper", upper_},
          {"diffusion", diffusion_.to_json()}};
}

ParametricModel ParametricModel::from_json(const json& j) {
  try {
    const auto fam = family_from_name(j.at("family").get<std::string>());
    const double fixed = j.at("fixed").get<double>();
    const double lo = j.at("lower").get<double>(), hi = j.at("upper").get<double>();
    auto diff = j.contains("diffusion") ? DiffusionSpec::from_json(j.at("diffusion")) : DiffusionSpec::constant(1.0);
    switch (fam) {
      case Family::ou_rate:
        return ou_rate(fixed, diff, lo, hi);
      case Family::ou_mean:
        return ou_mean(fixed, diff, lo, hi);
      case Family::switching_shift:
        return switching_shift(fixed, diff, lo, hi);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parametric model: ") + e.what());
  }
  throw ConfigError("parametric model: bad family");
}

json CompositeFit::to_json() const {
  return {{"theta_hat", theta_hat},
          {"fisher_info", std::isfinite(fisher_info) ? json(fisher_info) : json("inf")},
          {"r_value", r_value},
          {"boundary", boundary}};
}

double log_likelihood(const SamplePath& path, const ParametricModel& pm, double theta) {
  const auto& X = path.values;
  const auto& diff = pm.diffusion();
  double ito = 0.0, quad = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double s = pm.drift(theta, X[k]);
    const double s2 = diff.sigma2(X[k]);
    ito += s / s2 * (X[k + 1] - X[k]);
    quad += s * s / s2;
  }
  return ito - 0.5 * quad * path.dt;
}

double fisher_information(const ParametricModel& pm, double theta, const InvariantLaw& law_theta) {
  if (!pm.regular()) return std::numeric_limits<double>::infinity();
  const auto& diff = pm.diffusion();
  return law_theta.expect([&](double x) {
    const double d = pm.drift_dtheta(theta, x);
    return d * d / diff.sigma2(x);
  });
}

CompositeFit mle_fit(const SamplePath& path, const ParametricModel& pm, const GridPolicy& policy,
                     std::optional<InvariantLaw>* law_out) {
  path.validate();
  CompositeFit fit;
  auto ll = [&](double th) { return log_likelihood(path, pm, th); };
  if (pm.family() == ParametricModel::Family::switching_shift) {
    // ll = 2 * sum_{X_k < theta} c_k - sum c_k: piecewise constant, scan the order statistics.
    const auto& X = path.values;
    const std::size_t n = path.steps();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return X[i] < X[j]; });
    double acc = 0.0, best = 0.0;
    double best_lo = pm.lower(), best_hi = n ? std::min(X[order[0]], pm.upper()) : pm.upper();
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t k = order[r];
      acc += (X[k + 1] - X[k]) / pm.diffusion().sigma2(X[k]);
      const double lo = std::max(X[k], pm.lower());
      const double hi = std::min(r + 1 < n ? X[order[r + 1]] : pm.upper(), pm.upper());
      if (lo >= hi) continue;
      if (acc > best) {
        best = acc;
        best_lo = lo;
        best_hi = hi;
      }
    }
    fit.theta_hat = 0.5 * (best_lo + best_hi);
    fit.boundary = best_lo <= pm.lower() || best_hi >= pm.upper();
    const double step = (pm.upper() - pm.lower()) / static_cast<double>(profile_points - 1);
    for (std::size_t i = 0; i < profile_points; ++i) {
      const double th = pm.lower() + step * static_cast<double>(i);
      fit.profile_theta.push_back(th);
      fit.profile_loglik.push_back(ll(th));
    }
  } else {
    auto g = grid_golden_max(ll, pm.lower(), pm.upper());
    fit.theta_hat = g.theta;
    fit.boundary = g.boundary;
    fit.profile_theta = std::move(g.thetas);
    fit.profile_loglik = std::move(g.values);
  }
  fit.r_value = r_statistic(path, pm, fit.theta_hat) / path.T();
  auto law = build_law(pm.at(fit.theta_hat), policy);
  fit.fisher_info = fisher_information(pm, fit.theta_hat, law);
  if (law_out) *law_out = std::move(law);
  return fit;
}

double r_statistic(const SamplePath& path, const ParametricModel& pm, double theta) {
  path.validate();
  const auto& diff = pm.diffusion();
  const auto& X = path.values;
  // int_{X_0}^{X_T} Sdot / sigma^2 dy
  const double x0 = X.front(), x1 = X.back();
  const auto panels = static_cast<std::size_t>(std::ceil(std::abs(x1 - x0) / 0.05)) + 1;
  double boundary_term = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = x0 + (x1 - x0) * static_cast<double>(p) / static_cast<double>(panels);
    const double b = x0 + (x1 - x0) * static_cast<double>(p + 1) / static_cast<double>(panels);
    boundary_term += quad::gl5([&](double y) { return pm.drift_dtheta(theta, y) / diff.sigma2(y); }, a, b);
  }
  double correction = 0.0, drift_term = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double x = X[k];
    const double sig = diff.sigma(x);
    const double sdot = pm.drift_dtheta(theta, x);
    correction += (pm.drift_dtheta_dx(theta, x) * sig - 2.0 * sdot * diff.dsigma(x)) / (2.0 * sig);
    drift_term += sdot * pm.drift(theta, x) / (sig * sig);
  }
  return boundary_term - (correction + drift_term) * path.dt;
}

double r_statistic_ito(const SamplePath& path, const ParametricModel& pm, double theta) {
  path.validate();
  const auto& X = path.values;
  double sum = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double x = X[k];
    sum += pm.drift_dtheta(theta, x) / pm.diffusion().sigma2(x) * (X[k + 1] - x - pm.drift(theta, x) * path.dt);
  }
  return sum;
}

std::vector<double> law_theta_derivative(const ParametricModel& pm, double theta, const InvariantLaw& law_theta) {
  const double step = 1e-4 * std::max(std::abs(theta), 1.0);
  const auto plus = build_law_on_grid(pm.at(std::min(theta + step, pm.upper())), law_theta.grid());
  const auto minus = build_law_on_grid(pm.at(std::max(theta - step, pm.lower())), law_theta.grid());
  const double span = std::min(theta + step, pm.upper()) - std::max(theta - step, pm.lower());
  std::vector<double> d(law_theta.grid().size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (plus.f0()[i] - minus.f0()[i]) / span;
  return d;
}

double corrected_cvm(std::span<const double> f_hat, const ParametricModel& pm, const CompositeFit& fit,
                     const InvariantLaw& law, std::span<const double> f_dot, double T) {
  if (pm.median_depends_on_theta())
    throw ConfigError("corrected statistic needs a median that does not move with theta (family " +
                      family_name(pm.family()) + ")");
  const auto& grid = law.grid();
  if (f_hat.size() != grid.size() || f_dot.size() != grid.size())
    throw GridMismatch("curves do not live on the law grid");
  law.require_phi_finite();
  const double info = fisher_information(pm, fit.theta_hat, law);
  if (!(info > 0.0) || !std::isfinite(info)) throw DomainError("Fisher information is not positive and finite");
  const double shift = fit.r_value / info;
  const std::size_t m = law.mu_index();
  auto w = grid.trapezoid_weights(m);
  if (m < grid.size()) w[m] += 0.5 * (grid[m] - law.mu());
  const auto f = law.f0();
  const auto h = law.h_table();
  double sum = 0.0;
  for (std::size_t i = m; i < grid.size(); ++i) {
    const double d = f_hat[i] - f[i] + f_dot[i] * shift;
    sum += w[i] * h[i] * d * d * f[i];
  }
  return T * sum;
}

double corrected_cvm(const SamplePath& path, const ParametricModel& pm, const CompositeFit& fit,
                     const InvariantLaw& law_theta_hat) {
  if (pm.median_depends_on_theta())
    throw ConfigError("corrected statistic needs a median that does not move with theta (family " +
                      family_name(pm.family()) + ")");
  const auto f_hat = lte(path, law_theta_hat.grid(), law_theta_hat.model()).values;
  const auto f_dot = law_theta_derivative(pm, fit.theta_hat, law_theta_hat);
  return corrected_cvm(f_hat, pm, fit, law_theta_hat, f_dot, path.T());
}

double shift_corrected_cvm(const SamplePath& path, const ParametricModel& pm, const CompositeFit& fit,
                           const InvariantLaw& law_theta_hat) {
  if (pm.family() != ParametricModel::Family::switching_shift)
    throw ConfigError("shift statistic is defined for the switching_shift family only");
  const auto& grid = law_theta_hat.grid();
  law_theta_hat.require_phi_finite();
  const auto f_hat = lte(path, grid, law_theta_hat.model()).values;
  const double lower = fit.theta_hat;
  const std::size_t m = grid.first_at_or_above(lower);
  auto w = grid.trapezoid_weights(m);
  if (m < grid.size()) w[m] += 0.5 * (grid[m] - lower);
  const auto f = law_theta_hat.f0();
  const auto h = law_theta_hat.h_table();
  double sum = 0.0;
  for (std::size_t i = m; i < grid.size(); ++i) {
    const double d = f_hat[i] - f[i];
    sum += w[i] * h[i] * d * d * f[i];
  }
  return path.T() * sum;
}

PseudoTrue pseudo_true_theta(const ParametricModel& pm, const DiffusionModel& true_model, const InvariantLaw& law_true,
                             double stationarity_tol) {
  const auto& diff = pm.diffusion();
  auto neg_dist = [&](double th) {
    return -law_true.expect([&](double x) {
      const double d = pm.drift(th, x) - true_model.drift_at(x);
      return d * d / diff.sigma2(x);
    });
  };
  const auto g = grid_golden_max(neg_dist, pm.lower(), pm.upper());
  PseudoTrue r;
  r.theta = g.theta;
  r.boundary = g.boundary;
  r.distance = std::sqrt(std::max(0.0, -neg_dist(g.theta)));
  r.r_value = law_true.expect([&](double x) {
    return pm.drift_dtheta(g.theta, x) * (true_model.drift_at(x) - pm.drift(g.theta, x)) / diff.sigma2(x);
  });
  r.stationary = std::abs(r.r_value) < stationarity_tol;
  return r;
}

}  // namespace ergogof
