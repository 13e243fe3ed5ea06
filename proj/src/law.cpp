#include "ergogof/law.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ergogof/quadrature.hpp"

namespace ergogof {

namespace {

constexpr int law_format_version = 1;
constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : neg_inf; }
double safe_exp(double v) { return v == neg_inf ? 0.0 : std::exp(v); }

/// Cell-local evaluator: density, and the five integrands over sigma^2 f.
/// Index layout of the returned arrays: 0 f, 1 F^2 w, 2 S^2 w, 3 F S w, 4 F w, 5 S w.
struct CellEvaluator {
  const DiffusionModel& model;
  std::span<const double> bps;
  double x_left, x_right;
  double u_left;  // potential at x_left
  double log_z;
  double F_left;   // F at x_left
  double S_right;  // survival at x_right

  double log_density(double y) const {
    return u_left + potential_increment(model, x_left, y, bps) - std::log(model.sigma2_at(y)) - log_z;
  }
  double density(double y) const { return std::exp(log_density(y)); }
  double mass(double a, double b) const {
    return quad::gl5_split([&](double z) { return density(z); }, a, b, bps);
  }

  std::array<double, 6> integrands(double y) const {
    const double lf = log_density(y);
    const double f = std::exp(lf);
    const double s2 = model.sigma2_at(y);
    const double w = std::exp(-lf - std::log(s2));  // 1 / (sigma^2 f)
    const double F = F_left + mass(x_left, y);
    const double S = S_right + mass(y, x_right);
    return {f, F * F * w, S * S * w, F * S * w, F * w, S * w};
  }
};

}  // namespace

double LawPoint::psi() const {
  if (survival <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = F / survival;
  return A + r * r * B;
}

double LawPoint::psi_prime() const {
  if (survival <= 0.0) return 0.0;
  return 2.0 * F * f * B / (survival * survival * survival);
}

std::string GridPolicy::key() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "n%zu_m%.3g_w%.3g", nodes, mass_tol, weight_tol);
  return buf;
}

InvariantLaw build_law_on_grid(const DiffusionModel& model, const SpatialGrid& grid) {
  InvariantLaw law;
  law.model_ = model;
  law.grid_ = grid;
  law.breakpoints_ = model.drift().breakpoints();
  const auto x = grid.nodes();
  const std::size_t n = x.size();
  const auto& bps = law.breakpoints_;

  auto& u = law.u_;
  u.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) u[i + 1] = u[i] + potential_increment(model, x[i], x[i + 1], bps);

  law.sigma2_.resize(n);
  std::vector<double> ell(n);
  for (std::size_t i = 0; i < n; ++i) {
    law.sigma2_[i] = model.sigma2_at(x[i]);
    ell[i] = u[i] - std::log(law.sigma2_[i]);
  }
  const double top = *std::max_element(ell.begin(), ell.end());
  if (!std::isfinite(top)) throw NormalizationFailure("non-finite speed density on the grid");

  // Cell masses in units of exp(top).
  std::vector<double> cell(n - 1);
  double body = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    CellEvaluator ev{model, bps, x[i], x[i + 1], u[i], top, 0.0, 0.0};
    cell[i] = ev.mass(x[i], x[i + 1]);
    body += cell[i];
  }
  // Exponential-tail estimates beyond the truncation bounds.
  const double slope_left = (ell[1] - ell[0]) / (x[1] - x[0]);
  const double slope_right = (ell[n - 2] - ell[n - 1]) / (x[n - 1] - x[n - 2]);
  if (!(slope_left > 0.0) || !(slope_right > 0.0))
    throw NormalizationFailure("invariant density does not decay at the grid edges [" + std::to_string(x[0]) +
                               ", " + std::to_string(x[n - 1]) + "]");
  const double tail_left = std::exp(ell[0] - top) / slope_left;
  const double tail_right = std::exp(ell[n - 1] - top) / slope_right;
  const double total = tail_left + body + tail_right;
  if (!std::isfinite(total) || !(total > 0.0)) throw NormalizationFailure("G(S) quadrature did not converge");

  law.log_z_ = top + std::log(total);
  law.tail_left_ = tail_left / total;
  law.tail_right_ = tail_right / total;

  law.log_f_.resize(n);
  law.f_.resize(n);
  law.F_.resize(n);
  law.S_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    law.log_f_[i] = ell[i] - law.log_z_;
    law.f_[i] = std::exp(law.log_f_[i]);
  }
  double acc = tail_left;
  for (std::size_t i = 0; i < n; ++i) {
    law.F_[i] = acc / total;
    if (i + 1 < n) acc += cell[i];
  }
  acc = tail_right;
  for (std::size_t i = n; i-- > 0;) {
    law.S_[i] = acc / total;
    if (i > 0) acc += cell[i - 1];
  }

  // Cumulative integrals over sigma^2 f.
  law.A_.assign(n, 0.0);
  law.B_.assign(n, 0.0);
  law.C_.assign(n, 0.0);
  law.P_.assign(n, 0.0);
  law.Q_.assign(n, 0.0);
  std::vector<std::array<double, 6>> cells(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    CellEvaluator ev{model, bps, x[i], x[i + 1], u[i], law.log_z_, law.F_[i], law.S_[i + 1]};
    cells[i] = quad::gl5_split_vec<6>([&](double y) { return ev.integrands(y); }, x[i], x[i + 1], bps);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    law.A_[i + 1] = law.A_[i] + cells[i][1];
    law.C_[i + 1] = law.C_[i] + cells[i][3];
    law.P_[i + 1] = law.P_[i] + cells[i][4];
    law.Q_[i + 1] = law.Q_[i] + cells[i][5];
  }
  for (std::size_t i = n - 1; i > 0; --i) law.B_[i - 1] = law.B_[i] + cells[i - 1][2];

  // log G(S): G uses the potential anchored at zero.
  double u_zero;
  if (x[0] <= 0.0 && 0.0 <= x[n - 1]) {
    const std::size_t i = grid.cell_of(0.0);
    u_zero = u[i] + potential_increment(model, x[i], 0.0, bps);
  } else {
    const std::size_t i = x[0] > 0.0 ? 0 : n - 1;
    const int panels = 4096;
    u_zero = u[i];
    for (int p = 0; p < panels; ++p) {
      const double a = x[i] * (1.0 - static_cast<double>(p) / panels);
      const double b = x[i] * (1.0 - static_cast<double>(p + 1) / panels);
      u_zero += potential_increment(model, a, b, bps);
    }
  }
  law.log_g_ = law.log_z_ - u_zero;

  law.derive();
  return law;
}

LawPoint InvariantLaw::at(double x) const {
  if (!(x >= grid_.left() && x <= grid_.right()))
    throw DomainError("point " + std::to_string(x) + " outside the law grid [" + std::to_string(grid_.left()) +
                      ", " + std::to_string(grid_.right()) + "]");
  const auto nodes = grid_.nodes();
  const std::size_t i = grid_.cell_of(x);
  CellEvaluator ev{model_, breakpoints_, nodes[i], nodes[i + 1], u_[i], log_z_, F_[i], S_[i + 1]};
  LawPoint p;
  p.x = x;
  p.sigma2 = model_.sigma2_at(x);
  p.log_f = ev.log_density(x);
  p.f = std::exp(p.log_f);
  p.F = F_[i] + ev.mass(nodes[i], x);
  p.survival = S_[i + 1] + ev.mass(x, nodes[i + 1]);
  const auto integrand = [&](double y) { return ev.integrands(y); };
  const auto left = quad::gl5_split_vec<6>(integrand, nodes[i], x, breakpoints_);
  const auto right = quad::gl5_split_vec<6>(integrand, x, nodes[i + 1], breakpoints_);
  p.A = A_[i] + left[1];
  p.B = B_[i + 1] + right[2];
  p.C = C_[i] + left[3];
  p.P = P_[i] + left[4];
  p.Q = Q_[i] + left[5];
  return p;
}

namespace {

struct WeightLogs {
  double h, H, g;
};

/// Logs of the three weights at a point at or above mu.
WeightLogs weight_logs(const LawPoint& p, double phi_mu, double psi_mu) {
  WeightLogs w{};
  const double phi = p.phi();
  const double two_f_minus_one = p.F - p.survival;
  w.h = safe_log(two_f_minus_one) - std::log(4.0) - 2.0 * std::log(phi_mu) - std::log(p.sigma2) - 4.0 * p.log_f -
        phi / phi_mu;
  w.g = -phi / phi_mu - std::log(2.0) - p.log_f - 0.5 * std::log(phi_mu);
  // H = Psi' e^{-Psi/Psi(mu)} / (4 Psi(mu)^2 f (1-F)^2) with Psi' = 2 F f B / (1-F)^3.
  w.H = std::log(2.0) + safe_log(p.F) + safe_log(p.B) - std::log(4.0) - 2.0 * std::log(psi_mu) -
        5.0 * safe_log(p.survival) - p.psi() / psi_mu;
  if (p.survival <= 0.0) w.H = neg_inf;
  return w;
}

}  // namespace

void InvariantLaw::derive() {
  const std::size_t n = grid_.size();
  phi_.resize(n);
  psi_.resize(n);
  dpsi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    LawPoint p;
    p.f = f_[i];
    p.F = F_[i];
    p.survival = S_[i];
    p.A = A_[i];
    p.B = B_[i];
    phi_[i] = p.phi();
    psi_[i] = p.psi();
    dpsi_[i] = p.psi_prime();
  }

  // Median: Newton inside the crossing cell, safeguarded by the cell bounds.
  const auto nodes = grid_.nodes();
  std::size_t cross = 0;
  while (cross + 2 < n && F_[cross + 1] <= 0.5) ++cross;
  {
    CellEvaluator ev{model_, breakpoints_, nodes[cross], nodes[cross + 1], u_[cross], log_z_, F_[cross],
                     S_[cross + 1]};
    double lo = nodes[cross], hi = nodes[cross + 1];
    double m = lo + (hi - lo) * (0.5 - F_[cross]) / std::max(F_[cross + 1] - F_[cross], 1e-300);
    for (int it = 0; it < 100; ++it) {
      const double Fm = F_[cross] + ev.mass(nodes[cross], m);
      const double err = Fm - 0.5;
      if (std::abs(err) <= 1e-3 * LawTolerances::root_tol) break;
      if (err > 0.0)
        hi = m;
      else
        lo = m;
      double next = m - err / ev.density(m);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == m) break;
      m = next;
    }
    mu_ = m;
  }
  mu_index_ = grid_.first_at_or_above(mu_);

  const LawPoint at_mu = at(mu_);
  phi_mu_ = at_mu.phi();
  psi_mu_ = at_mu.psi();

  // Phi is finite only if the truncated tails of its integrand are negligible.
  const double width = grid_.right() - grid_.left();
  const double left_tail = F_[0] * F_[0] / (sigma2_[0] * f_[0]) * width;
  const double right_tail = S_[n - 1] * S_[n - 1] / (sigma2_[n - 1] * f_[n - 1]) * width;
  phi_finite_ = std::isfinite(phi_mu_) && left_tail < LawTolerances::quad_tol * phi_mu_ &&
                right_tail < LawTolerances::quad_tol * phi_mu_;

  h_.assign(n, 0.0);
  H_.assign(n, 0.0);
  g_.assign(n, 0.0);
  for (std::size_t i = mu_index_; i < n; ++i) {
    LawPoint p;
    p.x = nodes[i];
    p.f = f_[i];
    p.log_f = log_f_[i];
    p.F = F_[i];
    p.survival = S_[i];
    p.A = A_[i];
    p.B = B_[i];
    p.sigma2 = sigma2_[i];
    const auto w = weight_logs(p, phi_mu_, psi_mu_);
    h_[i] = safe_exp(w.h);
    H_[i] = safe_exp(w.H);
    g_[i] = safe_exp(w.g);
  }
}

void InvariantLaw::require_phi_finite() const {
  if (!phi_finite_)
    throw TailDivergence("Phi(x) is infinite: the integrand of Phi does not decay at the truncation bounds");
}

json InvariantLaw::to_json() const {
  return {{"format_version", law_format_version},
          {"model", model_.to_json()},
          {"model_hash", model_.hash()},
          {"nodes", std::vector<double>(grid_.nodes().begin(), grid_.nodes().end())},
          {"u", u_},
          {"log_f", log_f_},
          {"F", F_},
          {"survival", S_},
          {"A", A_},
          {"B", B_},
          {"C", C_},
          {"P", P_},
          {"Q", Q_},
          {"log_z", log_z_},
          {"log_g", log_g_},
          {"tail_left", tail_left_},
          {"tail_right", tail_right_}};
}

InvariantLaw InvariantLaw::from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != law_format_version)
      throw VersionMismatch("law cache format " + std::to_string(j.at("format_version").get<int>()) +
                            ", expected " + std::to_string(law_format_version));
    InvariantLaw law;
    law.model_ = DiffusionModel::from_json(j.at("model"));
    if (law.model_.hash() != j.at("model_hash").get<std::string>())
      throw CorruptFile("law cache model hash does not match its model");
    law.grid_ = SpatialGrid(j.at("nodes").get<std::vector<double>>());
    law.breakpoints_ = law.model_.drift().breakpoints();
    law.u_ = j.at("u").get<std::vector<double>>();
    law.log_f_ = j.at("log_f").get<std::vector<double>>();
    law.F_ = j.at("F").get<std::vector<double>>();
    law.S_ = j.at("survival").get<std::vector<double>>();
    law.A_ = j.at("A").get<std::vector<double>>();
    law.B_ = j.at("B").get<std::vector<double>>();
    law.C_ = j.at("C").get<std::vector<double>>();
    law.P_ = j.at("P").get<std::vector<double>>();
    law.Q_ = j.at("Q").get<std::vector<double>>();
    law.log_z_ = j.at("log_z").get<double>();
    law.log_g_ = j.at("log_g").get<double>();
    law.tail_left_ = j.at("tail_left").get<double>();
    law.tail_right_ = j.at("tail_right").get<double>();
    const std::size_t n = law.grid_.size();
    for (const auto* v : {&law.u_, &law.log_f_, &law.F_, &law.S_, &law.A_, &law.B_, &law.C_, &law.P_, &law.Q_})
      if (v->size() != n) throw CorruptFile("law cache table length mismatch");
    law.f_.resize(n);
    law.sigma2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      law.f_[i] = std::exp(law.log_f_[i]);
      law.sigma2_[i] = law.model_.sigma2_at(law.grid_[i]);
    }
    law.derive();
    return law;
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("law cache: ") + e.what());
  }
}

void save_law(const InvariantLaw& law, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write law cache " + file.string());
  out << law.to_json().dump();
}

InvariantLaw load_law(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingInputs("cannot read law cache " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("law cache: ") + e.what());
  }
  return InvariantLaw::from_json(j);
}

InvariantLaw build_law(const DiffusionModel& model, const GridPolicy& policy) {
  if (policy.nodes < SpatialGrid::min_nodes) throw ConfigError("grid policy needs at least 512 nodes");
  const SpatialGrid check = default_check_grid(model);
  const auto report = evaluate_conditions(model, check);
  if (!report.g_converged) throw NormalizationFailure("G(S) quadrature does not converge; model is not ergodic");
  const InvariantLaw prelim = build_law_on_grid(model, check);
  const auto x = check.nodes();
  const std::size_t n = x.size();
  const auto F = prelim.F0();
  const auto S = prelim.survival();
  const auto ph = prelim.phi_table();
  const double phi_cut = -std::log(policy.weight_tol) * prelim.phi_mu();

  // Mass bound: crossing of log F (resp. log S) through log mass_tol.
  // Point where the tail mass F (left) or 1 - F (right) falls to mass_tol; log-linear
  // interpolation inside the check grid, log-linear extension beyond it.
  auto crossing = [&](std::span<const double> tail, bool from_left) {
    const double target = std::log(policy.mass_tol);
    const auto lt = [&](std::size_t i) { return safe_log(tail[from_left ? i : n - 1 - i]); };
    const auto xs = [&](std::size_t i) { return from_left ? x[i] : -x[n - 1 - i]; };
    double pos;
    if (lt(0) > target) {
      const double slope = (lt(1) - lt(0)) / (xs(1) - xs(0));
      pos = slope > 0.0 ? xs(0) - (lt(0) - target) / slope : xs(0);
    } else {
      std::size_t i = 0;
      while (i + 2 < n && lt(i + 1) <= target) ++i;
      const double t = lt(i) == neg_inf ? 1.0 : (target - lt(i)) / (lt(i + 1) - lt(i));
      pos = xs(i) + std::clamp(t, 0.0, 1.0) * (xs(i + 1) - xs(i));
    }
    return from_left ? pos : -pos;
  };
  double left = crossing(F, true);
  double right = crossing(S, false);
  for (std::size_t i = prelim.mu_index(); i-- > 0;)
    if (ph[i] >= phi_cut) {
      left = std::min(left, x[i]);
      break;
    }
  for (std::size_t i = prelim.mu_index(); i < n; ++i)
    if (ph[i] >= phi_cut) {
      right = std::max(right, x[i]);
      break;
    }
  return build_law_on_grid(model, SpatialGrid::uniform(left, right, policy.nodes));
}

InvariantLaw build_law_cached(const DiffusionModel& model, const GridPolicy& policy,
                              const std::filesystem::path& cache_dir) {
  const auto file = cache_dir / ("law_" + model.hash() + "_" + policy.key() + ".json");
  if (std::filesystem::exists(file)) {
    try {
      return load_law(file);
    } catch (const Error&) {
      // stale or corrupt cache entry: rebuild below
    }
  }
  auto law = build_law(model, policy);
  std::filesystem::create_directories(cache_dir);
  save_law(law, file);
  return law;
}

double median(const InvariantLaw& law) { return law.mu(); }

double phi(const InvariantLaw& law, double x) {
  law.require_phi_finite();
  return law.at(x).phi();
}

double psi(const InvariantLaw& law, double x) {
  if (x < law.mu()) throw DomainError("Psi is defined on [mu, inf)");
  law.require_phi_finite();
  return law.at(x).psi();
}

double weight_h(const InvariantLaw& law, double x) {
  if (x < law.mu()) throw DomainError("h is defined on [mu, inf)");
  law.require_phi_finite();
  return safe_exp(weight_logs(law.at(x), law.phi_mu(), law.psi_mu()).h);
}

double weight_H(const InvariantLaw& law, double x) {
  if (x < law.mu()) throw DomainError("H is defined on [mu, inf)");
  law.require_phi_finite();
  return safe_exp(weight_logs(law.at(x), law.phi_mu(), law.psi_mu()).H);
}

double weight_g(const InvariantLaw& law, double x) {
  if (x < law.mu()) throw DomainError("g is defined on [mu, inf)");
  law.require_phi_finite();
  return safe_exp(weight_logs(law.at(x), law.phi_mu(), law.psi_mu()).g);
}

double limit_covariance(const InvariantLaw& law, double x, double y) {
  law.require_phi_finite();
  const LawPoint p = law.at(std::min(x, y));
  const LawPoint q = law.at(std::max(x, y));
  return p.A - (q.C - p.C) + q.B;
}

json ConditionIntegrals::to_json() const {
  auto one = [](const ConditionIntegral& c) { return json{{"value", c.value}, {"converged", c.converged}}; };
  return {{"A1", one(a1)}, {"A2", one(a2)}, {"C9", one(c9)}, {"C10", one(c10)}};
}

ConditionIntegrals condition_integrals(const InvariantLaw& law) {
  law.require_phi_finite();
  const auto& grid = law.grid();
  const auto x = grid.nodes();
  const std::size_t n = x.size();
  const std::size_t start = law.mu_index();
  const auto f = law.f0();
  const auto lf = law.log_f0();
  const auto F = law.F0();
  const auto S = law.survival();
  const auto ph = law.phi_table();
  const auto H = law.H_table();
  const auto s2 = law.sigma2_table();
  const double phi_mu = law.phi_mu();

  // Cumulative tables P = int F/(sigma^2 f), Q = int (1-F)/(sigma^2 f) at nodes.
  std::vector<double> P(n), Q(n), A(n), B(n);
  for (std::size_t i = 0; i < n; ++i) {
    // at() at a node reproduces the tables exactly (empty partial cells).
    const LawPoint p = law.at(x[i]);
    P[i] = p.P;
    Q[i] = p.Q;
    A[i] = p.A;
    B[i] = p.B;
  }
  const double origin = std::clamp(0.0, grid.left(), grid.right());
  const LawPoint at_origin = law.at(origin);
  const LawPoint at_mu = law.at(law.mu());
  const auto w = grid.trapezoid_weights();

  // Lambda_x(t) = int_x^t (1{v > x} - F(v)) / (sigma^2 f) dv
  auto lambda = [&](std::size_t j, double Pt, double Qt, bool t_above) {
    return t_above ? (Qt - Q[j]) : -(Pt - P[j]);
  };
  // Lambda'_x(t) = int_x^t (F(y)F(x) - F(y ^ x)) / (sigma^2 f) dy
  auto lambda_edf = [&](std::size_t j, double Pt, double Qt, bool t_above) {
    return t_above ? -F[j] * (Qt - Q[j]) : -S[j] * (Pt - P[j]);
  };

  std::vector<double> ia1(n, 0.0), ia2(n, 0.0), ic9(n, 0.0), ic10(n, 0.0);
  for (std::size_t j = start; j < n; ++j) {
    const double two_f_minus_one = F[j] - S[j];
    const double log_common = safe_log(two_f_minus_one) - ph[j] / phi_mu - 2.0 * std::log(phi_mu) -
                              std::log(s2[j]) - 2.0 * lf[j];
    const double common = safe_exp(log_common);
    ia1[j] = common * ph[j];

    const double k0 = lambda(j, at_origin.P, at_origin.Q, origin >= x[j]);
    const double l0 = lambda_edf(j, at_mu.P, at_mu.Q, law.mu() >= x[j]);
    double ek2 = 0.0, el2 = 0.0;
    if (common > 0.0 || H[j] > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const bool above = i >= j;
        const double k = lambda(j, P[i], Q[i], above) - k0;
        const double l = lambda_edf(j, P[i], Q[i], above) - l0;
        ek2 += w[i] * f[i] * k * k;
        el2 += w[i] * f[i] * l * l;
      }
    }
    ia2[j] = common * ek2;
    ic9[j] = H[j] * f[j] * (S[j] * S[j] * A[j] + F[j] * F[j] * B[j]);
    ic10[j] = H[j] * f[j] * el2;
  }

  auto integrate = [&](const std::vector<double>& v) {
    ConditionIntegral out;
    const auto wt = grid.trapezoid_weights(start);
    double peak = 0.0;
    for (std::size_t i = start; i < n; ++i) {
      out.value += wt[i] * v[i];
      peak = std::max(peak, std::abs(v[i]));
    }
    if (start < n) out.value += v[start] * (x[start] - law.mu());
    out.converged = std::isfinite(out.value) && std::abs(v[n - 1]) <= 1e-12 * std::max(peak, 1e-300);
    return out;
  };
  return {integrate(ia1), integrate(ia2), integrate(ic9), integrate(ic10)};
}

DistanceNorms distance_norms(const InvariantLaw& law_a, const InvariantLaw& law_b, const DiffusionModel& model_a,
                             const DiffusionModel& model_b) {
  if (!(law_a.grid() == law_b.grid())) throw GridMismatch("distance_norms needs both laws on the same grid");
  const auto& grid = law_b.grid();
  const auto w = grid.trapezoid_weights();
  const auto fa = law_a.f0();
  const auto fb = law_b.f0();
  const auto Fa = law_a.F0();
  const auto Fb = law_b.F0();
  DistanceNorms out;
  double d = 0.0, c = 0.0, k = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    d += w[i] * fb[i] * (fa[i] - fb[i]) * (fa[i] - fb[i]);
    c += w[i] * fb[i] * (Fa[i] - Fb[i]) * (Fa[i] - Fb[i]);
    const double r = (model_a.drift_at(x) - model_b.drift_at(x)) / model_b.sigma_at(x);
    k += w[i] * fa[i] * r * r;
  }
  out.density_l2 = std::sqrt(d);
  out.cdf_l2 = std::sqrt(c);
  out.drift_kl = std::sqrt(k);
  return out;
}

}  // namespace ergogof
