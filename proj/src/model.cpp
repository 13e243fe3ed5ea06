#include "ergogof/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/crc.hpp>

#include "ergogof/quadrature.hpp"

namespace ergogof {

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string("missing numeric field '") + key + "' in " + j.dump());
  return j.at(key).get<double>();
}

}  // namespace

DriftSpec DriftSpec::ou(double a, double b) {
  DriftSpec s;
  s.family_ = Family::ou;
  s.p0_ = a;
  s.p1_ = b;
  return s;
}

DriftSpec DriftSpec::switching(double a, double b) {
  DriftSpec s;
  s.family_ = Family::switching;
  s.p0_ = a;
  s.p1_ = b;
  return s;
}

DriftSpec DriftSpec::one_sided(const DriftSpec& base, double factor, double split) {
  DriftSpec s;
  s.family_ = Family::one_sided;
  s.p0_ = factor;
  s.p1_ = split;
  s.base_ = std::make_shared<const DriftSpec>(base);
  return s;
}

DriftSpec DriftSpec::oscillating(const DriftSpec& base, double alpha, double n) {
  DriftSpec s;
  s.family_ = Family::oscillating;
  s.p0_ = alpha;
  s.p1_ = n;
  s.base_ = std::make_shared<const DriftSpec>(base);
  return s;
}

DriftSpec DriftSpec::poly_trig(std::vector<PolyTrigPiece> pieces) {
  if (pieces.empty()) throw ConfigError("poly_trig drift needs at least one piece");
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (!(pieces[i].upper > pieces[i - 1].upper)) throw ConfigError("poly_trig piece bounds must increase");
  pieces.back().upper = std::numeric_limits<double>::infinity();
  DriftSpec s;
  s.family_ = Family::poly_trig;
  s.pieces_ = std::move(pieces);
  return s;
}

double DriftSpec::value(double x, double sigma2) const {
  switch (family_) {
    case Family::ou:
      return -p0_ * (x - p1_);
    case Family::switching:
      return -p0_ * sgn(x - p1_);
    case Family::one_sided: {
      const double v = base_->value(x, sigma2);
      return x >= p1_ ? p0_ * v : v;
    }
    case Family::oscillating:
      return base_->value(x, sigma2) + p0_ * sigma2 * std::cos(p1_ * x);
    case Family::poly_trig: {
      const PolyTrigPiece* piece = &pieces_.back();
      for (const auto& p : pieces_)
        if (x < p.upper) {
          piece = &p;
          break;
        }
      double v = 0.0;
      for (auto it = piece->poly.rbegin(); it != piece->poly.rend(); ++it) v = v * x + *it;
      for (const auto& t : piece->trig) v += t.amplitude * std::cos(t.frequency * x + t.phase);
      return v;
    }
  }
  return 0.0;
}

std::vector<double> DriftSpec::breakpoints() const {
  std::vector<double> out;
  switch (family_) {
    case Family::ou:
      break;
    case Family::switching:
      out.push_back(p1_);
      break;
    case Family::one_sided:
      out = base_->breakpoints();
      out.push_back(p1_);
      break;
    case Family::oscillating:
      out = base_->breakpoints();
      break;
    case Family::poly_trig:
      for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) out.push_back(pieces_[i].upper);
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json DriftSpec::to_json() const {
  switch (family_) {
    case Family::ou:
      return {{"family", "ou"}, {"a", p0_}, {"b", p1_}};
    case Family::switching:
      return {{"family", "switching"}, {"a", p0_}, {"b", p1_}};
    case Family::one_sided:
      return {{"family", "one_sided"}, {"base", base_->to_json()}, {"factor", p0_}, {"split", p1_}};
    case Family::oscillating:
      return {{"family", "oscillating"}, {"base", base_->to_json()}, {"alpha", p0_}, {"n", p1_}};
    case Family::poly_trig: {
      json pieces = json::array();
      for (const auto& p : pieces_) {
        json trig = json::array();
        for (const auto& t : p.trig)
          trig.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
        json piece = {{"poly", p.poly}, {"trig", trig}};
        piece["upper"] = std::isfinite(p.upper) ? json(p.upper) : json(nullptr);
        pieces.push_back(piece);
      }
      return {{"family", "poly_trig"}, {"pieces", pieces}};
    }
  }
  return {};
}

DriftSpec DriftSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("drift descriptor needs a 'family'");
  const auto family = j.at("family").get<std::string>();
  if (family == "ou") return ou(require_number(j, "a"), require_number(j, "b"));
  if (family == "switching") return switching(require_number(j, "a"), require_number(j, "b"));
  if (family == "one_sided")
    return one_sided(from_json(j.at("base")), require_number(j, "factor"), require_number(j, "split"));
  if (family == "oscillating")
    return oscillating(from_json(j.at("base")), require_number(j, "alpha"), require_number(j, "n"));
  if (family == "poly_trig") {
    std::vector<PolyTrigPiece> pieces;
    for (const auto& p : j.at("pieces")) {
      PolyTrigPiece piece;
      if (p.contains("upper") && !p.at("upper").is_null()) piece.upper = p.at("upper").get<double>();
      if (p.contains("poly")) piece.poly = p.at("poly").get<std::vector<double>>();
      if (p.contains("trig"))
        for (const auto& t : p.at("trig"))
          piece.trig.push_back({require_number(t, "amplitude"), require_number(t, "frequency"),
                                t.value("phase", 0.0)});
      pieces.push_back(std::move(piece));
    }
    return poly_trig(std::move(pieces));
  }
  throw ConfigError("unknown drift family '" + family + "'");
}

DiffusionSpec DiffusionSpec::constant(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("constant diffusion needs sigma > 0");
  DiffusionSpec d;
  d.family_ = Family::constant;
  d.p0_ = sigma;
  return d;
}

DiffusionSpec DiffusionSpec::sqrt_quadratic(double c0, double c2) {
  if (!(c0 > 0.0) || !(c2 >= 0.0)) throw ConfigError("sqrt_quadratic diffusion needs c0 > 0, c2 >= 0");
  DiffusionSpec d;
  d.family_ = Family::sqrt_quadratic;
  d.p0_ = c0;
  d.p1_ = c2;
  return d;
}

double DiffusionSpec::sigma(double x) const {
  return family_ == Family::constant ? p0_ : std::sqrt(p0_ + p1_ * x * x);
}

double DiffusionSpec::dsigma(double x) const {
  return family_ == Family::constant ? 0.0 : p1_ * x / sigma(x);
}

json DiffusionSpec::to_json() const {
  if (family_ == Family::constant) return {{"family", "constant"}, {"sigma", p0_}};
  return {{"family", "sqrt_quadratic"}, {"c0", p0_}, {"c2", p1_}};
}

DiffusionSpec DiffusionSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("diffusion descriptor needs a 'family'");
  const auto family = j.at("family").get<std::string>();
  if (family == "constant") return constant(require_number(j, "sigma"));
  if (family == "sqrt_quadratic") return sqrt_quadratic(require_number(j, "c0"), require_number(j, "c2"));
  throw ConfigError("unknown diffusion family '" + family + "'");
}

std::string DiffusionModel::hash() const {
  const json canonical = {{"drift", drift_.to_json()}, {"diffusion", diffusion_.to_json()}};
  const std::string text = canonical.dump();
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

json DiffusionModel::to_json() const {
  return {{"label", label_}, {"drift", drift_.to_json()}, {"diffusion", diffusion_.to_json()}};
}

DiffusionModel DiffusionModel::from_json(const json& j) {
  if (!j.is_object() || !j.contains("drift") || !j.contains("diffusion"))
    throw ConfigError("model descriptor needs 'drift' and 'diffusion'");
  return DiffusionModel(DriftSpec::from_json(j.at("drift")), DiffusionSpec::from_json(j.at("diffusion")),
                        j.value("label", std::string{}));
}

double potential_increment(const DiffusionModel& model, double a, double b,
                           std::span<const double> breakpoints) {
  auto integrand = [&](double y) {
    const double s2 = model.sigma2_at(y);
    return model.drift().value(y, s2) / s2;
  };
  return 2.0 * quad::gl5_split(integrand, a, b, breakpoints);
}

namespace {

/// log of sigma^-2 exp{U(x)} at uniform nodes, U anchored at `anchor` (a node index).
std::vector<double> log_speed_density(const DiffusionModel& model, std::span<const double> x,
                                      std::size_t anchor, std::span<const double> bps) {
  const std::size_t n = x.size();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = anchor; i + 1 < n; ++i) u[i + 1] = u[i] + potential_increment(model, x[i], x[i + 1], bps);
  for (std::size_t i = anchor; i > 0; --i) u[i - 1] = u[i] - potential_increment(model, x[i - 1], x[i], bps);
  for (std::size_t i = 0; i < n; ++i) u[i] -= std::log(model.sigma2_at(x[i]));
  return u;
}

struct WindowStats {
  bool contained = false;
  ScaleEstimate est;
};

WindowStats scan_window(const DiffusionModel& model, double lo, double hi, std::span<const double> bps) {
  constexpr std::size_t n = 4097;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  const auto ell = log_speed_density(model, x, n / 2, bps);
  const double top = *std::max_element(ell.begin(), ell.end());
  WindowStats out;
  if (!std::isfinite(top)) return out;
  out.contained = ell.front() < top - 60.0 && ell.back() < top - 60.0;
  std::vector<double> w(n), cdf(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(ell[i] - top);
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double seg = 0.5 * dx * (w[i] + w[i + 1]);
    mass += seg;
    cdf[i + 1] = mass;
    m1 += 0.5 * dx * (w[i] * x[i] + w[i + 1] * x[i + 1]);
    m2 += 0.5 * dx * (w[i] * x[i] * x[i] + w[i + 1] * x[i + 1] * x[i + 1]);
  }
  out.est.mean = m1 / mass;
  out.est.sd = std::sqrt(std::max(m2 / mass - out.est.mean * out.est.mean, 0.0));
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), 0.5 * mass);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, n - 1);
  const double t = (0.5 * mass - cdf[k - 1]) / std::max(cdf[k] - cdf[k - 1], 1e-300);
  out.est.median = x[k - 1] + t * (x[k] - x[k - 1]);
  const double cell = (hi - lo) / (n - 1);
  out.est.sd = std::max(out.est.sd, 2.0 * cell);
  return out;
}

}  // namespace

ScaleEstimate scan_scale(const DiffusionModel& model) {
  const auto bps = model.drift().breakpoints();
  for (int k = 0; k <= 20; ++k) {
    const double r = std::ldexp(1.0, k);
    const auto first = scan_window(model, -r, r, bps);
    if (!first.contained) continue;
    // Refine around the located mass.
    const double half = 40.0 * first.est.sd;
    const auto second = scan_window(model, first.est.median - half, first.est.median + half, bps);
    return second.contained ? second.est : first.est;
  }
  throw QuadratureDivergence("invariant mass not contained in any window up to |x| = 2^20; model is not ergodic");
}

SpatialGrid default_check_grid(const DiffusionModel& model) {
  const auto est = scan_scale(model);
  return SpatialGrid::uniform(est.median - 15.0 * est.sd, est.median + 15.0 * est.sd, 4096);
}

json ConditionsReport::to_json() const {
  return {{"es_constant", es_constant}, {"es_pass", es_pass},       {"v_diverges", v_diverges},
          {"log_g", log_g},             {"g_value", g_value},       {"g_converged", g_converged},
          {"rp_pass", rp_pass},         {"all_pass", all_pass()}};
}

ConditionsReport evaluate_conditions(const DiffusionModel& model, const SpatialGrid& grid) {
  ConditionsReport rep;
  const auto x = grid.nodes();
  const std::size_t n = x.size();
  const auto bps = model.drift().breakpoints();

  // ES: smallest A over the grid, plus a growth check between the core and the edges.
  const double centre = 0.5 * (grid.left() + grid.right());
  const double half_width = 0.5 * (grid.right() - grid.left());
  double a_all = -std::numeric_limits<double>::infinity();
  double a_core = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (x[i] * model.drift_at(x[i]) + model.sigma2_at(x[i])) / (1.0 + x[i] * x[i]);
    a_all = std::max(a_all, r);
    if (std::abs(x[i] - centre) <= 0.5 * half_width) a_core = std::max(a_core, r);
  }
  const auto edge_ratio = [&](double v) { return (v * model.drift_at(v) + model.sigma2_at(v)) / (1.0 + v * v); };
  const double a_edge = std::max(edge_ratio(x.front()), edge_ratio(x.back()));
  rep.es_constant = std::max(a_all, 0.0);
  rep.es_pass = std::isfinite(a_all) && a_edge <= 2.0 * std::max(a_core, 1e-12);

  // U anchored at the node nearest zero, then shifted so that U(0) = 0 exactly.
  std::size_t anchor = grid.cell_of(0.0);
  if (anchor + 1 < n && std::abs(x[anchor + 1]) < std::abs(x[anchor])) ++anchor;
  std::vector<double> u(n, 0.0);
  for (std::size_t i = anchor; i + 1 < n; ++i) u[i + 1] = u[i] + potential_increment(model, x[i], x[i + 1], bps);
  for (std::size_t i = anchor; i > 0; --i) u[i - 1] = u[i] - potential_increment(model, x[i - 1], x[i], bps);
  double u_zero = 0.0;  // U(0) - U(x_anchor); many panels when 0 lies far outside the grid
  {
    const double from = x[anchor];
    const double cell = x[1] - x[0];
    const int panels = static_cast<int>(std::clamp(std::ceil(std::abs(from) / cell), 1.0, 65536.0));
    for (int p = 0; p < panels; ++p) {
      const double a = from * (1.0 - static_cast<double>(p) / panels);
      const double b = from * (1.0 - static_cast<double>(p + 1) / panels);
      u_zero += potential_increment(model, a, b, bps);
    }
  }
  for (auto& v : u) v -= u_zero;

  // RP (i): the integrand exp(-U) of V(S, x) must not shrink from the quartiles
  // out to the edges, so V keeps growing past the grid in both directions.
  const std::size_t q1 = n / 4, q3 = 3 * n / 4;
  rep.v_diverges = -u.front() >= -u[q1] - 1e-9 && -u.back() >= -u[q3] - 1e-9;

  // RP (ii): G(S) = int sigma^-2 exp(U); tail-ratio test plus agreement of two rules.
  std::vector<double> ell(n);
  for (std::size_t i = 0; i < n; ++i) ell[i] = u[i] - std::log(model.sigma2_at(x[i]));
  const double top = *std::max_element(ell.begin(), ell.end());
  // Exponential extrapolation of the mass beyond each edge; the integrand has to decay there.
  const double slope_l = (ell[1] - ell[0]) / (x[1] - x[0]);
  const double slope_r = (ell[n - 2] - ell[n - 1]) / (x[n - 1] - x[n - 2]);
  const bool decaying = slope_l > 0.0 && slope_r > 0.0;
  double trap = 0.0, gauss = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    trap += 0.5 * (x[i + 1] - x[i]) * (std::exp(ell[i] - top) + std::exp(ell[i + 1] - top));
    const double ui = u[i];
    const double xi = x[i];
    gauss += quad::gl5_split(
        [&](double y) {
          const double uy = ui + potential_increment(model, xi, y, bps);
          return std::exp(uy - std::log(model.sigma2_at(y)) - top);
        },
        x[i], x[i + 1], bps);
  }
  const bool rules_agree = std::abs(trap - gauss) <= 1e-3 * gauss;
  const double tail_mass = decaying ? std::exp(ell.front() - top) / slope_l + std::exp(ell.back() - top) / slope_r
                                    : std::numeric_limits<double>::infinity();
  const bool tails_small = tail_mass < 1e-6 * gauss;
  rep.g_converged = decaying && tails_small && rules_agree && std::isfinite(top) && gauss > 0.0;
  rep.log_g = top + std::log(gauss);
  rep.g_value = std::exp(rep.log_g);
  rep.rp_pass = rep.v_diverges && rep.g_converged;
  return rep;
}

ConditionsReport check_conditions(const DiffusionModel& model, const SpatialGrid& grid) {
  auto rep = evaluate_conditions(model, grid);
  if (!rep.g_converged)
    throw QuadratureDivergence("G(S) does not converge on [" + std::to_string(grid.left()) + ", " +
                               std::to_string(grid.right()) + "]; report " + rep.to_json().dump());
  return rep;
}

}  // namespace ergogof
