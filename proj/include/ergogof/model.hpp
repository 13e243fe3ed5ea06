#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergogof/grid.hpp"

namespace ergogof {

using json = nlohmann::json;

struct TrigTerm {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
};

/// One piece of a piecewise polynomial-plus-cosines drift, valid for x < upper.
struct PolyTrigPiece {
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> poly;  // c0 + c1 x + c2 x^2 + ...
  std::vector<TrigTerm> trig;
};

/// Declarative trend coefficient S(x). Only the listed families exist so that
/// every model round-trips through a config file.
class DriftSpec {
 public:
  enum class Family { ou, switching, one_sided, oscillating, poly_trig };

  /// S(x) = -a (x - b)
  static DriftSpec ou(double a, double b);
  /// S(x) = -a sgn(x - b)
  static DriftSpec switching(double a, double b);
  /// S(x) = base(x) for x < split, factor * base(x) for x >= split
  static DriftSpec one_sided(const DriftSpec& base, double factor, double split);
  /// S(x) = base(x) + alpha sigma(x)^2 cos(n x)
  static DriftSpec oscillating(const DriftSpec& base, double alpha, double n);
  static DriftSpec poly_trig(std::vector<PolyTrigPiece> pieces);

  Family family() const { return family_; }
  double value(double x, double sigma2) const;
  /// Points where S may be discontinuous or kinked, sorted.
  std::vector<double> breakpoints() const;

  double a() const { return p0_; }
  double b() const { return p1_; }
  const DriftSpec* base() const { return base_.get(); }

  json to_json() const;
  static DriftSpec from_json(const json& j);

 private:
  Family family_ = Family::ou;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0;
  std::shared_ptr<const DriftSpec> base_;
  std::vector<PolyTrigPiece> pieces_;
};

/// Diffusion coefficient sigma(x) > 0 together with its derivative.
class DiffusionSpec {
 public:
  enum class Family { constant, sqrt_quadratic };

  static DiffusionSpec constant(double sigma);
  /// sigma(x)^2 = c0 + c2 x^2 with c0 > 0, c2 >= 0
  static DiffusionSpec sqrt_quadratic(double c0, double c2);

  Family family() const { return family_; }
  double sigma2(double x) const { return family_ == Family::constant ? p0_ * p0_ : p0_ + p1_ * x * x; }
  double sigma(double x) const;
  double dsigma(double x) const;

  json to_json() const;
  static DiffusionSpec from_json(const json& j);

 private:
  Family family_ = Family::constant;
  double p0_ = 1.0, p1_ = 0.0;
};

class DiffusionModel {
 public:
  DiffusionModel() = default;
  DiffusionModel(DriftSpec drift, DiffusionSpec diffusion, std::string label = {})
      : drift_(std::move(drift)), diffusion_(std::move(diffusion)), label_(std::move(label)) {}

  const DriftSpec& drift() const { return drift_; }
  const DiffusionSpec& diffusion() const { return diffusion_; }
  const std::string& label() const { return label_; }

  double drift_at(double x) const { return drift_.value(x, diffusion_.sigma2(x)); }
  double sigma_at(double x) const { return diffusion_.sigma(x); }
  double sigma2_at(double x) const { return diffusion_.sigma2(x); }

  /// Stable content hash (hex CRC-32 of the canonical JSON, label excluded).
  std::string hash() const;

  json to_json() const;
  static DiffusionModel from_json(const json& j);

 private:
  DriftSpec drift_;
  DiffusionSpec diffusion_;
  std::string label_;
};

inline double eval_drift(const DiffusionModel& model, double x) { return model.drift_at(x); }

/// Location/scale of the invariant law found by an expanding-window scan.
struct ScaleEstimate {
  double median = 0.0;
  double mean = 0.0;
  double sd = 1.0;
};

/// Throws QuadratureDivergence when no window up to |x| = 2^20 contains the mass.
ScaleEstimate scan_scale(const DiffusionModel& model);

/// Check grid [median - 15 sd, median + 15 sd] with 4096 nodes.
SpatialGrid default_check_grid(const DiffusionModel& model);

struct ConditionsReport {
  double es_constant = 0.0;  // smallest A with x S + sigma^2 <= A (1 + x^2) on the grid
  bool es_pass = false;
  bool v_diverges = false;  // V(S, x) -> +-infinity evidence
  double log_g = 0.0;       // log G(S)
  double g_value = 0.0;     // G(S), may be inf when log_g is large
  bool g_converged = false;
  bool rp_pass = false;
  bool all_pass() const { return es_pass && rp_pass; }
  json to_json() const;
};

/// Numerical ES/RP checks. Throws QuadratureDivergence (message carries the
/// report) when G(S) does not converge on the grid.
ConditionsReport check_conditions(const DiffusionModel& model, const SpatialGrid& grid);
/// Same checks, never throws on divergence.
ConditionsReport evaluate_conditions(const DiffusionModel& model, const SpatialGrid& grid);

/// 2 * integral_a^b S(y)/sigma(y)^2 dy, split at drift breakpoints.
double potential_increment(const DiffusionModel& model, double a, double b,
                           std::span<const double> breakpoints);

}  // namespace ergogof
