#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ergogof/law.hpp"
#include "ergogof/model.hpp"
#include "ergogof/rng.hpp"

namespace ergogof {

/// Uniformly discretized trajectory X_0, X_dt, ..., X_{N dt}.
struct SamplePath {
  double dt = 0.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string model_label;
  std::string model_hash;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double T() const { return dt * static_cast<double>(steps()); }
  /// Throws DomainError unless dt > 0, at least two values, all finite.
  void validate() const;
};

/// Substreams of one replication stream.
inline constexpr std::uint32_t substream_increments = 0;
inline constexpr std::uint32_t substream_init = 1;

/// Inverse of the tabulated F0 (linear between nodes, exact at mu).
double stationary_quantile(const InvariantLaw& law, double u);
double sample_stationary_init(const InvariantLaw& law, RngStream& stream);

/// n standard normal increments of (seed, stream).
std::vector<double> standard_normals(std::uint64_t seed, std::uint64_t stream, std::size_t n);
/// Pairwise merge (Z_{2k} + Z_{2k+1}) / sqrt(2): the increments of the same
/// Brownian path on the doubled time step.
std::vector<double> coarsen_normals(std::span<const double> normals);

/// Euler-Maruyama from x0 driven by the given standard normals. Throws
/// BlowupError when |X| exceeds blowup_bound (pass +inf to disable).
std::vector<double> euler_maruyama(const DiffusionModel& model, double x0, double dt,
                                   std::span<const double> normals, double blowup_bound);

/// Checks the step-size preconditions of simulate_path (DomainError).
void check_step(const DiffusionModel& model, double T, double dt);

/// Stationary Euler-Maruyama path on [0, T]. Deterministic given its arguments.
SamplePath simulate_path(const DiffusionModel& model, const InvariantLaw& law, double T, double dt,
                         std::uint64_t seed, std::uint64_t stream);

/// Binary dump: one JSON header line, then the values as little-endian doubles.
void save_path(const SamplePath& path, const std::filesystem::path& file);
SamplePath load_path(const std::filesystem::path& file);

}  // namespace ergogof
