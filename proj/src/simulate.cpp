#include "ergogof/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <boost/random/normal_distribution.hpp>

namespace ergogof {

static_assert(std::endian::native == std::endian::little, "path dumps assume a little-endian host");

namespace {

constexpr int path_format_version = 1;

/// Switching-type families are discontinuous at b and need a small step.
const DriftSpec* switching_part(const DriftSpec& d) {
  if (d.family() == DriftSpec::Family::switching) return &d;
  return d.base() ? switching_part(*d.base()) : nullptr;
}

}  // namespace

void SamplePath::validate() const {
  if (!(dt > 0.0)) throw DomainError("sample path needs dt > 0");
  if (values.size() < 2) throw DomainError("sample path needs at least two values");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("sample path contains a non-finite value");
}

double stationary_quantile(const InvariantLaw& law, double u) {
  const auto F = law.F0();
  const auto x = law.grid().nodes();
  const std::size_t n = x.size();
  if (u == 0.5) return law.mu();
  if (u <= F[0]) return x[0];
  if (u >= F[n - 1]) return x[n - 1];
  std::size_t k = static_cast<std::size_t>(std::upper_bound(F.begin(), F.end(), u) - F.begin());
  double x_lo = x[k - 1], F_lo = F[k - 1], x_hi = x[k], F_hi = F[k];
  // the (1/2, mu) knot
  if (x_lo < law.mu() && law.mu() < x_hi) {
    if (u < 0.5) {
      x_hi = law.mu();
      F_hi = 0.5;
    } else {
      x_lo = law.mu();
      F_lo = 0.5;
    }
  }
  if (!(F_hi > F_lo)) return x_lo;
  return x_lo + (u - F_lo) / (F_hi - F_lo) * (x_hi - x_lo);
}

double sample_stationary_init(const InvariantLaw& law, RngStream& stream) {
  return stationary_quantile(law, stream.uniform());
}

std::vector<double> standard_normals(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
  RngStream rng(seed, stream, substream_increments);
  boost::random::normal_distribution<double> normal;
  std::vector<double> z(n);
  for (auto& v : z) v = normal(rng);
  return z;
}

std::vector<double> coarsen_normals(std::span<const double> normals) {
  std::vector<double> out(normals.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (normals[2 * k] + normals[2 * k + 1]) / std::sqrt(2.0);
  return out;
}

std::vector<double> euler_maruyama(const DiffusionModel& model, double x0, double dt,
                                   std::span<const double> normals, double blowup_bound) {
  std::vector<double> x(normals.size() + 1);
  x[0] = x0;
  const double sdt = std::sqrt(dt);
  for (std::size_t k = 0; k < normals.size(); ++k) {
    const double xk = x[k];
    const double next = xk + model.drift_at(xk) * dt + model.sigma_at(xk) * sdt * normals[k];
    if (!(std::abs(next) <= blowup_bound))
      throw BlowupError("|X| exceeded " + std::to_string(blowup_bound) + " at step " + std::to_string(k + 1) +
                        " (dt = " + std::to_string(dt) + ")");
    x[k + 1] = next;
  }
  return x;
}

void check_step(const DiffusionModel& model, double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw DomainError("T and dt must be positive");
  if (T < 100.0 * dt * (1.0 - 1e-12)) throw DomainError("T must be at least 100 dt");
  if (const DriftSpec* sw = switching_part(model.drift())) {
    const double limit = 0.01 * model.sigma2_at(sw->b()) / (sw->a() * sw->a());
    if (dt > limit * (1.0 + 1e-12))
      throw DomainError("switching drift needs dt <= 0.01 (sigma/a)^2 = " + std::to_string(limit));
  }
}

SamplePath simulate_path(const DiffusionModel& model, const InvariantLaw& law, double T, double dt,
                         std::uint64_t seed, std::uint64_t stream) {
  check_step(model, T, dt);
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  RngStream init(seed, stream, substream_init);
  const double x0 = sample_stationary_init(law, init);
  const auto z = standard_normals(seed, stream, steps);
  const double bound = 10.0 * std::max(std::abs(law.grid().left()), std::abs(law.grid().right()));
  SamplePath path;
  path.dt = dt;
  path.values = euler_maruyama(model, x0, dt, z, bound);
  path.seed = seed;
  path.stream = stream;
  path.model_label = model.label();
  path.model_hash = model.hash();
  return path;
}

void save_path(const SamplePath& path, const std::filesystem::path& file) {
  path.validate();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write path file " + file.string());
  const json header = {{"format", "ergogof-path"},   {"version", path_format_version},
                       {"dt", path.dt},              {"T", path.T()},
                       {"n", path.values.size()},    {"seed", path.seed},
                       {"stream", path.stream},      {"model_label", path.model_label},
                       {"model_hash", path.model_hash}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(path.values.data()),
            static_cast<std::streamsize>(path.values.size() * sizeof(double)));
  if (!out) throw ConfigError("failed writing path file " + file.string());
}

SamplePath load_path(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingInputs("cannot read path file " + file.string());
  std::string line;
  std::getline(in, line);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw CorruptFile("path header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "ergogof-path") throw CorruptFile("not a path dump: " + file.string());
  if (header.value("version", 0) != path_format_version)
    throw VersionMismatch("path dump version " + std::to_string(header.value("version", 0)) + ", expected " +
                          std::to_string(path_format_version));
  SamplePath path;
  try {
    path.dt = header.at("dt").get<double>();
    path.seed = header.at("seed").get<std::uint64_t>();
    path.stream = header.at("stream").get<std::uint64_t>();
    path.model_label = header.at("model_label").get<std::string>();
    path.model_hash = header.at("model_hash").get<std::string>();
    path.values.resize(header.at("n").get<std::size_t>());
  } catch (const json::exception& e) {
    throw CorruptFile("path header: " + std::string(e.what()));
  }
  in.read(reinterpret_cast<char*>(path.values.data()),
          static_cast<std::streamsize>(path.values.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(path.values.size() * sizeof(double)))
    throw CorruptFile("path dump truncated: " + file.string());
  path.validate();
  return path;
}

}  // namespace ergogof
