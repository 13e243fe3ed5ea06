#include "ergogof/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <boost/crc.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "ergogof/parallel.hpp"
#include "ergogof/rng.hpp"

namespace ergogof {

namespace {

constexpr std::uint32_t substream_normals = 0;
constexpr std::uint32_t substream_bridge = 1;
constexpr std::uint32_t substream_bootstrap = 2;
constexpr std::size_t chunk = 256;

struct Draw {
  double integral = 0.0;
  double sup = 0.0;
};

/// Largest |w| on a Brownian bridge from a to b over a step of variance dv.
double bridge_abs_max(double a, double b, double dv, RngStream& u) {
  const double d = b - a;
  const double hi = 0.5 * (a + b + std::sqrt(d * d - 2.0 * dv * std::log(u.uniform())));
  const double lo = 0.5 * (a + b - std::sqrt(d * d - 2.0 * dv * std::log(u.uniform())));
  return std::max(hi, -lo);
}

Draw draw_exp(std::uint64_t seed, std::uint64_t index, double dt, double truncation) {
  RngStream z(seed, index, substream_normals);
  RngStream u(seed, index, substream_bridge);
  boost::random::normal_distribution<double> normal;
  const auto steps = static_cast<std::size_t>(std::llround((truncation - 1.0) / dt));
  const double sdt = std::sqrt(dt);
  const double decay = std::exp(-dt);
  const double half_decay = std::exp(-0.5 * dt);
  double w = normal(z);  // w(1) ~ N(0, 1)
  double e = std::exp(-1.0);
  double prev = w * w * e;
  Draw d;
  d.sup = std::abs(w) * e;
  for (std::size_t k = 0; k < steps; ++k) {
    const double w1 = w + sdt * normal(z);
    const double e1 = e * decay;
    const double cur = w1 * w1 * e1;
    d.integral += 0.5 * (prev + cur) * dt;
    prev = cur;
    if ((std::max(std::abs(w), std::abs(w1)) + 6.0 * sdt) * e > d.sup)
      d.sup = std::max(d.sup, bridge_abs_max(w, w1, dt, u) * e * half_decay);
    d.sup = std::max(d.sup, std::abs(w1) * e1);
    w = w1;
    e = e1;
  }
  return d;
}

Draw draw_unit(std::uint64_t seed, std::uint64_t index, double dt) {
  RngStream z(seed, index, substream_normals);
  RngStream u(seed, index, substream_bridge);
  boost::random::normal_distribution<double> normal;
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / dt));
  const double h = 1.0 / static_cast<double>(steps);
  const double sdt = std::sqrt(h);
  double w = 0.0, prev = 0.0;
  Draw d;
  for (std::size_t k = 0; k < steps; ++k) {
    const double w1 = w + sdt * normal(z);
    const double cur = w1 * w1;
    d.integral += 0.5 * (prev + cur) * h;
    prev = cur;
    if (std::max(std::abs(w), std::abs(w1)) + 6.0 * sdt > d.sup) d.sup = std::max(d.sup, bridge_abs_max(w, w1, h, u));
    d.sup = std::max(d.sup, std::abs(w1));
    w = w1;
  }
  return d;
}

void check_params(const LimitParams& p, bool exp_weighted) {
  if (!(p.time_step > 0.0) || p.time_step > 1e-3) throw ConfigError("time_step must lie in (0, 1e-3]");
  if (exp_weighted && !(p.truncation_v >= 30.0)) throw ConfigError("truncation_v must be at least 30");
}

template <class DrawFn>
JointSamples run_draws(std::size_t n, unsigned threads, DrawFn&& draw) {
  JointSamples out;
  out.integral.resize(n);
  out.sup.resize(n);
  const std::size_t blocks = (n + chunk - 1) / chunk;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * chunk);
    for (std::size_t i = b * chunk; i < end; ++i) {
      const Draw d = draw(i);
      out.integral[i] = d.integral;
      out.sup[i] = d.sup;
    }
  });
  return out;
}

std::string level_key(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", eps);
  return buf;
}

std::uint32_t crc_of(const std::string& text) {
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  return crc.checksum();
}

}  // namespace

std::string functional_name(FunctionalId id) {
  switch (id) {
    case FunctionalId::int_exp:
      return "int_exp";
    case FunctionalId::sup_exp:
      return "sup_exp";
    case FunctionalId::int_01:
      return "int_01";
    case FunctionalId::sup_01:
      return "sup_01";
  }
  return "?";
}

FunctionalId functional_from_name(const std::string& name) {
  for (auto id : {FunctionalId::int_exp, FunctionalId::sup_exp, FunctionalId::int_01, FunctionalId::sup_01})
    if (functional_name(id) == name) return id;
  throw ConfigError("unknown functional '" + name + "' (expected int_exp, sup_exp, int_01 or sup_01)");
}

JointSamples sample_limit_pair(bool exp_weighted, const LimitParams& p) {
  check_params(p, exp_weighted);
  if (exp_weighted)
    return run_draws(p.n_paths, p.threads, [&](std::size_t i) { return draw_exp(p.seed, i, p.time_step, p.truncation_v); });
  return run_draws(p.n_paths, p.threads, [&](std::size_t i) { return draw_unit(p.seed, i, p.time_step); });
}

std::vector<double> sample_limit(FunctionalId id, const LimitParams& params) {
  const bool exp_weighted = id == FunctionalId::int_exp || id == FunctionalId::sup_exp;
  auto pair = sample_limit_pair(exp_weighted, params);
  const bool integral = id == FunctionalId::int_exp || id == FunctionalId::int_01;
  return integral ? std::move(pair.integral) : std::move(pair.sup);
}

double CriticalValueTable::critical_value(double epsilon) const {
  for (const auto& [eps, value] : quantiles)
    if (std::abs(eps - epsilon) <= 1e-12) return value;
  throw LevelNotTabulated("level " + level_key(epsilon) + " is not in the " + functional_name(functional_id) +
                          " table");
}

json CriticalValueTable::to_json() const {
  json q = json::object(), se = json::object();
  for (const auto& [eps, v] : quantiles) q[level_key(eps)] = v;
  for (const auto& [eps, v] : standard_errors) se[level_key(eps)] = v;
  return {{"functional_id", functional_name(functional_id)},
          {"quantiles", q},
          {"standard_errors", se},
          {"n_paths", n_paths},
          {"time_step", time_step},
          {"truncation_v", truncation_v},
          {"master_seed", master_seed},
          {"generator_version", generator_version}};
}

CriticalValueTable CriticalValueTable::from_json(const json& j) {
  try {
    CriticalValueTable t;
    t.functional_id = functional_from_name(j.at("functional_id").get<std::string>());
    for (const auto& [k, v] : j.at("quantiles").items()) t.quantiles[std::stod(k)] = v.get<double>();
    if (j.contains("standard_errors"))
      for (const auto& [k, v] : j.at("standard_errors").items()) t.standard_errors[std::stod(k)] = v.get<double>();
    t.n_paths = j.at("n_paths").get<std::size_t>();
    t.time_step = j.at("time_step").get<double>();
    t.truncation_v = j.at("truncation_v").get<double>();
    t.master_seed = j.at("master_seed").get<std::uint64_t>();
    t.generator_version = j.at("generator_version").get<int>();
    return t;
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("critical value table: ") + e.what());
  }
}

double upper_quantile(std::span<const double> sorted, double epsilon) {
  if (sorted.empty()) throw InsufficientSamples("no samples");
  const double h = (1.0 - epsilon) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CriticalValueTable quantile_table(std::span<const double> samples, std::span<const double> levels, FunctionalId id,
                                  const LimitParams& params, std::size_t min_samples, int bootstrap_reps) {
  if (samples.size() < min_samples)
    throw InsufficientSamples(std::to_string(samples.size()) + " samples, at least " + std::to_string(min_samples) +
                              " needed");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  CriticalValueTable t;
  t.functional_id = id;
  t.n_paths = samples.size();
  t.time_step = params.time_step;
  t.truncation_v = (id == FunctionalId::int_exp || id == FunctionalId::sup_exp) ? params.truncation_v : 1.0;
  t.master_seed = params.seed;
  for (double eps : levels) t.quantiles[eps] = upper_quantile(sorted, eps);

  // Bootstrap: resample, select the order statistics, record the spread.
  std::vector<std::vector<double>> boot(levels.size());
  RngStream rng(params.seed, 0, substream_bootstrap);
  boost::random::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> resample(samples.size());
  for (int r = 0; r < bootstrap_reps; ++r) {
    for (auto& v : resample) v = sorted[pick(rng)];
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double h = (1.0 - levels[l]) * static_cast<double>(resample.size() - 1);
      const auto k = static_cast<std::size_t>(std::floor(h));
      std::nth_element(resample.begin(), resample.begin() + static_cast<std::ptrdiff_t>(k), resample.end());
      const double a = resample[k];
      const double b = k + 1 < resample.size()
                           ? *std::min_element(resample.begin() + static_cast<std::ptrdiff_t>(k) + 1, resample.end())
                           : a;
      boot[l].push_back(a + (h - static_cast<double>(k)) * (b - a));
    }
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double m = 0.0, s = 0.0;
    for (double v : boot[l]) m += v;
    m /= static_cast<double>(boot[l].size());
    for (double v : boot[l]) s += (v - m) * (v - m);
    t.standard_errors[levels[l]] = std::sqrt(s / static_cast<double>(std::max<std::size_t>(boot[l].size() - 1, 1)));
  }
  return t;
}

std::string table_filename(FunctionalId id) {
  return functional_name(id) + "_v" + std::to_string(generator_version) + ".json";
}

std::string samples_filename(FunctionalId id) {
  return functional_name(id) + "_v" + std::to_string(generator_version) + ".samples.bin";
}

void save_table(const CriticalValueTable& table, const std::filesystem::path& file) {
  json j = table.to_json();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc_of(j.dump())));
  j["checksum"] = buf;
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write table " + file.string());
  out << j.dump(2) << '\n';
}

CriticalValueTable load_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingInputs("cannot read table " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorruptFile(file.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("checksum") || !j.at("checksum").is_string())
    throw CorruptFile(file.string() + ": missing checksum");
  const auto stored = j.at("checksum").get<std::string>();
  j.erase("checksum");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc_of(j.dump())));
  if (stored != buf) throw CorruptFile(file.string() + ": checksum mismatch (stored " + stored + ", computed " + buf + ")");
  auto t = CriticalValueTable::from_json(j);
  if (t.generator_version != generator_version)
    throw VersionMismatch(file.string() + " was written by generator version " +
                          std::to_string(t.generator_version) + ", this build is version " +
                          std::to_string(generator_version) + "; rerun calibrate");
  return t;
}

void save_samples(std::span<const double> samples, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write samples " + file.string());
  out << json{{"format", "ergogof-samples"}, {"n", samples.size()}}.dump() << '\n';
  out.write(reinterpret_cast<const char*>(samples.data()), static_cast<std::streamsize>(samples.size_bytes()));
}

std::vector<double> load_samples(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingInputs("cannot read samples " + file.string());
  std::string line;
  std::getline(in, line);
  std::size_t n = 0;
  try {
    const auto header = json::parse(line);
    if (header.value("format", "") != "ergogof-samples") throw CorruptFile(file.string() + ": not a samples file");
    n = header.at("n").get<std::size_t>();
  } catch (const json::exception& e) {
    throw CorruptFile(file.string() + ": " + e.what());
  }
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double))) throw CorruptFile(file.string() + ": truncated");
  return v;
}

std::map<FunctionalId, CriticalValueTable> calibrate_all(const LimitParams& params, const std::filesystem::path& dir,
                                                         std::size_t min_samples) {
  if (params.n_paths < min_samples)
    throw InsufficientSamples(std::to_string(params.n_paths) + " paths requested, at least " +
                              std::to_string(min_samples) + " needed");
  std::filesystem::create_directories(dir);
  std::map<FunctionalId, CriticalValueTable> out;
  for (bool exp_weighted : {true, false}) {
    const auto pair = sample_limit_pair(exp_weighted, params);
    const auto ids = exp_weighted ? std::pair{FunctionalId::int_exp, FunctionalId::sup_exp}
                                  : std::pair{FunctionalId::int_01, FunctionalId::sup_01};
    for (const auto& [id, samples] : {std::pair{ids.first, &pair.integral}, std::pair{ids.second, &pair.sup}}) {
      auto t = quantile_table(*samples, default_levels(), id, params, min_samples);
      save_samples(*samples, dir / samples_filename(id));
      save_table(t, dir / table_filename(id));
      out.emplace(id, std::move(t));
    }
  }
  return out;
}

namespace {

/// Weight c_i and clock t_i at nodes >= mu, starting with the point mu itself.
struct Clock {
  std::vector<double> x, t, c;
};

Clock make_clock(const InvariantLaw& law, std::span<const double> clock, double clock_mu,
                 const std::vector<double>& weight) {
  law.require_phi_finite();
  Clock k;
  k.x.push_back(law.mu());
  k.t.push_back(clock_mu);
  k.c.push_back(0.0);
  const auto nodes = law.grid().nodes();
  std::size_t last = law.mu_index();
  for (std::size_t i = law.mu_index(); i < nodes.size(); ++i)
    if (weight[i] > 0.0) last = i;
  for (std::size_t i = law.mu_index(); i <= last && i < nodes.size(); ++i) {
    if (nodes[i] <= law.mu()) continue;
    k.x.push_back(nodes[i]);
    k.t.push_back(std::max(clock[i], k.t.back()));
    k.c.push_back(weight[i]);
  }
  return k;
}

std::vector<double> sample_clock(const Clock& k, bool sup, std::size_t n, std::uint64_t seed, unsigned threads) {
  std::vector<double> out(n);
  const std::size_t blocks = (n + chunk - 1) / chunk;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * chunk);
    for (std::size_t s = b * chunk; s < end; ++s) {
      RngStream z(seed, s, substream_normals);
      RngStream u(seed, s, substream_bridge);
      boost::random::normal_distribution<double> normal;
      double W = std::sqrt(k.t[0]) * normal(z);
      double value = 0.0;
      double prev = k.c[0] * W * W;
      for (std::size_t i = 1; i < k.x.size(); ++i) {
        const double dv = k.t[i] - k.t[i - 1];
        const double W1 = W + std::sqrt(dv) * normal(z);
        if (sup) {
          const double cmax = std::max(k.c[i - 1], k.c[i]);
          if ((std::max(std::abs(W), std::abs(W1)) + 6.0 * std::sqrt(dv)) * cmax > value && dv > 0.0)
            value = std::max(value, bridge_abs_max(W, W1, dv, u) * std::sqrt(k.c[i - 1] * k.c[i]));
          value = std::max(value, k.c[i] * std::abs(W1));
        } else {
          const double cur = k.c[i] * W1 * W1;
          value += 0.5 * (prev + cur) * (k.x[i] - k.x[i - 1]);
          prev = cur;
        }
        W = W1;
      }
      out[s] = value;
    }
  });
  return out;
}

}  // namespace

std::vector<double> sample_reduction_h(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads) {
  const auto h = law.h_table();
  const auto f = law.f0();
  std::vector<double> c(h.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 4.0 * h[i] * f[i] * f[i] * f[i];
  return sample_clock(make_clock(law, law.phi_table(), law.phi_mu(), c), false, n, seed, threads);
}

std::vector<double> sample_reduction_H(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads) {
  const auto H = law.H_table();
  const auto f = law.f0();
  const auto S = law.survival();
  std::vector<double> c(H.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 4.0 * H[i] * f[i] * S[i] * S[i];
  return sample_clock(make_clock(law, law.psi_table(), law.psi_mu(), c), false, n, seed, threads);
}

std::vector<double> sample_reduction_g(const InvariantLaw& law, std::size_t n, std::uint64_t seed, unsigned threads) {
  const auto g = law.g_table();
  const auto f = law.f0();
  std::vector<double> c(g.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * g[i] * f[i];
  // g is positive up to mu; the weight at mu itself is exp(-1) / sqrt(Phi(mu))
  auto clock = make_clock(law, law.phi_table(), law.phi_mu(), c);
  clock.c[0] = std::exp(-1.0) / std::sqrt(law.phi_mu());
  return sample_clock(clock, true, n, seed, threads);
}

double two_sample_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace ergogof
