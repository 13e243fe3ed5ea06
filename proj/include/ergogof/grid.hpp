#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "ergogof/errors.hpp"

namespace ergogof {

/// Strictly increasing spatial nodes; the first and last node are the
/// truncation bounds of every spatial integral.
class SpatialGrid {
 public:
  static constexpr std::size_t min_nodes = 512;

  SpatialGrid() = default;
  explicit SpatialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < min_nodes) throw DomainError("spatial grid needs at least 512 nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("spatial grid nodes must be strictly increasing");
  }

  static SpatialGrid uniform(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + step * static_cast<double>(i);
    x.back() = hi;
    return SpatialGrid(std::move(x));
  }

  std::span<const double> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double left() const { return nodes_.front(); }
  double right() const { return nodes_.back(); }

  /// Index of the first node >= x (size() if none).
  std::size_t first_at_or_above(double x) const {
    return static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
  }
  /// Number of nodes strictly below x.
  std::size_t count_below(double x) const { return first_at_or_above(x); }
  /// Number of nodes <= x.
  std::size_t count_at_or_below(double x) const {
    return static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
  }
  /// Cell index i with nodes[i] <= x < nodes[i+1], clamped to [0, size()-2].
  std::size_t cell_of(double x) const {
    const std::size_t k = count_at_or_below(x);
    if (k == 0) return 0;
    return std::min(k - 1, nodes_.size() - 2);
  }

  /// Trapezoid weights restricted to nodes with index >= from.
  std::vector<double> trapezoid_weights(std::size_t from = 0) const {
    std::vector<double> w(nodes_.size(), 0.0);
    for (std::size_t i = from; i + 1 < nodes_.size(); ++i) {
      const double half = 0.5 * (nodes_[i + 1] - nodes_[i]);
      w[i] += half;
      w[i + 1] += half;
    }
    return w;
  }

  /// Linear interpolation of tabulated values, constant beyond the ends.
  double interpolate(std::span<const double> values, double x) const {
    if (x <= nodes_.front()) return values.front();
    if (x >= nodes_.back()) return values.back();
    const std::size_t i = cell_of(x);
    const double t = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    return values[i] + t * (values[i + 1] - values[i]);
  }

  bool operator==(const SpatialGrid& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
};

}  // namespace ergogof
