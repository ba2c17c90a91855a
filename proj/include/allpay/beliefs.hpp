#pragma once

// Discretized bid space and probability masses over it. The zero bid is
// always the first grid point so opting out of the race stays representable.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace allpay {

struct BidGrid {
  enum class Spacing { uniform, log };

  std::vector<double> points;
  Spacing spacing = Spacing::uniform;

  static BidGrid uniform(double c_max, int n) {
    if (!(c_max > 0.0) || !std::isfinite(c_max)) {
      throw std::invalid_argument("bid grid c_max must be finite and positive");
    }
    if (n < 16) throw std::invalid_argument("bid grid needs at least 16 points");
    BidGrid g;
    g.points.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      g.points[static_cast<std::size_t>(k)] = c_max * static_cast<double>(k) / (n - 1);
    }
    g.spacing = Spacing::uniform;
    return g;
  }

  // Zero, then n-1 geometrically spaced points from `first` up to c_max.
  static BidGrid log_spaced(double c_max, int n, double first = 0.0) {
    if (!(c_max > 0.0) || !std::isfinite(c_max)) {
      throw std::invalid_argument("bid grid c_max must be finite and positive");
    }
    if (n < 16) throw std::invalid_argument("bid grid needs at least 16 points");
    if (first <= 0.0) first = 1e-3 * c_max;
    if (first >= c_max) throw std::invalid_argument("log grid first point must be below c_max");
    BidGrid g;
    g.points.resize(static_cast<std::size_t>(n));
    g.points[0] = 0.0;
    const double ratio = std::pow(c_max / first, 1.0 / (n - 2));
    for (int k = 1; k < n; ++k) {
      g.points[static_cast<std::size_t>(k)] = first * std::pow(ratio, k - 1);
    }
    g.points.back() = c_max;
    g.spacing = Spacing::log;
    return g;
  }

  int size() const { return static_cast<int>(points.size()); }
  double operator[](int k) const { return points[static_cast<std::size_t>(k)]; }
  double c_max() const { return points.back(); }

  void validate() const {
    if (points.size() < 16) throw std::invalid_argument("bid grid needs at least 16 points");
    if (points.front() != 0.0) throw std::invalid_argument("bid grid must start at the zero bid");
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (!std::isfinite(points[k]) || points[k] <= points[k - 1]) {
        throw std::invalid_argument("bid grid points must be finite and strictly increasing");
      }
    }
  }

  // Trapezoid cell widths, used to convert point masses into density values.
  std::vector<double> cell_widths() const {
    const std::size_t n = points.size();
    std::vector<double> w(n);
    w[0] = (points[1] - points[0]) / 2.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      w[k] = (points[k + 1] - points[k - 1]) / 2.0;
    }
    w[n - 1] = (points[n - 1] - points[n - 2]) / 2.0;
    return w;
  }
};

inline std::string to_string(BidGrid::Spacing s) {
  return s == BidGrid::Spacing::uniform ? "uniform" : "log";
}

// Probability masses over one miner's bid grid.
struct BeliefDensity {
  BidGrid grid;
  std::vector<double> weights;

  static BeliefDensity uniform_on(const BidGrid& g) {
    BeliefDensity d;
    d.grid = g;
    d.weights.assign(g.points.size(), 1.0 / static_cast<double>(g.points.size()));
    return d;
  }

  static BeliefDensity point_mass(const BidGrid& g, int index) {
    if (index < 0 || index >= g.size()) throw std::invalid_argument("point mass index out of range");
    BeliefDensity d;
    d.grid = g;
    d.weights.assign(g.points.size(), 0.0);
    d.weights[static_cast<std::size_t>(index)] = 1.0;
    return d;
  }

  int size() const { return static_cast<int>(weights.size()); }

  void validate(double tol = 1e-9) const {
    if (weights.size() != grid.points.size()) {
      throw std::invalid_argument("belief weights must match the grid size");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("belief weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw std::invalid_argument("belief weights must sum to one");
    }
  }
};

}  // namespace allpay
