#pragma once

// Core data types of the mining all-pay auction: miner cost profiles, auction
// parameters, allocation-function families, and the cost-share difficulty
// mapping p_i = f(c) * c_i / c_tot.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "allpay/errors.hpp"

namespace allpay {

// Per-attempt effort costs of the N miners. Immutable after construction;
// construction enforces N >= 2, c_i >= 0 and a strictly positive total.
class CostProfile {
 public:
  explicit CostProfile(std::vector<double> costs) : costs_(std::move(costs)) {
    if (costs_.size() < 2) {
      throw std::invalid_argument("cost profile needs at least 2 miners");
    }
    double total = 0.0;
    for (double c : costs_) {
      if (!std::isfinite(c) || c < 0.0) {
        throw std::invalid_argument("costs must be finite and nonnegative");
      }
      total += c;
    }
    if (total <= 0.0) {
      throw std::invalid_argument("total cost must be positive");
    }
    total_ = total;
  }

  int size() const { return static_cast<int>(costs_.size()); }
  double operator[](int i) const { return costs_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& costs() const { return costs_; }
  double total() const { return total_; }

  double min_cost() const { return *std::min_element(costs_.begin(), costs_.end()); }

  // Smallest strictly positive entry. Well-defined because the total is positive.
  double min_positive() const {
    double m = total_;
    for (double c : costs_) {
      if (c > 0.0 && c < m) m = c;
    }
    return m;
  }

  CostProfile with_cost(int i, double value) const {
    std::vector<double> c = costs_;
    c[static_cast<std::size_t>(i)] = value;
    return CostProfile(std::move(c));
  }

 private:
  std::vector<double> costs_;
  double total_ = 0.0;
};

// Prize value A, race horizon K (attempt count) and logit error parameter mu.
// A == 0 is admitted so the decoupled utility U_i = -K*c_i stays testable.
struct AuctionParams {
  double prize;
  int horizon;
  double mu;

  AuctionParams(double prize_, int horizon_, double mu_)
      : prize(prize_), horizon(horizon_), mu(mu_) {
    if (!std::isfinite(prize) || prize < 0.0) {
      throw std::invalid_argument("prize must be finite and nonnegative");
    }
    if (horizon < 1) {
      throw std::invalid_argument("horizon must be at least 1");
    }
    if (!std::isfinite(mu) || mu <= 0.0) {
      throw std::invalid_argument("mu must be finite and positive");
    }
  }
};

enum class AllocFamily { constant, saturating_linear, inverse_total, tabulated };

inline std::string to_string(AllocFamily f) {
  switch (f) {
    case AllocFamily::constant: return "constant";
    case AllocFamily::saturating_linear: return "saturating-linear";
    case AllocFamily::inverse_total: return "inverse-total";
    case AllocFamily::tabulated: return "tabulated";
  }
  return "?";
}

// One member of the allocation-function zoo: f(c), the solve probability per
// attempt per unit normalized cost, always kept inside [0, 1]. Every built-in
// family acts on the profile only through the cost total, so gradients are
// identical across coordinates; the per-coordinate API is kept because callers
// reason coordinate-wise.
//
//   constant           f = level                      df/dc_i = 0
//   saturating-linear  f = min(1, beta * c_tot)       df/dc_i = beta below the cap
//   inverse-total      f = alpha / (alpha + c_tot)    df/dc_i = -alpha / (alpha + c_tot)^2
//   tabulated          piecewise-linear in c_tot, clamped to [0,1], slope by
//                      central finite differences (undefined on a knot)
class AllocationSpec {
 public:
  static AllocationSpec constant(double level) {
    if (!std::isfinite(level) || level < 0.0 || level > 1.0) {
      throw std::invalid_argument("constant allocation level must lie in [0,1]");
    }
    AllocationSpec a(AllocFamily::constant);
    a.params_ = {level};
    return a;
  }

  static AllocationSpec saturating_linear(double beta) {
    if (!std::isfinite(beta) || beta < 0.0) {
      throw std::invalid_argument("saturating-linear beta must be finite and nonnegative");
    }
    AllocationSpec a(AllocFamily::saturating_linear);
    a.params_ = {beta};
    return a;
  }

  static AllocationSpec inverse_total(double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
      throw std::invalid_argument("inverse-total alpha must be finite and positive");
    }
    AllocationSpec a(AllocFamily::inverse_total);
    a.params_ = {alpha};
    return a;
  }

  static AllocationSpec tabulated(std::vector<double> knots, std::vector<double> values) {
    if (knots.size() < 2 || knots.size() != values.size()) {
      throw std::invalid_argument("tabulated allocation needs matching knots/values, length >= 2");
    }
    for (std::size_t k = 0; k < knots.size(); ++k) {
      if (!std::isfinite(knots[k]) || !std::isfinite(values[k])) {
        throw std::invalid_argument("tabulated knots/values must be finite");
      }
      if (k > 0 && knots[k] <= knots[k - 1]) {
        throw std::invalid_argument("tabulated knots must be strictly increasing");
      }
      if (knots[k] < 0.0) {
        throw std::invalid_argument("tabulated knots must be nonnegative");
      }
    }
    AllocationSpec a(AllocFamily::tabulated);
    a.knots_ = std::move(knots);
    a.values_ = std::move(values);
    return a;
  }

  AllocFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  std::string id() const { return to_string(family_); }

  // f as a function of the cost total alone.
  double value_from_total(double c_tot) const {
    switch (family_) {
      case AllocFamily::constant:
        return params_[0];
      case AllocFamily::saturating_linear:
        return std::min(1.0, params_[0] * c_tot);
      case AllocFamily::inverse_total:
        return params_[0] / (params_[0] + c_tot);
      case AllocFamily::tabulated:
        return std::clamp(interpolate(c_tot), 0.0, 1.0);
    }
    return 0.0;
  }

  double value(const CostProfile& c) const { return value_from_total(c.total()); }

  // Whether evaluating at this total hits the [0,1] clamp (tabulated only);
  // differentiability-based checks skip clamped points.
  bool clamped_from_total(double c_tot) const {
    if (family_ != AllocFamily::tabulated) return false;
    const double raw = interpolate(c_tot);
    return raw < 0.0 || raw > 1.0;
  }

  bool clamped_at(const CostProfile& c) const { return clamped_from_total(c.total()); }

  // df/dc_tot; nullopt where the slope is undefined (saturation boundary,
  // tabulated knot or clamp transition inside the difference stencil).
  std::optional<double> slope_from_total(double c_tot) const {
    switch (family_) {
      case AllocFamily::constant:
        return 0.0;
      case AllocFamily::saturating_linear: {
        const double s = params_[0] * c_tot;
        if (std::abs(s - 1.0) <= 1e-12 * std::max(1.0, std::abs(s))) return std::nullopt;
        return s < 1.0 ? params_[0] : 0.0;
      }
      case AllocFamily::inverse_total: {
        const double denom = params_[0] + c_tot;
        return -params_[0] / (denom * denom);
      }
      case AllocFamily::tabulated:
        return tabulated_slope(c_tot);
    }
    return std::nullopt;
  }

  // df/dc_i at the profile; nullopt signals non-differentiability.
  std::optional<double> grad(const CostProfile& c, int i) const {
    (void)i;  // built-in families depend on c only through the total
    return slope_from_total(c.total());
  }

 private:
  explicit AllocationSpec(AllocFamily f) : family_(f) {}

  double interpolate(double x) const {
    if (x <= knots_.front()) return values_.front();
    if (x >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
  }

  std::optional<double> tabulated_slope(double c_tot) const {
    // Central difference with a relative step; truncation/round-off tradeoff.
    const double h = std::max(1e-6 * std::abs(c_tot), 1e-9);
    const double lo = c_tot - h;
    const double hi = c_tot + h;
    // A knot inside the stencil makes the difference quotient meaningless.
    for (double knot : knots_) {
      if (knot >= lo && knot <= hi) return std::nullopt;
    }
    const double raw_lo = interpolate(lo);
    const double raw_hi = interpolate(hi);
    const auto clamp_state = [](double raw) { return raw < 0.0 ? -1 : (raw > 1.0 ? 1 : 0); };
    if (clamp_state(raw_lo) != clamp_state(raw_hi)) return std::nullopt;
    return (std::clamp(raw_hi, 0.0, 1.0) - std::clamp(raw_lo, 0.0, 1.0)) / (2.0 * h);
  }

  AllocFamily family_;
  std::vector<double> params_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

// Per-attempt success probabilities, one per miner. Produced by difficulty();
// satisfies 0 <= p_i <= f(c) and sum p_i = f(c) up to rounding.
struct DifficultyVector {
  std::vector<double> p;

  int size() const { return static_cast<int>(p.size()); }
  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
};

// The cost-share difficulty mapping: p_i = f(c) * c_i / c_tot. Degenerate
// profiles (c_tot = 0) are unconstructible as CostProfile, so the mapping is
// total here.
inline DifficultyVector difficulty(const AllocationSpec& alloc, const CostProfile& c) {
  const double f = alloc.value(c);
  const double t = c.total();
  DifficultyVector d;
  d.p.resize(static_cast<std::size_t>(c.size()));
  for (int i = 0; i < c.size(); ++i) {
    d.p[static_cast<std::size_t>(i)] = f * (c[i] / t);
  }
  return d;
}

// df/dc_i as a plain scalar; throws where the slope is undefined.
inline double alloc_grad(const AllocationSpec& alloc, const CostProfile& c, int i) {
  const auto g = alloc.grad(c, i);
  if (!g) {
    throw NonDifferentiableError("allocation not differentiable at this profile (grid kink)");
  }
  return *g;
}

struct LipschitzViolation {
  std::vector<double> costs;
  int coord;
  double value;  // scaled slope |df/dc_i| * c_tot, or the negative slope itself
};

// Outcome of scanning |df/dc_i| * c_tot and the slope sign over a grid.
// The scaled-Lipschitz property certified here is the hypothesis class of the
// impossibility scan: slope magnitude bounded by 1 / c_tot.
struct LipschitzCertificate {
  double sup_scaled_slope = 0.0;
  bool lipschitz_certified = false;  // sup over defined points <= 1
  bool monotone_certified = false;   // df/dc_i >= 0 at every defined point
  int evaluated = 0;                 // defined (point, coordinate) pairs
  int undefined = 0;                 // kink pairs, skipped
  std::vector<LipschitzViolation> lipschitz_violations;
  std::vector<LipschitzViolation> monotone_violations;
};

inline LipschitzCertificate certify_lipschitz(const AllocationSpec& alloc,
                                              const std::vector<CostProfile>& domain) {
  if (domain.empty()) {
    throw std::invalid_argument("certify_lipschitz: empty domain");
  }
  LipschitzCertificate cert;
  bool monotone = true;
  for (const CostProfile& c : domain) {
    for (int i = 0; i < c.size(); ++i) {
      const auto g = alloc.grad(c, i);
      if (!g) {
        ++cert.undefined;
        continue;
      }
      ++cert.evaluated;
      const double scaled = std::abs(*g) * c.total();
      cert.sup_scaled_slope = std::max(cert.sup_scaled_slope, scaled);
      if (scaled > 1.0) {
        cert.lipschitz_violations.push_back({c.costs(), i, scaled});
      }
      if (*g < 0.0) {
        monotone = false;
        cert.monotone_violations.push_back({c.costs(), i, *g});
      }
    }
  }
  cert.lipschitz_certified = cert.sup_scaled_slope <= 1.0;
  cert.monotone_certified = monotone;
  return cert;
}

// Axis-aligned box of cost profiles, discretized with the same point count on
// every coordinate. Grids enumerate lexicographically in the coordinates.
struct CostBox {
  int miners = 2;
  double lo = 0.25;
  double hi = 2.5;
  int points_per_dim = 5;
};

inline std::vector<CostProfile> cost_box_grid(const CostBox& box) {
  if (box.miners < 2) throw std::invalid_argument("cost box needs at least 2 miners");
  if (box.points_per_dim < 2) throw std::invalid_argument("cost box needs at least 2 points per dimension");
  if (!std::isfinite(box.lo) || !std::isfinite(box.hi) || box.lo < 0.0 || box.hi <= box.lo) {
    throw std::invalid_argument("cost box bounds must satisfy 0 <= lo < hi");
  }
  std::vector<double> axis(static_cast<std::size_t>(box.points_per_dim));
  for (int k = 0; k < box.points_per_dim; ++k) {
    axis[static_cast<std::size_t>(k)] =
        box.lo + (box.hi - box.lo) * static_cast<double>(k) / (box.points_per_dim - 1);
  }
  std::vector<CostProfile> grid;
  std::vector<int> idx(static_cast<std::size_t>(box.miners), 0);
  std::vector<double> costs(static_cast<std::size_t>(box.miners));
  while (true) {
    double total = 0.0;
    for (int i = 0; i < box.miners; ++i) {
      costs[static_cast<std::size_t>(i)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      total += costs[static_cast<std::size_t>(i)];
    }
    if (total > 0.0) grid.emplace_back(costs);
    int d = box.miners - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == box.points_per_dim) {
      idx[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return grid;
}

inline std::string describe(const CostBox& box) {
  std::ostringstream os;
  os << "cost-box N=" << box.miners << " [" << box.lo << "," << box.hi << "] x"
     << box.points_per_dim;
  return os.str();
}

// Default verification grid: two- and three-miner boxes over [0.25, 2.5].
inline std::vector<CostProfile> default_cost_grid() {
  std::vector<CostProfile> grid = cost_box_grid(CostBox{2, 0.25, 2.5, 5});
  const std::vector<CostProfile> n3 = cost_box_grid(CostBox{3, 0.25, 2.5, 4});
  grid.insert(grid.end(), n3.begin(), n3.end());
  return grid;
}

inline std::string default_cost_grid_description() {
  return "cost-box N=2 [0.25,2.5] x5 + cost-box N=3 [0.25,2.5] x4";
}

}  // namespace allpay
