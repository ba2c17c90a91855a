#pragma once

// Numerical verification of the model's claimed inequalities over parameter
// grids: the discouragement bound dq_i/dc_i <= K/A, the difficulty-derivative
// bounds, the log-derivative bound chain, and the quadratic feasibility scan.
// Every analytic derivative here is cross-checkable against central finite
// differences; singular points receive an explicit undefined verdict.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "allpay/errors.hpp"
#include "allpay/model.hpp"
#include "allpay/qre.hpp"
#include "allpay/race.hpp"

namespace allpay {

enum class Verdict { holds, fails, undefined, hypothesis_not_met };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::undefined: return "undefined";
    case Verdict::hypothesis_not_met: return "hypothesis-not-met";
  }
  return "?";
}

struct PointVerdict {
  std::vector<double> coords;  // cost profile, or {bid} for bid-grid conditions
  int miner_i = -1;
  int miner_j = -1;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::undefined;
  std::vector<std::pair<std::string, double>> extra;
};

struct ConditionSummary {
  long long holds = 0;
  long long fails = 0;
  long long undefined = 0;
  long long hypothesis_not_met = 0;
  long long defined = 0;  // holds + fails
  double fraction_holding = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

struct ConditionReport {
  std::string condition_id;
  std::string grid_description;
  std::vector<PointVerdict> points;
  ConditionSummary summary;
};

namespace detail {

inline void finalize_summary(ConditionReport& report) {
  ConditionSummary s;
  for (const PointVerdict& p : report.points) {
    switch (p.verdict) {
      case Verdict::holds: ++s.holds; break;
      case Verdict::fails: ++s.fails; break;
      case Verdict::undefined: ++s.undefined; break;
      case Verdict::hypothesis_not_met: ++s.hypothesis_not_met; break;
    }
    if ((p.verdict == Verdict::holds || p.verdict == Verdict::fails) && std::isfinite(p.margin)) {
      s.worst_margin = std::min(s.worst_margin, p.margin);
    }
  }
  s.defined = s.holds + s.fails;
  s.fraction_holding = s.defined > 0 ? static_cast<double>(s.holds) / static_cast<double>(s.defined) : 0.0;
  if (s.defined == 0) s.worst_margin = std::numeric_limits<double>::quiet_NaN();
  report.summary = s;
}

inline double fd_step(double x) { return std::max(1e-6 * std::abs(x), 1e-9); }

}  // namespace detail

// dp_i/dc_i = f' * c_i/t + f * (t - c_i)/t^2, with f' = df/dc_i.
inline std::optional<double> partial_p_own(const AllocationSpec& alloc, const CostProfile& c, int i) {
  const auto fp = alloc.grad(c, i);
  if (!fp) return std::nullopt;
  const double t = c.total();
  const double f = alloc.value(c);
  return *fp * (c[i] / t) + f * (t - c[i]) / (t * t);
}

// dp_j/dc_i = f' * c_j/t - f * c_j/t^2, i != j.
inline std::optional<double> partial_p_cross(const AllocationSpec& alloc, const CostProfile& c, int i,
                                             int j) {
  if (i == j) throw std::invalid_argument("partial_p_cross requires i != j");
  const auto fp = alloc.grad(c, i);
  if (!fp) return std::nullopt;
  const double t = c.total();
  const double f = alloc.value(c);
  return *fp * (c[j] / t) - f * c[j] / (t * t);
}

// d log q_i / dc_i via the chain rule through the difficulty mapping:
//   (1/p_i - (K-1)/(1-p_i)) dp_i/dc_i - K sum_{j!=i} dp_j/dc_i / (1-p_j).
// Defined only at interior points (0 < p_i < 1, p_j < 1).
inline std::optional<double> log_q_derivative(const AllocationSpec& alloc, int horizon,
                                              const CostProfile& c, int i) {
  const auto fp = alloc.grad(c, i);
  if (!fp) return std::nullopt;
  const DifficultyVector p = difficulty(alloc, c);
  const double pi = p[i];
  if (pi <= 0.0 || pi >= 1.0) return std::nullopt;
  for (int j = 0; j < c.size(); ++j) {
    if (j != i && p[j] >= 1.0) return std::nullopt;
  }
  const auto dp_own = partial_p_own(alloc, c, i);
  double acc = (1.0 / pi - static_cast<double>(horizon - 1) / (1.0 - pi)) * *dp_own;
  for (int j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    const auto dp_cross = partial_p_cross(alloc, c, i, j);
    acc -= static_cast<double>(horizon) * *dp_cross / (1.0 - p[j]);
  }
  return acc;
}

// dq_i/dc_i = q_i * d log q_i / dc_i at interior points. An identically-zero
// allocation (f = 0 with zero slope) makes q vanish on a neighborhood, so the
// derivative there is an exact zero rather than a singularity.
inline std::optional<double> q_derivative(const AllocationSpec& alloc, int horizon,
                                          const CostProfile& c, int i) {
  const auto fp = alloc.grad(c, i);
  if (!fp) return std::nullopt;
  const double f = alloc.value(c);
  if (f == 0.0 && *fp == 0.0) return 0.0;
  const auto dg = log_q_derivative(alloc, horizon, c, i);
  if (!dg) return std::nullopt;
  const DifficultyVector p = difficulty(alloc, c);
  return exact_win_prob_single(p.p, i, horizon) * *dg;
}

namespace detail {

// central finite difference of q_i in c_i; NaN when the stencil would leave
// the admissible cost region
inline double fd_q_derivative(const AllocationSpec& alloc, int horizon, const CostProfile& c, int i) {
  const double h = fd_step(c[i]);
  if (c[i] - h < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const CostProfile up = c.with_cost(i, c[i] + h);
  const CostProfile dn = c.with_cost(i, c[i] - h);
  const double q_up = exact_win_prob_single(difficulty(alloc, up).p, i, horizon);
  const double q_dn = exact_win_prob_single(difficulty(alloc, dn).p, i, horizon);
  return (q_up - q_dn) / (2.0 * h);
}

}  // namespace detail

// Discouragement condition: dq_i/dc_i <= K/A at every grid point and miner.
inline ConditionReport check_prop1(const AllocationSpec& alloc, const AuctionParams& params,
                                   const std::vector<CostProfile>& grid,
                                   const std::string& grid_description = "") {
  if (grid.empty()) throw std::invalid_argument("check_prop1: empty grid");
  ConditionReport report;
  report.condition_id = "prop1";
  report.grid_description = grid_description;
  const double bound = static_cast<double>(params.horizon) / params.prize;  // +inf when prize == 0
  for (const CostProfile& c : grid) {
    for (int i = 0; i < c.size(); ++i) {
      PointVerdict pv;
      pv.coords = c.costs();
      pv.miner_i = i;
      pv.rhs = bound;
      const auto dq = q_derivative(alloc, params.horizon, c, i);
      if (!dq) {
        pv.verdict = Verdict::undefined;
      } else {
        pv.lhs = *dq;
        pv.margin = bound - *dq;
        pv.verdict = *dq <= bound ? Verdict::holds : Verdict::fails;
        pv.extra.emplace_back("fd", detail::fd_q_derivative(alloc, params.horizon, c, i));
      }
      report.points.push_back(std::move(pv));
    }
  }
  detail::finalize_summary(report);
  return report;
}

// Density-slope identity at a solved equilibrium: the finite-difference slope
// of pi_i must match (pi_i/mu) (A dQ_i/dc_i - K) up to second-order grid
// truncation. Grid endpoints are flagged undefined (one-sided stencils), and
// so is the first interior point: the cost-share weights are singular at the
// zero bid (an opponent belief atom at zero makes Q_i jump there), so a
// centered stencil containing it carries no valid difference quotient. The
// holds/fails verdict uses a 2% relative tolerance, which presumes the grid
// resolves the density; the raw residual is recorded per point either way.
inline ConditionReport check_pi_derivative(const QreSolution& solution,
                                           [[maybe_unused]] const AllocationSpec& alloc,
                                           const AuctionParams& params) {
  if (solution.densities.empty()) throw std::invalid_argument("check_pi_derivative: empty solution");
  if (!solution.converged) {
    throw std::invalid_argument("check_pi_derivative requires a converged solution");
  }
  ConditionReport report;
  report.condition_id = "pi-derivative";
  const BidGrid& grid = solution.densities.front().grid;
  {
    std::ostringstream os;
    os << "bid-grid n=" << grid.size() << " [0," << grid.c_max() << "] " << to_string(grid.spacing);
    report.grid_description = os.str();
  }
  const std::vector<double> cells = grid.cell_widths();
  const int miners = static_cast<int>(solution.densities.size());
  for (int i = 0; i < miners; ++i) {
    const auto& w = solution.densities[static_cast<std::size_t>(i)].weights;
    const auto& q = solution.win_prob_on_grid[static_cast<std::size_t>(i)];
    // The logit weights are pointwise-proportional samples of the continuous
    // density, so one scalar (the mass-weighted cell width) converts them;
    // per-point cell widths would distort the half-cells at the endpoints.
    double mass_width = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) mass_width += w[k] * cells[k];
    std::vector<double> density(w.size());
    double density_peak = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      density[k] = w[k] / mass_width;
      density_peak = std::max(density_peak, density[k]);
    }
    for (int k = 0; k < grid.size(); ++k) {
      PointVerdict pv;
      pv.coords = {grid[k]};
      pv.miner_i = i;
      if (k <= 1 || k == grid.size() - 1) {
        pv.verdict = Verdict::undefined;
        report.points.push_back(std::move(pv));
        continue;
      }
      const std::size_t sk = static_cast<std::size_t>(k);
      const double span = grid[k + 1] - grid[k - 1];
      const double slope = (density[sk + 1] - density[sk - 1]) / span;
      const double q_slope = (q[sk + 1] - q[sk - 1]) / span;
      const double bracket = params.prize * q_slope - static_cast<double>(params.horizon);
      const double predicted = density[sk] / params.mu * bracket;
      pv.lhs = slope;
      pv.rhs = predicted;
      const double residual = slope - predicted;
      pv.margin = -std::abs(residual);
      const double scale = std::max({std::abs(slope), std::abs(predicted),
                                     1e-6 * density_peak * params.horizon / params.mu});
      pv.verdict = std::abs(residual) <= 0.02 * scale ? Verdict::holds : Verdict::fails;
      pv.extra.emplace_back("residual", residual);
      pv.extra.emplace_back("bracket", bracket);
      report.points.push_back(std::move(pv));
    }
  }
  detail::finalize_summary(report);
  return report;
}

// Monotone difficulty: dp_i/dc_i >= 0 whenever df/dc_i >= 0, and
// dp_i/dc_i <= 1/c_tot wherever the grid certifies the scaled-Lipschitz
// property. Points with a negative allocation slope are reported as
// hypothesis-not-met, not as failures.
inline ConditionReport check_lemma1(const AllocationSpec& alloc, const std::vector<CostProfile>& grid,
                                    const std::string& grid_description = "") {
  if (grid.empty()) throw std::invalid_argument("check_lemma1: empty grid");
  const LipschitzCertificate cert = certify_lipschitz(alloc, grid);
  ConditionReport report;
  report.condition_id = "lemma1";
  report.grid_description = grid_description;
  for (const CostProfile& c : grid) {
    const double t = c.total();
    for (int i = 0; i < c.size(); ++i) {
      PointVerdict pv;
      pv.coords = c.costs();
      pv.miner_i = i;
      const auto fp = alloc.grad(c, i);
      if (!fp) {
        pv.verdict = Verdict::undefined;
        report.points.push_back(std::move(pv));
        continue;
      }
      const double dp = *partial_p_own(alloc, c, i);
      const double upper = cert.lipschitz_certified ? 1.0 / t : std::numeric_limits<double>::infinity();
      pv.lhs = dp;
      pv.rhs = upper;
      pv.extra.emplace_back("alloc_slope", *fp);
      if (*fp < 0.0) {
        pv.verdict = Verdict::hypothesis_not_met;
        report.points.push_back(std::move(pv));
        continue;
      }
      pv.margin = std::min(dp, std::isinf(upper) ? dp : upper - dp);
      pv.verdict = (dp >= 0.0 && dp <= upper + 1e-9) ? Verdict::holds : Verdict::fails;
      report.points.push_back(std::move(pv));
    }
  }
  detail::finalize_summary(report);
  return report;
}

// Cross-difficulty bound: dp_j/dc_i >= -c_i/c_tot^2 for every ordered pair
// (i, j), i != j, under the increasing-allocation hypothesis.
inline ConditionReport check_lemma2(const AllocationSpec& alloc, const std::vector<CostProfile>& grid,
                                    const std::string& grid_description = "") {
  if (grid.empty()) throw std::invalid_argument("check_lemma2: empty grid");
  ConditionReport report;
  report.condition_id = "lemma2";
  report.grid_description = grid_description;
  for (const CostProfile& c : grid) {
    const double t = c.total();
    for (int i = 0; i < c.size(); ++i) {
      for (int j = 0; j < c.size(); ++j) {
        if (j == i) continue;
        PointVerdict pv;
        pv.coords = c.costs();
        pv.miner_i = i;
        pv.miner_j = j;
        const auto fp = alloc.grad(c, i);
        if (!fp) {
          pv.verdict = Verdict::undefined;
          report.points.push_back(std::move(pv));
          continue;
        }
        const double dp = *partial_p_cross(alloc, c, i, j);
        const double bound = -c[i] / (t * t);
        pv.lhs = bound;
        pv.rhs = dp;
        pv.extra.emplace_back("alloc_slope", *fp);
        if (*fp < 0.0) {
          pv.verdict = Verdict::hypothesis_not_met;
          report.points.push_back(std::move(pv));
          continue;
        }
        pv.margin = dp - bound;
        pv.verdict = dp >= bound - 1e-9 ? Verdict::holds : Verdict::fails;
        report.points.push_back(std::move(pv));
      }
    }
  }
  detail::finalize_summary(report);
  return report;
}

// The log-derivative bound chain: with g_i = log q_i,
//   (a) exact dg_i/dc_i
//   (b) (1 - K p_i)/(p_i (1-p_i)) / c_tot + K c_i / c_tot^2 * sum_{j!=i} 1/(1-p_j)
//   (c) (c_tot^2 + K c_i f (N-1)) / (c_i f (1-f) c_tot^2)
// reporting where (a) <= (b) <= (c). The chain's own hypotheses are not
// assumed; each link is measured.
inline ConditionReport check_logderiv_bound(const AllocationSpec& alloc, const AuctionParams& params,
                                            const std::vector<CostProfile>& grid,
                                            const std::string& grid_description = "") {
  if (grid.empty()) throw std::invalid_argument("check_logderiv_bound: empty grid");
  ConditionReport report;
  report.condition_id = "logderiv";
  report.grid_description = grid_description;
  const int K = params.horizon;
  for (const CostProfile& c : grid) {
    const double t = c.total();
    const double f = alloc.value(c);
    const int n = c.size();
    const DifficultyVector p = difficulty(alloc, c);
    for (int i = 0; i < n; ++i) {
      PointVerdict pv;
      pv.coords = c.costs();
      pv.miner_i = i;
      const auto dg = log_q_derivative(alloc, K, c, i);
      if (!dg || c[i] <= 0.0 || f <= 0.0 || f >= 1.0) {
        pv.verdict = Verdict::undefined;
        report.points.push_back(std::move(pv));
        continue;
      }
      const double pi = p[i];
      double inv_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) inv_sum += 1.0 / (1.0 - p[j]);
      }
      const double mid = (1.0 - K * pi) / (pi * (1.0 - pi)) / t + K * c[i] / (t * t) * inv_sum;
      const double fin = (t * t + K * c[i] * f * (n - 1)) / (c[i] * f * (1.0 - f) * t * t);
      const double g = std::log(exact_win_prob_single(p.p, i, K));
      pv.lhs = *dg;
      pv.rhs = mid;
      pv.margin = std::min(mid - *dg, fin - mid);
      pv.verdict = (*dg <= mid && mid <= fin) ? Verdict::holds : Verdict::fails;
      pv.extra.emplace_back("final_bound", fin);
      pv.extra.emplace_back("g", g);
      pv.extra.emplace_back("inv_g_times_dg", *dg / g);
      pv.extra.emplace_back("a_le_b", *dg <= mid ? 1.0 : 0.0);
      pv.extra.emplace_back("b_le_c", mid <= fin ? 1.0 : 0.0);
      report.points.push_back(std::move(pv));
    }
  }
  detail::finalize_summary(report);
  return report;
}

// The feasibility quadratic f^2 + b f + d with b = A(N-1)/c_tot^2 - 1 and
// d = A/(K c_min). Its sign on [0,1] decides whether any admissible f level
// satisfies the discouragement chain's sufficient condition.
struct QuadraticFeasibility {
  double prize = 0.0;
  int horizon = 1;
  int miners = 2;
  double c_tot = 0.0;
  double c_min = 0.0;
  double b = 0.0;
  double d = 0.0;
  double discriminant = 0.0;  // b^2 - 4d
  double margin = 0.0;        // d - b^2/4, the parabola's minimum
  std::optional<std::array<double, 2>> roots;
  std::optional<std::array<double, 2>> feasible_interval;  // roots clipped to [0,1]
  bool infeasible_on_unit = true;
  double completed_square_residual = 0.0;  // relative, max over 20 sampled f
  bool sampling_agrees = true;             // dense sign sampling vs root interval
};

inline QuadraticFeasibility quadratic_feasibility(double prize, int horizon, int miners, double c_tot,
                                                  double c_min) {
  if (!std::isfinite(prize) || prize < 0.0) throw std::invalid_argument("prize must be finite and nonnegative");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (miners < 2) throw std::invalid_argument("miners must be at least 2");
  if (!(c_min > 0.0)) throw SingularityError("quadratic_feasibility: c_min = 0 leaves d undefined");
  if (!(c_tot >= c_min)) throw std::invalid_argument("c_tot must be at least c_min");

  QuadraticFeasibility out;
  out.prize = prize;
  out.horizon = horizon;
  out.miners = miners;
  out.c_tot = c_tot;
  out.c_min = c_min;
  out.b = prize * (miners - 1) / (c_tot * c_tot) - 1.0;
  out.d = prize / (static_cast<double>(horizon) * c_min);
  const double b = out.b;
  const double d = out.d;
  out.discriminant = b * b - 4.0 * d;
  out.margin = d - b * b / 4.0;

  const auto quad = [&](double f) { return f * f + b * f + d; };

  // completed-square identity, relative residual over 20 sampled f
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const double f = static_cast<double>(s) / 19.0;
    const double lhs = (f + b / 2.0) * (f + b / 2.0) + d - b * b / 4.0;
    const double rhs = quad(f);
    const double scale = std::max({1.0, f * f, std::abs(b * f), std::abs(d), b * b / 4.0});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  out.completed_square_residual = worst;

  if (out.discriminant >= 0.0) {
    const double s = std::sqrt(out.discriminant);
    double r1;
    double r2;
    if (b == 0.0 && s == 0.0) {
      r1 = r2 = 0.0;
    } else {
      const double q = -0.5 * (b + std::copysign(s, b));
      r1 = q;
      r2 = q != 0.0 ? d / q : -b - q;
    }
    const double lo = std::min(r1, r2);
    const double hi = std::max(r1, r2);
    out.roots = {lo, hi};
    const double ilo = std::max(lo, 0.0);
    const double ihi = std::min(hi, 1.0);
    if (ilo <= ihi) {
      out.feasible_interval = {ilo, ihi};
      out.infeasible_on_unit = false;
    }
  }

  // dense sampling cross-check at resolution 1e-3 in f
  const double value_tol = 1e-9 * std::max({1.0, std::abs(b), std::abs(d), b * b / 4.0});
  bool agree = true;
  bool any_sample_feasible = false;
  for (int s = 0; s <= 1000; ++s) {
    const double f = static_cast<double>(s) / 1000.0;
    const double v = quad(f);
    const bool sign_feasible = v <= value_tol;
    if (sign_feasible) any_sample_feasible = true;
    bool in_interval = false;
    if (out.roots) {
      const double edge_tol = 1e-9 * std::max({1.0, std::abs((*out.roots)[0]), std::abs((*out.roots)[1])});
      in_interval = f >= (*out.roots)[0] - edge_tol && f <= (*out.roots)[1] + edge_tol;
    }
    if (sign_feasible != in_interval && std::abs(v) > value_tol) {
      agree = false;
    }
  }
  if (out.infeasible_on_unit && any_sample_feasible) agree = false;
  out.sampling_agrees = agree;
  return out;
}

inline QuadraticFeasibility quadratic_feasibility(const AuctionParams& params, const CostProfile& c) {
  const double c_min = c.min_cost();
  if (!(c_min > 0.0)) throw SingularityError("quadratic_feasibility: c_min = 0 leaves d undefined");
  return quadratic_feasibility(params.prize, params.horizon, c.size(), c.total(), c_min);
}

// Parameter box for the impossibility scan. Cost profiles enter the quadratic
// only through (c_min, c_tot), so the box ranges over those aggregates:
// c_min in [cost_lo, cost_hi] and c_tot in [N c_min, c_min + (N-1) cost_hi],
// covering the symmetric and fully asymmetric extremes.
struct ScanBox {
  double prize_lo = 1.0;
  double prize_hi = 100.0;
  int horizon_lo = 1;
  int horizon_hi = 64;
  int miners_lo = 2;
  int miners_hi = 16;
  double cost_lo = 0.01;
  double cost_hi = 10.0;
};

struct ScanCell {
  double prize;
  int horizon;
  int miners;
  double c_min;
  double c_tot;
  QuadraticFeasibility feas;
};

struct ScanReport {
  ScanBox box;
  int resolution = 8;
  long long total_cells = 0;
  long long infeasible_cells = 0;
  double fraction_infeasible = 0.0;
  std::vector<std::size_t> feasible_indices;  // into cells
  std::vector<ScanCell> cells;
};

namespace detail {

inline std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> axis;
  if (lo == hi || n == 1) {
    axis.push_back(lo);
    return axis;
  }
  for (int k = 0; k < n; ++k) {
    axis.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  }
  axis.back() = hi;
  return axis;
}

inline std::vector<double> linear_axis(double lo, double hi, int n) {
  std::vector<double> axis;
  if (lo == hi || n == 1) {
    axis.push_back(lo);
    return axis;
  }
  for (int k = 0; k < n; ++k) {
    axis.push_back(lo + (hi - lo) * static_cast<double>(k) / (n - 1));
  }
  axis.back() = hi;
  return axis;
}

inline std::vector<int> int_axis(int lo, int hi, int n, bool log_spaced) {
  std::vector<int> axis;
  const std::vector<double> raw = log_spaced ? log_axis(lo, hi, n) : linear_axis(lo, hi, n);
  for (double v : raw) {
    const int k = std::clamp(static_cast<int>(std::lround(v)), lo, hi);
    if (axis.empty() || axis.back() != k) axis.push_back(k);
  }
  return axis;
}

}  // namespace detail

inline ScanReport scan_theorem(const ScanBox& box, int resolution = 8) {
  if (resolution < 1) throw std::invalid_argument("scan resolution must be at least 1");
  if (!(box.prize_lo > 0.0) || box.prize_hi < box.prize_lo) {
    throw std::invalid_argument("scan box prize range must satisfy 0 < lo <= hi");
  }
  if (box.horizon_lo < 1 || box.horizon_hi < box.horizon_lo) {
    throw std::invalid_argument("scan box horizon range must satisfy 1 <= lo <= hi");
  }
  if (box.miners_lo < 2 || box.miners_hi < box.miners_lo) {
    throw std::invalid_argument("scan box miners range must satisfy 2 <= lo <= hi");
  }
  if (!(box.cost_lo > 0.0) || box.cost_hi < box.cost_lo) {
    throw std::invalid_argument("scan box cost range must satisfy 0 < lo <= hi");
  }

  ScanReport report;
  report.box = box;
  report.resolution = resolution;
  const std::vector<double> prizes = detail::log_axis(box.prize_lo, box.prize_hi, resolution);
  const std::vector<int> horizons = detail::int_axis(box.horizon_lo, box.horizon_hi, resolution, true);
  const std::vector<int> miners = detail::int_axis(box.miners_lo, box.miners_hi, resolution, false);
  const std::vector<double> mins = detail::log_axis(box.cost_lo, box.cost_hi, resolution);

  for (double prize : prizes) {
    for (int horizon : horizons) {
      for (int n : miners) {
        for (double c_min : mins) {
          const double tot_lo = n * c_min;
          const double tot_hi = c_min + (n - 1) * box.cost_hi;
          const std::vector<double> tots =
              detail::linear_axis(tot_lo, std::max(tot_lo, tot_hi), resolution);
          for (double c_tot : tots) {
            ScanCell cell;
            cell.prize = prize;
            cell.horizon = horizon;
            cell.miners = n;
            cell.c_min = c_min;
            cell.c_tot = c_tot;
            cell.feas = quadratic_feasibility(prize, horizon, n, c_tot, c_min);
            ++report.total_cells;
            if (cell.feas.infeasible_on_unit) {
              ++report.infeasible_cells;
            } else {
              report.feasible_indices.push_back(report.cells.size());
            }
            report.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  report.fraction_infeasible = report.total_cells > 0
                                   ? static_cast<double>(report.infeasible_cells) /
                                         static_cast<double>(report.total_cells)
                                   : 0.0;
  return report;
}

}  // namespace allpay
