#pragma once

// Logit quantal-response equilibrium over a discretized bid space, solved by
// damped fixed-point iteration, plus a grid-Nash best-response comparator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "allpay/beliefs.hpp"
#include "allpay/model.hpp"
#include "allpay/race.hpp"

namespace allpay {

// Stochastic best response: weights_k proportional to exp(U_k / mu),
// max-shifted before exponentiation so large |U| cannot overflow.
inline BeliefDensity logit_response(const BidGrid& grid, const std::vector<double>& utilities,
                                    double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("logit_response: mu must be finite and positive");
  }
  if (utilities.size() != grid.points.size()) {
    throw std::invalid_argument("logit_response: utilities must match the grid size");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (double u : utilities) {
    if (!std::isfinite(u)) throw std::invalid_argument("logit_response: utilities must be finite");
    peak = std::max(peak, u);
  }
  BeliefDensity d;
  d.grid = grid;
  d.weights.resize(utilities.size());
  double z = 0.0;
  for (std::size_t k = 0; k < utilities.size(); ++k) {
    d.weights[k] = std::exp((utilities[k] - peak) / mu);
    z += d.weights[k];
  }
  for (double& w : d.weights) w /= z;
  return d;
}

struct QreOptions {
  double damping = 0.5;
  double tol = 1e-8;
  int max_iter = 10000;
  std::optional<std::uint64_t> seed;  // Monte Carlo belief integration only
  long long mc_samples = 8192;
};

struct QreSolution {
  std::vector<BeliefDensity> densities;
  std::vector<std::vector<double>> utilities_on_grid;  // per miner, at the final densities
  std::vector<std::vector<double>> win_prob_on_grid;   // Q_i(c_k) at the final densities
  std::vector<double> delta;                           // density mass at the zero bid
  double residual = 0.0;                               // sup-norm weight change, last iteration
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;
};

namespace detail {

inline std::vector<double> win_prob_row(const AllocationSpec& alloc, const AuctionParams& params,
                                        int miner, const std::vector<BeliefDensity>& densities,
                                        const BidGrid& grid, const QreOptions& opts) {
  const int miners = static_cast<int>(densities.size());
  std::vector<BeliefDensity> opponents;
  opponents.reserve(static_cast<std::size_t>(miners) - 1);
  for (int j = 0; j < miners; ++j) {
    if (j != miner) opponents.push_back(densities[static_cast<std::size_t>(j)]);
  }
  BeliefIntegrationOptions bi;
  bi.mc_samples = opts.mc_samples;
  std::vector<double> row(grid.points.size());
  for (int k = 0; k < grid.size(); ++k) {
    if (opts.seed) {
      // fixed per (miner, grid point): common random numbers keep the map
      // deterministic across iterations, so the damped iteration can converge
      bi.seed = substream_seed(*opts.seed,
                               (static_cast<std::uint64_t>(miner) << 32) | static_cast<std::uint64_t>(k));
    }
    row[static_cast<std::size_t>(k)] =
        expected_win_prob(alloc, grid[k], miner, opponents, params.horizon, bi).value;
  }
  return row;
}

}  // namespace detail

// Damped logit fixed point. Every miner starts from the uniform density; one
// sweep recomputes each miner's utilities against the current opponent
// densities (Jacobi style, preserving symmetry), applies the logit map, then
// blends new <- damping*new + (1-damping)*old. Non-convergence is flagged on
// the result, never thrown.
inline QreSolution solve_qre(const AllocationSpec& alloc, const AuctionParams& params, int miners,
                             const BidGrid& grid, const QreOptions& opts = {}) {
  if (miners < 2) throw std::invalid_argument("solve_qre needs at least 2 miners");
  if (!(opts.damping > 0.0) || opts.damping > 1.0) {
    throw std::invalid_argument("solve_qre: damping must lie in (0, 1]");
  }
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_qre: tol must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("solve_qre: max_iter must be >= 1");
  grid.validate();
  if (miners > 3 && !opts.seed) {
    throw SeedRequiredError("solve_qre: Monte Carlo belief integration requires a seed for N > 3");
  }

  QreSolution sol;
  sol.densities.assign(static_cast<std::size_t>(miners), BeliefDensity::uniform_on(grid));
  sol.residual_trace.reserve(64);

  std::vector<BeliefDensity> next(sol.densities);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    for (int i = 0; i < miners; ++i) {
      const std::vector<double> q_row = detail::win_prob_row(alloc, params, i, sol.densities, grid, opts);
      std::vector<double> u_row(q_row.size());
      for (int k = 0; k < grid.size(); ++k) {
        u_row[static_cast<std::size_t>(k)] = utility(params.prize, params.horizon, grid[k],
                                                     q_row[static_cast<std::size_t>(k)]);
      }
      next[static_cast<std::size_t>(i)] = logit_response(grid, u_row, params.mu);
    }
    double residual = 0.0;
    for (int i = 0; i < miners; ++i) {
      auto& cur = sol.densities[static_cast<std::size_t>(i)].weights;
      const auto& upd = next[static_cast<std::size_t>(i)].weights;
      for (std::size_t k = 0; k < cur.size(); ++k) {
        const double blended = opts.damping * upd[k] + (1.0 - opts.damping) * cur[k];
        residual = std::max(residual, std::abs(blended - cur[k]));
        cur[k] = blended;
      }
    }
    sol.iterations = iter;
    sol.residual = residual;
    sol.residual_trace.push_back(residual);
    if (residual <= opts.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.win_prob_on_grid.resize(static_cast<std::size_t>(miners));
  sol.utilities_on_grid.resize(static_cast<std::size_t>(miners));
  sol.delta.resize(static_cast<std::size_t>(miners));
  for (int i = 0; i < miners; ++i) {
    sol.win_prob_on_grid[static_cast<std::size_t>(i)] =
        detail::win_prob_row(alloc, params, i, sol.densities, grid, opts);
    auto& u_row = sol.utilities_on_grid[static_cast<std::size_t>(i)];
    u_row.resize(grid.points.size());
    for (int k = 0; k < grid.size(); ++k) {
      u_row[static_cast<std::size_t>(k)] =
          utility(params.prize, params.horizon, grid[k],
                  sol.win_prob_on_grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    }
    sol.delta[static_cast<std::size_t>(i)] = sol.densities[static_cast<std::size_t>(i)].weights[0];
  }
  return sol;
}

// One undamped logit update of every miner, for fixed-point verification:
// returns the sup-norm distance between the input densities and their images.
inline double qre_fixed_point_gap(const QreSolution& sol, const AllocationSpec& alloc,
                                  const AuctionParams& params, const BidGrid& grid,
                                  const QreOptions& opts = {}) {
  double gap = 0.0;
  const int miners = static_cast<int>(sol.densities.size());
  for (int i = 0; i < miners; ++i) {
    const std::vector<double> q_row = detail::win_prob_row(alloc, params, i, sol.densities, grid, opts);
    std::vector<double> u_row(q_row.size());
    for (int k = 0; k < grid.size(); ++k) {
      u_row[static_cast<std::size_t>(k)] = utility(params.prize, params.horizon, grid[k],
                                                   q_row[static_cast<std::size_t>(k)]);
    }
    const BeliefDensity mapped = logit_response(grid, u_row, params.mu);
    const auto& cur = sol.densities[static_cast<std::size_t>(i)].weights;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      gap = std::max(gap, std::abs(mapped.weights[k] - cur[k]));
    }
  }
  return gap;
}

namespace detail {

// U_i at a deterministic joint cost profile; the all-zero profile hosts no
// race, so q_i = 0 there.
inline double pure_utility(const AllocationSpec& alloc, const AuctionParams& params,
                           const std::vector<double>& costs, int i) {
  std::vector<double> p_buffer;
  const double q = win_prob_at_costs(alloc, costs, i, params.horizon, p_buffer);
  return utility(params.prize, params.horizon, costs[static_cast<std::size_t>(i)], q);
}

}  // namespace detail

// Best-response gap of each miner at a pure cost profile: the most any miner
// gains by deviating to a grid bid. All gaps <= tol means the profile is a
// grid-Nash equilibrium.
inline std::vector<double> nash_check(const std::vector<double>& profile, const AllocationSpec& alloc,
                                      const AuctionParams& params, const BidGrid& grid) {
  if (profile.size() < 2) throw std::invalid_argument("nash_check needs at least 2 miners");
  for (double c : profile) {
    if (!std::isfinite(c) || c < 0.0) {
      throw std::invalid_argument("nash_check: costs must be finite and nonnegative");
    }
  }
  grid.validate();
  std::vector<double> gaps(profile.size(), 0.0);
  std::vector<double> work = profile;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double base = detail::pure_utility(alloc, params, profile, static_cast<int>(i));
    double best = base;
    for (double bid : grid.points) {
      work[i] = bid;
      best = std::max(best, detail::pure_utility(alloc, params, work, static_cast<int>(i)));
    }
    work[i] = profile[i];
    gaps[i] = best - base;
  }
  return gaps;
}

}  // namespace allpay
