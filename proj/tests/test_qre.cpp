#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "allpay/qre.hpp"
#include "support/oracles.hpp"

using namespace allpay;

namespace {

double tv_to_uniform(const BeliefDensity& d) {
  const double u = 1.0 / static_cast<double>(d.weights.size());
  double tv = 0.0;
  for (double w : d.weights) tv += std::abs(w - u);
  return tv / 2.0;
}

}  // namespace

TEST_CASE("logit_response") {
  SECTION("constant utilities give the uniform density") {
    const BidGrid grid = BidGrid::uniform(1.0, 16);
    const auto d = logit_response(grid, std::vector<double>(16, 3.5), 0.8);
    for (double w : d.weights) REQUIRE(w == Catch::Approx(1.0 / 16).margin(1e-15));
  }
  SECTION("utility gap of mu*ln 2 doubles the weight") {
    BidGrid grid;  // the response map itself has no minimum-size requirement
    grid.points = {0.0, 1.0};
    const double mu = 0.7;
    const auto d = logit_response(grid, {0.0, mu * std::log(2.0)}, mu);
    REQUIRE(d.weights[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    REQUIRE(d.weights[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
  }
  SECTION("vanishing mu concentrates on the unique argmax") {
    const BidGrid grid = BidGrid::uniform(1.0, 32);
    std::vector<double> u(32);
    for (int k = 0; k < 32; ++k) u[static_cast<std::size_t>(k)] = -std::abs(k - 20.0);
    const double range = 20.0;
    const auto d = logit_response(grid, u, 1e-6 * range);
    REQUIRE(d.weights[20] >= 0.999);
  }
  SECTION("shift invariance under the max-shift evaluation") {
    const BidGrid grid = BidGrid::uniform(1.0, 24);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uu(-5.0, 5.0);
    std::vector<double> u(24);
    for (double& v : u) v = uu(rng);
    const auto a = logit_response(grid, u, 0.9);
    std::vector<double> shifted = u;
    for (double& v : shifted) v += 123.456;
    const auto b = logit_response(grid, shifted, 0.9);
    for (std::size_t k = 0; k < u.size(); ++k) {
      REQUIRE(oracle::close_rel(a.weights[k], b.weights[k], 1e-12, 0.0));
    }
  }
  SECTION("higher utility always carries more weight") {
    const BidGrid grid = BidGrid::uniform(1.0, 20);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uu(0.0, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> u(20);
      for (double& v : u) v = uu(rng);
      const double mu = 0.1 + 0.5 * (rep % 8);
      const auto d = logit_response(grid, u, mu);
      for (std::size_t a = 0; a < u.size(); ++a) {
        for (std::size_t b = 0; b < u.size(); ++b) {
          if (u[a] > u[b]) REQUIRE(d.weights[a] > d.weights[b]);
        }
      }
    }
  }
  SECTION("rejections") {
    const BidGrid grid = BidGrid::uniform(1.0, 16);
    REQUIRE_THROWS_AS(logit_response(grid, std::vector<double>(16, 0.0), 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(logit_response(grid, std::vector<double>(16, 0.0), -1.0), std::invalid_argument);
    std::vector<double> bad(16, 0.0);
    bad[3] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(logit_response(grid, bad, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(logit_response(grid, std::vector<double>(5, 0.0), 1.0), std::invalid_argument);
  }
}

TEST_CASE("solve_qre basics") {
  const auto alloc = AllocationSpec::constant(0.5);

  SECTION("symmetric miners share one density") {
    const AuctionParams params(10.0, 2, 1.0);
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    const auto sol = solve_qre(alloc, params, 3, grid);
    REQUIRE(sol.converged);
    for (int i = 1; i < 3; ++i) {
      for (std::size_t k = 0; k < sol.densities[0].weights.size(); ++k) {
        REQUIRE(std::abs(sol.densities[static_cast<std::size_t>(i)].weights[k] -
                         sol.densities[0].weights[k]) <= 1e-8);
      }
    }
    for (const auto& d : sol.densities) d.validate(1e-9);
    REQUIRE(sol.delta[0] == sol.densities[0].weights[0]);
  }

  SECTION("very large mu flattens the densities") {
    const AuctionParams params(10.0, 2, 1.0e4);  // mu = 1e3 * prize
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    const auto sol = solve_qre(alloc, params, 2, grid);
    REQUIRE(sol.converged);
    REQUIRE(tv_to_uniform(sol.densities[0]) <= 1e-3);
  }

  SECTION("zero prize decouples into a single logit application") {
    const AuctionParams params(0.0, 2, 0.7);
    const BidGrid grid = BidGrid::uniform(2.0, 16);
    QreOptions opts;
    opts.damping = 1.0;
    const auto sol = solve_qre(alloc, params, 2, grid, opts);
    REQUIRE(sol.converged);
    REQUIRE(sol.iterations <= 2);
    std::vector<double> u(grid.points.size());
    for (int k = 0; k < grid.size(); ++k) u[static_cast<std::size_t>(k)] = -2.0 * grid[k];
    const auto target = logit_response(grid, u, params.mu);
    for (std::size_t k = 0; k < u.size(); ++k) {
      REQUIRE(sol.densities[0].weights[k] == Catch::Approx(target.weights[k]).margin(1e-15));
    }
  }

  SECTION("non-convergence is flagged, not thrown") {
    const AuctionParams params(10.0, 2, 1.0);
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    QreOptions opts;
    opts.max_iter = 1;
    const auto sol = solve_qre(alloc, params, 2, grid, opts);
    REQUIRE(!sol.converged);
    REQUIRE(sol.residual > opts.tol);
    REQUIRE(sol.residual_trace.size() == 1);
  }

  SECTION("a converged solution is an approximate fixed point") {
    const AuctionParams params(10.0, 2, 1.0);
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    QreOptions opts;
    opts.tol = 1e-9;
    const auto sol = solve_qre(alloc, params, 2, grid, opts);
    REQUIRE(sol.converged);
    REQUIRE(qre_fixed_point_gap(sol, alloc, params, grid) <= 2.0 * opts.tol);
  }

  SECTION("total variation to uniform decreases along a mu ladder") {
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    double prev = 2.0;
    for (double mu : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const AuctionParams params(10.0, 2, mu);
      const auto sol = solve_qre(alloc, params, 2, grid);
      REQUIRE(sol.converged);
      const double tv = tv_to_uniform(sol.densities[0]);
      REQUIRE(tv < prev);
      prev = tv;
    }
  }

  SECTION("many miners require a seed for the sampled belief integral") {
    const AuctionParams params(10.0, 2, 1.0);
    const BidGrid grid = BidGrid::uniform(5.0, 16);
    REQUIRE_THROWS_AS(solve_qre(alloc, params, 4, grid), SeedRequiredError);
    QreOptions opts;
    opts.seed = 7;
    opts.max_iter = 40;
    opts.tol = 1e-6;
    const auto sol = solve_qre(alloc, params, 4, grid, opts);
    for (const auto& d : sol.densities) d.validate(1e-9);
  }
}

TEST_CASE("log-spaced bid grids") {
  const BidGrid grid = BidGrid::log_spaced(5.0, 33);
  REQUIRE_NOTHROW(grid.validate());
  REQUIRE(grid.points[0] == 0.0);
  REQUIRE(grid.c_max() == 5.0);
  REQUIRE(grid.spacing == BidGrid::Spacing::log);
  const AuctionParams params(10.0, 2, 1.0);
  const auto sol = solve_qre(AllocationSpec::constant(0.5), params, 2, grid);
  REQUIRE(sol.converged);
  for (const auto& d : sol.densities) d.validate(1e-9);
}

TEST_CASE("nash_check") {
  const auto alloc = AllocationSpec::constant(0.5);
  const BidGrid grid = BidGrid::uniform(2.0, 16);

  SECTION("zero prize makes the all-zero profile a Nash point") {
    const AuctionParams params(0.0, 2, 1.0);
    const auto gaps = nash_check({0.0, 0.0}, alloc, params, grid);
    REQUIRE(gaps[0] == 0.0);
    REQUIRE(gaps[1] == 0.0);
  }

  SECTION("negative utility always leaves a profitable zero-bid deviation") {
    const AuctionParams params(1.0, 2, 1.0);
    const std::vector<double> profile = {2.0, 0.5};  // miner 0 pays 4 for at most 1
    const double u0 = utility(params.prize, params.horizon,
                              profile[0],
                              exact_win_prob(difficulty(alloc, CostProfile(profile)), 2).q[0]);
    REQUIRE(u0 < 0.0);
    const auto gaps = nash_check(profile, alloc, params, grid);
    REQUIRE(gaps[0] >= -u0);
  }

  SECTION("gaps agree with an exhaustive enumeration oracle") {
    const AuctionParams params(4.0, 1, 1.0);
    // independent utility: difficulty weights and win probabilities recomputed
    // from scratch, q by full enumeration
    const auto oracle_utility = [&](double own, double other, int who) {
      const double t = own + other;
      if (t <= 0.0) return 0.0;
      const std::vector<double> p = {0.5 * own / t, 0.5 * other / t};
      const auto q = oracle::enumerate_win_prob(p, params.horizon);
      const double own_cost = who == 0 ? own : other;
      return params.prize * q[static_cast<std::size_t>(who)] - params.horizon * own_cost;
    };
    int zero_gap_profiles = 0;
    for (double ca : grid.points) {
      for (double cb : grid.points) {
        const auto gaps = nash_check({ca, cb}, alloc, params, grid);
        double best0 = oracle_utility(ca, cb, 0);
        double best1 = oracle_utility(ca, cb, 1);
        for (double dev : grid.points) {
          best0 = std::max(best0, oracle_utility(dev, cb, 0));
          best1 = std::max(best1, oracle_utility(ca, dev, 1));
        }
        const double gap0 = best0 - oracle_utility(ca, cb, 0);
        const double gap1 = best1 - oracle_utility(ca, cb, 1);
        REQUIRE(std::abs(gaps[0] - gap0) <= 1e-12);
        REQUIRE(std::abs(gaps[1] - gap1) <= 1e-12);
        if (gaps[0] <= 1e-12 && gaps[1] <= 1e-12) ++zero_gap_profiles;
      }
    }
    REQUIRE(zero_gap_profiles >= 1);  // the exhaustive search found the grid equilibria
  }
}
