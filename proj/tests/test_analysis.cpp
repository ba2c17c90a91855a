#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "allpay/analysis.hpp"
#include "support/oracles.hpp"

using namespace allpay;

namespace {

double module_q(const AllocationSpec& alloc, int horizon, const CostProfile& c, int i) {
  return exact_win_prob_single(difficulty(alloc, c).p, i, horizon);
}

}  // namespace

TEST_CASE("difficulty partials match the expansion and finite differences") {
  SECTION("constant family matches the hand formula exactly") {
    const auto alloc = AllocationSpec::constant(0.37);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> costs(2 + rep % 3);
      for (double& v : costs) v = u(rng);
      const CostProfile c(costs);
      const int i = rep % c.size();
      const double t = c.total();
      double others = 0.0;
      for (int j = 0; j < c.size(); ++j) {
        if (j != i) others += c[j];
      }
      const double hand = 0.37 * others / (t * t);
      REQUIRE(oracle::close_rel(*partial_p_own(alloc, c, i), hand, 1e-14, 0.0));
    }
  }
  SECTION("frozen plug-in values") {
    const CostProfile c({1.0, 1.0});
    REQUIRE(*partial_p_own(AllocationSpec::constant(1.0), c, 0) == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(0.25 <= 1.0 / c.total());
    REQUIRE(*partial_p_cross(AllocationSpec::constant(0.5), c, 0, 1) ==
            Catch::Approx(-0.125).margin(1e-15));
    REQUIRE(-0.125 >= -c[0] / (c.total() * c.total()));
  }
  SECTION("finite differences confirm both partials") {
    const std::vector<AllocationSpec> allocs = {AllocationSpec::constant(0.6),
                                                AllocationSpec::saturating_linear(0.07),
                                                AllocationSpec::inverse_total(1.3)};
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.2, 2.5);
    for (const auto& alloc : allocs) {
      for (int rep = 0; rep < 60; ++rep) {
        std::vector<double> costs(2 + rep % 3);
        for (double& v : costs) v = u(rng);
        const CostProfile c(costs);
        const int i = rep % c.size();
        const int j = (i + 1) % c.size();
        const double h = oracle::fd_step(c[i]);
        const double fd_own = oracle::central_fd(
            [&](double x) { return difficulty(alloc, c.with_cost(i, x))[i]; }, c[i], h);
        const double fd_cross = oracle::central_fd(
            [&](double x) { return difficulty(alloc, c.with_cost(i, x))[j]; }, c[i], h);
        REQUIRE(oracle::close_rel(*partial_p_own(alloc, c, i), fd_own, 1e-5, 1e-10));
        REQUIRE(oracle::close_rel(*partial_p_cross(alloc, c, i, j), fd_cross, 1e-5, 1e-10));
      }
    }
  }
}

TEST_CASE("q derivative") {
  SECTION("matches finite differences at interior points") {
    const auto alloc = AllocationSpec::constant(0.5);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.3, 2.0);
    for (int rep = 0; rep < 60; ++rep) {
      std::vector<double> costs(2 + rep % 3);
      for (double& v : costs) v = u(rng);
      const CostProfile c(costs);
      const int i = rep % c.size();
      for (int horizon : {1, 2, 4}) {
        const auto dq = q_derivative(alloc, horizon, c, i);
        REQUIRE(dq.has_value());
        const double h = oracle::fd_step(c[i]);
        const double fd = oracle::central_fd(
            [&](double x) { return module_q(alloc, horizon, c.with_cost(i, x), i); }, c[i], h);
        REQUIRE(oracle::close_rel(*dq, fd, 1e-5, 1e-10));
        // halving the step does not change the agreement
        const double fd_half = oracle::central_fd(
            [&](double x) { return module_q(alloc, horizon, c.with_cost(i, x), i); }, c[i], h / 2.0);
        REQUIRE(oracle::close_rel(*dq, fd_half, 1e-5, 1e-10));
      }
    }
  }
  SECTION("identically-zero allocation has zero derivative") {
    REQUIRE(*q_derivative(AllocationSpec::constant(0.0), 2, CostProfile({1.0, 2.0}), 0) == 0.0);
  }
  SECTION("singular points are flagged undefined") {
    // c_i = 0 puts p_i on the boundary
    REQUIRE(!q_derivative(AllocationSpec::constant(0.5), 2, CostProfile({0.0, 1.0}), 0).has_value());
  }
}

TEST_CASE("check_prop1") {
  const AuctionParams params(10.0, 2, 1.0);
  SECTION("zero allocation holds everywhere") {
    const auto report = check_prop1(AllocationSpec::constant(0.0), params, default_cost_grid());
    REQUIRE(report.summary.fails == 0);
    REQUIRE(report.summary.undefined == 0);
    REQUIRE(report.summary.fraction_holding == 1.0);
  }
  SECTION("a tiny prize sends the bound to infinity") {
    const AuctionParams small(1e-12, 2, 1.0);
    const auto report = check_prop1(AllocationSpec::constant(0.5), small, default_cost_grid());
    REQUIRE(report.summary.fails == 0);
  }
  SECTION("verdict tracks the sign of dq - K/A against a finite-difference slope") {
    const auto alloc = AllocationSpec::constant(0.5);
    const std::vector<CostProfile> grid = {CostProfile({1.0, 1.0})};
    const auto report = check_prop1(alloc, params, grid);
    REQUIRE(report.points.size() == 2);
    for (const PointVerdict& pv : report.points) {
      const CostProfile c(pv.coords);
      const double h = oracle::fd_step(c[pv.miner_i]);
      const double fd = oracle::central_fd(
          [&](double x) { return module_q(alloc, params.horizon, c.with_cost(pv.miner_i, x), pv.miner_i); },
          c[pv.miner_i], h);
      REQUIRE(oracle::close_rel(pv.lhs, fd, 1e-5, 1e-10));
      const double bound = params.horizon / params.prize;
      REQUIRE(pv.verdict == (pv.lhs <= bound ? Verdict::holds : Verdict::fails));
    }
  }
  SECTION("zero-cost miners are undefined points") {
    const auto report =
        check_prop1(AllocationSpec::constant(0.5), params, {CostProfile({0.0, 1.0})});
    REQUIRE(report.points[0].verdict == Verdict::undefined);
    REQUIRE(report.points[1].verdict == Verdict::holds);
  }
}

TEST_CASE("check_lemma1 and check_lemma2") {
  SECTION("constant family holds across the default grid") {
    const auto report = check_lemma1(AllocationSpec::constant(0.5), default_cost_grid());
    REQUIRE(report.summary.fails == 0);
    REQUIRE(report.summary.hypothesis_not_met == 0);
    REQUIRE(report.summary.fraction_holding == 1.0);
  }
  SECTION("decreasing family marks hypothesis-not-met, never lemma-violated") {
    const auto report = check_lemma1(AllocationSpec::inverse_total(1.0), default_cost_grid());
    REQUIRE(report.summary.fails == 0);
    REQUIRE(report.summary.hypothesis_not_met > 0);
  }
  SECTION("lemma2 records where the cross bound genuinely fails") {
    // dp_j/dc_i = -f c_j / t^2 violates -c_i/t^2 whenever f c_j > c_i
    const auto report = check_lemma2(AllocationSpec::constant(1.0),
                                     {CostProfile({0.5, 2.0}), CostProfile({1.0, 1.0})});
    REQUIRE(report.summary.fails > 0);
    REQUIRE(report.summary.holds > 0);
    // the asymmetric profile fails for i=0, j=1: -0.32 < -0.08
    const PointVerdict& bad = report.points[0];
    REQUIRE(bad.miner_i == 0);
    REQUIRE(bad.miner_j == 1);
    REQUIRE(bad.verdict == Verdict::fails);
  }
  SECTION("zero allocation satisfies the cross bound everywhere") {
    const auto report = check_lemma2(AllocationSpec::constant(0.0), default_cost_grid());
    REQUIRE(report.summary.fails == 0);
    REQUIRE(report.summary.fraction_holding == 1.0);
  }
  SECTION("saturating-linear below the cap has exactly zero cross slope") {
    const CostProfile c({1.0, 2.0});
    REQUIRE(*partial_p_cross(AllocationSpec::saturating_linear(0.1), c, 0, 1) ==
            Catch::Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("check_logderiv_bound") {
  const AuctionParams params(10.0, 2, 1.0);
  SECTION("exact derivative agrees with a finite difference of log q") {
    const auto alloc = AllocationSpec::constant(0.5);
    const std::vector<CostProfile> grid = {CostProfile({1.0, 1.0}), CostProfile({0.5, 1.5, 2.0})};
    const auto report = check_logderiv_bound(alloc, params, grid);
    for (const PointVerdict& pv : report.points) {
      if (pv.verdict == Verdict::undefined) continue;
      const CostProfile c(pv.coords);
      const double h = oracle::fd_step(c[pv.miner_i]);
      const double fd = oracle::central_fd(
          [&](double x) {
            return std::log(module_q(alloc, params.horizon, c.with_cost(pv.miner_i, x), pv.miner_i));
          },
          c[pv.miner_i], h);
      REQUIRE(oracle::close_rel(pv.lhs, fd, 1e-5, 1e-9));
    }
  }
  SECTION("horizon 1 reduces to the hand-simplified derivative") {
    const AuctionParams k1(10.0, 1, 1.0);
    const auto alloc = AllocationSpec::constant(0.5);
    const CostProfile c({1.0, 2.0});
    const auto report = check_logderiv_bound(alloc, k1, {c});
    const PointVerdict& pv = report.points[0];
    const double hand = (1.0 / difficulty(alloc, c)[0]) * *partial_p_own(alloc, c, 0) -
                        *partial_p_cross(alloc, c, 0, 1) / (1.0 - difficulty(alloc, c)[1]);
    REQUIRE(oracle::close_rel(pv.lhs, hand, 1e-13, 0.0));
  }
  SECTION("near-saturated allocation blows up the final bound") {
    const auto report =
        check_logderiv_bound(AllocationSpec::constant(0.999), params, {CostProfile({1.0, 1.0})});
    for (const PointVerdict& pv : report.points) {
      REQUIRE(pv.verdict != Verdict::undefined);
      double fin = 0.0;
      for (const auto& kv : pv.extra) {
        if (kv.first == "final_bound") fin = kv.second;
      }
      REQUIRE(fin > 1e2);
      REQUIRE(pv.rhs <= fin);  // the (b) <= (c) link survives near the singularity
    }
  }
  SECTION("boundary allocations are undefined") {
    const auto report =
        check_logderiv_bound(AllocationSpec::constant(0.0), params, {CostProfile({1.0, 1.0})});
    for (const auto& pv : report.points) REQUIRE(pv.verdict == Verdict::undefined);
  }
}

TEST_CASE("quadratic_feasibility") {
  SECTION("frozen demo cell: A=10, K=2, N=3, unit costs") {
    const auto feas = quadratic_feasibility(10.0, 2, 3, 3.0, 1.0);
    REQUIRE(feas.b == Catch::Approx(11.0 / 9.0).margin(1e-12));
    REQUIRE(feas.d == 5.0);
    REQUIRE(feas.discriminant < 0.0);
    REQUIRE(feas.infeasible_on_unit);
    REQUIRE(!feas.roots.has_value());
    REQUIRE(feas.completed_square_residual <= 1e-12);
    REQUIRE(feas.sampling_agrees);
    const auto via_profile =
        quadratic_feasibility(AuctionParams(10.0, 2, 1.0), CostProfile({1.0, 1.0, 1.0}));
    REQUIRE(via_profile.b == feas.b);
    REQUIRE(via_profile.d == feas.d);
  }
  SECTION("a positive parabola minimum is always infeasible") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ua(1.0, 100.0);
    std::uniform_int_distribution<int> uk(1, 64);
    std::uniform_int_distribution<int> un(2, 16);
    std::uniform_real_distribution<double> uc(0.01, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
      const double prize = ua(rng);
      const int horizon = uk(rng);
      const int miners = un(rng);
      const double c_min = uc(rng);
      std::uniform_real_distribution<double> ut(miners * c_min, c_min + (miners - 1) * 10.0);
      const auto feas = quadratic_feasibility(prize, horizon, miners, ut(rng), c_min);
      REQUIRE(feas.completed_square_residual <= 1e-12);
      REQUIRE(feas.sampling_agrees);
      if (feas.margin > 0.0) REQUIRE(feas.infeasible_on_unit);
    }
  }
  SECTION("a known feasible cell") {
    const auto feas = quadratic_feasibility(1.0, 64, 2, 20.0, 10.0);
    REQUIRE(!feas.infeasible_on_unit);
    REQUIRE(feas.feasible_interval.has_value());
    REQUIRE((*feas.feasible_interval)[0] >= 0.0);
    REQUIRE((*feas.feasible_interval)[1] <= 1.0);
    REQUIRE(feas.sampling_agrees);
  }
  SECTION("zero minimum cost is rejected") {
    REQUIRE_THROWS_AS(quadratic_feasibility(10.0, 2, 3, 3.0, 0.0), SingularityError);
    REQUIRE_THROWS_AS(
        quadratic_feasibility(AuctionParams(10.0, 2, 1.0), CostProfile({0.0, 1.0, 1.0})),
        SingularityError);
  }
}

TEST_CASE("scan_theorem") {
  SECTION("a single-cell box reproduces quadratic_feasibility exactly") {
    ScanBox box;
    box.prize_lo = box.prize_hi = 10.0;
    box.horizon_lo = box.horizon_hi = 2;
    box.miners_lo = box.miners_hi = 3;
    box.cost_lo = box.cost_hi = 1.0;
    const auto report = scan_theorem(box, 8);
    REQUIRE(report.total_cells == 1);
    const auto direct = quadratic_feasibility(10.0, 2, 3, 3.0, 1.0);
    REQUIRE(report.cells[0].feas.b == direct.b);
    REQUIRE(report.cells[0].feas.d == direct.d);
    REQUIRE(report.cells[0].feas.infeasible_on_unit == direct.infeasible_on_unit);
  }
  SECTION("a dominated-d box is infeasible everywhere") {
    ScanBox box;
    box.prize_lo = 10.0;
    box.prize_hi = 20.0;
    box.horizon_lo = 1;
    box.horizon_hi = 2;
    box.miners_lo = 2;
    box.miners_hi = 3;
    box.cost_lo = 1.0;
    box.cost_hi = 5.0;
    const auto report = scan_theorem(box, 4);
    REQUIRE(report.fraction_infeasible == 1.0);
    REQUIRE(report.feasible_indices.empty());
  }
  SECTION("default box bookkeeping is consistent") {
    const auto report = scan_theorem(ScanBox{}, 4);
    REQUIRE(report.total_cells ==
            static_cast<long long>(report.cells.size()));
    REQUIRE(report.infeasible_cells + static_cast<long long>(report.feasible_indices.size()) ==
            report.total_cells);
    for (std::size_t idx : report.feasible_indices) {
      REQUIRE(!report.cells[idx].feas.infeasible_on_unit);
      REQUIRE(report.cells[idx].feas.feasible_interval.has_value());
    }
    for (const ScanCell& cell : report.cells) {
      REQUIRE(cell.feas.sampling_agrees);
      REQUIRE(cell.feas.completed_square_residual <= 1e-12);
    }
  }
  SECTION("invalid boxes and resolutions are rejected") {
    REQUIRE_THROWS_AS(scan_theorem(ScanBox{}, 0), std::invalid_argument);
    ScanBox bad;
    bad.cost_lo = 0.0;
    REQUIRE_THROWS_AS(scan_theorem(bad, 4), std::invalid_argument);
  }
}

TEST_CASE("belief-averaged win probability is monotone for an increasing certified family") {
  const auto alloc = AllocationSpec::constant(0.5);
  const int horizon = 2;
  const BidGrid grid = BidGrid::uniform(4.0, 17);
  const std::vector<BeliefDensity> opponents = {BeliefDensity::uniform_on(grid)};
  std::vector<double> q_row(grid.points.size());
  for (int k = 0; k < grid.size(); ++k) {
    q_row[static_cast<std::size_t>(k)] = expected_win_prob(alloc, grid[k], 0, opponents, horizon).value;
  }
  // non-decreasing away from the zero-bid singularity
  for (int k = 2; k < grid.size(); ++k) {
    REQUIRE(q_row[static_cast<std::size_t>(k)] >= q_row[static_cast<std::size_t>(k - 1)] - 1e-12);
  }
  // the own-cost slope of Q carries the sign of the belief-averaged analytic
  // dq/dc, and matches it in magnitude away from the steep region at the origin
  for (int k = 2; k + 1 < grid.size(); ++k) {
    const double slope = (q_row[static_cast<std::size_t>(k + 1)] - q_row[static_cast<std::size_t>(k - 1)]) /
                         (grid[k + 1] - grid[k - 1]);
    double averaged = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
      const auto dq = q_derivative(alloc, horizon, CostProfile({grid[k], grid[j]}), 0);
      REQUIRE(dq.has_value());
      averaged += opponents[0].weights[static_cast<std::size_t>(j)] * *dq;
    }
    REQUIRE(averaged >= -1e-12);
    REQUIRE(slope >= -1e-9);
    if (grid[k] >= 1.0) {
      REQUIRE(oracle::close_rel(slope, averaged, 2e-2, 1e-7));
    }
  }
}

TEST_CASE("check_pi_derivative") {
  const auto alloc = AllocationSpec::constant(0.5);
  SECTION("flat coupling: zero prize gives strictly negative slopes") {
    const AuctionParams params(0.0, 2, 0.7);
    const BidGrid grid = BidGrid::uniform(2.0, 33);
    QreOptions opts;
    opts.damping = 1.0;
    const auto sol = solve_qre(alloc, params, 2, grid, opts);
    REQUIRE(sol.converged);
    const auto report = check_pi_derivative(sol, alloc, params);
    REQUIRE(report.summary.fails == 0);
    for (const PointVerdict& pv : report.points) {
      if (pv.verdict == Verdict::undefined) continue;
      REQUIRE(pv.lhs < 0.0);  // exp(-K c / mu) is decreasing
      double bracket = 1.0;
      for (const auto& kv : pv.extra) {
        if (kv.first == "bracket") bracket = kv.second;
      }
      REQUIRE(bracket == Catch::Approx(-2.0).margin(1e-12));
    }
  }
  SECTION("identity residual shows second-order grid convergence") {
    const AuctionParams params(10.0, 2, 1.0);
    QreOptions opts;
    opts.tol = 1e-11;
    const auto coarse = solve_qre(alloc, params, 2, BidGrid::uniform(5.0, 33), opts);
    const auto fine = solve_qre(alloc, params, 2, BidGrid::uniform(5.0, 65), opts);
    REQUIRE(coarse.converged);
    REQUIRE(fine.converged);
    const auto rc = check_pi_derivative(coarse, alloc, params);
    const auto rf = check_pi_derivative(fine, alloc, params);
    // Richardson protocol: compare at the coarse grid's defined points, which
    // the refined grid contains exactly
    double sup_c = 0.0;
    double sup_f = 0.0;
    for (const PointVerdict& pc : rc.points) {
      if (pc.verdict == Verdict::undefined) continue;
      for (const PointVerdict& pf : rf.points) {
        if (pf.verdict == Verdict::undefined || pf.miner_i != pc.miner_i) continue;
        if (std::abs(pf.coords[0] - pc.coords[0]) > 1e-12) continue;
        sup_c = std::max(sup_c, std::abs(pc.lhs - pc.rhs));
        sup_f = std::max(sup_f, std::abs(pf.lhs - pf.rhs));
      }
    }
    REQUIRE(sup_f > 0.0);
    REQUIRE(sup_c / sup_f >= 3.5);
  }
  SECTION("the bracket does not depend on mu") {
    const AuctionParams params(10.0, 2, 1.0);
    const BidGrid grid = BidGrid::uniform(5.0, 33);
    const auto sol = solve_qre(alloc, params, 2, grid);
    const auto r1 = check_pi_derivative(sol, alloc, params);
    const auto r10 = check_pi_derivative(sol, alloc, AuctionParams(10.0, 2, 10.0));
    REQUIRE(r1.points.size() == r10.points.size());
    for (std::size_t k = 0; k < r1.points.size(); ++k) {
      double b1 = 0.0;
      double b10 = 0.0;
      for (const auto& kv : r1.points[k].extra) {
        if (kv.first == "bracket") b1 = kv.second;
      }
      for (const auto& kv : r10.points[k].extra) {
        if (kv.first == "bracket") b10 = kv.second;
      }
      REQUIRE(b1 == b10);
    }
  }
  SECTION("requires convergence") {
    const AuctionParams params(10.0, 2, 1.0);
    QreOptions opts;
    opts.max_iter = 1;
    const auto sol = solve_qre(alloc, params, 2, BidGrid::uniform(5.0, 33), opts);
    REQUIRE_THROWS_AS(check_pi_derivative(sol, alloc, params), std::invalid_argument);
  }
}
