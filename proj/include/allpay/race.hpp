#pragma once

// Mining-race outcome probabilities: the closed-form win probability
// q_i = p_i (1-p_i)^(K-1) prod_{j!=i} (1-p_j)^K, its belief average Q_i,
// a seeded Monte Carlo estimator, and miner utilities U_i = A q - K c.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "allpay/beliefs.hpp"
#include "allpay/errors.hpp"
#include "allpay/model.hpp"

namespace allpay {

// exact_at_k: a miner wins iff the race's single success is theirs and lands
// exactly on attempt K (the closed form above). first_success: the race stops
// at the earliest success; simultaneous solvers tie-break uniformly.
enum class RaceSemantics { exact_at_k, first_success };

inline std::string to_string(RaceSemantics s) {
  return s == RaceSemantics::exact_at_k ? "exact-at-k" : "first-success";
}

inline RaceSemantics race_semantics_from_string(const std::string& s) {
  if (s == "exact-at-k") return RaceSemantics::exact_at_k;
  if (s == "first-success") return RaceSemantics::first_success;
  throw std::invalid_argument("unknown race semantics: " + s);
}

struct WinProbabilities {
  std::vector<double> q;
  RaceSemantics semantics = RaceSemantics::exact_at_k;
};

struct RaceOutcome {
  std::optional<int> winner;
  std::optional<int> attempt_of_success;  // 1-based
  std::vector<int> success_counts;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ 0x9e3779b97f4a7c15ULL) + stream);
}

// [0, 1) with 53 random bits; avoids implementation-defined distributions so
// streams are identical across standard libraries.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void validate_difficulty(const std::vector<double>& p) {
  if (p.size() < 2) throw std::invalid_argument("difficulty vector needs at least 2 miners");
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("difficulty entries must lie in [0,1]");
    }
  }
}

}  // namespace detail

// Winner of one realized attempt matrix (row-major miners x attempts).
// tie_rng is consumed only by first-success ties.
template <class Rng>
RaceOutcome classify_race(const std::vector<std::uint8_t>& attempts, int miners, int horizon,
                          RaceSemantics semantics, Rng& tie_rng) {
  if (attempts.size() != static_cast<std::size_t>(miners) * static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("attempt matrix shape mismatch");
  }
  RaceOutcome out;
  out.success_counts.assign(static_cast<std::size_t>(miners), 0);
  for (int i = 0; i < miners; ++i) {
    for (int k = 0; k < horizon; ++k) {
      out.success_counts[static_cast<std::size_t>(i)] +=
          attempts[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k)];
    }
  }
  if (semantics == RaceSemantics::exact_at_k) {
    int total = 0;
    int last_owner = -1;
    int last_attempt = -1;
    for (int i = 0; i < miners; ++i) {
      for (int k = 0; k < horizon; ++k) {
        if (attempts[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k)]) {
          ++total;
          last_owner = i;
          last_attempt = k;
        }
      }
    }
    if (total == 1 && last_attempt == horizon - 1) {
      out.winner = last_owner;
      out.attempt_of_success = horizon;
    }
    return out;
  }
  // first-success
  for (int k = 0; k < horizon; ++k) {
    int first = -1;
    int tied = 0;
    for (int i = 0; i < miners; ++i) {
      if (attempts[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k)]) {
        ++tied;
        if (first < 0) first = i;
      }
    }
    if (tied == 0) continue;
    int winner = first;
    if (tied > 1) {
      std::uint64_t pick = tie_rng() % static_cast<std::uint64_t>(tied);
      for (int i = 0; i < miners; ++i) {
        if (attempts[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k)]) {
          if (pick == 0) {
            winner = i;
            break;
          }
          --pick;
        }
      }
    }
    out.winner = winner;
    out.attempt_of_success = k + 1;
    return out;
  }
  return out;
}

// Closed-form win probability of one miner, evaluated in log space.
inline double exact_win_prob_single(const std::vector<double>& p, int i, int horizon) {
  const double pi = p[static_cast<std::size_t>(i)];
  if (pi <= 0.0) return 0.0;
  int ones = 0;
  for (double v : p) {
    if (v >= 1.0) ++ones;
  }
  if (pi >= 1.0) {
    if (horizon > 1 || ones > 1) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (static_cast<int>(j) != i) sum += std::log1p(-p[j]);
    }
    return std::exp(sum);
  }
  if (ones > 0) return 0.0;  // some opponent succeeds surely on every attempt
  double sum_others = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (static_cast<int>(j) != i) sum_others += std::log1p(-p[j]);
  }
  const double log_q = std::log(pi) + (horizon - 1) * std::log1p(-pi) + horizon * sum_others;
  return std::exp(log_q);
}

inline WinProbabilities exact_win_prob(const DifficultyVector& p, int horizon) {
  detail::validate_difficulty(p.p);
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  WinProbabilities w;
  w.semantics = RaceSemantics::exact_at_k;
  w.q.resize(p.p.size());
  for (int i = 0; i < p.size(); ++i) {
    w.q[static_cast<std::size_t>(i)] = exact_win_prob_single(p.p, i, horizon);
  }
  return w;
}

struct SimulationResult {
  std::vector<double> q_hat;
  std::vector<double> std_err;  // binomial, sqrt(q_hat (1-q_hat) / trials)
  std::vector<long long> wins;
  long long trials = 0;
  long long no_winner = 0;
  RaceSemantics semantics = RaceSemantics::exact_at_k;
  std::uint64_t seed = 0;
};

// Seeded race simulation. Trials are split into fixed-size chunks, each with a
// counter-derived substream, and chunk tallies reduce in index order, so the
// result depends only on (p, horizon, trials, seed, semantics) and not on the
// thread count.
inline SimulationResult simulate_races(const DifficultyVector& p, int horizon, long long trials,
                                       std::uint64_t seed,
                                       RaceSemantics semantics = RaceSemantics::exact_at_k,
                                       int threads = 1) {
  detail::validate_difficulty(p.p);
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (trials < 1) throw std::invalid_argument("simulate_races: trials must be >= 1");

  const int miners = p.size();
  constexpr long long kChunk = 8192;
  const long long n_chunks = (trials + kChunk - 1) / kChunk;
  std::vector<long long> wins_by_chunk(static_cast<std::size_t>(n_chunks) * static_cast<std::size_t>(miners), 0);
  std::vector<long long> nowin_by_chunk(static_cast<std::size_t>(n_chunks), 0);

  const auto run_chunks = [&](long long chunk_begin, long long chunk_end) {
    std::vector<std::uint8_t> attempts(static_cast<std::size_t>(miners) * static_cast<std::size_t>(horizon));
    for (long long c = chunk_begin; c < chunk_end; ++c) {
      std::mt19937_64 rng(detail::substream_seed(seed, static_cast<std::uint64_t>(c)));
      const long long begin = c * kChunk;
      const long long end = std::min(trials, begin + kChunk);
      long long* wins = &wins_by_chunk[static_cast<std::size_t>(c) * static_cast<std::size_t>(miners)];
      for (long long t = begin; t < end; ++t) {
        for (int i = 0; i < miners; ++i) {
          const double pi = p[i];
          for (int k = 0; k < horizon; ++k) {
            attempts[static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k)] =
                detail::uniform01(rng) < pi ? 1 : 0;
          }
        }
        const RaceOutcome outcome = classify_race(attempts, miners, horizon, semantics, rng);
        if (outcome.winner) {
          ++wins[*outcome.winner];
        } else {
          ++nowin_by_chunk[static_cast<std::size_t>(c)];
        }
      }
    }
  };

  const int n_workers = static_cast<int>(std::min<long long>(std::max(threads, 1), n_chunks));
  if (n_workers <= 1) {
    run_chunks(0, n_chunks);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      const long long lo = n_chunks * w / n_workers;
      const long long hi = n_chunks * (w + 1) / n_workers;
      pool.emplace_back(run_chunks, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SimulationResult res;
  res.trials = trials;
  res.semantics = semantics;
  res.seed = seed;
  res.wins.assign(static_cast<std::size_t>(miners), 0);
  for (long long c = 0; c < n_chunks; ++c) {
    for (int i = 0; i < miners; ++i) {
      res.wins[static_cast<std::size_t>(i)] +=
          wins_by_chunk[static_cast<std::size_t>(c) * static_cast<std::size_t>(miners) + static_cast<std::size_t>(i)];
    }
    res.no_winner += nowin_by_chunk[static_cast<std::size_t>(c)];
  }
  res.q_hat.resize(static_cast<std::size_t>(miners));
  res.std_err.resize(static_cast<std::size_t>(miners));
  for (int i = 0; i < miners; ++i) {
    const double q = static_cast<double>(res.wins[static_cast<std::size_t>(i)]) / static_cast<double>(trials);
    res.q_hat[static_cast<std::size_t>(i)] = q;
    res.std_err[static_cast<std::size_t>(i)] = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
  }
  return res;
}

struct ExpectedWinProb {
  double value = 0.0;
  double std_err = 0.0;  // zero on the quadrature path
  bool monte_carlo = false;
  long long samples = 0;  // opponent profiles evaluated
};

struct BeliefIntegrationOptions {
  int quadrature_max_miners = 3;  // beyond this the product grid is sampled
  long long mc_samples = 8192;
  std::optional<std::uint64_t> seed;
};

namespace detail {

// q_i under a raw joint cost vector. The all-zero profile carries no race at
// all (every p_i = 0), so it contributes zero.
inline double win_prob_at_costs(const AllocationSpec& alloc, const std::vector<double>& costs, int i,
                                int horizon, std::vector<double>& p_buffer) {
  double total = 0.0;
  for (double c : costs) total += c;
  if (total <= 0.0) return 0.0;
  const double f = alloc.value_from_total(total);
  p_buffer.resize(costs.size());
  for (std::size_t j = 0; j < costs.size(); ++j) {
    p_buffer[j] = f * (costs[j] / total);
  }
  return exact_win_prob_single(p_buffer, i, horizon);
}

}  // namespace detail

// Belief-averaged win probability Q_i(c_i): the opponents' bids integrate out
// against their (independent) belief masses. Product-grid quadrature for small
// races; seeded Monte Carlo sampling of opponent profiles above
// quadrature_max_miners total miners.
inline ExpectedWinProb expected_win_prob(const AllocationSpec& alloc, double own_cost, int miner,
                                         const std::vector<BeliefDensity>& opponents, int horizon,
                                         const BeliefIntegrationOptions& opts = {}) {
  if (!std::isfinite(own_cost) || own_cost < 0.0) {
    throw std::invalid_argument("own cost must be finite and nonnegative");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (opponents.empty()) throw std::invalid_argument("expected_win_prob needs at least one opponent");
  const int miners = static_cast<int>(opponents.size()) + 1;
  if (miner < 0 || miner >= miners) throw std::invalid_argument("miner index out of range");

  ExpectedWinProb out;
  if (own_cost == 0.0) return out;  // p_i = 0 forces q_i = 0 against every profile

  std::vector<double> costs(static_cast<std::size_t>(miners), 0.0);
  costs[static_cast<std::size_t>(miner)] = own_cost;
  // opponent slot o occupies miner index o, shifted past `miner`
  const auto slot_index = [&](int o) { return o < miner ? o : o + 1; };
  std::vector<double> p_buffer;

  if (miners <= opts.quadrature_max_miners) {
    const int n_opp = miners - 1;
    std::vector<int> idx(static_cast<std::size_t>(n_opp), 0);
    double acc = 0.0;
    long long evaluated = 0;
    while (true) {
      double weight = 1.0;
      for (int o = 0; o < n_opp; ++o) {
        const auto& d = opponents[static_cast<std::size_t>(o)];
        weight *= d.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(o)])];
      }
      if (weight > 0.0) {
        for (int o = 0; o < n_opp; ++o) {
          const auto& d = opponents[static_cast<std::size_t>(o)];
          costs[static_cast<std::size_t>(slot_index(o))] =
              d.grid.points[static_cast<std::size_t>(idx[static_cast<std::size_t>(o)])];
        }
        acc += weight * detail::win_prob_at_costs(alloc, costs, miner, horizon, p_buffer);
        ++evaluated;
      }
      int d = n_opp - 1;
      while (d >= 0 &&
             ++idx[static_cast<std::size_t>(d)] == opponents[static_cast<std::size_t>(d)].size()) {
        idx[static_cast<std::size_t>(d)] = 0;
        --d;
      }
      if (d < 0) break;
    }
    out.value = acc;
    out.samples = evaluated;
    return out;
  }

  if (!opts.seed) {
    throw SeedRequiredError("Monte Carlo belief integration requires a seed");
  }
  // inverse-CDF sampling per opponent
  std::vector<std::vector<double>> cdfs(opponents.size());
  for (std::size_t o = 0; o < opponents.size(); ++o) {
    const auto& w = opponents[o].weights;
    cdfs[o].resize(w.size());
    double run = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      run += w[k];
      cdfs[o][k] = run;
    }
    cdfs[o].back() = 1.0;
  }
  std::mt19937_64 rng(detail::substream_seed(*opts.seed, 0x51700ULL));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long long s = 0; s < opts.mc_samples; ++s) {
    for (std::size_t o = 0; o < opponents.size(); ++o) {
      const double u = detail::uniform01(rng);
      const auto it = std::upper_bound(cdfs[o].begin(), cdfs[o].end(), u);
      const std::size_t k = std::min(static_cast<std::size_t>(it - cdfs[o].begin()), cdfs[o].size() - 1);
      costs[static_cast<std::size_t>(slot_index(static_cast<int>(o)))] = opponents[o].grid.points[k];
    }
    const double q = detail::win_prob_at_costs(alloc, costs, miner, horizon, p_buffer);
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(opts.mc_samples);
  out.value = sum / n;
  out.monte_carlo = true;
  out.samples = opts.mc_samples;
  if (opts.mc_samples > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    out.std_err = std::sqrt(var / n);
  }
  return out;
}

// U_i = A * Q_i - K * c_i.
inline double utility(double prize, int horizon, double own_cost, double win_prob) {
  if (!(win_prob >= 0.0 && win_prob <= 1.0)) {
    throw std::invalid_argument("win probability must lie in [0,1]");
  }
  return prize * win_prob - static_cast<double>(horizon) * own_cost;
}

// true iff the miner's participation constraint U_i >= 0 is satisfied.
inline std::vector<bool> rationality_check(const std::vector<double>& utilities) {
  std::vector<bool> ok(utilities.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    ok[i] = utilities[i] >= 0.0;
  }
  return ok;
}

}  // namespace allpay
