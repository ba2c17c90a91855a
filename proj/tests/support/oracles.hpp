#pragma once

// Test-side oracles, deliberately independent of the library code paths they
// check: brute-force enumeration of every attempt matrix, and plain central
// finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// P(one attempt matrix); bit (i*K + k) of mask is miner i's attempt k.
inline double outcome_probability(const std::vector<double>& p, int horizon, std::uint64_t mask) {
  double prob = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (int k = 0; k < horizon; ++k) {
      const bool hit = (mask >> (i * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k))) & 1u;
      prob *= hit ? p[i] : 1.0 - p[i];
    }
  }
  return prob;
}

// Win probabilities by full enumeration over all 2^(N*K) attempt matrices.
// exact-at-k: the matrix's single success lands on attempt K for the winner.
// first-success: earliest successful attempt wins; simultaneous solvers split
// the mass evenly (the tie-break average).
inline std::vector<double> enumerate_win_prob(const std::vector<double>& p, int horizon,
                                              bool first_success = false) {
  const std::size_t miners = p.size();
  const std::size_t bits = miners * static_cast<std::size_t>(horizon);
  if (bits > 24) throw std::invalid_argument("enumeration oracle limited to 2^24 outcomes");
  std::vector<double> q(miners, 0.0);
  const std::uint64_t count = 1ull << bits;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const double prob = outcome_probability(p, horizon, mask);
    if (prob == 0.0) continue;
    if (!first_success) {
      if (__builtin_popcountll(mask) != 1) continue;
      const int bit = __builtin_ctzll(mask);
      const int i = bit / horizon;
      const int k = bit % horizon;
      if (k == horizon - 1) q[static_cast<std::size_t>(i)] += prob;
      continue;
    }
    bool resolved = false;
    for (int k = 0; k < horizon && !resolved; ++k) {
      std::vector<std::size_t> tied;
      for (std::size_t i = 0; i < miners; ++i) {
        if ((mask >> (i * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k))) & 1u) {
          tied.push_back(i);
        }
      }
      if (!tied.empty()) {
        for (std::size_t i : tied) q[i] += prob / static_cast<double>(tied.size());
        resolved = true;
      }
    }
  }
  return q;
}

inline double central_fd(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd_step(double x) { return std::max(1e-6 * std::abs(x), 1e-9); }

// |a - b| within rel * max(|a|, |b|), with an absolute floor for near-zero pairs
inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-12) {
  const double diff = std::abs(a - b);
  return diff <= rel * std::max(std::abs(a), std::abs(b)) || diff <= abs_floor;
}

}  // namespace oracle
