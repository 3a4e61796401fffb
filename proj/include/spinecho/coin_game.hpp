// Classical coin game: N coins, k flipped twice with m random swaps in
// between. Models echo loss from state swaps between the flipped and
// unflipped groups.
#ifndef SPINECHO_COIN_GAME_HPP
#define SPINECHO_COIN_GAME_HPP

#include <cstdint>

#include "spinecho/types.hpp"

namespace spinecho {

struct CoinParams {
  int n_coins = 15;
  int k_flipped = 0;
  int m_swaps = 0;
  long trials = 100000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CoinResult {
  double analytic;   // closed-form overlap amplitude
  double mc;         // Monte Carlo overlap estimate
  double mc_stderr;  // standard error of the estimate
};

// Probability that one random transposition swaps a flipped with an
// unflipped coin: 2 (kN - k^2) / (N^2 - N).
double successful_swap_probability(int n, int k);

// Closed-form overlap amplitude (1 - (2m/N) P_ssw)^2, with the base clamped
// at 0 where the linearized swap count overshoots.
double overlap_amplitude(int n, int k, int m);

// Simulates the game. Per trial: flip a uniform random k-subset, apply m
// uniform random transpositions of distinct positions, flip the same k
// positions again, and score the fraction of coins matching the initial
// all-heads state. The overlap estimate is the squared mean matching
// fraction, mirroring the squared-amplitude semantics of the closed form;
// a perfect echo scores exactly 1. Deterministic for a fixed seed and any
// thread count (trials are chunked and each chunk derives its own
// substream).
CoinResult coin_monte_carlo(const CoinParams& p, unsigned n_threads = 0);

}  // namespace spinecho

#endif  // SPINECHO_COIN_GAME_HPP
