#include "spinecho/coin_game.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spinecho/parallel.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

void CoinParams::validate() const {
  if (n_coins < 2) throw std::invalid_argument("coin game: N must be >= 2");
  if (k_flipped < 0 || k_flipped > n_coins) {
    throw std::invalid_argument("coin game: k must lie in [0, N]");
  }
  if (m_swaps < 0) throw std::invalid_argument("coin game: m must be >= 0");
  if (trials < 1) throw std::invalid_argument("coin game: trials must be >= 1");
}

double successful_swap_probability(int n, int k) {
  if (n < 2) throw std::invalid_argument("successful_swap_probability: N must be >= 2");
  if (k < 0 || k > n) throw std::invalid_argument("successful_swap_probability: bad k");
  const double kn = static_cast<double>(k) * n;
  const double k2 = static_cast<double>(k) * k;
  return 2.0 * (kn - k2) / (static_cast<double>(n) * n - n);
}

double overlap_amplitude(int n, int k, int m) {
  const double p = successful_swap_probability(n, k);
  const double base = 1.0 - (2.0 * m / static_cast<double>(n)) * p;
  const double clamped = std::max(0.0, base);
  return clamped * clamped;
}

namespace {

constexpr long kChunkTrials = 4096;

// One game; returns the fraction of coins matching the initial state.
double play(SplitMix64& rng, int n, int k, int m, std::vector<char>& state,
            std::vector<int>& subset, std::vector<int>& scratch) {
  std::fill(state.begin(), state.end(), 0);
  // uniform k-subset by partial Fisher-Yates over scratch indices
  for (int i = 0; i < n; ++i) scratch[static_cast<size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(scratch[static_cast<size_t>(i)], scratch[static_cast<size_t>(j)]);
    subset[static_cast<size_t>(i)] = scratch[static_cast<size_t>(i)];
  }
  for (int i = 0; i < k; ++i) state[static_cast<size_t>(subset[static_cast<size_t>(i)])] ^= 1;
  for (int s = 0; s < m; ++s) {
    const int a = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    int b = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - 1)));
    if (b >= a) ++b;  // distinct positions
    std::swap(state[static_cast<size_t>(a)], state[static_cast<size_t>(b)]);
  }
  for (int i = 0; i < k; ++i) state[static_cast<size_t>(subset[static_cast<size_t>(i)])] ^= 1;
  int matches = 0;
  for (int i = 0; i < n; ++i) matches += state[static_cast<size_t>(i)] == 0 ? 1 : 0;
  return static_cast<double>(matches) / n;
}

}  // namespace

CoinResult coin_monte_carlo(const CoinParams& p, unsigned n_threads) {
  p.validate();
  const long n_chunks = (p.trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<double> chunk_sum(static_cast<size_t>(n_chunks), 0.0);
  std::vector<double> chunk_sum2(static_cast<size_t>(n_chunks), 0.0);

  parallel_for(static_cast<size_t>(n_chunks), n_threads, [&](size_t chunk) {
    SplitMix64 rng = SplitMix64::substream(p.seed, chunk);
    const long begin = static_cast<long>(chunk) * kChunkTrials;
    const long count = std::min(kChunkTrials, p.trials - begin);
    std::vector<char> state(static_cast<size_t>(p.n_coins));
    std::vector<int> subset(static_cast<size_t>(std::max(1, p.k_flipped)));
    std::vector<int> scratch(static_cast<size_t>(p.n_coins));
    double acc = 0.0, acc2 = 0.0;
    for (long i = 0; i < count; ++i) {
      const double o = play(rng, p.n_coins, p.k_flipped, p.m_swaps, state, subset, scratch);
      acc += o;
      acc2 += o * o;
    }
    chunk_sum[chunk] = acc;
    chunk_sum2[chunk] = acc2;
  });

  double total = 0.0, total2 = 0.0;
  for (size_t i = 0; i < chunk_sum.size(); ++i) {
    total += chunk_sum[i];
    total2 += chunk_sum2[i];
  }
  const double n = static_cast<double>(p.trials);
  const double mean_frac = total / n;
  double se_frac = 0.0;
  if (p.trials > 1) {
    const double var = std::max(0.0, (total2 - n * mean_frac * mean_frac) / (n - 1.0));
    se_frac = std::sqrt(var / n);
  }
  // squared mean matching fraction, matching the closed form's squared
  // amplitude; standard error by the delta method
  const double estimate = mean_frac * mean_frac;
  const double se = 2.0 * mean_frac * se_frac;
  return CoinResult{overlap_amplitude(p.n_coins, p.k_flipped, p.m_swaps), estimate, se};
}

}  // namespace spinecho
