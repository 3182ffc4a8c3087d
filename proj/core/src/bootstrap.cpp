#include "factgauntlet/bootstrap.hpp"

#include <random>

#include "factgauntlet/error.hpp"

namespace factgauntlet {

double paired_bootstrap(std::span<const int> success_a, std::span<const int> success_b,
                        std::size_t resamples, std::uint64_t seed) {
  if (success_a.size() != success_b.size())
    throw ValidationError("paired_bootstrap: success vectors differ in length");
  if (success_a.size() < 2) throw ValidationError("paired_bootstrap needs at least two pairs");
  if (resamples < 1000) throw ValidationError("paired_bootstrap needs at least 1000 resamples");
  for (std::size_t i = 0; i < success_a.size(); ++i) {
    if ((success_a[i] != 0 && success_a[i] != 1) || (success_b[i] != 0 && success_b[i] != 1))
      throw ValidationError("paired_bootstrap: entries must be 0 or 1");
  }

  // Both means share the denominator n, so comparing sums is exact.
  const std::size_t n = success_a.size();
  std::mt19937_64 rng(seed);
  std::size_t not_better = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    long long diff = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = rng() % n;
      diff += success_a[idx] - success_b[idx];
    }
    if (diff <= 0) ++not_better;
  }
  return static_cast<double>(not_better) / static_cast<double>(resamples);
}

}  // namespace factgauntlet
