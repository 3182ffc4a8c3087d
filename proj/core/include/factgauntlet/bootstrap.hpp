#pragma once

#include <cstdint>
#include <span>

namespace factgauntlet {

/// One-sided paired bootstrap for "a succeeds more often than b".
///
/// Each resample draws n paired indices with replacement from a seeded
/// mt19937_64; the p-value is the fraction of resamples in which mean(a*) is
/// not greater than mean(b*). Entries must be 0 or 1. Throws ValidationError
/// on length mismatch, fewer than two pairs, or fewer than 1000 resamples.
double paired_bootstrap(std::span<const int> success_a, std::span<const int> success_b,
                        std::size_t resamples, std::uint64_t seed);

inline constexpr double kSignificanceLevel = 0.05;

}  // namespace factgauntlet
