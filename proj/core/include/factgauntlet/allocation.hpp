#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace factgauntlet {

/// Proportional budget split m_k = ceil(m * w_k / sum(w)), evaluated exactly
/// (weights are expanded to big integers, no floating-point rounding).
///
/// The ceiling can make the total exceed m; the overshoot is kept. When every
/// weight is zero the split falls back to uniform weights. Throws
/// ValidationError on empty, negative, or non-finite weights.
std::vector<std::size_t> f2f_allocate(std::size_t m, std::span<const double> weights);

/// True when f2f_allocate would have to fall back to uniform weights.
bool all_weights_zero(std::span<const double> weights) noexcept;

}  // namespace factgauntlet
