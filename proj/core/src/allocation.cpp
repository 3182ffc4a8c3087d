#include "factgauntlet/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <boost/multiprecision/cpp_int.hpp>

#include "factgauntlet/error.hpp"

namespace factgauntlet {

namespace {

using boost::multiprecision::cpp_int;

struct Dyadic {
  std::int64_t mantissa;  // w = mantissa * 2^exponent, mantissa > 0
  int exponent;
};

Dyadic decompose(double w) {
  int e = 0;
  const double f = std::frexp(w, &e);  // f in [0.5, 1)
  return {static_cast<std::int64_t>(std::ldexp(f, std::numeric_limits<double>::digits)),
          e - std::numeric_limits<double>::digits};
}

}  // namespace

bool all_weights_zero(std::span<const double> weights) noexcept {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
}

std::vector<std::size_t> f2f_allocate(std::size_t m, std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("f2f_allocate: weights must not be empty");
  for (const double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("f2f_allocate: weights must be finite and non-negative");
  }
  if (all_weights_zero(weights)) {
    const std::vector<double> uniform(weights.size(), 1.0);
    return f2f_allocate(m, uniform);
  }

  std::vector<std::optional<Dyadic>> parts(weights.size());
  int min_exponent = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    parts[i] = decompose(weights[i]);
    min_exponent = std::min(min_exponent, parts[i]->exponent);
  }

  std::vector<cpp_int> scaled(weights.size());
  cpp_int total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!parts[i]) continue;
    scaled[i] = cpp_int(parts[i]->mantissa) << (parts[i]->exponent - min_exponent);
    total += scaled[i];
  }

  std::vector<std::size_t> budgets(weights.size(), 0);
  const cpp_int budget = m;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!parts[i]) continue;
    const cpp_int numerator = budget * scaled[i];
    cpp_int q = numerator / total;
    if (q * total != numerator) ++q;
    budgets[i] = q.convert_to<std::size_t>();
  }
  return budgets;
}

}  // namespace factgauntlet
