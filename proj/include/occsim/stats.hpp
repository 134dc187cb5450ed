#pragma once

#include <cstddef>
#include <cstdint>

namespace occsim {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Exact (Clopper-Pearson) two-sided binomial interval for `successes` out
/// of `trials` at the given confidence level. trials == 0 gives [0, 1].
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

/// Binomial standard deviation of a proportion p over n trials.
double binomial_sigma(double p, std::uint64_t n);

}  // namespace occsim
