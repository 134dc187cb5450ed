#include "occsim/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace occsim {

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  if (trials == 0) return {0.0, 1.0};
  const double tail = (1.0 - confidence) / 2.0;
  const auto x = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval ci;
  ci.lo = successes == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(x, n - x + 1.0), tail);
  ci.hi = successes == trials ? 1.0
                              : boost::math::quantile(boost::math::beta_distribution<>(x + 1.0, n - x), 1.0 - tail);
  return ci;
}

double binomial_sigma(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace occsim
