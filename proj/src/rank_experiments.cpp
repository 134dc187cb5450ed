#include "occsim/rank_experiments.hpp"

#include <atomic>
#include <cmath>

#include <fmt/format.h>

#include "occsim/parallel.hpp"
#include "occsim/rng.hpp"

namespace occsim {

void BandedMatrixSpec::validate() const {
  if (k == 0 || alpha == 0) throw SpecViolation("k and alpha must be positive");
  if (gamma >= alpha) throw SpecViolation(fmt::format("gamma ({}) must be smaller than alpha ({})", gamma, alpha));
  if (alpha > k) throw SpecViolation(fmt::format("alpha ({}) exceeds k ({})", alpha, k));
  const std::size_t stride = alpha - gamma;
  if (symmetric) {
    if (k % stride != 0)
      throw SpecViolation(fmt::format("alpha - gamma ({}) does not divide k ({})", stride, k));
  } else {
    if ((k - gamma) % stride != 0)
      throw SpecViolation(fmt::format("alpha - gamma ({}) does not divide k - gamma ({})", stride, k - gamma));
  }
  if (regular && n % chi() != 0) throw SpecViolation(fmt::format("chi ({}) does not divide n ({})", chi(), n));
}

std::size_t BandedMatrixSpec::chi() const {
  const std::size_t stride = alpha - gamma;
  return symmetric ? k / stride : (k - gamma) / stride;
}

std::string BandedMatrixSpec::variant_name() const {
  return std::string(regular ? "regular" : "irregular") + "-" + (symmetric ? "symmetric" : "asymmetric");
}

gf2::BitMatrix build_banded(const BandedMatrixSpec& spec, std::uint64_t seed, std::vector<std::size_t>* apertures) {
  spec.validate();
  const std::size_t chi = spec.chi();
  Rng rng(seed);
  gf2::BitMatrix m(spec.n, spec.k);
  if (apertures) apertures->assign(spec.n, 0);
  for (std::size_t r = 0; r < spec.n; ++r) {
    const std::size_t i = spec.regular ? r / (spec.n / chi) : uniform_below(rng, chi);
    m.row(r) = gf2::random_bit_vector(spec.k, spec.aperture_start(i), spec.alpha, rng);
    if (apertures) (*apertures)[r] = i;
  }
  return m;
}

RankTrialResult estimate_failure(const BandedMatrixSpec& spec, std::uint64_t trials, std::uint64_t seed,
                                 std::size_t jobs) {
  spec.validate();
  std::atomic<std::uint64_t> failures{0};
  parallel_for(trials, jobs, [&](std::size_t t) {
    std::vector<std::size_t> ap;
    const auto m = build_banded(spec, derive_seed(seed, {t}), &ap);
    std::vector<std::size_t> starts(ap.size());
    for (std::size_t r = 0; r < ap.size(); ++r) starts[r] = spec.aperture_start(ap[r]);
    const auto rep = gf2::banded_eliminate(m, spec.alpha, spec.symmetric, starts);
    if (rep.rank < spec.k) failures.fetch_add(1, std::memory_order_relaxed);
  });
  RankTrialResult r;
  r.trials = trials;
  r.failures = failures.load();
  r.p_hat = trials == 0 ? 0.0 : static_cast<double>(r.failures) / static_cast<double>(trials);
  r.ci95 = clopper_pearson(r.failures, trials);
  return r;
}

ConjectureVerdict conjecture_regime_check(const BandedMatrixSpec& spec, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  ConjectureVerdict v;
  v.log_term = std::log2(1.0 / epsilon);
  v.capacity_ok = static_cast<double>(spec.k) <= static_cast<double>(spec.n) - v.log_term;
  if (spec.symmetric) {
    v.overlap_factor = 2.0;
  } else {
    // τ = α/(α-γ) and τ_e = τ/(τ-1), so τ_e·τ = τ²/(τ-1).
    const double tau = static_cast<double>(spec.alpha) / static_cast<double>(spec.alpha - spec.gamma);
    v.overlap_factor = tau > 1.0 ? tau * tau / (tau - 1.0) : INFINITY;
  }
  const double threshold = v.overlap_factor * std::sqrt(static_cast<double>(spec.k));
  // Round away tiny float noise before taking the ceiling.
  v.gamma_threshold = std::isfinite(threshold) ? static_cast<std::size_t>(std::ceil(threshold - 1e-9)) : SIZE_MAX;
  v.overlap_ok = spec.gamma >= v.gamma_threshold;
  return v;
}

void write_rank_csv_header(std::ostream& os) {
  os << "variant,n,k,alpha,gamma,regular,symmetric,chi,trials,failures,p_hat,ci_low,ci_high,seed\n";
}

void write_rank_csv_row(std::ostream& os, const BandedMatrixSpec& spec, const RankTrialResult& r, std::uint64_t seed) {
  os << fmt::format("{},{},{},{},{},{},{},{},{},{},{:.6g},{:.6g},{:.6g},{}\n", spec.variant_name(), spec.n, spec.k,
                    spec.alpha, spec.gamma, spec.regular ? 1 : 0, spec.symmetric ? 1 : 0, spec.chi(), r.trials,
                    r.failures, r.p_hat, r.ci95.lo, r.ci95.hi, seed);
}

}  // namespace occsim
