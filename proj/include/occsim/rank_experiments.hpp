#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "occsim/gf2.hpp"
#include "occsim/stats.hpp"

namespace occsim {

class SpecViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// n × k random binary matrix whose rows are uniform on one aperture of α
/// columns. Apertures start every α-γ columns. Symmetric apertures wrap
/// end-around (χ = k/(α-γ)); asymmetric ones stop at column k
/// (χ = (k-γ)/(α-γ)). Regular matrices give each aperture n/χ rows,
/// irregular ones draw each row's aperture uniformly.
struct BandedMatrixSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t alpha = 0;
  std::size_t gamma = 0;
  bool regular = false;
  bool symmetric = true;

  /// Throws SpecViolation naming the first broken constraint.
  void validate() const;
  /// Number of apertures. Requires a valid spec.
  std::size_t chi() const;
  std::size_t aperture_start(std::size_t i) const { return i * (alpha - gamma); }
  std::string variant_name() const;
};

/// One sample. If `apertures` is given it receives each row's aperture index.
gf2::BitMatrix build_banded(const BandedMatrixSpec& spec, std::uint64_t seed,
                            std::vector<std::size_t>* apertures = nullptr);

struct RankTrialResult {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;  // samples with rank < k
  double p_hat = 0.0;
  Interval ci95;
};

/// Monte Carlo estimate of Pr[rank < k]. Trial t uses seed derive(seed, t), so
/// the result does not depend on `jobs`.
RankTrialResult estimate_failure(const BandedMatrixSpec& spec, std::uint64_t trials, std::uint64_t seed,
                                 std::size_t jobs = 1);

/// Arithmetic check of whether a spec lies in the regime where banded
/// matrices are expected to be full rank with probability >= 1 - ε.
struct ConjectureVerdict {
  double log_term = 0.0;            // log2(1/ε)
  bool capacity_ok = false;         // k <= n - log2(1/ε)
  double overlap_factor = 0.0;      // 2 (symmetric) or τ_e·τ (asymmetric)
  std::size_t gamma_threshold = 0;  // ⌈overlap_factor·√k⌉
  bool overlap_ok = false;          // γ >= gamma_threshold
  bool in_regime() const { return capacity_ok && overlap_ok; }
};

/// τ is read off the geometry as α/(α-γ). Throws std::invalid_argument
/// unless 0 < ε < 1.
ConjectureVerdict conjecture_regime_check(const BandedMatrixSpec& spec, double epsilon);

void write_rank_csv_header(std::ostream& os);
void write_rank_csv_row(std::ostream& os, const BandedMatrixSpec& spec, const RankTrialResult& r, std::uint64_t seed);

}  // namespace occsim
