#pragma once

#include <cstddef>
#include <stdexcept>

#include <json.hpp>

#include "occsim/stats.hpp"

namespace occsim::bounds {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs of the analytic thresholds. `c_hidden` stands in for the constant
/// hidden in the O(·) correction of the flow capacity and in the Ω(·)
/// aperture orders; it is a user knob with no reference value. Zero turns
/// the correction off.
struct BoundParams {
  std::size_t l = 4;
  double lambda = 1.0;
  double epsilon = 0.01;
  std::size_t alpha = 64;
  std::size_t tau = 1;
  std::size_t chi = 1;
  double c_hidden = 1.0;

  /// Throws DomainError for l = 0, λ <= 0, ε outside (0,1), α = 0, τ = 0,
  /// χ = 0 or c_hidden < 0.
  void validate() const;
};

/// Per-chunk decodability condition for chunked codes:
///   α <= φ - l·log2(lφ/ε̇) - log2(1/ε) - l - 1,
///   φ = (1 - c·((l³/μ)·ln(lμ/ε))^(1/3))·μ,  μ = (1+λ)α,  ε̇ = ε/2.
struct CcCondition {
  double mu = 0.0;
  double eps_dot = 0.0;
  double correction = 0.0;  // c·((l³/μ)·ln(lμ/ε))^(1/3)
  double phi = 0.0;
  double path_term = 0.0;     // l·log2(lφ/ε̇)
  double epsilon_term = 0.0;  // log2(1/ε)
  double hop_term = 0.0;      // l + 1
  double rhs = 0.0;
  bool satisfied = false;
};

/// τ is ignored (treated as 1).
CcCondition cc_chunk_failure_condition(const BoundParams& p);

/// Hyperchunk decodability condition for overlapped chunked codes:
///   rα <= χφ - χl·log2(lφχ/ε̇) - log2(1/ε̇) - χl,
///   φ = (1 - c·((l³/μ)·ln(lμχ/ε))^(1/3))·μ,  μ = (1+λ)α/τ,  r = (χ-1)/τ + 1,
/// valid when γ >= τ_e·τ·√(rα).
struct OccCondition {
  double mu = 0.0;
  double r = 0.0;
  double eps_dot = 0.0;
  double correction = 0.0;
  double phi = 0.0;
  double lhs = 0.0;
  double path_term = 0.0;     // χl·log2(lφχ/ε̇)
  double epsilon_term = 0.0;  // log2(1/ε̇)
  double hop_term = 0.0;      // χl
  double rhs = 0.0;
  bool satisfied = false;
  double gamma = 0.0;
  double gamma_required = 0.0;  // τ_e·τ·√(rα)
  bool gamma_condition = false;
};

/// Requires τ >= 2.
OccCondition occ_hyperchunk_failure_condition(const BoundParams& p);

struct OuterBounds {
  Interval mer;  // [ε^(χ+τ-1)·q, ε²·q]
  Interval per;  // [ε^(χ+τ-1), ε²]
};

/// Interval in which the tight outer bounds on block loss lie for overlapped
/// codes. Requires 0 <= ε < 1.
OuterBounds theorem_outer_bounds(double epsilon, std::size_t q, std::size_t chi, std::size_t tau);

enum class Mode { CC, OCC };

/// Order-of-magnitude aperture requirement, c·(l/λ)³·ln(l/(λε)) for CC and
/// c·(l/λ)³·τ·ln(lτ/(λε)) for OCC. Advisory only: the true constant is unknown.
double aperture_lower_bound(const BoundParams& p, Mode mode);

nlohmann::json to_json(const BoundParams& p);
nlohmann::json to_json(const CcCondition& c);
nlohmann::json to_json(const OccCondition& c);
nlohmann::json to_json(const OuterBounds& b);

}  // namespace occsim::bounds
