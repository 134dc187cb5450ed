#include "occsim/bounds.hpp"

#include <cmath>

namespace occsim::bounds {

namespace {

double checked_log2(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string("non-positive argument to log2 in ") + what);
  return std::log2(x);
}

double checked_ln(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string("non-positive argument to ln in ") + what);
  return std::log(x);
}

// c·((l³/μ)·ln(arg))^(1/3)
double capacity_correction(double c, double l, double mu, double ln_arg) {
  if (c == 0.0) return 0.0;
  return c * std::cbrt(l * l * l / mu * checked_ln(ln_arg, "the capacity correction"));
}

}  // namespace

void BoundParams::validate() const {
  if (l == 0) throw DomainError("l must be at least 1");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (alpha == 0) throw DomainError("alpha must be positive");
  if (tau == 0) throw DomainError("tau must be positive");
  if (chi == 0) throw DomainError("chi must be positive");
  if (!(c_hidden >= 0.0)) throw DomainError("c_hidden must be non-negative");
}

CcCondition cc_chunk_failure_condition(const BoundParams& p) {
  p.validate();
  const double l = static_cast<double>(p.l);
  const double alpha = static_cast<double>(p.alpha);
  CcCondition c;
  c.mu = (1.0 + p.lambda) * alpha;
  c.eps_dot = p.epsilon / 2.0;
  c.correction = capacity_correction(p.c_hidden, l, c.mu, l * c.mu / p.epsilon);
  c.phi = (1.0 - c.correction) * c.mu;
  if (!(c.phi > 0.0)) throw DomainError("phi is not positive; the capacity correction exceeds 1");
  c.path_term = l * checked_log2(l * c.phi / c.eps_dot, "l*log(l*phi/eps_dot)");
  c.epsilon_term = checked_log2(1.0 / p.epsilon, "log(1/eps)");
  c.hop_term = l + 1.0;
  c.rhs = c.phi - c.path_term - c.epsilon_term - c.hop_term;
  c.satisfied = alpha <= c.rhs;
  return c;
}

OccCondition occ_hyperchunk_failure_condition(const BoundParams& p) {
  p.validate();
  if (p.tau < 2) throw DomainError("the hyperchunk condition needs tau >= 2");
  const double l = static_cast<double>(p.l);
  const double alpha = static_cast<double>(p.alpha);
  const double tau = static_cast<double>(p.tau);
  const double chi = static_cast<double>(p.chi);
  OccCondition c;
  c.mu = (1.0 + p.lambda) * alpha / tau;
  c.r = (chi - 1.0) / tau + 1.0;
  c.eps_dot = p.epsilon / 2.0;
  c.correction = capacity_correction(p.c_hidden, l, c.mu, l * c.mu * chi / p.epsilon);
  c.phi = (1.0 - c.correction) * c.mu;
  if (!(c.phi > 0.0)) throw DomainError("phi is not positive; the capacity correction exceeds 1");
  c.lhs = c.r * alpha;
  c.path_term = chi * l * checked_log2(l * c.phi * chi / c.eps_dot, "chi*l*log(l*phi*chi/eps_dot)");
  c.epsilon_term = checked_log2(1.0 / c.eps_dot, "log(1/eps_dot)");
  c.hop_term = chi * l;
  c.rhs = chi * c.phi - c.path_term - c.epsilon_term - c.hop_term;
  c.satisfied = c.lhs <= c.rhs;
  c.gamma = alpha * (tau - 1.0) / tau;
  const double tau_e = tau / (tau - 1.0);
  c.gamma_required = tau_e * tau * std::sqrt(c.r * alpha);
  c.gamma_condition = c.gamma >= c.gamma_required;
  return c;
}

OuterBounds theorem_outer_bounds(double epsilon, std::size_t q, std::size_t chi, std::size_t tau) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  if (q == 0 || chi == 0 || tau == 0) throw DomainError("q, chi and tau must be positive");
  const double exponent = static_cast<double>(chi + tau - 1);
  OuterBounds b;
  b.per = {std::pow(epsilon, exponent), epsilon * epsilon};
  const double qd = static_cast<double>(q);
  b.mer = {b.per.lo * qd, b.per.hi * qd};
  return b;
}

double aperture_lower_bound(const BoundParams& p, Mode mode) {
  p.validate();
  const double ratio = static_cast<double>(p.l) / p.lambda;
  const double cube = ratio * ratio * ratio;
  const double base = static_cast<double>(p.l) / (p.lambda * p.epsilon);
  if (mode == Mode::CC) return p.c_hidden * cube * checked_ln(base, "the CC aperture order");
  const double tau = static_cast<double>(p.tau);
  return p.c_hidden * cube * tau * checked_ln(base * tau, "the OCC aperture order");
}

nlohmann::json to_json(const BoundParams& p) {
  return {{"l", p.l},         {"lambda", p.lambda}, {"epsilon", p.epsilon}, {"alpha", p.alpha},
          {"tau", p.tau},     {"chi", p.chi},       {"c_hidden", p.c_hidden}};
}

nlohmann::json to_json(const CcCondition& c) {
  return {{"mu", c.mu},
          {"eps_dot", c.eps_dot},
          {"correction", c.correction},
          {"phi", c.phi},
          {"terms", {{"l_log2_l_phi_over_eps_dot", c.path_term},
                     {"log2_one_over_eps", c.epsilon_term},
                     {"l_plus_1", c.hop_term}}},
          {"rhs", c.rhs},
          {"satisfied", c.satisfied}};
}

nlohmann::json to_json(const OccCondition& c) {
  return {{"mu", c.mu},
          {"r", c.r},
          {"eps_dot", c.eps_dot},
          {"correction", c.correction},
          {"phi", c.phi},
          {"lhs", c.lhs},
          {"terms", {{"chi_l_log2_l_phi_chi_over_eps_dot", c.path_term},
                     {"log2_one_over_eps_dot", c.epsilon_term},
                     {"chi_l", c.hop_term}}},
          {"rhs", c.rhs},
          {"satisfied", c.satisfied},
          {"gamma", c.gamma},
          {"gamma_required", c.gamma_required},
          {"gamma_condition", c.gamma_condition}};
}

nlohmann::json to_json(const OuterBounds& b) {
  return {{"mer", {b.mer.lo, b.mer.hi}}, {"per", {b.per.lo, b.per.hi}}};
}

}  // namespace occsim::bounds
