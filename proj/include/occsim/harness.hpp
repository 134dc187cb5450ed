#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "occsim/chunking.hpp"
#include "occsim/netsim.hpp"
#include "occsim/stats.hpp"

namespace occsim {

/// Invalid experiment configuration. field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::invalid_argument(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class TargetNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Metric { MER, PER_true, PER_block };

struct StopRule {
  enum class Kind { FixedTrials, FixedFailures };
  Kind kind = Kind::FixedFailures;
  std::uint64_t count = 100;
  /// Trial cap for FixedFailures, so grid points with vanishing error rates
  /// terminate. Ignored by FixedTrials.
  std::uint64_t max_trials = 200000;
};

struct Densify {
  Metric metric = Metric::MER;
  double target = 1e-2;
  double step = 0.05;
};

struct ExperimentConfig {
  std::size_t l = 4;
  std::size_t k = 64;
  std::size_t alpha = 16;
  std::size_t tau = 1;
  /// Hyperchunk size for block accounting; 0 picks max(2, ⌈2(τ-1)/λ⌉) per
  /// grid point. Always clamped to q - 1.
  std::size_t chi = 0;
  std::vector<double> lambda_grid;
  StopRule stop_rule;
  EmptyChunkPolicy empty_chunk_policy = EmptyChunkPolicy::ZeroPacket;
  ScheduleMode schedule_mode = ScheduleMode::Canonical;
  std::uint64_t master_seed = 1;
  /// Deviation threshold used by concentration_report.
  double gamma_a = 0.05;
  /// Extra grid points between the two grid points bracketing a target.
  std::optional<Densify> densify;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  ChunkingScheme scheme() const { return ChunkingScheme::make(k, alpha, tau); }
};

/// ⌈(1+λ)k⌉.
std::size_t capacity_for(double lambda, std::size_t k);
/// Hyperchunk size used at overhead λ.
std::size_t effective_chi(const ExperimentConfig& cfg, double lambda);
/// λ grid start, start+step, ..., up to stop inclusive.
std::vector<double> lambda_range(double start, double stop, double step);

struct TrialOutcome {
  bool failed = false;        // not all k message packets recovered
  double per_true = 0.0;      // fraction of unrecovered message packets
  double per_block = 0.0;     // fraction of packets in bad blocks
  double chunk_frac = 0.0;    // undecodable chunks (τ = 1) or bad hyperchunks (τ >= 2), over q
};

/// One schedule → transmit → decode round with the given seed.
TrialOutcome run_trial(const ExperimentConfig& cfg, const ChunkingScheme& scheme, std::size_t n, std::size_t chi,
                       std::uint64_t seed);

/// Seed of trial t at grid point i.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t lambda_index, std::uint64_t t);

struct SweepPoint {
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t chi = 0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double mer = 0.0;
  Interval mer_ci95;
  double per_true = 0.0;
  double per_block = 0.0;
  double chunk_frac_mean = 0.0;
  double chunk_frac_std = 0.0;

  double metric(Metric m) const;
};

struct SweepResult {
  ExperimentConfig config;
  /// Ordered by λ.
  std::vector<SweepPoint> points;
};

/// Called after each grid point completes.
using ProgressFn = std::function<void(const SweepPoint&)>;

/// Runs every grid point until its stop rule is met. Trials are evaluated in
/// parallel batches but accumulated in trial order, so the result is
/// identical for every `jobs`.
SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t jobs = 1, const ProgressFn& progress = {});

/// Smallest λ at which the metric reaches `target`, interpolating log(metric)
/// linearly between the first grid point at or below target and its
/// predecessor (linearly when the metric there is zero). Throws
/// TargetNotBracketed when no such pair exists.
double overhead_at_target(const SweepResult& sr, Metric metric, double target);

struct ConcentrationReport {
  std::size_t repeats = 0;
  double lambda = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  /// Fraction of runs with |fraction - mean| > gamma_a.
  double deviation_probability = 0.0;
  std::vector<double> fractions;
};

/// Independent single runs at the first λ of the grid, recording the fraction
/// of undecodable chunks. Requires tau = 1.
ConcentrationReport concentration_report(const ExperimentConfig& cfg, std::size_t repeats, std::size_t jobs = 1);

// Results files.

void write_sweep_csv(std::ostream& os, const SweepResult& sr);
/// Parses a file written by write_sweep_csv. Only the point data is restored.
SweepResult read_sweep_csv(std::istream& is);
std::string sweep_file_name(const ExperimentConfig& cfg);

// Config files. Keys mirror ExperimentConfig; k, alpha and tau may also be
// lists (or alpha_divisor a list of d with α = k/d), and expand to one
// experiment per combination.

std::vector<ExperimentConfig> configs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
Metric parse_metric(const std::string& s);
std::string metric_name(Metric m);

}  // namespace occsim
