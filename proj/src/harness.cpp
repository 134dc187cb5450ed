#include "occsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "occsim/decoder.hpp"
#include "occsim/parallel.hpp"
#include "occsim/rng.hpp"

namespace occsim {

std::size_t capacity_for(double lambda, std::size_t k) {
  // The small offset keeps exact products such as 1.25·64 from rounding up.
  return static_cast<std::size_t>(std::ceil((1.0 + lambda) * static_cast<double>(k) - 1e-9));
}

std::size_t effective_chi(const ExperimentConfig& cfg, double lambda) {
  const std::size_t q = cfg.k * cfg.tau / cfg.alpha;
  if (cfg.tau < 2 || q < 2) return 1;
  std::size_t chi = cfg.chi;
  if (chi == 0) {
    const double wanted = lambda > 0.0 ? std::ceil(2.0 * static_cast<double>(cfg.tau - 1) / lambda - 1e-9) : INFINITY;
    chi = wanted >= static_cast<double>(q) ? q : std::max<std::size_t>(2, static_cast<std::size_t>(wanted));
  }
  return std::clamp<std::size_t>(chi, 1, q - 1);
}

std::vector<double> lambda_range(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("lambda_grid", "step must be positive");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (l == 0) throw ConfigError("l", "must be at least 1");
  if (k == 0) throw ConfigError("k", "must be positive");
  if (alpha == 0) throw ConfigError("alpha", "must be positive");
  if (tau == 0) throw ConfigError("tau", "must be positive");
  try {
    (void)scheme();
  } catch (const std::exception& e) {
    throw ConfigError(tau > 1 ? "tau" : "alpha", e.what());
  }
  if (lambda_grid.empty()) throw ConfigError("lambda_grid", "must list at least one overhead");
  for (double v : lambda_grid)
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("lambda_grid", "overheads must be finite and non-negative");
  if (stop_rule.count == 0) throw ConfigError("stop_rule", "count must be positive");
  if (stop_rule.kind == StopRule::Kind::FixedFailures && stop_rule.max_trials == 0)
    throw ConfigError("stop_rule", "max_trials must be positive");
  if (!(gamma_a > 0.0)) throw ConfigError("gamma_a", "must be positive");
  if (densify) {
    if (!(densify->step > 0.0)) throw ConfigError("densify", "step must be positive");
    if (!(densify->target > 0.0 && densify->target < 1.0)) throw ConfigError("densify", "target must lie in (0, 1)");
  }
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t lambda_index, std::uint64_t t) {
  return derive_seed(master_seed, {lambda_index, t});
}

TrialOutcome run_trial(const ExperimentConfig& cfg, const ChunkingScheme& scheme, std::size_t n, std::size_t chi,
                       std::uint64_t seed) {
  const auto sched = build_worst_case_schedule(cfg.l, n, derive_seed(seed, {1}), cfg.schedule_mode);
  const auto packets = transmit(scheme, sched, derive_seed(seed, {2}), cfg.empty_chunk_policy);
  const double k = static_cast<double>(scheme.k());
  const double q = static_cast<double>(scheme.q());
  TrialOutcome out;
  if (!scheme.overlapped()) {
    const auto d = decode_cc(scheme, packets);
    out.failed = !d.success;
    out.per_true = (k - static_cast<double>(d.recovered.size())) / k;
    out.per_block = out.per_true;  // blocks are the chunks themselves
    const auto bad = std::count(d.per_chunk_decodable.begin(), d.per_chunk_decodable.end(), false);
    out.chunk_frac = static_cast<double>(bad) / q;
    return out;
  }
  const auto d = decode_occ(scheme, packets);
  out.failed = !d.success;
  out.per_true = (k - static_cast<double>(d.recovered.size())) / k;
  const auto h = analyze_hyperchunks(scheme, packets, chi);
  out.per_block = static_cast<double>(h.bad_blocks.size() * scheme.stride()) / k;
  out.chunk_frac = static_cast<double>(h.bad_hyperchunks.size()) / q;
  return out;
}

double SweepPoint::metric(Metric m) const {
  switch (m) {
    case Metric::MER:
      return mer;
    case Metric::PER_true:
      return per_true;
    case Metric::PER_block:
      return per_block;
  }
  return mer;
}

namespace {

SweepPoint run_point(const ExperimentConfig& cfg, const ChunkingScheme& scheme, double lambda,
                     std::size_t lambda_index, std::size_t jobs) {
  SweepPoint pt;
  pt.lambda = lambda;
  pt.n = capacity_for(lambda, cfg.k);
  pt.chi = effective_chi(cfg, lambda);

  const bool fixed_trials = cfg.stop_rule.kind == StopRule::Kind::FixedTrials;
  const std::uint64_t cap = fixed_trials ? cfg.stop_rule.count : cfg.stop_rule.max_trials;
  const std::size_t batch = 32 * resolve_jobs(jobs);

  double sum_true = 0.0, sum_block = 0.0;
  double frac_mean = 0.0, frac_m2 = 0.0;  // Welford
  std::vector<TrialOutcome> outcomes;
  bool done = false;
  while (!done && pt.trials < cap) {
    const std::size_t size = static_cast<std::size_t>(std::min<std::uint64_t>(batch, cap - pt.trials));
    const std::uint64_t first = pt.trials;
    outcomes.assign(size, {});
    parallel_for(size, jobs, [&](std::size_t i) {
      outcomes[i] = run_trial(cfg, scheme, pt.n, pt.chi, trial_seed(cfg.master_seed, lambda_index, first + i));
    });
    for (const auto& o : outcomes) {
      ++pt.trials;
      if (o.failed) ++pt.failures;
      sum_true += o.per_true;
      sum_block += o.per_block;
      const double delta = o.chunk_frac - frac_mean;
      frac_mean += delta / static_cast<double>(pt.trials);
      frac_m2 += delta * (o.chunk_frac - frac_mean);
      if (!fixed_trials && pt.failures >= cfg.stop_rule.count) {
        done = true;
        break;
      }
    }
  }
  const double t = static_cast<double>(pt.trials);
  pt.mer = static_cast<double>(pt.failures) / t;
  pt.mer_ci95 = clopper_pearson(pt.failures, pt.trials);
  pt.per_true = sum_true / t;
  pt.per_block = sum_block / t;
  pt.chunk_frac_mean = frac_mean;
  pt.chunk_frac_std = pt.trials > 1 ? std::sqrt(frac_m2 / (t - 1.0)) : 0.0;
  return pt;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t jobs, const ProgressFn& progress) {
  cfg.validate();
  const auto scheme = cfg.scheme();
  SweepResult sr;
  sr.config = cfg;
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    sr.points.push_back(run_point(cfg, scheme, cfg.lambda_grid[i], i, jobs));
    if (progress) progress(sr.points.back());
  }
  std::stable_sort(sr.points.begin(), sr.points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.lambda < b.lambda; });

  if (cfg.densify) {
    const auto& d = *cfg.densify;
    const auto hit = std::find_if(sr.points.begin(), sr.points.end(),
                                  [&](const SweepPoint& p) { return p.metric(d.metric) <= d.target; });
    if (hit != sr.points.begin() && hit != sr.points.end()) {
      const double lo = std::prev(hit)->lambda;
      const double hi = hit->lambda;
      std::size_t index = cfg.lambda_grid.size();
      for (double v = lo + d.step; v < hi - 1e-9; v += d.step) {
        sr.points.push_back(run_point(cfg, scheme, v, index++, jobs));
        if (progress) progress(sr.points.back());
      }
      std::stable_sort(sr.points.begin(), sr.points.end(),
                       [](const SweepPoint& a, const SweepPoint& b) { return a.lambda < b.lambda; });
    }
  }
  return sr;
}

double overhead_at_target(const SweepResult& sr, Metric metric, double target) {
  const auto& pts = sr.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double m = pts[i].metric(metric);
    if (m > target) continue;
    if (m == target) return pts[i].lambda;
    if (i == 0)
      throw TargetNotBracketed(fmt::format("{} is already below {} at the first grid point", metric_name(metric), target));
    const double m0 = pts[i - 1].metric(metric);
    const double x0 = pts[i - 1].lambda;
    const double x1 = pts[i].lambda;
    if (m <= 0.0) return x0 + (m0 - target) / (m0 - m) * (x1 - x0);
    const double f = (std::log(m0) - std::log(target)) / (std::log(m0) - std::log(m));
    return x0 + f * (x1 - x0);
  }
  throw TargetNotBracketed(fmt::format("{} never reaches {} on the grid", metric_name(metric), target));
}

ConcentrationReport concentration_report(const ExperimentConfig& cfg, std::size_t repeats, std::size_t jobs) {
  cfg.validate();
  if (cfg.tau != 1) throw ConfigError("tau", "concentration report needs tau = 1");
  const auto scheme = cfg.scheme();
  ConcentrationReport rep;
  rep.repeats = repeats;
  rep.lambda = cfg.lambda_grid.front();
  const std::size_t n = capacity_for(rep.lambda, cfg.k);
  rep.fractions.assign(repeats, 0.0);
  parallel_for(repeats, jobs, [&](std::size_t r) {
    rep.fractions[r] = run_trial(cfg, scheme, n, 1, derive_seed(cfg.master_seed, {0xc0ce, r})).chunk_frac;
  });
  if (repeats == 0) return rep;
  double sum = 0.0;
  for (double f : rep.fractions) sum += f;
  rep.mean = sum / static_cast<double>(repeats);
  double ss = 0.0;
  std::size_t deviating = 0;
  for (double f : rep.fractions) {
    ss += (f - rep.mean) * (f - rep.mean);
    if (std::abs(f - rep.mean) > cfg.gamma_a) ++deviating;
  }
  rep.stddev = repeats > 1 ? std::sqrt(ss / static_cast<double>(repeats - 1)) : 0.0;
  rep.deviation_probability = static_cast<double>(deviating) / static_cast<double>(repeats);
  return rep;
}

namespace {

constexpr const char* kCsvHeader =
    "lambda,n,trials,failures,mer,mer_lo,mer_hi,per_true,per_block,chunk_frac_mean,chunk_frac_std,seed";

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& sr) {
  os << kCsvHeader << '\n';
  for (const auto& p : sr.points) {
    os << fmt::format("{:.6g},{},{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{}\n", p.lambda, p.n,
                      p.trials, p.failures, p.mer, p.mer_ci95.lo, p.mer_ci95.hi, p.per_true, p.per_block,
                      p.chunk_frac_mean, p.chunk_frac_std, sr.config.master_seed);
  }
}

SweepResult read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("not a sweep CSV: unexpected header");
  SweepResult sr;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 12) throw std::runtime_error(fmt::format("sweep CSV line {} has {} fields", lineno, f.size()));
    SweepPoint p;
    p.lambda = std::stod(f[0]);
    p.n = std::stoull(f[1]);
    p.trials = std::stoull(f[2]);
    p.failures = std::stoull(f[3]);
    p.mer = std::stod(f[4]);
    p.mer_ci95 = {std::stod(f[5]), std::stod(f[6])};
    p.per_true = std::stod(f[7]);
    p.per_block = std::stod(f[8]);
    p.chunk_frac_mean = std::stod(f[9]);
    p.chunk_frac_std = std::stod(f[10]);
    sr.config.master_seed = std::stoull(f[11]);
    sr.points.push_back(p);
  }
  return sr;
}

std::string sweep_file_name(const ExperimentConfig& cfg) {
  return fmt::format("sweep_l{}_k{}_a{}_t{}.csv", cfg.l, cfg.k, cfg.alpha, cfg.tau);
}

Metric parse_metric(const std::string& s) {
  if (s == "mer") return Metric::MER;
  if (s == "per_true") return Metric::PER_true;
  if (s == "per_block") return Metric::PER_block;
  throw ConfigError("metric", "expected mer, per_true or per_block, got '" + s + "'");
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::MER:
      return "mer";
    case Metric::PER_true:
      return "per_true";
    case Metric::PER_block:
      return "per_block";
  }
  return "mer";
}

namespace {

using nlohmann::json;

template <typename T>
T read_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::size_t> read_size_list(const json& j, const char* key, std::vector<std::size_t> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  try {
    if (v.is_array()) {
      auto out = v.get<std::vector<std::size_t>>();
      if (out.empty()) throw ConfigError(key, "list must not be empty");
      return out;
    }
    return {v.get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<double> read_lambda_grid(const json& j) {
  if (!j.contains("lambda_grid")) return lambda_range(0.0, 3.0, 0.25);
  const auto& g = j.at("lambda_grid");
  try {
    if (g.is_array()) return g.get<std::vector<double>>();
    if (g.is_object())
      return lambda_range(g.value("start", 0.0), g.value("stop", 3.0), g.value("step", 0.25));
  } catch (const json::exception& e) {
    throw ConfigError("lambda_grid", e.what());
  }
  throw ConfigError("lambda_grid", "expected a list of overheads or {start, stop, step}");
}

}  // namespace

std::vector<ExperimentConfig> configs_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  if (j.contains("experiments")) {
    // Manifest form: one fully resolved config per experiment.
    const auto& list = j.at("experiments");
    if (!list.is_array() || list.empty()) throw ConfigError("experiments", "must be a non-empty list");
    std::vector<ExperimentConfig> out;
    for (const auto& e : list) {
      if (e.contains("experiments")) throw ConfigError("experiments", "entries may not nest");
      auto one = configs_from_json(e);
      out.insert(out.end(), one.begin(), one.end());
    }
    return out;
  }
  const json& c = j.contains("config") && j.at("config").is_object() ? j.at("config") : j;

  ExperimentConfig base;
  base.l = read_field<std::size_t>(c, "l", base.l);
  base.chi = read_field<std::size_t>(c, "chi", base.chi);
  base.lambda_grid = read_lambda_grid(c);
  base.master_seed = read_field<std::uint64_t>(c, "master_seed", base.master_seed);
  base.gamma_a = read_field<double>(c, "gamma_a", base.gamma_a);

  if (c.contains("stop_rule")) {
    const auto& s = c.at("stop_rule");
    if (!s.is_object()) throw ConfigError("stop_rule", "expected an object");
    const auto type = read_field<std::string>(s, "type", "fixed_failures");
    if (type == "fixed_trials")
      base.stop_rule.kind = StopRule::Kind::FixedTrials;
    else if (type == "fixed_failures")
      base.stop_rule.kind = StopRule::Kind::FixedFailures;
    else
      throw ConfigError("stop_rule", "type must be fixed_trials or fixed_failures, got '" + type + "'");
    base.stop_rule.count = read_field<std::uint64_t>(s, "count", base.stop_rule.count);
    base.stop_rule.max_trials = read_field<std::uint64_t>(s, "max_trials", base.stop_rule.max_trials);
  }

  const auto policy = read_field<std::string>(c, "empty_chunk_policy", "zero_packet");
  if (policy == "zero_packet")
    base.empty_chunk_policy = EmptyChunkPolicy::ZeroPacket;
  else if (policy == "resample")
    base.empty_chunk_policy = EmptyChunkPolicy::Resample;
  else
    throw ConfigError("empty_chunk_policy", "expected zero_packet or resample, got '" + policy + "'");

  const auto mode = read_field<std::string>(c, "schedule_mode", "canonical");
  if (mode == "canonical")
    base.schedule_mode = ScheduleMode::Canonical;
  else if (mode == "randomized_interleave")
    base.schedule_mode = ScheduleMode::RandomizedInterleave;
  else
    throw ConfigError("schedule_mode", "expected canonical or randomized_interleave, got '" + mode + "'");

  if (c.contains("densify") && !c.at("densify").is_null()) {
    const auto& d = c.at("densify");
    if (!d.is_object()) throw ConfigError("densify", "expected an object");
    Densify dn;
    dn.metric = parse_metric(read_field<std::string>(d, "metric", "mer"));
    dn.target = read_field<double>(d, "target", dn.target);
    dn.step = read_field<double>(d, "step", dn.step);
    base.densify = dn;
  }

  const auto ks = read_size_list(c, "k", {base.k});
  const auto taus = read_size_list(c, "tau", {base.tau});
  if (c.contains("alpha") && c.contains("alpha_divisor"))
    throw ConfigError("alpha", "give either alpha or alpha_divisor, not both");
  const bool by_divisor = c.contains("alpha_divisor");
  const auto alphas = by_divisor ? read_size_list(c, "alpha_divisor", {}) : read_size_list(c, "alpha", {base.alpha});

  std::vector<ExperimentConfig> out;
  for (std::size_t k : ks) {
    for (std::size_t a : alphas) {
      for (std::size_t t : taus) {
        ExperimentConfig cfg = base;
        cfg.k = k;
        if (by_divisor) {
          if (a == 0 || k % a != 0) throw ConfigError("alpha_divisor", fmt::format("{} does not divide k = {}", a, k));
          cfg.alpha = k / a;
        } else {
          cfg.alpha = a;
        }
        cfg.tau = t;
        cfg.validate();
        out.push_back(cfg);
      }
    }
  }
  return out;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["l"] = cfg.l;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha;
  j["tau"] = cfg.tau;
  j["chi"] = cfg.chi;
  j["lambda_grid"] = cfg.lambda_grid;
  j["stop_rule"] = {
      {"type", cfg.stop_rule.kind == StopRule::Kind::FixedTrials ? "fixed_trials" : "fixed_failures"},
      {"count", cfg.stop_rule.count},
      {"max_trials", cfg.stop_rule.max_trials}};
  j["empty_chunk_policy"] = cfg.empty_chunk_policy == EmptyChunkPolicy::ZeroPacket ? "zero_packet" : "resample";
  j["schedule_mode"] = cfg.schedule_mode == ScheduleMode::Canonical ? "canonical" : "randomized_interleave";
  j["master_seed"] = cfg.master_seed;
  j["gamma_a"] = cfg.gamma_a;
  if (cfg.densify)
    j["densify"] = {{"metric", metric_name(cfg.densify->metric)},
                    {"target", cfg.densify->target},
                    {"step", cfg.densify->step}};
  return j;
}

}  // namespace occsim
