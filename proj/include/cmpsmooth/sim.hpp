#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmpsmooth/bandwidth.hpp"
#include "cmpsmooth/estimators.hpp"
#include "cmpsmooth/targets.hpp"

namespace cmpsmooth {

// One estimator column of a study: the kind plus its bandwidth rule.
struct EstimatorSpec {
  enum class Rule { none, fixed, kl, cv, root_n };

  EstimatorKind kind = EstimatorKind::cmp;
  Rule rule = Rule::kl;
  double fixed_h = 1.0;
  long long triangular_arm = 2;

  // canonical descriptor, e.g. "histogram", "cmp:kl", "cmp:fixed:0.5",
  // "triangular:a2:kl", "binomial:rootn"
  std::string label() const;
  // parses the same descriptor grammar; arm defaults to 2, "rootn" maps the
  // sample size to h = n^(-1/2)
  static EstimatorSpec parse(const std::string& text);
};

struct SimConfig {
  explicit SimConfig(TargetSpec t) : target(std::move(t)) {}

  TargetSpec target;
  std::vector<int> sizes = {20, 50, 100};
  int replications = 200;
  std::vector<EstimatorSpec> estimators;
  double tail_level = 0.99;
  bool with_ise = true;
  bool with_tail = true;
  std::uint64_t seed = 1;
  int threads = 1;
  bool keep_replicates = false;  // retain per-replication ISE vectors
  SearchConfig search{};
};

struct SimCell {
  std::string estimator;
  int n = 0;
  int replications = 0;
  int failures = 0;  // fits that threw; excluded from every average
  double ise_mean = 0.0;
  double ise_sd = 0.0;
  double tail_r_mean = 0.0;  // over non-divergent replications; NaN if none
  double tail_r_sd = 0.0;
  int divergent_count = 0;
  double divergent_pct = 0.0;
  double fit_ms_mean = 0.0;
  std::vector<double> ise_values;  // only when keep_replicates
};

struct SimSummary {
  std::string target;
  double tail_level = 0.0;
  long long tail_threshold = 0;
  double tail_true = 0.0;
  std::vector<SimCell> cells;  // estimator-major, sizes in config order

  // csv columns: target,estimator,n,ise_mean,ise_sd,tail_r_mean,tail_r_sd,
  // divergent_pct,fit_ms_mean. Reals at 17 significant digits, absent
  // values as "na". Timing is "na" unless include_timing, keeping default
  // output byte-identical across runs and thread counts.
  std::string to_csv(bool include_timing) const;
  std::string to_json_text(bool include_timing) const;
};

// Applies the spec's bandwidth rule to the sample and fits. Returns the
// estimate plus the selector's result when a bandwidth search actually ran
// (rules kl and cv; empty for none, fixed, and rootn).
std::pair<PmfEstimate, std::optional<BandwidthResult>> fit_estimator(
    const CountSample& sample, const EstimatorSpec& spec,
    const SearchConfig& search = {});

// Runs the full (estimator x size x replication) grid. Every replication
// draws one sample shared by all estimators; the sample depends only on
// (target, seed, n, replication index), never on the estimator list or the
// thread count, so summaries are bit-stable.
SimSummary run_study(const SimConfig& cfg);

}  // namespace cmpsmooth
