#include "cmpsmooth/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/metrics.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

// "na" stands in for anything that has no defined value in this cell.
std::string csv_number(double v) {
  if (!std::isfinite(v)) return "na";
  return format_double17(v);
}

std::vector<std::string> split_colon(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(':', start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_full_double(const std::string& token, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty()) {
    throw domain_error("estimator descriptor '" + whole +
                       "': cannot read a number from '" + token + "'");
  }
  return v;
}

bool is_arm_token(const std::string& t) {
  if (t.size() < 2 || t[0] != 'a') return false;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  return true;
}

const char* rule_word(EstimatorSpec::Rule r) {
  switch (r) {
    case EstimatorSpec::Rule::none:
      return "";
    case EstimatorSpec::Rule::fixed:
      return "fixed";
    case EstimatorSpec::Rule::kl:
      return "kl";
    case EstimatorSpec::Rule::cv:
      return "cv";
    case EstimatorSpec::Rule::root_n:
      return "rootn";
  }
  return "";
}

}  // namespace

std::string EstimatorSpec::label() const {
  if (kind == EstimatorKind::histogram) return "histogram";
  std::string rule_part = rule_word(rule);
  if (rule == Rule::fixed) rule_part += ":" + format_double_shortest(fixed_h);
  switch (kind) {
    case EstimatorKind::cmp:
      return "cmp:" + rule_part;
    case EstimatorKind::triangular:
      return "triangular:a" + std::to_string(triangular_arm) + ":" + rule_part;
    case EstimatorKind::binomial:
      return "binomial:" + rule_part;
    default:
      return "histogram";
  }
}

EstimatorSpec EstimatorSpec::parse(const std::string& text) {
  const std::vector<std::string> tok = split_colon(text);
  EstimatorSpec spec;
  std::size_t i = 1;
  if (tok[0] == "histogram") {
    spec.kind = EstimatorKind::histogram;
    spec.rule = Rule::none;
    if (tok.size() != 1) {
      throw domain_error("estimator descriptor '" + text +
                         "': histogram takes no bandwidth rule");
    }
    return spec;
  }
  if (tok[0] == "cmp") {
    spec.kind = EstimatorKind::cmp;
  } else if (tok[0] == "triangular") {
    spec.kind = EstimatorKind::triangular;
    if (i < tok.size() && is_arm_token(tok[i])) {
      spec.triangular_arm = std::stoll(tok[i].substr(1));
      ++i;
    }
  } else if (tok[0] == "binomial") {
    spec.kind = EstimatorKind::binomial;
  } else {
    throw domain_error("estimator descriptor '" + text +
                       "': unknown estimator '" + tok[0] +
                       "' (expected histogram, cmp, triangular, or binomial)");
  }

  if (i >= tok.size()) {
    throw domain_error("estimator descriptor '" + text +
                       "': missing bandwidth rule (kl, cv, rootn, or fixed:H)");
  }
  const std::string& r = tok[i];
  if (r == "kl") {
    spec.rule = Rule::kl;
  } else if (r == "cv") {
    spec.rule = Rule::cv;
  } else if (r == "rootn") {
    spec.rule = Rule::root_n;
  } else if (r == "fixed") {
    spec.rule = Rule::fixed;
    ++i;
    if (i >= tok.size()) {
      throw domain_error("estimator descriptor '" + text +
                         "': fixed rule needs a bandwidth, e.g. fixed:0.5");
    }
    spec.fixed_h = parse_full_double(tok[i], text);
  } else {
    throw domain_error("estimator descriptor '" + text +
                       "': unknown bandwidth rule '" + r +
                       "' (expected kl, cv, rootn, or fixed:H)");
  }
  ++i;
  if (i != tok.size()) {
    throw domain_error("estimator descriptor '" + text +
                       "': unexpected trailing ':" + tok[i] + "'");
  }

  if (spec.kind == EstimatorKind::binomial &&
      (spec.rule == Rule::kl || spec.rule == Rule::cv)) {
    throw domain_error("estimator descriptor '" + text +
                       "': binomial supports only fixed:H and rootn rules");
  }
  if (spec.kind == EstimatorKind::triangular && spec.rule == Rule::cv) {
    throw domain_error("estimator descriptor '" + text +
                       "': triangular supports only kl, fixed:H, and rootn");
  }
  if (spec.rule == Rule::fixed) {
    if (!std::isfinite(spec.fixed_h) || spec.fixed_h < 0.0) {
      throw domain_error("estimator descriptor '" + text +
                         "': fixed bandwidth must be finite and >= 0");
    }
    if (spec.kind == EstimatorKind::binomial && spec.fixed_h > 1.0) {
      throw domain_error("estimator descriptor '" + text +
                         "': binomial bandwidth must lie in [0, 1]");
    }
  }
  return spec;
}

namespace {

struct RepOutcome {
  bool failed = false;
  double ise = kNan;
  bool divergent = false;
  double r_err = kNan;
  double fit_ms = kNan;
};

std::uint64_t replication_seed(std::uint64_t base, int n, int rep) {
  const std::uint64_t s = splitmix64(
      base ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
  return splitmix64(
      s ^ (0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(rep) + 1)));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return kNan;
  CompensatedSum s;
  for (double x : v) {
    const double d = x - mean;
    s.add(d * d);
  }
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1));
}

void validate_config(const SimConfig& cfg) {
  if (cfg.sizes.empty()) throw domain_error("study: sizes must be non-empty");
  for (int n : cfg.sizes) {
    if (n < 1) throw domain_error("study: every sample size must be >= 1");
  }
  if (cfg.replications < 1) {
    throw domain_error("study: replications must be >= 1");
  }
  if (cfg.estimators.empty()) {
    throw domain_error("study: at least one estimator is required");
  }
  if (cfg.threads < 1) throw domain_error("study: threads must be >= 1");
  if (cfg.with_tail &&
      !(cfg.tail_level > 0.0 && cfg.tail_level < 1.0)) {
    throw domain_error("study: tail level must lie strictly in (0, 1)");
  }
}

}  // namespace

std::pair<PmfEstimate, std::optional<BandwidthResult>> fit_estimator(
    const CountSample& sample, const EstimatorSpec& spec,
    const SearchConfig& search) {
  const double rootn_h =
      1.0 / std::sqrt(static_cast<double>(sample.n()));
  std::optional<BandwidthResult> sel;
  switch (spec.kind) {
    case EstimatorKind::histogram:
      return {fit_histogram(sample), std::nullopt};
    case EstimatorKind::cmp: {
      double h = 0.0;
      switch (spec.rule) {
        case EstimatorSpec::Rule::fixed:
          h = spec.fixed_h;
          break;
        case EstimatorSpec::Rule::root_n:
          h = rootn_h;
          break;
        case EstimatorSpec::Rule::kl:
          sel = select_h_kl(sample, search);
          h = sel->h;
          break;
        case EstimatorSpec::Rule::cv:
          sel = select_h_cv(sample, search);
          h = sel->h;
          break;
        default:
          throw domain_error("cmp estimator needs a bandwidth rule");
      }
      return {fit_cmp_dak(sample, h, search.series, search.support),
              std::move(sel)};
    }
    case EstimatorKind::triangular: {
      double h = 0.0;
      switch (spec.rule) {
        case EstimatorSpec::Rule::fixed:
          h = spec.fixed_h;
          break;
        case EstimatorSpec::Rule::root_n:
          h = rootn_h;
          break;
        case EstimatorSpec::Rule::kl:
          sel = select_h_kl_triangular(sample, spec.triangular_arm, search);
          h = sel->h;
          break;
        default:
          throw domain_error("triangular estimator needs a bandwidth rule");
      }
      return {fit_triangular_dak(sample,
                                 TriangularKernelSpec{spec.triangular_arm, h}),
              std::move(sel)};
    }
    case EstimatorKind::binomial: {
      const double h =
          spec.rule == EstimatorSpec::Rule::fixed ? spec.fixed_h : rootn_h;
      return {fit_binomial_dak(sample, h), std::nullopt};
    }
  }
  throw domain_error("unknown estimator kind");
}

SimSummary run_study(const SimConfig& cfg) {
  validate_config(cfg);
  const TargetSpec& target = cfg.target;

  SimSummary summary;
  summary.target = target.name();
  summary.tail_level = cfg.tail_level;
  summary.tail_threshold = 0;
  summary.tail_true = kNan;
  if (cfg.with_tail) {
    summary.tail_threshold = target.quantile(cfg.tail_level);
    summary.tail_true = target.tail_probability(summary.tail_threshold);
    if (!(summary.tail_true > 0.0)) {
      throw domain_error(
          "study: the target puts zero mass above its level-" +
          format_double17(cfg.tail_level) +
          " quantile, so the tail metric is undefined; lower the level or "
          "disable the tail metric");
    }
  }
  // The truth has mass below 1e-12 past this point, so capping the ISE sum
  // at max(fit support, q_hi) loses nothing at double precision.
  const long long q_hi = target.quantile(1.0 - 1e-12);
  const std::function<double(long long)> truth = [&target](long long x) {
    return target.pmf(x);
  };

  const int num_sizes = static_cast<int>(cfg.sizes.size());
  const int num_est = static_cast<int>(cfg.estimators.size());
  const int reps = cfg.replications;
  const long long total_tasks =
      static_cast<long long>(num_sizes) * static_cast<long long>(reps);
  std::vector<RepOutcome> out(static_cast<std::size_t>(total_tasks) *
                              static_cast<std::size_t>(num_est));
  const auto slot = [num_est, reps](int si, int ei, int r) {
    return (static_cast<std::size_t>(si) * static_cast<std::size_t>(num_est) +
            static_cast<std::size_t>(ei)) *
               static_cast<std::size_t>(reps) +
           static_cast<std::size_t>(r);
  };

  // One replication = one shared sample scored by every estimator. The
  // sample depends only on (seed, n, replication index), and each task
  // writes to slots nobody else touches, so the outcome table is identical
  // for any thread count.
  const auto run_task = [&](long long t) {
    const int si = static_cast<int>(t / reps);
    const int r = static_cast<int>(t % reps);
    const int n = cfg.sizes[static_cast<std::size_t>(si)];
    const CountSample sample =
        sample_target(target, n, replication_seed(cfg.seed, n, r));
    for (int ei = 0; ei < num_est; ++ei) {
      RepOutcome& o = out[slot(si, ei, r)];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const PmfEstimate est =
            fit_estimator(sample,
                          cfg.estimators[static_cast<std::size_t>(ei)],
                          cfg.search)
                .first;
        o.fit_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
        if (cfg.with_ise) {
          o.ise = ise(est, truth, std::max(est.x_max, q_hi));
        }
        if (cfg.with_tail) {
          const double p_hat = tail_probability(est, summary.tail_threshold);
          const RelativeErrorOutcome rel =
              tail_relative_error(p_hat, summary.tail_true);
          o.divergent = rel.divergent();
          if (rel.value) o.r_err = *rel.value;
        }
      } catch (const std::exception&) {
        o.failed = true;
      }
    }
  };

  const int workers = static_cast<int>(
      std::min<long long>(cfg.threads, total_tasks));
  if (workers <= 1) {
    for (long long t = 0; t < total_tasks; ++t) run_task(t);
  } else {
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const long long t = next.fetch_add(1, std::memory_order_relaxed);
          if (t >= total_tasks) return;
          run_task(t);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  // Sequential reduction in replication order keeps every mean/sd
  // bit-identical regardless of how the tasks were scheduled.
  summary.cells.reserve(static_cast<std::size_t>(num_est) *
                        static_cast<std::size_t>(num_sizes));
  for (int ei = 0; ei < num_est; ++ei) {
    for (int si = 0; si < num_sizes; ++si) {
      SimCell cell;
      cell.estimator = cfg.estimators[static_cast<std::size_t>(ei)].label();
      cell.n = cfg.sizes[static_cast<std::size_t>(si)];
      cell.replications = reps;
      std::vector<double> ises;
      std::vector<double> rs;
      std::vector<double> times;
      if (cfg.keep_replicates) {
        cell.ise_values.assign(static_cast<std::size_t>(reps), kNan);
      }
      for (int r = 0; r < reps; ++r) {
        const RepOutcome& o = out[slot(si, ei, r)];
        if (o.failed) {
          ++cell.failures;
          continue;
        }
        times.push_back(o.fit_ms);
        if (cfg.with_ise) {
          ises.push_back(o.ise);
          if (cfg.keep_replicates) {
            cell.ise_values[static_cast<std::size_t>(r)] = o.ise;
          }
        }
        if (cfg.with_tail) {
          if (o.divergent) {
            ++cell.divergent_count;
          } else {
            rs.push_back(o.r_err);
          }
        }
      }
      const int successes = reps - cell.failures;
      cell.ise_mean = mean_of(ises);
      cell.ise_sd = sd_of(ises, cell.ise_mean);
      cell.tail_r_mean = mean_of(rs);
      cell.tail_r_sd = sd_of(rs, cell.tail_r_mean);
      cell.divergent_pct =
          (cfg.with_tail && successes > 0)
              ? 100.0 * static_cast<double>(cell.divergent_count) /
                    static_cast<double>(successes)
              : kNan;
      cell.fit_ms_mean = mean_of(times);
      if (!cfg.keep_replicates) cell.ise_values.clear();
      summary.cells.push_back(std::move(cell));
    }
  }
  return summary;
}

std::string SimSummary::to_csv(bool include_timing) const {
  std::string csv =
      "target,estimator,n,ise_mean,ise_sd,tail_r_mean,tail_r_sd,"
      "divergent_pct,fit_ms_mean\n";
  for (const SimCell& c : cells) {
    csv += target;
    csv += ',';
    csv += c.estimator;
    csv += ',';
    csv += std::to_string(c.n);
    csv += ',';
    csv += csv_number(c.ise_mean);
    csv += ',';
    csv += csv_number(c.ise_sd);
    csv += ',';
    csv += csv_number(c.tail_r_mean);
    csv += ',';
    csv += csv_number(c.tail_r_sd);
    csv += ',';
    csv += csv_number(c.divergent_pct);
    csv += ',';
    csv += include_timing ? csv_number(c.fit_ms_mean) : std::string("na");
    csv += '\n';
  }
  return csv;
}

std::string SimSummary::to_json_text(bool include_timing) const {
  using json = nlohmann::ordered_json;
  const auto number_or_null = [](double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
  };
  json j;
  j["target"] = target;
  if (std::isfinite(tail_true)) {
    j["tail"] = {{"level", tail_level},
                 {"threshold", tail_threshold},
                 {"true_probability", tail_true}};
  } else {
    j["tail"] = nullptr;
  }
  j["cells"] = json::array();
  for (const SimCell& c : cells) {
    json cell;
    cell["estimator"] = c.estimator;
    cell["n"] = c.n;
    cell["replications"] = c.replications;
    cell["failures"] = c.failures;
    cell["ise_mean"] = number_or_null(c.ise_mean);
    cell["ise_sd"] = number_or_null(c.ise_sd);
    cell["tail_r_mean"] = number_or_null(c.tail_r_mean);
    cell["tail_r_sd"] = number_or_null(c.tail_r_sd);
    cell["divergent_count"] = c.divergent_count;
    cell["divergent_pct"] = number_or_null(c.divergent_pct);
    cell["fit_ms_mean"] =
        include_timing ? number_or_null(c.fit_ms_mean) : json(nullptr);
    if (!c.ise_values.empty()) {
      json vals = json::array();
      for (double v : c.ise_values) vals.push_back(number_or_null(v));
      cell["ise_values"] = std::move(vals);
    }
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2) + "\n";
}

}  // namespace cmpsmooth
