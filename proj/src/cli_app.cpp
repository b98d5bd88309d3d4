#include "cmpsmooth/cli_app.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/metrics.hpp"
#include "cmpsmooth/numerics.hpp"
#include "cmpsmooth/targets.hpp"

namespace cmpsmooth {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t first = s.find_first_not_of(ws);
  if (first == std::string::npos) return "";
  const std::size_t last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

bool is_integer_token(const std::string& t) {
  std::size_t i = 0;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  return true;
}

long long parse_count(const std::string& token, const std::string& where) {
  try {
    return std::stoll(token);
  } catch (const std::out_of_range&) {
    throw parse_error(where + ": count '" + token +
                      "' does not fit in a 64-bit integer");
  } catch (const std::exception&) {
    throw parse_error(where + ": expected an integer count, got '" + token +
                      "'");
  }
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw std::runtime_error("cannot write file '" + path.string() + "'");
  }
}

// a target flag names either a JSON file on disk or a bundled target
TargetSpec resolve_target(const std::string& text) {
  std::error_code ec;
  if (fs::exists(text, ec)) {
    return target_from_json_text(read_text_file(text));
  }
  if (const TargetSpec* t = find_builtin_target(text)) return *t;
  throw parse_error("target '" + text +
                    "' is neither a readable file nor a bundled target "
                    "(run 'cmpsmooth targets list')");
}

SupportRule support_rule_from_flag(const std::string& text) {
  SupportRule rule;
  if (text == "auto") return rule;
  if (!is_integer_token(text) || text[0] == '-') {
    throw parse_error("--support-max must be 'auto' or a nonnegative "
                      "integer, got '" +
                      text + "'");
  }
  rule.fixed_max = parse_count(text, "--support-max");
  return rule;
}

// assemble the descriptor grammar from the fit/tailprob flag set so the
// one parser validates every estimator+rule combination
EstimatorSpec estimator_from_flags(const std::string& kernel,
                                   const std::string& bandwidth,
                                   bool bandwidth_given, long long arm,
                                   bool arm_given) {
  if (kernel == "histogram") {
    if (bandwidth_given) {
      throw parse_error("--kernel histogram takes no --bandwidth");
    }
    if (arm_given) {
      throw parse_error("--triangular-a applies only to --kernel triangular");
    }
    return EstimatorSpec::parse("histogram");
  }
  if (kernel == "triangular") {
    return EstimatorSpec::parse("triangular:a" + std::to_string(arm) + ":" +
                                bandwidth);
  }
  if (arm_given) {
    throw parse_error("--triangular-a applies only to --kernel triangular");
  }
  return EstimatorSpec::parse(kernel + ":" + bandwidth);
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

std::string query_text(const FitQuery& q) {
  switch (q.kind) {
    case FitQuery::Kind::range:
      return "P(" + std::to_string(q.a) + " <= X <= " + std::to_string(q.b) +
             ")";
    case FitQuery::Kind::tail_ge:
      return "P(X >= " + std::to_string(q.a) + ")";
    case FitQuery::Kind::tail_le:
      return "P(X <= " + std::to_string(q.a) + ")";
  }
  return "";
}

const char* query_kind_name(FitQuery::Kind k) {
  switch (k) {
    case FitQuery::Kind::range:
      return "range";
    case FitQuery::Kind::tail_ge:
      return "tail_ge";
    case FitQuery::Kind::tail_le:
      return "tail_le";
  }
  return "";
}

// "a:b" with 0 <= a <= b
FitQuery parse_range_query(const std::string& text) {
  const std::vector<std::string> parts = split_list(text, ':');
  if (parts.size() != 2 || !is_integer_token(parts[0]) ||
      !is_integer_token(parts[1])) {
    throw parse_error("--prob-range expects a:b with integers, got '" + text +
                      "'");
  }
  FitQuery q;
  q.kind = FitQuery::Kind::range;
  q.a = parse_count(parts[0], "--prob-range");
  q.b = parse_count(parts[1], "--prob-range");
  if (q.a < 0 || q.b < q.a) {
    throw parse_error("--prob-range needs 0 <= a <= b, got '" + text + "'");
  }
  return q;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open dataset file '" + path + "'");
  std::vector<long long> values;
  std::string line;
  long long lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!is_integer_token(t)) {
      // a single leading non-numeric line is treated as a column header
      if (first_content) {
        first_content = false;
        continue;
      }
      throw parse_error(where + ": expected an integer count, got '" + t +
                        "'");
    }
    first_content = false;
    const long long v = parse_count(t, where);
    if (v < 0) {
      throw parse_error(where + ": counts must be nonnegative, got " + t);
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw parse_error("dataset '" + path + "' contains no counts");
  }
  Dataset ds{CountSample(std::move(values)), path,
             fs::path(path).filename().string()};
  return ds;
}

double evaluate_query(const PmfEstimate& est, const FitQuery& q) {
  CompensatedSum s;
  switch (q.kind) {
    case FitQuery::Kind::range: {
      const long long hi = std::min(q.b, est.x_max);
      for (long long x = q.a; x <= hi; ++x) s.add(est.prob(x));
      return std::clamp(s.value(), 0.0, 1.0);
    }
    case FitQuery::Kind::tail_ge:
      return tail_probability(est, q.a - 1);
    case FitQuery::Kind::tail_le: {
      const long long hi = std::min(q.a, est.x_max);
      for (long long x = 0; x <= hi; ++x) s.add(est.prob(x));
      return std::clamp(s.value(), 0.0, 1.0);
    }
  }
  throw domain_error("unknown query kind");
}

std::string pmf_to_csv(const PmfEstimate& est) {
  std::string csv = "x,prob\n";
  for (long long x = 0; x <= est.x_max; ++x) {
    csv += std::to_string(x);
    csv += ',';
    csv += format_double17(est.prob(x));
    csv += '\n';
  }
  return csv;
}

std::string fit_report_to_json_text(const FitReport& report,
                                    bool include_timing) {
  ordered_json j;
  {
    ordered_json input;
    input["path"] = report.data.source_path;
    if (report.data.label) {
      input["label"] = *report.data.label;
    } else {
      input["label"] = nullptr;
    }
    input["n"] = report.data.counts.n();
    input["mean"] = report.data.counts.mean();
    input["variance"] = report.data.counts.variance();
    input["min"] = report.data.counts.min_value();
    input["max"] = report.data.counts.max_value();
    j["input"] = std::move(input);
  }
  j["estimator"] = report.estimator.label();
  if (report.estimate.bandwidth) {
    j["bandwidth"] = *report.estimate.bandwidth;
  } else {
    j["bandwidth"] = nullptr;
  }
  if (report.selection) {
    const BandwidthResult& sel = *report.selection;
    ordered_json s;
    s["method"] = bandwidth_method_name(sel.method);
    s["h"] = sel.h;
    s["objective_value"] = number_or_null(sel.objective_value);
    s["degenerate"] = sel.degenerate;
    if (sel.reference_fits) {
      ordered_json refs;
      refs["poisson_lambda"] = sel.reference_fits->poisson_lambda;
      if (sel.reference_fits->nb) {
        refs["negative_binomial"] = {{"mu", sel.reference_fits->nb->mu},
                                     {"r", sel.reference_fits->nb->r}};
      } else {
        refs["negative_binomial"] = nullptr;
      }
      s["reference_fits"] = std::move(refs);
    } else {
      s["reference_fits"] = nullptr;
    }
    ordered_json trace = ordered_json::array();
    for (const auto& [h, obj] : sel.trace) {
      trace.push_back({h, number_or_null(obj)});
    }
    s["trace"] = std::move(trace);
    j["selection"] = std::move(s);
  } else {
    j["selection"] = nullptr;
  }
  {
    ordered_json est;
    est["kind"] = estimator_name(report.estimate.estimator);
    est["x_max"] = report.estimate.x_max;
    est["tail_mass"] = report.estimate.tail_mass;
    est["mean"] = report.estimate.mean;
    est["probs"] = report.estimate.probs;
    j["estimate"] = std::move(est);
  }
  {
    ordered_json queries = ordered_json::array();
    for (const QueryResult& r : report.queries) {
      ordered_json q;
      q["kind"] = query_kind_name(r.query.kind);
      if (r.query.kind == FitQuery::Kind::range) {
        q["a"] = r.query.a;
        q["b"] = r.query.b;
      } else {
        q["k"] = r.query.a;
      }
      q["probability"] = r.probability;
      queries.push_back(std::move(q));
    }
    j["queries"] = std::move(queries);
  }
  j["fit_ms"] = include_timing ? number_or_null(report.fit_ms)
                               : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

namespace cli {

namespace {

// %.4g for the human-readable tables; files keep full precision
std::string fmt4(double v) {
  if (!std::isfinite(v)) return "na";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct FitFlags {
  std::string data;
  std::string kernel = "cmp";
  std::string bandwidth = "kl";
  std::string support_max = "auto";
  std::string output = ".";
  long long arm = 2;
  bool timing = false;
  std::vector<std::string> ranges;
  std::vector<long long> tail_ge;
  std::vector<long long> tail_le;
};

struct SimulateFlags {
  std::string target;
  std::string sizes = "20,50,100";
  int reps = 200;
  std::string estimators = "histogram,cmp:kl,triangular:a2:kl,binomial:rootn";
  double tail_level = 0.99;
  bool no_ise = false;
  bool no_tail = false;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: CMPSMOOTH_THREADS or 1
  bool timing = false;
  bool keep_replicates = false;
  std::string output = ".";
};

struct TailFlags {
  std::string data;
  std::string kernel = "cmp";
  std::string bandwidth = "kl";
  std::string support_max = "auto";
  long long arm = 2;
  long long threshold = 0;
  double level = 0.0;
  std::string truth;
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CMPSMOOTH_THREADS")) {
    const std::string text = trim(env);
    if (!is_integer_token(text) || text[0] == '-' ||
        parse_count(text, "CMPSMOOTH_THREADS") < 1) {
      throw parse_error("CMPSMOOTH_THREADS must be a positive integer, got '" +
                        text + "'");
    }
    return static_cast<int>(parse_count(text, "CMPSMOOTH_THREADS"));
  }
  return 1;
}

int cmd_fit(const FitFlags& f, bool bandwidth_given, bool arm_given,
            std::ostream& out) {
  const EstimatorSpec spec = estimator_from_flags(
      f.kernel, f.bandwidth, bandwidth_given, f.arm, arm_given);
  SearchConfig search;
  search.support = support_rule_from_flag(f.support_max);
  Dataset ds = load_dataset(f.data);

  const auto t0 = std::chrono::steady_clock::now();
  auto [est, sel] = fit_estimator(ds.counts, spec, search);
  const double fit_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();

  FitReport report{std::move(ds), spec,       std::move(est),
                   std::move(sel), {},        fit_ms};
  for (const std::string& text : f.ranges) {
    const FitQuery q = parse_range_query(text);
    report.queries.push_back({q, evaluate_query(report.estimate, q)});
  }
  for (long long k : f.tail_ge) {
    const FitQuery q{FitQuery::Kind::tail_ge, k, 0};
    report.queries.push_back({q, evaluate_query(report.estimate, q)});
  }
  for (long long k : f.tail_le) {
    const FitQuery q{FitQuery::Kind::tail_le, k, 0};
    report.queries.push_back({q, evaluate_query(report.estimate, q)});
  }

  const CountSample& counts = report.data.counts;
  out << "fitted " << spec.label() << " to '" << report.data.source_path
      << "' (n=" << counts.n()
      << ", mean=" << format_double_shortest(counts.mean())
      << ", variance=" << format_double_shortest(counts.variance()) << ")\n";
  if (report.estimate.bandwidth) {
    out << "bandwidth h = "
        << format_double_shortest(*report.estimate.bandwidth);
    if (report.selection) {
      out << " (" << bandwidth_method_name(report.selection->method)
          << " objective "
          << format_double_shortest(report.selection->objective_value) << ", "
          << report.selection->trace.size() << " evaluations)";
    }
    out << "\n";
    if (report.selection && report.selection->degenerate) {
      out << "warning: every leave-one-out likelihood was zero; kept the "
             "smallest bandwidth in the search box\n";
    }
  }
  out << "support 0.." << report.estimate.x_max << ", tail mass "
      << format_double_shortest(report.estimate.tail_mass)
      << ", estimate mean " << format_double_shortest(report.estimate.mean)
      << "\n";
  for (const QueryResult& r : report.queries) {
    out << query_text(r.query) << " = " << format_double17(r.probability)
        << "\n";
  }

  fs::create_directories(f.output);
  const fs::path pmf_path = fs::path(f.output) / "pmf.csv";
  const fs::path report_path = fs::path(f.output) / "report.json";
  write_text_file(pmf_path, pmf_to_csv(report.estimate));
  write_text_file(report_path, fit_report_to_json_text(report, f.timing));
  out << "wrote " << pmf_path.string() << " and " << report_path.string()
      << "\n";
  return 0;
}

int cmd_simulate(const SimulateFlags& f, bool threads_given,
                 std::ostream& out) {
  SimConfig cfg(resolve_target(f.target));
  cfg.sizes.clear();
  for (const std::string& tok : split_list(f.sizes, ',')) {
    const std::string t = trim(tok);
    if (!is_integer_token(t) || t[0] == '-') {
      throw parse_error("--sizes expects comma-separated positive integers, "
                        "got '" +
                        f.sizes + "'");
    }
    cfg.sizes.push_back(static_cast<int>(parse_count(t, "--sizes")));
  }
  cfg.replications = f.reps;
  cfg.estimators.clear();
  for (const std::string& tok : split_list(f.estimators, ',')) {
    cfg.estimators.push_back(EstimatorSpec::parse(trim(tok)));
  }
  cfg.tail_level = f.tail_level;
  cfg.with_ise = !f.no_ise;
  cfg.with_tail = !f.no_tail;
  cfg.seed = f.seed;
  cfg.threads = resolve_threads(threads_given ? f.threads : 0);
  cfg.keep_replicates = f.keep_replicates;

  const SimSummary summary = run_study(cfg);

  out << "target " << summary.target;
  if (std::isfinite(summary.tail_true)) {
    out << ", tail level " << format_double_shortest(summary.tail_level)
        << " -> threshold " << summary.tail_threshold << ", p_true "
        << fmt4(summary.tail_true);
  }
  out << "\n";
  char head[160];
  std::snprintf(head, sizeof head, "%-26s %6s %10s %10s %12s %10s %8s %6s",
                "estimator", "n", "ise_mean", "ise_sd", "tail_r_mean",
                "tail_r_sd", "div_pct", "fail");
  out << head << "\n";
  for (const SimCell& c : summary.cells) {
    char row[200];
    std::snprintf(row, sizeof row, "%-26s %6d %10s %10s %12s %10s %8s %6d",
                  c.estimator.c_str(), c.n, fmt4(c.ise_mean).c_str(),
                  fmt4(c.ise_sd).c_str(), fmt4(c.tail_r_mean).c_str(),
                  fmt4(c.tail_r_sd).c_str(), fmt4(c.divergent_pct).c_str(),
                  c.failures);
    out << row << "\n";
  }

  fs::create_directories(f.output);
  const fs::path csv_path = fs::path(f.output) / "summary.csv";
  const fs::path json_path = fs::path(f.output) / "summary.json";
  write_text_file(csv_path, summary.to_csv(f.timing));
  write_text_file(json_path, summary.to_json_text(f.timing));
  out << "wrote " << csv_path.string() << " and " << json_path.string()
      << "\n";
  return 0;
}

int cmd_tailprob(const TailFlags& f, bool threshold_given, bool level_given,
                 bool bandwidth_given, bool arm_given, std::ostream& out) {
  if (threshold_given == level_given) {
    throw parse_error("tailprob needs exactly one of --threshold or --level");
  }
  if (level_given && f.truth.empty()) {
    throw parse_error("--level locates the threshold at a quantile of the "
                      "truth, so it needs --truth");
  }
  const EstimatorSpec spec = estimator_from_flags(
      f.kernel, f.bandwidth, bandwidth_given, f.arm, arm_given);
  SearchConfig search;
  search.support = support_rule_from_flag(f.support_max);
  Dataset ds = load_dataset(f.data);

  std::optional<TargetSpec> truth;
  if (!f.truth.empty()) truth = resolve_target(f.truth);

  long long threshold = f.threshold;
  if (level_given) {
    threshold = truth->quantile(f.level);
    out << "level = " << format_double_shortest(f.level) << "\n";
  }

  auto [est, sel] = fit_estimator(ds.counts, spec, search);
  const double p_hat = tail_probability(est, threshold);

  out << "estimator = " << spec.label();
  if (est.bandwidth) {
    out << " (h = " << format_double_shortest(*est.bandwidth) << ")";
  }
  out << "\n";
  out << "threshold = " << threshold << "\n";
  out << "p_hat = " << format_double17(p_hat) << "\n";
  if (truth) {
    const double p_true = truth->tail_probability(threshold);
    out << "p_true = " << format_double17(p_true) << "\n";
    const RelativeErrorOutcome r = tail_relative_error(p_hat, p_true);
    if (r.divergent()) {
      out << "r = divergent (estimate puts zero mass above the threshold)\n";
    } else {
      out << "r = " << format_double17(*r.value) << "\n";
    }
  }
  return 0;
}

int cmd_targets_list(bool as_json, std::ostream& out) {
  if (as_json) {
    ordered_json arr = ordered_json::array();
    for (const TargetSpec& t : builtin_targets()) {
      arr.push_back(ordered_json::parse(target_to_json_text(t)));
    }
    out << arr.dump(2) << "\n";
    return 0;
  }
  for (const TargetSpec& t : builtin_targets()) {
    out << t.name() << "\n";
    out << "  mean = " << fmt4(t.mean()) << "\n  ";
    bool first = true;
    for (const MixtureComponent& c : t.components()) {
      if (!first) out << " + ";
      first = false;
      out << format_double_shortest(c.weight) << "*";
      std::visit(
          [&out](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonComponent>) {
              out << "poisson(lambda=" << format_double_shortest(d.lambda)
                  << ")";
            } else if constexpr (std::is_same_v<T, NegBinComponent>) {
              out << "negative_binomial(mu=" << format_double_shortest(d.mu)
                  << ", r=" << format_double_shortest(d.r) << ")";
            } else {
              out << "point_mass(" << d.value << ")";
            }
          },
          c.dist);
    }
    out << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Discrete pmf smoothing with mean-parametrized "
               "Conway-Maxwell-Poisson kernels"};
  app.require_subcommand(1);

  FitFlags fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit an estimator to a count dataset");
  fit_cmd->add_option("--data", fit.data,
                      "count dataset: newline-separated integers or a "
                      "single-column CSV with an optional header")
      ->required();
  fit_cmd->add_option("--kernel", fit.kernel,
                      "estimator kind (default cmp)")
      ->check(CLI::IsMember({"cmp", "triangular", "binomial", "histogram"}));
  CLI::Option* fit_bw = fit_cmd->add_option(
      "--bandwidth", fit.bandwidth,
      "bandwidth rule: kl, cv, rootn, or fixed:<h> (default kl)");
  CLI::Option* fit_arm = fit_cmd->add_option(
      "--triangular-a", fit.arm, "triangular kernel arm (default 2)");
  fit_cmd->add_option("--support-max", fit.support_max,
                      "estimate support cap: auto or an integer");
  fit_cmd->add_option("--output", fit.output,
                      "directory for pmf.csv and report.json (default .)");
  fit_cmd->add_flag("--timing", fit.timing,
                    "include wall-clock fit time in report.json");
  fit_cmd->add_option("--prob-range", fit.ranges,
                      "probability query P(a <= X <= b), format a:b "
                      "(repeatable)")
      ->allow_extra_args(false);
  fit_cmd->add_option("--prob-tail-ge", fit.tail_ge,
                      "probability query P(X >= k) (repeatable)")
      ->allow_extra_args(false);
  fit_cmd->add_option("--prob-tail-le", fit.tail_le,
                      "probability query P(X <= k) (repeatable)")
      ->allow_extra_args(false);

  SimulateFlags sim;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Monte Carlo study of the estimators against a known pmf");
  sim_cmd->add_option("--target", sim.target,
                      "target pmf: a JSON spec file or a bundled target name")
      ->required();
  sim_cmd->add_option("--sizes", sim.sizes,
                      "comma-separated sample sizes (default 20,50,100)");
  sim_cmd->add_option("--reps,--replications", sim.reps,
                      "replications per (estimator, n) cell (default 200)");
  sim_cmd->add_option("--estimators", sim.estimators,
                      "comma-separated estimator descriptors (default "
                      "histogram,cmp:kl,triangular:a2:kl,binomial:rootn)");
  sim_cmd->add_option("--tail-level", sim.tail_level,
                      "tail event quantile level (default 0.99)");
  sim_cmd->add_flag("--no-ise", sim.no_ise, "skip the ISE metric");
  sim_cmd->add_flag("--no-tail", sim.no_tail,
                    "skip the tail probability metric");
  sim_cmd->add_option("--seed", sim.seed, "study seed (default 1)");
  CLI::Option* sim_threads = sim_cmd->add_option(
      "--threads", sim.threads,
      "worker threads; output never depends on it (default "
      "CMPSMOOTH_THREADS or 1)");
  sim_threads->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--timing", sim.timing,
                    "include mean fit times in the summaries");
  sim_cmd->add_flag("--keep-replicates", sim.keep_replicates,
                    "include per-replication ISE values in summary.json");
  sim_cmd->add_option("--output", sim.output,
                      "directory for summary.csv and summary.json "
                      "(default .)");

  TailFlags tail;
  CLI::App* tail_cmd = app.add_subcommand(
      "tailprob", "estimate an upper tail probability P(X > threshold)");
  tail_cmd->add_option("--data", tail.data, "count dataset to fit")
      ->required();
  tail_cmd->add_option("--kernel", tail.kernel,
                       "estimator kind (default cmp)")
      ->check(CLI::IsMember({"cmp", "triangular", "binomial", "histogram"}));
  CLI::Option* tail_bw = tail_cmd->add_option(
      "--bandwidth", tail.bandwidth,
      "bandwidth rule: kl, cv, rootn, or fixed:<h> (default kl)");
  CLI::Option* tail_arm = tail_cmd->add_option(
      "--triangular-a", tail.arm, "triangular kernel arm (default 2)");
  tail_cmd->add_option("--support-max", tail.support_max,
                       "estimate support cap: auto or an integer");
  CLI::Option* tail_thr = tail_cmd->add_option(
      "--threshold", tail.threshold, "integer threshold of P(X > threshold)");
  CLI::Option* tail_level = tail_cmd->add_option(
      "--level", tail.level,
      "choose the threshold as this quantile of --truth");
  tail_cmd->add_option("--truth", tail.truth,
                       "true pmf (JSON spec file or bundled target name) "
                       "for the relative error");
  tail_thr->excludes(tail_level);

  CLI::App* targets_cmd =
      app.add_subcommand("targets", "inspect the bundled simulation targets");
  targets_cmd->require_subcommand(1);
  bool targets_json = false;
  CLI::App* targets_list_cmd =
      targets_cmd->add_subcommand("list", "list the bundled targets");
  targets_list_cmd->add_flag("--json", targets_json,
                             "emit the full specs as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      return cmd_fit(fit, fit_bw->count() > 0, fit_arm->count() > 0, out);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim, sim_threads->count() > 0, out);
    }
    if (tail_cmd->parsed()) {
      return cmd_tailprob(tail, tail_thr->count() > 0,
                          tail_level->count() > 0, tail_bw->count() > 0,
                          tail_arm->count() > 0, out);
    }
    if (targets_cmd->parsed()) {
      return cmd_targets_list(targets_json, out);
    }
  } catch (const parse_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  return run(argc, argv, std::cout, std::cerr);
}

}  // namespace cli

}  // namespace cmpsmooth
