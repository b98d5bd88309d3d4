#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmpsmooth/bandwidth.hpp"
#include "cmpsmooth/estimators.hpp"
#include "cmpsmooth/sample.hpp"
#include "cmpsmooth/sim.hpp"

namespace cmpsmooth {

// A count dataset read from disk: newline-separated integers or a
// single-column CSV, with one optional non-numeric header line. Parse
// failures throw parse_error naming the file and line.
struct Dataset {
  CountSample counts;
  std::string source_path;
  std::optional<std::string> label;
};

Dataset load_dataset(const std::string& path);

// One probability query against a fitted estimate.
struct FitQuery {
  enum class Kind { range, tail_ge, tail_le };
  Kind kind = Kind::range;
  long long a = 0;  // range: lower bound; tail queries: the threshold k
  long long b = 0;  // range only: upper bound
};

struct QueryResult {
  FitQuery query;
  double probability = 0.0;
};

double evaluate_query(const PmfEstimate& est, const FitQuery& q);

// Everything one `fit` run produced. Serializes to JSON losslessly
// (shortest-round-trip doubles, 17 significant digits at most).
struct FitReport {
  Dataset data;
  EstimatorSpec estimator;
  PmfEstimate estimate;
  std::optional<BandwidthResult> selection;  // present when a rule searched
  std::vector<QueryResult> queries;
  double fit_ms = 0.0;
};

std::string fit_report_to_json_text(const FitReport& report,
                                    bool include_timing);
// columns x,prob with 17-significant-digit probabilities
std::string pmf_to_csv(const PmfEstimate& est);

namespace cli {

// Entry point of the command-line tool. Returns the process exit code:
// 0 success, 2 argument or input parse error, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace cli

}  // namespace cmpsmooth
