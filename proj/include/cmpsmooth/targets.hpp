#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cmpsmooth/sample.hpp"

namespace cmpsmooth {

struct PoissonComponent {
  double lambda = 1.0;
};
struct NegBinComponent {
  double mu = 1.0;
  double r = 1.0;
};
struct PointMassComponent {
  long long value = 0;
};

struct MixtureComponent {
  std::variant<PoissonComponent, NegBinComponent, PointMassComponent> dist;
  double weight = 1.0;
};

// A known true pmf for simulation studies: a finite mixture of Poisson,
// negative binomial, and point-mass components. Weights are normalized at
// construction; pmf/cdf tables are precomputed out to where the remaining
// mass is far below double resolution.
class TargetSpec {
 public:
  TargetSpec(std::string name, std::vector<MixtureComponent> components);

  const std::string& name() const { return name_; }
  const std::vector<MixtureComponent>& components() const {
    return components_;
  }
  double pmf(long long x) const;
  double cdf(long long x) const;
  long long quantile(double level) const;  // smallest x with CDF >= level
  double tail_probability(long long threshold) const;  // P(X > threshold)
  double mean() const { return mean_; }
  long long scan_limit() const { return scan_limit_; }

 private:
  std::string name_;
  std::vector<MixtureComponent> components_;
  long long scan_limit_ = 0;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;

  friend CountSample sample_target(const TargetSpec&, int, std::uint64_t);
};

// JSON schema:
// {"name": "...", "components": [
//   {"kind": "poisson", "lambda": 8.0, "weight": 0.5},
//   {"kind": "negative_binomial", "mu": 8.0, "r": 2.0, "weight": 0.3},
//   {"kind": "point_mass", "value": 0, "weight": 0.2}]}
TargetSpec target_from_json_text(const std::string& text);
std::string target_to_json_text(const TargetSpec& spec);

// Synthetic study shapes bundled with the library.
const std::vector<TargetSpec>& builtin_targets();
const TargetSpec* find_builtin_target(const std::string& name);

// n iid draws by inversion from a seeded 64-bit generator; the same
// (target, n, seed) yields the same sample on every platform.
CountSample sample_target(const TargetSpec& spec, int n, std::uint64_t seed);

}  // namespace cmpsmooth
