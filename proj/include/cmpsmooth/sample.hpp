#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace cmpsmooth {

// Immutable nonnegative count sample with cached summaries. Estimator code
// works off the distinct-value view so permuting the input never changes
// any downstream result.
class CountSample {
 public:
  // throws domain_error on an empty vector or any negative value
  explicit CountSample(std::vector<long long> values);

  std::size_t n() const { return values_.size(); }
  const std::vector<long long>& values() const { return values_; }
  // sorted distinct values with multiplicities
  const std::vector<std::pair<long long, int>>& distinct() const {
    return distinct_;
  }
  long long min_value() const { return min_value_; }
  long long max_value() const { return max_value_; }
  double mean() const { return mean_; }
  // sample variance, n - 1 denominator; 0 when n == 1
  double variance() const { return variance_; }

 private:
  std::vector<long long> values_;
  std::vector<std::pair<long long, int>> distinct_;
  long long min_value_ = 0;
  long long max_value_ = 0;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

}  // namespace cmpsmooth
