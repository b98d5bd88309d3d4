#include "cmpsmooth/sample.hpp"

#include <algorithm>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

CountSample::CountSample(std::vector<long long> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw domain_error("CountSample: sample must be nonempty");
  }
  for (long long v : values_) {
    if (v < 0) {
      throw domain_error("CountSample: counts must be nonnegative, got " +
                         std::to_string(v));
    }
  }
  std::vector<long long> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  min_value_ = sorted.front();
  max_value_ = sorted.back();
  for (long long v : sorted) {
    if (!distinct_.empty() && distinct_.back().first == v) {
      ++distinct_.back().second;
    } else {
      distinct_.emplace_back(v, 1);
    }
  }

  CompensatedSum sum;
  for (long long v : sorted) sum.add(static_cast<double>(v));
  mean_ = sum.value() / static_cast<double>(values_.size());
  if (values_.size() > 1) {
    CompensatedSum sq;
    for (long long v : sorted) {
      const double d = static_cast<double>(v) - mean_;
      sq.add(d * d);
    }
    variance_ = sq.value() / static_cast<double>(values_.size() - 1);
  }
}

}  // namespace cmpsmooth
