#pragma once

#include <cmath>
#include <string>
#include <cstdint>
#include <limits>

namespace cmpsmooth {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Neumaier compensated accumulator. Order-dependent like any float sum, so
// callers that promise determinism must feed it in a fixed order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(x) for integer x >= 1 and log(x!) for x >= 0. Table-backed up to 2^16
// (the log-factorial table is accumulated in long double), lgamma/log beyond.
double log_int(long long x);
double log_factorial(long long x);

// Nearest integer, ties to even. x must be finite and nonnegative.
long long round_half_even(double x);

// SplitMix64 finalizer; used to derive independent replication seeds.
std::uint64_t splitmix64(std::uint64_t z);

// 17 significant digits: enough to reproduce any double exactly
std::string format_double17(double v);
// shortest decimal string that parses back to exactly v
std::string format_double_shortest(double v);

}  // namespace cmpsmooth
