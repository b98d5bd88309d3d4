#include "cmpsmooth/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "cmpsmooth/errors.hpp"

namespace cmpsmooth {

namespace {

constexpr long long kTableSize = 1 << 16;

const std::vector<double>& log_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    t[0] = 0.0;  // unused slot, log(0) never queried
    for (long long x = 1; x < kTableSize; ++x) t[x] = std::log(double(x));
    return t;
  }();
  return table;
}

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    long double acc = 0.0L;
    t[0] = 0.0;
    for (long long x = 1; x < kTableSize; ++x) {
      acc += logl(static_cast<long double>(x));
      t[x] = static_cast<double>(acc);
    }
    return t;
  }();
  return table;
}

}  // namespace

double log_int(long long x) {
  if (x < 1) throw domain_error("log_int: x must be >= 1");
  if (x < kTableSize) return log_table()[x];
  return std::log(static_cast<double>(x));
}

double log_factorial(long long x) {
  if (x < 0) throw domain_error("log_factorial: x must be >= 0");
  if (x < kTableSize) return log_factorial_table()[x];
  return std::lgamma(static_cast<double>(x) + 1.0);
}

long long round_half_even(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw domain_error("round_half_even: x must be finite and nonnegative");
  }
  const double f = std::floor(x);
  const double r = x - f;
  long long lo = static_cast<long long>(f);
  if (r > 0.5) return lo + 1;
  if (r < 0.5) return lo;
  return (lo % 2 == 0) ? lo : lo + 1;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_double_shortest(double v) {
  char buf[64];
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return format_double17(v);
}

}  // namespace cmpsmooth
