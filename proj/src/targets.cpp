#include "cmpsmooth/targets.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

using nlohmann::json;

double component_pmf(const MixtureComponent& c, long long x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PoissonComponent>) {
          if (d.lambda == 0.0) return x == 0 ? 1.0 : 0.0;
          return std::exp(static_cast<double>(x) * std::log(d.lambda) -
                          d.lambda - log_factorial(x));
        } else if constexpr (std::is_same_v<T, NegBinComponent>) {
          return std::exp(std::lgamma(static_cast<double>(x) + d.r) -
                          std::lgamma(d.r) - log_factorial(x) +
                          d.r * std::log(d.r / (d.r + d.mu)) +
                          static_cast<double>(x) *
                              std::log(d.mu / (d.r + d.mu)));
        } else {
          return x == d.value ? 1.0 : 0.0;
        }
      },
      c.dist);
}

// mean + 40 sd + 64, past every component's visible mass
long long component_scan_limit(const MixtureComponent& c) {
  return std::visit(
      [](const auto& d) -> long long {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PoissonComponent>) {
          return static_cast<long long>(d.lambda + 40.0 * std::sqrt(d.lambda)) +
                 64;
        } else if constexpr (std::is_same_v<T, NegBinComponent>) {
          const double sd = std::sqrt(d.mu + d.mu * d.mu / d.r);
          return static_cast<long long>(d.mu + 40.0 * sd) + 64;
        } else {
          return d.value + 1;
        }
      },
      c.dist);
}

void validate_component(const MixtureComponent& c) {
  if (!std::isfinite(c.weight) || c.weight <= 0.0) {
    throw domain_error("mixture component: weight must be finite and > 0");
  }
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PoissonComponent>) {
          if (!std::isfinite(d.lambda) || d.lambda < 0.0) {
            throw domain_error("poisson component: lambda must be >= 0");
          }
        } else if constexpr (std::is_same_v<T, NegBinComponent>) {
          if (!std::isfinite(d.mu) || d.mu <= 0.0 || !std::isfinite(d.r) ||
              d.r <= 0.0) {
            throw domain_error(
                "negative binomial component: mu and r must be > 0");
          }
        } else {
          if (d.value < 0) {
            throw domain_error("point mass component: value must be >= 0");
          }
        }
      },
      c.dist);
}

}  // namespace

TargetSpec::TargetSpec(std::string name,
                       std::vector<MixtureComponent> components)
    : name_(std::move(name)), components_(std::move(components)) {
  if (name_.empty()) throw domain_error("target: name must be nonempty");
  if (components_.empty()) {
    throw domain_error("target: needs at least one component");
  }
  CompensatedSum wsum;
  for (const MixtureComponent& c : components_) {
    validate_component(c);
    wsum.add(c.weight);
  }
  const double total = wsum.value();
  for (MixtureComponent& c : components_) c.weight /= total;

  scan_limit_ = 1;
  for (const MixtureComponent& c : components_) {
    scan_limit_ = std::max(scan_limit_, component_scan_limit(c));
  }

  pmf_.resize(static_cast<std::size_t>(scan_limit_) + 1);
  cdf_.resize(pmf_.size());
  CompensatedSum cum;
  CompensatedSum mean;
  for (long long x = 0; x <= scan_limit_; ++x) {
    CompensatedSum px;
    for (const MixtureComponent& c : components_) {
      px.add(c.weight * component_pmf(c, x));
    }
    const double p = px.value();
    pmf_[static_cast<std::size_t>(x)] = p;
    cum.add(p);
    cdf_[static_cast<std::size_t>(x)] = cum.value();
    mean.add(static_cast<double>(x) * p);
  }
  mean_ = mean.value();
}

double TargetSpec::pmf(long long x) const {
  if (x < 0) return 0.0;
  if (x <= scan_limit_) return pmf_[static_cast<std::size_t>(x)];
  CompensatedSum px;
  for (const MixtureComponent& c : components_) {
    px.add(c.weight * component_pmf(c, x));
  }
  return px.value();
}

double TargetSpec::cdf(long long x) const {
  if (x < 0) return 0.0;
  if (x >= scan_limit_) return 1.0;
  return std::min(cdf_[static_cast<std::size_t>(x)], 1.0);
}

long long TargetSpec::quantile(double level) const {
  if (!(level > 0.0) || !(level < 1.0)) {
    throw domain_error("target quantile: level must be in (0, 1)");
  }
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), level);
  if (it == cdf_.end()) return scan_limit_;
  return static_cast<long long>(it - cdf_.begin());
}

double TargetSpec::tail_probability(long long threshold) const {
  if (threshold < 0) return 1.0;
  if (threshold >= scan_limit_) return 0.0;
  // upper sum, so tiny tails are not lost to 1 - cdf cancellation
  CompensatedSum s;
  for (long long x = scan_limit_; x > threshold; --x) {
    s.add(pmf_[static_cast<std::size_t>(x)]);
  }
  return std::clamp(s.value(), 0.0, 1.0);
}

namespace {

MixtureComponent component_from_json(const json& j) {
  if (!j.is_object()) throw parse_error("component must be an object");
  const std::string kind = j.value("kind", std::string());
  MixtureComponent c;
  c.weight = j.value("weight", 1.0);
  if (kind == "poisson") {
    if (!j.contains("lambda")) throw parse_error("poisson needs lambda");
    c.dist = PoissonComponent{j.at("lambda").get<double>()};
  } else if (kind == "negative_binomial") {
    if (!j.contains("mu") || !j.contains("r")) {
      throw parse_error("negative_binomial needs mu and r");
    }
    c.dist = NegBinComponent{j.at("mu").get<double>(), j.at("r").get<double>()};
  } else if (kind == "point_mass") {
    if (!j.contains("value")) throw parse_error("point_mass needs value");
    c.dist = PointMassComponent{j.at("value").get<long long>()};
  } else {
    throw parse_error("unknown component kind '" + kind +
                      "' (expected poisson, negative_binomial, point_mass)");
  }
  return c;
}

json component_to_json(const MixtureComponent& c) {
  json j;
  std::visit(
      [&j](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PoissonComponent>) {
          j["kind"] = "poisson";
          j["lambda"] = d.lambda;
        } else if constexpr (std::is_same_v<T, NegBinComponent>) {
          j["kind"] = "negative_binomial";
          j["mu"] = d.mu;
          j["r"] = d.r;
        } else {
          j["kind"] = "point_mass";
          j["value"] = d.value;
        }
      },
      c.dist);
  j["weight"] = c.weight;
  return j;
}

}  // namespace

TargetSpec target_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("target spec is not valid JSON: ") +
                      e.what());
  }
  try {
    if (!j.is_object() || !j.contains("name") || !j.contains("components")) {
      throw parse_error("target spec needs 'name' and 'components'");
    }
    std::vector<MixtureComponent> comps;
    for (const json& cj : j.at("components")) {
      comps.push_back(component_from_json(cj));
    }
    return TargetSpec(j.at("name").get<std::string>(), std::move(comps));
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed target spec: ") + e.what());
  } catch (const domain_error& e) {
    throw parse_error(std::string("invalid target spec: ") + e.what());
  }
}

std::string target_to_json_text(const TargetSpec& spec) {
  json j;
  j["name"] = spec.name();
  j["components"] = json::array();
  for (const MixtureComponent& c : spec.components()) {
    j["components"].push_back(component_to_json(c));
  }
  return j.dump(2) + "\n";
}

const std::vector<TargetSpec>& builtin_targets() {
  static const std::vector<TargetSpec> all = [] {
    std::vector<TargetSpec> t;
    t.emplace_back("unimodal-poisson",
                   std::vector<MixtureComponent>{{PoissonComponent{8.0}, 1.0}});
    t.emplace_back("overdispersed-nb", std::vector<MixtureComponent>{
                                           {NegBinComponent{8.0, 2.0}, 1.0}});
    t.emplace_back("zero-inflated-poisson",
                   std::vector<MixtureComponent>{{PointMassComponent{0}, 0.3},
                                                 {PoissonComponent{7.0}, 0.7}});
    t.emplace_back("bimodal-poisson",
                   std::vector<MixtureComponent>{{PoissonComponent{4.0}, 0.5},
                                                 {PoissonComponent{14.0}, 0.5}});
    t.emplace_back("bimodal-separated",
                   std::vector<MixtureComponent>{{PoissonComponent{2.0}, 0.45},
                                                 {PoissonComponent{18.0}, 0.55}});
    t.emplace_back("trimodal-poisson",
                   std::vector<MixtureComponent>{{PoissonComponent{2.0}, 0.35},
                                                 {PoissonComponent{10.0}, 0.4},
                                                 {PoissonComponent{22.0}, 0.25}});
    return t;
  }();
  return all;
}

const TargetSpec* find_builtin_target(const std::string& name) {
  for (const TargetSpec& t : builtin_targets()) {
    if (t.name() == name) return &t;
  }
  return nullptr;
}

CountSample sample_target(const TargetSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw domain_error("sample_target: n must be >= 1");
  std::mt19937_64 eng(seed);
  std::vector<long long> draws(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // 53-bit uniform in [0, 1); inversion on the precomputed cdf
    const double u =
        static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const auto it = std::upper_bound(spec.cdf_.begin(), spec.cdf_.end(), u);
    draws[static_cast<std::size_t>(i)] =
        it == spec.cdf_.end()
            ? spec.scan_limit_
            : static_cast<long long>(it - spec.cdf_.begin());
  }
  return CountSample(std::move(draws));
}

}  // namespace cmpsmooth
