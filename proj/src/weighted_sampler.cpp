#include "distrack/weighted_sampler.hpp"

#include <algorithm>
#include <cmath>

namespace distrack {

std::size_t default_sample_size(double eps, double constant) {
  require(eps > 0.0 && eps < 1.0, "sample size: eps must lie in (0,1)");
  require(constant > 0.0, "sample size: constant must be positive");
  const double s = std::ceil(constant / (eps * eps) * std::log(1.0 / eps));
  return std::max<std::size_t>(16, static_cast<std::size_t>(s));
}

std::string_view to_string(EstimateRule r) {
  return r == EstimateRule::FixedSize ? "fixed-size" : "drop-min";
}

EstimateRule parse_estimate_rule(std::string_view name) {
  if (name == "drop-min") return EstimateRule::DropMinimum;
  if (name == "fixed-size") return EstimateRule::FixedSize;
  fail(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

std::optional<PriorityDraw> PrioritySite::offer(double w) {
  if (!finite_positive(w)) fail(ErrorCode::InvalidArgument, "priority offer: weight must be positive");
  const double rho = w / uniform_open01(rng_);
  if (rho >= tau_) return PriorityDraw{w, rho};
  return std::nullopt;
}

WrSite::WrSite(std::size_t samplers, std::uint64_t seed)
    : s_(samplers), rng_(seed), marks_(samplers, 0) {
  require(samplers >= 1, "sampler count must be positive");
}

void WrSite::offer(double w, std::vector<WrDraw>& out) {
  if (!finite_positive(w)) fail(ErrorCode::InvalidArgument, "priority offer: weight must be positive");
  if (w >= tau_) {
    // Every draw clears the threshold.
    for (std::size_t t = 0; t < s_; ++t)
      out.push_back({static_cast<std::uint32_t>(t), w / uniform_open01(rng_)});
    return;
  }
  // rho >= tau  <=>  r <= q. Draw the number of successes, then which
  // samplers, then r uniform on (0, q) for each.
  const double q = w / tau_;
  std::binomial_distribution<std::size_t> successes(s_, q);
  const std::size_t k = successes(rng_);
  if (k == 0) return;
  // Floyd's sampling of k distinct indices.
  scratch_.clear();
  for (std::size_t j = s_ - k; j < s_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    auto t = static_cast<std::uint32_t>(pick(rng_));
    if (marks_[t]) t = static_cast<std::uint32_t>(j);
    marks_[t] = 1;
    scratch_.push_back(t);
  }
  std::sort(scratch_.begin(), scratch_.end());
  for (auto t : scratch_) {
    marks_[t] = 0;
    out.push_back({t, tau_ / uniform_open01(rng_)});
  }
}

}  // namespace distrack
