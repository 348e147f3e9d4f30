#include "distrack/freq_sketch.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "distrack/error.hpp"

namespace distrack {

WeightedMG::WeightedMG(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "WeightedMG capacity must be positive");
  counters_.reserve(capacity + 1);
}

void WeightedMG::update(ElementId e, double w) {
  if (!finite_positive(w))
    fail(ErrorCode::InvalidArgument,
         "WeightedMG::update: weight must be finite and positive, got " + std::to_string(w));
  processed_ += w;
  counters_[e] += w;
  if (counters_.size() <= capacity_) return;

  // Exactly one counter over capacity: subtract the minimum from all.
  double delta = counters_.begin()->second;
  for (const auto& [k, v] : counters_) delta = std::min(delta, v);
  for (auto it = counters_.begin(); it != counters_.end();) {
    it->second -= delta;
    if (it->second <= 0.0)
      it = counters_.erase(it);
    else
      ++it;
  }
}

void WeightedMG::merge_in(const WeightedMG& other) {
  for (const auto& [k, v] : other.counters_) counters_[k] += v;
  processed_ += other.processed_;
  shrink_to_capacity();
}

void WeightedMG::shrink_to_capacity() {
  if (counters_.size() <= capacity_) return;
  std::vector<double> values;
  values.reserve(counters_.size());
  for (const auto& [k, v] : counters_) values.push_back(v);
  // (capacity+1)-th largest value.
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(capacity_);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>());
  const double delta = *nth;
  for (auto it = counters_.begin(); it != counters_.end();) {
    it->second -= delta;
    if (it->second <= 0.0)
      it = counters_.erase(it);
    else
      ++it;
  }
}

double WeightedMG::estimate(ElementId e) const {
  auto it = counters_.find(e);
  return it == counters_.end() ? 0.0 : it->second;
}

void WeightedMG::clear() {
  counters_.clear();
  processed_ = 0.0;
}

WeightedMG merge(const WeightedMG& a, const WeightedMG& b, std::size_t capacity) {
  WeightedMG out(capacity);
  for (const auto& [k, v] : a.counters_) out.counters_[k] += v;
  for (const auto& [k, v] : b.counters_) out.counters_[k] += v;
  out.processed_ = a.processed_ + b.processed_;
  out.shrink_to_capacity();
  return out;
}

}  // namespace distrack
