#pragma once

#include <cstddef>
#include <unordered_map>

#include "distrack/common.hpp"

namespace distrack {

/// Misra-Gries summary over weighted updates.
///
/// Holds at most `capacity` positive counters. Every estimate is an
/// underestimate of the true weight f_e, by at most processed_weight() / capacity.
/// Overflow is resolved by subtracting the smallest counter from all counters,
/// so fractional weights cost one pass instead of ceil(w) unit decrements.
class WeightedMG {
 public:
  using CounterMap = std::unordered_map<ElementId, double>;

  explicit WeightedMG(std::size_t capacity);

  /// Adds weight `w` to element `e`. Throws on non-positive or non-finite w.
  void update(ElementId e, double w);

  /// Folds `other` into this sketch, keeping this sketch's capacity.
  void merge_in(const WeightedMG& other);

  double estimate(ElementId e) const;

  std::size_t capacity() const { return capacity_; }
  double processed_weight() const { return processed_; }
  const CounterMap& counters() const { return counters_; }
  std::size_t size() const { return counters_.size(); }
  bool empty() const { return counters_.empty(); }
  void clear();

 private:
  friend WeightedMG merge(const WeightedMG&, const WeightedMG&, std::size_t);
  void shrink_to_capacity();

  std::size_t capacity_;
  CounterMap counters_;
  double processed_ = 0.0;
};

/// Pointwise sum followed by subtraction of the (capacity+1)-th largest
/// counter, the mergeable-summaries rule.
WeightedMG merge(const WeightedMG& a, const WeightedMG& b, std::size_t capacity);

}  // namespace distrack
