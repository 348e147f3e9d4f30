#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distrack/common.hpp"
#include "distrack/error.hpp"

namespace distrack {

/// Sample size for target error eps: max(16, ceil(c / eps^2 * ln(1/eps))).
std::size_t default_sample_size(double eps, double constant = 1.0);

struct PriorityDraw {
  double weight;
  double priority;
};

/// Site half of priority sampling: rho = w / r with r ~ U(0,1), forwarded
/// when rho >= tau.
class PrioritySite {
 public:
  explicit PrioritySite(std::uint64_t seed) : rng_(seed) {}

  std::optional<PriorityDraw> offer(double w);

  double tau() const { return tau_; }
  void set_tau(double tau) { tau_ = tau; }

 private:
  Rng rng_;
  double tau_ = 1.0;
};

template <class Payload>
struct SampledEntry {
  Payload item;
  double weight;
  double priority;
  std::uint64_t seq;  // arrival order, breaks priority ties
};

template <class Payload>
struct EstimatedEntry {
  const Payload* item;
  double weight;
  double adjusted;  // max(weight, rho_hat)
};

/// DropMinimum: every stored entry except the lowest priority, which becomes
/// rho-hat. The sample size follows the data-dependent threshold, which biases
/// W_S upward when s is small.
/// FixedSize: the top s-1 entries with rho-hat the s-th priority (plain
/// priority sampling), unbiased at any s.
enum class EstimateRule { DropMinimum, FixedSize };

std::string_view to_string(EstimateRule r);
/// "drop-min" or "fixed-size".
EstimateRule parse_estimate_rule(std::string_view name);

template <class Payload>
struct SampleEstimate {
  std::vector<EstimatedEntry<Payload>> entries;
  double rho_hat = 0.0;
  double total = 0.0;  // W_S
};

/// Coordinator half: keeps Q_j (tau_j <= rho <= 2 tau_j) and Q_{j+1}
/// (rho > 2 tau_j) as min-heaps; a round ends when |Q_{j+1}| reaches s.
template <class Payload>
class PriorityCoordinator {
 public:
  using Entry = SampledEntry<Payload>;

  explicit PriorityCoordinator(std::size_t sample_size) : s_(sample_size) {
    require(sample_size >= 1, "sample size must be positive");
  }

  /// Returns the number of threshold doublings this message caused; each one
  /// is a broadcast of the new tau.
  std::size_t ingest(Payload item, double w, double rho) {
    if (!(rho >= tau_))
      fail(ErrorCode::Protocol, "priority " + std::to_string(rho) + " below threshold " +
                                    std::to_string(tau_));
    Entry e{std::move(item), w, rho, seq_++};
    if (rho > 2.0 * tau_)
      push(upper_, std::move(e));
    else
      push(lower_, std::move(e));

    std::size_t doublings = 0;
    while (upper_.size() >= s_) {
      tau_ *= 2.0;
      ++round_;
      ++doublings;
      lower_.clear();
      std::vector<Entry> stay;
      std::vector<Entry> up;
      for (auto& x : upper_) (x.priority > 2.0 * tau_ ? up : stay).push_back(std::move(x));
      lower_ = std::move(stay);
      upper_ = std::move(up);
      std::make_heap(lower_.begin(), lower_.end(), MinFirst{});
      std::make_heap(upper_.begin(), upper_.end(), MinFirst{});
    }
    return doublings;
  }

  SampleEstimate<Payload> extract_estimate(EstimateRule rule = EstimateRule::DropMinimum) const {
    if (lower_.empty() && upper_.empty()) fail(ErrorCode::State, "priority sample is empty");
    if (rule == EstimateRule::FixedSize) return fixed_size_estimate();
    const Entry* smallest = nullptr;
    if (!lower_.empty()) smallest = &lower_.front();
    if (!upper_.empty() && (smallest == nullptr || MinFirst{}(*smallest, upper_.front())))
      smallest = &upper_.front();

    SampleEstimate<Payload> out;
    out.rho_hat = smallest->priority;
    out.entries.reserve(lower_.size() + upper_.size() - 1);
    auto add = [&](const Entry& x) {
      if (&x == smallest) return;
      const double adj = std::max(x.weight, out.rho_hat);
      out.entries.push_back({&x.item, x.weight, adj});
      out.total += adj;
    };
    for (const auto& x : lower_) add(x);
    for (const auto& x : upper_) add(x);
    return out;
  }

  double tau() const { return tau_; }
  std::size_t round() const { return round_; }
  std::size_t sample_size() const { return s_; }
  std::size_t stored() const { return lower_.size() + upper_.size(); }
  const std::vector<Entry>& lower() const { return lower_; }
  const std::vector<Entry>& upper() const { return upper_; }

 private:
  // std heaps are max-heaps; invert so the smallest priority sits in front.
  struct MinFirst {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq < b.seq;  // later arrival ranks lower on ties
    }
  };

  // At least s entries lie above tau once a round has ended, so the top s
  // priorities are always stored. Before that every item is stored.
  SampleEstimate<Payload> fixed_size_estimate() const {
    std::vector<const Entry*> all;
    all.reserve(stored());
    for (const auto& x : lower_) all.push_back(&x);
    for (const auto& x : upper_) all.push_back(&x);
    auto higher = [](const Entry* a, const Entry* b) { return MinFirst{}(*a, *b); };
    SampleEstimate<Payload> out;
    std::size_t keep = all.size();
    if (all.size() >= s_) {
      keep = s_ - 1;
      std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), higher);
      out.rho_hat = all[keep]->priority;
    }
    out.entries.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const double adj = std::max(all[i]->weight, out.rho_hat);
      out.entries.push_back({&all[i]->item, all[i]->weight, adj});
      out.total += adj;
    }
    return out;
  }

  static void push(std::vector<Entry>& heap, Entry e) {
    heap.push_back(std::move(e));
    std::push_heap(heap.begin(), heap.end(), MinFirst{});
  }

  std::size_t s_;
  double tau_ = 1.0;
  std::size_t round_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<Entry> lower_;
  std::vector<Entry> upper_;
};

struct WrDraw {
  std::uint32_t sampler;
  double priority;
};

/// Site half of the with-replacement variant: s independent priority draws per
/// item; draws with rho >= tau are forwarded with their sampler index.
class WrSite {
 public:
  WrSite(std::size_t samplers, std::uint64_t seed);

  /// Appends forwarded draws to `out` in increasing sampler order.
  void offer(double w, std::vector<WrDraw>& out);

  double tau() const { return tau_; }
  void set_tau(double tau) { tau_ = tau; }
  std::size_t samplers() const { return s_; }

 private:
  std::size_t s_;
  Rng rng_;
  double tau_ = 1.0;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint8_t> marks_;
};

template <class Payload>
struct WrSlot {
  std::optional<Payload> item;  // item holding the top priority
  double top_weight = 0.0;
  double top = 0.0;     // rho(1)
  double second = 0.0;  // rho(2)
};

/// Coordinator half of the with-replacement variant. Keeps the top two
/// priorities per sampler; a round ends once every rho(2) exceeds 2 tau.
template <class Payload>
class WrCoordinator {
 public:
  explicit WrCoordinator(std::size_t samplers) : slots_(samplers) {
    require(samplers >= 1, "sampler count must be positive");
  }

  /// Returns the number of threshold doublings caused by this draw.
  std::size_t ingest(std::uint32_t sampler, const Payload& item, double w, double rho) {
    if (sampler >= slots_.size())
      fail(ErrorCode::Protocol, "sampler index " + std::to_string(sampler) + " out of range");
    // A site batch drawn under the previous tau can arrive after a doubling.
    // Every rho(2) already exceeds the new tau, so such a draw changes nothing.
    if (!(rho >= tau_)) {
      if (!(rho >= stale_floor_))
        fail(ErrorCode::Protocol, "priority below threshold");
      return 0;
    }
    auto& slot = slots_[sampler];
    const bool was_done = slot.second > 2.0 * tau_;
    if (rho > slot.top) {
      slot.second = slot.top;
      slot.top = rho;
      slot.item = item;
      slot.top_weight = w;
    } else if (rho > slot.second) {
      slot.second = rho;
    }
    if (!was_done && slot.second > 2.0 * tau_) ++done_;

    std::size_t doublings = 0;
    if (done_ == slots_.size()) stale_floor_ = tau_;
    while (done_ == slots_.size()) {
      tau_ *= 2.0;
      ++round_;
      ++doublings;
      done_ = 0;
      for (const auto& s : slots_)
        if (s.second > 2.0 * tau_) ++done_;
    }
    return doublings;
  }

  /// Per-sampler unbiased total: max(w of the top item, rho(2)).
  double sampler_total(std::size_t t) const {
    return std::max(slots_[t].top_weight, slots_[t].second);
  }

  /// (1/s) * sum of per-sampler totals.
  double total_estimate() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < slots_.size(); ++t) sum += sampler_total(t);
    return sum / static_cast<double>(slots_.size());
  }

  double tau() const { return tau_; }
  std::size_t round() const { return round_; }
  std::size_t samplers() const { return slots_.size(); }
  const std::vector<WrSlot<Payload>>& slots() const { return slots_; }

 private:
  std::vector<WrSlot<Payload>> slots_;
  double tau_ = 1.0;
  double stale_floor_ = 1.0;  // tau before the latest doubling
  std::size_t round_ = 0;
  std::size_t done_ = 0;
};

}  // namespace distrack
