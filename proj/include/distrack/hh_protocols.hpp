#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distrack/common.hpp"
#include "distrack/freq_sketch.hpp"
#include "distrack/weighted_sampler.hpp"

namespace distrack {

enum class HHProtocol { P1, P2, P3wor, P3wr, P4 };

std::string_view to_string(HHProtocol p);
HHProtocol parse_hh_protocol(std::string_view name);

enum class HHMessageKind {
  SummaryAndWeight,  // (G_i, W_i)
  TotalWeight,       // W_i
  ElementDelta,      // (e, delta)
  PrioritySample,    // (e, w, rho[, sampler])
  CountSnapshot,     // (e, f_e(A_j))
  BroadcastWeight,   // W-hat
  BroadcastTau,      // tau
};

std::string_view to_string(HHMessageKind k);

struct HHMessage {
  HHMessageKind kind;
  SiteId origin = kCoordinator;
  ElementId element = 0;
  double value = 0.0;
  double priority = 0.0;
  std::uint32_t index = 0;  // sampler index (P3wr) or estimator copy (P4)
  bool indexed = false;     // carries `index` on the wire
  bool continues = false;   // extra (index, priority) riding on the previous message
  std::shared_ptr<const WeightedMG> summary{};

  /// Number of scalars carried.
  std::size_t scalar_size() const;
  /// Count in the message tally. A summary counts one per counter plus one
  /// for the weight.
  std::size_t units() const;
  /// Element entries carried (counters for a summary, one for element-bearing
  /// messages, zero for pure scalars).
  std::size_t slots() const;
  bool is_broadcast() const {
    return kind == HHMessageKind::BroadcastWeight || kind == HHMessageKind::BroadcastTau;
  }
};

struct HHParams {
  double eps = 1e-3;
  std::size_t sites = 50;
  double beta = 1000.0;
  std::size_t sample_size = 0;  // P3; 0 selects default_sample_size(eps)
  std::size_t p4_copies = 1;    // P4 median-of-copies amplification
  EstimateRule estimator = EstimateRule::DropMinimum;  // P3wor
};

/// Current per-element estimates and total-weight estimate at the coordinator.
struct HHEstimates {
  std::unordered_map<ElementId, double> per_element;
  double total = 0.0;

  double of(ElementId e) const {
    auto it = per_element.find(e);
    return it == per_element.end() ? 0.0 : it->second;
  }
};

class HHSite {
 public:
  virtual ~HHSite() = default;
  /// Processes one tuple; messages for the coordinator are appended to `out`.
  /// Rejects weights outside [1, beta].
  void ingest(ElementId e, double w, std::vector<HHMessage>& out);
  virtual void apply_broadcast(const HHMessage& b) = 0;

 protected:
  HHSite(SiteId id, const HHParams& params) : id_(id), params_(params) {}
  virtual void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) = 0;

  SiteId id_;
  HHParams params_;
};

class HHCoordinator {
 public:
  virtual ~HHCoordinator() = default;
  /// Consumes one site message; broadcasts are appended to `out`.
  virtual void receive(const HHMessage& msg, std::vector<HHMessage>& out) = 0;
  virtual HHEstimates estimates() const = 0;
  /// Threshold-advance rounds observed so far (starts at 1).
  virtual std::size_t rounds() const = 0;
};

struct HHProtocolInstance {
  HHProtocol protocol;
  HHParams params;
  std::vector<std::unique_ptr<HHSite>> sites;
  std::unique_ptr<HHCoordinator> coordinator;
};

HHProtocolInstance make_hh_protocol(HHProtocol protocol, const HHParams& params,
                                    std::uint64_t seed);

/// Elements whose estimate ratio is at least phi - eps/2, sorted by element id.
std::vector<std::pair<ElementId, double>> hh_query(const HHEstimates& est, double phi, double eps);

/// Heavy-hitter decision rule: accept iff w_e / w_total > phi - eps/2.
/// Sound when |f_e - w_e| <= (eps/6) W and |W - w_total| <= (eps/5) W.
bool lemma1_classify(double w_e, double w_total, double phi, double eps);

}  // namespace distrack
