#include "distrack/hh_protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distrack/error.hpp"
#include "distrack/weighted_sampler.hpp"

namespace distrack {

std::string_view to_string(HHProtocol p) {
  switch (p) {
    case HHProtocol::P1: return "p1";
    case HHProtocol::P2: return "p2";
    case HHProtocol::P3wor: return "p3wor";
    case HHProtocol::P3wr: return "p3wr";
    case HHProtocol::P4: return "p4";
  }
  return "?";
}

HHProtocol parse_hh_protocol(std::string_view name) {
  if (name == "p1") return HHProtocol::P1;
  if (name == "p2") return HHProtocol::P2;
  if (name == "p3" || name == "p3wor") return HHProtocol::P3wor;
  if (name == "p3wr") return HHProtocol::P3wr;
  if (name == "p4") return HHProtocol::P4;
  fail(ErrorCode::InvalidArgument, "unknown heavy-hitter protocol '" + std::string(name) + "'");
}

std::string_view to_string(HHMessageKind k) {
  switch (k) {
    case HHMessageKind::SummaryAndWeight: return "summary";
    case HHMessageKind::TotalWeight: return "total";
    case HHMessageKind::ElementDelta: return "delta";
    case HHMessageKind::PrioritySample: return "sample";
    case HHMessageKind::CountSnapshot: return "snapshot";
    case HHMessageKind::BroadcastWeight: return "bcast_weight";
    case HHMessageKind::BroadcastTau: return "bcast_tau";
  }
  return "?";
}

std::size_t HHMessage::scalar_size() const {
  if (continues) return 2;
  switch (kind) {
    case HHMessageKind::SummaryAndWeight: return 2 * (summary ? summary->size() : 0) + 1;
    case HHMessageKind::TotalWeight: return 1;
    case HHMessageKind::ElementDelta: return 2;
    case HHMessageKind::PrioritySample: return indexed ? 4 : 3;
    case HHMessageKind::CountSnapshot: return indexed ? 3 : 2;
    case HHMessageKind::BroadcastWeight:
    case HHMessageKind::BroadcastTau: return 1;
  }
  return 0;
}

std::size_t HHMessage::units() const {
  if (continues) return 0;
  if (kind == HHMessageKind::SummaryAndWeight) return (summary ? summary->size() : 0) + 1;
  return 1;
}

std::size_t HHMessage::slots() const {
  if (continues) return 0;
  switch (kind) {
    case HHMessageKind::SummaryAndWeight: return summary ? summary->size() : 0;
    case HHMessageKind::ElementDelta:
    case HHMessageKind::PrioritySample:
    case HHMessageKind::CountSnapshot: return 1;
    default: return 0;
  }
}

void HHSite::ingest(ElementId e, double w, std::vector<HHMessage>& out) {
  if (!std::isfinite(w) || w < 1.0 || w > params_.beta)
    fail(ErrorCode::InvalidArgument, "weight " + std::to_string(w) + " outside [1, beta=" +
                                         std::to_string(params_.beta) + "]");
  do_ingest(e, w, out);
}

namespace {

// ---------------------------------------------------------------- P1

std::size_t p1_capacity(double eps) {
  return static_cast<std::size_t>(std::ceil(2.0 / eps - 1e-9));
}

class P1Site final : public HHSite {
 public:
  P1Site(SiteId id, const HHParams& p)
      : HHSite(id, p), sketch_(p1_capacity(p.eps)), w_hat_(static_cast<double>(p.sites)) {}

  void apply_broadcast(const HHMessage& b) override {
    if (b.kind == HHMessageKind::BroadcastWeight) w_hat_ = b.value;
  }

 protected:
  void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) override {
    sketch_.update(e, w);
    local_ += w;
    if (local_ >= params_.eps / (2.0 * static_cast<double>(params_.sites)) * w_hat_) {
      HHMessage m{HHMessageKind::SummaryAndWeight, id_};
      m.value = local_;
      m.summary = std::make_shared<const WeightedMG>(sketch_);
      out.push_back(std::move(m));
      sketch_.clear();
      local_ = 0.0;
    }
  }

 private:
  WeightedMG sketch_;
  double local_ = 0.0;
  double w_hat_;
};

class P1Coordinator final : public HHCoordinator {
 public:
  explicit P1Coordinator(const HHParams& p)
      : eps_(p.eps), merged_(p1_capacity(p.eps)), w_hat_(static_cast<double>(p.sites)) {}

  void receive(const HHMessage& msg, std::vector<HHMessage>& out) override {
    if (msg.kind != HHMessageKind::SummaryAndWeight || !msg.summary)
      fail(ErrorCode::Protocol, "P1 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    merged_.merge_in(*msg.summary);
    received_ += msg.value;
    if (received_ / w_hat_ > 1.0 + eps_ / 2.0) {
      w_hat_ = received_;
      ++broadcasts_;
      HHMessage b{HHMessageKind::BroadcastWeight};
      b.value = w_hat_;
      out.push_back(b);
    }
  }

  HHEstimates estimates() const override {
    HHEstimates est;
    est.per_element.insert(merged_.counters().begin(), merged_.counters().end());
    est.total = received_;
    return est;
  }

  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  double eps_;
  WeightedMG merged_;
  double received_ = 0.0;
  double w_hat_;
  std::size_t broadcasts_ = 0;
};

// ---------------------------------------------------------------- P2

class P2Site final : public HHSite {
 public:
  P2Site(SiteId id, const HHParams& p) : HHSite(id, p), w_hat_(static_cast<double>(p.sites)) {}

  void apply_broadcast(const HHMessage& b) override {
    if (b.kind == HHMessageKind::BroadcastWeight) w_hat_ = b.value;
  }

 protected:
  void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) override {
    const double threshold = params_.eps / static_cast<double>(params_.sites) * w_hat_;
    local_ += w;
    double& delta = deltas_[e];
    delta += w;
    if (local_ >= threshold) {
      HHMessage m{HHMessageKind::TotalWeight, id_};
      m.value = local_;
      out.push_back(m);
      local_ = 0.0;
    }
    if (delta >= threshold) {
      HHMessage m{HHMessageKind::ElementDelta, id_};
      m.element = e;
      m.value = delta;
      out.push_back(m);
      deltas_.erase(e);
    }
  }

 private:
  double local_ = 0.0;
  std::unordered_map<ElementId, double> deltas_;
  double w_hat_;
};

class P2Coordinator final : public HHCoordinator {
 public:
  explicit P2Coordinator(const HHParams& p) : sites_(p.sites) {}

  void receive(const HHMessage& msg, std::vector<HHMessage>& out) override {
    switch (msg.kind) {
      case HHMessageKind::TotalWeight:
        w_hat_ += msg.value;
        if (++count_ >= sites_) {
          count_ = 0;
          ++broadcasts_;
          HHMessage b{HHMessageKind::BroadcastWeight};
          b.value = w_hat_;
          out.push_back(b);
        }
        break;
      case HHMessageKind::ElementDelta:
        per_element_[msg.element] += msg.value;
        break;
      default:
        fail(ErrorCode::Protocol, "P2 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    }
  }

  HHEstimates estimates() const override { return {per_element_, w_hat_}; }
  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  std::size_t sites_;
  double w_hat_ = 0.0;
  std::size_t count_ = 0;
  std::size_t broadcasts_ = 0;
  std::unordered_map<ElementId, double> per_element_;
};

// ---------------------------------------------------------------- P3

void emit_tau_broadcasts(double final_tau, std::size_t doublings, std::vector<HHMessage>& out) {
  for (std::size_t k = doublings; k-- > 0;) {
    HHMessage b{HHMessageKind::BroadcastTau};
    b.value = final_tau / std::ldexp(1.0, static_cast<int>(k));
    out.push_back(b);
  }
}

class P3Site final : public HHSite {
 public:
  P3Site(SiteId id, const HHParams& p, std::uint64_t seed) : HHSite(id, p), sampler_(seed) {}

  void apply_broadcast(const HHMessage& b) override {
    if (b.kind == HHMessageKind::BroadcastTau) sampler_.set_tau(b.value);
  }

 protected:
  void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) override {
    if (auto draw = sampler_.offer(w)) {
      HHMessage m{HHMessageKind::PrioritySample, id_};
      m.element = e;
      m.value = draw->weight;
      m.priority = draw->priority;
      out.push_back(m);
    }
  }

 private:
  PrioritySite sampler_;
};

class P3Coordinator final : public HHCoordinator {
 public:
  P3Coordinator(std::size_t s, EstimateRule rule) : queues_(s), rule_(rule) {}

  void receive(const HHMessage& msg, std::vector<HHMessage>& out) override {
    if (msg.kind != HHMessageKind::PrioritySample)
      fail(ErrorCode::Protocol, "P3 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    const std::size_t d = queues_.ingest(msg.element, msg.value, msg.priority);
    emit_tau_broadcasts(queues_.tau(), d, out);
  }

  HHEstimates estimates() const override {
    HHEstimates est;
    if (queues_.stored() == 0) return est;
    const auto sample = queues_.extract_estimate(rule_);
    for (const auto& x : sample.entries) est.per_element[*x.item] += x.adjusted;
    est.total = sample.total;
    return est;
  }

  std::size_t rounds() const override { return queues_.round() + 1; }
  const PriorityCoordinator<ElementId>& queues() const { return queues_; }

 private:
  PriorityCoordinator<ElementId> queues_;
  EstimateRule rule_;
};

class P3WrSite final : public HHSite {
 public:
  P3WrSite(SiteId id, const HHParams& p, std::size_t s, std::uint64_t seed)
      : HHSite(id, p), sampler_(s, seed) {}

  void apply_broadcast(const HHMessage& b) override {
    if (b.kind == HHMessageKind::BroadcastTau) sampler_.set_tau(b.value);
  }

 protected:
  void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) override {
    draws_.clear();
    sampler_.offer(w, draws_);
    // One message per forwarded item, listing every successful sampler.
    for (std::size_t k = 0; k < draws_.size(); ++k) {
      HHMessage m{HHMessageKind::PrioritySample, id_};
      m.element = e;
      m.value = w;
      m.priority = draws_[k].priority;
      m.index = draws_[k].sampler;
      m.indexed = true;
      m.continues = k > 0;
      out.push_back(m);
    }
  }

 private:
  WrSite sampler_;
  std::vector<WrDraw> draws_;
};

class P3WrCoordinator final : public HHCoordinator {
 public:
  explicit P3WrCoordinator(std::size_t s) : slots_(s) {}

  void receive(const HHMessage& msg, std::vector<HHMessage>& out) override {
    if (msg.kind != HHMessageKind::PrioritySample)
      fail(ErrorCode::Protocol, "P3wr coordinator got a " + std::string(to_string(msg.kind)) + " message");
    const std::size_t d = slots_.ingest(msg.index, msg.element, msg.value, msg.priority);
    emit_tau_broadcasts(slots_.tau(), d, out);
  }

  HHEstimates estimates() const override {
    HHEstimates est;
    est.total = slots_.total_estimate();
    const double each = est.total / static_cast<double>(slots_.samplers());
    for (const auto& slot : slots_.slots())
      if (slot.item) est.per_element[*slot.item] += each;
    return est;
  }

  std::size_t rounds() const override { return slots_.round() + 1; }

 private:
  WrCoordinator<ElementId> slots_;
};

// ---------------------------------------------------------------- P4

double p4_send_rate(const HHParams& p, double w_hat) {
  return 2.0 * std::sqrt(static_cast<double>(p.sites)) / (p.eps * w_hat);
}

class P4Site final : public HHSite {
 public:
  P4Site(SiteId id, const HHParams& p, std::uint64_t seed)
      : HHSite(id, p), w_hat_(static_cast<double>(p.sites)) {
    for (std::size_t c = 0; c < p.p4_copies; ++c) rngs_.emplace_back(mix_seed(seed, c));
  }

  void apply_broadcast(const HHMessage& b) override {
    if (b.kind == HHMessageKind::BroadcastWeight) w_hat_ = b.value;
  }

 protected:
  void do_ingest(ElementId e, double w, std::vector<HHMessage>& out) override {
    double& count = counts_[e];
    count += w;
    const double send_prob = 1.0 - std::exp(-p4_send_rate(params_, w_hat_) * w);
    for (std::size_t c = 0; c < rngs_.size(); ++c) {
      if (uniform_open01(rngs_[c]) < send_prob) {
        HHMessage m{HHMessageKind::CountSnapshot, id_};
        m.element = e;
        m.value = count;
        m.index = static_cast<std::uint32_t>(c);
        m.indexed = rngs_.size() > 1;
        out.push_back(m);
      }
    }
    // Side channel keeping W-hat within a constant factor of W.
    unreported_ += w;
    if (unreported_ >= w_hat_ / (2.0 * static_cast<double>(params_.sites))) {
      HHMessage m{HHMessageKind::TotalWeight, id_};
      m.value = unreported_;
      out.push_back(m);
      unreported_ = 0.0;
    }
  }

 private:
  std::unordered_map<ElementId, double> counts_;
  std::vector<Rng> rngs_;
  double unreported_ = 0.0;
  double w_hat_;
};

class P4Coordinator final : public HHCoordinator {
 public:
  explicit P4Coordinator(const HHParams& p)
      : params_(p), w_hat_(static_cast<double>(p.sites)), copies_(p.p4_copies) {}

  void receive(const HHMessage& msg, std::vector<HHMessage>& out) override {
    switch (msg.kind) {
      case HHMessageKind::CountSnapshot: {
        if (msg.index >= copies_.size() || msg.origin >= params_.sites)
          fail(ErrorCode::Protocol, "P4 snapshot with bad copy or site index");
        Copy& copy = copies_[msg.index];
        auto& per_site = copy.snapshots[msg.element];
        if (per_site.empty()) per_site.assign(params_.sites, 0.0);
        const double next = msg.value + 1.0 / p4_send_rate(params_, w_hat_);
        const double change = next - per_site[msg.origin];
        per_site[msg.origin] = next;
        copy.estimate[msg.element] += change;
        copy.total += change;
        break;
      }
      case HHMessageKind::TotalWeight:
        reported_ += msg.value;
        if (reported_ >= 2.0 * w_hat_) {
          while (reported_ >= 2.0 * w_hat_) w_hat_ *= 2.0;
          ++broadcasts_;
          HHMessage b{HHMessageKind::BroadcastWeight};
          b.value = w_hat_;
          out.push_back(b);
        }
        break;
      default:
        fail(ErrorCode::Protocol, "P4 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    }
  }

  HHEstimates estimates() const override {
    if (copies_.size() == 1) return {copies_[0].estimate, copies_[0].total};
    HHEstimates est;
    std::vector<double> vals(copies_.size());
    for (const auto& copy : copies_) {
      for (const auto& [e, unused] : copy.estimate) {
        if (est.per_element.count(e)) continue;
        for (std::size_t c = 0; c < copies_.size(); ++c) {
          auto it = copies_[c].estimate.find(e);
          vals[c] = it == copies_[c].estimate.end() ? 0.0 : it->second;
        }
        est.per_element[e] = median(vals);
      }
    }
    for (std::size_t c = 0; c < copies_.size(); ++c) vals[c] = copies_[c].total;
    est.total = median(vals);
    return est;
  }

  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  struct Copy {
    std::unordered_map<ElementId, std::vector<double>> snapshots;
    std::unordered_map<ElementId, double> estimate;
    double total = 0.0;
  };

  static double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }

  HHParams params_;
  double w_hat_;
  double reported_ = 0.0;
  std::size_t broadcasts_ = 0;
  std::vector<Copy> copies_;
};

}  // namespace

HHProtocolInstance make_hh_protocol(HHProtocol protocol, const HHParams& params,
                                    std::uint64_t seed) {
  require(params.sites >= 1, "site count must be at least 1");
  require(params.eps > 0.0 && params.eps < 1.0, "eps must lie in (0,1)");
  require(params.beta >= 1.0 && std::isfinite(params.beta), "beta must be >= 1");
  require(params.p4_copies >= 1, "P4 copy count must be at least 1");

  HHProtocolInstance inst{protocol, params, {}, nullptr};
  const std::size_t s =
      params.sample_size ? params.sample_size : default_sample_size(params.eps);
  inst.params.sample_size = s;
  for (std::size_t i = 0; i < params.sites; ++i) {
    const auto id = static_cast<SiteId>(i);
    const std::uint64_t site_seed = mix_seed(seed, 1000 + i);
    switch (protocol) {
      case HHProtocol::P1: inst.sites.push_back(std::make_unique<P1Site>(id, params)); break;
      case HHProtocol::P2: inst.sites.push_back(std::make_unique<P2Site>(id, params)); break;
      case HHProtocol::P3wor:
        inst.sites.push_back(std::make_unique<P3Site>(id, params, site_seed));
        break;
      case HHProtocol::P3wr:
        inst.sites.push_back(std::make_unique<P3WrSite>(id, params, s, site_seed));
        break;
      case HHProtocol::P4:
        inst.sites.push_back(std::make_unique<P4Site>(id, params, site_seed));
        break;
    }
  }
  switch (protocol) {
    case HHProtocol::P1: inst.coordinator = std::make_unique<P1Coordinator>(params); break;
    case HHProtocol::P2: inst.coordinator = std::make_unique<P2Coordinator>(params); break;
    case HHProtocol::P3wor: inst.coordinator = std::make_unique<P3Coordinator>(s, params.estimator); break;
    case HHProtocol::P3wr: inst.coordinator = std::make_unique<P3WrCoordinator>(s); break;
    case HHProtocol::P4: inst.coordinator = std::make_unique<P4Coordinator>(params); break;
  }
  return inst;
}

std::vector<std::pair<ElementId, double>> hh_query(const HHEstimates& est, double phi, double eps) {
  std::vector<std::pair<ElementId, double>> out;
  if (!(est.total > 0.0)) return out;
  const double cut = phi - eps / 2.0;
  for (const auto& [e, w] : est.per_element)
    if (w / est.total >= cut) out.emplace_back(e, w);
  std::sort(out.begin(), out.end());
  return out;
}

bool lemma1_classify(double w_e, double w_total, double phi, double eps) {
  if (!(w_total > 0.0)) fail(ErrorCode::InvalidArgument, "total weight estimate must be positive");
  return w_e / w_total > phi - eps / 2.0;
}

}  // namespace distrack
