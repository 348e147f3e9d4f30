#include "distrack/matrix_protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distrack/error.hpp"
#include "distrack/weighted_sampler.hpp"

namespace distrack {

std::string_view to_string(MProtocol p) {
  switch (p) {
    case MProtocol::MP1: return "mp1";
    case MProtocol::MP2: return "mp2";
    case MProtocol::MP2Bounded: return "mp2-bounded";
    case MProtocol::MP3wor: return "mp3wor";
    case MProtocol::MP3wr: return "mp3wr";
    case MProtocol::MP4: return "mp4";
  }
  return "?";
}

MProtocol parse_matrix_protocol(std::string_view name) {
  if (name == "mp1") return MProtocol::MP1;
  if (name == "mp2") return MProtocol::MP2;
  if (name == "mp2-bounded" || name == "mp2b") return MProtocol::MP2Bounded;
  if (name == "mp3" || name == "mp3wor") return MProtocol::MP3wor;
  if (name == "mp3wr") return MProtocol::MP3wr;
  if (name == "mp4") return MProtocol::MP4;
  fail(ErrorCode::InvalidArgument, "unknown matrix protocol '" + std::string(name) + "'");
}

std::string_view to_string(MMessageKind k) {
  switch (k) {
    case MMessageKind::SketchAndNorm: return "sketch";
    case MMessageKind::NormOnly: return "norm";
    case MMessageKind::Direction: return "direction";
    case MMessageKind::SampledRow: return "sample";
    case MMessageKind::SingularSnapshot: return "snapshot";
    case MMessageKind::BroadcastNorm: return "bcast_norm";
    case MMessageKind::BroadcastTau: return "bcast_tau";
  }
  return "?";
}

std::size_t MMessage::scalar_size() const {
  if (continues) return 2;
  switch (kind) {
    case MMessageKind::SketchAndNorm: return (sketch ? sketch->rows() : 0) * dim + 1;
    case MMessageKind::NormOnly: return 1;
    case MMessageKind::Direction: return dim;
    case MMessageKind::SampledRow: return dim + (indexed ? 3 : 2);
    case MMessageKind::SingularSnapshot: return dim + dim * dim;
    case MMessageKind::BroadcastNorm:
    case MMessageKind::BroadcastTau: return 1;
  }
  return 0;
}

std::size_t MMessage::units() const {
  if (continues) return 0;
  switch (kind) {
    case MMessageKind::SketchAndNorm: return (sketch ? sketch->rows() : 0) + 1;
    case MMessageKind::SingularSnapshot: return 1 + dim;
    default: return 1;
  }
}

std::size_t MMessage::slots() const {
  if (continues) return 0;
  switch (kind) {
    case MMessageKind::SketchAndNorm: return sketch ? sketch->rows() : 0;
    case MMessageKind::Direction:
    case MMessageKind::SampledRow: return 1;
    case MMessageKind::SingularSnapshot: return 1 + dim;
    default: return 0;
  }
}

bool MSite::ingest(RowRef row, std::vector<MMessage>& out) {
  if (static_cast<std::size_t>(row.size()) != params_.dim)
    fail(ErrorCode::InvalidArgument, "row of dimension " + std::to_string(row.size()) +
                                         " fed to a d=" + std::to_string(params_.dim) + " protocol");
  if (!row.allFinite()) fail(ErrorCode::InvalidArgument, "row has non-finite entries");
  const double norm_sq = row.squaredNorm();
  if (norm_sq == 0.0) return false;
  do_ingest(row, norm_sq, out);
  return true;
}

Eigen::MatrixXd MCoordinator::query_gram() const {
  const Eigen::MatrixXd b = query();
  if (b.rows() == 0) return {};
  return b.transpose() * b;
}

namespace {

Eigen::MatrixXd zero_gram(std::size_t d) {
  return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

MMessage norm_message(SiteId id, double value) {
  MMessage m{MMessageKind::NormOnly, id};
  m.value = value;
  return m;
}

MMessage direction_message(SiteId id, const Eigen::VectorXd& v, std::size_t dim) {
  MMessage m{MMessageKind::Direction, id};
  m.dim = dim;
  m.vector = std::make_shared<const Eigen::VectorXd>(v);
  return m;
}

// ---------------------------------------------------------------- MP1

class Mp1Site final : public MSite {
 public:
  Mp1Site(SiteId id, const MParams& p)
      : MSite(id, p), sketch_(FDSketch::ell_for_error(p.eps / 2.0), p.dim),
        f_hat_(static_cast<double>(p.sites)) {}

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastNorm) f_hat_ = b.value;
  }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    sketch_.update(row);
    local_ += norm_sq;
    if (local_ >= params_.eps / (2.0 * static_cast<double>(params_.sites)) * f_hat_) {
      MMessage m{MMessageKind::SketchAndNorm, id_};
      m.dim = params_.dim;
      m.value = local_;
      m.sketch = std::make_shared<const FDSketch>(sketch_);
      out.push_back(std::move(m));
      sketch_.clear();
      local_ = 0.0;
    }
  }

 private:
  FDSketch sketch_;
  double local_ = 0.0;
  double f_hat_;
};

class Mp1Coordinator final : public MCoordinator {
 public:
  explicit Mp1Coordinator(const MParams& p)
      : eps_(p.eps), merged_(FDSketch::ell_for_error(p.eps / 2.0), p.dim),
        f_hat_(static_cast<double>(p.sites)) {}

  void receive(const MMessage& msg, std::vector<MMessage>& out) override {
    if (msg.kind != MMessageKind::SketchAndNorm || !msg.sketch)
      fail(ErrorCode::Protocol, "MP1 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    merged_.merge_in(*msg.sketch);
    received_ += msg.value;
    if (received_ / f_hat_ > 1.0 + eps_ / 2.0) {
      f_hat_ = received_;
      ++broadcasts_;
      MMessage b{MMessageKind::BroadcastNorm};
      b.value = f_hat_;
      out.push_back(b);
    }
  }

  Eigen::MatrixXd query() const override { return merged_.matrix(); }
  double norm_estimate() const override { return received_; }
  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  double eps_;
  FDSketch merged_;
  double received_ = 0.0;
  double f_hat_;
  std::size_t broadcasts_ = 0;
};

// ---------------------------------------------------------------- MP2

// Exact site: B_j is held as its Gram matrix B_j^T B_j. Directions are shed
// from its eigendecomposition, which has the same right singular vectors and
// squared singular values as the SVD of B_j. The decomposition is skipped
// while an upper bound on the top eigenvalue stays below the threshold.
class Mp2Site final : public MSite {
 public:
  Mp2Site(SiteId id, const MParams& p)
      : MSite(id, p), f_hat_(static_cast<double>(p.sites)), gram_(zero_gram(p.dim)) {}

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastNorm) f_hat_ = b.value;
  }

  Eigen::MatrixXd residual_gram() const override { return gram_; }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    const double threshold = params_.eps / static_cast<double>(params_.sites) * f_hat_;
    local_ += norm_sq;
    if (local_ >= threshold) {
      out.push_back(norm_message(id_, local_));
      local_ = 0.0;
    }
    gram_.noalias() += row * row.transpose();
    top_bound_ += norm_sq;
    if (std::min(top_bound_, gram_.trace()) < threshold) return;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
    const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd rebuilt = zero_gram(params_.dim);
    double kept_top = 0.0;
    for (Eigen::Index i = lambda.size(); i-- > 0;) {
      const double l = lambda(i);
      if (l >= threshold) {
        out.push_back(direction_message(id_, std::sqrt(l) * v.col(i), params_.dim));
      } else if (l > 0.0) {
        rebuilt.noalias() += l * v.col(i) * v.col(i).transpose();
        kept_top = std::max(kept_top, l);
      }
    }
    gram_.swap(rebuilt);
    top_bound_ = kept_top;
  }

 private:
  double f_hat_;
  double local_ = 0.0;
  Eigen::MatrixXd gram_;
  double top_bound_ = 0.0;
};

// Bounded-space site: two FD sketches (all rows, and rows already sent) with
// eps' = eps / 4m. Directions of their Gram difference reaching 3 eps / 4m
// times F-hat are sent and appended to the sent-rows sketch.
class Mp2BoundedSite final : public MSite {
 public:
  Mp2BoundedSite(SiteId id, const MParams& p)
      : MSite(id, p), f_hat_(static_cast<double>(p.sites)),
        all_(FDSketch::ell_for_error(p.eps / (4.0 * static_cast<double>(p.sites))), p.dim),
        sent_(FDSketch::ell_for_error(p.eps / (4.0 * static_cast<double>(p.sites))), p.dim) {}

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastNorm) f_hat_ = b.value;
  }

  Eigen::MatrixXd residual_gram() const override { return all_.gram() - sent_.gram(); }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    const double m = static_cast<double>(params_.sites);
    local_ += norm_sq;
    if (local_ >= params_.eps / m * f_hat_) {
      out.push_back(norm_message(id_, local_));
      local_ = 0.0;
    }
    all_.update(row);
    top_bound_ += norm_sq;
    const double threshold = 3.0 * params_.eps / (4.0 * m) * f_hat_;
    if (top_bound_ < threshold) return;

    const Eigen::MatrixXd diff = all_.gram() - sent_.gram();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::MatrixXd& v = eig.eigenvectors();
    double kept_top = 0.0;
    double shrink = 0.0;
    for (Eigen::Index i = lambda.size(); i-- > 0;) {
      const double l = lambda(i);
      if (l >= threshold) {
        const Eigen::VectorXd r = std::sqrt(l) * v.col(i);
        out.push_back(direction_message(id_, r, params_.dim));
        shrink += sent_.update(r);
      } else {
        kept_top = std::max(kept_top, l);
      }
    }
    // Shrinking the sent-rows sketch can raise the difference by at most
    // the subtracted value in any direction.
    top_bound_ = kept_top + shrink;
  }

 private:
  double f_hat_;
  double local_ = 0.0;
  FDSketch all_;
  FDSketch sent_;
  double top_bound_ = 0.0;
};

class Mp2Coordinator final : public MCoordinator {
 public:
  explicit Mp2Coordinator(const MParams& p) : sites_(p.sites), dim_(p.dim), gram_(zero_gram(p.dim)) {}

  void receive(const MMessage& msg, std::vector<MMessage>& out) override {
    switch (msg.kind) {
      case MMessageKind::NormOnly:
        f_hat_ += msg.value;
        if (++count_ >= sites_) {
          count_ = 0;
          ++broadcasts_;
          MMessage b{MMessageKind::BroadcastNorm};
          b.value = f_hat_;
          out.push_back(b);
        }
        break;
      case MMessageKind::Direction:
        rows_.push_back(msg.vector);
        gram_.noalias() += (*msg.vector) * msg.vector->transpose();
        break;
      default:
        fail(ErrorCode::Protocol, "MP2 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    }
  }

  Eigen::MatrixXd query() const override {
    Eigen::MatrixXd b(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      b.row(static_cast<Eigen::Index>(i)) = rows_[i]->transpose();
    return b;
  }
  Eigen::MatrixXd query_gram() const override { return gram_; }
  double norm_estimate() const override { return f_hat_; }
  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  std::size_t sites_;
  std::size_t dim_;
  double f_hat_ = 0.0;
  std::size_t count_ = 0;
  std::size_t broadcasts_ = 0;
  std::vector<RowPtr> rows_;
  Eigen::MatrixXd gram_;
};

// ---------------------------------------------------------------- MP3

void emit_tau_broadcasts(double final_tau, std::size_t doublings, std::vector<MMessage>& out) {
  for (std::size_t k = doublings; k-- > 0;) {
    MMessage b{MMessageKind::BroadcastTau};
    b.value = final_tau / std::ldexp(1.0, static_cast<int>(k));
    out.push_back(b);
  }
}

class Mp3Site final : public MSite {
 public:
  Mp3Site(SiteId id, const MParams& p, std::uint64_t seed) : MSite(id, p), sampler_(seed) {}

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastTau) sampler_.set_tau(b.value);
  }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    if (auto draw = sampler_.offer(norm_sq)) {
      MMessage m{MMessageKind::SampledRow, id_};
      m.dim = params_.dim;
      m.vector = std::make_shared<const Eigen::VectorXd>(row);
      m.value = draw->weight;
      m.priority = draw->priority;
      out.push_back(std::move(m));
    }
  }

 private:
  PrioritySite sampler_;
};

class Mp3Coordinator final : public MCoordinator {
 public:
  Mp3Coordinator(std::size_t s, std::size_t dim, EstimateRule rule)
      : queues_(s), dim_(dim), rule_(rule) {}

  void receive(const MMessage& msg, std::vector<MMessage>& out) override {
    if (msg.kind != MMessageKind::SampledRow)
      fail(ErrorCode::Protocol, "MP3 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    const std::size_t d = queues_.ingest(msg.vector, msg.value, msg.priority);
    emit_tau_broadcasts(queues_.tau(), d, out);
  }

  // Rows with w >= rho-hat are kept verbatim; lighter rows are scaled to
  // squared norm rho-hat.
  Eigen::MatrixXd query() const override {
    if (queues_.stored() == 0) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(dim_));
    const auto sample = queues_.extract_estimate(rule_);
    Eigen::MatrixXd b(static_cast<Eigen::Index>(sample.entries.size()),
                      static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < sample.entries.size(); ++i) {
      const auto& x = sample.entries[i];
      b.row(static_cast<Eigen::Index>(i)) = std::sqrt(x.adjusted / x.weight) * (*x.item)->transpose();
    }
    return b;
  }

  double norm_estimate() const override {
    return queues_.stored() == 0 ? 0.0 : queues_.extract_estimate(rule_).total;
  }
  std::size_t rounds() const override { return queues_.round() + 1; }

 private:
  PriorityCoordinator<RowPtr> queues_;
  std::size_t dim_;
  EstimateRule rule_;
};

class Mp3WrSite final : public MSite {
 public:
  Mp3WrSite(SiteId id, const MParams& p, std::size_t s, std::uint64_t seed)
      : MSite(id, p), sampler_(s, seed) {}

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastTau) sampler_.set_tau(b.value);
  }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    draws_.clear();
    sampler_.offer(norm_sq, draws_);
    if (draws_.empty()) return;
    auto shared = std::make_shared<const Eigen::VectorXd>(row);
    for (std::size_t k = 0; k < draws_.size(); ++k) {
      MMessage m{MMessageKind::SampledRow, id_};
      m.dim = params_.dim;
      m.vector = shared;
      m.value = norm_sq;
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

class Mp3WrCoordinator final : public MCoordinator {
 public:
  Mp3WrCoordinator(std::size_t s, std::size_t dim) : slots_(s), dim_(dim) {}

  void receive(const MMessage& msg, std::vector<MMessage>& out) override {
    if (msg.kind != MMessageKind::SampledRow)
      fail(ErrorCode::Protocol, "MP3wr coordinator got a " + std::string(to_string(msg.kind)) + " message");
    const std::size_t d = slots_.ingest(msg.index, msg.vector, msg.value, msg.priority);
    emit_tau_broadcasts(slots_.tau(), d, out);
  }

  // Each sampler's row rescaled to squared norm W-hat / s.
  Eigen::MatrixXd query() const override {
    const double each = slots_.total_estimate() / static_cast<double>(slots_.samplers());
    Eigen::MatrixXd b(static_cast<Eigen::Index>(slots_.samplers()), static_cast<Eigen::Index>(dim_));
    Eigen::Index n = 0;
    for (const auto& slot : slots_.slots()) {
      if (!slot.item) continue;
      b.row(n++) = std::sqrt(each / slot.top_weight) * (*slot.item)->transpose();
    }
    b.conservativeResize(n, Eigen::NoChange);
    return b;
  }

  double norm_estimate() const override { return slots_.total_estimate(); }
  std::size_t rounds() const override { return slots_.round() + 1; }

 private:
  WrCoordinator<RowPtr> slots_;
  std::size_t dim_;
};

// ---------------------------------------------------------------- MP4

double mp4_send_rate(const MParams& p, double f_hat) {
  return 2.0 * std::sqrt(static_cast<double>(p.sites)) / (p.eps * f_hat);
}

// The approximation A-hat_j = Z V^T keeps the right singular vectors it
// started with. A-hat_j starts empty, whose SVD is taken with V = I.
class Mp4Site final : public MSite {
 public:
  Mp4Site(SiteId id, const MParams& p, std::uint64_t seed)
      : MSite(id, p), rng_(seed), f_hat_(static_cast<double>(p.sites)) {
    const auto d = static_cast<Eigen::Index>(p.dim);
    view_.exact_gram = zero_gram(p.dim);
    view_.z = Eigen::VectorXd::Zero(d);
    basis_ = std::make_shared<const Eigen::MatrixXd>(Eigen::MatrixXd::Identity(d, d));
    view_.basis = *basis_;
  }

  void apply_broadcast(const MMessage& b) override {
    if (b.kind == MMessageKind::BroadcastNorm) f_hat_ = b.value;
  }

  const Mp4SiteView& view() const { return view_; }

 protected:
  void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) override {
    view_.exact_gram.noalias() += row * row.transpose();
    const double p = mp4_send_rate(params_, f_hat_);
    const double send_prob = 1.0 - std::exp(-p * norm_sq);
    if (uniform_open01(rng_) < send_prob) {
      const Eigen::MatrixXd& v = *basis_;
      Eigen::VectorXd z(v.cols());
      for (Eigen::Index i = 0; i < v.cols(); ++i)
        z(i) = std::sqrt(v.col(i).dot(view_.exact_gram * v.col(i)) + 1.0 / p);
      view_.z = z;
      view_.inv_p = 1.0 / p;
      view_.emitted = true;
      MMessage m{MMessageKind::SingularSnapshot, id_};
      m.dim = params_.dim;
      m.vector = std::make_shared<const Eigen::VectorXd>(std::move(z));
      m.basis = basis_;
      out.push_back(std::move(m));
    }
    unreported_ += norm_sq;
    if (unreported_ >= f_hat_ / (2.0 * static_cast<double>(params_.sites))) {
      out.push_back(norm_message(id_, unreported_));
      unreported_ = 0.0;
    }
  }

 private:
  Rng rng_;
  double f_hat_;
  double unreported_ = 0.0;
  std::shared_ptr<const Eigen::MatrixXd> basis_;
  Mp4SiteView view_;
};

class Mp4Coordinator final : public MCoordinator {
 public:
  explicit Mp4Coordinator(const MParams& p)
      : params_(p), f_hat_(static_cast<double>(p.sites)), factors_(p.sites) {}

  void receive(const MMessage& msg, std::vector<MMessage>& out) override {
    switch (msg.kind) {
      case MMessageKind::SingularSnapshot:
        if (msg.origin >= params_.sites) fail(ErrorCode::Protocol, "MP4 snapshot from unknown site");
        factors_[msg.origin] = {msg.vector, msg.basis};
        break;
      case MMessageKind::NormOnly:
        reported_ += msg.value;
        if (reported_ >= 2.0 * f_hat_) {
          while (reported_ >= 2.0 * f_hat_) f_hat_ *= 2.0;
          ++broadcasts_;
          MMessage b{MMessageKind::BroadcastNorm};
          b.value = f_hat_;
          out.push_back(b);
        }
        break;
      default:
        fail(ErrorCode::Protocol, "MP4 coordinator got a " + std::string(to_string(msg.kind)) + " message");
    }
  }

  // Stack of Z_j V_j^T over sites that have reported.
  Eigen::MatrixXd query() const override {
    const auto d = static_cast<Eigen::Index>(params_.dim);
    Eigen::MatrixXd b(0, d);
    for (const auto& f : factors_) {
      if (!f.z) continue;
      const Eigen::MatrixXd block = f.z->asDiagonal() * f.basis->transpose();
      b.conservativeResize(b.rows() + d, Eigen::NoChange);
      b.bottomRows(d) = block;
    }
    return b;
  }

  double norm_estimate() const override { return f_hat_; }
  std::size_t rounds() const override { return broadcasts_ + 1; }

 private:
  struct Factors {
    RowPtr z;
    std::shared_ptr<const Eigen::MatrixXd> basis;
  };

  MParams params_;
  double f_hat_;
  double reported_ = 0.0;
  std::size_t broadcasts_ = 0;
  std::vector<Factors> factors_;
};

}  // namespace

Mp4SiteView mp4_site_view(const MSite& site) {
  const auto* s = dynamic_cast<const Mp4Site*>(&site);
  if (!s) fail(ErrorCode::InvalidArgument, "not an MP4 site");
  return s->view();
}

MProtocolInstance make_matrix_protocol(MProtocol protocol, const MParams& params,
                                       std::uint64_t seed) {
  require(params.sites >= 1, "site count must be at least 1");
  require(params.eps > 0.0 && params.eps < 1.0, "eps must lie in (0,1)");
  require(params.dim >= 1, "matrix dimension must be positive");

  MProtocolInstance inst{protocol, params, {}, nullptr};
  const std::size_t s =
      params.sample_size ? params.sample_size : default_sample_size(params.eps);
  inst.params.sample_size = s;
  for (std::size_t i = 0; i < params.sites; ++i) {
    const auto id = static_cast<SiteId>(i);
    const std::uint64_t site_seed = mix_seed(seed, 1000 + i);
    switch (protocol) {
      case MProtocol::MP1: inst.sites.push_back(std::make_unique<Mp1Site>(id, params)); break;
      case MProtocol::MP2: inst.sites.push_back(std::make_unique<Mp2Site>(id, params)); break;
      case MProtocol::MP2Bounded:
        inst.sites.push_back(std::make_unique<Mp2BoundedSite>(id, params));
        break;
      case MProtocol::MP3wor:
        inst.sites.push_back(std::make_unique<Mp3Site>(id, params, site_seed));
        break;
      case MProtocol::MP3wr:
        inst.sites.push_back(std::make_unique<Mp3WrSite>(id, params, s, site_seed));
        break;
      case MProtocol::MP4:
        inst.sites.push_back(std::make_unique<Mp4Site>(id, params, site_seed));
        break;
    }
  }
  switch (protocol) {
    case MProtocol::MP1: inst.coordinator = std::make_unique<Mp1Coordinator>(params); break;
    case MProtocol::MP2:
    case MProtocol::MP2Bounded: inst.coordinator = std::make_unique<Mp2Coordinator>(params); break;
    case MProtocol::MP3wor:
      inst.coordinator = std::make_unique<Mp3Coordinator>(s, params.dim, params.estimator);
      break;
    case MProtocol::MP3wr:
      inst.coordinator = std::make_unique<Mp3WrCoordinator>(s, params.dim);
      break;
    case MProtocol::MP4: inst.coordinator = std::make_unique<Mp4Coordinator>(params); break;
  }
  return inst;
}

}  // namespace distrack
