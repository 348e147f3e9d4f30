#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "distrack/common.hpp"
#include "distrack/matrix_sketch.hpp"
#include "distrack/weighted_sampler.hpp"

namespace distrack {

enum class MProtocol { MP1, MP2, MP2Bounded, MP3wor, MP3wr, MP4 };

std::string_view to_string(MProtocol p);
MProtocol parse_matrix_protocol(std::string_view name);

enum class MMessageKind {
  SketchAndNorm,     // (B_i, F_i)
  NormOnly,          // F_j
  Direction,         // sigma * v
  SampledRow,        // (row, w, rho[, sampler])
  SingularSnapshot,  // (z, V)
  BroadcastNorm,     // F-hat
  BroadcastTau,      // tau
};

std::string_view to_string(MMessageKind k);

using RowPtr = std::shared_ptr<const Eigen::VectorXd>;

struct MMessage {
  MMessageKind kind;
  SiteId origin = kCoordinator;
  double value = 0.0;
  double priority = 0.0;
  std::uint32_t index = 0;
  bool indexed = false;
  bool continues = false;  // extra (index, priority) riding on the previous message
  std::size_t dim = 0;
  RowPtr vector{};                         // direction, sampled row, or z
  std::shared_ptr<const FDSketch> sketch{}; // MP1 payload
  std::shared_ptr<const Eigen::MatrixXd> basis{}; // MP4 right singular vectors (columns)

  std::size_t scalar_size() const;
  /// Count in the message tally: one per d-vector carried, one per scalar
  /// message.
  std::size_t units() const;
  /// d-vectors carried.
  std::size_t slots() const;
  bool is_broadcast() const {
    return kind == MMessageKind::BroadcastNorm || kind == MMessageKind::BroadcastTau;
  }
};

struct MParams {
  double eps = 0.1;
  std::size_t sites = 50;
  std::size_t dim = 0;
  std::size_t sample_size = 0;  // MP3; 0 selects default_sample_size(eps)
  EstimateRule estimator = EstimateRule::DropMinimum;  // MP3wor
};

class MSite {
 public:
  virtual ~MSite() = default;
  /// Validates the row and dispatches. Zero rows are dropped; returns false
  /// in that case.
  bool ingest(RowRef row, std::vector<MMessage>& out);
  virtual void apply_broadcast(const MMessage& b) = 0;
  /// Residual Gram matrix B_j^T B_j still held at the site, where the protocol
  /// defines one (MP2 exact mode); empty otherwise.
  virtual Eigen::MatrixXd residual_gram() const { return {}; }

 protected:
  MSite(SiteId id, const MParams& params) : id_(id), params_(params) {}
  virtual void do_ingest(RowRef row, double norm_sq, std::vector<MMessage>& out) = 0;

  SiteId id_;
  MParams params_;
};

class MCoordinator {
 public:
  virtual ~MCoordinator() = default;
  virtual void receive(const MMessage& msg, std::vector<MMessage>& out) = 0;
  /// Current approximation B (rows x d).
  virtual Eigen::MatrixXd query() const = 0;
  /// B^T B; protocols that keep it incrementally override this.
  virtual Eigen::MatrixXd query_gram() const;
  /// Coordinator's |A|_F^2 estimate (F-hat, or the sample total).
  virtual double norm_estimate() const = 0;
  virtual std::size_t rounds() const = 0;
};

struct MProtocolInstance {
  MProtocol protocol;
  MParams params;
  std::vector<std::unique_ptr<MSite>> sites;
  std::unique_ptr<MCoordinator> coordinator;
};

MProtocolInstance make_matrix_protocol(MProtocol protocol, const MParams& params,
                                       std::uint64_t seed);

/// MP4 site state exposed for checking the singular-direction identity.
struct Mp4SiteView {
  Eigen::MatrixXd exact_gram;  // A_j^T A_j
  Eigen::VectorXd z;           // current diag of the approximation
  Eigen::MatrixXd basis;       // V
  double inv_p = 0.0;          // 1/p at the last emission
  bool emitted = false;
};
/// Returns the MP4 view of a site; throws if the site is not an MP4 site.
Mp4SiteView mp4_site_view(const MSite& site);

}  // namespace distrack
