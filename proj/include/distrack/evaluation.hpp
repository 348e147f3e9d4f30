#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "distrack/common.hpp"
#include "distrack/matrix_sketch.hpp"

namespace distrack {

/// Exact per-element weights, accumulated tuple by tuple.
class ExactHHOracle {
 public:
  void add(ElementId e, double w) {
    f_[e] += w;
    total_ += w;
  }
  double frequency(ElementId e) const {
    auto it = f_.find(e);
    return it == f_.end() ? 0.0 : it->second;
  }
  double total() const { return total_; }
  std::size_t distinct() const { return f_.size(); }
  const std::unordered_map<ElementId, double>& frequencies() const { return f_; }

  /// Elements with f_e >= phi * W, sorted by id.
  std::vector<std::pair<ElementId, double>> heavy_hitters(double phi) const;

 private:
  std::unordered_map<ElementId, double> f_;
  double total_ = 0.0;
};

struct HHQualityReport {
  double recall = 1.0;
  double precision = 1.0;
  double err = 0.0;         // mean |W_e - f_e| / f_e over returned true heavy hitters
  double err_w = 0.0;       // max |W_e - f_e| / W over true heavy hitters
  double within_eps = 1.0;  // fraction of true heavy hitters with |W_e - f_e| <= eps W
  std::size_t true_count = 0;
  std::size_t returned_count = 0;
  std::size_t hits = 0;
};

/// `returned` holds the protocol's answer with its estimates; `estimate`
/// gives the protocol estimate for any element (for err_w / within_eps).
template <class EstimateFn>
HHQualityReport hh_quality(const ExactHHOracle& oracle,
                           const std::vector<std::pair<ElementId, double>>& returned, double phi,
                           double eps, EstimateFn estimate);

HHQualityReport hh_quality(const ExactHHOracle& oracle,
                           const std::vector<std::pair<ElementId, double>>& returned, double phi);

double matrix_quality(const CovarianceAccumulator& acc, const Eigen::MatrixXd& b);
double matrix_quality_gram(const CovarianceAccumulator& acc, const Eigen::MatrixXd& b_gram);

// ----------------------------------------------------------------

template <class EstimateFn>
HHQualityReport hh_quality(const ExactHHOracle& oracle,
                           const std::vector<std::pair<ElementId, double>>& returned, double phi,
                           double eps, EstimateFn estimate) {
  HHQualityReport r;
  const auto truth = oracle.heavy_hitters(phi);
  const double w = oracle.total();
  r.true_count = truth.size();
  r.returned_count = returned.size();
  std::unordered_map<ElementId, double> answer(returned.begin(), returned.end());
  double err_sum = 0.0;
  std::size_t within = 0;
  for (const auto& [e, f] : truth) {
    const double est = estimate(e);
    const double abs_err = std::abs(est - f);
    if (w > 0.0) r.err_w = std::max(r.err_w, abs_err / w);
    if (abs_err <= eps * w) ++within;
    auto it = answer.find(e);
    if (it == answer.end()) continue;
    ++r.hits;
    err_sum += std::abs(it->second - f) / f;
  }
  if (r.true_count) {
    r.recall = static_cast<double>(r.hits) / static_cast<double>(r.true_count);
    r.within_eps = static_cast<double>(within) / static_cast<double>(r.true_count);
  }
  if (r.returned_count) r.precision = static_cast<double>(r.hits) / static_cast<double>(r.returned_count);
  r.err = r.hits ? err_sum / static_cast<double>(r.hits) : 0.0;
  return r;
}

}  // namespace distrack
