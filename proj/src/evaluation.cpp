#include "distrack/evaluation.hpp"

#include <algorithm>

namespace distrack {

std::vector<std::pair<ElementId, double>> ExactHHOracle::heavy_hitters(double phi) const {
  std::vector<std::pair<ElementId, double>> out;
  for (const auto& [e, f] : f_)
    if (f >= phi * total_) out.emplace_back(e, f);
  std::sort(out.begin(), out.end());
  return out;
}

HHQualityReport hh_quality(const ExactHHOracle& oracle,
                           const std::vector<std::pair<ElementId, double>>& returned, double phi) {
  std::unordered_map<ElementId, double> answer(returned.begin(), returned.end());
  return hh_quality(oracle, returned, phi, 0.0, [&](ElementId e) {
    auto it = answer.find(e);
    return it == answer.end() ? 0.0 : it->second;
  });
}

double matrix_quality(const CovarianceAccumulator& acc, const Eigen::MatrixXd& b) {
  return covariance_error(acc, b);
}

double matrix_quality_gram(const CovarianceAccumulator& acc, const Eigen::MatrixXd& b_gram) {
  if (b_gram.size() == 0) return covariance_error(acc, Eigen::MatrixXd());
  return covariance_error_gram(acc, b_gram);
}

}  // namespace distrack
