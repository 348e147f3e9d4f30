#include "distrack/matrix_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distrack/error.hpp"

namespace distrack {

namespace {

void check_row(RowRef row, std::size_t dim) {
  if (static_cast<std::size_t>(row.size()) != dim)
    fail(ErrorCode::InvalidArgument, "row dimension " + std::to_string(row.size()) +
                                         " does not match sketch dimension " + std::to_string(dim));
  if (!row.allFinite()) fail(ErrorCode::InvalidArgument, "row has non-finite entries");
}

}  // namespace

FDSketch::FDSketch(std::size_t ell, std::size_t dim) : ell_(ell), dim_(dim) {
  require(ell >= 1, "FDSketch: ell must be positive");
  require(dim >= 1, "FDSketch: dimension must be positive");
  // One spare row for the pre-shrink append; merges grow it on demand.
  buf_.setZero(static_cast<Eigen::Index>(ell + 1), static_cast<Eigen::Index>(dim));
}

std::size_t FDSketch::ell_for_error(double eps) {
  require(eps > 0.0 && std::isfinite(eps), "FDSketch: error parameter must be positive");
  return static_cast<std::size_t>(std::ceil(2.0 / eps - 1e-9));
}

double FDSketch::update(RowRef row) {
  check_row(row, dim_);
  frob_sq_ += row.squaredNorm();
  buf_.row(static_cast<Eigen::Index>(rows_)) = row.transpose();
  ++rows_;
  return rows_ > ell_ ? shrink() : 0.0;
}

double FDSketch::merge_in(const FDSketch& other) {
  if (other.dim_ != dim_)
    fail(ErrorCode::InvalidArgument, "FDSketch::merge_in: dimension mismatch");
  if (other.rows_ == 0) {
    frob_sq_ += other.frob_sq_;
    return 0.0;
  }
  const auto need = static_cast<Eigen::Index>(rows_ + other.rows_);
  if (need > buf_.rows()) buf_.conservativeResize(need, Eigen::NoChange);
  buf_.middleRows(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(other.rows_)) =
      other.buf_.topRows(static_cast<Eigen::Index>(other.rows_));
  rows_ += other.rows_;
  frob_sq_ += other.frob_sq_;
  total_shrink_ += other.total_shrink_;
  return rows_ > ell_ ? shrink() : 0.0;
}

// SVD of the live rows; subtract the ell-th largest squared singular value
// from every squared singular value and keep the positive remainder. At most
// ell-1 rows survive.
double FDSketch::shrink() {
  const auto live = buf_.topRows(static_cast<Eigen::Index>(rows_));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(live, Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  const auto k = static_cast<Eigen::Index>(ell_) - 1;
  const double delta = k < sigma.size() ? sigma(k) * sigma(k) : 0.0;

  Eigen::MatrixXd next = Eigen::MatrixXd::Zero(buf_.rows(), buf_.cols());
  std::size_t kept = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double s2 = sigma(i) * sigma(i) - delta;
    if (s2 <= 0.0) break;
    next.row(static_cast<Eigen::Index>(kept++)) = std::sqrt(s2) * v.col(i).transpose();
  }
  buf_.swap(next);
  if (buf_.rows() > static_cast<Eigen::Index>(ell_ + 1))
    buf_.conservativeResize(static_cast<Eigen::Index>(ell_ + 1), Eigen::NoChange);
  rows_ = kept;
  total_shrink_ += delta;
  return delta;
}

Eigen::MatrixXd FDSketch::gram() const {
  const auto live = buf_.topRows(static_cast<Eigen::Index>(rows_));
  return live.transpose() * live;
}

void FDSketch::clear() {
  buf_.setZero();
  rows_ = 0;
  frob_sq_ = 0.0;
  total_shrink_ = 0.0;
}

FDSketch merge(const FDSketch& a, const FDSketch& b) {
  if (a.ell() != b.ell() || a.dim() != b.dim())
    fail(ErrorCode::InvalidArgument, "FD merge requires equal ell and dimension");
  FDSketch out = a;
  out.merge_in(b);
  return out;
}

CovarianceAccumulator::CovarianceAccumulator(std::size_t dim) {
  require(dim >= 1, "CovarianceAccumulator: dimension must be positive");
  gram_.setZero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

void CovarianceAccumulator::add_row(RowRef row) {
  check_row(row, dim());
  gram_.noalias() += row * row.transpose();
  frob_sq_ += row.squaredNorm();
  ++rows_;
}

void CovarianceAccumulator::add_rows(const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != dim())
    fail(ErrorCode::InvalidArgument, "CovarianceAccumulator: dimension mismatch");
  gram_.noalias() += rows.transpose() * rows;
  frob_sq_ += rows.squaredNorm();
  rows_ += static_cast<std::size_t>(rows.rows());
}

double covariance_error_gram(const CovarianceAccumulator& ref, const Eigen::MatrixXd& b_gram) {
  if (!(ref.frob_sq() > 0.0))
    fail(ErrorCode::State, "covariance error undefined: |A|_F^2 is zero");
  if (b_gram.rows() != ref.gram().rows() || b_gram.cols() != ref.gram().cols())
    fail(ErrorCode::InvalidArgument, "covariance error: dimension mismatch");
  const Eigen::MatrixXd diff = ref.gram() - b_gram;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double spectral = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return spectral / ref.frob_sq();
}

double covariance_error(const CovarianceAccumulator& ref, const Eigen::MatrixXd& b) {
  if (b.rows() == 0)
    return covariance_error_gram(ref, Eigen::MatrixXd::Zero(ref.gram().rows(), ref.gram().cols()));
  if (static_cast<std::size_t>(b.cols()) != ref.dim())
    fail(ErrorCode::InvalidArgument, "covariance error: B has wrong column count");
  return covariance_error_gram(ref, b.transpose() * b);
}

}  // namespace distrack
