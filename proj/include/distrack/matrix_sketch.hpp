#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace distrack {

using RowRef = Eigen::Ref<const Eigen::VectorXd>;

/// Frequent Directions sketch: at most `ell` rows B such that for every unit x,
/// 0 <= |Ax|^2 - |Bx|^2 <= 2 |A|_F^2 / ell.
class FDSketch {
 public:
  FDSketch(std::size_t ell, std::size_t dim);

  /// Row budget giving additive error eps * |A|_F^2.
  static std::size_t ell_for_error(double eps);

  /// Appends a row, shrinking when the buffer overflows. Returns the squared
  /// singular value subtracted by the shrink (0 if none happened).
  double update(RowRef row);

  /// Stacks `other` under this sketch and shrinks back to at most ell rows.
  /// Returns the subtracted value.
  double merge_in(const FDSketch& other);

  /// Current sketch rows (rows() x dim()).
  Eigen::MatrixXd matrix() const { return buf_.topRows(static_cast<Eigen::Index>(rows_)); }
  Eigen::MatrixXd gram() const;

  std::size_t rows() const { return rows_; }
  std::size_t ell() const { return ell_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }
  double frob_sq() const { return frob_sq_; }
  /// Sum of all subtracted values; bounds |Ax|^2 - |Bx|^2 from above.
  double total_shrink() const { return total_shrink_; }
  void clear();

 private:
  double shrink();

  std::size_t ell_;
  std::size_t dim_;
  Eigen::MatrixXd buf_;
  std::size_t rows_ = 0;
  double frob_sq_ = 0.0;
  double total_shrink_ = 0.0;
};

FDSketch merge(const FDSketch& a, const FDSketch& b);

/// Exact A^T A accumulated row by row.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t dim);

  void add_row(RowRef row);
  void add_rows(const Eigen::MatrixXd& rows);

  const Eigen::MatrixXd& gram() const { return gram_; }
  double frob_sq() const { return frob_sq_; }
  std::size_t dim() const { return static_cast<std::size_t>(gram_.rows()); }
  std::size_t rows() const { return rows_; }

 private:
  Eigen::MatrixXd gram_;
  double frob_sq_ = 0.0;
  std::size_t rows_ = 0;
};

/// |A^T A - B^T B|_2 / |A|_F^2 via a dense symmetric eigendecomposition.
double covariance_error(const CovarianceAccumulator& ref, const Eigen::MatrixXd& b);
/// Same, with B given by its Gram matrix B^T B.
double covariance_error_gram(const CovarianceAccumulator& ref, const Eigen::MatrixXd& b_gram);

}  // namespace distrack
