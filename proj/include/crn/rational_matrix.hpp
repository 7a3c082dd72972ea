#ifndef CRN_RATIONAL_MATRIX_HPP
#define CRN_RATIONAL_MATRIX_HPP

#include "crn/rational.hpp"

#include <Eigen/Core>

#include <vector>

namespace crn {

/// Dense matrix over exact rationals. Rank, kernels and inverses are computed
/// by exact Gaussian elimination; there is no tolerance anywhere in this
/// class. Sizes in this project stay small (tens of rows/columns), so plain
/// rational pivoting is entirely adequate.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols) {}

  static RationalMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  bool operator==(const RationalMatrix& other) const = default;

  RationalMatrix transpose() const;
  RationalMatrix operator*(const RationalMatrix& rhs) const;
  RationalMatrix operator-() const;

  /// Rows selected in the given order.
  RationalMatrix select_rows(const std::vector<int>& idx) const;
  RationalMatrix select_cols(const std::vector<int>& idx) const;

  int rank() const;

  /// Reduced row echelon form; pivot column indices appended to *pivots.
  RationalMatrix rref(std::vector<int>* pivots = nullptr) const;

  /// Basis of { u : A u = 0 } in the standard free-variable form.
  std::vector<std::vector<Rational>> nullspace() const;

  /// Basis of { w : w A = 0 } (nullspace of the transpose).
  std::vector<std::vector<Rational>> left_nullspace() const;

  /// Exact inverse; throws std::invalid_argument when singular or non-square.
  RationalMatrix inverse() const;

  /// True iff v lies in the column span. When it does not and certificate is
  /// non-null, a left-kernel row w with w·v != 0 is stored there (an exact
  /// witness of independence).
  bool in_column_span(const std::vector<Rational>& v, std::vector<Rational>* certificate = nullptr) const;

  Eigen::MatrixXd to_double() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> a_;
};

/// Greedy lowest-index selection of `target` rows with full rank `target`;
/// empty result if fewer than `target` independent rows exist.
std::vector<int> independent_row_selection(const RationalMatrix& m, int target);

} // namespace crn

#endif
