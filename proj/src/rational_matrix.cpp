#include "crn/rational_matrix.hpp"

#include <stdexcept>

namespace crn {

RationalMatrix RationalMatrix::identity(int n) {
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("RationalMatrix: dimension mismatch in product");
  RationalMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rational& aik = (*this)(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
    }
  return out;
}

RationalMatrix RationalMatrix::operator-() const {
  RationalMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = -(*this)(i, j);
  return out;
}

RationalMatrix RationalMatrix::select_rows(const std::vector<int>& idx) const {
  RationalMatrix out(static_cast<int>(idx.size()), cols_);
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(idx[i], j);
  return out;
}

RationalMatrix RationalMatrix::select_cols(const std::vector<int>& idx) const {
  RationalMatrix out(rows_, static_cast<int>(idx.size()));
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = (*this)(i, idx[j]);
  return out;
}

RationalMatrix RationalMatrix::rref(std::vector<int>* pivots) const {
  RationalMatrix m = *this;
  int pivot_row = 0;
  for (int col = 0; col < cols_ && pivot_row < rows_; ++col) {
    int sel = -1;
    for (int r = pivot_row; r < rows_; ++r)
      if (m(r, col) != 0) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    if (sel != pivot_row)
      for (int j = 0; j < cols_; ++j) std::swap(m(sel, j), m(pivot_row, j));
    const Rational inv = Rational(1) / m(pivot_row, col);
    for (int j = col; j < cols_; ++j) m(pivot_row, j) *= inv;
    for (int r = 0; r < rows_; ++r) {
      if (r == pivot_row || m(r, col) == 0) continue;
      const Rational f = m(r, col);
      for (int j = col; j < cols_; ++j) m(r, j) -= f * m(pivot_row, j);
    }
    if (pivots) pivots->push_back(col);
    ++pivot_row;
  }
  return m;
}

int RationalMatrix::rank() const {
  std::vector<int> pivots;
  rref(&pivots);
  return static_cast<int>(pivots.size());
}

std::vector<std::vector<Rational>> RationalMatrix::nullspace() const {
  std::vector<int> pivots;
  RationalMatrix r = rref(&pivots);
  std::vector<bool> is_pivot(cols_, false);
  for (int p : pivots) is_pivot[p] = true;

  std::vector<std::vector<Rational>> basis;
  for (int free = 0; free < cols_; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols_);
    v[free] = 1;
    for (std::size_t pi = 0; pi < pivots.size(); ++pi) v[pivots[pi]] = -r(static_cast<int>(pi), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<std::vector<Rational>> RationalMatrix::left_nullspace() const { return transpose().nullspace(); }

RationalMatrix RationalMatrix::inverse() const {
  if (rows_ != cols_) throw std::invalid_argument("RationalMatrix: inverse of non-square matrix");
  RationalMatrix aug(rows_, 2 * cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) aug(i, j) = (*this)(i, j);
    aug(i, cols_ + i) = 1;
  }
  std::vector<int> pivots;
  RationalMatrix r = aug.rref(&pivots);
  for (int i = 0; i < rows_; ++i)
    if (static_cast<int>(pivots.size()) <= i || pivots[i] != i)
      throw std::invalid_argument("RationalMatrix: matrix is singular");
  RationalMatrix inv(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) inv(i, j) = r(i, cols_ + j);
  return inv;
}

bool RationalMatrix::in_column_span(const std::vector<Rational>& v, std::vector<Rational>* certificate) const {
  if (static_cast<int>(v.size()) != rows_) throw std::invalid_argument("RationalMatrix: span test dimension mismatch");
  for (const auto& w : left_nullspace()) {
    Rational dot = 0;
    for (int i = 0; i < rows_; ++i) dot += w[i] * v[i];
    if (dot != 0) {
      if (certificate) *certificate = w;
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd RationalMatrix::to_double() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = crn::to_double((*this)(i, j));
  return m;
}

std::vector<int> independent_row_selection(const RationalMatrix& m, int target) {
  std::vector<int> chosen;
  for (int r = 0; r < m.rows() && static_cast<int>(chosen.size()) < target; ++r) {
    std::vector<int> candidate = chosen;
    candidate.push_back(r);
    if (m.select_rows(candidate).rank() == static_cast<int>(candidate.size())) chosen = std::move(candidate);
  }
  if (static_cast<int>(chosen.size()) < target) return {};
  return chosen;
}

} // namespace crn
