#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <utility>
#include <vector>

#include "galois.hpp"
#include "random_stream.hpp"

namespace bats {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Symbol> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error("matrix data size mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1;
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Symbol& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Symbol operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Symbol* row(std::size_t r) { return data_.data() + r * cols_; }
  const Symbol* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<Symbol>& data() { return data_; }
  const std::vector<Symbol>& data() const { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  std::vector<Symbol> column(std::size_t c) const {
    std::vector<Symbol> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
    return v;
  }

  void append_row(const Symbol* v) { data_.insert(data_.end(), v, v + cols_), ++rows_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Symbol> data_;
};

// In-place reduced row echelon form over the first `ncoef` columns of a
// row-major buffer (rows x width). Pivot rows are moved to the top in
// order. Returns the pivot column of each pivot row.
inline std::vector<std::size_t> reduce_rows(const GaloisField& F, Symbol* a, std::size_t rows, std::size_t width,
                                            std::size_t ncoef) {
  std::vector<std::size_t> pivots;
  std::vector<Symbol> tmp(width);
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncoef && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p * width + c] == 0) ++p;
    if (p == rows) continue;
    if (p != r) {
      std::memcpy(tmp.data(), a + p * width, width);
      std::memcpy(a + p * width, a + r * width, width);
      std::memcpy(a + r * width, tmp.data(), width);
    }
    Symbol* pr = a + r * width;
    if (pr[c] != 1) F.scale(pr + c, F.inv(pr[c]), width - c);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      Symbol f = a[i * width + c];
      if (f) F.axpy(a + i * width + c, pr + c, f, width - c);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(const GaloisField& F, const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Matrix w = A;
  std::size_t rows = w.rows(), cols = w.cols();
  // Forward elimination only.
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && w(p, c) == 0) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = c; j < cols; ++j) std::swap(w(p, j), w(r, j));
    Symbol inv = F.inv(w(r, c));
    for (std::size_t i = r + 1; i < rows; ++i) {
      Symbol f = w(i, c);
      if (f) F.axpy(w.row(i) + c, w.row(r) + c, F.mul(f, inv), cols - c);
    }
    ++r;
  }
  return r;
}

inline Matrix multiply(const GaloisField& F, const Matrix& A, const Matrix& B) {
  if (A.cols() != B.rows()) throw Error("matrix dimension mismatch in multiply");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) F.axpy(C.row(i), B.row(k), A(i, k), B.cols());
  return C;
}

// Returns B (T x d) with B * A = Y for A (d x c) of full row rank, Y (T x c).
inline Matrix solve(const GaloisField& F, const Matrix& A, const Matrix& Y) {
  std::size_t d = A.rows(), c = A.cols(), T = Y.rows();
  if (Y.cols() != c) throw Error("matrix dimension mismatch in solve");
  std::size_t width = d + T;
  std::vector<Symbol> aug(c * width);
  for (std::size_t j = 0; j < c; ++j) {
    for (std::size_t i = 0; i < d; ++i) aug[j * width + i] = A(i, j);
    for (std::size_t t = 0; t < T; ++t) aug[j * width + d + t] = Y(t, j);
  }
  auto piv = reduce_rows(F, aug.data(), c, width, d);
  if (piv.size() != d) throw Error("solve: coefficient matrix is not of full row rank");
  for (std::size_t j = d; j < c; ++j)
    for (std::size_t t = 0; t < T; ++t)
      if (aug[j * width + d + t]) throw Error("solve: inconsistent system");
  Matrix B(T, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t t = 0; t < T; ++t) B(t, i) = aug[i * width + d + t];
  return B;
}

inline void fill_random(const GaloisField& F, Symbol* v, std::size_t n, RandomStream& s) {
  SymbolSource src(s, F.m());
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Symbol>(src.get());
}

inline Matrix random_matrix(const GaloisField& F, std::size_t rows, std::size_t cols, RandomStream& s) {
  Matrix A(rows, cols);
  fill_random(F, A.data().data(), rows * cols, s);
  return A;
}

}  // namespace bats
