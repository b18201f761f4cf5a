#pragma once

#include "codedmm/errors.hpp"
#include "codedmm/ring.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace codedmm::linalg {

// Row-major dense matrix over an exact ring.
template <RingScalar T> class DenseMatrix {
public:
  using value_type = T;

  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, T{}) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_)
      throw DimensionError("entry count " + std::to_string(entries_.size()) +
                           " != rows*cols " + std::to_string(rows_ * cols_));
  }
  DenseMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
      if (r.size() != cols_)
        throw DimensionError("ragged matrix literal");
      entries_.insert(entries_.end(), r.begin(), r.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<T> &entries() const noexcept { return entries_; }

  T &operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  bool same_shape(const DenseMatrix &o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  // Copy of the sub-matrix [r0, r0+nr) x [c0, c0+nc).
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr,
                    std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_)
      throw DimensionError("block out of range");
    DenseMatrix out(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t c = 0; c < nc; ++c)
        out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix &src) {
    if (r0 + src.rows_ > rows_ || c0 + src.cols_ > cols_)
      throw DimensionError("set_block out of range");
    for (std::size_t r = 0; r < src.rows_; ++r)
      for (std::size_t c = 0; c < src.cols_; ++c)
        (*this)(r0 + r, c0 + c) = src(r, c);
  }

  DenseMatrix &operator+=(const DenseMatrix &o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < entries_.size(); ++i)
      entries_[i] = entries_[i] + o.entries_[i];
    return *this;
  }
  DenseMatrix &operator-=(const DenseMatrix &o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < entries_.size(); ++i)
      entries_[i] = entries_[i] - o.entries_[i];
    return *this;
  }
  DenseMatrix &scale(const T &s) {
    for (auto &e : entries_)
      e = e * s;
    return *this;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix &b) {
    return a += b;
  }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix &b) {
    return a -= b;
  }
  friend DenseMatrix operator*(const T &s, DenseMatrix a) { return a.scale(s); }

  friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

  friend std::ostream &operator<<(std::ostream &os, const DenseMatrix &m) {
    os << '[';
    for (std::size_t r = 0; r < m.rows_; ++r) {
      os << (r ? ", [" : "[");
      for (std::size_t c = 0; c < m.cols_; ++c)
        os << (c ? ", " : "") << m(r, c);
      os << ']';
    }
    return os << ']';
  }

private:
  void require_same_shape(const DenseMatrix &o) const {
    if (!same_shape(o))
      throw DimensionError("shape mismatch: " + std::to_string(rows_) + "x" +
                           std::to_string(cols_) + " vs " +
                           std::to_string(o.rows_) + "x" +
                           std::to_string(o.cols_));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> entries_;
};

// Ground-truth A^T B for A (s x k) and B (s x b).
template <RingScalar T>
DenseMatrix<T> matmul_oracle(const DenseMatrix<T> &a, const DenseMatrix<T> &b) {
  if (a.rows() != b.rows())
    throw DimensionError("matmul_oracle: A has " + std::to_string(a.rows()) +
                         " rows, B has " + std::to_string(b.rows()));
  const std::size_t s = a.rows();
  DenseMatrix<T> out(a.cols(), b.cols());
  for (std::size_t l = 0; l < s; ++l)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T ali = a(l, i);
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) = out(i, j) + ali * b(l, j);
    }
  return out;
}

// Uniform entries; Z_q over the full field, plain integers in [-9, 9].
template <RingScalar T>
DenseMatrix<T> random_matrix(std::size_t rows, std::size_t cols,
                             std::mt19937_64 &rng) {
  DenseMatrix<T> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if constexpr (requires { T::modulus; }) {
        std::uniform_int_distribution<std::uint64_t> dist(0, T::modulus - 1);
        m(r, c) = T(static_cast<std::int64_t>(dist(rng)));
      } else {
        std::uniform_int_distribution<int> dist(-9, 9);
        m(r, c) = T(dist(rng));
      }
    }
  return m;
}

} // namespace codedmm::linalg
