#pragma once

#include "codedmm/dense_matrix.hpp"
#include "codedmm/errors.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace codedmm::baseline {

// Row-reduced rank of a dense matrix over a field.
template <FieldScalar T> std::size_t rank(linalg::DenseMatrix<T> m) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t pivot = r;
    while (pivot < m.rows() && m(pivot, c) == T{})
      ++pivot;
    if (pivot == m.rows())
      continue;
    for (std::size_t j = 0; j < m.cols(); ++j)
      std::swap(m(r, j), m(pivot, j));
    const T inv = m(r, c).inverse();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == T{})
        continue;
      const T f = m(i, c) * inv;
      for (std::size_t j = c; j < m.cols(); ++j)
        m(i, j) = m(i, j) - f * m(r, j);
    }
    ++r;
  }
  return r;
}

// Vandermonde rows x^0..x^{terms-1} for each point.
template <FieldScalar T>
linalg::DenseMatrix<T> vandermonde(std::span<const T> points,
                                   std::size_t terms) {
  linalg::DenseMatrix<T> v(points.size(), terms);
  for (std::size_t r = 0; r < points.size(); ++r) {
    T x{1};
    for (std::size_t j = 0; j < terms; ++j) {
      v(r, j) = x;
      x = x * points[r];
    }
  }
  return v;
}

// Whether evaluations at `points` of a polynomial with `terms` coefficients pin
// down coefficient `index`: e_index must lie in the row space of V.
template <FieldScalar T>
bool coefficient_determined(std::span<const T> points, std::size_t terms,
                            std::size_t index) {
  const auto v = vandermonde(points, terms);
  linalg::DenseMatrix<T> augmented(v.rows() + 1, terms);
  augmented.set_block(0, 0, v);
  augmented(v.rows(), index) = T{1};
  return rank(v) == rank(augmented);
}

// Solves V c = y for the matrix-valued coefficients c_0..c_{t-1}, t =
// points.size(), by Gauss-Jordan elimination. Repeated points make V singular
// and throw PreconditionError.
template <FieldScalar T>
std::vector<linalg::DenseMatrix<T>>
interpolate(std::span<const T> points,
            std::vector<linalg::DenseMatrix<T>> values) {
  const std::size_t t = points.size();
  if (values.size() != t)
    throw DimensionError("interpolate: one value per point required");
  auto v = vandermonde(points, t);
  for (std::size_t c = 0; c < t; ++c) {
    std::size_t pivot = c;
    while (pivot < t && v(pivot, c) == T{})
      ++pivot;
    if (pivot == t)
      throw PreconditionError("interpolate: evaluation points are not distinct");
    if (pivot != c) {
      for (std::size_t j = 0; j < t; ++j)
        std::swap(v(c, j), v(pivot, j));
      std::swap(values[c], values[pivot]);
    }
    const T inv = v(c, c).inverse();
    for (std::size_t j = 0; j < t; ++j)
      v(c, j) = v(c, j) * inv;
    values[c].scale(inv);
    for (std::size_t i = 0; i < t; ++i) {
      if (i == c || v(i, c) == T{})
        continue;
      const T f = v(i, c);
      for (std::size_t j = 0; j < t; ++j)
        v(i, j) = v(i, j) - f * v(c, j);
      values[i] -= f * values[c];
    }
  }
  return values;
}

} // namespace codedmm::baseline
