#pragma once

#include "codedmm/interpolation.hpp"
#include "codedmm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace codedmm::baseline {

// Work accounting in dot-product-equivalents, shared with the latency and
// communication models. n nodes with b processors each; k x b product.

// Each of the nb - 1 non-trivial coded operands costs (b - 1) additions, for
// both A and B.
double poly_encode_work(std::size_t n, std::size_t b);
// Interpolating the degree kb-1 product polynomial: kb log^2(kb).
double poly_decode_work(std::size_t k, std::size_t b);
// MatDot decode charged as k^2 b log^2(k).
double matdot_decode_work(std::size_t k, std::size_t b);

template <FieldScalar T> struct WorkerResult {
  T point;
  linalg::DenseMatrix<T> value;
};

template <FieldScalar T>
std::vector<T> default_points(std::size_t workers) {
  std::vector<T> pts;
  for (std::size_t j = 1; j <= workers; ++j)
    pts.push_back(T(static_cast<std::int64_t>(j)));
  return pts;
}

template <FieldScalar T> void require_distinct(std::span<const T> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j])
        throw PreconditionError("repeated evaluation point");
}

// --- polynomial codes ---------------------------------------------------------

// Worker j gets a_j = sum_i A_i x_j^i and b_j = sum_l B_l x_j^{l m}, with A_i,
// B_l the column groups of A and B. Any m^2 results determine A^T B.
template <FieldScalar T> struct PolyCodeSpec {
  std::size_t m = 1;
  std::vector<T> points; // one per worker, pairwise distinct

  std::size_t workers() const { return points.size(); }
  std::size_t recovery_threshold() const { return m * m; }
};

template <FieldScalar T>
PolyCodeSpec<T> make_poly_spec(std::size_t m, std::size_t workers) {
  if (m == 0)
    throw PreconditionError("poly: m must be positive");
  if (m * m > workers)
    throw PreconditionError("poly: m^2 = " + std::to_string(m * m) +
                            " exceeds worker count " + std::to_string(workers));
  return {m, default_points<T>(workers)};
}

template <FieldScalar T> struct PolyTask {
  T point;
  linalg::DenseMatrix<T> a; // s x k/m
  linalg::DenseMatrix<T> b; // s x b/m
};

template <FieldScalar T> struct PolyEncoding {
  std::vector<PolyTask<T>> tasks;
  linalg::PartitionPlan layout; // m x m block layout of A^T B
  double encode_work = 0;
};

template <FieldScalar T>
PolyEncoding<T> poly_encode(const linalg::DenseMatrix<T> &a,
                            const linalg::DenseMatrix<T> &b,
                            const PolyCodeSpec<T> &spec) {
  require_distinct<T>(spec.points);
  const std::size_t m = spec.m;
  PolyEncoding<T> enc;
  enc.layout = linalg::partition(a, b, linalg::PartitionScheme::square, m);
  std::vector<linalg::DenseMatrix<T>> a_groups, b_groups;
  for (std::size_t i = 0; i < m; ++i) {
    a_groups.push_back(a_block(a, enc.layout.tasks[i * m]));
    b_groups.push_back(b_block(b, enc.layout.tasks[i]));
  }
  for (const T &x : spec.points) {
    PolyTask<T> task{x, linalg::DenseMatrix<T>(a.rows(), a.cols() / m),
                     linalg::DenseMatrix<T>(b.rows(), b.cols() / m)};
    const T xm = x.pow(m);
    T pa{1}, pb{1};
    for (std::size_t i = 0; i < m; ++i) {
      task.a += pa * a_groups[i];
      task.b += pb * b_groups[i];
      pa = pa * x;
      pb = pb * xm;
    }
    enc.tasks.push_back(std::move(task));
  }
  enc.encode_work = 2.0 * static_cast<double>(m - 1) *
                    static_cast<double>(spec.workers() - 1);
  return enc;
}

template <FieldScalar T>
WorkerResult<T> poly_worker(const PolyTask<T> &task) {
  return {task.point, linalg::matmul_oracle(task.a, task.b)};
}

template <FieldScalar T> struct Decoded {
  linalg::DenseMatrix<T> product;
  double decode_work = 0;
};

// Uses the first m^2 results; their points must be distinct.
template <FieldScalar T>
Decoded<T> poly_decode(std::span<const WorkerResult<T>> results,
                       const PolyCodeSpec<T> &spec,
                       const linalg::PartitionPlan &layout) {
  const std::size_t t = spec.recovery_threshold();
  if (results.size() < t)
    throw InsufficientResults("poly_decode: need " + std::to_string(t) +
                              " results, have " +
                              std::to_string(results.size()));
  std::vector<T> pts;
  std::vector<linalg::DenseMatrix<T>> vals;
  for (std::size_t i = 0; i < t; ++i) {
    pts.push_back(results[i].point);
    vals.push_back(results[i].value);
  }
  require_distinct<T>(pts);
  const auto coeffs = interpolate<T>(pts, std::move(vals));
  // Coefficient of x^{i + l m} is A_i^T B_l, block (i, l).
  std::vector<linalg::SourceBlock<T>> blocks;
  for (std::size_t i = 0; i < spec.m; ++i)
    for (std::size_t l = 0; l < spec.m; ++l)
      blocks.push_back({i * spec.m + l + 1, coeffs[i + l * spec.m]});
  const double td = static_cast<double>(t);
  const double lg = std::log(td);
  return {linalg::assemble(blocks, layout), td * lg * lg};
}

// --- MatDot codes -------------------------------------------------------------

// A and B split along the shared inner dimension into m row blocks;
// p_A(x) = sum_i A_i x^i, p_B(x) = sum_i B_i x^{m-1-i}. Worker j returns the
// full k x b matrix p_A(x_j)^T p_B(x_j); its x^{m-1} coefficient is A^T B, so
// any 2m - 1 results suffice.
template <FieldScalar T> struct MatDotSpec {
  std::size_t m = 1;
  std::vector<T> points;

  std::size_t workers() const { return points.size(); }
  std::size_t recovery_threshold() const { return 2 * m - 1; }
};

template <FieldScalar T>
MatDotSpec<T> make_matdot_spec(std::size_t m, std::size_t workers) {
  if (m == 0)
    throw PreconditionError("matdot: m must be positive");
  if (2 * m - 1 > workers)
    throw PreconditionError("matdot: threshold 2m-1 exceeds worker count");
  return {m, default_points<T>(workers)};
}

template <FieldScalar T> struct MatDotTask {
  T point;
  linalg::DenseMatrix<T> a; // s/m x k
  linalg::DenseMatrix<T> b; // s/m x b
};

template <FieldScalar T> struct MatDotEncoding {
  std::vector<MatDotTask<T>> tasks;
  double encode_work = 0;
};

template <FieldScalar T>
MatDotEncoding<T> matdot_encode(const linalg::DenseMatrix<T> &a,
                                const linalg::DenseMatrix<T> &b,
                                const MatDotSpec<T> &spec) {
  if (a.rows() != b.rows())
    throw DimensionError("matdot_encode: inner dimensions differ");
  const std::size_t m = spec.m;
  if (a.rows() % m != 0)
    throw PreconditionError("matdot_encode: m | s violated (m=" +
                            std::to_string(m) + ", s=" +
                            std::to_string(a.rows()) + ")");
  require_distinct<T>(spec.points);
  const std::size_t rows = a.rows() / m;
  std::vector<linalg::DenseMatrix<T>> as, bs;
  for (std::size_t i = 0; i < m; ++i) {
    as.push_back(a.block(i * rows, 0, rows, a.cols()));
    bs.push_back(b.block(i * rows, 0, rows, b.cols()));
  }
  MatDotEncoding<T> enc;
  for (const T &x : spec.points) {
    MatDotTask<T> task{x, linalg::DenseMatrix<T>(rows, a.cols()),
                       linalg::DenseMatrix<T>(rows, b.cols())};
    T p{1};
    for (std::size_t i = 0; i < m; ++i) {
      task.a += p * as[i];
      task.b += p * bs[m - 1 - i];
      p = p * x;
    }
    enc.tasks.push_back(std::move(task));
  }
  enc.encode_work = 2.0 * static_cast<double>(m - 1) *
                    static_cast<double>(spec.workers() - 1);
  return enc;
}

template <FieldScalar T>
WorkerResult<T> matdot_worker(const MatDotTask<T> &task) {
  return {task.point, linalg::matmul_oracle(task.a, task.b)};
}

template <FieldScalar T>
Decoded<T> matdot_decode(std::span<const WorkerResult<T>> results,
                         const MatDotSpec<T> &spec) {
  const std::size_t t = spec.recovery_threshold();
  if (results.size() < t)
    throw InsufficientResults("matdot_decode: need " + std::to_string(t) +
                              " results, have " +
                              std::to_string(results.size()));
  std::vector<T> pts;
  std::vector<linalg::DenseMatrix<T>> vals;
  for (std::size_t i = 0; i < t; ++i) {
    pts.push_back(results[i].point);
    vals.push_back(results[i].value);
  }
  require_distinct<T>(pts);
  auto coeffs = interpolate<T>(pts, std::move(vals));
  auto product = std::move(coeffs[spec.m - 1]);
  const double work = matdot_decode_work(product.rows(), product.cols());
  return {std::move(product), work};
}

// --- uncoded ------------------------------------------------------------------

// kb single dot products, one per processor; every one is required.
template <RingScalar T>
linalg::PartitionPlan uncoded_plan(const linalg::DenseMatrix<T> &a,
                                   const linalg::DenseMatrix<T> &b) {
  if (a.rows() != b.rows())
    throw DimensionError("uncoded_plan: inner dimensions differ");
  return linalg::partition_grid(a.rows(), a.cols(), b.cols(), a.cols(),
                                b.cols());
}

template <RingScalar T>
linalg::DenseMatrix<T>
uncoded_assemble(const std::vector<linalg::SourceBlock<T>> &results,
                 const linalg::PartitionPlan &plan) {
  if (results.size() < plan.task_count())
    throw InsufficientResults("uncoded: " +
                              std::to_string(plan.task_count() - results.size()) +
                              " dot products missing, no redundancy to recover them");
  return linalg::assemble(results, plan);
}

} // namespace codedmm::baseline
