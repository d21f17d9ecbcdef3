#include "arknls/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arknls {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
  }
}

// Dot product with four partial sums; lets the compiler vectorize without
// -ffast-math.
double dot(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("DenseMatrix: non-finite fill");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: data length " +
                                std::to_string(data_.size()) + " != " +
                                std::to_string(rows_) + " x " + std::to_string(cols_));
  }
  require_finite(data_, "DenseMatrix");
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  DenseMatrix out(m, n);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  require_finite(out.data_, "DenseMatrix");
  return out;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseMatrix DenseMatrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw std::out_of_range("DenseMatrix::columns");
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * rows_));
  return DenseMatrix(rows_, count, std::move(out));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j);
  }
  return out;
}

double DenseMatrix::min_value() const {
  if (data_.empty()) return 0.0;
  return *std::min_element(data_.begin(), data_.end());
}

// ---------------------------------------------------------------------------
// SparseMatrixCSR

SparseMatrixCSR::SparseMatrixCSR(std::size_t rows, std::size_t cols,
                                 std::vector<std::size_t> row_offsets,
                                 std::vector<std::size_t> col_indices,
                                 std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1) {
    throw std::invalid_argument("SparseMatrixCSR: row_offsets must have rows+1 entries");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size() ||
      col_indices_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrixCSR: inconsistent nnz");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw std::invalid_argument("SparseMatrixCSR: row_offsets decreasing at row " +
                                  std::to_string(i));
    }
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] >= cols_) {
        throw std::invalid_argument("SparseMatrixCSR: column index out of range");
      }
      if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
        throw std::invalid_argument("SparseMatrixCSR: columns not strictly increasing in row " +
                                    std::to_string(i));
      }
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("SparseMatrixCSR: values must be finite and nonnegative");
    }
  }
}

SparseMatrixCSR SparseMatrixCSR::from_triplets(std::size_t rows, std::size_t cols,
                                               std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw std::invalid_argument("from_triplets: index out of range");
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t p = 0; p < triplets.size();) {
    const Triplet& t = triplets[p];
    double sum = 0.0;
    std::size_t q = p;
    for (; q < triplets.size() && triplets[q].row == t.row && triplets[q].col == t.col; ++q) {
      sum += triplets[q].value;
    }
    if (sum != 0.0) {
      indices.push_back(t.col);
      values.push_back(sum);
      ++offsets[t.row + 1];
    }
    p = q;
  }
  for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrixCSR(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

SparseMatrixCSR SparseMatrixCSR::from_dense(const DenseMatrix& dense) {
  std::vector<std::size_t> offsets(dense.rows() + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> values;
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    for (std::size_t j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        indices.push_back(j);
        values.push_back(dense(i, j));
      }
    }
    offsets[i + 1] = values.size();
  }
  return SparseMatrixCSR(dense.rows(), dense.cols(), std::move(offsets), std::move(indices),
                         std::move(values));
}

DenseMatrix SparseMatrixCSR::to_dense() const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      out(i, col_indices_[p]) = values_[p];
    }
  }
  return out;
}

SparseMatrixCSR SparseMatrixCSR::transposed() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (std::size_t c : col_indices_) ++offsets[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> indices(nnz());
  std::vector<double> values(nnz());
  // Rows are visited in order, so each transposed row comes out sorted.
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const std::size_t dst = next[col_indices_[p]]++;
      indices[dst] = i;
      values[dst] = values_[p];
    }
  }
  return SparseMatrixCSR(cols_, rows_, std::move(offsets), std::move(indices), std::move(values));
}

// ---------------------------------------------------------------------------
// MatrixRef

MatrixRef::MatrixRef(const Matrix& m)
    : ref_(std::visit(
          [](const auto& x) -> decltype(ref_) { return std::cref(x); }, m)) {}

const DenseMatrix& MatrixRef::dense() const {
  return std::get<0>(ref_).get();
}

const SparseMatrixCSR& MatrixRef::sparse() const {
  return std::get<1>(ref_).get();
}

std::size_t MatrixRef::rows() const {
  return visit([](const auto& m) { return m.rows(); });
}

std::size_t MatrixRef::cols() const {
  return visit([](const auto& m) { return m.cols(); });
}

// ---------------------------------------------------------------------------
// Products and norms

DenseMatrix gram(const DenseMatrix& U) {
  if (U.cols() == 0) throw std::invalid_argument("gram: U has no columns");
  const std::size_t r = U.cols();
  DenseMatrix M(r, r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = dot(U.col(i).data(), U.col(j).data(), U.rows());
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

DenseMatrix at_times(MatrixRef A, const DenseMatrix& U) {
  if (A.rows() != U.rows()) {
    throw std::invalid_argument("at_times: A is " + std::to_string(A.rows()) + "x" +
                                std::to_string(A.cols()) + " but U has " +
                                std::to_string(U.rows()) + " rows");
  }
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  const std::size_t r = U.cols();
  DenseMatrix H(n, r);
  if (!A.is_sparse()) {
    const DenseMatrix& D = A.dense();
    for (std::size_t j = 0; j < n; ++j) {
      const double* a = D.col(j).data();
      for (std::size_t l = 0; l < r; ++l) H(j, l) = dot(a, U.col(l).data(), m);
    }
    return H;
  }
  // H(j, :) += A(i, j) * U(i, :) for every stored entry, row by row.
  const SparseMatrixCSR& S = A.sparse();
  for (std::size_t i = 0; i < m; ++i) {
    const auto idx = S.row_indices(i);
    const auto val = S.row_values(i);
    for (std::size_t l = 0; l < r; ++l) {
      const double u = U(i, l);
      if (u == 0.0) continue;
      double* h = H.col(l).data();
      for (std::size_t p = 0; p < idx.size(); ++p) h[idx[p]] += val[p] * u;
    }
  }
  return H;
}

double frobenius_norm_sq(MatrixRef A) {
  const std::span<const double> values =
      A.is_sparse() ? A.sparse().values() : A.dense().data();
  return dot(values.data(), values.data(), values.size());
}

double inner_product(const DenseMatrix& X, const DenseMatrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw std::invalid_argument("inner_product: shape mismatch");
  }
  return dot(X.data().data(), Y.data().data(), X.size());
}

std::vector<double> row_of(MatrixRef A, std::size_t i) {
  if (i >= A.rows()) throw std::out_of_range("row_of: row index out of range");
  std::vector<double> row(A.cols(), 0.0);
  if (A.is_sparse()) {
    const auto idx = A.sparse().row_indices(i);
    const auto val = A.sparse().row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p) row[idx[p]] = val[p];
  } else {
    const DenseMatrix& D = A.dense();
    for (std::size_t j = 0; j < D.cols(); ++j) row[j] = D(i, j);
  }
  return row;
}

Matrix transpose(MatrixRef A) {
  if (A.is_sparse()) return A.sparse().transposed();
  return A.dense().transposed();
}

DenseMatrix densify(MatrixRef A) {
  if (A.is_sparse()) return A.sparse().to_dense();
  return A.dense();
}

double relative_residual_from_products(double norm_a_sq, double cross,
                                       const DenseMatrix& gram_u,
                                       const DenseMatrix& gram_v) {
  if (!(norm_a_sq > 0.0)) {
    throw std::domain_error("relative_residual: ||A||_F is zero");
  }
  const double radicand = norm_a_sq - 2.0 * cross + inner_product(gram_u, gram_v);
  return std::sqrt(std::max(radicand, 0.0) / norm_a_sq);
}

double relative_residual(MatrixRef A, const DenseMatrix& U, const DenseMatrix& V) {
  if (U.rows() != A.rows() || V.rows() != A.cols() || U.cols() != V.cols()) {
    throw std::invalid_argument("relative_residual: dimension mismatch");
  }
  const double norm_a_sq = frobenius_norm_sq(A);
  if (!(norm_a_sq > 0.0)) {
    throw std::domain_error("relative_residual: ||A||_F is zero");
  }
  if (U.cols() == 0) return 1.0;
  const double cross = inner_product(at_times(A, U), V);
  return relative_residual_from_products(norm_a_sq, cross, gram(U), gram(V));
}

double relative_residual_direct(MatrixRef A, const DenseMatrix& U, const DenseMatrix& V) {
  if (U.rows() != A.rows() || V.rows() != A.cols() || U.cols() != V.cols()) {
    throw std::invalid_argument("relative_residual_direct: dimension mismatch");
  }
  const double norm_a_sq = frobenius_norm_sq(A);
  if (!(norm_a_sq > 0.0)) {
    throw std::domain_error("relative_residual_direct: ||A||_F is zero");
  }
  const std::size_t m = A.rows(), n = A.cols(), r = U.cols();
  std::vector<double> row(n);
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t l = 0; l < r; ++l) {
      const double u = U(i, l);
      if (u == 0.0) continue;
      const auto v = V.col(l);
      for (std::size_t j = 0; j < n; ++j) row[j] -= u * v[j];
    }
    if (A.is_sparse()) {
      const auto idx = A.sparse().row_indices(i);
      const auto val = A.sparse().row_values(i);
      for (std::size_t p = 0; p < idx.size(); ++p) row[idx[p]] += val[p];
    } else {
      const DenseMatrix& D = A.dense();
      for (std::size_t j = 0; j < n; ++j) row[j] += D(i, j);
    }
    for (double d : row) err += d * d;
  }
  return std::sqrt(err / norm_a_sq);
}

}  // namespace arknls
