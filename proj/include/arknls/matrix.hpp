#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace arknls {

/// Thrown when a coefficient matrix has (numerically) dependent columns.
class RankDeficientError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Column-major dense real matrix. Every stored value is finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data` laid out column by column.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Builds from nested rows, e.g. {{1, 2}, {3, 4}}. Handy in tests.
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  std::span<double> col(std::size_t j) {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Copy of columns [first, first + count).
  DenseMatrix columns(std::size_t first, std::size_t count) const;
  DenseMatrix transposed() const;
  double min_value() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed-sparse-row matrix with nonnegative finite values and strictly
/// increasing column indices inside each row.
class SparseMatrixCSR {
 public:
  SparseMatrixCSR() = default;
  /// Validates the structure; throws std::invalid_argument on violation.
  SparseMatrixCSR(std::size_t rows, std::size_t cols,
                  std::vector<std::size_t> row_offsets,
                  std::vector<std::size_t> col_indices,
                  std::vector<double> values);

  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  /// Sorts, sums duplicates and drops explicit zeros.
  static SparseMatrixCSR from_triplets(std::size_t rows, std::size_t cols,
                                       std::vector<Triplet> triplets);
  /// Keeps the nonzero entries of a dense matrix.
  static SparseMatrixCSR from_dense(const DenseMatrix& dense);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::size_t> row_indices(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i],
            row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i],
            row_offsets_[i + 1] - row_offsets_[i]};
  }

  DenseMatrix to_dense() const;
  SparseMatrixCSR transposed() const;

  friend bool operator==(const SparseMatrixCSR&, const SparseMatrixCSR&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// Owning dense-or-sparse matrix, as produced by readers and generators.
using Matrix = std::variant<DenseMatrix, SparseMatrixCSR>;

/// Non-owning read-only view of either storage kind.
class MatrixRef {
 public:
  MatrixRef(const DenseMatrix& m) : ref_(std::cref(m)) {}  // NOLINT
  MatrixRef(const SparseMatrixCSR& m) : ref_(std::cref(m)) {}  // NOLINT
  MatrixRef(const Matrix& m);  // NOLINT

  bool is_sparse() const { return ref_.index() == 1; }
  const DenseMatrix& dense() const;
  const SparseMatrixCSR& sparse() const;

  std::size_t rows() const;
  std::size_t cols() const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit([&](auto r) -> decltype(auto) { return f(r.get()); }, ref_);
  }

 private:
  std::variant<std::reference_wrapper<const DenseMatrix>,
               std::reference_wrapper<const SparseMatrixCSR>>
      ref_;
};

/// M = U^T U. The upper triangle is computed and mirrored, so M is exactly
/// symmetric.
DenseMatrix gram(const DenseMatrix& U);

/// H = A^T U for an m x n matrix A and an m x r matrix U.
DenseMatrix at_times(MatrixRef A, const DenseMatrix& U);

/// Squared Frobenius norm.
double frobenius_norm_sq(MatrixRef A);

/// <X, Y> = sum_ij X_ij Y_ij for same-shaped dense matrices.
double inner_product(const DenseMatrix& X, const DenseMatrix& Y);

/// Copy of row i (length cols) of A.
std::vector<double> row_of(MatrixRef A, std::size_t i);

Matrix transpose(MatrixRef A);
DenseMatrix densify(MatrixRef A);

/// ||A - U V^T||_F / ||A||_F through the trace identity
///   ||A||^2 - 2 <A^T U, V> + <U^T U, V^T V>,
/// never forming U V^T. The radicand is clamped at zero.
double relative_residual(MatrixRef A, const DenseMatrix& U, const DenseMatrix& V);

/// ||A - U V^T||_F / ||A||_F from the entries of A - U V^T, formed one row
/// at a time. Costs O(mnr) but keeps full accuracy near exact fits, where the
/// trace identity loses about half the digits.
double relative_residual_direct(MatrixRef A, const DenseMatrix& U, const DenseMatrix& V);

/// Same identity from already available pieces: ||A||^2, <A^T U, V>, U^T U and
/// V^T V.
double relative_residual_from_products(double norm_a_sq, double cross,
                                       const DenseMatrix& gram_u,
                                       const DenseMatrix& gram_v);

}  // namespace arknls
