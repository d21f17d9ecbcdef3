#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "arknls/matrix.hpp"
#include "arknls/solver.hpp"

namespace arknls {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads `%%MatrixMarket matrix array real general` into a DenseMatrix and
/// `%%MatrixMarket matrix coordinate {real|pattern} {general|symmetric}` into
/// a SparseMatrixCSR. Pattern entries read as 1.0, symmetric storage is
/// expanded, duplicate coordinates are summed. Complex and integer fields and
/// negative values are rejected.
Matrix read_matrix_market(const std::filesystem::path& path);

/// Dense matrices are written in array format (column-major), sparse ones in
/// coordinate format sorted by row then column. Values use 17 significant
/// digits.
void write_matrix_market(MatrixRef matrix, const std::filesystem::path& path);

/// Header `sweep,elapsed_s,rel_residual`, one row per record, 10 significant
/// digits.
void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path);
SolveTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace arknls
