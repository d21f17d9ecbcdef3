#pragma once

#include <cstdint>

#include "arknls/matrix.hpp"

namespace arknls {

/// Parameters of a synthetic A = max(W H^T + N, 0) test matrix.
struct SynthSpec {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t true_rank = 0;
  double noise_std = 0.0;
  /// Expected fraction of stored entries; 0 means dense.
  double sparsity = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticFactors {
  DenseMatrix W;  ///< m x true_rank, uniform(0,1), unit-norm columns
  DenseMatrix H;  ///< n x true_rank, uniform(0,1)
  DenseMatrix A;  ///< max(W H^T + N, 0)
};

/// Draw order from one SplitMix64(seed) stream: W column by column, H column
/// by column, then N (column-major) when noise_std > 0.
SyntheticFactors gen_dense_factors(const SynthSpec& spec);
DenseMatrix gen_dense(const SynthSpec& spec);

/// Dense low-rank L as in gen_dense, masked entrywise: each (i, j), visited
/// row by row, is kept with probability `sparsity` and then scaled by a
/// uniform(0,1) value. Entries that come out exactly zero are not stored.
SparseMatrixCSR gen_sparse(const SynthSpec& spec);

}  // namespace arknls
