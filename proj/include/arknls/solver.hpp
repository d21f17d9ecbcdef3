#pragma once

// Alternating rank-k nonnegative least squares for A ~= U V^T.
//
// U (m x r) and V (n x r) are split into blocks of k consecutive columns.
// A sweep updates every block of V with U fixed, then every block of U with
// V fixed. Each block update is the exact minimizer of the objective over
// that block, obtained from closed forms for k = 1, 2, 3. Before a block is
// updated the fixed-side columns of the block are repaired to full column
// rank without changing their contribution to U V^T.
//
// The U-side half runs the same code as the V-side half with A replaced by
// its transpose and the roles of U and V exchanged. Below, "fixed" is the
// coefficient factor (U on the V side) and "updated" is the factor whose
// block is solved for.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "arknls/matrix.hpp"
#include "arknls/nnls.hpp"

namespace arknls {

struct SolverConfig {
  int k = 3;  ///< block width: 1 (HALS), 2 or 3
  int max_sweeps = 100;
  std::optional<double> time_limit;           ///< seconds of wall clock
  std::optional<double> tol_residual_change;  ///< stop when |delta rel. residual| < tol
  std::uint64_t seed = 0;
  double rank_eps = kDefaultRankEps;

  void validate() const;
};

struct FactorPair {
  DenseMatrix U;  ///< m x r, entrywise >= 0
  DenseMatrix V;  ///< n x r, entrywise >= 0
  int k = 3;

  std::size_t rank() const { return U.cols(); }
  /// Number of non-overlapping blocks, floor(r / k).
  std::size_t full_blocks() const { return rank() / static_cast<std::size_t>(k); }
};

/// Contiguous columns [first, first + width) of U and V.
struct Block {
  std::size_t first = 0;
  std::size_t width = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Blocks in sweep order: floor(r/k) disjoint blocks, then, if k does not
/// divide r, one more block on the last k columns, overlapping the previous
/// one. Requires 1 <= k <= r.
std::vector<Block> block_partition(std::size_t r, int k);

/// Gram-derived scalars of a block (indices local to the block).
struct BlockScalars {
  double n11 = 0, n22 = 0, n33 = 0;  ///< squared column norms
  double n12 = 0, n13 = 0, n23 = 0;  ///< column inner products
  double a = 0;    ///< n12 n33 - n23 n13
  double b = 0;    ///< n13 n22 - n23 n12
  double d12 = 0, d13 = 0, d23 = 0;  ///< 2x2 Gram minors
  double det = 0;  ///< det of the 3x3 block Gram matrix
};

/// Caches for one half-sweep.
struct BlockWorkspace {
  DenseMatrix H;  ///< A_side^T fixed (n x r on the V side)
  DenseMatrix M;  ///< fixed^T fixed (r x r)
  DenseMatrix R;  ///< residual columns H(:, block) - updated M(:, block)
  BlockScalars scalars;
};

/// Computes H = A_side^T fixed and M = fixed^T fixed.
BlockWorkspace make_workspace(MatrixRef a_side, const DenseMatrix& fixed);

/// What repair_block changed. Column indices are global.
struct RepairPlan {
  Block block;
  bool zero_column = false;      ///< first column was zero
  bool dependent_pair = false;   ///< first two columns were parallel
  bool dependent_triple = false; ///< third column was in the span of the first two
  double alpha = 0.0;            ///< |u2| / |u1| for a dependent pair
  double alpha_tilde = 0.0;      ///< u_J(3) = alpha_tilde u_J(1) + beta_tilde u_J(2)
  double beta_tilde = 0.0;
  std::array<int, 3> permutation{0, 1, 2};  ///< local order I after case dispatch
  std::array<std::size_t, 3> columns{};      ///< J, global columns in order I
  std::vector<std::size_t> unit_rows;        ///< rows given a unit entry, in order

  int events() const {
    return int(zero_column) + int(dependent_pair) + int(dependent_triple);
  }
};

/// Makes the fixed-side block full column rank while keeping
/// fixed(:, block) updated(:, block)^T unchanged, and refreshes the H and M
/// entries of every touched column. Detection reads M only:
///   zero first column    M11 == 0
///   dependent pair       d12 <= rank_eps M11 M22
///   dependent triple     det <= rank_eps M11 M22 M33
/// A block that passes all checks is left untouched.
RepairPlan repair_block(MatrixRef a_side, DenseMatrix& fixed, DenseMatrix& updated,
                        BlockWorkspace& ws, Block block, double rank_eps = kDefaultRankEps);

/// Overwrites updated(:, block) with the exact nonnegative minimizer of
/// ||A_side - fixed updated^T|| over that block, using only ws.H, ws.M and the
/// current `updated`. Throws std::logic_error if the block is rank deficient
/// (i.e. repair_block was skipped).
void update_block(DenseMatrix& updated, BlockWorkspace& ws, Block block,
                  double rank_eps = kDefaultRankEps);

enum class Side { V, U };

struct BlockEvent {
  Side side;
  Block block;
  const FactorPair& factors;
  const RepairPlan& repair;
  const BlockWorkspace& workspace;
};

/// Called after every block update; `factors` is in the caller's orientation.
using BlockObserver = std::function<void(const BlockEvent&)>;

struct SweepResult {
  /// After this half-sweep. Trace identity, recomputed directly below 1e-3.
  double rel_residual = 0.0;
  int repair_events = 0;
};

/// One half-sweep. `a` is A (m x n) and `a_t` its transpose; the V side reads
/// `a`, the U side reads `a_t`.
SweepResult sweep(MatrixRef a, MatrixRef a_t, FactorPair& factors, Side side,
                  double rank_eps = kDefaultRankEps, const BlockObserver& observer = {});

/// U = rand(m, r) with unit-norm columns, V = rand(n, r), both uniform(0,1)
/// from SplitMix64(seed). V is drawn first, then U, column by column.
FactorPair initialize(MatrixRef a, std::size_t rank, std::uint64_t seed, int k = 3);

struct TraceRecord {
  std::size_t sweep = 0;
  double elapsed_s = 0.0;
  double rel_residual = 0.0;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  int repair_events = 0;
};

enum class StopReason { MaxSweeps, TimeLimit, ResidualChange };

struct FitResult {
  FactorPair factors;
  SolveTrace trace;
  StopReason stop_reason = StopReason::MaxSweeps;
};

/// Full alternating loop from initialize(a, rank, config.seed, config.k).
FitResult fit(MatrixRef a, std::size_t rank, const SolverConfig& config,
              const BlockObserver& observer = {});
/// Same loop from caller-provided factors.
FitResult fit_from(MatrixRef a, FactorPair initial, const SolverConfig& config,
                   const BlockObserver& observer = {});

/// Flop model of one V-side half-sweep:
///   2mnr + 2nr^2 + (r/3)(7nr + 50n + 6m).
double flops_v_sweep(double m, double n, double r);
/// Full sweep: the V-side model plus the same with m and n exchanged. The
/// leading term is 4mnr.
double flops_per_sweep(double m, double n, double r);

}  // namespace arknls
