#pragma once

// Single right-hand-side nonnegativity-constrained least squares,
//   min_{y >= 0} ||G y - b||,
// for coefficient matrices G with full column rank.

#include <functional>
#include <span>
#include <vector>

#include "arknls/matrix.hpp"

namespace arknls {

/// Default relative rank-deficiency cutoff for the closed forms.
inline constexpr double kDefaultRankEps = 1e-12;

struct NnlsSolution {
  std::vector<double> y;
  /// Largest KKT violation of y: |grad_j| where y_j > 0, max(0, -grad_j)
  /// where y_j = 0, with grad = G^T (G y - b).
  double kkt_residual = 0.0;
};

/// KKT violation of a candidate y, as stored in NnlsSolution::kkt_residual.
double kkt_residual(const DenseMatrix& G, std::span<const double> b,
                    std::span<const double> y);

/// y = [g^T b]_+ / ||g||^2. Throws RankDeficientError for g = 0.
NnlsSolution nnls_rank1(std::span<const double> g, std::span<const double> b);
NnlsSolution nnls_rank1(const DenseMatrix& G, std::span<const double> b,
                        double rank_eps = kDefaultRankEps);

/// Closed form for two columns: y2 first, then y1 from y2.
///
/// Requires d12 = |g1|^2 |g2|^2 - (g1^T g2)^2 > rank_eps |g1|^2 |g2|^2.
NnlsSolution nnls_rank2(const DenseMatrix& G, std::span<const double> b,
                        double rank_eps = kDefaultRankEps);

/// Closed form for three columns.
///
/// Evaluates the intermediates p (which uses det([b g2 g3]^T G) / det(G^T G),
/// the unconstrained first coefficient) and p~, then y3, y2 and y1 in that
/// order. Requires det(G^T G) > rank_eps |g1|^2 |g2|^2 |g3|^2.
NnlsSolution nnls_rank3(const DenseMatrix& G, std::span<const double> b,
                        double rank_eps = kDefaultRankEps);

using NnlsSolver =
    std::function<NnlsSolution(const DenseMatrix&, std::span<const double>)>;

/// Rank-(k+1) solution from a rank-k solver applied twice. With g the last
/// column of G and G' the first k columns,
///   y_{k+1} = [g^T (b - G' s(P G', P b))]_+ / |g|^2,  P = I - g g^T / |g|^2,
///   y'      = s(G', b - g y_{k+1}).
NnlsSolution nnls_recursive(const DenseMatrix& G, std::span<const double> b,
                            const NnlsSolver& base_solver);

struct OracleReport {
  NnlsSolution solution;
  /// Number of active sets that passed the primal and dual checks.
  int accepted_subsets = 0;
};

/// Exhaustive active-set enumeration (k <= 12). For each subset S the
/// unconstrained problem on the columns in S is solved from the normal
/// equations; S is accepted when y_S >= 0 and (G^T (G y - b))_j >= -1e-9 off
/// S. The accepted y with the smallest residual wins; ties go to the smaller
/// |y|, then the lexicographically smaller S.
OracleReport nnls_oracle_report(const DenseMatrix& G, std::span<const double> b);
NnlsSolution nnls_oracle(const DenseMatrix& G, std::span<const double> b);

}  // namespace arknls
