#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "arknls/solver.hpp"

namespace arknls {

namespace {

// Squared norms below this are treated as an exactly zero column.
constexpr double kZeroNormSq = std::numeric_limits<double>::min();

double det2(const DenseMatrix& M, std::size_t i, std::size_t j) {
  return M(i, i) * M(j, j) - M(i, j) * M(i, j);
}

double det3(const DenseMatrix& M, std::size_t c) {
  const double n11 = M(c, c), n22 = M(c + 1, c + 1), n33 = M(c + 2, c + 2);
  const double n12 = M(c, c + 1), n13 = M(c, c + 2), n23 = M(c + 1, c + 2);
  return n11 * (n22 * n33 - n23 * n23) - n12 * (n12 * n33 - n23 * n13) +
         n13 * (n12 * n23 - n22 * n13);
}

bool pair_dependent(const DenseMatrix& M, std::size_t i, std::size_t j, double eps) {
  return !(det2(M, i, j) > eps * M(i, i) * M(j, j));
}

bool triple_dependent(const DenseMatrix& M, std::size_t c, double eps) {
  return !(det3(M, c) > eps * M(c, c) * M(c + 1, c + 1) * M(c + 2, c + 2));
}

// Replaces fixed(:, col) by the unit vector e_row and refreshes the cached
// products touched by that column:
//   H(:, col) = A_side(row, :)^T,  M(:, col) = M(col, :)^T = fixed(row, :)^T.
void place_unit(MatrixRef a_side, DenseMatrix& fixed, BlockWorkspace& ws,
                std::size_t col, std::size_t row, RepairPlan& plan) {
  auto u = fixed.col(col);
  std::fill(u.begin(), u.end(), 0.0);
  u[row] = 1.0;

  const std::vector<double> a_row = row_of(a_side, row);
  auto h = ws.H.col(col);
  std::copy(a_row.begin(), a_row.end(), h.begin());

  for (std::size_t l = 0; l < fixed.cols(); ++l) {
    ws.M(l, col) = fixed(row, l);
    ws.M(col, l) = fixed(row, l);
  }
  plan.unit_rows.push_back(row);
}

// Row t minimizing the leverage of e_t on span{fixed(:, c1), fixed(:, c2)}
// (or on fixed(:, c1) alone when c2 is absent), i.e. the unit vector farthest
// from that span.
std::size_t least_leverage_row(const DenseMatrix& fixed, const DenseMatrix& M,
                               std::size_t c1, std::optional<std::size_t> c2) {
  std::size_t best_row = 0;
  double best = std::numeric_limits<double>::infinity();
  if (!c2) {
    for (std::size_t t = 0; t < fixed.rows(); ++t) {
      const double lev = fixed(t, c1) * fixed(t, c1) / M(c1, c1);
      if (lev < best) {
        best = lev;
        best_row = t;
      }
    }
    return best_row;
  }
  const double g11 = M(c1, c1), g22 = M(*c2, *c2), g12 = M(c1, *c2);
  const double d = g11 * g22 - g12 * g12;
  for (std::size_t t = 0; t < fixed.rows(); ++t) {
    const double x = fixed(t, c1), y = fixed(t, *c2);
    const double lev = (g22 * x * x - 2.0 * g12 * x * y + g11 * y * y) / d;
    if (lev < best) {
      best = lev;
      best_row = t;
    }
  }
  return best_row;
}

void absorb(DenseMatrix& updated, std::size_t dst, std::size_t src, double coef) {
  auto d = updated.col(dst);
  const auto s = updated.col(src);
  for (std::size_t t = 0; t < d.size(); ++t) d[t] += coef * s[t];
}

void clear_column(DenseMatrix& matrix, std::size_t col) {
  auto c = matrix.col(col);
  std::fill(c.begin(), c.end(), 0.0);
}

}  // namespace

RepairPlan repair_block(MatrixRef a_side, DenseMatrix& fixed, DenseMatrix& updated,
                        BlockWorkspace& ws, Block block, double rank_eps) {
  if (block.width < 1 || block.width > 3 || block.first + block.width > fixed.cols()) {
    throw std::invalid_argument("repair_block: bad block");
  }
  if (fixed.rows() < block.first + block.width) {
    throw std::invalid_argument("repair_block: fixed factor has fewer rows than rank");
  }
  const std::size_t c1 = block.first;
  const std::size_t c2 = c1 + 1;
  const std::size_t c3 = c1 + 2;
  DenseMatrix& M = ws.M;

  RepairPlan plan;
  plan.block = block;
  plan.columns = {c1, c2, c3};

  // A zero first column becomes e_{c1}; its V column is zeroed.
  if (M(c1, c1) < kZeroNormSq) {
    plan.zero_column = true;
    clear_column(updated, c1);
    place_unit(a_side, fixed, ws, c1, c1, plan);
  }
  if (block.width == 1) return plan;

  // Dependent pair u2 = alpha u1: alpha v2 is folded into v1 and u2 becomes a
  // unit vector independent of u1.
  if (pair_dependent(M, c1, c2, rank_eps)) {
    plan.dependent_pair = true;
    plan.alpha = std::sqrt(M(c2, c2) / M(c1, c1));
    absorb(updated, c1, c2, plan.alpha);
    clear_column(updated, c2);
    const std::size_t row = fixed(c1, c1) != 0.0 ? c2 : c1;
    place_unit(a_side, fixed, ws, c2, row, plan);
    if (pair_dependent(M, c1, c2, rank_eps)) {
      place_unit(a_side, fixed, ws, c2, least_leverage_row(fixed, M, c1, std::nullopt), plan);
    }
  }
  if (block.width == 2) {
    if (pair_dependent(M, c1, c2, rank_eps)) {
      throw std::logic_error("repair_block: pair still dependent after repair");
    }
    return plan;
  }

  // Dependent triple u3 = at u1 + bt u2. Reorder so the dependent column is a
  // nonnegative combination of the other two, fold it into their V columns
  // and replace it by a unit vector.
  if (triple_dependent(M, c1, rank_eps)) {
    plan.dependent_triple = true;
    const double d12 = det2(M, c1, c2);
    double at = (M(c2, c2) * M(c1, c3) - M(c2, c3) * M(c1, c2)) / d12;
    double bt = (M(c1, c1) * M(c2, c3) - M(c1, c2) * M(c1, c3)) / d12;

    std::array<int, 3> perm{0, 1, 2};
    if (at * bt >= 0.0) {
      if (at < 0.0 || bt < 0.0) {
        // Both coefficients of a nonnegative u3 can only be negative through
        // rounding of values that are zero.
        if (std::max(std::abs(at), std::abs(bt)) > 1e-12) {
          throw std::logic_error("repair_block: both combination coefficients negative (" +
                                 std::to_string(at) + ", " + std::to_string(bt) + ")");
        }
        at = std::max(at, 0.0);
        bt = std::max(bt, 0.0);
      }
    } else if (at < 0.0) {
      const double a_new = -at / bt;
      const double b_new = 1.0 / bt;
      at = a_new;
      bt = b_new;
      perm = {0, 2, 1};
    } else {
      const double a_new = -bt / at;
      const double b_new = 1.0 / at;
      at = a_new;
      bt = b_new;
      perm = {1, 2, 0};
    }
    plan.alpha_tilde = at;
    plan.beta_tilde = bt;
    plan.permutation = perm;
    const std::size_t j1 = c1 + std::size_t(perm[0]);
    const std::size_t j2 = c1 + std::size_t(perm[1]);
    const std::size_t j3 = c1 + std::size_t(perm[2]);
    plan.columns = {j1, j2, j3};

    absorb(updated, j1, j3, at);
    absorb(updated, j2, j3, bt);
    clear_column(updated, j3);

    const double minor = fixed(j1, j1) * fixed(j2, j2) - fixed(j2, j1) * fixed(j1, j2);
    std::size_t row;
    if (minor != 0.0) {
      row = j3;
    } else if (fixed(j1, j1) + fixed(j1, j2) == 0.0) {
      row = j1;
    } else {
      row = j2;
    }
    place_unit(a_side, fixed, ws, j3, row, plan);
    if (triple_dependent(M, c1, rank_eps)) {
      place_unit(a_side, fixed, ws, j3, least_leverage_row(fixed, M, j1, j2), plan);
    }
  }
  if (triple_dependent(M, c1, rank_eps) || !(M(c1, c1) > 0.0)) {
    throw std::logic_error("repair_block: block still rank deficient after repair");
  }
  return plan;
}

}  // namespace arknls
