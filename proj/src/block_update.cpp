#include <algorithm>
#include <string>

#include "arknls/solver.hpp"

namespace arknls {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

[[noreturn]] void rank_failure(const char* what, Block block) {
  throw std::logic_error(std::string("update_block: ") + what + " for block at column " +
                         std::to_string(block.first) + " (repair skipped?)");
}

BlockScalars block_scalars(const DenseMatrix& M, Block block) {
  const std::size_t c = block.first;
  BlockScalars s;
  s.n11 = M(c, c);
  if (block.width >= 2) {
    s.n22 = M(c + 1, c + 1);
    s.n12 = M(c, c + 1);
    s.d12 = s.n11 * s.n22 - s.n12 * s.n12;
  }
  if (block.width == 3) {
    s.n33 = M(c + 2, c + 2);
    s.n13 = M(c, c + 2);
    s.n23 = M(c + 1, c + 2);
    s.a = s.n12 * s.n33 - s.n23 * s.n13;
    s.b = s.n13 * s.n22 - s.n23 * s.n12;
    s.d13 = s.n11 * s.n33 - s.n13 * s.n13;
    s.d23 = s.n22 * s.n33 - s.n23 * s.n23;
    s.det = s.n11 * s.d23 - s.n12 * s.a - s.n13 * s.b;
  }
  return s;
}

void check_rank(const BlockScalars& s, Block block, double eps) {
  if (!(s.n11 > 0.0)) rank_failure("zero column 1", block);
  if (block.width >= 2) {
    if (!(s.n22 > 0.0)) rank_failure("zero column 2", block);
    if (!(s.d12 > eps * s.n11 * s.n22)) rank_failure("d12 below threshold", block);
  }
  if (block.width == 3) {
    if (!(s.n33 > 0.0)) rank_failure("zero column 3", block);
    if (!(s.d13 > eps * s.n11 * s.n33)) rank_failure("d13 below threshold", block);
    if (!(s.d23 > eps * s.n22 * s.n33)) rank_failure("d23 below threshold", block);
    if (!(s.det > eps * s.n11 * s.n22 * s.n33)) rank_failure("det below threshold", block);
  }
}

}  // namespace

BlockWorkspace make_workspace(MatrixRef a_side, const DenseMatrix& fixed) {
  BlockWorkspace ws;
  ws.H = at_times(a_side, fixed);
  ws.M = gram(fixed);
  ws.R = DenseMatrix(a_side.cols(), 3);
  return ws;
}

void update_block(DenseMatrix& updated, BlockWorkspace& ws, Block block, double rank_eps) {
  const std::size_t n = updated.rows();
  const std::size_t r = updated.cols();
  const std::size_t c = block.first;
  const std::size_t w = block.width;
  if (w < 1 || w > 3 || c + w > r) throw std::invalid_argument("update_block: bad block");
  if (ws.H.rows() != n || ws.H.cols() != r || ws.M.rows() != r) {
    throw std::invalid_argument("update_block: workspace does not match factor");
  }

  ws.scalars = block_scalars(ws.M, block);
  const BlockScalars& s = ws.scalars;
  check_rank(s, block, rank_eps);

  // R(:, j) = H(:, c+j) - updated * M(:, c+j)
  if (ws.R.rows() != n) ws.R = DenseMatrix(n, 3);
  for (std::size_t j = 0; j < w; ++j) {
    auto res = ws.R.col(j);
    const auto h = ws.H.col(c + j);
    std::copy(h.begin(), h.end(), res.begin());
    for (std::size_t l = 0; l < r; ++l) {
      const double coef = ws.M(l, c + j);
      if (coef == 0.0) continue;
      const auto v = updated.col(l);
      for (std::size_t t = 0; t < n; ++t) res[t] -= v[t] * coef;
    }
  }

  auto v1 = updated.col(c);
  const auto r1 = ws.R.col(0);
  if (w == 1) {
    for (std::size_t t = 0; t < n; ++t) v1[t] = pos(v1[t] + r1[t] / s.n11);
    return;
  }

  auto v2 = updated.col(c + 1);
  const auto r2 = ws.R.col(1);
  if (w == 2) {
    for (std::size_t t = 0; t < n; ++t) {
      const double y1_free = v1[t] + (s.n22 * r1[t] - s.n12 * r2[t]) / s.d12;
      const double new2 = pos(v2[t] + r2[t] / s.n22 + s.n12 / s.n22 * (v1[t] - pos(y1_free)));
      const double new1 = pos(v1[t] + r1[t] / s.n11 + s.n12 / s.n11 * (v2[t] - new2));
      v1[t] = new1;
      v2[t] = new2;
    }
    return;
  }

  auto v3 = updated.col(c + 2);
  const auto r3 = ws.R.col(2);
  for (std::size_t t = 0; t < n; ++t) {
    const double x1 = v1[t], x2 = v2[t], x3 = v3[t];
    const double y1_free = (s.d23 * r1[t] - s.a * r2[t] - s.b * r3[t]) / s.det + x1;
    const double p =
        pos(x2 + (s.n33 * r2[t] - s.n23 * r3[t]) / s.d23 + s.a / s.d23 * (x1 - pos(y1_free)));
    const double p_tilde =
        pos(x1 + (s.n33 * r1[t] - s.n13 * r3[t]) / s.d13 + s.a / s.d13 * (x2 - p));
    const double new3 = pos(x3 + r3[t] / s.n33 + s.n13 / s.n33 * (x1 - p_tilde) +
                            s.n23 / s.n33 * (x2 - p));
    const double z =
        pos(x1 + (s.n22 * r1[t] - s.n12 * r2[t]) / s.d12 + s.b / s.d12 * (x3 - new3));
    const double new2 =
        pos(x2 + r2[t] / s.n22 + s.n12 / s.n22 * (x1 - z) + s.n23 / s.n22 * (x3 - new3));
    const double new1 =
        pos(x1 + r1[t] / s.n11 + s.n12 / s.n11 * (x2 - new2) + s.n13 / s.n11 * (x3 - new3));
    v1[t] = new1;
    v2[t] = new2;
    v3[t] = new3;
  }
}

}  // namespace arknls
