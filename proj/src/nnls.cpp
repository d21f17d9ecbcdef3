#include "arknls/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace arknls {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void check_shape(const DenseMatrix& G, std::span<const double> b, std::size_t k,
                 const char* who) {
  if (G.cols() != k) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(k) +
                                " columns, got " + std::to_string(G.cols()));
  }
  if (G.rows() != b.size()) {
    throw std::invalid_argument(std::string(who) + ": G has " + std::to_string(G.rows()) +
                                " rows but b has " + std::to_string(b.size()));
  }
}

NnlsSolution finish(const DenseMatrix& G, std::span<const double> b, std::vector<double> y) {
  NnlsSolution out;
  out.kkt_residual = kkt_residual(G, b, y);
  out.y = std::move(y);
  return out;
}

}  // namespace

double kkt_residual(const DenseMatrix& G, std::span<const double> b,
                    std::span<const double> y) {
  std::vector<double> residual(b.begin(), b.end());
  for (std::size_t j = 0; j < G.cols(); ++j) {
    const auto g = G.col(j);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= g[i] * y[j];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < G.cols(); ++j) {
    const double grad = -dot(G.col(j), residual);
    const double violation = y[j] > 0.0 ? std::abs(grad) : pos(-grad);
    worst = std::max(worst, violation);
  }
  return worst;
}

NnlsSolution nnls_rank1(std::span<const double> g, std::span<const double> b) {
  if (g.size() != b.size()) throw std::invalid_argument("nnls_rank1: length mismatch");
  const double gg = dot(g, g);
  if (!(gg > 0.0)) throw RankDeficientError("nnls_rank1: g is zero");
  NnlsSolution out;
  out.y = {pos(dot(g, b)) / gg};
  const double grad = gg * out.y[0] - dot(g, b);
  out.kkt_residual = out.y[0] > 0.0 ? std::abs(grad) : pos(-grad);
  return out;
}

NnlsSolution nnls_rank1(const DenseMatrix& G, std::span<const double> b, double) {
  check_shape(G, b, 1, "nnls_rank1");
  return nnls_rank1(G.col(0), b);
}

NnlsSolution nnls_rank2(const DenseMatrix& G, std::span<const double> b, double rank_eps) {
  check_shape(G, b, 2, "nnls_rank2");
  const auto g1 = G.col(0);
  const auto g2 = G.col(1);
  const double n11 = dot(g1, g1);
  const double n22 = dot(g2, g2);
  const double n12 = dot(g1, g2);
  const double b1 = dot(b, g1);
  const double b2 = dot(b, g2);
  const double d12 = n11 * n22 - n12 * n12;
  if (!(d12 > rank_eps * n11 * n22) || !(n11 > 0.0) || !(n22 > 0.0)) {
    throw RankDeficientError("nnls_rank2: columns are linearly dependent");
  }
  const double y1_free = (n22 * b1 - b2 * n12) / d12;
  const double y2 = pos(b2 - n12 * pos(y1_free)) / n22;
  const double y1 = pos(b1 - n12 * y2) / n11;
  return finish(G, b, {y1, y2});
}

NnlsSolution nnls_rank3(const DenseMatrix& G, std::span<const double> b, double rank_eps) {
  check_shape(G, b, 3, "nnls_rank3");
  const auto g1 = G.col(0);
  const auto g2 = G.col(1);
  const auto g3 = G.col(2);
  const double n11 = dot(g1, g1), n22 = dot(g2, g2), n33 = dot(g3, g3);
  const double n12 = dot(g1, g2), n13 = dot(g1, g3), n23 = dot(g2, g3);
  const double b1 = dot(b, g1), b2 = dot(b, g2), b3 = dot(b, g3);

  // det(G^T G) by cofactor expansion along the first row.
  const double det_g = n11 * (n22 * n33 - n23 * n23) - n12 * (n12 * n33 - n23 * n13) +
                       n13 * (n12 * n23 - n22 * n13);
  if (!(det_g > rank_eps * n11 * n22 * n33) || !(n11 > 0.0) || !(n22 > 0.0) ||
      !(n33 > 0.0)) {
    throw RankDeficientError("nnls_rank3: columns are linearly dependent");
  }
  // [b g2 g3]^T G, rows (b^T G), (g2^T G), (g3^T G).
  const double det_b = b1 * (n22 * n33 - n23 * n23) - b2 * (n12 * n33 - n23 * n13) +
                       b3 * (n12 * n23 - n22 * n13);

  const double d12 = n11 * n22 - n12 * n12;
  const double d13 = n11 * n33 - n13 * n13;
  const double d23 = n22 * n33 - n23 * n23;
  const double a = n12 * n33 - n23 * n13;

  const double p = pos((b2 * n33 - b3 * n23) / d23 - a / d23 * pos(det_b / det_g));
  const double p_tilde = pos((b1 * n33 - b3 * n13) / d13 - a / d13 * p);

  const double y3 = pos(b3 - n13 * p_tilde - n23 * p) / n33;
  const double inner =
      ((b1 * n22 - b2 * n12) - (n13 * n22 - n23 * n12) * y3) / d12;
  const double y2 = pos(b2 - n23 * y3 - n12 * pos(inner)) / n22;
  const double y1 = pos(b1 - n13 * y3 - n12 * y2) / n11;
  return finish(G, b, {y1, y2, y3});
}

NnlsSolution nnls_recursive(const DenseMatrix& G, std::span<const double> b,
                            const NnlsSolver& base_solver) {
  if (G.cols() < 2) throw std::invalid_argument("nnls_recursive: need at least 2 columns");
  if (G.rows() != b.size()) throw std::invalid_argument("nnls_recursive: length mismatch");
  const std::size_t m = G.rows();
  const std::size_t k = G.cols() - 1;
  const auto g = G.col(k);
  const double gg = dot(g, g);
  if (!(gg > 0.0)) throw RankDeficientError("nnls_recursive: last column is zero");

  const DenseMatrix head = G.columns(0, k);

  // Project g out of the first k columns and of b.
  DenseMatrix head_proj = head;
  for (std::size_t j = 0; j < k; ++j) {
    auto c = head_proj.col(j);
    const double coef = dot(g, head.col(j)) / gg;
    for (std::size_t i = 0; i < m; ++i) c[i] -= coef * g[i];
  }
  std::vector<double> b_proj(b.begin(), b.end());
  {
    const double coef = dot(g, b) / gg;
    for (std::size_t i = 0; i < m; ++i) b_proj[i] -= coef * g[i];
  }

  const NnlsSolution partial = base_solver(head_proj, b_proj);
  std::vector<double> rhs(b.begin(), b.end());
  for (std::size_t j = 0; j < k; ++j) {
    const auto c = head.col(j);
    for (std::size_t i = 0; i < m; ++i) rhs[i] -= c[i] * partial.y[j];
  }
  const double y_last = pos(dot(g, rhs)) / gg;

  std::vector<double> shifted(b.begin(), b.end());
  for (std::size_t i = 0; i < m; ++i) shifted[i] -= g[i] * y_last;
  NnlsSolution rest = base_solver(head, shifted);

  std::vector<double> y = std::move(rest.y);
  y.push_back(y_last);
  return finish(G, b, std::move(y));
}

}  // namespace arknls
