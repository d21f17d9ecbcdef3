// Brute-force active-set enumeration. Shares nothing with the closed forms in
// nnls.cpp beyond the kkt_residual diagnostic.

#include <algorithm>
#include <cmath>
#include <optional>

#include "arknls/nnls.hpp"

namespace arknls {

namespace {

constexpr double kDualTolerance = 1e-9;

// Solves the SPD system A x = rhs (A is s x s, row-major) by Cholesky.
// Returns nullopt if A is not numerically positive definite.
std::optional<std::vector<double>> cholesky_solve(std::vector<double> A,
                                                  std::vector<double> rhs) {
  const std::size_t s = rhs.size();
  for (std::size_t j = 0; j < s; ++j) {
    double diag = A[j * s + j];
    for (std::size_t l = 0; l < j; ++l) diag -= A[j * s + l] * A[j * s + l];
    if (!(diag > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    A[j * s + j] = ljj;
    for (std::size_t i = j + 1; i < s; ++i) {
      double v = A[i * s + j];
      for (std::size_t l = 0; l < j; ++l) v -= A[i * s + l] * A[j * s + l];
      A[i * s + j] = v / ljj;
    }
  }
  for (std::size_t i = 0; i < s; ++i) {
    double v = rhs[i];
    for (std::size_t l = 0; l < i; ++l) v -= A[i * s + l] * rhs[l];
    rhs[i] = v / A[i * s + i];
  }
  for (std::size_t i = s; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t l = i + 1; l < s; ++l) v -= A[l * s + i] * rhs[l];
    rhs[i] = v / A[i * s + i];
  }
  return rhs;
}

struct Candidate {
  std::vector<double> y;
  std::vector<std::size_t> support;
  double residual_norm;
  double y_norm;
};

bool better(const Candidate& a, const Candidate& b) {
  const double scale = 1.0 + std::max(a.residual_norm, b.residual_norm);
  if (std::abs(a.residual_norm - b.residual_norm) > 1e-12 * scale) {
    return a.residual_norm < b.residual_norm;
  }
  const double yscale = 1.0 + std::max(a.y_norm, b.y_norm);
  if (std::abs(a.y_norm - b.y_norm) > 1e-12 * yscale) return a.y_norm < b.y_norm;
  return std::lexicographical_compare(a.support.begin(), a.support.end(),
                                      b.support.begin(), b.support.end());
}

}  // namespace

OracleReport nnls_oracle_report(const DenseMatrix& G, std::span<const double> b) {
  const std::size_t k = G.cols();
  const std::size_t m = G.rows();
  if (k == 0 || k > 12) throw std::invalid_argument("nnls_oracle: need 1 <= k <= 12");
  if (m != b.size()) throw std::invalid_argument("nnls_oracle: length mismatch");

  // Full normal-equation data, reused by every subset.
  std::vector<double> gtg(k * k);
  std::vector<double> gtb(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < m; ++t) s += G(t, i) * G(t, j);
      gtg[i * k + j] = s;
    }
    double s = 0.0;
    for (std::size_t t = 0; t < m; ++t) s += G(t, i) * b[t];
    gtb[i] = s;
  }

  std::optional<Candidate> best;
  int accepted = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (std::size_t{1} << j)) support.push_back(j);
    }
    std::vector<double> y(k, 0.0);
    if (!support.empty()) {
      const std::size_t s = support.size();
      std::vector<double> sub(s * s);
      std::vector<double> rhs(s);
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) sub[i * s + j] = gtg[support[i] * k + support[j]];
        rhs[i] = gtb[support[i]];
      }
      auto solved = cholesky_solve(std::move(sub), std::move(rhs));
      if (!solved) continue;
      bool primal_ok = true;
      for (std::size_t i = 0; i < s; ++i) {
        if (!((*solved)[i] >= 0.0)) primal_ok = false;
        y[support[i]] = (*solved)[i];
      }
      if (!primal_ok) continue;
    }

    std::vector<double> residual(b.begin(), b.end());
    for (std::size_t j : support) {
      for (std::size_t t = 0; t < m; ++t) residual[t] -= G(t, j) * y[j];
    }
    bool dual_ok = true;
    for (std::size_t j = 0; j < k && dual_ok; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      double grad = 0.0;
      for (std::size_t t = 0; t < m; ++t) grad -= G(t, j) * residual[t];
      if (grad < -kDualTolerance) dual_ok = false;
    }
    if (!dual_ok) continue;

    ++accepted;
    double rr = 0.0, yy = 0.0;
    for (double v : residual) rr += v * v;
    for (double v : y) yy += v * v;
    Candidate cand{std::move(y), std::move(support), std::sqrt(rr), std::sqrt(yy)};
    if (!best || better(cand, *best)) best = std::move(cand);
  }

  if (!best) {
    throw std::runtime_error("nnls_oracle: no active set satisfies the KKT conditions");
  }
  OracleReport report;
  report.accepted_subsets = accepted;
  report.solution.kkt_residual = kkt_residual(G, b, best->y);
  report.solution.y = std::move(best->y);
  return report;
}

NnlsSolution nnls_oracle(const DenseMatrix& G, std::span<const double> b) {
  return nnls_oracle_report(G, b).solution;
}

}  // namespace arknls
