#include "arknls/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arknls/rng.hpp"

namespace arknls {

void SynthSpec::validate() const {
  if (m == 0 || n == 0) throw std::invalid_argument("SynthSpec: dimensions must be positive");
  if (true_rank == 0 || true_rank > std::min(m, n)) {
    throw std::invalid_argument("SynthSpec: true_rank must be in [1, min(m, n)], got " +
                                std::to_string(true_rank));
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("SynthSpec: noise_std must be finite and >= 0");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("SynthSpec: sparsity must be in [0, 1]");
  }
}

namespace {

DenseMatrix uniform_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix out(rows, cols);
  for (double& v : out.data()) v = rng.uniform();
  return out;
}

SyntheticFactors draw_low_rank(const SynthSpec& spec, SplitMix64& rng) {
  DenseMatrix W = uniform_matrix(rng, spec.m, spec.true_rank);
  for (std::size_t j = 0; j < W.cols(); ++j) {
    auto c = W.col(j);
    double s = 0.0;
    for (double v : c) s += v * v;
    const double norm = std::sqrt(s);
    for (double& v : c) v /= norm;
  }
  DenseMatrix H = uniform_matrix(rng, spec.n, spec.true_rank);

  DenseMatrix A(spec.m, spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    auto a = A.col(j);
    for (std::size_t l = 0; l < spec.true_rank; ++l) {
      const double h = H(j, l);
      const auto w = W.col(l);
      for (std::size_t i = 0; i < spec.m; ++i) a[i] += w[i] * h;
    }
  }
  if (spec.noise_std > 0.0) {
    for (double& v : A.data()) v += spec.noise_std * rng.normal();
  }
  for (double& v : A.data()) v = std::max(v, 0.0);
  return {std::move(W), std::move(H), std::move(A)};
}

}  // namespace

SyntheticFactors gen_dense_factors(const SynthSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  return draw_low_rank(spec, rng);
}

DenseMatrix gen_dense(const SynthSpec& spec) {
  if (spec.sparsity != 0.0) {
    throw std::invalid_argument("gen_dense: sparsity must be 0 for a dense matrix");
  }
  return gen_dense_factors(spec).A;
}

SparseMatrixCSR gen_sparse(const SynthSpec& spec) {
  spec.validate();
  if (!(spec.sparsity > 0.0 && spec.sparsity < 1.0)) {
    throw std::invalid_argument("gen_sparse: sparsity must be in (0, 1)");
  }
  SplitMix64 rng(spec.seed);
  const DenseMatrix L = draw_low_rank(spec, rng).A;

  std::vector<std::size_t> offsets(spec.m + 1, 0);
  std::vector<std::size_t> indices;
  std::vector<double> values;
  const auto expected = static_cast<std::size_t>(spec.sparsity * double(spec.m) * double(spec.n));
  indices.reserve(expected);
  values.reserve(expected);
  for (std::size_t i = 0; i < spec.m; ++i) {
    for (std::size_t j = 0; j < spec.n; ++j) {
      if (rng.uniform() >= spec.sparsity) continue;
      const double v = rng.uniform() * L(i, j);
      if (v > 0.0) {
        indices.push_back(j);
        values.push_back(v);
      }
    }
    offsets[i + 1] = values.size();
  }
  return SparseMatrixCSR(spec.m, spec.n, std::move(offsets), std::move(indices),
                         std::move(values));
}

}  // namespace arknls
