#include "arknls/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "arknls/rng.hpp"

namespace arknls {

namespace {

// Below this the trace identity's cancellation error (about eps / residual)
// exceeds the trace's monotonicity tolerance.
constexpr double kDirectResidualBelow = 1e-3;

}  // namespace

void SolverConfig::validate() const {
  if (k < 1 || k > 3) {
    throw std::invalid_argument("SolverConfig: k must be 1, 2 or 3, got " + std::to_string(k));
  }
  if (max_sweeps < 1) throw std::invalid_argument("SolverConfig: max_sweeps must be >= 1");
  if (!(rank_eps > 0.0)) throw std::invalid_argument("SolverConfig: rank_eps must be > 0");
  if (time_limit && !(*time_limit > 0.0)) {
    throw std::invalid_argument("SolverConfig: time_limit must be > 0");
  }
  if (tol_residual_change && !(*tol_residual_change >= 0.0)) {
    throw std::invalid_argument("SolverConfig: tol_residual_change must be >= 0");
  }
}

std::vector<Block> block_partition(std::size_t r, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("block_partition: k must be 1, 2 or 3");
  const auto width = static_cast<std::size_t>(k);
  if (r < width) {
    throw std::invalid_argument("block_partition: rank " + std::to_string(r) +
                                " is smaller than block width " + std::to_string(k));
  }
  std::vector<Block> blocks;
  for (std::size_t first = 0; first + width <= r; first += width) {
    blocks.push_back({first, width});
  }
  if (r % width != 0) blocks.push_back({r - width, width});
  return blocks;
}

FactorPair initialize(MatrixRef a, std::size_t rank, std::uint64_t seed, int k) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (rank == 0 || rank > std::min(m, n)) {
    throw std::invalid_argument("initialize: rank must be in [1, min(m, n)] = [1, " +
                                std::to_string(std::min(m, n)) + "], got " +
                                std::to_string(rank));
  }
  SplitMix64 rng(seed);
  FactorPair f;
  f.k = k;
  f.V = DenseMatrix(n, rank);
  for (double& v : f.V.data()) v = rng.uniform();
  f.U = DenseMatrix(m, rank);
  for (double& v : f.U.data()) v = rng.uniform();
  for (std::size_t j = 0; j < rank; ++j) {
    auto c = f.U.col(j);
    double s = 0.0;
    for (double v : c) s += v * v;
    const double norm = std::sqrt(s);
    if (norm > 0.0) {
      for (double& v : c) v /= norm;
    }
  }
  return f;
}

SweepResult sweep(MatrixRef a, MatrixRef a_t, FactorPair& factors, Side side,
                  double rank_eps, const BlockObserver& observer) {
  const bool v_side = side == Side::V;
  const MatrixRef a_side = v_side ? a : a_t;
  DenseMatrix& fixed = v_side ? factors.U : factors.V;
  DenseMatrix& updated = v_side ? factors.V : factors.U;
  if (a.rows() != a_t.cols() || a.cols() != a_t.rows()) {
    throw std::invalid_argument("sweep: a_t is not the transpose of a");
  }
  if (a_side.rows() != fixed.rows() || a_side.cols() != updated.rows() ||
      fixed.cols() != updated.cols()) {
    throw std::invalid_argument("sweep: factor shapes do not match A");
  }

  BlockWorkspace ws = make_workspace(a_side, fixed);
  SweepResult result;
  for (const Block& block : block_partition(updated.cols(), factors.k)) {
    const RepairPlan plan = repair_block(a_side, fixed, updated, ws, block, rank_eps);
    result.repair_events += plan.events();
    update_block(updated, ws, block, rank_eps);
    if (observer) observer(BlockEvent{side, block, factors, plan, ws});
  }
  // ws.H and ws.M describe the repaired fixed factor, so
  // <A, fixed updated^T> = <H, updated>.
  result.rel_residual = relative_residual_from_products(
      frobenius_norm_sq(a_side), inner_product(ws.H, updated), ws.M, gram(updated));
  if (result.rel_residual < kDirectResidualBelow) {
    result.rel_residual = relative_residual_direct(a_side, fixed, updated);
  }
  return result;
}

FitResult fit(MatrixRef a, std::size_t rank, const SolverConfig& config,
              const BlockObserver& observer) {
  config.validate();
  return fit_from(a, initialize(a, rank, config.seed, config.k), config, observer);
}

FitResult fit_from(MatrixRef a, FactorPair initial, const SolverConfig& config,
                   const BlockObserver& observer) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  config.validate();

  const std::size_t r = initial.rank();
  if (initial.U.rows() != a.rows() || initial.V.rows() != a.cols() ||
      initial.V.cols() != r) {
    throw std::invalid_argument("fit: initial factors do not match A");
  }
  if (r > std::min(a.rows(), a.cols())) {
    throw std::invalid_argument("fit: rank exceeds min(m, n)");
  }
  if (r < static_cast<std::size_t>(config.k)) {
    throw std::invalid_argument("fit: rank " + std::to_string(r) +
                                " is smaller than block width k = " + std::to_string(config.k));
  }
  if (!a.is_sparse() && a.dense().min_value() < 0.0) {
    throw std::invalid_argument("fit: A has negative entries");
  }
  if (initial.U.min_value() < 0.0 || initial.V.min_value() < 0.0) {
    throw std::invalid_argument("fit: initial factors must be nonnegative");
  }
  if (!(frobenius_norm_sq(a) > 0.0)) throw std::domain_error("fit: A is zero");

  FitResult out;
  out.factors = std::move(initial);
  out.factors.k = config.k;
  const Matrix a_t = transpose(a);

  for (int s = 1; s <= config.max_sweeps; ++s) {
    const SweepResult v_half =
        sweep(a, a_t, out.factors, Side::V, config.rank_eps, observer);
    const SweepResult u_half =
        sweep(a, a_t, out.factors, Side::U, config.rank_eps, observer);
    out.trace.repair_events += v_half.repair_events + u_half.repair_events;

    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    out.trace.records.push_back({static_cast<std::size_t>(s), elapsed, u_half.rel_residual});

    if (config.time_limit && elapsed >= *config.time_limit) {
      out.stop_reason = StopReason::TimeLimit;
      break;
    }
    const auto& recs = out.trace.records;
    if (config.tol_residual_change && recs.size() >= 2 &&
        std::abs(recs[recs.size() - 2].rel_residual - recs.back().rel_residual) <
            *config.tol_residual_change) {
      out.stop_reason = StopReason::ResidualChange;
      break;
    }
  }
  return out;
}

double flops_v_sweep(double m, double n, double r) {
  return 2.0 * m * n * r + 2.0 * n * r * r + (r / 3.0) * (7.0 * n * r + 50.0 * n + 6.0 * m);
}

double flops_per_sweep(double m, double n, double r) {
  return flops_v_sweep(m, n, r) + flops_v_sweep(n, m, r);
}

}  // namespace arknls
