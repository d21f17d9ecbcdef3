// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arknls/io.hpp"
#include "arknls/nnls.hpp"
#include "arknls/solver.hpp"
#include "arknls/synth.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using namespace arknls;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

DenseMatrix random_G(std::mt19937_64& rng, std::size_t rows, std::size_t k) {
  DenseMatrix G = oracle::random_matrix(rng, rows, k);
  for (std::size_t j = 0; j < k; ++j) G(j, j) += 0.1;
  return G;
}

SynthSpec synth(std::size_t m, std::size_t n, std::size_t rank, double noise, std::uint64_t seed) {
  SynthSpec s;
  s.m = m;
  s.n = n;
  s.true_rank = rank;
  s.noise_std = noise;
  s.seed = seed;
  return s;
}

// 1
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst2 = 0.0, worst3 = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto G = random_G(rng, 10, 2);
    const auto b = oracle::random_vector(rng, 10, -1.0, 1.0);
    worst2 = std::max(worst2, oracle::max_abs_diff(nnls_rank2(G, b).y, nnls_oracle(G, b).y));
  }
  for (int i = 0; i < 10000; ++i) {
    const auto G = random_G(rng, 10, 3);
    const auto b = oracle::random_vector(rng, 10, -1.0, 1.0);
    worst3 = std::max(worst3, oracle::max_abs_diff(nnls_rank3(G, b).y, nnls_oracle(G, b).y));
  }
  const double t = seconds_since(t0);
  // The library oracle itself is cross-checked against the test-side enumeration.
  double cross = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto G = random_G(rng, 10, 3);
    const auto b = oracle::random_vector(rng, 10, -1.0, 1.0);
    cross = std::max(cross, oracle::max_abs_diff(nnls_oracle(G, b).y, oracle::enumerate_nnls(G, b)));
  }
  return {worst2 <= 1e-10 && worst3 <= 1e-10 && cross <= 1e-10 && t < 30.0,
          "max |diff| rank-2 " + fmt("%.2e", worst2) + ", rank-3 " + fmt("%.2e", worst3) +
              " (limit 1e-10), oracle cross-check " + fmt("%.2e", cross) + ", " +
              fmt("%.2f", t) + " s (limit 30 s)"};
}

// 2
Outcome recursion_consistency() {
  std::mt19937_64 rng(2);
  const NnlsSolver base2 = [](const DenseMatrix& G, std::span<const double> b) {
    return nnls_rank2(G, b);
  };
  const NnlsSolver base3 = [](const DenseMatrix& G, std::span<const double> b) {
    return nnls_rank3(G, b);
  };
  double worst3 = 0.0, worst4 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto G = random_G(rng, 12, 3);
    const auto b = oracle::random_vector(rng, 12, -1.0, 1.0);
    worst3 = std::max(worst3, oracle::max_abs_diff(nnls_recursive(G, b, base2).y, nnls_rank3(G, b).y));
  }
  for (int i = 0; i < 500; ++i) {
    const auto G = random_G(rng, 15, 4);
    const auto b = oracle::random_vector(rng, 15, -1.0, 1.0);
    worst4 = std::max(worst4, oracle::max_abs_diff(nnls_recursive(G, b, base3).y, nnls_oracle(G, b).y));
  }
  return {worst3 <= 1e-10 && worst4 <= 1e-8,
          "recursive(rank-2) vs rank-3 " + fmt("%.2e", worst3) + " (limit 1e-10), rank-4 vs oracle " +
              fmt("%.2e", worst4) + " (limit 1e-8)"};
}

// 3
Outcome monotonicity() {
  long violations = 0, updates = 0;
  double worst = 0.0;
  for (std::size_t r : {7u, 15u}) {
    for (int k : {1, 2, 3}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DenseMatrix A = gen_dense(synth(300, 200, 10, 0.03, seed));
        SolverConfig cfg;
        cfg.k = k;
        cfg.max_sweeps = 200;
        cfg.seed = seed;
        FactorPair f = initialize(A, r, seed, k);
        double last = oracle::objective(A, f.U, f.V);
        const BlockObserver obs = [&](const BlockEvent& e) {
          ++updates;
          const double now = oracle::objective(A, e.factors.U, e.factors.V);
          const double excess = (now - last) / (1.0 + last);
          worst = std::max(worst, excess);
          if (excess > 1e-10) ++violations;
          last = now;
        };
        fit_from(A, std::move(f), cfg, obs);
      }
    }
  }
  return {violations == 0, std::to_string(updates) + " block updates, " +
                               std::to_string(violations) + " violations, worst relative increase " +
                               fmt("%.2e", worst) + " (limit 1e-10)"};
}

// 4
Outcome singularity_repair() {
  struct Construction {
    const char* name;
    std::size_t width;
    std::function<void(DenseMatrix&, std::size_t)> shape;
  };
  auto combo = [](std::size_t dst, std::size_t a, double ca, std::size_t b, double cb) {
    return [=](DenseMatrix& U, std::size_t c) {
      for (std::size_t t = 0; t < U.rows(); ++t) U(t, c + dst) = ca * U(t, c + a) + cb * U(t, c + b);
    };
  };
  const std::vector<Construction> suite{
      {"zero u1", 3, [](DenseMatrix& U, std::size_t c) {
         for (std::size_t t = 0; t < U.rows(); ++t) U(t, c) = 0.0;
       }},
      {"u2 = 0.5 u1", 3, combo(1, 0, 0.5, 0, 0.0)},
      {"u2 = 2 u1", 3, combo(1, 0, 2.0, 0, 0.0)},
      {"u2 = 0.5 u1 (k=2)", 2, combo(1, 0, 0.5, 0, 0.0)},
      {"u3 = 0.5 u1 + 0.25 u2", 3, combo(2, 0, 0.5, 1, 0.25)},
      {"u2 = u1 + 2 u3", 3, combo(1, 0, 1.0, 2, 2.0)},
      {"u1 = u2 + 2 u3", 3, combo(0, 1, 1.0, 2, 2.0)},
  };
  const std::array<std::array<int, 3>, 3> expected_perm{{{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}};

  double worst_product = 0.0, worst_cache = 0.0, min_det_ratio = INFINITY;
  int cases = 0;
  bool flags_ok = true;
  for (std::size_t ci = 0; ci < suite.size(); ++ci) {
    const auto& con = suite[ci];
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (bool sparse : {false, true}) {
        for (Side side : {Side::V, Side::U}) {
          std::mt19937_64 rng(seed * 31 + ci);
          const DenseMatrix A = oracle::random_matrix(rng, 12, 9);
          FactorPair f;
          f.U = oracle::random_matrix(rng, 12, 6);
          f.V = oracle::random_matrix(rng, 9, 6);
          const Block block{3, con.width};
          DenseMatrix& fixed = side == Side::V ? f.U : f.V;
          DenseMatrix& updated = side == Side::V ? f.V : f.U;
          con.shape(fixed, block.first);

          const DenseMatrix A_side = side == Side::V ? A : A.transposed();
          const SparseMatrixCSR As = SparseMatrixCSR::from_dense(A_side);
          const MatrixRef a = sparse ? MatrixRef(As) : MatrixRef(A_side);
          const DenseMatrix before = oracle::times_transpose(fixed.columns(3, con.width),
                                                             updated.columns(3, con.width));
          BlockWorkspace ws = make_workspace(a, fixed);
          const RepairPlan plan = repair_block(a, fixed, updated, ws, block);
          const DenseMatrix after = oracle::times_transpose(fixed.columns(3, con.width),
                                                            updated.columns(3, con.width));
          worst_product = std::max(
              worst_product, oracle::max_abs_diff(after, before) / (1.0 + oracle::max_abs(before)));

          const DenseMatrix H = oracle::transpose_times(A_side, fixed);
          const DenseMatrix M = oracle::gram(fixed);
          worst_cache = std::max({worst_cache, oracle::max_abs_diff(ws.H, H) / oracle::max_abs(H),
                                  oracle::max_abs_diff(ws.M, M) / oracle::max_abs(M)});
          const DenseMatrix Mb = oracle::gram(fixed.columns(3, con.width));
          double det = 0.0, norms = 1.0;
          if (con.width == 2) {
            det = Mb(0, 0) * Mb(1, 1) - Mb(0, 1) * Mb(1, 0);
          } else {
            det = Mb(0, 0) * (Mb(1, 1) * Mb(2, 2) - Mb(1, 2) * Mb(2, 1)) -
                  Mb(0, 1) * (Mb(1, 0) * Mb(2, 2) - Mb(1, 2) * Mb(2, 0)) +
                  Mb(0, 2) * (Mb(1, 0) * Mb(2, 1) - Mb(1, 1) * Mb(2, 0));
          }
          for (std::size_t j = 0; j < con.width; ++j) norms *= Mb(j, j);
          min_det_ratio = std::min(min_det_ratio, det / norms);

          flags_ok = flags_ok && plan.events() >= 1 && fixed.min_value() >= 0.0 &&
                     updated.min_value() >= 0.0;
          if (ci >= 4) flags_ok = flags_ok && plan.dependent_triple &&
                                  plan.permutation == expected_perm[ci - 4] &&
                                  plan.alpha_tilde >= 0.0 && plan.beta_tilde >= 0.0;
          ++cases;
        }
      }
    }
  }
  return {worst_product <= 1e-12 && worst_cache <= 1e-11 && min_det_ratio > 0.0 && flags_ok,
          std::to_string(cases) + " degenerate blocks, product change " + fmt("%.2e", worst_product) +
              " (limit 1e-12), cache mismatch " + fmt("%.2e", worst_cache) +
              " (limit 1e-11), min det/prod norms " + fmt("%.3g", min_det_ratio) +
              (flags_ok ? "" : ", unexpected repair plan")};
}

// 5
Outcome hals_equivalence() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DenseMatrix A = oracle::random_matrix(rng, 30, 20);
    FactorPair f;
    f.U = oracle::random_matrix(rng, 30, 6);
    f.V = oracle::random_matrix(rng, 20, 6);
    f.k = 1;
    DenseMatrix V = f.V;
    oracle::hals_update(A, f.U, V);
    sweep(A, A.transposed(), f, Side::V);
    worst = std::max(worst, oracle::max_abs_diff(f.V, V));
    DenseMatrix U = f.U;
    oracle::hals_update(A.transposed(), f.V, U);
    sweep(A, A.transposed(), f, Side::U);
    worst = std::max(worst, oracle::max_abs_diff(f.U, U));
  }
  return {worst <= 1e-12, "100 instances, max |diff| " + fmt("%.2e", worst) + " (limit 1e-12)"};
}

struct RecoveryRuns {
  std::vector<double> k3, k2;
  double k3_seconds = 0.0;
};

const RecoveryRuns& recovery_runs() {
  static const RecoveryRuns runs = [] {
    RecoveryRuns out;
    for (int k : {3, 2}) {
      const auto t0 = Clock::now();
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DenseMatrix A = gen_dense(synth(300, 200, 10, 0.0, seed));
        SolverConfig cfg;
        cfg.k = k;
        cfg.max_sweeps = 500;
        cfg.seed = seed;
        const FitResult res = fit(A, 10, cfg);
        (k == 3 ? out.k3 : out.k2).push_back(oracle::relative_residual(A, res.factors.U, res.factors.V));
      }
      if (k == 3) out.k3_seconds = seconds_since(t0);
    }
    return out;
  }();
  return runs;
}

// 6
Outcome noiseless_recovery() {
  const RecoveryRuns& runs = recovery_runs();
  std::vector<double> r = runs.k3;
  std::sort(r.begin(), r.end());
  const double median = r[r.size() / 2];
  return {median < 1e-2 && runs.k3_seconds < 60.0,
          "median final residual " + fmt("%.3e", median) + " (limit 1e-2), 5 runs in " +
              fmt("%.2f", runs.k3_seconds) + " s (limit 60 s)"};
}

// 7
Outcome decoupling() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DenseMatrix A = oracle::random_matrix(rng, 20, 15);
    const DenseMatrix U = oracle::random_matrix(rng, 20, 3);
    DenseMatrix V = oracle::random_matrix(rng, 15, 3);
    const DenseMatrix R = oracle::block_residual(A, U, V, 0, 3);
    BlockWorkspace ws = make_workspace(A, U);
    update_block(V, ws, {0, 3});
    for (std::size_t t = 0; t < 15; ++t) {
      const auto y = nnls_rank3(U, R.col(t)).y;
      for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(V(t, j) - y[j]));
    }
  }
  return {worst <= 1e-10, "100 instances of 20x15, r=3, max |diff| " + fmt("%.2e", worst) +
                              " (limit 1e-10)"};
}

// 8
// Full sweeps for the two sizes are timed alternately so that load changes
// on the host hit both equally; the medians are compared.
Outcome cost_scaling() {
  struct Problem {
    DenseMatrix A;
    Matrix At;
    FactorPair f;
    std::vector<double> times;
  };
  auto make = [](std::size_t n) {
    Problem p{gen_dense(synth(2000, n, 30, 0.03, 8)), {}, {}, {}};
    p.At = transpose(p.A);
    p.f = initialize(p.A, 30, 8, 3);
    return p;
  };
  Problem small = make(1000), large = make(2000);
  for (int round = 0; round < 16; ++round) {
    for (Problem* p : {&small, &large}) {
      const auto t0 = Clock::now();
      sweep(p->A, p->At, p->f, Side::V);
      sweep(p->A, p->At, p->f, Side::U);
      if (round > 0) p->times.push_back(seconds_since(t0));
    }
  }
  auto median = [](std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return x[x.size() / 2];
  };
  const double t1 = median(small.times);
  const double t2 = median(large.times);
  const double ratio = t2 / t1;
  return {ratio >= 1.5 && ratio <= 2.8, "median per-sweep time " + fmt("%.4f", t1) +
                                            " s (n=1000), " + fmt("%.4f", t2) +
                                            " s (n=2000), ratio " + fmt("%.3f", ratio) +
                                            " (limits [1.5, 2.8])"};
}

// 9
Outcome k2_vs_k3() {
  const RecoveryRuns& runs = recovery_runs();
  auto mean = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
  };
  const double m3 = mean(runs.k3), m2 = mean(runs.k2);
  return {m3 <= m2 + 1e-3, "mean final residual k=3 " + fmt("%.3e", m3) + ", k=2 " +
                               fmt("%.3e", m2) + " (require k=3 <= k=2 + 1e-3)"};
}

// 10
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome io_round_trips() {
  const fs::path dir = fs::temp_directory_path() / ("arknls_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::vector<std::string> problems;

  std::mt19937_64 rng(10);
  const DenseMatrix D = oracle::random_matrix(rng, 13, 7);
  write_matrix_market(D, dir / "d.mtx");
  if (std::get<DenseMatrix>(read_matrix_market(dir / "d.mtx")) != D) problems.push_back("dense");

  SynthSpec s = synth(60, 40, 5, 0.0, 10);
  s.sparsity = 0.05;
  const SparseMatrixCSR S = gen_sparse(s);
  write_matrix_market(S, dir / "s.mtx");
  if (std::get<SparseMatrixCSR>(read_matrix_market(dir / "s.mtx")) != S) problems.push_back("sparse");

  const auto E = SparseMatrixCSR::from_triplets(4, 3, {{0, 1, 0.1}, {3, 2, 1e-7}});
  write_matrix_market(E, dir / "e.mtx");
  if (std::get<SparseMatrixCSR>(read_matrix_market(dir / "e.mtx")) != E) problems.push_back("empty-row sparse");

  const FitResult fr = fit(gen_dense(synth(30, 20, 3, 0.01, 1)), 3, SolverConfig{});
  write_trace_csv(fr.trace, dir / "t.csv");
  const SolveTrace back = read_trace_csv(dir / "t.csv");
  bool trace_ok = back.records.size() == fr.trace.records.size();
  for (std::size_t i = 0; trace_ok && i < back.records.size(); ++i) {
    const auto& a = fr.trace.records[i];
    const auto& b = back.records[i];
    trace_ok = a.sweep == b.sweep && std::abs(a.elapsed_s - b.elapsed_s) <= 1e-9 * std::abs(a.elapsed_s) &&
               std::abs(a.rel_residual - b.rel_residual) <= 1e-9 * a.rel_residual;
  }
  if (!trace_ok) problems.push_back("trace csv");

  auto cli = [&](const std::string& out, bool timing, std::string& stdout_text) {
    std::vector<std::string> args{"--synthetic", "120,90,6,0.02,0.2", "--rank", "6",
                                  "--max-sweeps", "40", "--seed", "4", "--reps", "2",
                                  "--summary", "--out", (dir / out).string()};
    if (!timing) args.push_back("--no-timing");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    stdout_text = o.str();
    return code;
  };
  std::string o1, o2, o3, o4;
  if (cli("a.csv", false, o1) != 0 || cli("b.csv", false, o2) != 0) {
    problems.push_back("cli exit code");
  } else {
    if (o1 != o2) problems.push_back("cli stdout");
    for (int rep = 0; rep < 2; ++rep) {
      const std::string suffix = ".rep" + std::to_string(rep) + ".csv";
      if (slurp(dir / ("a" + suffix)) != slurp(dir / ("b" + suffix))) problems.push_back("cli csv bytes");
    }
  }
  // With wall-clock timing only elapsed_s may differ between runs.
  if (cli("c.csv", true, o3) != 0 || cli("d.csv", true, o4) != 0) {
    problems.push_back("cli exit code (timed)");
  } else {
    const SolveTrace c = read_trace_csv(dir / "c.rep1.csv"), d = read_trace_csv(dir / "d.rep1.csv");
    bool same = c.records.size() == d.records.size();
    for (std::size_t i = 0; same && i < c.records.size(); ++i) {
      same = c.records[i].sweep == d.records[i].sweep &&
             c.records[i].rel_residual == d.records[i].rel_residual;
    }
    if (!same) problems.push_back("timed cli residual columns");
  }
  fs::remove_all(dir);

  std::string detail = "dense, sparse, empty-row sparse, trace csv, cli bytes (x2 runs, 2 reps)";
  if (!problems.empty()) {
    detail += "; mismatches:";
    for (const auto& p : problems) detail += " " + p;
  }
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "recursion consistency", recursion_consistency);
  report(3, "monotonicity", monotonicity);
  report(4, "singularity repair", singularity_repair);
  report(5, "HALS equivalence", hals_equivalence);
  report(6, "noiseless recovery", noiseless_recovery);
  report(7, "decoupling", decoupling);
  report(8, "cost scaling", cost_scaling);
  report(9, "k=2 vs k=3", k2_vs_k3);
  report(10, "I/O round trips", io_round_trips);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
