#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "arknls/io.hpp"
#include "arknls/nnls.hpp"
#include "arknls/solver.hpp"
#include "arknls/synth.hpp"

namespace py = pybind11;
using namespace arknls;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;
using Vec = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Index = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

DenseMatrix to_dense(const FArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_numpy(const DenseMatrix& m) {
  py::array_t<double, py::array::f_style> out({m.rows(), m.cols()});
  if (m.size() != 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
  return out;
}

std::vector<double> to_vector(const Vec& v) {
  if (v.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  return {v.data(), v.data() + v.size()};
}

SparseMatrixCSR to_csr(std::size_t rows, std::size_t cols, const Index& indptr,
                       const Index& indices, const Vec& data) {
  std::vector<std::size_t> off(indptr.data(), indptr.data() + indptr.size());
  std::vector<std::size_t> idx(indices.data(), indices.data() + indices.size());
  return SparseMatrixCSR(rows, cols, std::move(off), std::move(idx), to_vector(data));
}

py::array_t<std::int64_t> index_array(std::span<const std::size_t> v) {
  py::array_t<std::int64_t> out(v.size());
  auto o = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) o(i) = static_cast<std::int64_t>(v[i]);
  return out;
}

py::tuple csr_parts(const SparseMatrixCSR& s) {
  const auto val = s.values();
  return py::make_tuple(py::make_tuple(s.rows(), s.cols()), index_array(s.row_offsets()),
                        index_array(s.col_indices()), py::array_t<double>(val.size(), val.data()));
}

py::dict fit_result(const FitResult& r) {
  py::array_t<double> trace({r.trace.records.size(), std::size_t{3}});
  auto t = trace.mutable_unchecked<2>();
  for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
    t(i, 0) = static_cast<double>(r.trace.records[i].sweep);
    t(i, 1) = r.trace.records[i].elapsed_s;
    t(i, 2) = r.trace.records[i].rel_residual;
  }
  static const char* reasons[] = {"max_sweeps", "time_limit", "residual_change"};
  py::dict d;
  d["U"] = to_numpy(r.factors.U);
  d["V"] = to_numpy(r.factors.V);
  d["trace"] = trace;
  d["stop_reason"] = reasons[static_cast<int>(r.stop_reason)];
  d["repair_events"] = r.trace.repair_events;
  return d;
}

SolverConfig make_config(int k, int max_sweeps, std::optional<double> time_limit,
                         std::optional<double> tol, std::uint64_t seed) {
  SolverConfig c;
  c.k = k;
  c.max_sweeps = max_sweeps;
  c.time_limit = time_limit;
  c.tol_residual_change = tol;
  c.seed = seed;
  return c;
}

NnlsSolution nnls_dispatch(const FArray& G, const Vec& b) {
  const DenseMatrix g = to_dense(G);
  const auto bb = to_vector(b);
  switch (g.cols()) {
    case 1: return nnls_rank1(g, bb);
    case 2: return nnls_rank2(g, bb);
    case 3: return nnls_rank3(g, bb);
    default: throw std::invalid_argument("closed forms exist for 1, 2 or 3 columns");
  }
}

SynthSpec spec(std::size_t m, std::size_t n, std::size_t rank, double noise, double sparsity,
               std::uint64_t seed) {
  SynthSpec s;
  s.m = m;
  s.n = n;
  s.true_rank = rank;
  s.noise_std = noise;
  s.sparsity = sparsity;
  s.seed = seed;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rank-k alternating NNLS factorization";

  py::register_exception<RankDeficientError>(m, "RankDeficientError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("fit_dense",
        [](const FArray& A, std::size_t rank, int k, int max_sweeps, std::optional<double> time_limit,
           std::optional<double> tol, std::uint64_t seed) {
          const DenseMatrix a = to_dense(A);
          const SolverConfig cfg = make_config(k, max_sweeps, time_limit, tol, seed);
          py::gil_scoped_release release;
          const FitResult r = fit(a, rank, cfg);
          py::gil_scoped_acquire acquire;
          return fit_result(r);
        },
        py::arg("A"), py::arg("rank"), py::arg("k") = 3, py::arg("max_sweeps") = 100,
        py::arg("time_limit") = py::none(), py::arg("tol") = py::none(), py::arg("seed") = 0);

  m.def("fit_csr",
        [](std::size_t rows, std::size_t cols, const Index& indptr, const Index& indices,
           const Vec& data, std::size_t rank, int k, int max_sweeps,
           std::optional<double> time_limit, std::optional<double> tol, std::uint64_t seed) {
          const SparseMatrixCSR a = to_csr(rows, cols, indptr, indices, data);
          const SolverConfig cfg = make_config(k, max_sweeps, time_limit, tol, seed);
          py::gil_scoped_release release;
          const FitResult r = fit(a, rank, cfg);
          py::gil_scoped_acquire acquire;
          return fit_result(r);
        },
        py::arg("rows"), py::arg("cols"), py::arg("indptr"), py::arg("indices"), py::arg("data"),
        py::arg("rank"), py::arg("k") = 3, py::arg("max_sweeps") = 100,
        py::arg("time_limit") = py::none(), py::arg("tol") = py::none(), py::arg("seed") = 0);

  m.def("nnls", [](const FArray& G, const Vec& b) {
    const NnlsSolution s = nnls_dispatch(G, b);
    return py::make_tuple(py::array_t<double>(s.y.size(), s.y.data()), s.kkt_residual);
  }, py::arg("G"), py::arg("b"));

  m.def("nnls_oracle", [](const FArray& G, const Vec& b) {
    const NnlsSolution s = nnls_oracle(to_dense(G), to_vector(b));
    return py::array_t<double>(s.y.size(), s.y.data());
  }, py::arg("G"), py::arg("b"));

  m.def("relative_residual_dense", [](const FArray& A, const FArray& U, const FArray& V) {
    return relative_residual(to_dense(A), to_dense(U), to_dense(V));
  });
  m.def("relative_residual_csr",
        [](std::size_t rows, std::size_t cols, const Index& indptr, const Index& indices,
           const Vec& data, const FArray& U, const FArray& V) {
          return relative_residual(to_csr(rows, cols, indptr, indices, data), to_dense(U),
                                   to_dense(V));
        });

  m.def("gen_dense", [](std::size_t m_, std::size_t n, std::size_t rank, double noise,
                        std::uint64_t seed) {
    return to_numpy(gen_dense(spec(m_, n, rank, noise, 0.0, seed)));
  }, py::arg("m"), py::arg("n"), py::arg("rank"), py::arg("noise_std") = 0.0, py::arg("seed") = 0);

  m.def("gen_sparse", [](std::size_t m_, std::size_t n, std::size_t rank, double noise,
                         double sparsity, std::uint64_t seed) {
    return csr_parts(gen_sparse(spec(m_, n, rank, noise, sparsity, seed)));
  }, py::arg("m"), py::arg("n"), py::arg("rank"), py::arg("noise_std") = 0.0,
     py::arg("sparsity") = 0.1, py::arg("seed") = 0);

  m.def("read_matrix_market", [](const std::string& path) -> py::object {
    const Matrix a = read_matrix_market(path);
    if (const auto* d = std::get_if<DenseMatrix>(&a)) return to_numpy(*d);
    return csr_parts(std::get<SparseMatrixCSR>(a));
  });
  m.def("write_matrix_market_dense", [](const FArray& A, const std::string& path) {
    write_matrix_market(to_dense(A), path);
  });
  m.def("write_matrix_market_csr",
        [](std::size_t rows, std::size_t cols, const Index& indptr, const Index& indices,
           const Vec& data, const std::string& path) {
          write_matrix_market(to_csr(rows, cols, indptr, indices, data), path);
        });

  m.def("flops_per_sweep", &flops_per_sweep, py::arg("m"), py::arg("n"), py::arg("r"));
}
