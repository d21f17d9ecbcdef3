"""Rank-k alternating NNLS factorization of nonnegative matrices, A ~ U V^T."""

from __future__ import annotations

import numpy as np

from . import _core
from ._core import ParseError, RankDeficientError, flops_per_sweep, nnls_oracle

__all__ = [
    "ParseError",
    "RankDeficientError",
    "fit",
    "nnls",
    "nnls_oracle",
    "gen_dense",
    "gen_sparse",
    "relative_residual",
    "read_matrix_market",
    "write_matrix_market",
    "flops_per_sweep",
]


def _is_sparse(a):
    return hasattr(a, "tocsr") and hasattr(a, "nnz")


def _csr_args(a):
    a = a.tocsr()
    a.sum_duplicates()
    a.sort_indices()
    return (a.shape[0], a.shape[1], a.indptr, a.indices, a.data)


def _to_scipy(parts):
    from scipy.sparse import csr_matrix

    shape, indptr, indices, data = parts
    return csr_matrix((data, indices, indptr), shape=shape)


def fit(A, rank, *, k=3, max_sweeps=100, time_limit=None, tol=None, seed=0):
    """Factorize A (numpy array or scipy sparse matrix) with U, V >= 0.

    Returns a dict with ``U`` (m x rank), ``V`` (n x rank), ``trace`` (one row
    of sweep, elapsed seconds, relative residual per sweep), ``stop_reason``
    and ``repair_events``.
    """
    opts = dict(rank=rank, k=k, max_sweeps=max_sweeps, time_limit=time_limit, tol=tol, seed=seed)
    if _is_sparse(A):
        return _core.fit_csr(*_csr_args(A), **opts)
    return _core.fit_dense(np.asarray(A, dtype=float), **opts)


def nnls(G, b):
    """Closed-form min ||G y - b|| over y >= 0 for G with 1 to 3 columns.

    Returns ``(y, kkt_residual)``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim == 1:
        G = G[:, None]
    return _core.nnls(G, np.asarray(b, dtype=float))


def gen_dense(m, n, rank, noise_std=0.0, seed=0):
    return _core.gen_dense(m, n, rank, noise_std, seed)


def gen_sparse(m, n, rank, noise_std=0.0, sparsity=0.1, seed=0):
    """Masked low-rank matrix as ``scipy.sparse.csr_matrix``."""
    return _to_scipy(_core.gen_sparse(m, n, rank, noise_std, sparsity, seed))


def relative_residual(A, U, V):
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if _is_sparse(A):
        return _core.relative_residual_csr(*_csr_args(A), U, V)
    return _core.relative_residual_dense(np.asarray(A, dtype=float), U, V)


def read_matrix_market(path):
    """Array files load as numpy arrays, coordinate files as CSR matrices."""
    out = _core.read_matrix_market(str(path))
    if isinstance(out, tuple):
        return _to_scipy(out)
    return out


def write_matrix_market(A, path):
    if _is_sparse(A):
        _core.write_matrix_market_csr(*_csr_args(A), str(path))
    else:
        _core.write_matrix_market_dense(np.asarray(A, dtype=float), str(path))
