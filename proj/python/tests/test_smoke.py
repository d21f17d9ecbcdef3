import numpy as np
import pytest

import arknls


def test_fit_recovers_low_rank_matrix():
    A = arknls.gen_dense(60, 40, 4, seed=1)
    res = arknls.fit(A, 4, max_sweeps=300, seed=2)
    assert res["U"].shape == (60, 4)
    assert res["V"].shape == (40, 4)
    assert (res["U"] >= 0).all() and (res["V"] >= 0).all()
    assert res["trace"].shape == (300, 3)
    assert res["stop_reason"] == "max_sweeps"
    direct = np.linalg.norm(A - res["U"] @ res["V"].T) / np.linalg.norm(A)
    assert direct < 1e-2
    assert arknls.relative_residual(A, res["U"], res["V"]) == pytest.approx(direct, rel=1e-6, abs=1e-7)


def test_sparse_input_matches_dense():
    S = arknls.gen_sparse(50, 30, 3, sparsity=0.3, seed=4)
    a = arknls.fit(S, 3, max_sweeps=20)
    b = arknls.fit(S.toarray(), 3, max_sweeps=20)
    np.testing.assert_allclose(a["trace"][:, 2], b["trace"][:, 2], rtol=1e-8)


def test_nnls_kernels():
    y, kkt = arknls.nnls(np.eye(3), [1.0, -2.0, 3.0])
    np.testing.assert_array_equal(y, [1.0, 0.0, 3.0])
    assert kkt == 0.0
    rng = np.random.default_rng(0)
    G = rng.uniform(size=(10, 3))
    b = rng.uniform(-1, 1, size=10)
    np.testing.assert_allclose(arknls.nnls(G, b)[0], arknls.nnls_oracle(G, b), atol=1e-10)
    with pytest.raises(arknls.RankDeficientError):
        arknls.nnls(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])


def test_matrix_market_round_trip(tmp_path):
    D = np.random.default_rng(1).uniform(size=(5, 4))
    arknls.write_matrix_market(D, tmp_path / "d.mtx")
    np.testing.assert_array_equal(arknls.read_matrix_market(tmp_path / "d.mtx"), D)
    S = arknls.gen_sparse(20, 10, 2, sparsity=0.2, seed=3)
    arknls.write_matrix_market(S, tmp_path / "s.mtx")
    back = arknls.read_matrix_market(tmp_path / "s.mtx")
    assert (back != S).nnz == 0
    (tmp_path / "bad.mtx").write_text("%%MatrixMarket matrix array complex general\n1 1\n1 0\n")
    with pytest.raises(arknls.ParseError):
        arknls.read_matrix_market(tmp_path / "bad.mtx")


def test_invalid_arguments():
    with pytest.raises(ValueError):
        arknls.fit(np.ones((5, 4)), 3, k=4)
    assert arknls.flops_per_sweep(1000, 1000, 0) == 0.0
