import warnings

import numpy as np
import pytest
import scipy.linalg

from ttdbf.linalg import (RankDeficiencyWarning, lowrank_apply, pinv, sylvester_hermitian,
                          sylvester_kron, sylvester_lowrank, sylvester_residual)


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _problem(rng, N=8, K=2):
    a = _crandn(rng, K, K)
    psi = a @ a.conj().T
    h = _crandn(rng, N, K)
    g = rng.uniform(0.1, 2.0, K)
    c = 0.3
    phi = (h * g) @ h.conj().T + c * np.eye(N)
    ups = _crandn(rng, K, N)
    return psi, h, g, c, phi, ups


@pytest.mark.parametrize("seed", range(5))
def test_lowrank_matches_kron_and_scipy(seed):
    rng = np.random.default_rng(seed)
    psi, h, g, c, phi, ups = _problem(rng)
    x = sylvester_lowrank(psi, h, g, c, ups)
    ref = sylvester_kron(psi, phi, ups)
    assert np.max(np.abs(x - ref)) <= 1e-9 * np.max(np.abs(ref))
    assert np.allclose(scipy.linalg.solve_sylvester(psi, phi, ups), x, atol=1e-10)
    assert sylvester_residual(psi, x, lambda y: lowrank_apply(y, h, g, c), ups) < 1e-12


def test_hermitian_solver():
    rng = np.random.default_rng(11)
    psi, h, g, c, phi, ups = _problem(rng, N=12, K=3)
    x = sylvester_hermitian(psi, phi, ups)
    assert np.allclose(psi @ x + x @ phi, ups)


def test_lowrank_apply():
    rng = np.random.default_rng(2)
    _, h, g, c, phi, ups = _problem(rng)
    assert np.allclose(lowrank_apply(ups, h, g, c), ups @ phi)


def test_lowrank_with_singular_psi():
    # the solver's left coefficient can lose rank when a user weight vanishes
    rng = np.random.default_rng(4)
    _, h, g, c, phi, ups = _problem(rng, N=6, K=3)
    v = _crandn(rng, 3, 1)
    psi = v @ v.conj().T
    x = sylvester_lowrank(psi, h, g, c, ups)
    assert np.allclose(psi @ x + x @ phi, ups)


def test_pinv_matches_numpy_and_warns():
    rng = np.random.default_rng(0)
    a = _crandn(rng, 5, 3)
    assert np.allclose(pinv(a), np.linalg.pinv(a))
    b = np.outer(_crandn(rng, 4), _crandn(rng, 3))
    with pytest.warns(RankDeficiencyWarning):
        pb = pinv(b)
    assert np.allclose(b @ pb @ b, b)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pinv(b, warn=False)
    assert np.all(pinv(np.zeros((2, 3))) == 0)
