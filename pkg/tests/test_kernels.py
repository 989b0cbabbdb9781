import os
import subprocess
import sys

import numpy as np
import pytest

from ttdbf import _search, kernels

ext = pytest.importorskip("ttdbf._search_ext")

WIRINGS = (0, 1, 2, 3)


def _case(seed, M=5, Q=8):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((M, Q)) + 1j * rng.standard_normal((M, Q))
    freqs = 100e9 + (np.arange(M) - (M - 1) / 2) * 2e9
    return rng, psi, freqs


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("wiring", WIRINGS)
def test_objective_agrees(seed, wiring):
    rng, psi, freqs = _case(seed)
    idx = rng.integers(0, 40, 8).astype(np.int64)
    a = _search.delay_objective(psi, freqs, idx, 2e-12, wiring)
    b = ext.delay_objective(psi, freqs, idx, 2e-12, wiring)
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("wiring", WIRINGS)
def test_coordinate_descent_agrees(seed, wiring):
    rng, psi, freqs = _case(seed)
    start = rng.integers(0, 50, 8).astype(np.int64)
    i1, i2 = start.copy(), start.copy()
    s1, o1 = _search.coordinate_descent(psi, freqs, i1, 80e-12 / 49, 50, wiring, 1e-10, 100)
    s2, o2 = ext.coordinate_descent(psi, freqs, i2, 80e-12 / 49, 50, wiring, 1e-10, 100)
    assert np.array_equal(i1, i2) and s1 == s2
    assert o2 == pytest.approx(o1, rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("wiring", WIRINGS)
def test_chain_optimum_agrees(seed, wiring):
    rng, psi, freqs = _case(seed)
    i1 = np.zeros(8, np.int64)
    i2 = i1.copy()
    o1 = _search.chain_optimum(psi, freqs, i1, 80e-12 / 49, 50, wiring)
    o2 = ext.chain_optimum(psi, freqs, i2, 80e-12 / 49, 50, wiring)
    assert np.array_equal(i1, i2)
    assert o2 == pytest.approx(o1, rel=1e-10)


def test_chain_optimum_beats_descent():
    for seed in range(10):
        rng, psi, freqs = _case(seed)
        i1 = np.zeros(8, np.int64)
        i2 = i1.copy()
        best = kernels.chain_optimum(psi, freqs, i1, 80e-12 / 49, 50, 1)
        cd = kernels.coordinate_descent(psi, freqs, i2, 80e-12 / 49, 50, 1, 1e-10, 200)[1]
        assert best >= cd - 1e-9


def test_pure_python_switch():
    env = dict(os.environ, TTDBF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import ttdbf; print(ttdbf.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND == "cython"
