import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttdbf.topology import (HFB, HYBRID, PARALLEL, SERIAL_B, SERIAL_F, TtdTopology,
                            branch_power_weights, cascade_output_powers, cumulative_delays,
                            effective_insertion_loss, raw_from_cumulative, splitter_equal_power,
                            splitter_equalized, ttd_phase_matrix)

PS = 1e-12


def test_zero_delays_stay_zero():
    for topo in (PARALLEL, SERIAL_F, SERIAL_B, HYBRID):
        assert np.all(cumulative_delays(np.zeros(8), topo) == 0)
    assert np.all(cumulative_delays(np.zeros((2, 8)), HFB) == 0)


def test_accumulation_examples():
    raw = np.array([1, 2, 3, 4]) * PS
    assert np.allclose(cumulative_delays(raw, SERIAL_F), np.array([1, 3, 6, 10]) * PS)
    assert np.allclose(cumulative_delays(raw, SERIAL_B), np.array([10, 9, 7, 4]) * PS)
    # prefix sums over {1, 2}, suffix sums over {3, 4}
    assert np.allclose(cumulative_delays(raw, HYBRID), np.array([1, 3, 7, 4]) * PS)
    assert np.allclose(cumulative_delays(raw, PARALLEL), raw)


def test_hfb_assigns_forward_then_backward():
    raw = np.tile([1.0, 2.0, 3.0, 4.0], (4, 1))
    out = cumulative_delays(raw, HFB)
    assert np.allclose(out[:2], [1, 3, 6, 10])
    assert np.allclose(out[2:], [10, 9, 7, 4])


def test_invalid_topologies_rejected():
    with pytest.raises(ValueError):
        cumulative_delays(np.zeros(5), HYBRID)
    with pytest.raises(ValueError):
        cumulative_delays(np.zeros((3, 4)), HFB)
    with pytest.raises(ValueError):
        TtdTopology.parse("zigzag")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=4, max_size=16).filter(lambda v: len(v) % 2 == 0))
def test_monotone_shapes(vals):
    raw = np.array(vals)
    h = len(raw) // 2
    assert np.all(np.diff(cumulative_delays(raw, SERIAL_F)) >= 0)
    assert np.all(np.diff(cumulative_delays(raw, SERIAL_B)) <= 0)
    hy = cumulative_delays(raw, HYBRID)
    assert np.all(np.diff(hy[:h]) >= 0) and np.all(np.diff(hy[h:]) <= 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 32).map(lambda q: 2 * (q // 2)), st.integers(0, 2 ** 32 - 1))
def test_unbounded_targets_realised_exactly(Q, seed):
    rng = np.random.default_rng(seed)
    inc = np.sort(rng.uniform(0, 1e-10, Q))
    assert np.allclose(cumulative_delays(raw_from_cumulative(inc, SERIAL_F), SERIAL_F), inc)
    dec = inc[::-1]
    assert np.allclose(cumulative_delays(raw_from_cumulative(dec, SERIAL_B), SERIAL_B), dec)
    uni = np.concatenate([np.sort(rng.uniform(0, 1e-10, Q // 2)),
                          np.sort(rng.uniform(0, 1e-10, Q // 2))[::-1]])
    raw = raw_from_cumulative(uni, HYBRID)
    assert np.all(raw >= 0)
    assert np.allclose(cumulative_delays(raw, HYBRID), uni)


def test_phase_matrix_structure():
    t = np.array([[0, 1, 2, 3], [3, 2, 1, 0]]) * 10 * PS
    T = ttd_phase_matrix(t, 100e9)
    assert T.shape == (8, 2)
    assert np.allclose(np.abs(T[:4, 0]), 1) and np.allclose(np.abs(T[4:, 1]), 1)
    assert np.all(T[4:, 0] == 0) and np.all(T[:4, 1] == 0)
    assert np.allclose(T[:4, 0], np.exp(-2j * np.pi * 100e9 * t[0]))


def test_equal_power_splitter():
    p = splitter_equal_power(4)
    assert np.allclose(p.nu, [1 / 4, 1 / 3, 1 / 2, 1])
    assert np.allclose(splitter_equal_power(1).nu, [1])
    assert np.allclose(cascade_output_powers(p.nu), 0.25)


def test_equalized_examples():
    p = splitter_equalized(2, 2.0)
    assert p.nu[0] == pytest.approx(1 / 3) and p.nu[1] == 1.0
    assert np.allclose(splitter_equalized(6, 1.0).nu, splitter_equal_power(6).nu)
    out = cascade_output_powers(splitter_equalized(4, 1.2).nu, 1.2)
    assert np.ptp(out) / out.mean() < 1e-12
    with pytest.raises(ValueError):
        splitter_equalized(4, 0.9)


@pytest.mark.parametrize("eta", [1.0, 1.3, 2.0, 3.0])
@pytest.mark.parametrize("Q", [2, 3, 16, 64])
def test_equalized_cascade(eta, Q):
    p = splitter_equalized(Q, eta)
    out = cascade_output_powers(p.nu, eta)
    assert np.max(np.abs(out - out[0])) <= 1e-12 * out[0]
    assert p.nu[-1] == 1.0
    assert np.all((p.nu > 0) & (p.nu <= 1))
    assert p.nu_cum.sum() == pytest.approx(1.0, abs=1e-12)
    # eta^q / (nu~_q Q) does not depend on q, and equals the effective loss
    ratio = eta ** np.arange(1, Q + 1) / (p.nu_cum * Q)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert ratio[0] == pytest.approx(effective_insertion_loss(Q, eta, SERIAL_F), rel=1e-12)


def test_effective_loss():
    assert effective_insertion_loss(8, 1.0, SERIAL_F) == 1.0
    assert effective_insertion_loss(2, 2.0, SERIAL_F) == pytest.approx(3.0)
    for eta in (1.01, 1.2, 2.0):
        s = effective_insertion_loss(16, eta, SERIAL_F)
        h = effective_insertion_loss(16, eta, HYBRID)
        p = effective_insertion_loss(16, eta, PARALLEL)
        assert s > h > p == eta
        assert effective_insertion_loss(16, eta, SERIAL_B) == s


def test_branch_weights():
    assert np.all(branch_power_weights(SERIAL_F, 2, 8, 1.0) == 1)
    assert np.all(branch_power_weights(PARALLEL, 2, 8, 1.5, equalized=False) == 1)
    eq = branch_power_weights(HYBRID, 1, 8, 1.2)
    assert np.allclose(eq, 1.2 / effective_insertion_loss(8, 1.2, HYBRID))
    ne = branch_power_weights(SERIAL_F, 1, 4, 2.0, equalized=False)[0]
    assert np.allclose(ne, [1, 0.5, 0.25, 0.125])
    hfb = branch_power_weights(HFB, 2, 4, 2.0, equalized=False)
    assert np.allclose(hfb[1], ne[::-1])
