import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locclab.discrim import det_delta, pure_mixed_qubit_error
from locclab.oneway import (
    AliceSubPovm,
    branch_posteriors,
    det_negative,
    enumerate_extrema,
    error_both_detneg,
    error_mixed_regime,
    grid_oracle,
    lagrangian_gradient,
    oneway_error,
    oneway_error_operator,
)

HAD = 0.5 * (1 - 1 / np.sqrt(2))
K0 = np.array([1.0, 0.0])
KP, KM = np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, -1.0]) / np.sqrt(2)


def random_sub_povm(rng):
    """Feasible random sub-POVM: |cos phi0| <= 1 bounds cos phi1 given q1."""
    q1 = rng.uniform(0.01, 0.99)
    m = min(1.0, (1 - q1) / q1)
    c1 = rng.uniform(-m, m)
    c0 = np.clip(-q1 * c1 / (1 - q1), -1, 1)
    sign0, sign1 = rng.choice([1, -1], size=2)
    return AliceSubPovm(1 - q1, q1, float(sign0 * np.arccos(c0)) % (2 * np.pi),
                        float(sign1 * np.arccos(c1)) % (2 * np.pi))


def test_sub_povm_validation():
    with pytest.raises(ValueError):
        AliceSubPovm(0.5, 0.6, 0, 0)
    with pytest.raises(ValueError):
        AliceSubPovm(0.5, 0.5, 0.0, 0.0)
    sp = AliceSubPovm(0.5, 0.5, np.pi / 2, 3 * np.pi / 2)
    assert np.allclose(sum(sp.elements()), np.eye(2))


def test_branch_posterior_examples():
    sp = AliceSubPovm(0.5, 0.5, np.pi / 2, 3 * np.pi / 2)
    bp = branch_posteriors(sp, 0)
    assert np.allclose(bp, (0.25, 0.5, 0.0, 0.25))
    sp = AliceSubPovm(0.5, 0.5, 0.0, np.pi)
    bp = branch_posteriors(sp, 0)
    assert np.allclose(bp, (0.5, 0.25, 0.25, 0.375))
    total = 2 * sum(branch_posteriors(sp, lam).prob for lam in (0, 1))
    assert total == pytest.approx(1.0, abs=1e-15)


def test_hadamard_value():
    sp = AliceSubPovm(0.5, 0.5, np.pi / 2, 3 * np.pi / 2)
    assert abs(error_both_detneg(sp) - HAD) <= 1e-12
    d = 0.3
    sp = AliceSubPovm(0.5, 0.5, np.pi / 2 + d, 3 * np.pi / 2 + d)
    assert error_both_detneg(sp) > HAD + 1e-6


def test_both_detneg_lower_bound(rng):
    hits = 0
    for _ in range(3000):
        sp = random_sub_povm(rng)
        if not all(det_negative(np.cos([sp.phi0, sp.phi1]))):
            continue
        hits += 1
        assert error_both_detneg(sp) >= HAD - 1e-12
    assert hits > 100


def test_both_detneg_rejects_wrong_regime():
    with pytest.raises(ValueError):
        error_both_detneg(AliceSubPovm(0.5, 0.5, np.pi, 0.0))


def test_mixed_regime_examples():
    assert error_mixed_regime(AliceSubPovm(0.5, 0.5, np.pi, 0.0)) == pytest.approx(0.125, abs=1e-15)
    assert error_mixed_regime(AliceSubPovm(0.0, 1.0, np.pi, np.pi / 2)) == pytest.approx(HAD, abs=1e-15)
    val = error_mixed_regime(AliceSubPovm(1.0, 0.0, np.pi / 2, 0.0), check_regime=False)
    assert val == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        error_mixed_regime(AliceSubPovm(0.5, 0.5, np.pi / 2, 3 * np.pi / 2))


def lemma_assembly(sp):
    """2 * sum_lambda P(lambda) P(err|lambda) from the pure-vs-mixed closed form."""
    total = 0.0
    for lam in (0, 1):
        p0, pp, pm, prob = branch_posteriors(sp, lam)
        if prob <= 0:
            continue
        w = np.array([p0 / 2, pp / 4, pm / 4]) / prob
        total += 2 * prob * pure_mixed_qubit_error(w[0], K0, w[1], KP, w[2], KM).p_err
    return total


def test_closed_forms_match_lemma_assembly(rng):
    n_both = n_mixed = 0
    for _ in range(3000):
        sp = random_sub_povm(rng)
        c0, c1 = np.cos(sp.phi0), np.cos(sp.phi1)
        ref = lemma_assembly(sp)
        assert abs(oneway_error(sp) - ref) <= 1e-12
        if det_negative(c0) and det_negative(c1):
            n_both += 1
            assert abs(error_both_detneg(sp) - ref) <= 1e-12
        elif not det_negative(c0) and det_negative(c1):
            n_mixed += 1
            assert abs(error_mixed_regime(sp) - ref) <= 1e-12
    assert n_both > 50 and n_mixed > 50


def test_operator_route_agrees(rng):
    for _ in range(300):
        sp = random_sub_povm(rng)
        assert abs(oneway_error_operator(sp) - oneway_error(sp)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0, 2 * np.pi))
def test_regime_predicate_matches_det_delta(q, phi):
    c, s = np.cos(phi), np.sin(phi)
    P = q / 2 * (1 + c / 2)
    w = np.array([q / 2 * (1 + c) / 2, q / 2 * (1 + s) / 4, q / 2 * (1 - s) / 4]) / P
    d = det_delta(w[0], K0, w[1], KP, w[2], KM)
    if abs(d) > 1e-12:
        assert (d < 0) == bool(det_negative(c)) or abs((1 - c) ** 2 - 3) < 1e-9


def test_enumerate_extrema():
    ext = enumerate_extrema()
    vals = {r.extremum_label: r.p_err for r in ext}
    assert vals["computational-basis"] == 0.125
    assert abs(vals["hadamard-basis"] - HAD) <= 1e-12
    assert abs(vals["tau-zero"] - 0.5) <= 1e-12
    assert ext[0].global_minimum and ext[0].extremum_label == "computational-basis"
    assert sum(r.global_minimum for r in ext) == 1
    for r in ext:
        g = lagrangian_gradient(r.sub_povm.q1, r.sub_povm.phi0, r.sub_povm.phi1, r.multiplier)
        assert np.max(np.abs(g)) <= 1e-10


def test_grid_oracle():
    t = time.perf_counter()
    g = grid_oracle(256, 256)
    assert time.perf_counter() - t < 30
    assert abs(g.p_err - 0.125) <= 2e-4
    assert g.p_err >= 0.125 - 1e-12
    assert abs(grid_oracle(256, 256, region="both-detneg").p_err - HAD) <= 2e-4


def test_grid_gap_non_increasing_on_nested_grids():
    gaps = [grid_oracle(n, n).p_err - 0.125 for n in (64, 128, 256)]
    assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        grid_oracle(2, 2)
    with pytest.raises(ValueError):
        grid_oracle(64, 64, region="nowhere")
