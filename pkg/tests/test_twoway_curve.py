import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from locclab.twoway import (
    STATIONARY_P,
    KrausPair,
    branch_error_A0,
    branch_error_A1,
    minimize_total_error,
    prob_A0,
    prob_B0_given_A0,
    read_curve_csv,
    sample_curve,
    scaled_det_delta_A0,
    total_error,
    total_error_derivative,
    write_curve_csv,
)

P_MIN = (6 - np.sqrt(12 / 5) - np.sqrt(20 / 3)) / 16
SEP = (3 - np.sqrt(5)) / 8


def golden_section(f, a, b, tol=1e-12):
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > tol:
        if f(c) < f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return 0.5 * (a + b)


def test_kraus_pair():
    for p in np.linspace(0, 1, 51):
        assert KrausPair(p).completeness_defect() <= 1e-12
    assert np.allclose(KrausPair(0.3).A0, np.diag([np.sqrt(0.65), np.sqrt(0.35)]))
    with pytest.raises(ValueError):
        KrausPair(1.2)


def test_branch_examples():
    assert branch_error_A0(0) == pytest.approx(1 / 16, abs=1e-15)
    assert branch_error_A0(1) == pytest.approx(1 / 8, abs=1e-15)
    assert branch_error_A1(0) == pytest.approx(1 / 16, abs=1e-15)
    assert branch_error_A1(1) == pytest.approx(0, abs=1e-15)
    for p in np.linspace(0, 0.8, 9):
        assert branch_error_A1(p) == pytest.approx((3 - 2 * p - np.sqrt(4 - 3 * p)) / 16, abs=1e-15)
        assert scaled_det_delta_A0(p) < 0
    assert prob_A0(0.4) == pytest.approx(0.6) and prob_B0_given_A0(0.4) == pytest.approx(3.8 / 4.8)


def test_total_error_values():
    assert abs(total_error(0) - 0.125) <= 1e-12 and abs(total_error(1) - 0.125) <= 1e-12
    assert abs(total_error(STATIONARY_P) - P_MIN) <= 1e-12
    for p in np.linspace(0, 1, 101):
        assert abs(total_error(p) - branch_error_A0(p) - branch_error_A1(p)) <= 1e-12
    with pytest.raises(ValueError):
        total_error(-0.1)


def test_minimum_against_golden_section_oracle():
    best = minimize_total_error(1e-10)
    p_gs = golden_section(total_error, 0.0, 1.0)
    assert abs(best.p - STATIONARY_P) <= 1e-9
    assert abs(best.p - p_gs) <= 1e-5  # golden section is limited by the flat minimum
    assert abs(best.p_err - P_MIN) <= 1e-12
    assert abs(total_error_derivative(STATIONARY_P)) <= 1e-15
    assert SEP < best.p_err < 0.125
    ref = minimize_scalar(total_error, bounds=(0, 1), method="bounded")
    assert best.p_err <= ref.fun + 1e-15
    with pytest.raises(ValueError):
        minimize_total_error(0)


def test_strictly_below_one_eighth():
    ps = np.linspace(0, 1, 10001)
    vals = np.array([total_error(p) for p in ps])
    assert np.all(vals <= 0.125 + 1e-15)
    inner = (ps >= 0.05) & (ps <= 0.95)
    assert np.all(0.125 - vals[inner] > 1e-6)


def test_csv_round_trip(tmp_path):
    pts = sample_curve(200)
    assert len(pts) == 201
    path = tmp_path / "curve.csv"
    write_curve_csv(pts, path)
    assert path.read_text().splitlines()[0] == "p,p_err"
    back = read_curve_csv(path)
    assert [(b.p, b.p_err) for b in back] == [(a.p, a.p_err) for a in pts]
    assert back[0].p_err == 0.125 and back[-1].p_err == 0.125
    with pytest.raises(ValueError):
        sample_curve(1)
