"""Closed-form error curve of the two-round protocol with Alice's weak measurement.

These are the formulas as derived in the source analysis. The explicit operator
simulation in ``simulate`` does not reproduce them for 0 < p < 1 (it gives 1/8
throughout); see the README. The curve is reported as a closed-form curve, not
as an achieved two-way error.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize_scalar

STATIONARY_P = 8.0 / 15.0


@dataclass(frozen=True)
class KrausPair:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"measurement strength p must lie in [0, 1], got {self.p}")

    @property
    def A0(self) -> np.ndarray:
        return np.diag([np.sqrt((1 + self.p) / 2), np.sqrt((1 - self.p) / 2)])

    @property
    def A1(self) -> np.ndarray:
        return np.diag([np.sqrt((1 - self.p) / 2), np.sqrt((1 + self.p) / 2)])

    def completeness_defect(self) -> float:
        a0, a1 = self.A0, self.A1
        return float(np.max(np.abs(a0.conj().T @ a0 + a1.conj().T @ a1 - np.eye(2))))


@dataclass(frozen=True)
class CurvePoint:
    p: float
    p_err: float


def _check_p(p: float):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def prob_A0(p: float) -> float:
    return (2 + p) / 4


def prob_B0_given_A0(p: float) -> float:
    return (3 + 2 * p) / (2 * (2 + p))


def scaled_det_delta_A0(p: float) -> float:
    """P(B0)^2 det(Delta) at the (A0, B0) node, in the closed form of the derivation."""
    return -((1 - p) / (4 * (2 + p))) * ((3 + 4 * p) / (4 * (2 + p)))


def branch_error_A0(p: float) -> float:
    _check_p(p)
    if p == 1.0:
        return 1.0 / 8.0
    return (3 + 2 * p - np.sqrt(4 + 5 * p)) / 16


def branch_error_A1(p: float) -> float:
    _check_p(p)
    if p == 1.0:
        return 0.0
    return (3 - 2 * p - np.sqrt(4 - 3 * p)) / 16


def total_error(p: float) -> float:
    _check_p(p)
    if p in (0.0, 1.0):
        return 1.0 / 8.0
    return (6 - np.sqrt(4 - 3 * p) - np.sqrt(4 + 5 * p)) / 16


def total_error_derivative(p: float) -> float:
    return (3 / (2 * np.sqrt(4 - 3 * p)) - 5 / (2 * np.sqrt(4 + 5 * p))) / 16


def minimize_total_error(tol: float = 1e-10) -> CurvePoint:
    """Bounded minimisation over [0, 1], polished on the stationarity equation."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = minimize_scalar(total_error, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-8})
    p = float(res.x)
    # The curve is flat at its minimum; locate p from the derivative instead.
    lo, hi = max(p - 1e-2, 1e-12), min(p + 1e-2, 1 - 1e-12)
    if total_error_derivative(lo) < 0 < total_error_derivative(hi):
        p = brentq(total_error_derivative, lo, hi, xtol=min(tol, 1e-12), rtol=4 * np.finfo(float).eps)
    return CurvePoint(p, total_error(p))


def sample_curve(steps: int = 200) -> list[CurvePoint]:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    ps = np.linspace(0.0, 1.0, steps + 1)
    return [CurvePoint(float(p), total_error(float(p))) for p in ps]


def write_curve_csv(points, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "p_err"])
        for pt in points:
            w.writerow([f"{pt.p:.17g}", f"{pt.p_err:.17g}"])


def read_curve_csv(path) -> list[CurvePoint]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [CurvePoint(float(r["p"]), float(r["p_err"])) for r in rows]
