"""One-way LOCC discrimination of |00> against (|++><++| + |--><--|)/2.

Alice measures first with a rank-one sub-POVM {q0 |phi0><phi0|, q1 |phi1><phi1|}
(plus the sigma_z-mirrored pair), |phi> = cos(phi/2)|0> + sin(phi/2)|1>, and Bob
finishes with the optimal measurement on his conditional ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .discrim import lemma_error
from .ensembles import koashi_instance
from .qcore import basis_ket, trace_norm

CONSTRAINT_TOL = 1e-9
LABELS = ("computational-basis", "hadamard-basis", "tau-zero", "interior")

_ZERO = basis_ket(2, 0).amplitudes
_PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / np.sqrt(2)


@dataclass(frozen=True)
class AliceSubPovm:
    q0: float
    q1: float
    phi0: float
    phi1: float

    def __post_init__(self):
        if min(self.q0, self.q1) < -CONSTRAINT_TOL:
            raise ValueError("sub-POVM weights must be non-negative")
        if abs(self.q0 + self.q1 - 1.0) > CONSTRAINT_TOL:
            raise ValueError(f"q0 + q1 must equal 1, got {self.q0 + self.q1}")
        bal = self.q0 * np.cos(self.phi0) + self.q1 * np.cos(self.phi1)
        if abs(bal) > CONSTRAINT_TOL:
            raise ValueError(f"q0 cos(phi0) + q1 cos(phi1) must vanish, got {bal:.3g}")

    @classmethod
    def from_cosines(cls, q1: float, c0: float, c1: float) -> "AliceSubPovm":
        return cls(1.0 - q1, q1, float(np.arccos(np.clip(c0, -1, 1))), float(np.arccos(np.clip(c1, -1, 1))))

    def weight(self, lam: int) -> float:
        return (self.q0, self.q1)[lam]

    def angle(self, lam: int) -> float:
        return (self.phi0, self.phi1)[lam]

    def elements(self) -> list[np.ndarray]:
        """The four Alice POVM elements, mirrored pairs included."""
        sz = np.diag([1.0, -1.0])
        out = []
        for q, phi in ((self.q0, self.phi0), (self.q1, self.phi1)):
            v = np.array([np.cos(phi / 2), np.sin(phi / 2)])
            e = q * np.outer(v, v)
            out += [e, sz @ e @ sz]
        return out


class BranchPosteriors(NamedTuple):
    p_zero: float
    p_plus: float
    p_minus: float
    prob: float


@dataclass(frozen=True)
class OneWayResult:
    p_err: float
    extremum_label: str
    sub_povm: AliceSubPovm
    global_minimum: bool = False
    multiplier: float | None = None


def branch_posteriors(sp: AliceSubPovm, lam: int) -> BranchPosteriors:
    q, phi = sp.weight(lam), sp.angle(lam)
    c, s = np.cos(phi), np.sin(phi)
    return BranchPosteriors(q / 2 * (1 + c), q / 2 * (1 + s), q / 2 * (1 - s), q / 2 * (1 + c / 2))


def det_negative(cos_phi) -> np.ndarray | bool:
    """Regime predicate: Bob's branch problem has det(Delta) <= 0."""
    return (1 - np.asarray(cos_phi)) ** 2 <= 3


def _branch_error_lemma(q, c, s):
    """P(lambda) * P(err | lambda) via the pure-vs-mixed closed form; vectorised."""
    q, c, s = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (q, c, s)))
    prob = q / 2 * (1 + c / 2)
    safe = np.where(prob > 0, prob, 1.0)
    w0 = q / 2 * (1 + c) / (2 * safe)
    wp = q / 2 * (1 + s) / (4 * safe)
    wm = q / 2 * (1 - s) / (4 * safe)
    err = lemma_error(w0, _ZERO, wp, _PLUS, wm, _MINUS)
    return np.where(prob > 0, prob * err, 0.0)


def oneway_error(sp: AliceSubPovm) -> float:
    """Total error 2 * sum_lambda P(lambda) P(err | lambda)."""
    total = 0.0
    for lam in (0, 1):
        q, phi = sp.weight(lam), sp.angle(lam)
        total += 2 * float(_branch_error_lemma(q, np.cos(phi), np.sin(phi)))
    return total


def oneway_error_operator(sp: AliceSubPovm) -> float:
    """Same error computed by explicit operator algebra over all four outcomes."""
    inst = koashi_instance()
    a, b = inst.p_rho * inst.rho.matrix, inst.p_sigma * inst.sigma.matrix
    total = 0.0
    for e in sp.elements():
        k = np.kron(e, np.eye(2))
        # Bob's conditional (unnormalised) operators
        ra = _trace_out_first(k @ a)
        sb = _trace_out_first(k @ b)
        total += 0.5 * (np.trace(ra + sb).real - trace_norm(ra - sb))
    return float(total)


def _trace_out_first(m: np.ndarray) -> np.ndarray:
    m = m.reshape(2, 2, 2, 2)
    out = np.einsum("ijik->jk", m)
    return 0.5 * (out + out.conj().T)


def error_both_detneg(sp: AliceSubPovm) -> float:
    c = np.cos([sp.phi0, sp.phi1])
    live = np.array([sp.q0, sp.q1]) > 0
    if not np.all(det_negative(c[live])):
        raise ValueError(f"regime violated: need (1 - cos phi)^2 <= 3 on both branches, cos phi = {c}")
    return 0.5 * (1 - (sp.q0 * np.sqrt(1 + c[0]) + sp.q1 * np.sqrt(1 + c[1])) / np.sqrt(2))


def _mixed_objective(q1: float, c1: float) -> float:
    return 0.5 * (1 - q1 * (c1 / 2 + np.sqrt(1 + c1) / np.sqrt(2)))


def error_mixed_regime(sp: AliceSubPovm, check_regime: bool = True) -> float:
    """Error when branch 0 has det(Delta) > 0 and branch 1 has det(Delta) <= 0."""
    c0, c1 = np.cos(sp.phi0), np.cos(sp.phi1)
    if check_regime:
        if sp.q0 > 0 and det_negative(c0):
            raise ValueError(f"regime violated: branch 0 needs det(Delta) > 0, cos phi0 = {c0:.6g}")
        if sp.q1 > 0 and not det_negative(c1):
            raise ValueError(f"regime violated: branch 1 needs det(Delta) <= 0, cos phi1 = {c1:.6g}")
    return float(_mixed_objective(sp.q1, c1))


def _g(c):
    return c / 2 + np.sqrt(1 + c) / np.sqrt(2)


def _dg(c):
    return 0.5 + 1 / (2 * np.sqrt(2) * np.sqrt(1 + c))


def lagrangian_gradient(q1, phi0, phi1, tau) -> np.ndarray:
    c0, c1 = np.cos(phi0), np.cos(phi1)
    return np.array([
        tau * (1 - q1) * np.sin(phi0),
        -np.sin(phi1) * q1 * (_dg(c1) - tau),
        _g(c1) - tau * (c1 - c0),
        -(q1 * c1 + (1 - q1) * c0),
    ])


def _stationary_candidates():
    """Case analysis of the stationarity system; yields (label, q1, c0, c1, tau)."""
    # tau = 0: g(c1) = 0 on (-1, 1] has the single root 1 - sqrt(3); then q1 = 0, c0 = 0.
    c1 = brentq(_g, -1 + 1e-15, 0.0)
    yield "tau-zero", 0.0, 0.0, c1, 0.0
    # tau != 0, q1 = 1: constraint forces c1 = 0, then tau = g'(0) and c0 = -g(0)/tau.
    tau = _dg(0.0)
    yield "hadamard-basis", 1.0, -_g(0.0) / tau, 0.0, tau
    # tau != 0, sin(phi0) = 0 with cos(phi0) < 0: c0 = -1.
    #   q1 sin(phi1) = 0: c1 = 1 forces q1 = 1/2 (c1 = -1 and q1 = 0 violate the constraint).
    yield "computational-basis", 0.5, -1.0, 1.0, _g(1.0) / 2.0
    #   otherwise tau = g'(c1) = g(c1) / (1 + c1): scan (-1, 1) for interior roots.
    h = lambda c: _dg(c) - _g(c) / (1 + c)
    grid = np.linspace(-1 + 1e-9, 1 - 1e-9, 4001)
    vals = h(grid)
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0 or fa * fb < 0:
            c = brentq(h, a, b)
            q1 = 1 / (1 + c)
            yield "interior", q1, -1.0, c, _dg(c)


def enumerate_extrema(tol: float = 1e-10) -> list[OneWayResult]:
    out = []
    for label, q1, c0, c1, tau in _stationary_candidates():
        phi0, phi1 = np.arccos(c0), np.arccos(c1)
        if label == "hadamard-basis":
            phi1 = np.pi / 2
        res = lagrangian_gradient(q1, phi0, phi1, tau)
        if np.max(np.abs(res)) > tol:
            raise RuntimeError(f"candidate {label} is not stationary (residual {res})")
        sp = AliceSubPovm(1 - q1, q1, float(phi0), float(phi1))
        out.append(OneWayResult(float(_mixed_objective(q1, c1)), label, sp, multiplier=float(tau)))
    out.sort(key=lambda r: (r.p_err, LABELS.index(r.extremum_label)))
    best = out[0]
    out[0] = OneWayResult(best.p_err, best.extremum_label, best.sub_povm, True, best.multiplier)
    return out


def _label_for(c0: float, c1: float) -> str:
    if abs(abs(c0) - 1) < 1e-9 and abs(abs(c1) - 1) < 1e-9:
        return "computational-basis"
    if abs(c0) < 1e-9 and abs(c1) < 1e-9:
        return "hadamard-basis"
    return "interior"


def grid_oracle(n_q: int = 256, n_phi: int = 256, region: str = "all") -> OneWayResult:
    """Exhaustive minimum of the exact one-way error on a (q1, phi1) grid.

    q1 = k/n_q and phi1 = 2 pi j/n_phi, so doubling n refines the grid in
    place. q0 and cos(phi0) follow from the two completion constraints;
    grid points with |cos(phi0)| > 1 are infeasible and skipped. ``region``
    restricts to a det(Delta) regime: "all", "both-detneg" (both branches
    det <= 0) or "mixed" (branch 0 det > 0, branch 1 det <= 0).
    """
    if n_q < 2 or n_phi < 4:
        raise ValueError("grid too coarse")
    q1 = np.arange(n_q + 1) / n_q
    phi1 = 2 * np.pi * np.arange(n_phi) / n_phi
    Q1, PHI1 = np.meshgrid(q1, phi1, indexing="ij")
    C1 = np.cos(PHI1)
    S1 = np.sin(PHI1)
    Q0 = 1.0 - Q1
    with np.errstate(divide="ignore", invalid="ignore"):
        C0 = np.where(Q0 > 0, -Q1 * C1 / np.where(Q0 > 0, Q0, 1.0), 0.0)
    feasible = (np.abs(C0) <= 1.0) & ((Q0 > 0) | (np.abs(C1) < 1e-12))
    if region == "both-detneg":
        feasible &= det_negative(C0) & det_negative(C1)
    elif region == "mixed":
        feasible &= ~det_negative(C0) & det_negative(C1)
    elif region != "all":
        raise ValueError(f"unknown region {region!r}")
    C0c = np.clip(C0, -1.0, 1.0)
    S0 = np.sqrt(1.0 - C0c**2)
    err = 2 * (_branch_error_lemma(Q0, C0c, S0) + _branch_error_lemma(Q1, C1, S1))
    err = np.where(feasible, err, np.inf)
    k = int(np.argmin(err))
    i, j = np.unravel_index(k, err.shape)
    sp = AliceSubPovm(float(Q0[i, j]), float(Q1[i, j]), float(np.arccos(C0c[i, j])), float(PHI1[i, j]))
    return OneWayResult(float(err[i, j]), _label_for(C0c[i, j], C1[i, j]), sp)
