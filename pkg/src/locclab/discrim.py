"""Minimum-error discrimination of two hypotheses.

Helstrom error from the trace norm, the closed form for one pure qubit state
against a mixture of two pure qubit states, and the lower bound on the error
still to be made below a non-guessing node of a protocol tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensembles import BinaryInstance, discrimination_operator
from .qcore import Ket, ProductOp, as_matrix, eigh, trace_norm

DET_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ErrorReport:
    p_err: float
    norm_value: float
    strategy: dict = field(default_factory=dict)


def error_to_norm(p_err: float) -> float:
    if not -1e-15 <= p_err <= 0.5 + 1e-15:
        raise ValueError(f"error probability must lie in [0, 1/2], got {p_err}")
    return 1.0 - 2.0 * p_err


def norm_to_error(v: float) -> float:
    if not -1e-15 <= v <= 1.0 + 1e-15:
        raise ValueError(f"norm value must lie in [0, 1], got {v}")
    return 0.5 * (1.0 - v)


def helstrom_error(inst: BinaryInstance) -> ErrorReport:
    m = discrimination_operator(inst)
    nrm = trace_norm(m)
    es = eigh(m)
    n_pos = int(np.sum(es.eigenvalues > 0))
    p_err = 0.5 * (1.0 - nrm)
    return ErrorReport(
        p_err,
        nrm,
        {"measurement": "projector onto positive eigenspace of M", "positive_rank": n_pos},
    )


def _vec(psi) -> np.ndarray:
    v = psi.amplitudes if isinstance(psi, Ket) else np.asarray(psi, dtype=complex).reshape(-1)
    if v.size != 2:
        raise ValueError("pure_mixed_qubit_error works on single-qubit states only")
    return v / np.linalg.norm(v)


def _ov2(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def det_delta(p0, psi0, p1, psi1, p2, psi2):
    """Determinant of Delta = p0 psi0 - p1 psi1 - p2 psi2 from pairwise overlaps.

    Weights broadcast, so arrays of weights with fixed kets are accepted.
    """
    a, b, c = _vec(psi0), _vec(psi1), _vec(psi2)
    return (
        p1 * p2 * (1 - _ov2(b, c))
        - p0 * p1 * (1 - _ov2(a, b))
        - p0 * p2 * (1 - _ov2(a, c))
    )


def lemma_error(p0, psi0, p1, psi1, p2, psi2):
    """Minimum error for p0|psi0> against p1|psi1> + p2|psi2> on a qubit.

    Vectorised over the weights; see pure_mixed_qubit_error for the checked
    scalar entry point.
    """
    p0, p1, p2 = (np.asarray(x, dtype=float) for x in (p0, p1, p2))
    det = det_delta(p0, psi0, p1, psi1, p2, psi2)
    t = np.abs(p0 - p1 - p2)
    neg = det < -DET_ZERO_TOL
    rad = np.where(neg, t**2 - 4 * det, t**2)
    out = 0.5 - 0.5 * np.sqrt(np.clip(rad, 0.0, None))
    return out if out.ndim else float(out)


def pure_mixed_qubit_error(p0, psi0, p1, psi1, p2, psi2) -> ErrorReport:
    weights = np.array([p0, p1, p2], dtype=float)
    if np.any(weights < -1e-15) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be non-negative and sum to 1, got {weights}")
    det = float(det_delta(p0, psi0, p1, psi1, p2, psi2))
    p_err = float(lemma_error(p0, psi0, p1, psi1, p2, psi2))
    branch = "det<=0" if det < -DET_ZERO_TOL else "det>=0"
    return ErrorReport(p_err, 1.0 - 2.0 * p_err, {"branch": branch, "det_delta": det})


def nonguessing_error_bound(p_lambda, p_rho, p_sigma, pi, rho, sigma, tol: float = 1e-9) -> float:
    """Lower bound on the error accumulated below a node reached via ``pi``."""
    P = as_matrix(pi)
    r, s = as_matrix(rho), as_matrix(sigma)
    # ProductOp factors are validated PSD on construction
    if not isinstance(pi, ProductOp) and np.linalg.eigvalsh(0.5 * (P + P.conj().T))[0] < -tol:
        raise ValueError("node operator must be positive semidefinite")
    tr_r = float(np.trace(P @ r).real)
    tr_s = float(np.trace(P @ s).real)
    expected = p_rho * tr_r + p_sigma * tr_s
    if abs(expected - p_lambda) > tol:
        raise ValueError(f"p_lambda={p_lambda} inconsistent with node operator (expected {expected})")
    overlap = float(np.trace(P @ r @ P @ s).real)
    rad = p_lambda**2 - 4 * p_rho * p_sigma * overlap
    if rad < -tol:
        raise ValueError(f"negative radicand {rad:.3g}: inputs are inconsistent")
    return max(0.0, 0.5 * (p_lambda - np.sqrt(max(rad, 0.0))))
