"""Full-rank operators with a two-dimensional eigenspace.

For a full-rank Hermitian M = R - S on a bipartite space whose positive (or
negative) eigenspace is two-dimensional, the trace norm is attained by LOCC
exactly when both eigenspaces have orthonormal product bases. A 2D space has
one precisely when it is a tensor-product subspace or contains two orthogonal
product vectors, and in that case a product basis of the complement can be
written down directly. The check builds that basis and verifies it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..qcore import Ket, as_hermop, eigh, matricize
from .product_states import TwoDimClassification, product_basis_2d, product_states_in_span

RANK_TOL = 1e-9
BASIS_TOL = 1e-9


@dataclass(frozen=True)
class LemmaCheck:
    holds: bool
    sign: str  # which eigenspace is two-dimensional: "positive" | "negative"
    classification: TwoDimClassification
    complement_basis: tuple[Ket, ...] = ()
    evidence: dict = field(default_factory=dict)


def _extend(*vs: np.ndarray) -> np.ndarray:
    """Unitary whose leading columns are the given orthonormal vectors."""
    d = vs[0].size
    q, _ = np.linalg.qr(np.column_stack(list(vs) + [np.eye(d, dtype=complex)]))
    q = q[:, :d]
    for k, v in enumerate(vs):
        q[:, k] = v
    return q


def _factor(vec, dims) -> tuple[np.ndarray, np.ndarray]:
    u, s, vh = np.linalg.svd(matricize(vec, dims))
    return u[:, 0], vh[0].conj()


def _product_onb_containing(pairs, dims) -> list[np.ndarray]:
    """Orthonormal product basis of the whole space containing the given orthonormal product vectors.

    ``pairs`` is a list of two (a, b) local factor pairs with a1 (x) b1 orthogonal
    to a2 (x) b2, so either a1 is orthogonal to a2, or a1 and a2 are parallel
    and b1 is orthogonal to b2.
    """
    dA, dB = dims
    (a1, b1), (a2, b2) = pairs
    out = []
    if abs(np.vdot(a1, a2)) <= BASIS_TOL:
        ua, ub1, ub2 = _extend(a1, a2), _extend(b1), _extend(b2)
        for j in range(dB):
            out.append(np.kron(a1, ub1[:, j]))
            out.append(np.kron(a2, ub2[:, j]))
        for k in range(2, dA):
            for j in range(dB):
                out.append(np.kron(ua[:, k], np.eye(dB)[:, j]))
    else:
        # a2 = e^{i theta} a1, so absorb the phase into b2
        phase = np.vdot(a1, a2) / abs(np.vdot(a1, a2))
        ua, ub = _extend(a1), _extend(b1, phase * b2)
        for k in range(dA):
            for j in range(dB):
                out.append(np.kron(ua[:, k], ub[:, j]))
    return out


def full_rank_lemma_check(m, dims=None, seed: int = 0) -> LemmaCheck:
    m = as_hermop(m, dims)
    dims = m.dims
    if len(dims) != 2:
        raise ValueError("full_rank_lemma_check needs a bipartite operator")
    es = eigh(m)
    vals, vecs = es.eigenvalues, es.eigenvectors
    scale = max(np.max(np.abs(vals)), 1e-300)
    if np.min(np.abs(vals)) <= RANK_TOL * scale:
        raise ValueError("operator is not full rank")
    pos, neg = vecs[:, vals > 0], vecs[:, vals < 0]
    if pos.shape[1] == 2:
        two, other, sign = pos, neg, "positive"
    elif neg.shape[1] == 2:
        two, other, sign = neg, pos, "negative"
    else:
        raise ValueError("neither eigenspace is two-dimensional")

    cls = product_basis_2d(two[:, 0], two[:, 1], dims, seed=seed)
    evidence = {"eigenvalues": vals.tolist()}
    if cls.kind == "tensor-product-subspace":
        # rotate the 2D space into an orthonormal basis a (x) v1, a (x) v2 (or v1 (x) b, v2 (x) b)
        if cls.search.structure == "A-fixed":
            a = _factor(two[:, 0], dims)[0]
            bs = np.linalg.qr(np.stack([a.conj() @ matricize(two[:, k], dims) for k in range(2)], axis=1))[0]
            pairs = [(a, bs[:, 0]), (a, bs[:, 1])]
        else:
            b = _factor(two[:, 0], dims)[1]
            as_ = np.linalg.qr(np.stack([matricize(two[:, k], dims) @ b.conj() for k in range(2)], axis=1))[0]
            pairs = [(as_[:, 0], b), (as_[:, 1], b)]
    elif cls.kind == "two" and cls.orthogonal:
        pairs = [_factor(s.amplitudes, dims) for s in cls.states]
    else:
        evidence["reason"] = f"two-dimensional eigenspace has {cls.kind} product states" + (
            ", not orthogonal" if cls.kind == "two" else "")
        return LemmaCheck(False, sign, cls, (), evidence)

    full = _product_onb_containing(pairs, dims)
    in_two = [v for v in full if np.linalg.norm(two.conj().T @ v) > 0.5]
    comp = [v for v in full if np.linalg.norm(two.conj().T @ v) <= 0.5]
    gram = np.array([[np.vdot(u, v) for v in comp] for u in comp])
    residual = max((np.linalg.norm(v - other @ (other.conj().T @ v)) for v in comp), default=0.0)
    rank1 = max((np.linalg.svd(matricize(v, dims), compute_uv=False)[1] for v in comp), default=0.0)
    ok = (len(in_two) == 2 and len(comp) == other.shape[1]
          and np.max(np.abs(gram - np.eye(len(comp)))) <= BASIS_TOL
          and residual <= BASIS_TOL and rank1 <= BASIS_TOL)
    evidence.update({"complement_span_residual": float(residual), "complement_rank1_residual": float(rank1),
                     "complement_gram_defect": float(np.max(np.abs(gram - np.eye(len(comp)))))})
    if other.shape[1] <= 4:
        res = product_states_in_span(list(other.T), dims, seed=seed)
        evidence["complement_search"] = {"continuum": res.continuum, "structure": res.structure,
                                         "count": res.count}
    basis = tuple(Ket.normalized(v, dims) for v in comp) if ok else ()
    return LemmaCheck(bool(ok), sign, cls, basis, evidence)
