"""Product vectors inside a linear subspace of C^dA (x) C^dB.

a (x) b lies in the span S iff Q (a (x) b) = 0 with Q the projector onto the
orthocomplement, i.e. iff the linear matrix M(a) = Q (a (x) I) is column-rank
deficient. With a = U (1, s) or a = U (1, s, t) for a random unitary U, random
square projections of M turn this into polynomial equations (vanishing
maximal minors). The single-variable case is a root-finding problem; the
two-variable case is reduced to one variable by a Sylvester resultant in t,
solved as a polynomial eigenvalue problem in s. Every candidate is refined by
alternating least squares and kept only if it passes both residual checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..qcore import Ket, as_dims, matricize

RANK1_TOL = 1e-9
SPAN_TOL = 1e-9
CANDIDATE_TOL = 1e-6
DUPLICATE_TOL = 1e-8


@dataclass(frozen=True)
class ProductSearchResult:
    states: tuple[Ket, ...]
    continuum: bool = False
    structure: str = "finite"
    residuals: tuple[tuple[float, float], ...] = ()
    unresolved: tuple[dict, ...] = field(default_factory=tuple)
    n_candidates: int = 0

    @property
    def count(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class TwoDimClassification:
    kind: str  # "tensor-product-subspace" | "two" | "one" | "none"
    states: tuple[Ket, ...]
    orthogonal: bool | None
    search: ProductSearchResult


def _orthonormal_basis(basis, n: int) -> np.ndarray:
    cols = [b.amplitudes if isinstance(b, Ket) else np.asarray(b, dtype=complex).reshape(-1) for b in basis]
    if not cols:
        raise ValueError("empty basis")
    B = np.stack(cols, axis=1)
    if B.shape[0] != n:
        raise ValueError(f"basis vectors have length {B.shape[0]}, dims need {n}")
    u, sv, _ = np.linalg.svd(B, full_matrices=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise ValueError("basis vectors are linearly dependent")
    return u


def _tensor_structure(B: np.ndarray, dims) -> str | None:
    """'A-fixed' when span = a (x) V, 'B-fixed' when span = V (x) b (dim V >= 2)."""
    dA, dB = dims
    mats = [B[:, k].reshape(dA, dB) for k in range(B.shape[1])]
    if B.shape[1] < 2:
        return None
    h = np.concatenate(mats, axis=1)
    v = np.concatenate(mats, axis=0)
    sh = np.linalg.svd(h, compute_uv=False)
    sv = np.linalg.svd(v, compute_uv=False)
    if sh.size < 2 or sh[1] <= RANK1_TOL * sh[0]:
        return "A-fixed"
    if sv.size < 2 or sv[1] <= RANK1_TOL * sv[0]:
        return "B-fixed"
    return None


def _poly_coeffs_1d(fn, degree: int) -> np.ndarray:
    n = degree + 1
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([fn(x) for x in w])
    return np.fft.fft(vals) / n  # coefficient of s^i at index i


def _poly_coeffs_2d(fn, degree: int) -> np.ndarray:
    n = degree + 1
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([[fn(x, y) for y in w] for x in w])
    return np.fft.fft2(vals) / n**2  # C[i, j] multiplies s^i t^j


def _trim(c: np.ndarray, scale: float) -> np.ndarray:
    c = np.array(c)
    while c.size > 1 and abs(c[-1]) <= 1e-12 * scale:
        c = c[:-1]
    return c


def _pencil_roots(m0: np.ndarray, m1: np.ndarray, proj: np.ndarray) -> np.ndarray | None:
    """Roots s of det(proj^dag (m0 + s m1)); None when the determinant vanishes identically."""
    p0, p1 = proj.conj().T @ m0, proj.conj().T @ m1
    k = p0.shape[0]
    coeffs = _poly_coeffs_1d(lambda s: np.linalg.det(p0 + s * p1), k)
    scale = max(np.max(np.abs(coeffs)), 1e-300)
    ref = max(np.linalg.norm(p0, 2), np.linalg.norm(p1, 2)) ** k
    if scale <= 1e-11 * ref:
        return None
    coeffs = _trim(coeffs, scale)
    if coeffs.size == 1:
        return np.array([], dtype=complex)
    return np.roots(coeffs[::-1])


def _sylvester_blocks(c1: np.ndarray, c2: np.ndarray) -> list[np.ndarray]:
    """Coefficient matrices S_i (in s) of the Sylvester matrix w.r.t. t."""
    # a_j(s) = sum_i c[i, j] s^i ; trim t-degree per polynomial
    def t_degree(c):
        scale = np.max(np.abs(c))
        m = c.shape[1] - 1
        while m > 0 and np.max(np.abs(c[:, m])) <= 1e-12 * scale:
            m -= 1
        return m

    m1, m2 = t_degree(c1), t_degree(c2)
    size = m1 + m2
    deg_s = c1.shape[0] - 1
    blocks = [np.zeros((size, size), dtype=complex) for _ in range(deg_s + 1)]
    for r in range(m2):
        for j in range(m1 + 1):
            for i in range(deg_s + 1):
                blocks[i][r, r + (m1 - j)] = c1[i, j]
    for r in range(m1):
        for j in range(m2 + 1):
            for i in range(deg_s + 1):
                blocks[i][m2 + r, r + (m2 - j)] = c2[i, j]
    scale = max(np.max(np.abs(b)) for b in blocks)
    while len(blocks) > 1 and np.max(np.abs(blocks[-1])) <= 1e-12 * scale:
        blocks.pop()
    return blocks


def _polyeig(blocks: list[np.ndarray]) -> np.ndarray:
    """Finite eigenvalues of sum_i s^i S_i via companion linearisation."""
    deg = len(blocks) - 1
    k = blocks[0].shape[0]
    if k == 0:
        return np.array([], dtype=complex)
    if deg == 0:
        return np.array([], dtype=complex)
    a = np.zeros((deg * k, deg * k), dtype=complex)
    b = np.eye(deg * k, dtype=complex)
    for i in range(deg - 1):
        a[i * k:(i + 1) * k, (i + 1) * k:(i + 2) * k] = np.eye(k)
    for i in range(deg):
        a[(deg - 1) * k:, i * k:(i + 1) * k] = -blocks[i]
    b[(deg - 1) * k:, (deg - 1) * k:] = blocks[deg]
    vals = sla.eigvals(a, b)
    return vals[np.isfinite(vals) & (np.abs(vals) < 1e8)]


def _singular_blocks(blocks, rng) -> bool:
    for _ in range(3):
        s = complex(rng.normal(), rng.normal())
        m = sum(s**i * b for i, b in enumerate(blocks))
        sv = np.linalg.svd(m, compute_uv=False)
        if sv.size == 0 or sv[-1] > 1e-10 * max(sv[0], 1e-300):
            return False
    return True


def _rel_smin(m: np.ndarray) -> float:
    sv = np.linalg.svd(m, compute_uv=False)
    return float(sv[-1] / max(sv[0], 1e-300))


def _refine(Q: np.ndarray, a: np.ndarray, dA: int, dB: int, iters: int = 60):
    """Alternating least squares for min || Q (a (x) b) || over unit a, b."""
    a = a / np.linalg.norm(a)
    b = None
    for _ in range(iters):
        ma = Q @ np.kron(a.reshape(-1, 1), np.eye(dB))
        b = np.linalg.svd(ma)[2][-1].conj()
        mb = Q @ np.kron(np.eye(dA), b.reshape(-1, 1))
        a = np.linalg.svd(mb)[2][-1].conj()
        if np.linalg.norm(Q @ np.kron(a, b)) < 1e-15:
            break
    return a, b


def _verify(v: np.ndarray, B: np.ndarray, dims) -> tuple[np.ndarray, float, float]:
    """Project onto the span, normalise, and report (rank-1, span) residuals."""
    proj = B @ (B.conj().T @ v)
    proj = proj / np.linalg.norm(proj)
    # fix the global phase: largest entry real positive
    k = int(np.argmax(np.abs(proj)))
    proj = proj * np.exp(-1j * np.angle(proj[k]))
    sv = np.linalg.svd(matricize(proj, dims), compute_uv=False)
    rank1 = float(sv[1]) if sv.size > 1 else 0.0
    span_res = float(np.linalg.norm(v / np.linalg.norm(v) - B @ (B.conj().T @ (v / np.linalg.norm(v)))))
    return proj, rank1, span_res


def _candidates(Q: np.ndarray, dA: int, dB: int, rng) -> tuple[list[np.ndarray], bool]:
    """Candidate Alice vectors a with Q (a (x) I) rank deficient; flag for continua."""
    n = dA * dB
    U = np.linalg.qr(rng.normal(size=(dA, dA)) + 1j * rng.normal(size=(dA, dA)))[0]
    Ms = [Q @ np.kron(U[:, i].reshape(-1, 1), np.eye(dB)) for i in range(dA)]

    def proj():
        return rng.normal(size=(n, dB)) + 1j * rng.normal(size=(n, dB))

    out = []
    if dA == 2:
        roots = _pencil_roots(Ms[0], Ms[1], proj())
        if roots is None:
            return [], True
        for s in roots:
            out.append(U @ np.array([1.0, s]))
        return out, False
    if dA == 3:
        w1, w2 = proj(), proj()
        p1 = [w1.conj().T @ m for m in Ms]
        p2 = [w2.conj().T @ m for m in Ms]
        c1 = _poly_coeffs_2d(lambda s, t: np.linalg.det(p1[0] + s * p1[1] + t * p1[2]), dB)
        c2 = _poly_coeffs_2d(lambda s, t: np.linalg.det(p2[0] + s * p2[1] + t * p2[2]), dB)
        blocks = _sylvester_blocks(c1, c2)
        if _singular_blocks(blocks, rng):
            return [], True
        for s in _polyeig(blocks):
            base = Ms[0] + s * Ms[1]
            troots = _pencil_roots(base, Ms[2], proj())
            if troots is None:
                # every t works for this s: a line of product states
                return [], True
            for t in troots:
                out.append(U @ np.array([1.0, s, t]))
        return out, False
    raise NotImplementedError("product-state search supports min(dA, dB) <= 3")


def product_states_in_span(basis, dims, seed: int = 0) -> ProductSearchResult:
    """All product vectors (up to phase) in span(basis), or a continuum flag."""
    dims = as_dims(dims)
    if len(dims) != 2:
        raise ValueError("product_states_in_span works on bipartite spaces")
    dA, dB = dims
    n = dA * dB
    B = _orthonormal_basis(basis, n)
    r = B.shape[1]
    structure = _tensor_structure(B, dims)
    if structure is not None:
        return ProductSearchResult((), True, structure)
    if r == 1:
        proj, rank1, span_res = _verify(B[:, 0], B, dims)
        if rank1 <= RANK1_TOL:
            return ProductSearchResult((Ket(proj, dims),), residuals=((rank1, span_res),), n_candidates=1)
        return ProductSearchResult((), n_candidates=1)

    swap = dA > dB
    if swap:
        # work with the smaller factor as the parametrised one
        perm = np.arange(n).reshape(dA, dB).T.reshape(-1)
        Bw = B[perm, :]
        da, db = dB, dA
    else:
        Bw, da, db = B, dA, dB
    Q = np.eye(n) - Bw @ Bw.conj().T
    rng = np.random.default_rng(seed)
    cands, continuum = _candidates(Q, da, db, rng)
    if continuum:
        return ProductSearchResult((), True, "other")

    found, residuals, unresolved = [], [], []
    for a in cands:
        ma = Q @ np.kron(a.reshape(-1, 1), np.eye(db))
        smin = _rel_smin(ma)
        if smin > CANDIDATE_TOL:
            continue  # spurious root introduced by the random projection
        a_ref, b_ref = _refine(Q, a, da, db)
        v = np.kron(a_ref, b_ref)
        if swap:
            v = v.reshape(da, db).T.reshape(-1)
        proj, rank1, span_res = _verify(v, B, dims)
        if rank1 > RANK1_TOL or span_res > SPAN_TOL:
            unresolved.append({"candidate_smin": smin, "rank1_residual": rank1, "span_residual": span_res})
            continue
        if any(abs(np.vdot(f, proj)) > 1 - DUPLICATE_TOL for f in found):
            continue
        found.append(proj)
        residuals.append((rank1, span_res))
    states = tuple(Ket(v, dims) for v in found)
    return ProductSearchResult(states, False, "finite", tuple(residuals), tuple(unresolved), len(cands))


def product_basis_2d(v1, v2, dims, seed: int = 0) -> TwoDimClassification:
    """Classify the product vectors of a two-dimensional span."""
    res = product_states_in_span([v1, v2], dims, seed=seed)
    if res.continuum:
        if res.structure not in ("A-fixed", "B-fixed"):
            raise RuntimeError("a 2D span with a continuum of product states must be a tensor-product subspace")
        return TwoDimClassification("tensor-product-subspace", (), True, res)
    states = res.states
    if len(states) > 2:
        raise RuntimeError(f"found {len(states)} product states in a 2D span")
    kind = {0: "none", 1: "one", 2: "two"}[len(states)]
    orth = None
    if len(states) == 2:
        orth = abs(states[0].inner(states[1])) <= 1e-9
    return TwoDimClassification(kind, states, orth, res)
