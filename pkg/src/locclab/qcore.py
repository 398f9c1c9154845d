"""Dense linear algebra on small multipartite Hilbert spaces.

Operators and kets always carry their subsystem dimensions; the tensor
structure is never guessed from the matrix size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

TAU_NORM = 1e-10
TAU_HERM = 1e-12
TAU_RECON = 1e-10
TAU_PSD = 1e-10
SUPPORT_TOL = 1e-9

Dims = tuple[int, ...]


def as_dims(dims: Sequence[int] | int) -> Dims:
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise ValueError(f"subsystem dimensions must all be >= 2, got {dims}")
    return dims


def _total(dims: Dims) -> int:
    return int(np.prod(dims))


@dataclass(frozen=True)
class Ket:
    amplitudes: np.ndarray
    dims: Dims

    def __post_init__(self):
        dims = as_dims(self.dims)
        vec = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if vec.size != _total(dims):
            raise ValueError(f"ket of length {vec.size} does not match dims {dims}")
        if abs(np.linalg.norm(vec) - 1.0) > TAU_NORM:
            raise ValueError(f"ket is not normalized (norm {np.linalg.norm(vec):.3g})")
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, vec, dims) -> "Ket":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / nrm, dims)

    def projector(self) -> "HermOp":
        return HermOp(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def inner(self, other: "Ket") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True)
class HermOp:
    matrix: np.ndarray
    dims: Dims

    def __post_init__(self):
        dims = as_dims(self.dims)
        m = np.array(self.matrix, dtype=complex)
        n = _total(dims)
        if m.shape != (n, n):
            raise ValueError(f"matrix of shape {m.shape} does not match dims {dims}")
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym > TAU_HERM:
            raise ValueError(f"operator is not Hermitian (max |M - M^dag| = {asym:.3g})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, other: "HermOp") -> float:
        """tr(self @ other), real for Hermitian pairs."""
        return float(np.real(np.sum(self.matrix * other.matrix.T)))

    def _check(self, other: "HermOp"):
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other: "HermOp") -> "HermOp":
        self._check(other)
        return HermOp(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "HermOp") -> "HermOp":
        self._check(other)
        return HermOp(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar: float) -> "HermOp":
        return HermOp(float(scalar) * self.matrix, self.dims)

    __rmul__ = __mul__

    def __neg__(self) -> "HermOp":
        return HermOp(-self.matrix, self.dims)

    def conjugate_by(self, u: np.ndarray) -> "HermOp":
        """U M U^dag for a matrix U acting on the same space."""
        return HermOp(u @ self.matrix @ u.conj().T, self.dims)


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def identity(dims) -> HermOp:
    dims = as_dims(dims)
    return HermOp(np.eye(_total(dims)), dims)


def zero_op(dims) -> HermOp:
    dims = as_dims(dims)
    n = _total(dims)
    return HermOp(np.zeros((n, n)), dims)


def basis_ket(d: int, i: int) -> Ket:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return Ket(v, (d,))


def as_hermop(m, dims=None) -> HermOp:
    if isinstance(m, HermOp):
        return m
    m = np.asarray(m, dtype=complex)
    return HermOp(m, dims if dims is not None else (m.shape[0],))


def tensor(*items):
    """Tensor product of kets, or of Hermitian operators (not mixed)."""
    if not items:
        raise ValueError("tensor() needs at least one operand")
    if all(isinstance(x, Ket) for x in items):
        vec = reduce(np.kron, [x.amplitudes for x in items])
        return Ket(vec, sum((x.dims for x in items), ()))
    if all(isinstance(x, HermOp) for x in items):
        mat = reduce(np.kron, [x.matrix for x in items])
        return HermOp(mat, sum((x.dims for x in items), ()))
    raise TypeError("tensor() operands must be all Kets or all HermOps")


def eigh(m) -> EigenSystem:
    """Eigendecomposition with eigenvalues sorted in descending order."""
    m = as_hermop(m)
    vals, vecs = np.linalg.eigh(m.matrix)
    order = np.argsort(vals)[::-1]
    return EigenSystem(vals[order], vecs[:, order])


def trace_norm(m) -> float:
    m = as_hermop(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(m.matrix))))


def orthogonal_decompose(m) -> tuple[HermOp, HermOp]:
    """Split M = R - S with R, S >= 0 and RS = 0."""
    m = as_hermop(m)
    es = eigh(m)
    v, lam = es.eigenvectors, es.eigenvalues
    pos = np.clip(lam, 0.0, None)
    neg = np.clip(-lam, 0.0, None)
    r = (v * pos) @ v.conj().T
    s = (v * neg) @ v.conj().T
    return HermOp(r, m.dims), HermOp(s, m.dims)


def support(m, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the range of a positive operator.

    Eigenvalues above ``tol`` times the largest eigenvalue count towards the
    rank. Raises if the operator has an eigenvalue below ``-tol`` (relative).
    """
    m = as_hermop(m)
    es = eigh(m)
    lam = es.eigenvalues
    scale = max(np.max(np.abs(lam)), 0.0) if lam.size else 0.0
    if scale == 0.0:
        return np.zeros((m.dim, 0), dtype=complex)
    if lam[-1] < -tol * scale:
        raise ValueError(f"operator is not positive semidefinite (min eigenvalue {lam[-1]:.3g})")
    keep = lam > tol * scale
    return es.eigenvectors[:, keep]


def rank(m, tol: float = SUPPORT_TOL) -> int:
    m = as_hermop(m)
    lam = np.abs(np.linalg.eigvalsh(m.matrix))
    if lam.size == 0 or lam.max() == 0:
        return 0
    return int(np.sum(lam > tol * lam.max()))


def is_psd(m, tol: float = TAU_PSD) -> bool:
    m = as_hermop(m)
    return bool(np.linalg.eigvalsh(m.matrix)[0] >= -tol)


def check_density(m, tol: float = TAU_PSD) -> HermOp:
    m = as_hermop(m)
    if abs(m.trace() - 1.0) > TAU_NORM:
        raise ValueError(f"density operator must have unit trace, got {m.trace():.12g}")
    if not is_psd(m, tol):
        raise ValueError("density operator is not positive semidefinite")
    return m


@dataclass(frozen=True)
class ProductOp:
    """Tensor product of local positive operators, one per subsystem."""

    factors: tuple[np.ndarray, ...]
    _realized: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        facs = []
        for f in self.factors:
            f = np.array(f, dtype=complex)
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise ValueError("product factors must be square matrices")
            if np.max(np.abs(f - f.conj().T)) > TAU_HERM * max(1.0, np.max(np.abs(f))):
                raise ValueError("product factor is not Hermitian")
            f = 0.5 * (f + f.conj().T)
            if np.linalg.eigvalsh(f)[0] < -TAU_PSD * max(1.0, np.max(np.abs(f))):
                raise ValueError("product factor is not positive semidefinite")
            f.setflags(write=False)
            facs.append(f)
        if not facs:
            raise ValueError("ProductOp needs at least one factor")
        object.__setattr__(self, "factors", tuple(facs))
        object.__setattr__(self, "_realized", reduce(np.kron, facs))

    @property
    def dims(self) -> Dims:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def matrix(self) -> np.ndarray:
        return self._realized

    def to_hermop(self) -> HermOp:
        return HermOp(self._realized, self.dims)

    @classmethod
    def identity(cls, dims) -> "ProductOp":
        return cls(tuple(np.eye(d) for d in as_dims(dims)))


def as_matrix(op) -> np.ndarray:
    if isinstance(op, (HermOp, ProductOp)):
        return op.matrix
    return np.asarray(op, dtype=complex)


def matricize(vec, dims) -> np.ndarray:
    """Reshape a bipartite vector into its d_A x d_B coefficient matrix."""
    dims = as_dims(dims)
    if len(dims) != 2:
        raise ValueError("matricize needs a bipartite dims")
    v = vec.amplitudes if isinstance(vec, Ket) else np.asarray(vec)
    return np.asarray(v, dtype=complex).reshape(dims)


def schmidt_coefficients(vec, dims) -> np.ndarray:
    return np.linalg.svd(matricize(vec, dims), compute_uv=False)


def to_pairs(m) -> list:
    """Row-major nested lists of [re, im] pairs, for JSON."""
    arr = np.asarray(m, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def from_pairs(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]
