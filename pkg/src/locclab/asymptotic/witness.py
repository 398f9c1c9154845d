"""Witness checking for perfect discrimination in the asymptotic LOCC closure.

If rho and sigma can be told apart perfectly by LOCC in the limit, then for
every x in [1/2, 1] there is a POVM {Pi_0, Pi_lambda} with Pi_0 separable,
every Pi_lambda a product operator, and

* ``pi0_kernel``:    tr(Pi_0 rho) = 0
* ``orthogonality``: tr(Pi_lambda rho Pi_lambda sigma) = 0 for every lambda
* ``balance``:       tr[Pi_lambda ((1 - x) rho - x sigma)] = 0 for every lambda

These are the zero-error limits of the finite-error constraints. The checker
verifies a supplied witness; it never decides separability on its own, so
Pi_0 must come with an explicit decomposition into product projectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from ..qcore import TAU_RECON, ProductOp, as_dims, as_matrix, check_density, from_pairs, to_pairs

CONDITION_TOL = 1e-9


@dataclass(frozen=True)
class SepWitness:
    """Explicit separable operator: sum_k c_k (rank-1 product projector)."""

    terms: tuple[tuple[float, ProductOp], ...]
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        terms = tuple((float(c), op) for c, op in self.terms)
        dims = as_dims(self.dims) if self.dims is not None else None
        for c, op in terms:
            if c <= 0:
                raise ValueError("separable decomposition needs positive coefficients")
            for f in op.factors:
                if np.linalg.matrix_rank(f, tol=1e-9 * max(1.0, np.abs(f).max())) != 1:
                    raise ValueError("separable decomposition terms must have rank-1 factors")
            if dims is None:
                dims = op.dims
            elif op.dims != dims:
                raise ValueError("inconsistent dims across separable terms")
        if dims is None:
            raise ValueError("an empty SepWitness needs explicit dims")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "dims", dims)

    @property
    def matrix(self) -> np.ndarray:
        n = prod(self.dims)
        out = np.zeros((n, n), dtype=complex)
        for c, op in self.terms:
            out += c * op.matrix
        return out

    @classmethod
    def zero(cls, dims) -> "SepWitness":
        return cls((), as_dims(dims))


@dataclass(frozen=True)
class TheoremOneWitness:
    pi0: SepWitness
    pis: tuple[ProductOp, ...]
    x: float

    def __post_init__(self):
        object.__setattr__(self, "pis", tuple(self.pis))
        dims = self.pi0.dims
        if not 0.5 <= self.x <= 1.0:
            raise ValueError(f"x must lie in [1/2, 1], got {self.x}")
        bound = prod(d * d for d in dims) + 1
        if len(self.pis) > bound:
            raise ValueError(f"{len(self.pis)} product elements exceed the cap {bound}")
        for p in self.pis:
            if p.dims != dims:
                raise ValueError("product element dims differ from pi0 dims")
        total = self.pi0.matrix + sum((p.matrix for p in self.pis), np.zeros_like(self.pi0.matrix))
        defect = np.max(np.abs(total - np.eye(total.shape[0])))
        if defect > TAU_RECON:
            raise ValueError(f"witness elements do not sum to the identity (defect {defect:.3g})")

    @property
    def dims(self):
        return self.pi0.dims


@dataclass(frozen=True)
class ConditionCheck:
    condition: str
    element: int | None
    value: float
    passed: bool


@dataclass(frozen=True)
class WitnessReport:
    x: float
    checks: tuple[ConditionCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_condition(self, name: str) -> list[ConditionCheck]:
        return [c for c in self.checks if c.condition == name]

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "passed": self.passed,
            "checks": [
                {"condition": c.condition, "element": c.element, "value": c.value, "passed": c.passed}
                for c in self.checks
            ],
        }


def check_product_element(pi, rho, sigma, x: float) -> tuple[float, float]:
    """(orthogonality value, balance value) for a single operator."""
    p, r, s = as_matrix(pi), as_matrix(rho), as_matrix(sigma)
    orth = float(np.real(np.trace(p @ r @ p @ s)))
    bal = float(np.real(np.trace(p @ ((1 - x) * r - x * s))))
    return orth, bal


def check_theorem1_witness(w: TheoremOneWitness, rho, sigma, tol: float = CONDITION_TOL) -> WitnessReport:
    rho = check_density(rho)
    sigma = check_density(sigma)
    if rho.dim != w.pi0.matrix.shape[0] or sigma.dim != rho.dim:
        raise ValueError("states and witness act on different spaces")
    overlap = float(np.real(np.trace(rho.matrix @ sigma.matrix)))
    if abs(overlap) > tol:
        raise ValueError(f"rho and sigma are not orthogonal (tr(rho sigma) = {overlap:.3g})")
    checks = []
    k = float(np.real(np.trace(w.pi0.matrix @ rho.matrix)))
    checks.append(ConditionCheck("pi0_kernel", None, k, abs(k) <= tol))
    for i, p in enumerate(w.pis):
        orth, bal = check_product_element(p, rho, sigma, w.x)
        checks.append(ConditionCheck("orthogonality", i, orth, abs(orth) <= tol))
        checks.append(ConditionCheck("balance", i, bal, abs(bal) <= tol))
    return WitnessReport(w.x, tuple(checks))


def witness_to_dict(w: TheoremOneWitness) -> dict:
    return {
        "dims": list(w.dims),
        "x": w.x,
        "pi0": [{"coefficient": c, "factors": [to_pairs(f) for f in op.factors]} for c, op in w.pi0.terms],
        "pis": [[to_pairs(f) for f in p.factors] for p in w.pis],
    }


def witness_from_dict(data: dict) -> TheoremOneWitness:
    dims = as_dims(data["dims"])
    terms = tuple(
        (t["coefficient"], ProductOp(tuple(from_pairs(f) for f in t["factors"]))) for t in data.get("pi0", [])
    )
    pis = tuple(ProductOp(tuple(from_pairs(f) for f in facs)) for facs in data["pis"])
    return TheoremOneWitness(SepWitness(terms, dims), pis, float(data["x"]))


def identity_witness(dims) -> TheoremOneWitness:
    """Pi_0 = 0, a single element Pi_1 = I, at x = 1/2."""
    dims = as_dims(dims)
    return TheoremOneWitness(SepWitness.zero(dims), (ProductOp.identity(dims),), 0.5)

