"""Discrimination instances: weighted state pairs and the named examples."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qcore import (
    TAU_NORM,
    HermOp,
    Ket,
    as_dims,
    basis_ket,
    check_density,
    from_pairs,
    tensor,
    to_pairs,
)


@dataclass(frozen=True)
class Ensemble:
    items: tuple[tuple[float, HermOp], ...]

    def __post_init__(self):
        items = tuple((float(w), check_density(s)) for w, s in self.items)
        if not items:
            raise ValueError("empty ensemble")
        if any(w <= 0 for w, _ in items):
            raise ValueError("ensemble weights must be positive")
        if abs(sum(w for w, _ in items) - 1.0) > TAU_NORM:
            raise ValueError("ensemble weights must sum to 1")
        if len({s.dims for _, s in items}) != 1:
            raise ValueError("ensemble states live on different spaces")
        object.__setattr__(self, "items", items)


@dataclass(frozen=True)
class BinaryInstance:
    """Two hypotheses with priors.

    ``rho`` is the hypothesis counted positively in M = p_rho rho - p_sigma sigma.
    """

    p_rho: float
    rho: HermOp
    p_sigma: float
    sigma: HermOp

    def __post_init__(self):
        p_rho, p_sigma = float(self.p_rho), float(self.p_sigma)
        if min(p_rho, p_sigma) < 0 or abs(p_rho + p_sigma - 1.0) > TAU_NORM:
            raise ValueError(f"priors must be non-negative and sum to 1, got {p_rho}, {p_sigma}")
        check_density(self.rho)
        check_density(self.sigma)
        if self.rho.dims != self.sigma.dims:
            raise ValueError("rho and sigma must share dims")
        object.__setattr__(self, "p_rho", p_rho)
        object.__setattr__(self, "p_sigma", p_sigma)

    @property
    def dims(self):
        return self.rho.dims

    def with_priors(self, p_rho: float) -> "BinaryInstance":
        return BinaryInstance(p_rho, self.rho, 1.0 - p_rho, self.sigma)

    def to_json(self) -> str:
        return json.dumps(instance_to_dict(self))


def instance_to_dict(inst: BinaryInstance) -> dict:
    return {
        "dims": list(inst.dims),
        "p_rho": inst.p_rho,
        "rho": to_pairs(inst.rho.matrix),
        "p_sigma": inst.p_sigma,
        "sigma": to_pairs(inst.sigma.matrix),
    }


def instance_from_dict(data: dict) -> BinaryInstance:
    dims = as_dims(data["dims"])
    return BinaryInstance(
        float(data["p_rho"]),
        HermOp(from_pairs(data["rho"]), dims),
        float(data["p_sigma"]),
        HermOp(from_pairs(data["sigma"]), dims),
    )


def instance_from_json(text: str) -> BinaryInstance:
    return instance_from_dict(json.loads(text))


def discrimination_operator(inst: BinaryInstance) -> HermOp:
    return inst.p_rho * inst.rho - inst.p_sigma * inst.sigma


def mixture(kets, weights=None) -> HermOp:
    kets = list(kets)
    if weights is None:
        weights = [1.0 / len(kets)] * len(kets)
    out = weights[0] * kets[0].projector()
    for w, k in zip(weights[1:], kets[1:]):
        out = out + w * k.projector()
    return out


def _q(d: int, i: int) -> Ket:
    return basis_ket(d, i)


def _sup(d: int, i: int, j: int, sign: int) -> Ket:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    v[j] = sign
    return Ket.normalized(v, (d,))


DOMINO_LABELS = ("0", "1+", "1-", "2+", "2-", "3+", "3-", "4+", "4-")


def domino_states() -> list[Ket]:
    """The nine orthogonal 3x3 product states, in the order of DOMINO_LABELS."""
    out = [tensor(_q(3, 1), _q(3, 1))]
    pairs = []
    for s in (+1, -1):
        pairs.append(("1", s, tensor(_q(3, 0), _sup(3, 0, 1, s))))
        pairs.append(("2", s, tensor(_sup(3, 0, 1, s), _q(3, 2))))
        pairs.append(("3", s, tensor(_sup(3, 1, 2, s), _q(3, 0))))
        pairs.append(("4", s, tensor(_q(3, 2), _sup(3, 1, 2, s))))
    lookup = {(i, s): k for i, s, k in pairs}
    for i in "1234":
        out.append(lookup[(i, +1)])
        out.append(lookup[(i, -1)])
    return out


def domino_pair(i: int) -> tuple[Ket, Ket]:
    """(|psi_{i+}>, |psi_{i-}>) for i in 1..4."""
    if i not in (1, 2, 3, 4):
        raise ValueError("domino pair index must be 1..4")
    states = domino_states()
    return states[2 * i - 1], states[2 * i]


def domino_instance(p_rho: float = 0.5) -> BinaryInstance:
    states = domino_states()
    plus = [states[2 * i - 1] for i in range(1, 5)]
    minus = [states[0]] + [states[2 * i] for i in range(1, 5)]
    return BinaryInstance(p_rho, mixture(minus), 1.0 - p_rho, mixture(plus))


def koashi_instance() -> BinaryInstance:
    """Equiprobable |00><00| (rho slot) versus (|++><++| + |--><--|)/2 (sigma slot)."""
    zero = _q(2, 0)
    plus, minus = _sup(2, 0, 1, +1), _sup(2, 0, 1, -1)
    psi = tensor(zero, zero).projector()
    mixed = mixture([tensor(plus, plus), tensor(minus, minus)])
    return BinaryInstance(0.5, psi, 0.5, mixed)


def haar_ket(dims, rng: np.random.Generator) -> Ket:
    """Haar-random pure state; a test utility."""
    dims = as_dims(dims)
    n = int(np.prod(dims))
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return Ket.normalized(v, dims)


def random_density(dims, rng: np.random.Generator, rank: int | None = None) -> HermOp:
    dims = as_dims(dims)
    n = int(np.prod(dims))
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ g.conj().T
    return HermOp(m / np.trace(m).real, dims)
