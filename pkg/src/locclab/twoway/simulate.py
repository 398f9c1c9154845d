"""Operator-level simulation of the two-round protocol.

Alice applies {A0, A1}, Bob measures in the computational basis, and after
Bob's outcome 0 Alice performs the Helstrom measurement for her residual
pure-versus-mixed problem (closed form for the value, eigenprojectors of
Delta for the measurement). Every leaf error is then recomputed from traces
of the accumulated product operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..discrim import pure_mixed_qubit_error
from ..ensembles import koashi_instance
from .curve import KrausPair
from .protocol import ProtocolNode, child_of, measure, root_node, tree_error, with_children

_K0 = np.array([1.0, 0.0])
_K1 = np.array([0.0, 1.0])
_PLUS = (_K0 + _K1) / np.sqrt(2)
_MINUS = (_K0 - _K1) / np.sqrt(2)


@dataclass(frozen=True)
class SimulationResult:
    p: float
    tree: ProtocolNode
    total_error: float
    nodes: dict = field(default_factory=dict)


def _tracked_components():
    # the mixed hypothesis is kept as its two pure components
    return [
        (0.5, np.kron(_K0, _K0), "rho"),
        (0.25, np.kron(_PLUS, _PLUS), "sigma"),
        (0.25, np.kron(_MINUS, _MINUS), "sigma"),
    ]


def _alice_residual(a: np.ndarray, bob_outcome: int):
    """Alice's unnormalised pure components after (a (x) |b><b|)."""
    b = _K0 if bob_outcome == 0 else _K1
    out = []
    for w, v, hyp in _tracked_components():
        m = (np.kron(a, np.outer(b, b)) @ v).reshape(2, 2)
        alice = m[:, bob_outcome]
        nrm2 = float(np.vdot(alice, alice).real)
        out.append((w * nrm2, alice / np.sqrt(nrm2) if nrm2 > 0 else _K0.astype(complex), hyp))
    return out


def simulate_protocol(p: float) -> SimulationResult:
    kp = KrausPair(p)
    inst = koashi_instance()
    root = root_node(inst)
    bob = [np.outer(_K0, _K0), np.outer(_K1, _K1)]
    info = {}
    a_nodes = []
    for a_name, a_op in (("A0", kp.A0), ("A1", kp.A1)):
        na = child_of(inst, root, 0, a_op, a_name)
        na = measure(inst, na, 1, bob, ["B0", "B1"])
        kids = []
        for b_idx, nab in enumerate(na.children):
            if b_idx == 1:
                kids.append(nab)
                continue
            comps = _alice_residual(a_op, 0)
            total = sum(w for w, _, _ in comps)
            (w0, v0, _), (w1, v1, _), (w2, v2, _) = comps
            rep = pure_mixed_qubit_error(w0 / total, v0, w1 / total, v1, w2 / total, v2)
            delta = (w0 * np.outer(v0, v0.conj()) - w1 * np.outer(v1, v1.conj())
                     - w2 * np.outer(v2, v2.conj()))
            vals, vecs = np.linalg.eigh(0.5 * (delta + delta.conj().T))
            pos = vecs[:, vals > 0]
            e_rho = pos @ pos.conj().T
            e_sigma = np.eye(2) - e_rho
            nab = measure(inst, nab, 0, [e_rho, e_sigma], ["guess-rho", "guess-sigma"])
            info[(a_name, "B0")] = {
                "lemma_error": rep.p_err,
                "lemma_branch": rep.strategy["branch"],
                "det_delta": rep.strategy["det_delta"],
                "weighted_lemma_error": rep.p_err * nab.reach_prob,
                "prob_B0_given_A": nab.reach_prob / na.reach_prob if na.reach_prob > 0 else 0.0,
                "overlap_s_zero": abs(np.vdot(v1, _K0)) ** 2,
                "overlap_s_plus_s_minus": abs(np.vdot(v1, v2)) ** 2,
                "weights": (w0 / total, w1 / total, w2 / total),
            }
            kids.append(nab)
        a_nodes.append(with_children(na, kids))
    tree = with_children(root, a_nodes)
    return SimulationResult(p, tree, tree_error(tree), info)
