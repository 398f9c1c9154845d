"""Protocol trees for binary LOCC discrimination.

A node stores the accumulated local Kraus operator of every party along its
outcome sequence, so the node's POVM element is the product operator
K_1^dag K_1 (x) ... (x) K_N^dag K_N. Biases are always recomputed from the
instance rather than propagated, which keeps rewritten trees honest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import reduce
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import sqrtm

from ..ensembles import BinaryInstance
from ..qcore import ProductOp

REACH_EPS = 1e-15


@dataclass(frozen=True)
class ProtocolNode:
    label: tuple[str, ...]
    kraus: tuple[np.ndarray, ...]
    bias: tuple[float, float]  # (p_sigma|lambda, p_rho|lambda)
    reach_prob: float
    children: tuple["ProtocolNode", ...] = ()
    step: tuple[int, np.ndarray] | None = None

    @property
    def kind(self) -> str:
        return "non-guessing" if self.children else "guessing"

    @property
    def pi(self) -> ProductOp:
        return ProductOp(tuple(k.conj().T @ k for k in self.kraus))

    @property
    def guess_error(self) -> float:
        return self.reach_prob * min(self.bias)

    def walk(self) -> Iterator["ProtocolNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self) -> Iterator["ProtocolNode"]:
        return (n for n in self.walk() if not n.children)

    def find(self, *label: str) -> "ProtocolNode":
        for n in self.walk():
            if n.label == tuple(label):
                return n
        raise KeyError(label)


def _weights(inst: BinaryInstance, kraus: Sequence[np.ndarray]) -> tuple[float, float]:
    k = reduce(np.kron, kraus)
    w_rho = inst.p_rho * float(np.real(np.trace(k @ inst.rho.matrix @ k.conj().T)))
    w_sigma = inst.p_sigma * float(np.real(np.trace(k @ inst.sigma.matrix @ k.conj().T)))
    return max(w_sigma, 0.0), max(w_rho, 0.0)


def make_node(inst, label, kraus, step=None, children=(), fallback_bias=(0.5, 0.5)) -> ProtocolNode:
    kraus = tuple(np.asarray(k, dtype=complex) for k in kraus)
    w_sigma, w_rho = _weights(inst, kraus)
    reach = w_sigma + w_rho
    bias = (w_sigma / reach, w_rho / reach) if reach > REACH_EPS else tuple(fallback_bias)
    return ProtocolNode(tuple(label), kraus, bias, reach, tuple(children), step)


def root_node(inst: BinaryInstance) -> ProtocolNode:
    return make_node(inst, (), [np.eye(d) for d in inst.dims])


def child_of(inst, parent: ProtocolNode, party: int, local_kraus, name: str) -> ProtocolNode:
    local_kraus = np.asarray(local_kraus, dtype=complex)
    kraus = list(parent.kraus)
    kraus[party] = local_kraus @ kraus[party]
    return make_node(inst, parent.label + (name,), kraus, (party, local_kraus), fallback_bias=parent.bias)


def measure(inst, node: ProtocolNode, party: int, kraus_ops, names=None, check: float = 1e-10) -> ProtocolNode:
    """Attach a local measurement with the given Kraus operators to ``node``."""
    kraus_ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    tot = sum(k.conj().T @ k for k in kraus_ops)
    d = node.kraus[party].shape[0]
    if np.max(np.abs(tot - np.eye(d))) > check:
        raise ValueError("local Kraus operators are not complete")
    names = names or [str(i) for i in range(len(kraus_ops))]
    kids = tuple(child_of(inst, node, party, k, n) for k, n in zip(kraus_ops, names))
    return replace(node, children=kids)


def with_children(node: ProtocolNode, children) -> ProtocolNode:
    return replace(node, children=tuple(children))


def tree_error(node: ProtocolNode) -> float:
    return float(sum(leaf.guess_error for leaf in node.leaves()))


def is_bias_flip(parent_bias, child_bias) -> bool:
    (ps, pr), (cs, cr) = parent_bias, child_bias
    return (ps > pr and cr >= cs) or (pr > ps and cs >= cr)


def iter_bias_flips(tree: ProtocolNode) -> Iterator[tuple[ProtocolNode, int]]:
    for node in tree.walk():
        for i, c in enumerate(node.children):
            if c.reach_prob > REACH_EPS and is_bias_flip(node.bias, c.bias):
                yield node, i


def detect_bias_flips(tree: ProtocolNode) -> list[ProtocolNode]:
    return [parent.children[i] for parent, i in iter_bias_flips(tree)]


def _transplant(node: ProtocolNode, old_prefix: tuple, new_prefix: tuple, party: int, scale: float,
                step=None) -> ProtocolNode:
    """Copy a subtree under a new label prefix, scaling its party Kraus by sqrt(scale)."""
    root_factor = np.sqrt(scale)
    kraus = list(node.kraus)
    kraus[party] = root_factor * kraus[party]
    label = new_prefix + node.label[len(old_prefix):]
    kids = tuple(_transplant(c, old_prefix, new_prefix, party, scale) for c in node.children)
    return ProtocolNode(label, tuple(kraus), node.bias, node.reach_prob * scale, kids,
                        node.step if step is None else step)


def unbiasing_parameter(inst, parent: ProtocolNode, party: int, effect: np.ndarray) -> float:
    """t in (0, 1] such that (1 - t) I + t E leaves the bias at (1/2, 1/2)."""
    a_sigma, a_rho = _weights(inst, parent.kraus)
    kr = list(parent.kraus)
    root_e = sqrtm(effect)
    kr[party] = root_e @ kr[party]
    b_sigma, b_rho = _weights(inst, kr)
    da, db = a_sigma - a_rho, b_sigma - b_rho
    if da == 0:
        raise ValueError("parent is already unbiased; nothing to split")
    if da * db > 0:
        raise ValueError("child is not a bias-flipped node")
    return da / (da - db)


def split_to_unbiased(inst: BinaryInstance, parent: ProtocolNode, flip_child_index: int) -> ProtocolNode:
    """Replace the parent's two-outcome measurement {E, I - E} by two steps.

    The first step {E1, I - E1} with E1 = (1 - t) I + t E lands on an
    intermediate node of bias (1/2, 1/2); conditioned on E1 a second step
    completes E. The flipped child keeps its exact accumulated Kraus operator
    (hence its subtree), and the complementary outcome I - E is reproduced by
    two rescaled copies of the sibling subtree with weights t and 1 - t.
    """
    if len(parent.children) != 2:
        raise ValueError("split_to_unbiased needs a two-outcome measurement")
    idx = flip_child_index
    child, sib = parent.children[idx], parent.children[1 - idx]
    if child.step is None or sib.step is None or child.step[0] != sib.step[0]:
        raise ValueError("children must come from one local measurement")
    if not is_bias_flip(parent.bias, child.bias):
        raise ValueError("indicated child is not a bias-flipped node")
    party, k_c = child.step
    _, k_o = sib.step
    effect = k_c.conj().T @ k_c
    d = effect.shape[0]
    t = unbiasing_parameter(inst, parent, party, effect)
    name = child.label[-1]
    mid_label = parent.label + (name + "~",)

    if t >= 1.0 - 1e-14:
        mid = child_of(inst, parent, party, k_c, name + "~")
        inner = _transplant(child, child.label, mid_label + (name,), party, 1.0, step=(party, np.eye(d)))
        mid = with_children(mid, [inner])
        kids = [mid, sib] if idx == 0 else [sib, mid]
        return with_children(parent, kids)

    e1 = (1 - t) * np.eye(d) + t * effect
    k1 = sqrtm(e1)
    e1_inv_half = np.linalg.inv(k1)
    sib_name = sib.label[-1]
    mid = child_of(inst, parent, party, k1, name + "~")
    first_other = _transplant(sib, sib.label, parent.label + (sib_name,), party, t,
                              step=(party, np.sqrt(t) * k_o))
    grand = _transplant(child, child.label, mid_label + (name,), party, 1.0,
                        step=(party, k_c @ e1_inv_half))
    second_other = _transplant(sib, sib.label, mid_label + (sib_name,), party, 1 - t,
                               step=(party, np.sqrt(1 - t) * k_o @ e1_inv_half))
    mid = with_children(mid, [grand, second_other])
    kids = [mid, first_other] if idx == 0 else [first_other, mid]
    return with_children(parent, kids)


def check_tree(inst, node: ProtocolNode, tol: float = 1e-10) -> None:
    """Recompute reach and bias of every node from its Kraus operators."""
    for n in node.walk():
        w_sigma, w_rho = _weights(inst, n.kraus)
        if abs(w_sigma + w_rho - n.reach_prob) > tol:
            raise AssertionError(f"reach mismatch at {n.label}")
        if n.reach_prob > REACH_EPS and abs(w_rho / n.reach_prob - n.bias[1]) > tol:
            raise AssertionError(f"bias mismatch at {n.label}")
        if n.children:
            total = sum(c.reach_prob for c in n.children)
            if abs(total - n.reach_prob) > tol:
                raise AssertionError(f"children of {n.label} do not partition its reach")
