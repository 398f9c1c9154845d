import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locclab.ensembles import koashi_instance, discrimination_operator, domino_instance, random_density
from locclab.qcore import (
    HermOp,
    Ket,
    ProductOp,
    as_dims,
    basis_ket,
    check_density,
    eigh,
    from_pairs,
    identity,
    orthogonal_decompose,
    rank,
    support,
    tensor,
    to_pairs,
    trace_norm,
    zero_op,
)

from conftest import random_herm

PLUS = Ket(np.array([1, 1]) / np.sqrt(2), (2,))
SZ = HermOp(np.diag([1.0, -1.0]), (2,))


def test_dims_validation():
    assert as_dims([2, 3]) == (2, 3)
    with pytest.raises(ValueError):
        as_dims([1, 2])


def test_ket_rejects_unnormalised():
    with pytest.raises(ValueError):
        Ket(np.array([1.0, 1.0]), (2,))
    k = Ket.normalized([1, 1j], (2,))
    assert np.isclose(np.linalg.norm(k.amplitudes), 1)


def test_hermop_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermOp(np.array([[0, 1], [0, 0]]), (2,))


def test_tensor_basis_and_identity():
    k = tensor(basis_ket(2, 0), basis_ket(2, 0))
    assert np.allclose(k.amplitudes, [1, 0, 0, 0]) and k.dims == (2, 2)
    assert np.allclose(tensor(identity(2), identity(2)).matrix, np.eye(4))
    assert np.allclose(tensor(basis_ket(2, 0), PLUS).amplitudes, np.array([1, 1, 0, 0]) / np.sqrt(2))
    with pytest.raises(TypeError):
        tensor(basis_ket(2, 0), identity(2))


def test_tensor_bilinear(rng):
    a, b, c = (HermOp(random_herm(2, rng), (2,)) for _ in range(3))
    lhs = tensor(a + b, c).matrix
    rhs = tensor(a, c).matrix + tensor(b, c).matrix
    assert np.allclose(lhs, rhs)
    assert np.allclose(tensor(2.5 * a, c).matrix, 2.5 * tensor(a, c).matrix)


def test_eigh_examples(rng):
    es = eigh(SZ)
    assert np.allclose(es.eigenvalues, [1, -1])
    assert np.allclose(eigh(PLUS.projector()).eigenvalues, [1, 0])
    h = random_herm(9, rng)
    es = eigh(HermOp(h, (3, 3)))
    assert np.linalg.norm(h - es.reconstruct(), 2) <= 1e-10
    assert np.all(np.diff(es.eigenvalues) <= 0)
    v = es.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(9))) <= 1e-12


def test_trace_norm_examples():
    assert trace_norm(zero_op((2, 2))) == 0
    m = 0.5 * tensor(basis_ket(2, 0), basis_ket(2, 0)).projector().matrix \
        - 0.5 * tensor(basis_ket(2, 1), basis_ket(2, 1)).projector().matrix
    assert np.isclose(trace_norm(HermOp(m, (2, 2))), 1.0, atol=1e-14)
    m = discrimination_operator(koashi_instance())
    assert abs(trace_norm(m) - (1 + np.sqrt(5)) / 4) <= 1e-12


def test_orthogonal_decompose_examples():
    r, s = orthogonal_decompose(SZ)
    assert np.allclose(r.matrix, np.diag([1, 0])) and np.allclose(s.matrix, np.diag([0, 1]))
    r, s = orthogonal_decompose(PLUS.projector())
    assert np.allclose(r.matrix, PLUS.projector().matrix) and np.allclose(s.matrix, 0)
    r, s = orthogonal_decompose(discrimination_operator(koashi_instance()))
    assert rank(r) == 1 and rank(s) == 2
    assert np.linalg.norm(r.matrix @ s.matrix, 2) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3, allow_nan=False))
def test_decompose_and_norm_properties(seed, alpha):
    rng = np.random.default_rng(seed)
    m = HermOp(random_herm(4, rng), (2, 2))
    r, s = orthogonal_decompose(m)
    assert np.linalg.norm((r - s).matrix - m.matrix, 2) <= 1e-10
    assert abs(m.trace() - (r.trace() - s.trace())) <= 1e-10
    assert np.linalg.eigvalsh(r.matrix)[0] >= -1e-10 and np.linalg.eigvalsh(s.matrix)[0] >= -1e-10
    assert abs(trace_norm(alpha * m) - abs(alpha) * trace_norm(m)) <= 1e-10 * max(1, trace_norm(m))
    assert abs(trace_norm(m) - (r.trace() + s.trace())) <= 1e-10


def test_support_examples():
    k = tensor(basis_ket(2, 0), basis_ket(2, 0))
    sup = support(k.projector())
    assert sup.shape[1] == 1 and abs(abs(np.vdot(sup[:, 0], k.amplitudes)) - 1) < 1e-12
    inst = domino_instance()
    assert support(inst.sigma).shape[1] == 4
    assert support(inst.rho).shape[1] == 5
    with pytest.raises(ValueError):
        support(SZ)


def test_support_annihilates_complement(rng):
    m = random_density((3, 3), rng, rank=4)
    sup = support(m)
    assert sup.shape[1] == 4
    comp = np.linalg.svd(np.eye(9) - sup @ sup.conj().T)[0][:, :5]
    assert np.linalg.norm(m.matrix @ comp) <= 1e-9
    for v in sup.T:
        assert np.linalg.norm(m.matrix @ v) > 1e-9


def test_product_op_and_density_checks():
    p = ProductOp((np.diag([1.0, 0.0]), np.eye(2)))
    assert np.allclose(p.matrix, np.kron(np.diag([1, 0]), np.eye(2)))
    with pytest.raises(ValueError):
        ProductOp((np.diag([1.0, -1.0]),))
    with pytest.raises(ValueError):
        check_density(identity(2))
    check_density(0.5 * identity(2))


def test_pairs_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(from_pairs(to_pairs(m)), m)
