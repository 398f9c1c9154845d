import numpy as np
import pytest

from locclab.asymptotic import product_basis_2d, product_states_in_span
from locclab.ensembles import domino_instance, domino_pair
from locclab.qcore import Ket, matricize, support


def ket(*amps):
    v = np.kron(*[np.asarray(a, dtype=complex) for a in amps])
    return v / np.linalg.norm(v)


E0, E1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def pencil_oracle(v1, v2, dims):
    """Product vectors of span{v1, v2}: roots of det(M1 + z M2) (dA = dB = 2), plus z = infinity."""
    m1, m2 = matricize(v1, dims), matricize(v2, dims)
    c2 = np.linalg.det(m2)
    c0 = np.linalg.det(m1)
    c1 = np.linalg.det(m1 + m2) - c0 - c2
    out = []
    roots = np.roots([c2, c1, c0]) if abs(c2) > 1e-14 else (np.roots([c1, c0]) if abs(c1) > 1e-14 else [])
    for z in roots:
        v = v1 + z * v2
        out.append(v / np.linalg.norm(v))
    if abs(c2) <= 1e-14:
        out.append(v2 / np.linalg.norm(v2))
    return out


def same_up_to_phase(u, v, tol=1e-8):
    return abs(abs(np.vdot(u, v)) - 1) <= tol


def assert_states_match(found, expected, tol=1e-8):
    assert len(found) == len(expected)
    for e in expected:
        assert any(same_up_to_phase(f.amplitudes, e, tol) for f in found)


def check_invariants(res, basis, dims):
    b = np.linalg.qr(np.stack(basis, axis=1))[0]
    for k in res.states:
        sv = np.linalg.svd(matricize(k, dims), compute_uv=False)
        assert sv[1] <= 1e-9
        assert np.linalg.norm(k.amplitudes - b @ (b.conj().T @ k.amplitudes)) <= 1e-9
    for i, u in enumerate(res.states):
        for v in res.states[i + 1:]:
            assert abs(np.vdot(u.amplitudes, v.amplitudes)) < 1 - 1e-8


def test_domino_supp_sigma():
    sup = support(domino_instance().sigma)
    res = product_states_in_span(list(sup.T), (3, 3))
    plus = [domino_pair(i)[0].amplitudes for i in range(1, 5)]
    assert not res.continuum
    assert_states_match(res.states, plus)
    check_invariants(res, list(sup.T), (3, 3))


def test_two_basis_states():
    res = product_states_in_span([ket(E0, E0), ket(E1, E1)], (2, 2))
    assert_states_match(res.states, [ket(E0, E0), ket(E1, E1)])


def test_tensor_product_subspaces():
    res = product_states_in_span([ket(E0, E0), ket(E0, E1)], (2, 2))
    assert res.continuum and res.structure == "A-fixed" and res.count == 0
    res = product_states_in_span([ket(E0, E0), ket(E1, E0)], (2, 2))
    assert res.continuum and res.structure == "B-fixed"
    a = np.array([1, 1j, 2]) / np.sqrt(6)
    res = product_states_in_span([np.kron(a, [1.0, 0, 0]), np.kron(a, [0, 0, 1.0])], (3, 3))
    assert res.continuum and res.structure == "A-fixed"


def test_symmetric_subspace_is_a_continuum():
    sym = [ket(E0, E0), ket(E1, E1), (ket(E0, E1) + ket(E1, E0)) / np.sqrt(2)]
    res = product_states_in_span(sym, (2, 2))
    assert res.continuum and res.structure == "other"


def test_single_vector_span():
    res = product_states_in_span([ket(E0 + E1, E0)], (2, 2))
    assert res.count == 1
    res = product_states_in_span([(ket(E0, E0) + ket(E1, E1)) / np.sqrt(2)], (2, 2))
    assert res.count == 0


def test_input_validation():
    with pytest.raises(ValueError):
        product_states_in_span([ket(E0, E0), 2 * ket(E0, E0)], (2, 2))
    with pytest.raises(ValueError):
        product_states_in_span([ket(E0, E0)], (2, 3))
    with pytest.raises(NotImplementedError):
        rng = np.random.default_rng(0)
        vs = [rng.normal(size=16) + 1j * rng.normal(size=16) for _ in range(3)]
        product_states_in_span(vs, (4, 4))


def test_basis_2d_normal_form():
    beta = np.array([0.6, 0.8j])
    cls = product_basis_2d(ket(E0, E0), ket(E1, beta), (2, 2))
    assert cls.kind == "two" and cls.orthogonal is True
    assert_states_match(cls.states, [ket(E0, E0), ket(E1, beta)])


def test_basis_2d_non_orthogonal():
    alpha, beta = 0.7, -0.4 + 0.3j
    w = ket(np.array([alpha, 1]), np.array([beta, 1]))
    v1 = ket(E0, E0)
    v2 = w - np.vdot(v1, w) * v1
    cls = product_basis_2d(v1, v2 / np.linalg.norm(v2), (2, 2))
    assert cls.kind == "two" and cls.orthogonal is False
    assert_states_match(cls.states, [v1, w])


def test_basis_2d_tensor_subspace():
    cls = product_basis_2d(ket(E0, E0), ket(E0, E1), (2, 2))
    assert cls.kind == "tensor-product-subspace" and cls.orthogonal is True


def test_maximally_entangled_pair_against_oracle():
    v1 = (ket(E0, E0) + ket(E1, E1)) / np.sqrt(2)
    v2 = (ket(E0, E1) - ket(E1, E0)) / np.sqrt(2)
    cls = product_basis_2d(v1, v2, (2, 2))
    expected = pencil_oracle(v1, v2, (2, 2))
    assert cls.kind == {0: "none", 1: "one", 2: "two"}[len(expected)]
    assert_states_match(cls.states, expected)
    for r1, rs in cls.search.residuals:
        assert r1 <= 1e-9 and rs <= 1e-9


def test_one_product_state():
    # |00> plus a vector making the pencil determinant a perfect square
    v1 = ket(E0, E0)
    v2 = (ket(E0, E1) + ket(E1, E0)) / np.sqrt(2)
    cls = product_basis_2d(v1, v2, (2, 2))
    expected = pencil_oracle(v1, v2, (2, 2))
    assert cls.kind == "one"
    assert_states_match(cls.states, expected[:1])


def test_random_2d_subspaces_have_at_most_two(rng):
    for _ in range(1000):
        v1, v2 = (rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(2))
        cls = product_basis_2d(v1, v2, (2, 2), seed=int(rng.integers(1 << 30)))
        assert cls.kind != "tensor-product-subspace"
        assert len(cls.states) <= 2
        assert_states_match(cls.states, pencil_oracle(v1, v2, (2, 2)), tol=1e-7)


@pytest.mark.parametrize("dims", [(3, 3), (2, 3), (3, 2), (2, 4)])
def test_planted_product_states_are_recovered(rng, dims):
    dA, dB = dims
    r = 4 if dims == (3, 3) else 2
    for _ in range(20):
        planted = [ket(rng.normal(size=dA) + 1j * rng.normal(size=dA), rng.normal(size=dB) + 1j * rng.normal(size=dB))
                   for _ in range(r)]
        res = product_states_in_span(planted, dims, seed=int(rng.integers(1 << 30)))
        assert not res.continuum and not res.unresolved
        assert_states_match(res.states, planted, tol=1e-8)
        check_invariants(res, planted, dims)


def test_seed_independence():
    sup = support(domino_instance().sigma)
    counts = {product_states_in_span(list(sup.T), (3, 3), seed=s).count for s in range(10)}
    assert counts == {4}


def test_returns_kets():
    res = product_states_in_span([ket(E0, E0), ket(E1, E1)], (2, 2))
    assert all(isinstance(k, Ket) and k.dims == (2, 2) for k in res.states)
