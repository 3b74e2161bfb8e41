import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_units
from slicecalc import SliceFunctionData, algebra, represent, slice_inverse, two_slice_inverse, unit_structure
from slicecalc.algebra import complex_structure_cone
from slicecalc.errors import InvalidInputError, KernelViolationError, SingularPairError
from slicecalc.representation import (StructureTuple, is_hyper_solution, is_slice_solution, kernel_membership,
                                      l1_inverse, mp_inverse, mp_residuals, null_space, quaternion_kernel_dim,
                                      quaternion_kernel_membership, represent_set, zeta)


@st.composite
def low_rank(draw):
    m = draw(st.integers(1, 7))
    n = draw(st.integers(1, 7))
    r = draw(st.integers(0, min(m, n)))
    seed = draw(st.integers(0, 2**31))
    g = np.random.default_rng(seed)
    return g.normal(size=(m, r)) @ g.normal(size=(r, n)) if r else np.zeros((m, n))


@settings(max_examples=80, deadline=None)
@given(low_rank())
def test_mp_inverse_against_numpy(M):
    P = mp_inverse(M)
    assert max(mp_residuals(M, P)) <= 1e-9
    assert np.allclose(P, np.linalg.pinv(M, rcond=1e-10), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(low_rank())
def test_null_space(M):
    K = null_space(M)
    assert np.allclose(M @ K, 0, atol=1e-9)
    assert K.shape[1] == M.shape[1] - np.linalg.matrix_rank(M)


def test_empty_and_zero_matrices():
    assert mp_inverse(np.zeros((0, 3))).shape == (3, 0)
    assert np.array_equal(mp_inverse(np.zeros((2, 3))), np.zeros((3, 2)))


def test_zeta_shape(H):
    i = unit_structure(H.element("i"), H)
    assert zeta((i, -i, i)).shape == (12, 8)


def test_structure_tuple_flags(H):
    i = unit_structure(H.element("i"), H)
    j = unit_structure(H.element("j"), H)
    assert StructureTuple((i, j)).distinct_up_to_sign
    assert not StructureTuple((i, -i)).distinct_up_to_sign
    with pytest.raises(InvalidInputError):
        StructureTuple(())


def test_quaternion_kernel_closed_form(H, rng):
    units = [H.element("i"), H.element("j")]
    assert quaternion_kernel_dim(units) == 0
    assert quaternion_kernel_dim([H.element("k")] * 3) == 4
    assert quaternion_kernel_membership(H.element("k"), [H.element("k")])
    assert not quaternion_kernel_membership(H.element("i"), [H.element("k")])
    for J in random_units(H, rng, 5):
        assert slice_inverse((J,)).kernel_dim == 4
        assert slice_inverse((J, random_units(H, rng, 1)[0])).kernel_dim == 0


def test_two_slice_inverse_matches_closed_form(H, rng):
    for _ in range(10):
        J, K = random_units(H, rng, 2)
        assert np.allclose(two_slice_inverse(J, K), l1_inverse(J, K), atol=1e-10)
    J = random_units(H, rng, 1)[0]
    with pytest.raises(SingularPairError):
        two_slice_inverse(J, J)


def test_octonion_two_slice_closed_form(rng):
    O = algebra("octonion")
    J, K = random_units(O, rng, 2)
    assert np.allclose(two_slice_inverse(J, K), l1_inverse(J, K), atol=1e-10)


def test_represent_raises_outside_kernel_cone(H, rng):
    J = random_units(H, rng, 1)[0]
    I = random_units(H, rng, 1)[0]
    vals = np.ones((1, 4))
    with pytest.raises(KernelViolationError):
        represent(vals, (J,), I)
    center, span = represent_set(vals, (J,), I)
    assert span.shape[1] > 0
    # on J itself the value is determined
    assert np.allclose(represent(vals, (J,), J), vals[0])


def test_slice_and_hyper_solutions(H, rng):
    i, j = unit_structure(H.element("i"), H), unit_structure(H.element("j"), H)
    sample = random_units(H, rng, 20)
    assert is_slice_solution((i, j))
    assert not is_slice_solution((i,))
    assert is_hyper_solution((i,), sample)
    assert not is_hyper_solution((i, j), sample)
    assert kernel_membership(i, (i,)) and not kernel_membership(j, (i,))


@pytest.mark.parametrize("name", ["quaternion", "octonion", "clifford:3"])
def test_representation_across_algebras(name, rng):
    spec = algebra(name)
    one = spec.one()
    c = rng.normal(size=spec.dim)
    f = SliceFunctionData.polynomial({(2,): c, (1,): one}, spec.dim)
    J, K = random_units(spec, rng, 2)
    for I in random_units(spec, rng, 5):
        x, y = rng.normal(size=(1, 1)), rng.normal(size=(1, 1))
        vals = np.stack([f.on_slice(J, x, y), f.on_slice(K, x, y)], axis=-2)
        assert np.allclose(represent(vals, (J, K), I), f.on_slice(I, x, y), atol=1e-9)


def test_representation_on_general_complex_structures(rng):
    cone = complex_structure_cone(2)
    e = np.array([1.0, 0.3, -0.2, 0.5])
    f = SliceFunctionData.polynomial({(3,): e, (1,): e[::-1].copy()}, 4)
    J = tuple(cone.sample(rng, 3))
    S = slice_inverse(J)
    x, y = rng.normal(size=(1, 1)), rng.normal(size=(1, 1))
    vals = np.stack([f.on_slice(T, x, y) for T in J], axis=-2)
    hits = 0
    for I in cone.sample(rng, 10):
        if S.is_slice_solution or kernel_membership(I, J):
            hits += 1
            assert np.allclose(represent(vals, J, I), f.on_slice(I, x, y), atol=1e-8)
    assert hits > 0


def test_zeta_plus_is_basis_conjugated_pseudoinverse(H, rng):
    J = tuple(random_units(H, rng, 3))
    S = slice_inverse(J)
    A = S.conjugated()
    assert max(mp_residuals(A, S.zeta_plus @ np.linalg.inv(S.d_block))) <= 1e-10
    assert np.allclose(S.zeta_plus @ S.zeta, np.eye(8) - S.residual_projector)


def test_apply_batches(H, rng):
    J = tuple(random_units(H, rng, 2))
    S = slice_inverse(J)
    v = rng.normal(size=(5, 2, 4))
    assert np.allclose(S.apply(v)[3], S.apply(v[3]))
