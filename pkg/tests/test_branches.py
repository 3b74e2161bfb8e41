import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import hamilton, random_units
from slicecalc import SlicePoint, branch_psi, example_phi, lacunary_star, psi_phi, psi_s, unit_structure
from slicecalc.branches import (CUTS, StemValue, cut_family, lacunary_boundary_function, lacunary_partial_sum,
                                lacunary_tail, psi_stem, ray_cut, slice_product, three_part_cut)
from slicecalc.errors import BranchCutError, DimensionError, DivergenceError, DomainError, InvalidInputError

svals = st.floats(0.05, 1.0)
zre = st.floats(-3, 3)


def qvec(c, J, one):
    return c.real * one + c.imag * (J.mat @ one)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(CUTS)), svals, zre, zre)
def test_psi_s_squares_to_2z_minus_i(kind, s, x, y):
    cut = cut_family(kind)(s)
    z = complex(x, y)
    if cut.distance(np.array([z]))[0] < 1e-6:
        return
    v = psi_s(z, cut)[0]
    assert abs(v * v - (2 * z - 1j)) <= 1e-12 * max(1.0, abs(z))


@pytest.mark.parametrize("kind", sorted(CUTS))
def test_seed_is_positive_root(kind):
    cut = cut_family(kind)(0.5)
    t = np.array([0.1, 1.0, 3.0])
    assert np.allclose(psi_s(0.5j + t, cut), np.sqrt(2 * t))
    assert psi_s(2 + 0.5j, cut)[0] == pytest.approx(2.0)


@pytest.mark.parametrize("kind,s", [("ray", 0.0), ("ray", 0.7), ("three-part", 0.3), ("three-part", 1.0)])
def test_psi_s_is_holomorphic_with_derivative_one_over_psi(kind, s, rng):
    cut = cut_family(kind)(s)
    for _ in range(30):
        z = complex(*rng.uniform(-2, 2, 2))
        if cut.distance(np.array([z]))[0] < 1e-2:
            continue
        h = 1e-6
        dz = (psi_s(z + h, cut)[0] - psi_s(z - h, cut)[0]) / (2 * h)
        dy = (psi_s(z + 1j * h, cut)[0] - psi_s(z - 1j * h, cut)[0]) / (2 * h)
        v = psi_s(z, cut)[0]
        assert abs(dz - 1 / v) < 1e-6
        assert abs(dy - 1j * dz) < 1e-6  # Cauchy-Riemann


def test_jump_only_across_the_cut():
    cut = ray_cut(0.5)  # points straight up from i/2
    for y in (0.8, 1.5, 4.0):
        left, right = psi_s([-1e-9 + 1j * y, 1e-9 + 1j * y], cut)
        assert left == pytest.approx(-right, abs=1e-6)
    # an arc around the branch point that stops short of the cut has no jumps,
    # and its two ends sit on opposite sheets
    th = np.linspace(np.pi / 2 + 0.05, 5 * np.pi / 2 - 0.05, 400)
    vals = psi_s(0.5j + 0.7 * np.exp(1j * th), cut)
    assert np.max(np.abs(np.diff(vals))) < 0.05
    assert vals[0] == pytest.approx(-vals[-1], abs=0.1)


def test_cut_geometry():
    c = three_part_cut(0.6)
    assert np.allclose(c.gamma([0.0, 1 / 3, 2 / 3]), [0.5j, 0.1j, -1 + 1j])
    assert c.gamma(0.8) == pytest.approx(-1 + 3j)
    assert ray_cut(0.0).gamma(0.5) == pytest.approx(0.5j + np.exp(1j * np.pi / 4))
    with pytest.raises(InvalidInputError):
        three_part_cut(0.0)
    with pytest.raises(InvalidInputError):
        ray_cut(1.5)
    with pytest.raises(InvalidInputError):
        cut_family("zigzag")
    with pytest.raises(BranchCutError):
        psi_s(0.5j + 0.5 * np.exp(1j * np.pi / 4), ray_cut(0.0))


def test_branch_psi_on_the_slices_of_plus_minus_j(H):
    J = unit_structure(H.element("j"), H)
    one = H.one()
    cut = ray_cut(1.0)
    z = 0.4 + 0.9j
    assert np.allclose(branch_psi(1.0, J, SlicePoint([z.real], [z.imag], J)), qvec(psi_s(z, cut)[0], J, one))
    # on -J the lower value Psi_s(x - yJ) is used
    lower = qvec(psi_s(np.conj(z), cut)[0], J, one)
    assert np.allclose(branch_psi(1.0, J, SlicePoint([z.real], [z.imag], -J)), lower)
    # same point written with the opposite structure
    assert np.allclose(branch_psi(1.0, J, SlicePoint([z.real], [-z.imag], J)), lower)


def test_cut_errors_and_tilde(H):
    J = unit_structure(H.element("j"), H)
    on_cut = SlicePoint([0.0], [1.5], J)
    with pytest.raises(BranchCutError):
        branch_psi(0.5, J, on_cut)
    with pytest.raises(BranchCutError):
        branch_psi(0.5, J, SlicePoint([0.0], [1.5], -J))
    v = branch_psi(0.5, J, SlicePoint([0.0], [1.5], -J), tilde=True)
    assert np.allclose(hamilton(v, v), 2 * np.array([0, 0, -1.5, 0]) - H.element("j"))
    with pytest.raises(DimensionError):
        branch_psi(0.5, J, SlicePoint([0.0, 0.0], [1.0, 1.0], J))


def test_star_square_is_2q_minus_j(H, rng):
    J = unit_structure(H.element("j"), H)
    for _ in range(20):
        x, y = rng.uniform(-2, 2), rng.uniform(0, 2)
        s = rng.uniform(0.1, 1.0)
        F = psi_stem(s, J, x, y)
        F = StemValue(F.F1[0], F.F2[0])
        S = slice_product(F, F, hamilton)
        for I in random_units(H, rng, 3):
            q = x * H.one() + y * (I.mat @ H.one())
            assert np.allclose(S.evaluate(I), 2 * q - H.element("j"), atol=1e-12)


def test_pointwise_square_holds_on_slice_j_only(H, rng):
    J = unit_structure(H.element("j"), H)
    phi = example_phi(J)
    p = SlicePoint([0.7], [0.8], J)
    v = psi_phi(p, J, phi)
    assert np.allclose(hamilton(v, v), 2 * (0.7 * H.one() + 0.8 * H.element("j")) - H.element("j"))
    off = 0
    for I in random_units(H, rng, 10):
        q = SlicePoint([0.7], [0.8], I)
        v = psi_phi(q, J, phi)
        off += not np.allclose(hamilton(v, v), 2 * q.element(H)[0] - H.element("j"), atol=1e-6)
    assert off > 0


def test_example_phi(H, rng):
    J = unit_structure(H.element("j"), H)
    phi = example_phi(J)
    assert phi(J) == 1.0 and phi(-J) == 1.0
    k = unit_structure(H.element("k"), H)
    assert phi(k) == pytest.approx(np.sqrt(2) / 2)
    assert all(0 < phi(I) <= 1 for I in random_units(H, rng, 50))


# -- lacunary series ---------------------------------------------------------

def test_lacunary_partial_sums_and_tail():
    w = 0.5
    exact = sum(w ** (2 ** j) for j in range(12))
    for N in range(6):
        val = lacunary_partial_sum(w, N).real
        assert val == pytest.approx(sum(w ** (2 ** j) for j in range(N + 1)), abs=0)
        assert exact - val <= lacunary_tail(w, N)
    assert lacunary_tail(1.0, 3) == np.inf


def test_lacunary_boundary_function(H):
    i = unit_structure(H.element("i"), H)
    p = SlicePoint([0.0], [0.0], i)
    a2 = H.element("k")
    q = SlicePoint([0.25], [0.25], i)
    g = lacunary_boundary_function(p, 1.0, (i,), a2, q, 8)
    c = lacunary_partial_sum(0.25 + 0.25j, 8)
    assert np.allclose(g.value, c.real * a2 + c.imag * (i.mat @ a2))
    assert g.ratio == pytest.approx(abs(0.25 + 0.25j))
    with pytest.raises(DivergenceError):
        lacunary_boundary_function(p, 1.0, (i,), a2, SlicePoint([1.0], [0.1], i), 8)
    with pytest.raises(DomainError):
        lacunary_boundary_function(p, 1.0, (i,), a2, SlicePoint([0.1], [0.1], unit_structure(H.element("j"), H)), 8)
    with pytest.raises(InvalidInputError):
        lacunary_boundary_function(p, 0.0, (i,), a2, q, 8)


def test_lacunary_star_on_and_off_slice(H, rng):
    I = unit_structure(H.element("i"), H)
    one = H.one()
    z = 0.3 + 0.7j
    v = lacunary_star(SlicePoint([z.real], [z.imag], I), I, 10)
    c = sum((z - 0.5j) ** (2 ** n) for n in range(11))
    assert np.allclose(v.value, qvec(c, I, one), atol=1e-14)
    for K in random_units(H, rng, 10):
        q = SlicePoint([0.2], [0.3], K)
        short, long = lacunary_star(q, I, 3), lacunary_star(q, I, 12)
        assert np.linalg.norm(short.value - long.value) <= short.tail_bound
    with pytest.raises(DivergenceError):
        lacunary_star(SlicePoint([0.0], [1.6], I), I, 3)
