import numpy as np
import pytest

from conftest import hamilton, hpow, random_units
from slicecalc import PlanePath, SliceFunctionData, SlicePoint, unit_structure
from slicecalc.errors import DimensionError, DomainError, InvalidInputError, InvalidStructureError, SingularPairError
from slicecalc.paths import (StemValue, eval_slice_function, is_path_slice, lift_path, representation_formula,
                             stem_from_two_slices, structures_containing)
from slicecalc.regions import Ball, SliceSetDescriptor


def qelem(H, x, y, I):
    return x * H.one() + y * (I.mat @ H.one())


def test_path_validation():
    with pytest.raises(InvalidInputError):
        PlanePath([0.0, 1.0], [1j, 2j])  # must start on the real axis
    with pytest.raises(InvalidInputError):
        PlanePath([0.0, 0.5], [0.0, 1j])
    g = PlanePath.segment([1 + 1j], m=5)
    assert g.in_upper and g.d == 1
    assert np.allclose(g.at(0.5), [[1 + 0.5j]])
    assert g.length() == pytest.approx(1.0)
    assert len(g.refined()) == 9


def test_path_json_round_trip():
    g = PlanePath.from_function(lambda s: [s, s * (1 + 1j)], m=7)
    h = PlanePath.from_json(g.to_json())
    assert np.allclose(g.samples, h.samples)
    with pytest.raises(InvalidInputError):
        PlanePath.from_json([[0.0]])


def test_lift_and_unlift(H):
    I = unit_structure(H.element("k"), H)
    g = PlanePath.segment([0.5 + 0.5j])
    L = lift_path(g, I)
    assert np.allclose(L.unlift().samples, g.samples)
    assert L.end() == SlicePoint([0.5], [0.5], I)


def test_structures_containing(H, rng):
    i = unit_structure(H.element("i"), H)
    j = unit_structure(H.element("j"), H)
    desc = SliceSetDescriptor.from_slices([(i, Ball([0.0], 2.0))], default=Ball([0.0], 0.5))
    g = PlanePath.segment([1 + 1j])
    assert structures_containing(desc, g, [i, j]) == [i]


def test_stem_from_two_slices_reconstructs_q_squared(H, rng):
    J, K = random_units(H, rng, 2)
    x, y = 0.3, -0.8
    f = lambda I: hpow(qelem(H, x, y, I), 2)
    S = stem_from_two_slices(f(J), f(K), J, K)
    for I in random_units(H, rng, 10):
        assert np.allclose(S.evaluate(I), f(I), atol=1e-12)
    with pytest.raises(SingularPairError):
        stem_from_two_slices(f(J), f(J), J, J)
    with pytest.raises(DimensionError):
        stem_from_two_slices(f(J), f(J)[:2], J, K)


def test_representation_formula_two_slices(H, rng):
    c = rng.normal(size=4)
    f = lambda I, x, y: hamilton(hpow(qelem(H, x, y, I), 3), c)
    for _ in range(10):
        J, K, I = random_units(H, rng, 3)
        x, y = rng.normal(size=2)
        got = representation_formula(f(J, x, y), f(K, x, y), J, K, I)
        assert np.allclose(got, f(I, x, y), atol=1e-10)


def test_stem_value_shapes():
    with pytest.raises(DimensionError):
        StemValue(np.zeros(4), np.zeros(2))
    s = StemValue.from_vector(np.arange(8.0))
    assert np.array_equal(s.vector, np.arange(8.0))


def test_eval_slice_function_with_domain(H):
    I = unit_structure(H.element("i"), H)
    F = lambda x, y: StemValue(x * H.one(), y * H.one())
    assert np.allclose(eval_slice_function(F, SlicePoint([1.0], [2.0], I)), [1, 2, 0, 0])
    with pytest.raises(DomainError):
        eval_slice_function(F, SlicePoint([3.0], [0.0], I), Ball([0.0], 1.0))


def test_polynomial_matches_hamilton(H, rng):
    c = rng.normal(size=4)
    f = SliceFunctionData.polynomial({(2,): c, (0,): H.element("j")}, 4, center=[0.5])
    for I in random_units(H, rng, 10):
        x, y = rng.normal(size=2)
        q = qelem(H, x - 0.5, y, I)
        assert np.allclose(f(SlicePoint([x], [y], I)), hamilton(hpow(q, 2), c) + H.element("j"))


def test_from_complex_and_stem_agree(H, rng):
    a = H.element("k")
    f1 = SliceFunctionData.from_complex(np.exp, a)
    f2 = SliceFunctionData.from_stem(
        lambda x, y: (np.outer(np.exp(x[:, 0]) * np.cos(y[:, 0]), a),
                      np.outer(np.exp(x[:, 0]) * np.sin(y[:, 0]), a)), 1, 4)
    for I in random_units(H, rng, 5):
        p = SlicePoint([0.3], [1.1], I)
        assert np.allclose(f1(p), f2(p))


def test_from_algebra(H, rng):
    f = SliceFunctionData.from_algebra(lambda q: hpow(q, 2), H)
    I = random_units(H, rng, 1)[0]
    assert np.allclose(f(SlicePoint([0.2], [0.7], I)), hpow(qelem(H, 0.2, 0.7, I), 2))


def test_cr_residual_and_validate(H, rng):
    f = SliceFunctionData.polynomial({(3,): H.one()}, 4)
    units = random_units(H, rng, 5)
    x, y = rng.normal(size=(20, 1)), rng.normal(size=(20, 1))
    assert f.validate(units, x, y) < 1e-6
    # the conjugate z -> conj z is not holomorphic
    bad = SliceFunctionData.from_stem(lambda x, y: (np.outer(x[:, 0], H.one()), np.outer(-y[:, 0], H.one())), 1, 4)
    with pytest.raises(InvalidStructureError):
        bad.validate(units, x, y)


def test_tabulated_interpolates(H):
    I = unit_structure(H.element("i"), H)
    xa = np.linspace(-1, 1, 41)
    ya = np.linspace(-1, 1, 41)
    X, Y = np.meshgrid(xa, ya, indexing="ij")
    vals = np.stack([X, Y, 0 * X, 0 * X], axis=-1)  # f(z) = z on the slice of i
    f = SliceFunctionData.tabulated([(I, xa, ya, vals)])
    assert np.allclose(f(SlicePoint([0.33], [0.21], I)), [0.33, 0.21, 0, 0])
    assert np.allclose(f(SlicePoint([0.33], [-0.21], -I)), [0.33, 0.21, 0, 0])
    with pytest.raises(DomainError):
        f(SlicePoint([2.0], [0.0], I))


def test_unknown_kind():
    with pytest.raises(InvalidInputError):
        SliceFunctionData("magic", lambda I, x, y: x, 1, 2)


def test_path_slice_detection(H, rng):
    probes = random_units(H, rng, 6)
    g = PlanePath.segment([0.4 + 0.9j])
    f = SliceFunctionData.polynomial({(2,): H.element("k"), (1,): H.one()}, 4)
    ok, stem = is_path_slice(f, g, probes)
    assert ok
    assert np.allclose(stem.evaluate(probes[0]), f.on_slice(probes[0], g.end.real, g.end.imag))

    def twisted(I, x, y):
        # right factor 1 + c(I) k with c quadratic in I: holomorphic on each slice, not slice
        u = I.mat @ H.one()
        a = H.one() + u[1] ** 2 * H.element("k")
        q = x[:, :1] * H.one() + y[:, :1] * u
        return np.array([hamilton(row, a) for row in q])

    ok, _ = is_path_slice(SliceFunctionData.from_callable(twisted, 1, 4), g, probes)
    assert not ok
    with pytest.raises(InvalidInputError):
        is_path_slice(f, g, probes[:1])
