"""Acceptance criteria, one marked group per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints a
PASS/FAIL line per criterion.  Reference values come from hand-written
oracles (Hamilton product, numpy.linalg.pinv, scalar sums), never from the
code under test.
"""
import numpy as np
import pytest

from conftest import hamilton, hpow, random_units
from slicecalc import (SliceFunctionData, SliceOpenTuple, SlicePoint, algebra, extend, hyper_sigma_polydisc,
                       islice_derivative, islice_derivative_alpha, metrizability_witness, represent,
                       sigma_ball_contains, sigma_distance, slice_derivative_alpha, slice_inverse, taylor_coefficients,
                       taylor_eval, tau_sigma_witness, unit_structure)
from slicecalc.algebra import canonicalize, random_unit_imaginary
from slicecalc.branches import example_phi, lacunary_partial_sum, psi_phi_function
from slicecalc.calculus import multi_indices
from slicecalc.regions import Ball
from slicecalc.representation import kernel_membership, mp_inverse, mp_residuals
from slicecalc.topology import slice_distance

H = algebra("quaternion")
ONE = H.one()
Li = unit_structure(H.element("i"), H)
Lj = unit_structure(H.element("j"), H)


def crit(n, title):
    return pytest.mark.criterion(n, title)


def qelem(x, y, I):
    """x + y u as a quaternion, u = I 1."""
    return x * ONE + y * (I.mat @ ONE)


# 1 -------------------------------------------------------------------------

def _mp_matrices(rng, count=100):
    for k in range(count):
        m, n = (int(v) for v in rng.integers(1, 12, 2))
        kind = k % 3
        r = min(m, n) if kind == 0 else (0 if kind == 2 else int(rng.integers(1, max(2, min(m, n)))))
        r = min(r, min(m, n))
        if r == 0:
            yield np.zeros((m, n))
        else:
            yield rng.normal(size=(m, r)) @ rng.normal(size=(r, n))


@crit(1, "Moore-Penrose conditions")
def test_c1_moore_penrose_conditions():
    rng = np.random.default_rng(1)
    worst = max(max(mp_residuals(M, mp_inverse(M))) for M in _mp_matrices(rng))
    print(f"worst relative MP residual {worst:.3e}")
    assert worst <= 1e-9


@crit(1, "Moore-Penrose conditions")
def test_c1_matches_numpy_pinv():
    rng = np.random.default_rng(1)
    for M in _mp_matrices(rng):
        P = np.linalg.pinv(M, rcond=1e-10)
        assert np.linalg.norm(mp_inverse(M) - P) <= 1e-9 * max(1.0, np.linalg.norm(P))


# 2 -------------------------------------------------------------------------

@crit(2, "zeta^+((L_i, -L_i)) closed form")
def test_c2_two_slice_identity():
    Zp = slice_inverse((Li, -Li)).zeta_plus
    one = np.eye(4)
    expected = 0.5 * np.block([[one, one], [-Li.mat, Li.mat]])
    assert np.max(np.abs(Zp - expected)) <= 1e-10


# 3 -------------------------------------------------------------------------

def _quaternion_functions(rng):
    c, c2 = rng.normal(size=4), rng.normal(size=4)
    return [
        (SliceFunctionData.polynomial({(1,): ONE}, 4), lambda q: q),
        (SliceFunctionData.polynomial({(2,): ONE}, 4), lambda q: hpow(q, 2)),
        (SliceFunctionData.polynomial({(3,): ONE}, 4), lambda q: hpow(q, 3)),
        (SliceFunctionData.polynomial({(2,): c, (1,): c2}, 4),
         lambda q: hamilton(hpow(q, 2), c) + hamilton(q, c2)),
    ]


@crit(3, "representation formula")
def test_c3_representation_formula():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _, direct in _quaternion_functions(rng):
        for I in random_units(H, rng, 50):
            x, y = rng.normal(), rng.normal()
            vals = np.array([direct(qelem(x, y, Li)), direct(qelem(x, -y, Li))])
            got = represent(vals, (Li, -Li), I)
            worst = max(worst, float(np.max(np.abs(got - direct(qelem(x, y, I))))))
    print(f"worst representation error {worst:.3e}")
    assert worst <= 1e-9


# 4 -------------------------------------------------------------------------

def _projector(A):
    return A @ np.linalg.solve(A.T @ A, A.T)


@crit(4, "kernel characterization")
def test_c4_single_structure_kernel_is_itself():
    rng = np.random.default_rng(4)
    J = random_units(H, rng, 1)[0]
    sample = random_units(H, rng, 100)
    assert kernel_membership(J, (J,))
    assert not kernel_membership(-J, (J,))
    assert not any(kernel_membership(I, (J,)) for I in sample)


@crit(4, "kernel characterization")
def test_c4_opposite_pair_kernel_is_everything():
    rng = np.random.default_rng(4)
    assert all(kernel_membership(I, (Li, -Li)) for I in random_units(H, rng, 100))


@crit(4, "kernel characterization")
def test_c4_projector_range_matches_closed_form():
    rng = np.random.default_rng(4)
    for J in random_units(H, rng, 10):
        S = slice_inverse((J,))
        # ker (1, J) = {(-J v, v)}
        closed = _projector(np.vstack([-J.mat, np.eye(4)]))
        assert np.max(np.abs(_projector(S.kernel_basis) - closed)) <= 1e-9
        assert np.max(np.abs(S.residual_projector @ closed - closed)) <= 1e-9
        assert np.max(np.abs(closed @ S.residual_projector - S.residual_projector)) <= 1e-9
    S2 = slice_inverse((Li, -Li))
    assert S2.kernel_dim == 0
    assert np.max(np.abs(S2.residual_projector)) <= 1e-9


# 5 -------------------------------------------------------------------------

def _extension_cases():
    z = SliceFunctionData.polynomial({(1,): ONE}, 4)
    z2 = SliceFunctionData.polynomial({(2,): ONE}, 4)
    one_slice = SliceOpenTuple((Li,), (Ball([0.2 + 0.1j], 1.0),))
    two_slices = SliceOpenTuple((Li, Lj), (Ball([0.0], 1.0), Ball([0.1j], 1.0)))
    return [(f, U) for f in (z, z2) for U in (one_slice, two_slices)]


@crit(5, "extension round trip")
def test_c5_restriction_reproduces_inputs():
    rng = np.random.default_rng(5)
    worst = 0.0
    for f, U in _extension_cases():
        ft = extend(f, U)
        for T, R in zip(U.structures, U.regions):
            x, y = rng.uniform(-1, 1, (200, 1)), rng.uniform(-1, 1, (200, 1))
            keep = R.contains(x, y)
            worst = max(worst, float(np.max(np.abs(ft.on_slice(T, x[keep], y[keep])
                                                   - f.on_slice(T, x[keep], y[keep])))))
    print(f"worst round-trip error {worst:.3e}")
    assert worst <= 1e-9


@crit(5, "extension round trip")
def test_c5_extension_is_slice_regular():
    rng = np.random.default_rng(5)
    worst = 0.0
    for f, U in _extension_cases():
        ft = extend(f, U)
        dom = ft.meta["derived_sets"].U_Delta_tilde
        for I in random_units(H, rng, 20):
            x, y = rng.uniform(-0.5, 0.5, (40, 1)), rng.uniform(-0.5, 0.5, (40, 1))
            # keep a margin so that the difference stencil stays inside
            inside = dom.contains_xy(x, y, I)
            for s in (1e-4, -1e-4):
                inside &= dom.contains_xy(x + s, y, I) & dom.contains_xy(x, y + s, I)
            if np.any(inside):
                worst = max(worst, float(np.max(ft.cr_residual(I, x[inside], y[inside]))))
    print(f"worst CR residual {worst:.3e}")
    assert worst <= 1e-6


# 6 -------------------------------------------------------------------------

@crit(6, "hyper-sigma-polydisc equals sigma-ball")
def test_c6_hyper_sigma_polydisc_is_sigma_ball():
    rng = np.random.default_rng(6)
    K = random_units(H, rng, 1)[0]
    q = SlicePoint([0.3], [0.4], K)
    r = 0.9
    hs = hyper_sigma_polydisc(q, r, (K,))
    bad = 0
    for _ in range(10_000):
        u = rng.random()
        I = K if u < 0.1 else (-K if u < 0.15 else unit_structure(random_unit_imaginary(H, rng), H))
        p = SlicePoint([rng.uniform(-1, 1.6)], [rng.uniform(-1.5, 1.5)], I)
        bad += hs.contains(p) != sigma_ball_contains(q, r, p)
    assert bad == 0


# 7 -------------------------------------------------------------------------

@crit(7, "Taylor series")
def test_c7_polynomial_exactness():
    rng = np.random.default_rng(7)
    c = rng.normal(size=4)
    f = SliceFunctionData.polynomial({(3,): ONE, (2,): c, (0,): H.element("k")}, 4)
    for q0 in (SlicePoint([0.2], [0.1], Li), SlicePoint([0.5], [0.0], Lj)):
        T = taylor_coefficients(f, q0, 5, rho=1.0)
        for I in random_units(H, rng, 20):
            q = SlicePoint([q0.x[0] + 0.2], [0.05], I)
            qq = qelem(q.x[0], q.y[0], I)
            exact = hpow(qq, 3) + hamilton(hpow(qq, 2), c) + H.element("k")
            assert np.max(np.abs(taylor_eval(T, q).value - exact)) <= 1e-9


@crit(7, "Taylor series")
def test_c7_branch_psi_series_at_ratio_half():
    rng = np.random.default_rng(7)
    f = psi_phi_function(Lj, example_phi(Lj))
    rho = 0.9
    T = taylor_coefficients(f, SlicePoint([1.0], [0.0], Lj), 30, rho=rho)
    worst = 0.0
    for I in [Lj, -Lj] + random_units(H, rng, 20):
        z = 1 + 0.5 * rho * np.exp(2j * np.pi * rng.uniform())
        q = SlicePoint([z.real], [z.imag], I)
        worst = max(worst, float(np.max(np.abs(taylor_eval(T, q).value - f(q)))))
    print(f"worst series error at ratio 1/2 {worst:.3e}")
    assert worst <= 1e-6


@crit(7, "Taylor series")
def test_c7_tail_bounds_true_remainder():
    rng = np.random.default_rng(7)
    f = psi_phi_function(Lj, example_phi(Lj))
    T = taylor_coefficients(f, SlicePoint([1.0], [0.0], Lj), 30, rho=0.9)
    violations = 0
    for I in [Lj] + random_units(H, rng, 10):
        for t in (0.2, 0.5, 0.8):
            z = 1 + 0.9 * t * np.exp(2j * np.pi * rng.uniform())
            q = SlicePoint([z.real], [z.imag], I)
            exact = f(q)
            for N in (2, 5, 10, 20, 30):
                tv = taylor_eval(T, q, N)
                violations += np.linalg.norm(tv.value - exact) > tv.tail
    assert violations == 0


# 8 -------------------------------------------------------------------------

@crit(8, "derivative cross-checks")
def test_c8_derivatives_against_analytic():
    rng = np.random.default_rng(8)
    c = rng.normal(size=4)
    f = SliceFunctionData.polynomial({(3,): ONE, (2,): c}, 4)
    worst = 0.0
    for I in random_units(H, rng, 10):
        p = SlicePoint(rng.normal(size=1), rng.normal(size=1), I)
        q = qelem(p.x[0], p.y[0], I)
        exact = 3 * hpow(q, 2) + 2 * hamilton(q, c)
        a = islice_derivative(f, I, 0, p)
        worst = max(worst, float(np.max(np.abs(a - exact))),
                    float(np.max(np.abs(a - islice_derivative(f, -I, 0, p)))))
    print(f"worst derivative error {worst:.3e}")
    assert worst <= 1e-6


@crit(8, "derivative cross-checks")
def test_c8_commutation_up_to_order_four():
    rng = np.random.default_rng(8)
    f = SliceFunctionData.polynomial({(2, 1): ONE, (0, 3): H.element("i"), (4, 0): ONE, (1, 1): H.element("k")}, 4)
    I = random_units(H, rng, 1)[0]
    p = SlicePoint(rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2), I)
    worst = 0.0
    for alpha in multi_indices(2, 4):
        if sum(alpha) == 0:
            continue
        worst = max(worst, float(np.max(np.abs(islice_derivative_alpha(f, I, alpha, p)
                                                - slice_derivative_alpha(f, alpha, p)))))
    print(f"worst commutation error {worst:.3e}")
    assert worst <= 1e-7


# 9 -------------------------------------------------------------------------

@crit(9, "topology witnesses")
def test_c9_metrizability_distances():
    rng = np.random.default_rng(9)
    units = []
    while len(units) < 10:
        T = unit_structure(random_unit_imaginary(H, rng), H)
        if all(not T.same_slice(S) for S in units):
            units.append(T)
    rep = metrizability_witness(units)
    assert np.max(np.abs(rep.distances - 1.0 / np.arange(1, 11))) <= 1e-12


def _tau_probes():
    probes = []
    for k in range(1, 7):
        t = 4.0 ** (-k)
        probes.append(unit_structure(np.sqrt(1 - t * t) * H.element("i") + t * H.element("j"), H))
    return probes


@crit(9, "topology witnesses")
def test_c9_tau_sigma_distances_decrease():
    probes = _tau_probes()
    assert np.allclose([slice_distance(J, Li) for J in probes], 4.0 ** -np.arange(1, 7), rtol=0, atol=1e-15)
    rep = tau_sigma_witness(Li, probes)
    assert np.all(np.diff(rep.distances) < 0)


@crit(9, "topology witnesses")
def test_c9_tau_sigma_reaches_threshold():
    rep = tau_sigma_witness(Li, _tau_probes())
    print(f"tau-sigma distances {rep.distances}")
    assert rep.distances[-1] < 1e-3


# 10 ------------------------------------------------------------------------

def _random_point(rng):
    return SlicePoint(rng.normal(size=1), rng.normal(size=1), unit_structure(random_unit_imaginary(H, rng), H))


@crit(10, "sigma-distance metric")
def test_c10_symmetry_and_identity():
    rng = np.random.default_rng(10)
    for _ in range(2000):
        p, q = _random_point(rng), _random_point(rng)
        assert sigma_distance(p, q) == sigma_distance(q, p)
        assert sigma_distance(p, p) == 0.0
        assert sigma_distance(canonicalize(p), SlicePoint(p.x, -p.y, -p.I)) == 0.0
        assert (sigma_distance(p, q) == 0.0) == (p == q)


@crit(10, "sigma-distance metric")
def test_c10_triangle_inequality():
    rng = np.random.default_rng(10)
    violations = 0
    for _ in range(10_000):
        p, q, r = _random_point(rng), _random_point(rng), _random_point(rng)
        if rng.random() < 0.2:
            q = SlicePoint(rng.normal(size=1), rng.normal(size=1), p.I)
        violations += sigma_distance(p, r) > sigma_distance(p, q) + sigma_distance(q, r) + 1e-12
    assert violations == 0


# 11 ------------------------------------------------------------------------

LACUNARY_TARGET = 0.75390625


def _scalar_oracle(w, N):
    # exact binary fractions: sum of (1/2)^(2^j) for j = 0..N
    from fractions import Fraction
    return float(sum(Fraction(1, 2) ** (2 ** j) for j in range(N + 1)))


@crit(11, "lacunary series value")
def test_c11_truncated_sum_matches_scalar_oracle():
    for N in range(8):
        assert abs(lacunary_partial_sum(0.5, N).real - _scalar_oracle(0.5, N)) <= 1e-15


@crit(11, "lacunary series value")
def test_c11_truncated_sum_equals_stated_value():
    val = lacunary_partial_sum(0.5, 4).real
    print(f"sum_(j<=4) (1/2)^(2^j) = {val!r}, stated {LACUNARY_TARGET}")
    assert abs(val - LACUNARY_TARGET) <= 1e-9
