"""Invariant suite behind ``slicecalc check``.

Each check draws its samples from a generator seeded by the caller, returns
a CheckResult and never raises for a failed invariant.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (AlgebraSpec, SlicePoint, algebra, random_unit_imaginary,
                      unit_structure, validate_complex_structure)
from .branches import lacunary_partial_sum, lacunary_star, psi_phi_function, example_phi, psi_stem, slice_product
from .calculus import (islice_derivative, islice_derivative_alpha, slice_derivative, slice_derivative_alpha,
                       star_power, star_power_binomial, taylor_coefficients, taylor_eval)
from .errors import SliceCalcError
from .extension import SliceOpenTuple, extend, hyper_sigma_polydisc
from .paths import SliceFunctionData, StemValue
from .regions import Ball
from .representation import (kernel_membership, mp_inverse, mp_residuals, represent, slice_inverse)
from .topology import metrizability_witness, sigma_ball_contains, sigma_distance, tau_sigma_witness


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0

    def row(self) -> tuple:
        return (self.name, "pass" if self.passed else "FAIL", self.value, self.threshold, self.seconds)


def _units(spec: AlgebraSpec, rng, k):
    return [unit_structure(random_unit_imaginary(spec, rng), spec) for _ in range(k)]


def check_algebra(spec, rng):
    worst = 0.0
    for u in [random_unit_imaginary(spec, rng) for _ in range(20)]:
        I = unit_structure(u, spec)
        worst = max(worst, float(np.linalg.norm(I.mat @ I.mat + np.eye(spec.dim))))
        if not validate_complex_structure(I.mat):
            worst = np.inf
    return worst, 1e-10


def check_moore_penrose(spec, rng):
    worst = 0.0
    for k in range(30):
        m, n = rng.integers(1, 9, 2)
        r = int(rng.integers(0, min(m, n) + 1))
        M = rng.normal(size=(m, r)) @ rng.normal(size=(r, n)) if r else np.zeros((m, n))
        worst = max(worst, max(mp_residuals(M, mp_inverse(M))))
    return worst, 1e-9


def check_two_slice_identity(spec, rng):
    I = _units(spec, rng, 1)[0]
    Zp = slice_inverse((I, -I)).zeta_plus
    one = np.eye(spec.dim)
    expected = 0.5 * np.block([[one, one], [-I.mat, I.mat]])
    return float(np.max(np.abs(Zp - expected))), 1e-10


def _poly_functions(spec, rng):
    one = spec.one()
    c, c2 = rng.normal(size=spec.dim), rng.normal(size=spec.dim)
    return [SliceFunctionData.polynomial({(1,): one}, spec.dim),
            SliceFunctionData.polynomial({(2,): one}, spec.dim),
            SliceFunctionData.polynomial({(3,): one}, spec.dim),
            SliceFunctionData.polynomial({(2,): c, (1,): c2}, spec.dim)]


def check_representation(spec, rng):
    J = _units(spec, rng, 1)[0]
    worst = 0.0
    for f in _poly_functions(spec, rng):
        for I in _units(spec, rng, 10):
            x, y = rng.normal(size=(1, 1)), rng.normal(size=(1, 1))
            vals = np.stack([f.on_slice(J, x, y), f.on_slice(-J, x, y)], axis=-2)
            got = represent(vals, (J, -J), I)
            worst = max(worst, float(np.max(np.abs(got - f.on_slice(I, x, y)))))
    return worst, 1e-9


def check_kernel(spec, rng):
    J = _units(spec, rng, 1)[0]
    others = _units(spec, rng, 30)
    bad = sum(kernel_membership(I, (J,)) for I in others if not I.same_slice(J))
    bad += not kernel_membership(J, (J,))
    bad += sum(not kernel_membership(I, (J, -J)) for I in others)
    return float(bad), 0.0


def check_extension(spec, rng):
    if spec.name != "quaternion":
        return 0.0, 1e-9
    i, j = unit_structure(spec.element("i"), spec), unit_structure(spec.element("j"), spec)
    worst = 0.0
    for f in _poly_functions(spec, rng)[:2]:
        for U in (SliceOpenTuple((i,), (Ball([0.2 + 0.1j], 1.0),)),
                  SliceOpenTuple((i, j), (Ball([0.0], 1.0), Ball([0.1j], 1.0)))):
            ft = extend(f, U)
            for T, R in zip(U.structures, U.regions):
                x = rng.uniform(-0.6, 0.6, (20, 1))
                y = rng.uniform(-0.6, 0.6, (20, 1))
                keep = R.contains(x, y) & (y[:, 0] != 0)
                worst = max(worst, float(np.max(np.abs(ft.on_slice(T, x[keep], y[keep])
                                                       - f.on_slice(T, x[keep], y[keep])))))
    return worst, 1e-9


def check_hyper_sigma(spec, rng):
    if spec.name != "quaternion":
        return 0.0, 0.0
    K = _units(spec, rng, 1)[0]
    q = SlicePoint([0.3], [0.4], K)
    hs = hyper_sigma_polydisc(q, 0.9, (K,))
    bad = 0
    for _ in range(1000):
        I = K if rng.random() < 0.1 else _units(spec, rng, 1)[0]
        p = SlicePoint([rng.uniform(-1, 1.6)], [rng.uniform(-1.5, 1.5)], I)
        bad += hs.contains(p) != sigma_ball_contains(q, 0.9, p)
    return float(bad), 0.0


def check_sigma_metric(spec, rng):
    worst = 0.0

    def pt():
        I = _units(spec, rng, 1)[0]
        return SlicePoint(rng.normal(size=1), rng.normal(size=1), I)

    for _ in range(1000):
        p, q, r = pt(), pt(), pt()
        worst = max(worst, sigma_distance(p, r) - sigma_distance(p, q) - sigma_distance(q, r))
        worst = max(worst, abs(sigma_distance(p, q) - sigma_distance(q, p)))
    return max(worst, 0.0), 1e-12


def check_star_power(spec, rng):
    worst = 0.0
    for _ in range(20):
        I, K = _units(spec, rng, 2)
        p = SlicePoint(rng.normal(size=2), rng.normal(size=2), I)
        q = SlicePoint(rng.normal(size=2), rng.normal(size=2), K)
        alpha = tuple(int(a) for a in rng.integers(0, 4, 2))
        A, B = star_power(q, p, alpha), star_power_binomial(q, p, alpha)
        worst = max(worst, float(np.max(np.abs(A - B)) / max(1.0, np.max(np.abs(B)))))
    return worst, 1e-10


def check_taylor(spec, rng):
    one = spec.one()
    f = SliceFunctionData.polynomial({(3,): one, (1,): spec.element(spec.labels[-1])}, spec.dim)
    I = _units(spec, rng, 1)[0]
    T = taylor_coefficients(f, SlicePoint([0.2], [0.1], I), 5, rho=1.0)
    worst = 0.0
    for K in _units(spec, rng, 10):
        q = SlicePoint([0.3], [0.05], K)
        worst = max(worst, float(np.max(np.abs(taylor_eval(T, q).value - f(q)))))
    return worst, 1e-9


def check_psi_series(spec, rng):
    if spec.name != "quaternion":
        return 0.0, 1e-6
    J = unit_structure(spec.element("j"), spec)
    f = psi_phi_function(J, example_phi(J))
    T = taylor_coefficients(f, SlicePoint([1.0], [0.0], J), 30, rho=0.9)
    worst = 0.0
    for I in _units(spec, rng, 10):
        z = 1 + 0.45 * np.exp(2j * np.pi * rng.uniform())
        q = SlicePoint([z.real], [z.imag], I)
        worst = max(worst, float(np.max(np.abs(taylor_eval(T, q).value - f(q)))))
    return worst, 1e-6


def check_psi_square(spec, rng):
    if spec.name != "quaternion":
        return 0.0, 1e-12
    J = unit_structure(spec.element("j"), spec)
    worst = 0.0
    for _ in range(20):
        x, y = rng.uniform(-2, 2), rng.uniform(0, 2)
        u = random_unit_imaginary(spec, rng)
        I = unit_structure(u, spec)
        F = psi_stem(0.3, J, x, y)
        F = StemValue(F.F1[0], F.F2[0])
        S = slice_product(F, F, spec.mul).evaluate(I)
        target = 2 * (x * spec.one() + y * u) - spec.element("j")
        worst = max(worst, float(np.max(np.abs(S - target))))
    return worst, 1e-12


def check_derivatives(spec, rng):
    one = spec.one()
    f = SliceFunctionData.polynomial({(3,): one, (2,): spec.element(spec.labels[1])}, spec.dim)
    worst = 0.0
    for I in _units(spec, rng, 5):
        p = SlicePoint(rng.normal(size=1), rng.normal(size=1), I)
        z = p.x[0] + 1j * p.y[0]
        w = 3 * z ** 2
        exact = w.real * one + w.imag * (I.mat @ one) + 2 * (p.x[0] * np.eye(spec.dim) + p.y[0] * I.mat) @ spec.element(spec.labels[1])
        a = islice_derivative(f, I, 0, p)
        worst = max(worst, float(np.max(np.abs(a - exact))),
                    float(np.max(np.abs(a - islice_derivative(f, -I, 0, p)))),
                    float(np.max(np.abs(a - slice_derivative(f, 0, p)))))
    return worst, 1e-6


def check_commutation(spec, rng):
    one = spec.one()
    f = SliceFunctionData.polynomial({(2, 1): one, (0, 3): spec.element(spec.labels[1]), (4, 0): one}, spec.dim)
    worst = 0.0
    I = _units(spec, rng, 1)[0]
    p = SlicePoint(rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2), I)
    for alpha in [(1, 0), (0, 2), (2, 1), (1, 3), (4, 0)]:
        worst = max(worst, float(np.max(np.abs(islice_derivative_alpha(f, I, alpha, p)
                                                - slice_derivative_alpha(f, alpha, p)))))
    return worst, 1e-7


def check_witnesses(spec, rng):
    if spec.dim < 4:
        return 0.0, 1e-12  # one slice only: nothing to witness
    structs = _units(spec, rng, 10)
    rep = metrizability_witness(structs)
    worst = float(np.max(np.abs(rep.distances - 1.0 / np.arange(1, 11))))
    # tau-sigma: distances follow sqrt(dist(J, C_I)) and decrease along the sequence
    I = unit_structure(spec.element(spec.labels[1]), spec)
    probes = []
    for k in range(1, 7):
        t = 4.0 ** (-k)
        v = np.zeros(spec.dim)
        v[1] = np.sqrt(1 - t * t)
        v[2] = t
        probes.append(unit_structure(v, spec))
    tw = tau_sigma_witness(I, probes)
    if np.any(np.diff(tw.distances) >= 0):
        worst = np.inf
    worst = max(worst, float(np.max(np.abs(tw.distances - np.sqrt(tw.values)))))
    return worst, 1e-12


def check_lacunary(spec, rng):
    # independent oracle: the first terms of sum (1/2)^(2^j) in exact binary
    oracle = sum(0.5 ** (2 ** j) for j in range(6))
    val = lacunary_partial_sum(0.5, 5).real
    I = _units(spec, rng, 1)[0]
    q = SlicePoint([0.0], [0.5], I)  # the center: every term vanishes
    zero = float(np.max(np.abs(lacunary_star(q, I, 6).value)))
    return max(abs(val - oracle), zero), 1e-12


CHECKS: dict[str, Callable] = {
    "algebra-structures": check_algebra,
    "moore-penrose": check_moore_penrose,
    "two-slice-inverse": check_two_slice_identity,
    "representation-formula": check_representation,
    "kernel-characterization": check_kernel,
    "extension-round-trip": check_extension,
    "hyper-sigma-vs-sigma-ball": check_hyper_sigma,
    "sigma-metric": check_sigma_metric,
    "star-power": check_star_power,
    "taylor-polynomial": check_taylor,
    "taylor-psi-series": check_psi_series,
    "psi-star-square": check_psi_square,
    "derivatives": check_derivatives,
    "derivative-commutation": check_commutation,
    "witnesses": check_witnesses,
    "lacunary": check_lacunary,
}


def run_checks(algebra_name: str = "quaternion", seed: int = 0, only=None) -> list[CheckResult]:
    spec = algebra(algebra_name)
    results = []
    for k, (name, fn) in enumerate(CHECKS.items()):
        if only and name not in only:
            continue
        rng = np.random.default_rng([seed, k])
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                value, thr = fn(spec, rng)
            except SliceCalcError:
                value, thr = float("nan"), 0.0
        results.append(CheckResult(name, bool(value <= thr), float(value), float(thr),
                                   time.perf_counter() - t0))
    return results
