"""Branches of sqrt(2z - J) glued across slices, and lacunary series.

Cut curves start at the branch point z = J/2 and run to infinity.  A branch
is fixed by its value on the seed J/2 + R_+, where sqrt(2z - J) is the
positive root, and continued along a path avoiding the cut.  We work in
w = 2z - i, where the branch point is 0: the value is sqrt|w| e^{i Theta/2}
with Theta the argument accumulated along a polygonal path from w = 1,
corrected by 2 pi each time the path crosses the cut.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import ComplexStructure, SlicePoint
from .calculus import rotation_norm_bound, star_power
from .errors import BranchCutError, DimensionError, DivergenceError, DomainError, InvalidInputError
from .paths import SliceFunctionData, StemValue
from .regions import Polyline

CUT_TOL = 1e-12


@dataclass(frozen=True)
class CutCurve:
    """gamma_s as a polyline in the z-plane (the last piece may be a ray)."""

    name: str
    s: float
    vertices: tuple
    ray: bool
    param: Callable

    @property
    def polyline(self) -> Polyline:
        return Polyline(np.asarray(self.vertices, complex), self.ray)

    def gamma(self, t):
        return self.param(np.asarray(t, float))

    def distance(self, z) -> np.ndarray:
        return self.polyline.distance(np.asarray(z, complex))

    def w_segments(self, far: float):
        """Cut pieces in the w-plane as (start, end) pairs oriented away
        from the branch point; the ray is clipped at modulus ``far``."""
        v = 2 * np.asarray(self.vertices, complex) - 1j
        segs = [(v[k], v[k + 1]) for k in range(len(v) - 1)]
        if self.ray:
            a, b = v[-2], v[-1]
            direction = (b - a) / abs(b - a)
            segs[-1] = (a, a + direction * (far + abs(a) + 1.0))
        return segs


def ray_cut(s: float) -> CutCurve:
    """i/2 + t/(1-t) e^{i(pi/4 + s pi/2)}, t in [0, 1)."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise InvalidInputError("s must lie in [0, 1]")
    e = np.exp(1j * (np.pi / 4 + s * np.pi / 2))

    def param(t):
        return 0.5j + t / (1 - t) * e

    return CutCurve("ray", s, (0.5j, 0.5j + e), True, param)


def three_part_cut(s: float) -> CutCurve:
    """Segment i/2 -> si/6, segment si/6 -> i - 1, then i/(1-t) - 2i - 1.

    The last piece is taken literally: it starts at i - 1 (t = 2/3) and runs
    straight up.
    """
    s = float(s)
    if not 0.0 < s <= 1.0:
        raise InvalidInputError("s must lie in (0, 1]")

    def param(t):
        t = np.asarray(t, float)
        a = (1 - (3 - s) * t) / 2 * 1j
        b = 3 * (2 / 3 - t) * (s * 1j / 6) + 3 * (t - 1 / 3) * (1j - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = 1j / (1 - t) - 2j - 1
        return np.where(t <= 1 / 3, a, np.where(t <= 2 / 3, b, c))

    return CutCurve("three-part", s, (0.5j, s * 1j / 6, -1 + 1j, -1 + 2j), True, param)


CUTS = {"ray": ray_cut, "three-part": three_part_cut}


def cut_family(kind) -> Callable[[float], CutCurve]:
    if callable(kind):
        return kind
    try:
        return CUTS[kind]
    except KeyError:
        raise InvalidInputError(f"unknown cut family {kind!r}") from None


def _cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def _crossing_sign(p0: complex, p1: complex, c0: complex, c1: complex) -> int:
    """+-1 if the path segment p0->p1 properly crosses c0->c1, with the sign
    of cross(c1 - c0, p1 - p0); 0 if they do not meet."""
    d, e = p1 - p0, c1 - c0
    den = _cross(d, e)
    if den == 0.0:
        return 0
    t = _cross(c0 - p0, e) / den
    u = _cross(c0 - p0, d) / den
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return 1 if _cross(e, d) > 0 else -1
    return 0


def _path(w: complex) -> list[complex]:
    # avoid passing through the branch point: w on the negative axis detours
    if w.imag == 0.0 and w.real < 0:
        return [1.0 + 0j, 0.3 + 1.1j, w]
    return [1.0 + 0j, w]


def psi_s(z, cut: CutCurve) -> np.ndarray:
    """The branch of sqrt(2z - i) on C minus the cut curve, z complex."""
    z = np.atleast_1d(np.asarray(z, complex))
    if np.any(cut.distance(z) <= CUT_TOL):
        raise BranchCutError("point lies on the cut")
    out = np.empty(z.shape, complex)
    for k, zz in enumerate(z.ravel()):
        w = 2 * zz - 1j
        path = _path(complex(w))
        far = max(abs(p) for p in path)
        theta = 0.0
        for a, b in zip(path[:-1], path[1:]):
            theta += float(np.angle(b / a))
            for c0, c1 in cut.w_segments(far):
                theta -= 2 * np.pi * _crossing_sign(a, b, c0, c1)
        out.ravel()[k] = np.sqrt(abs(w)) * np.exp(0.5j * theta)
    return out


def _complex_to_vec(c, J: ComplexStructure, one: np.ndarray) -> np.ndarray:
    c = np.asarray(c, complex)
    return np.outer(c.real, one) + np.outer(c.imag, J.mat @ one)


def _e0(J: ComplexStructure) -> np.ndarray:
    one = np.zeros(J.dim)
    one[0] = 1.0
    return one


def psi_stem(s: float, J: ComplexStructure, x, y, cut="ray", one=None) -> StemValue:
    """Stem (F1, F2) of Psi_phi at x + yi, y >= 0, for the branch s:
    F1 = (a + b)/2, F2 = J(b - a)/2 with a = Psi_s(x + yJ), b = Psi_s(x - yJ)."""
    one = _e0(J) if one is None else np.asarray(one, float)
    curve = cut_family(cut)(s)
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    a = _complex_to_vec(psi_s(x + 1j * y, curve), J, one)
    b = _complex_to_vec(psi_s(x - 1j * y, curve), J, one)
    return StemValue(0.5 * (a + b), 0.5 * (b - a) @ J.mat.T)


def branch_psi(s: float, J: ComplexStructure, point: SlicePoint, cut="ray", tilde: bool = False,
               one=None) -> np.ndarray:
    """Psi_phi at x + yI (y >= 0 representative) with phi(I) = s:

        (1 - IJ)/2 Psi_s(x + yJ) + (1 + IJ)/2 Psi_s(x - yJ).

    Values are vectors in R^{2n}, with the complex number u + vi read as
    u 1 + v J1 (``one`` defaults to the first basis vector).  ``tilde``
    admits the points of the cut on the slice of -J, where only the second
    term survives.
    """
    if point.d != 1:
        raise DimensionError("branch_psi is defined for d = 1")
    if point.I.dim != J.dim:
        raise DimensionError("structure dimensions differ")
    one = _e0(J) if one is None else np.asarray(one, float)
    x, y, I = float(point.x[0]), float(point.y[0]), point.I
    if y < 0:
        y, I = -y, -I
    curve = cut_family(cut)(s)
    side = I.same_slice(J) if y > 0 else 1
    if side == 1:
        return _complex_to_vec(psi_s(x + 1j * y, curve), J, one)[0]
    if side == -1:
        if not tilde and curve.distance(np.array([x + 1j * y]))[0] <= CUT_TOL:
            raise BranchCutError("point lies on the cut of the slice of -J")
        return _complex_to_vec(_psi_lower(x - 1j * y, curve), J, one)[0]
    if curve.distance(np.array([x + 1j * y]))[0] <= CUT_TOL:
        raise BranchCutError("point lies on the cut")
    a = _complex_to_vec(psi_s(x + 1j * y, curve), J, one)[0]
    b = _complex_to_vec(psi_s(x - 1j * y, curve), J, one)[0]
    IJa = I.mat @ (J.mat @ a)
    IJb = I.mat @ (J.mat @ b)
    return 0.5 * (a - IJa) + 0.5 * (b + IJb)


def _psi_lower(z, curve):
    # x - yJ is never on the cut itself; only the branch point is excluded
    return psi_s(z, curve)


def example_phi(J: ComplexStructure) -> Callable[[ComplexStructure], float]:
    """phi(+-J) = 1, phi(I) = |I - J| / 2 otherwise (unit distance in the
    normalized Frobenius norm, the Euclidean distance for quaternion units)."""

    def phi(I: ComplexStructure) -> float:
        if I.same_slice(J):
            return 1.0
        return float(np.linalg.norm(I.mat - J.mat) / np.sqrt(I.dim) / 2)

    return phi


def psi_phi(point: SlicePoint, J: ComplexStructure, phi, cut="ray", tilde: bool = False, one=None) -> np.ndarray:
    """Psi_phi with s = phi(I) for the y >= 0 representative x + yI."""
    I = point.I if point.y[0] >= 0 else -point.I
    s = float(phi(I)) if callable(phi) else float(phi)
    return branch_psi(s, J, point, cut, tilde, one)


def psi_phi_function(J: ComplexStructure, phi, cut="ray", tilde: bool = False, one=None) -> SliceFunctionData:
    """Psi_phi as slice function data (d = 1)."""

    def fn(I, x, y):
        return np.array([psi_phi(SlicePoint(xx, yy, I), J, phi, cut, tilde, one) for xx, yy in zip(x, y)])

    return SliceFunctionData.from_callable(fn, 1, J.dim)


def slice_product(F: StemValue, G: StemValue, mul: Callable) -> StemValue:
    """Stem of the slice product: (F1 G1 - F2 G2, F1 G2 + F2 G1)."""
    return StemValue(mul(F.F1, G.F1) - mul(F.F2, G.F2), mul(F.F1, G.F2) + mul(F.F2, G.F1))


# ---------------------------------------------------------------------------
# lacunary series


@dataclass(frozen=True)
class LacunaryValue:
    value: np.ndarray
    tail_bound: float
    ratio: float


def lacunary_partial_sum(w, N: int) -> complex:
    """sum_{j=0}^N w^{2^j}."""
    w = complex(w)
    total, p = 0j, w
    for _ in range(N + 1):
        total += p
        p = p * p
    return total


def lacunary_tail(rho: float, N: int) -> float:
    """Bound on sum_{j>N} rho^{2^j}: t/(1-t) with t = rho^{2^{N+1}}."""
    if rho >= 1:
        return np.inf
    t = rho ** (2 ** (N + 1))
    return t / (1 - t)


def lacunary_boundary_function(p: SlicePoint, r, J, a2, q: SlicePoint, N: int) -> LacunaryValue:
    """g(q) = [sum_l sum_{j<=N} ((q_l - p_l)/r_l)^{2^j}] a2 on the slice of J_1.

    The complex scalar u + vi acts on a2 as u + v J_1.  The tail bound sums
    the lacunary estimate over coordinates, scaled by |a2| and K_{J_1}.
    """
    J1 = J[0] if isinstance(J, (tuple, list)) or hasattr(J, "entries") else J
    a2 = np.asarray(a2, float)
    r = np.broadcast_to(np.asarray(r, float), (p.d,))
    if np.any(~(r > 0)):
        raise InvalidInputError("radii must be positive")
    yq = q.coords_on(J1)
    yp = p.coords_on(J1)
    if yq is None or yp is None:
        raise DomainError("p and q must lie on the slice of J_1")
    dz = (q.x - p.x) + 1j * (yq - yp)
    w = np.where(np.isinf(r), 0.0, dz / r)
    rho = np.abs(w)
    if np.any(rho >= 1):
        raise DivergenceError(f"ratio {float(rho.max()):.6g} >= 1; the series diverges")
    c = sum(lacunary_partial_sum(wl, N) for wl in w)
    value = c.real * a2 + c.imag * (J1.mat @ a2)
    tail = sum(lacunary_tail(float(t), N) for t in rho) * float(np.linalg.norm(a2)) * rotation_norm_bound(J1)
    return LacunaryValue(value, float(tail), float(rho.max()))


def lacunary_star(q: SlicePoint, I: ComplexStructure, N: int, a=None) -> LacunaryValue:
    """sum_{n<=N} (q - I/2)^{*2^n} a on the sigma-ball Sigma(I/2, 1)."""
    if q.d != 1:
        raise DimensionError("d = 1 only")
    a = _e0(I) if a is None else np.asarray(a, float)
    p = SlicePoint([0.0], [0.5], I)
    z = complex(q.x[0], q.y[0])
    y_own = q.coords_on(I)
    K = rotation_norm_bound(I)
    if y_own is not None:
        rho = abs(complex(q.x[0], y_own[0]) - 0.5j)
        factor = K
    else:
        rho = max(abs(z - 0.5j), abs(z.conjugate() - 0.5j))
        factor = (q.I.op_norm() * I.op_norm() + 1.0) * K
    if rho >= 1:
        raise DivergenceError(f"ratio {rho:.6g} >= 1; outside Sigma(I/2, 1)")
    value = np.zeros(I.dim)
    for n in range(N + 1):
        value += star_power(q, p, (2 ** n,)) @ a
    tail = factor * lacunary_tail(rho, N) * float(np.linalg.norm(a))
    return LacunaryValue(value, float(tail), float(rho))
