"""Slice derivatives, star powers, sigma-polydiscs and Taylor series."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import ComplexStructure, SlicePoint
from .errors import (ConvergenceDomainError, DimensionError, DomainError, InvalidInputError,
                     RadiusError, StepSizeError)
from .finite_diff import central_stencil

# ---------------------------------------------------------------------------
# multi-indices


def as_index(alpha) -> tuple[int, ...]:
    a = tuple(int(v) for v in np.atleast_1d(alpha))
    if any(v < 0 for v in a):
        raise InvalidInputError("multi-index entries must be natural numbers")
    return a


def unit_index(d: int, ell: int) -> tuple[int, ...]:
    """theta_ell: one in position ell, zero elsewhere."""
    out = [0] * d
    out[ell] = 1
    return tuple(out)


def index_leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def index_factorial(a) -> int:
    return math.prod(math.factorial(v) for v in a)


def index_binom(a, b) -> int:
    """(alpha choose beta), zero unless beta <= alpha."""
    if not index_leq(b, a):
        return 0
    return math.prod(math.comb(x, y) for x, y in zip(a, b))


def multi_indices(d: int, N: int) -> list[tuple[int, ...]]:
    """All alpha in N^d with |alpha| <= N, sorted by |alpha| then lexicographically."""
    out = [a for a in itertools.product(range(N + 1), repeat=d) if sum(a) <= N]
    return sorted(out, key=lambda a: (sum(a), a))


def tail_sum(t, N: int) -> float:
    """sum_{|alpha| > N} t^alpha for t in [0, 1)^d.

    Summed degree by degree (complete homogeneous sums h_k(t)) rather than
    as 1/prod(1 - t) minus the head, which cancels for small t.
    """
    t = np.atleast_1d(np.asarray(t, float))
    if np.any(t >= 1):
        return math.inf
    tmax = float(t.max())
    if tmax == 0.0:
        return 0.0
    d = len(t)
    extra = int(np.ceil(np.log(1e-20) / np.log(tmax))) + 2 if tmax > 0 else 1
    K = N + 1 + min(max(extra, 1), 100000)
    h = np.zeros(K + 1)
    h[0] = 1.0
    for tl in t:
        for k in range(1, K + 1):
            h[k] = h[k] + tl * h[k - 1]
    total = float(np.sum(h[N + 1:]))
    # remainder beyond K: h_k <= C(k + d - 1, d - 1) tmax^k
    rest = math.comb(K + d, d - 1) * tmax ** (K + 1) / (1 - tmax) ** d
    return total + rest


# ---------------------------------------------------------------------------
# star powers


def _mat_power(M: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(M, k)


def star_power_binomial(q: SlicePoint, p: SlicePoint, alpha) -> np.ndarray:
    """(q - p)^{*alpha} = sum_{beta <= alpha} (alpha choose beta) L_q^beta L_{-p}^{alpha-beta}.

    The defining expansion.  All L_{q_l} commute with each other, as do all
    L_{p_l}; the q-factors act last.  Loses accuracy for large |alpha|
    through cancellation; ``star_power`` evaluates the same operator stably.
    """
    alpha = as_index(alpha)
    if q.d != p.d or len(alpha) != q.d:
        raise DimensionError("q, p and alpha must share d")
    m = q.I.dim
    Lq = [q.operator(l) for l in range(q.d)]
    Lp = [-p.operator(l) for l in range(p.d)]
    out = np.zeros((m, m))
    for beta in itertools.product(*(range(a + 1) for a in alpha)):
        A = np.eye(m)
        for l, b in enumerate(beta):
            if b:
                A = A @ _mat_power(Lq[l], b)
        B = np.eye(m)
        for l, (a, b) in enumerate(zip(alpha, beta)):
            if a - b:
                B = B @ _mat_power(Lp[l], a - b)
        out += index_binom(alpha, beta) * (A @ B)
    return out


def star_power(q: SlicePoint, p: SlicePoint, alpha) -> np.ndarray:
    """(q - p)^{*alpha} for q = x + yK and p on the slice of I.

    Expanding L_q^beta with K^2 = -1 gives U + K V with U, V in span{1, I};
    matching K = +-I yields

        (q - p)^{*alpha} = (1 - KI)/2 P_+ + (1 + KI)/2 P_-,

    where P_+- is the classical power prod_l (x_l +- y_l i - p_l)^{alpha_l}
    realized as u + vI.  This equals ``star_power_binomial`` exactly.
    """
    alpha = as_index(alpha)
    if q.d != p.d or len(alpha) != q.d:
        raise DimensionError("q, p and alpha must share d")
    I, K = p.I, q.I
    zp = p.x + 1j * p.y
    Pp = _complex_power_operator(q.x + 1j * q.y - zp, alpha, I)
    Pm = _complex_power_operator(q.x - 1j * q.y - zp, alpha, I)
    KI = K.mat @ I.mat
    one = np.eye(I.dim)
    return 0.5 * (one - KI) @ Pp + 0.5 * (one + KI) @ Pm


def _complex_power_operator(w: np.ndarray, alpha, I: ComplexStructure) -> np.ndarray:
    """prod_l w_l^{alpha_l} realized as u + vI."""
    c = complex(np.prod(np.asarray(w, complex) ** np.asarray(alpha)))
    return c.real * np.eye(I.dim) + c.imag * I.mat


def star_power_bound(q: SlicePoint, p: SlicePoint, alpha, a) -> float:
    """(|J| |I| + 1) max_{r = x0 +- y0 I} |(r - p)^{*alpha} a| with operator norms.

    Here p lies on the slice of I = p.I and q = x0 + y0 J.
    """
    alpha = as_index(alpha)
    a = np.asarray(a, float)
    I, J = p.I, q.I
    best = 0.0
    for sgn in (1.0, -1.0):
        r = SlicePoint(q.x, sgn * q.y, I)
        best = max(best, float(np.linalg.norm(star_power(r, p, alpha) @ a)))
    return (J.op_norm() * I.op_norm() + 1.0) * best


def rotation_norm_bound(I: ComplexStructure) -> float:
    """K_I >= max_theta |cos theta + sin theta I|_2; exactly 1 for orthogonal I."""
    M = I.mat
    if np.allclose(M.T @ M, np.eye(I.dim), atol=1e-12):
        return 1.0
    return float(np.sqrt(1.0 + I.op_norm() ** 2))


# ---------------------------------------------------------------------------
# derivatives


def _scale(x, y) -> float:
    return max(1.0, float(np.max(np.abs(np.concatenate([np.atleast_1d(x), np.atleast_1d(y)])))))


def _check_margin(f, I, x, y, reach: float, dirs: Sequence[int], imag: bool):
    if f.domain is None:
        return
    pts_x, pts_y = [], []
    for l in dirs:
        e = np.zeros(f.d)
        e[l] = reach
        for s in (1.0, -1.0):
            pts_x.append(x + s * e)
            pts_y.append(y)
            if imag:
                pts_x.append(x)
                pts_y.append(y + s * e)
    inside = f.domain.contains_xy(np.array(pts_x), np.array(pts_y), I)
    if not np.all(inside):
        raise StepSizeError("the finite-difference stencil leaves the domain; reduce h")


def _point_on(point: SlicePoint, I: ComplexStructure) -> np.ndarray:
    y = point.coords_on(I)
    if y is None:
        raise DomainError("the point does not lie on the slice of I")
    return y


def islice_derivative(f, I: ComplexStructure, ell: int, point: SlicePoint, h: float | None = None) -> np.ndarray:
    """d_{I,ell} f = 1/2 (d/dx_ell - I d/dy_ell) f_I by central differences
    with one Richardson step."""
    x = np.asarray(point.x, float)
    y = _point_on(point, I)
    h = 1e-5 * _scale(x, y) if h is None else float(h)
    if not h > 0:
        raise StepSizeError("step must be positive")
    _check_margin(f, I, x, y, 2 * h, [ell], imag=True)
    e = np.zeros(f.d)
    e[ell] = 1.0

    def cd(step):
        pts_x = np.array([x + step * e, x - step * e, x, x])
        pts_y = np.array([y, y, y + step * e, y - step * e])
        v = f.on_slice(I, pts_x, pts_y, False)
        return (v[0] - v[1]) / (2 * step), (v[2] - v[3]) / (2 * step)

    dx1, dy1 = cd(h)
    dx2, dy2 = cd(h / 2)
    dx = (4 * dx2 - dx1) / 3
    dy = (4 * dy2 - dy1) / 3
    return 0.5 * (dx - I.mat @ dy)


def slice_derivative(f, ell: int, point: SlicePoint, h: float | None = None) -> np.ndarray:
    """d/dx_ell at fixed imaginary part, on the slice carrying the point."""
    x = np.asarray(point.x, float)
    y = np.asarray(point.y, float)
    I = point.I
    h = 1e-5 * _scale(x, y) if h is None else float(h)
    if not h > 0:
        raise StepSizeError("step must be positive")
    _check_margin(f, I, x, y, 2 * h, [ell], imag=False)
    e = np.zeros(f.d)
    e[ell] = 1.0

    def cd(step):
        v = f.on_slice(I, np.array([x + step * e, x - step * e]), np.array([y, y]), False)
        return (v[0] - v[1]) / (2 * step)

    return (4 * cd(h / 2) - cd(h)) / 3


def _tensor_derivative(f, I, x, y, orders_x, orders_y, h, accuracy):
    """Mixed partial prod_l d^{ax_l}/dx_l d^{ay_l}/dy_l of f_I by tensor
    product stencils."""
    stencils = []
    for l in range(f.d):
        stencils.append(("x", l) + central_stencil(orders_x[l], accuracy))
        stencils.append(("y", l) + central_stencil(orders_y[l], accuracy))
    offs = [s[2] for s in stencils]
    wts = [s[3] for s in stencils]
    grid = list(itertools.product(*[range(len(o)) for o in offs]))
    X = np.empty((len(grid), f.d))
    Y = np.empty((len(grid), f.d))
    W = np.empty(len(grid))
    for row, idx in enumerate(grid):
        xx = x.copy()
        yy = y.copy()
        w = 1.0
        for (axis, l, _, _), k, o, ww in zip(stencils, idx, offs, wts):
            if axis == "x":
                xx[l] += o[k] * h
            else:
                yy[l] += o[k] * h
            w *= ww[k]
        X[row], Y[row], W[row] = xx, yy, w
    vals = f.on_slice(I, X, Y, False)
    total_order = sum(orders_x) + sum(orders_y)
    return (W @ vals) / h ** total_order, float(np.max(np.abs(np.concatenate([X - x, Y - y]))))


def islice_derivative_alpha(f, I: ComplexStructure, alpha, point: SlicePoint, h: float = 5e-2,
                            accuracy: int = 8) -> np.ndarray:
    """f^{(I, alpha)}: the operators d_{I,ell} applied alpha_ell times.

    Expands prod_l (1/2 (D_x - I D_y))^{alpha_l} into mixed partials and
    evaluates each with tensor Fornberg stencils.
    """
    alpha = as_index(alpha)
    x = np.asarray(point.x, float)
    y = _point_on(point, I)
    if len(alpha) != f.d:
        raise DimensionError("alpha must have length d")
    m = I.dim
    out = np.zeros(m)
    reach = 0.0
    # choose k_l powers of D_y in coordinate l
    for ks in itertools.product(*(range(a + 1) for a in alpha)):
        coef = math.prod(math.comb(a, k) for a, k in zip(alpha, ks)) / 2.0 ** sum(alpha)
        ky = sum(ks)
        ox = [a - k for a, k in zip(alpha, ks)]
        val, r = _tensor_derivative(f, I, x, y, ox, list(ks), h, accuracy)
        reach = max(reach, r)
        # (-I)^ky
        P = _mat_power(-I.mat, ky)
        out += coef * (P @ val)
    if f.domain is not None:
        _check_margin(f, I, x, y, reach, range(f.d), imag=True)
    return out


def slice_derivative_alpha(f, alpha, point: SlicePoint, h: float = 5e-2, accuracy: int = 8) -> np.ndarray:
    """f^{(alpha)}: iterated real-directional derivatives at fixed imaginary part."""
    alpha = as_index(alpha)
    x = np.asarray(point.x, float)
    y = np.asarray(point.y, float)
    if len(alpha) != f.d:
        raise DimensionError("alpha must have length d")
    val, reach = _tensor_derivative(f, point.I, x, y, list(alpha), [0] * f.d, h, accuracy)
    if f.domain is not None:
        _check_margin(f, point.I, x, y, reach, range(f.d), imag=False)
    return val


# ---------------------------------------------------------------------------
# sigma-polydiscs


@dataclass(frozen=True)
class PolydiscSpec:
    """P~(z, r) around the center z on the slice of center.I.

    ``sigma_variant="sigma"`` adds the full polydisc on the center's own
    slice (the natural domain of Taylor series); ``"lens"`` is the bare set
    {x + yJ : x +- yI in P_I(z, r)}.  Radii may be +inf.
    """

    center: SlicePoint
    radius: np.ndarray
    sigma_variant: str = "sigma"

    def __post_init__(self):
        r = np.broadcast_to(np.asarray(self.radius, float), (self.center.d,)).copy()
        if np.any(~(r > 0)):
            raise RadiusError("radii must be positive (+inf allowed)")
        if self.sigma_variant not in ("sigma", "lens"):
            raise InvalidInputError("sigma_variant must be 'sigma' or 'lens'")
        object.__setattr__(self, "radius", r)

    @property
    def z(self) -> np.ndarray:
        return self.center.complex()

    def ratios(self, q: SlicePoint) -> tuple[np.ndarray, np.ndarray]:
        """|x +- y i - z| / r per coordinate, in the coordinates of center.I."""
        zq = np.asarray(q.x, float) + 1j * np.asarray(q.y, float)
        r = self.radius
        with np.errstate(invalid="ignore"):
            tp = np.where(np.isinf(r), 0.0, np.abs(zq - self.z) / r)
            tm = np.where(np.isinf(r), 0.0, np.abs(np.conj(zq) - self.z) / r)
        return tp, tm

    def own_slice(self, q: SlicePoint):
        """Coordinates of q on the center's slice, or None."""
        if self.center.is_real and self.sigma_variant == "sigma":
            return None
        return q.coords_on(self.center.I)


def sigma_polydisc_contains(spec: PolydiscSpec, q: SlicePoint) -> bool:
    if q.d != spec.center.d:
        raise DimensionError("point and polydisc differ in d")
    tp, tm = spec.ratios(q)
    if np.all(tp < 1) and np.all(tm < 1):
        return True
    if spec.sigma_variant == "sigma":
        y = q.coords_on(spec.center.I)
        if y is not None:
            w = SlicePoint(q.x, y, spec.center.I)
            t, _ = spec.ratios(w)
            return bool(np.all(t < 1))
    return False


# ---------------------------------------------------------------------------
# Taylor series


@dataclass
class TaylorSeries:
    """Coefficients f^{(alpha)}(q0)/alpha! for |alpha| <= max_order.

    ``errors`` holds, per alpha, the change of the coefficient when the
    quadrature is refined from ``nodes`` to ``2 nodes`` per circle, an
    a-posteriori estimate of the aliasing error.
    """

    center: SlicePoint
    coefficients: dict
    max_order: int
    rho: np.ndarray  # Cauchy radii, also the radii of the sigma-polydisc
    sup_norm: float  # max |f| sampled on the Cauchy torus
    errors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def I(self) -> ComplexStructure:
        return self.center.I

    @property
    def d(self) -> int:
        return self.center.d

    def polydisc(self) -> PolydiscSpec:
        return PolydiscSpec(self.center, self.rho)

    def to_json(self) -> dict:
        return {"center": {"x": self.center.x.tolist(), "y": self.center.y.tolist()},
                "max_order": self.max_order, "rho": self.rho.tolist(), "sup_norm": self.sup_norm,
                "coefficients": [{"alpha": list(a), "value": v.tolist()}
                                 for a, v in sorted(self.coefficients.items(), key=lambda kv: (sum(kv[0]), kv[0]))]}


def _torus_points(z0, rho, nodes):
    d = len(z0)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    grids = np.meshgrid(*([theta] * d), indexing="ij")
    TH = np.stack([g.ravel() for g in grids], axis=-1)  # (nodes^d, d)
    Z = z0[None, :] + rho[None, :] * np.exp(1j * TH)
    return Z.real, Z.imag, TH


def _torus_inside(f, I, z0, rho, nodes) -> bool:
    if f.domain is None:
        return True
    X, Y = _torus_points(z0, rho, min(nodes, 64))[:2]
    return bool(np.all(f.domain.contains_xy(X, Y, I)))


def _default_radius(f, I, z0, nodes) -> np.ndarray:
    d = len(z0)
    if f.domain is None:
        return np.full(d, 0.5)
    for rho in 0.9 * 0.8 ** np.arange(40):
        if _torus_inside(f, I, z0, np.full(d, rho), nodes):
            # keep a margin inside the largest admissible torus
            return np.full(d, 0.8 * rho)
    return np.full(d, 0.0)


def _cauchy(vals, Iv, TH, rho, alphas):
    out = {}
    for alpha in alphas:
        a = np.asarray(alpha, float)
        phase = TH @ a
        c = (np.cos(phase) @ vals - np.sin(phase) @ Iv) / len(TH)
        out[alpha] = c / float(np.prod(rho ** a))
    return out


def taylor_coefficients(f, q0: SlicePoint, N: int, rho=None, nodes: int = 64) -> TaylorSeries:
    """Coefficients f^{(alpha)}(q0)/alpha! by the Cauchy integral on a torus
    around q0 in its own slice, trapezoid rule with ``nodes`` per circle.

    The complex factor e^{-i alpha theta} acts as cos - sin I.  The samples
    are taken on the twice finer torus; its even nodes give the returned
    coefficients and the difference gives the error estimate.
    """
    if N < 0:
        raise InvalidInputError("order must be >= 0")
    if N >= nodes:
        raise InvalidInputError("need more quadrature nodes than the order")
    I = q0.I
    z0 = q0.complex()
    d = q0.d
    rho = _default_radius(f, I, z0, nodes) if rho is None else np.broadcast_to(np.asarray(rho, float), (d,)).copy()
    if np.any(rho < 1e-3) or np.any(~np.isfinite(rho)):
        raise RadiusError("center too close to the boundary for a Cauchy torus")
    if not _torus_inside(f, I, z0, rho, 2 * nodes):
        raise RadiusError("Cauchy torus leaves the domain")
    X, Y, TH = _torus_points(z0, rho, 2 * nodes)
    vals = f.on_slice(I, X, Y, False)  # (M, 2n)
    Iv = vals @ I.mat.T
    even = np.all(np.arange(2 * nodes)[np.indices((2 * nodes,) * d).reshape(d, -1).T] % 2 == 0, axis=1)
    alphas = multi_indices(d, N)
    coarse = _cauchy(vals[even], Iv[even], TH[even], rho, alphas)
    fine = _cauchy(vals, Iv, TH, rho, alphas)
    errors = {a: float(np.linalg.norm(coarse[a] - fine[a])) for a in alphas}
    sup = float(np.max(np.linalg.norm(vals, axis=-1)))
    return TaylorSeries(q0, coarse, int(N), rho, sup, errors, {"nodes": nodes})


@dataclass(frozen=True)
class TaylorValue:
    value: np.ndarray
    tail: float


def taylor_eval(series: TaylorSeries, q: SlicePoint, N: int | None = None) -> TaylorValue:
    """sum_{|alpha| <= N} (q - q0)^{*alpha} c_alpha with an error estimate.

    Truncation: (|J||I| + 1) K_I^2 M sum_{|alpha| > N} (t+^alpha + t-^alpha),
    t+- = |x +- yI - z0| / rho, from Cauchy estimates |c_alpha| <= K_I M rho^-alpha
    and the two-slice bound on star powers.  On the center's own slice the
    classical K_I^2 M sum t^alpha is used.  Added to it are the quadrature
    estimates of the coefficients and a rounding allowance, each propagated
    through the same star-power bound.
    """
    N = series.max_order if N is None else int(N)
    if N > series.max_order:
        raise InvalidInputError("requested order exceeds the stored order")
    spec = series.polydisc()
    if not sigma_polydisc_contains(spec, q):
        raise ConvergenceDomainError("point outside the sigma-polydisc of convergence")
    I, q0 = series.I, series.center
    K = rotation_norm_bound(I)
    y_own = None if q0.is_real else q.coords_on(I)
    m = I.dim
    alphas = multi_indices(series.d, N)
    value = np.zeros(m)
    for alpha in alphas:
        value += star_power(q, q0, alpha) @ series.coefficients[alpha]
    if y_own is not None:
        ts = [spec.ratios(SlicePoint(q.x, y_own, I))[0]]
        factor = K
    else:
        ts = list(spec.ratios(q))
        factor = (q.I.op_norm() * I.op_norm() + 1.0) * K
    trunc = factor * K * series.sup_norm * sum(tail_sum(t, N) for t in ts)
    # over all stored coefficients, so the estimate is monotone in N
    quad = 0.0
    head = 0.0
    for alpha in multi_indices(series.d, series.max_order):
        a = np.asarray(alpha)
        # |w|^alpha = t^alpha rho^alpha
        w = max(float(np.prod(t ** a)) for t in ts) * float(np.prod(series.rho ** a))
        quad += series.errors.get(alpha, 0.0) * w
        head += float(np.linalg.norm(series.coefficients[alpha])) * w
    rounding = 64 * np.finfo(float).eps * (factor * head + series.sup_norm)
    return TaylorValue(value, float(trunc + factor * quad + rounding))
