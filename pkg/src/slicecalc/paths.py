"""Paths in C^d, their lifts to slices, stem functions and slice functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .algebra import AlgebraSpec, ComplexStructure, SlicePoint
from .errors import DimensionError, DomainError, InvalidInputError, InvalidStructureError
from .regions import Region, SliceSetDescriptor
from .representation import one_i, two_slice_inverse


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True, eq=False)
class PlanePath:
    """Piecewise-linear path t -> gamma(t) in C^d starting on R^d."""

    t: np.ndarray
    samples: np.ndarray  # complex, shape (m, d)
    in_upper: bool = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.t, float)
        z = np.asarray(self.samples, complex)
        if z.ndim == 1:
            z = z[:, None]
        if t.ndim != 1 or len(t) != len(z) or len(t) < 2:
            raise InvalidInputError("need matching t-grid and samples (at least two)")
        if abs(t[0]) > 1e-12 or abs(t[-1] - 1.0) > 1e-12 or np.any(np.diff(t) <= 0):
            raise InvalidInputError("t-grid must increase strictly from 0 to 1")
        if np.any(np.abs(z[0].imag) > 1e-12):
            raise InvalidInputError("a path must start on R^d")
        t.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "in_upper", bool(np.all(z[1:].imag > 0)))

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def at(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, float))
        re = np.stack([np.interp(s, self.t, self.samples[:, l].real) for l in range(self.d)], -1)
        im = np.stack([np.interp(s, self.t, self.samples[:, l].imag) for l in range(self.d)], -1)
        return re + 1j * im

    def refined(self) -> np.ndarray:
        """Samples together with segment midpoints, in order."""
        mids = 0.5 * (self.samples[1:] + self.samples[:-1])
        out = np.empty((2 * len(self.samples) - 1, self.d), complex)
        out[0::2] = self.samples
        out[1::2] = mids
        return out

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.samples, axis=0), axis=1)))

    @classmethod
    def segment(cls, end, start=None, m: int = 33) -> "PlanePath":
        """Straight path from ``start`` (default Re(end)) to ``end``."""
        end = np.atleast_1d(np.asarray(end, complex))
        start = end.real.astype(complex) if start is None else np.atleast_1d(np.asarray(start, complex))
        t = np.linspace(0.0, 1.0, m)
        return cls(t, start[None, :] + t[:, None] * (end - start)[None, :])

    @classmethod
    def from_function(cls, gamma: Callable, m: int = 65) -> "PlanePath":
        t = np.linspace(0.0, 1.0, m)
        return cls(t, np.array([np.atleast_1d(gamma(s)) for s in t], complex))

    def to_json(self) -> list:
        return [[float(s), z.real.tolist(), z.imag.tolist()] for s, z in zip(self.t, self.samples)]

    @classmethod
    def from_json(cls, obj) -> "PlanePath":
        try:
            t = [row[0] for row in obj]
            z = [np.asarray(row[1], float) + 1j * np.asarray(row[2], float) for row in obj]
        except (TypeError, IndexError) as exc:
            raise InvalidInputError(f"malformed path JSON: {exc}") from None
        return cls(t, np.array(z))


@dataclass(frozen=True, eq=False)
class LiftedPath:
    """gamma^I: the samples x + yI of a path on the slice of I."""

    x: np.ndarray
    y: np.ndarray
    I: ComplexStructure
    t: np.ndarray

    def point(self, k: int) -> SlicePoint:
        return SlicePoint(self.x[k], self.y[k], self.I)

    def end(self) -> SlicePoint:
        return self.point(-1)

    def unlift(self) -> PlanePath:
        return PlanePath(self.t, self.x + 1j * self.y)


def lift_path(gamma: PlanePath, I: ComplexStructure) -> LiftedPath:
    z = gamma.samples
    return LiftedPath(z.real.copy(), z.imag.copy(), I, gamma.t)


def structures_containing(desc: SliceSetDescriptor, gamma: PlanePath,
                          candidates: Sequence[ComplexStructure]) -> list[ComplexStructure]:
    """Candidates I with gamma^I inside the set at every sample and midpoint."""
    z = gamma.refined()
    out = []
    for I in candidates:
        if np.all(desc.contains_xy(z.real, z.imag, I)):
            out.append(I)
    return out


# ---------------------------------------------------------------------------
# stems


@dataclass(frozen=True, eq=False)
class StemValue:
    """(F1, F2) in (R^{2n})^2; the slice value on I is F1 + I F2."""

    F1: np.ndarray
    F2: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.F1, float)
        b = np.asarray(self.F2, float)
        if a.shape != b.shape:
            raise DimensionError("stem components must have equal shape")
        object.__setattr__(self, "F1", a)
        object.__setattr__(self, "F2", b)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.F1, self.F2], axis=-1)

    @classmethod
    def from_vector(cls, v) -> "StemValue":
        v = np.asarray(v, float)
        h = v.shape[-1] // 2
        return cls(v[..., :h], v[..., h:])

    def evaluate(self, I: ComplexStructure) -> np.ndarray:
        return self.F1 + self.F2 @ I.mat.T


def eval_slice_function(F: Callable, p: SlicePoint, domain: Region | None = None) -> np.ndarray:
    """f(x + yI) = (1, I) F(x + yi) for a stem map ``F(x, y) -> StemValue``.

    ``domain`` is the stem domain Omega_s in C^d; points outside raise.
    """
    if domain is not None and not bool(np.atleast_1d(domain.contains(p.x[None], p.y[None]))[0]):
        raise DomainError("x + yi lies outside the stem domain")
    S = F(p.x, p.y)
    if not isinstance(S, StemValue):
        S = StemValue(*S)
    return S.evaluate(p.I)


def stem_from_two_slices(fJ, fK, J: ComplexStructure, K: ComplexStructure) -> StemValue:
    """Stem values from values on two slices: F = [[1, J], [1, K]]^{-1} (fJ; fK).

    ``fJ``, ``fK`` have shape (2n,) or (m, 2n) (values along gamma^J, gamma^K).
    """
    fJ = np.asarray(fJ, float)
    fK = np.asarray(fK, float)
    if fJ.shape != fK.shape or fJ.shape[-1] != J.dim:
        raise DimensionError("slice values must have matching shapes (..., 2n)")
    inv = two_slice_inverse(J, K)
    v = np.concatenate([fJ, fK], axis=-1) @ inv.T
    return StemValue.from_vector(v)


# ---------------------------------------------------------------------------
# slice functions


def _multi_indices(coeffs: Mapping) -> list[tuple[int, ...]]:
    return sorted((tuple(int(a) for a in np.atleast_1d(k)) for k in coeffs), key=lambda a: (sum(a), a))


class SliceFunctionData:
    """A function on (part of) the slice cone with values in R^{2n}.

    ``kind`` is one of ``stem-polynomial``, ``per-slice-callable`` or
    ``tabulated``.  Use the ``polynomial``, ``from_callable`` and
    ``tabulated`` constructors.  ``evaluate`` takes a SlicePoint; the
    vectorized ``on_slice(I, x, y)`` takes arrays of shape (m, d).
    """

    def __init__(self, kind: str, fn: Callable, d: int, dim: int, domain: SliceSetDescriptor | None = None,
                 meta: dict | None = None):
        if kind not in ("stem-polynomial", "per-slice-callable", "tabulated"):
            raise InvalidInputError(f"unknown slice function kind {kind!r}")
        self.kind = kind
        self._fn = fn
        self.d = d
        self.dim = dim
        self.domain = domain
        self.meta = meta or {}

    # -- evaluation --------------------------------------------------------

    def on_slice(self, I: ComplexStructure, x, y, check_domain: bool = True) -> np.ndarray:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        single = x.ndim == 1
        if single:
            x, y = x[None], y[None]
        if x.shape[-1] != self.d:
            raise DimensionError(f"expected points with d={self.d}")
        if check_domain and self.domain is not None:
            inside = self.domain.contains_xy(x, y, I)
            if not np.all(inside):
                raise DomainError("point outside the domain of the slice function")
        out = np.asarray(self._fn(I, x, y), float)
        return out[0] if single else out

    def evaluate(self, p: SlicePoint, check_domain: bool = True) -> np.ndarray:
        return self.on_slice(p.I, p.x, p.y, check_domain)

    __call__ = evaluate

    # -- Cauchy-Riemann ----------------------------------------------------

    def cr_residual(self, I: ComplexStructure, x, y, h: float | None = None) -> np.ndarray:
        """max_l |(d/dx_l + I d/dy_l) f| by central differences, per point."""
        x = np.atleast_2d(np.asarray(x, float))
        y = np.atleast_2d(np.asarray(y, float))
        scale = max(1.0, float(np.max(np.abs(np.concatenate([x, y], axis=-1)))))
        h = 1e-5 * scale if h is None else h
        res = np.zeros(len(x))
        for l in range(self.d):
            e = np.zeros(self.d)
            e[l] = h
            dx = (self.on_slice(I, x + e, y, False) - self.on_slice(I, x - e, y, False)) / (2 * h)
            dy = (self.on_slice(I, x, y + e, False) - self.on_slice(I, x, y - e, False)) / (2 * h)
            res = np.maximum(res, np.linalg.norm(dx + dy @ I.mat.T, axis=-1))
        return res

    def validate(self, structures: Sequence[ComplexStructure], x, y, tol: float = 1e-6) -> float:
        """Raise InvalidStructureError unless the CR residual on every given
        slice stays below ``tol * scale``.  Returns the worst residual."""
        x = np.atleast_2d(np.asarray(x, float))
        y = np.atleast_2d(np.asarray(y, float))
        worst = 0.0
        for I in structures:
            vals = self.on_slice(I, x, y, False)
            scale = max(1.0, float(np.max(np.linalg.norm(vals, axis=-1))))
            r = float(np.max(self.cr_residual(I, x, y))) / scale
            worst = max(worst, r)
            if r > tol:
                raise InvalidStructureError(f"CR residual {r:.2e} exceeds {tol:g} on a sampled slice")
        return worst

    # -- constructors ------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs: Mapping, dim: int, center=None, domain=None) -> "SliceFunctionData":
        """q -> sum_alpha (q - c)^{*alpha} a_alpha with a real center c.

        On the slice of I, (q - c)^{*alpha} acts as the complex number
        prod_l (z_l - c_l)^{alpha_l} realized as u + vI.
        """
        items = {tuple(int(a) for a in np.atleast_1d(k)): np.asarray(v, float) for k, v in coeffs.items()}
        if not items:
            raise InvalidInputError("empty coefficient map")
        d = len(next(iter(items)))
        c = np.zeros(d) if center is None else np.atleast_1d(np.asarray(center, float))
        keys = _multi_indices(items)
        A = np.array([items[k] for k in keys])
        powers = np.array(keys)

        def fn(I, x, y):
            z = (x - c) + 1j * y  # (m, d)
            w = np.prod(z[:, None, :] ** powers[None, :, :], axis=-1)  # (m, terms)
            u = w.real @ A
            v = w.imag @ A
            return u + v @ I.mat.T

        return cls("stem-polynomial", fn, d, dim, domain, {"coeffs": items, "center": c})

    @classmethod
    def from_callable(cls, fn: Callable, d: int, dim: int, domain=None) -> "SliceFunctionData":
        """``fn(I, x, y)`` with x, y of shape (m, d) returning (m, 2n)."""
        return cls("per-slice-callable", fn, d, dim, domain)

    @classmethod
    def from_stem(cls, F: Callable, d: int, dim: int, domain=None) -> "SliceFunctionData":
        """Slice function (1, I) F(x + yi) for ``F(x, y) -> (F1, F2)`` arrays."""

        def fn(I, x, y):
            F1, F2 = F(x, y)
            return np.asarray(F1, float) + np.asarray(F2, float) @ I.mat.T

        return cls("per-slice-callable", fn, d, dim, domain)

    @classmethod
    def from_complex(cls, g: Callable, a, d: int = 1, domain=None) -> "SliceFunctionData":
        """f(x + yI) = Re g(z) a + Im g(z) I a for holomorphic g: C^d -> C.

        Well defined on the cone when g(conj z) = conj g(z).
        """
        a = np.asarray(a, float)

        def fn(I, x, y):
            w = np.asarray(g(x + 1j * y), complex).reshape(len(x))
            return np.outer(w.real, a) + np.outer(w.imag, I.mat @ a)

        return cls("per-slice-callable", fn, d, len(a), domain)

    @classmethod
    def from_algebra(cls, fn: Callable, spec: AlgebraSpec, domain=None) -> "SliceFunctionData":
        """d = 1 function given on algebra elements, fn(q) -> element.

        The point x + yI is the element x 1 + y u with u = I 1.
        """
        one = spec.one()

        def call(I, x, y):
            u = I.mat @ one
            return np.array([fn(xx[0] * one + yy[0] * u) for xx, yy in zip(x, y)])

        return cls("per-slice-callable", call, 1, spec.dim, domain)

    @classmethod
    def tabulated(cls, tables: Sequence[tuple[ComplexStructure, np.ndarray, np.ndarray, np.ndarray]],
                  domain=None) -> "SliceFunctionData":
        """d = 1 values on grids: entries (I, x_axis, y_axis, values[nx, ny, 2n]).

        Values between grid nodes are interpolated linearly; the slice of -I
        reads the table of I at (x, -y).
        """
        interps = [(I, RegularGridInterpolator((np.asarray(xa, float), np.asarray(ya, float)),
                                               np.asarray(v, float), bounds_error=True))
                   for I, xa, ya, v in tables]
        dim = np.asarray(tables[0][3]).shape[-1]

        def fn(J, x, y):
            for I, interp in interps:
                s = I.same_slice(J)
                if s:
                    pts = np.stack([x[:, 0], s * y[:, 0]], axis=-1)
                    try:
                        return interp(pts)
                    except ValueError:
                        raise DomainError("point outside the tabulated grid") from None
            raise DomainError("no table for this slice")

        return cls("tabulated", fn, 1, dim, domain)


def is_path_slice(f: SliceFunctionData, gamma: PlanePath, probes: Sequence[ComplexStructure],
                  rtol: float = 1e-8) -> tuple[bool, StemValue]:
    """Least-squares fit of one stem value q with f(gamma^I(1)) = (1, I) q on
    every probe; path-slice evidence when the residual is below rtol * scale.
    """
    usable = list(probes)
    if f.domain is not None:
        usable = structures_containing(f.domain, gamma, usable)
    if len(usable) < 2:
        raise InvalidInputError("insufficient data: fewer than two usable probes")
    end = gamma.end
    A = np.vstack([one_i(I) for I in usable])
    b = np.concatenate([f.on_slice(I, end.real, end.imag, False) for I in usable])
    q, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.linalg.norm(A @ q - b))
    scale = max(1.0, float(np.linalg.norm(b)))
    return resid <= rtol * scale, StemValue.from_vector(q)


def representation_formula(fJ, fK, J: ComplexStructure, K: ComplexStructure, I: ComplexStructure) -> np.ndarray:
    """(J-K)^{-1}(J fJ - K fK) + I (J-K)^{-1}(fJ - fK), the two-slice formula."""
    M = np.linalg.inv(J.mat - K.mat)
    fJ = np.asarray(fJ, float)
    fK = np.asarray(fK, float)
    first = (fJ @ J.mat.T - fK @ K.mat.T) @ M.T
    second = (fJ - fK) @ M.T @ I.mat.T
    return first + second
