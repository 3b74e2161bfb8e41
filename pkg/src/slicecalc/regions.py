"""Planar regions in C^d and slice-by-slice set descriptors.

A region is an open subset of C^d tested by an exact predicate on arrays of
real parts ``x`` and imaginary parts ``y`` (shape ``(..., d)``).  Regions
combine with ``|``, ``&``, ``-`` and ``~``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .algebra import AlgebraSpec, ComplexStructure, MATCH_TOL, SlicePoint
from .errors import DimensionError, InvalidInputError


def _xy(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.ndim == 0:
        x = x[None]
        y = y[None]
    return x, y


class Region:
    """Base class.  Subclasses implement ``contains`` and ``bounds``."""

    d: int = 1

    def contains(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def contains_complex(self, z) -> np.ndarray:
        z = np.asarray(z, complex)
        if z.ndim == 0 or (z.ndim == 1 and self.d > 1):
            z = z[None]
        if z.ndim == 1:
            z = z[:, None]
        return self.contains(z.real, z.imag)

    def bounds(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(x_lo, x_hi, y_lo, y_hi), each of shape (d,); may be infinite."""
        inf = np.full(self.d, np.inf)
        return -inf, inf, -inf, inf

    def to_json(self) -> dict:
        raise InvalidInputError(f"{type(self).__name__} is not serializable")

    def __or__(self, other):
        return Union((self, other))

    def __and__(self, other):
        return Intersection((self, other))

    def __sub__(self, other):
        return Difference(self, other)

    def __invert__(self):
        return Complement(self)

    def conjugate(self) -> "Region":
        return Conjugate(self)


def _last(arr, d):
    """Reduce a boolean array (..., d) over its last axis with ``all``."""
    return np.all(arr, axis=-1)


@dataclass(frozen=True, eq=False)
class Polydisc(Region):
    """Open polydisc {w : |w_l - c_l| < r_l for every l}; r_l may be +inf."""

    center: np.ndarray
    radius: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, complex))
        r = np.broadcast_to(np.asarray(self.radius, float), c.shape).copy()
        if np.any(r <= 0):
            raise InvalidInputError("polydisc radii must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def d(self):
        return len(self.center)

    def contains(self, x, y):
        x, y = _xy(x, y)
        dist = np.hypot(x - self.center.real, y - self.center.imag)
        return _last(dist < self.radius, self.d)

    def bounds(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def to_json(self):
        return {"type": "polydisc", "center_re": self.center.real.tolist(),
                "center_im": self.center.imag.tolist(), "radius": self.radius.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(Region):
    """Open Euclidean ball in C^d = R^{2d}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, complex)))
        if not self.radius > 0:
            raise InvalidInputError("ball radius must be positive")

    @property
    def d(self):
        return len(self.center)

    def contains(self, x, y):
        x, y = _xy(x, y)
        sq = (x - self.center.real) ** 2 + (y - self.center.imag) ** 2
        return np.sum(sq, axis=-1) < self.radius ** 2

    def bounds(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def to_json(self):
        return {"type": "ball", "center_re": self.center.real.tolist(),
                "center_im": self.center.imag.tolist(), "radius": float(self.radius)}


@dataclass(frozen=True, eq=False)
class Ellipse(Region):
    """Open axis-aligned ellipse in coordinate ``coord``, no constraint elsewhere."""

    center: complex
    semi_x: float
    semi_y: float
    coord: int = 0
    dim: int = 1

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, y = _xy(x, y)
        u = (x[..., self.coord] - self.center.real) / self.semi_x
        v = (y[..., self.coord] - self.center.imag) / self.semi_y
        return u * u + v * v < 1.0

    def bounds(self):
        lo_x, hi_x, lo_y, hi_y = Region.bounds(self)
        c = complex(self.center)
        lo_x[self.coord], hi_x[self.coord] = c.real - self.semi_x, c.real + self.semi_x
        lo_y[self.coord], hi_y[self.coord] = c.imag - self.semi_y, c.imag + self.semi_y
        return lo_x, hi_x, lo_y, hi_y

    def to_json(self):
        c = complex(self.center)
        return {"type": "ellipse", "center_re": c.real, "center_im": c.imag,
                "semi_x": self.semi_x, "semi_y": self.semi_y, "coord": self.coord, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class HalfPlane(Region):
    """Open half-plane a_x x + a_y y > c in coordinate ``coord``."""

    a_x: float
    a_y: float
    c: float = 0.0
    coord: int = 0
    dim: int = 1

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, y = _xy(x, y)
        return self.a_x * x[..., self.coord] + self.a_y * y[..., self.coord] > self.c

    def to_json(self):
        return {"type": "halfplane", "a_x": self.a_x, "a_y": self.a_y, "c": self.c,
                "coord": self.coord, "dim": self.dim}


def upper_half_plane(coord: int = 0, dim: int = 1) -> HalfPlane:
    return HalfPlane(0.0, 1.0, 0.0, coord, dim)


@dataclass(frozen=True, eq=False)
class Polyline:
    """Piecewise-linear curve through ``vertices``; with ``ray`` set, the last
    segment continues to infinity."""

    vertices: np.ndarray
    ray: bool = False

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.vertices, complex))
        if len(v) < 2:
            raise InvalidInputError("a polyline needs at least two vertices")
        object.__setattr__(self, "vertices", v)

    def segments(self):
        v = self.vertices
        return list(zip(v[:-1], v[1:]))

    def distance(self, z) -> np.ndarray:
        z = np.asarray(z, complex)
        best = np.full(z.shape, np.inf)
        segs = self.segments()
        for k, (a, b) in enumerate(segs):
            ab = b - a
            t = ((z - a) * np.conj(ab)).real / abs(ab) ** 2
            hi = np.inf if (self.ray and k == len(segs) - 1) else 1.0
            t = np.clip(t, 0.0, hi)
            best = np.minimum(best, np.abs(z - (a + t * ab)))
        return best


@dataclass(frozen=True, eq=False)
class CutComplement(Region):
    """C minus a cut curve (in coordinate ``coord``).  Points within ``tol``
    of the curve count as on the cut."""

    curve: Polyline
    tol: float = 1e-12
    coord: int = 0
    dim: int = 1

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, y = _xy(x, y)
        z = x[..., self.coord] + 1j * y[..., self.coord]
        return self.curve.distance(z) > self.tol

    def to_json(self):
        v = self.curve.vertices
        return {"type": "cut", "re": v.real.tolist(), "im": v.imag.tolist(),
                "ray": self.curve.ray, "coord": self.coord, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Everything(Region):
    dim: int = 1

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, _ = _xy(x, y)
        return np.ones(x.shape[:-1], bool)

    def to_json(self):
        return {"type": "all", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Nothing(Region):
    dim: int = 1

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, _ = _xy(x, y)
        return np.zeros(x.shape[:-1], bool)

    def bounds(self):
        z = np.zeros(self.dim)
        return z, z, z, z

    def to_json(self):
        return {"type": "empty", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class PredicateRegion(Region):
    """Region given by an arbitrary vectorized predicate ``fn(x, y)``."""

    fn: Callable
    dim: int = 1
    box: tuple | None = None

    @property
    def d(self):
        return self.dim

    def contains(self, x, y):
        x, y = _xy(x, y)
        return np.asarray(self.fn(x, y), bool)

    def bounds(self):
        if self.box is None:
            return Region.bounds(self)
        return tuple(np.broadcast_to(np.asarray(b, float), (self.dim,)).copy() for b in self.box)


@dataclass(frozen=True, eq=False)
class Union(Region):
    parts: tuple

    @property
    def d(self):
        return self.parts[0].d

    def contains(self, x, y):
        out = self.parts[0].contains(x, y)
        for p in self.parts[1:]:
            out = out | p.contains(x, y)
        return out

    def bounds(self):
        bs = [p.bounds() for p in self.parts if not isinstance(p, Nothing)]
        if not bs:
            return Nothing(self.d).bounds()
        return (np.min([b[0] for b in bs], 0), np.max([b[1] for b in bs], 0),
                np.min([b[2] for b in bs], 0), np.max([b[3] for b in bs], 0))

    def to_json(self):
        return {"type": "union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Intersection(Region):
    parts: tuple

    @property
    def d(self):
        return self.parts[0].d

    def contains(self, x, y):
        out = self.parts[0].contains(x, y)
        for p in self.parts[1:]:
            out = out & p.contains(x, y)
        return out

    def bounds(self):
        bs = [p.bounds() for p in self.parts]
        return (np.max([b[0] for b in bs], 0), np.min([b[1] for b in bs], 0),
                np.max([b[2] for b in bs], 0), np.min([b[3] for b in bs], 0))

    def to_json(self):
        return {"type": "intersection", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Difference(Region):
    base: Region
    removed: Region

    @property
    def d(self):
        return self.base.d

    def contains(self, x, y):
        return self.base.contains(x, y) & ~self.removed.contains(x, y)

    def bounds(self):
        return self.base.bounds()

    def to_json(self):
        return {"type": "difference", "base": self.base.to_json(), "removed": self.removed.to_json()}


@dataclass(frozen=True, eq=False)
class Complement(Region):
    base: Region

    @property
    def d(self):
        return self.base.d

    def contains(self, x, y):
        return ~self.base.contains(x, y)

    def to_json(self):
        return {"type": "complement", "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class Conjugate(Region):
    """Mirror image {conj(w) : w in base}."""

    base: Region

    @property
    def d(self):
        return self.base.d

    def contains(self, x, y):
        x, y = _xy(x, y)
        return self.base.contains(x, -y)

    def bounds(self):
        a, b, c, e = self.base.bounds()
        return a, b, -e, -c

    def conjugate(self):
        return self.base

    def to_json(self):
        return {"type": "conjugate", "base": self.base.to_json()}


def region_from_json(obj: dict) -> Region:
    kind = obj.get("type")
    try:
        if kind == "polydisc":
            c = np.asarray(obj["center_re"], float) + 1j * np.asarray(obj["center_im"], float)
            return Polydisc(c, np.asarray(obj["radius"], float))
        if kind == "ball":
            c = np.asarray(obj["center_re"], float) + 1j * np.asarray(obj["center_im"], float)
            return Ball(c, float(obj["radius"]))
        if kind == "ellipse":
            return Ellipse(complex(obj["center_re"], obj["center_im"]), obj["semi_x"], obj["semi_y"],
                           obj.get("coord", 0), obj.get("dim", 1))
        if kind == "halfplane":
            return HalfPlane(obj["a_x"], obj["a_y"], obj.get("c", 0.0), obj.get("coord", 0), obj.get("dim", 1))
        if kind == "cut":
            v = np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float)
            return CutComplement(Polyline(v, bool(obj.get("ray", False))), coord=obj.get("coord", 0),
                                 dim=obj.get("dim", 1))
        if kind == "all":
            return Everything(obj.get("dim", 1))
        if kind == "empty":
            return Nothing(obj.get("dim", 1))
        if kind == "union":
            return Union(tuple(region_from_json(p) for p in obj["parts"]))
        if kind == "intersection":
            return Intersection(tuple(region_from_json(p) for p in obj["parts"]))
        if kind == "difference":
            return Difference(region_from_json(obj["base"]), region_from_json(obj["removed"]))
        if kind == "complement":
            return Complement(region_from_json(obj["base"]))
        if kind == "conjugate":
            return Conjugate(region_from_json(obj["base"]))
    except KeyError as exc:
        raise InvalidInputError(f"region JSON missing field {exc}") from None
    raise InvalidInputError(f"unknown region type {kind!r}")


# ---------------------------------------------------------------------------
# grids and connected components


def finite_box(region: Region, fallback: float = 10.0, pad: float = 0.05):
    """Finite bounding box of ``region``; infinite sides get +-fallback."""
    lo_x, hi_x, lo_y, hi_y = (np.array(b, float) for b in region.bounds())
    lo_x = np.where(np.isfinite(lo_x), lo_x, -fallback)
    hi_x = np.where(np.isfinite(hi_x), hi_x, fallback)
    lo_y = np.where(np.isfinite(lo_y), lo_y, -fallback)
    hi_y = np.where(np.isfinite(hi_y), hi_y, fallback)
    span = np.maximum(hi_x - lo_x, hi_y - lo_y)
    return lo_x - pad * span, hi_x + pad * span, lo_y - pad * span, hi_y + pad * span


@dataclass
class SliceGrid:
    """Tensor grid over C^d with axes ordered (x_1..x_d, y_1..y_d).  Every y
    axis contains 0 so that the real trace is part of the grid."""

    x_axes: list
    y_axes: list
    mask: np.ndarray
    labels: np.ndarray
    count: int

    @property
    def d(self):
        return len(self.x_axes)

    def real_index(self):
        return tuple(int(np.flatnonzero(ax == 0.0)[0]) for ax in self.y_axes)

    def real_labels(self) -> np.ndarray:
        """Labels on the real subspace y = 0 (shape of the x grid)."""
        idx = (slice(None),) * self.d + self.real_index()
        return self.labels[idx]

    def label_at(self, x, y) -> int:
        ix = [int(np.argmin(np.abs(ax - v))) for ax, v in zip(self.x_axes, np.atleast_1d(x))]
        iy = [int(np.argmin(np.abs(ax - v))) for ax, v in zip(self.y_axes, np.atleast_1d(y))]
        return int(self.labels[tuple(ix + iy)])


def _axis_with_zero(lo, hi, m):
    lo, hi = min(lo, -1e-9), max(hi, 1e-9)
    h = (hi - lo) / max(m - 1, 1)
    k_lo = int(np.floor(lo / h))
    k_hi = int(np.ceil(hi / h))
    return np.arange(k_lo, k_hi + 1) * h


def label_region(region: Region, resolution: int = 201, box=None) -> SliceGrid:
    """Flood-fill connected components of ``region`` on a tensor grid.

    Face connectivity only, so diagonal touching does not merge components.
    The result is sampled evidence at the grid's resolution.
    """
    d = region.d
    lo_x, hi_x, lo_y, hi_y = box if box is not None else finite_box(region)
    per_axis = resolution if d == 1 else max(9, int(round(resolution ** (1.0 / d))))
    x_axes = [np.linspace(lo_x[l], hi_x[l], per_axis) for l in range(d)]
    y_axes = [_axis_with_zero(lo_y[l], hi_y[l], per_axis) for l in range(d)]
    mesh = np.meshgrid(*x_axes, *y_axes, indexing="ij")
    X = np.stack(mesh[:d], axis=-1)
    Y = np.stack(mesh[d:], axis=-1)
    mask = np.asarray(region.contains(X, Y), bool)
    labels, count = ndimage.label(mask)
    return SliceGrid(x_axes, y_axes, mask, labels, int(count))


# ---------------------------------------------------------------------------
# slice set descriptors


@dataclass(frozen=True, eq=False)
class SliceSetDescriptor:
    """Membership oracle for a subset of the slice cone W^d.

    ``per_slice(I)`` returns the region {x + yi : x + yI in the set}.  It is
    only ever called with canonically signed I; the opposite structure is
    handled through x + yI = x + (-y)(-I).  Real points are tested against
    ``real_trace`` when given, otherwise against ``per_slice`` of the
    structure they carry.
    """

    per_slice: Callable[[ComplexStructure], Region]
    d: int = 1
    axially_symmetric: bool = False
    real_trace: Region | None = None
    known_slices: tuple = ()
    name: str = "set"

    def region(self, I: ComplexStructure) -> Region:
        """Region of the slice through I, honoring the sign of I."""
        if I.sign() > 0:
            return self.per_slice(I)
        return Conjugate(self.per_slice(-I))

    def contains_xy(self, x, y, I: ComplexStructure) -> np.ndarray:
        x, y = _xy(x, y)
        if x.ndim == 1:
            x, y = x[None], y[None]
        out = np.asarray(self.region(I).contains(x, y), bool)
        if self.real_trace is not None:
            real = np.all(y == 0, axis=-1)
            if np.any(real):
                out = out.copy()
                out[real] = self.real_trace.contains(x[real], y[real])
        return out

    def contains(self, p: SlicePoint) -> bool:
        if p.d != self.d:
            raise DimensionError(f"point has d={p.d}, set has d={self.d}")
        return bool(self.contains_xy(p.x, p.y, p.I)[0])

    def contains_real(self, x, I: ComplexStructure | None = None) -> np.ndarray:
        x = np.asarray(x, float)
        if x.ndim == 1 and self.d > 1:
            x = x[None]
        if x.ndim == 1:
            x = x[:, None]
        y = np.zeros_like(x)
        if self.real_trace is not None:
            return self.real_trace.contains(x, y)
        if I is None:
            if not self.known_slices:
                raise InvalidInputError("real trace needs a structure or an explicit real_trace")
            I = self.known_slices[0]
        return self.region(I).contains(x, y)

    # -- constructors ------------------------------------------------------

    @classmethod
    def axial(cls, region: Region, name: str = "axial") -> "SliceSetDescriptor":
        """Axially symmetric set with the same (conjugation symmetric) region
        on every slice."""
        return cls(lambda I: region, d=region.d, axially_symmetric=True,
                   real_trace=region, name=name)

    @classmethod
    def from_slices(cls, pieces: Sequence[tuple[ComplexStructure, Region]], default: Region | None = None,
                    name: str = "slices") -> "SliceSetDescriptor":
        """Set given on finitely many slices (and optionally ``default`` elsewhere).

        A slice listed as I contributes its conjugate on -I.  Real points
        belong to the set when they lie in any listed region.
        """
        pieces = [(T, R) for T, R in pieces]
        if not pieces:
            raise InvalidInputError("from_slices needs at least one slice")
        d = pieces[0][1].d
        canon = []
        for T, R in pieces:
            canon.append((T, R) if T.sign() > 0 else (-T, Conjugate(R)))

        def per_slice(I):
            found = [R for T, R in canon if T.matches(I, MATCH_TOL)]
            if default is not None:
                found.append(default)
            if not found:
                return Nothing(d)
            return found[0] if len(found) == 1 else Union(tuple(found))

        parts = [R for _, R in canon] + ([default] if default is not None else [])
        trace = parts[0] if len(parts) == 1 else Union(tuple(parts))
        return cls(per_slice, d=d, real_trace=trace, known_slices=tuple(T for T, _ in canon), name=name)

    @classmethod
    def from_ambient(cls, predicate: Callable[[np.ndarray], np.ndarray], spec: AlgebraSpec,
                     box=None, name: str = "ambient") -> "SliceSetDescriptor":
        """Subset of the algebra (d = 1) given by a predicate on elements.

        ``predicate`` receives an array of shape (m, dim) of coordinates.
        """
        one = spec.one()

        def per_slice(I):
            u = I.mat @ one

            def fn(x, y):
                pts = x[..., 0, None] * one + y[..., 0, None] * u
                flat = pts.reshape(-1, spec.dim)
                return np.asarray(predicate(flat), bool).reshape(pts.shape[:-1])

            return PredicateRegion(fn, 1, box)

        def trace_fn(x, y):
            pts = x[..., 0, None] * one
            flat = pts.reshape(-1, spec.dim)
            return np.asarray(predicate(flat), bool).reshape(pts.shape[:-1])

        return cls(per_slice, d=1, real_trace=PredicateRegion(trace_fn, 1, box), name=name)
