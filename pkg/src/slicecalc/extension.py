"""Derived sets of slice-open tuples and extension of slice-wise holomorphic data."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import ComplexStructure, SlicePoint
from .errors import DimensionError, DomainError, InvalidInputError, ConsistencyWarning
from .paths import SliceFunctionData
from .regions import (Conjugate, Intersection, Polydisc, PredicateRegion, Region, SliceGrid,
                      SliceSetDescriptor, finite_box, label_region)
from .representation import (StructureTuple, as_tuple, is_hyper_solution, is_slice_solution, kernel_membership,
                             one_i, slice_inverse, two_slice_inverse)

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SliceOpenTuple:
    """J = (J_1..J_k) pairwise distinct up to sign, and open U_l in C_{J_l}^d.

    ``regions[l]`` is the set {x + yi : x + yJ_l in U_l}.
    """

    structures: StructureTuple
    regions: tuple

    def __post_init__(self):
        J = as_tuple(self.structures)
        regs = tuple(self.regions)
        if len(regs) != J.k:
            raise DimensionError("need one region per structure")
        if not J.distinct_up_to_sign:
            raise InvalidInputError("structures must be pairwise distinct up to sign")
        if len({R.d for R in regs}) != 1:
            raise DimensionError("regions must share the dimension d")
        object.__setattr__(self, "structures", J)
        object.__setattr__(self, "regions", regs)

    @property
    def d(self) -> int:
        return self.regions[0].d

    @property
    def k(self) -> int:
        return self.structures.k


def default_half_cone(J: StructureTuple) -> Callable[[ComplexStructure], bool]:
    """Slice-half subset containing every J_l; elsewhere the canonical sign
    (first non-negligible entry of vec(I) positive) decides."""

    def half(I: ComplexStructure) -> bool:
        for T in J:
            s = T.same_slice(I)
            if s:
                return s > 0
        return I.sign() > 0

    return half


def _representations(y: np.ndarray, I: ComplexStructure):
    """Both ways of writing x + yI: (y, I) and (-y, -I)."""
    return ((y, I), (-y, -I))


class _LabelledRegion(Region):
    """Union of the components of ``base`` (on a grid) that meet R^d."""

    def __init__(self, base: Region, grid: SliceGrid):
        self.base = base
        self.grid = grid
        real = grid.real_labels()
        self.keep = np.setdiff1d(np.unique(real), [0])

    @property
    def d(self):
        return self.base.d

    def bounds(self):
        return self.base.bounds()

    def contains(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if x.ndim == 1:
            x, y = x[None], y[None]
        shape = x.shape[:-1]
        xf = x.reshape(-1, self.d)
        yf = y.reshape(-1, self.d)
        inside = np.asarray(self.base.contains(xf, yf), bool)
        out = np.zeros(len(xf), bool)
        if not self.keep.size:
            return out.reshape(shape)
        axes = self.grid.x_axes + self.grid.y_axes
        coords = np.concatenate([xf, yf], axis=1)
        lab = self.grid.labels
        offsets = list(itertools.product((-1, 0, 1), repeat=2 * self.d))
        for m in np.flatnonzero(inside):
            idx = []
            ok = True
            for ax, c in zip(axes, coords[m]):
                j = int(np.argmin(np.abs(ax - c)))
                if abs(ax[j] - c) > (ax[1] - ax[0]) * 1.5:
                    ok = False
                idx.append(j)
            if not ok:
                continue
            hits = set()
            for off in offsets:
                pos = tuple(min(max(i + o, 0), n - 1) for i, o, n in zip(idx, off, lab.shape))
                hits.add(int(lab[pos]))
                if off == (0,) * len(off) and lab[pos]:
                    break
            hits.discard(0)
            out[m] = bool(hits & set(self.keep.tolist()))
        return out.reshape(shape)


@dataclass(eq=False)
class DerivedSets:
    U_C: Region
    U_C_star: Region
    U_R_star: Region
    U_Delta: SliceSetDescriptor
    U_Delta_plus: SliceSetDescriptor
    U_Delta_star: SliceSetDescriptor
    U_Delta_tilde: SliceSetDescriptor
    half_cone: Callable[[ComplexStructure], bool]
    slice_solution: bool


def derived_sets(U: SliceOpenTuple, half_cone: Callable | None = None, resolution: int = 201,
                 cone_sample: Sequence[ComplexStructure] | None = None) -> DerivedSets:
    """U_C, U_C*, U_R*, U_Delta, U_Delta^+, U_Delta^* and U_Delta^~.

    U_R* (components of U_C* meeting R^d) comes from a grid flood fill at
    ``resolution``; everything else is an exact predicate.
    """
    J = U.structures
    d = U.d
    half = half_cone or default_half_cone(J)
    solution = is_slice_solution(J, cone_sample)

    U_C = U.regions[0] if U.k == 1 else Intersection(U.regions)
    U_C_star = Intersection((U_C, Conjugate(U_C)))
    grid = label_region(U_C_star, resolution, finite_box(U_C_star))
    U_R_star = _LabelledRegion(U_C_star, grid)

    def in_kernel(I):
        return kernel_membership(I, J)

    def mem_delta(x, y, I):
        out = np.zeros(len(x), bool)
        for yy, K in _representations(y, I):
            if in_kernel(K):
                out |= U_C.contains(x, yy)
        return out

    def mem_plus(x, y, I):
        yy, K = (y, I) if half(I) else (-y, -I)
        return U_C.contains(x, yy)

    def mem_star(x, y, I):
        return U_R_star.contains(x, y)

    def mem_pieces(x, y, I):
        # union of U_l minus R^d
        out = np.zeros(len(x), bool)
        nonreal = np.any(y != 0, axis=-1)
        for T, R in zip(J, U.regions):
            s = T.same_slice(I)
            if s:
                out |= R.contains(x, s * y) & nonreal
        return out

    def mem_tilde(x, y, I):
        if solution:
            return mem_plus(x, y, I) | mem_pieces(x, y, I)
        return mem_delta(x, y, I) | mem_star(x, y, I) | mem_pieces(x, y, I)

    pieces_box = _union_box(U.regions)
    star_box = finite_box(U_C_star)

    def descriptor(mem, name, axial=False):
        box = star_box if axial else pieces_box

        def per_slice(I):
            return PredicateRegion(lambda x, y: mem(x.reshape(-1, d), y.reshape(-1, d), I).reshape(x.shape[:-1]),
                                   d, box)

        trace = PredicateRegion(lambda x, y: mem(x.reshape(-1, d), np.zeros_like(x).reshape(-1, d),
                                                 J[0]).reshape(x.shape[:-1]), d)
        return SliceSetDescriptor(per_slice, d, axially_symmetric=axial, real_trace=trace,
                                  known_slices=tuple(J), name=name)

    return DerivedSets(U_C, U_C_star, U_R_star,
                       descriptor(mem_delta, "U_Delta"), descriptor(mem_plus, "U_Delta^+"),
                       descriptor(mem_star, "U_Delta^*", axial=True), descriptor(mem_tilde, "U_Delta^~"),
                       half, solution)


def _union_box(regions):
    boxes = [finite_box(R) for R in regions]
    return (np.min([b[0] for b in boxes], 0), np.max([b[1] for b in boxes], 0),
            np.min([-b[3] for b in boxes] + [b[2] for b in boxes], 0),
            np.max([-b[2] for b in boxes] + [b[3] for b in boxes], 0))


# ---------------------------------------------------------------------------
# extension


def _slice_values(f, J: StructureTuple):
    """Normalize input data to a list of callables f_l(x, y) -> values on
    x + yJ_l."""
    if isinstance(f, SliceFunctionData):
        return [(lambda x, y, T=T: f.on_slice(T, x, y, False)) for T in J]
    fs = list(f)
    if len(fs) != J.k:
        raise DimensionError("need one function per structure")
    out = []
    for g, T in zip(fs, J):
        if isinstance(g, SliceFunctionData):
            out.append(lambda x, y, g=g, T=T: g.on_slice(T, x, y, False))
        else:
            out.append(g)
    return out


def extension_lemma_g(I: ComplexStructure, J, g_data, x, y, warn: bool = True) -> np.ndarray:
    """g[I](x + yI) = (1, I) zeta^+(J) (g_l(x + yJ_l))_l.

    ``g_data`` is a SliceFunctionData or a list of callables g_l(x, y).
    ``x, y`` have shape (m, d).  When I is in C_ker(J) and real points are
    present, the inputs are checked for g_1 = ... = g_k there and a
    ConsistencyWarning is raised on mismatch.
    """
    J = as_tuple(J)
    gs = _slice_values(g_data, J)
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_2d(np.asarray(y, float))
    vals = np.stack([g(x, y) for g in gs], axis=-2)  # (m, k, 2n)
    if warn and kernel_membership(I, J):
        real = np.all(y == 0, axis=-1)
        if np.any(real):
            spread = np.max(np.abs(vals[real] - vals[real][:, :1]))
            if spread > CONSISTENCY_TOL * max(1.0, float(np.max(np.abs(vals[real])))):
                warnings.warn(f"slice data disagree on R^d by {spread:.2e}", ConsistencyWarning)
    return slice_inverse(J).apply(vals) @ one_i(I).T


def extend(f_data, U: SliceOpenTuple, half_cone: Callable | None = None, resolution: int = 201,
           cone_sample: Sequence[ComplexStructure] | None = None, validate: bool = False) -> SliceFunctionData:
    """Slice regular extension of slice-wise holomorphic data to U_Delta^~.

    Values: the input on the slices of J_l, g[I] on slices in C_ker(J), and
    h[I] built from K = (J_1, -J_1) on the remaining slices (taken in the
    slice-half subset).  For a slice-solution J only the first two cases
    occur, with g[I] taken in the slice-half subset.
    """
    J = U.structures
    d = U.d
    sets = derived_sets(U, half_cone, resolution, cone_sample)
    half = sets.half_cone
    fs = _slice_values(f_data, J)
    K = as_tuple((J[0], -J[0]))
    dim = J.dim

    if validate and isinstance(f_data, SliceFunctionData):
        for T, R in zip(J, U.regions):
            lo_x, hi_x, lo_y, hi_y = finite_box(R)
            rng = np.random.default_rng(0)
            pts_x = rng.uniform(lo_x, hi_x, (64, d))
            pts_y = rng.uniform(lo_y, hi_y, (64, d))
            keep = R.contains(pts_x, pts_y)
            if np.any(keep):
                f_data.validate([T], pts_x[keep], pts_y[keep])

    def g_val(I, x, y):
        vals = np.stack([g(x, y) for g in fs], axis=-2)
        return slice_inverse(J).apply(vals) @ one_i(I).T

    def h_val(I, x, y):
        vals = np.stack([fs[0](x, y), fs[0](x, -y)], axis=-2)
        return slice_inverse(K).apply(vals) @ one_i(I).T

    def evaluate(I, x, y):
        m = len(x)
        out = np.full((m, dim), np.nan)
        inside = sets.U_Delta_tilde.contains_xy(x, y, I)
        if not np.all(inside):
            raise DomainError("point outside U_Delta^~")
        real = np.all(y == 0, axis=-1)
        todo = ~real
        if np.any(real):
            out[real] = fs[0](x[real], y[real])
        # slices of the tuple itself
        for l, T in enumerate(J):
            s = T.same_slice(I)
            if s and np.any(todo):
                sel = todo & U.regions[l].contains(x, s * y)
                if np.any(sel):
                    out[sel] = fs[l](x[sel], s * y[sel])
                    todo &= ~sel
        if not np.any(todo):
            return out
        if sets.slice_solution:
            yy, L = (y, I) if half(I) else (-y, -I)
            out[todo] = g_val(L, x[todo], yy[todo])
            return out
        for yy, L in _representations(y, I):
            if not np.any(todo):
                break
            if kernel_membership(L, J):
                sel = todo & sets.U_C.contains(x, yy)
                if np.any(sel):
                    out[sel] = g_val(L, x[sel], yy[sel])
                    todo &= ~sel
        if np.any(todo):
            yy, L = (y, I) if half(I) else (-y, -I)
            out[todo] = h_val(L, x[todo], yy[todo])
        return out

    return SliceFunctionData("per-slice-callable", evaluate, d, dim, sets.U_Delta_tilde,
                             {"derived_sets": sets})


# ---------------------------------------------------------------------------
# quaternionic two-slice extension


@dataclass(eq=False)
class QuaternionicExtension:
    V_plus: SliceSetDescriptor
    V_delta: SliceSetDescriptor
    V_plus_delta: SliceSetDescriptor
    f_tilde: SliceFunctionData


def _upper(y, I):
    """Representation with y >= 0 (d = 1)."""
    flip = y[:, 0] < 0
    return np.where(flip[:, None], -y, y), flip


def quaternionic_extension(U1: Region, I1: ComplexStructure, f, U2: Region | None = None,
                           I2: ComplexStructure | None = None) -> QuaternionicExtension:
    """Two-slice extension: V^+, V^Delta, V^{+Delta} and the extension f~.

    V^+ is (U1 in the upper half of C_{I1}) + (U2 in the upper half of
    C_{I2}) + (U1, U2 common real points); V^Delta is the union of
    x + yS over y >= 0 with x + yI1 in U1 and x + yI2 in U2.  ``f`` is a
    SliceFunctionData or a pair of callables (f1, f2) with f_l(x, y) the
    value at x + yI_l.  With U2 omitted, the disc is mirrored onto -I1, which
    yields the sigma-ball for a disc.
    """
    if U1.d != 1:
        raise DimensionError("the two-slice extension is implemented for d = 1")
    if U2 is None:
        U2, I2 = Conjugate(U1), -I1
        if isinstance(f, SliceFunctionData):
            f1 = lambda x, y: f.on_slice(I1, x, y, False)
        else:
            f1 = f[0] if isinstance(f, (list, tuple)) else f
        fs = [f1, lambda x, y: f1(x, -y)]
    else:
        if I2 is None:
            raise InvalidInputError("U2 needs its structure I2")
        fs = _slice_values(f, as_tuple((I1, I2)))
    if I1.same_slice(I2) == 1:
        raise InvalidInputError("I1 and I2 must differ")
    inv = two_slice_inverse(I1, I2)

    # real trace consistency
    xs = np.linspace(*finite_box(U1)[:2], 257).reshape(-1, 1)
    zs = np.zeros_like(xs)
    common = U1.contains(xs, zs) & U2.contains(xs, zs)
    if np.any(common):
        a, b = fs[0](xs[common], zs[common]), fs[1](xs[common], zs[common])
        gap = float(np.max(np.abs(a - b)))
        if gap > CONSISTENCY_TOL * max(1.0, float(np.max(np.abs(a)))):
            warnings.warn(f"f differs on U1 and U2 along R by {gap:.2e}", ConsistencyWarning)

    def mem_plus(x, y, I):
        yy, _ = _upper(y, I)
        sign = np.where(y[:, 0] < 0, -1, 1)
        out = np.zeros(len(x), bool)
        real = yy[:, 0] == 0
        out |= real & U1.contains(x, yy) & U2.contains(x, yy)
        for T, R in ((I1, U1), (I2, U2)):
            s = T.same_slice(I)
            if s:
                # x + yI with y > 0 after orienting along T
                pos = (s * sign * yy[:, 0]) > 0
                out |= pos & ~real & R.contains(x, yy)
        return out

    def mem_delta(x, y, I):
        yy, _ = _upper(y, I)
        return U1.contains(x, yy) & U2.contains(x, yy)

    def mem_all(x, y, I):
        return mem_plus(x, y, I) | mem_delta(x, y, I)

    def desc(mem, name):
        box = _union_box([U1, U2])

        def per_slice(I):
            return PredicateRegion(lambda x, y: mem(x.reshape(-1, 1), y.reshape(-1, 1), I).reshape(x.shape[:-1]),
                                   1, box)

        trace = PredicateRegion(lambda x, y: mem(x.reshape(-1, 1), np.zeros_like(x).reshape(-1, 1),
                                                 I1).reshape(x.shape[:-1]), 1)
        return SliceSetDescriptor(per_slice, 1, real_trace=trace, known_slices=(I1, I2), name=name)

    V_plus, V_delta, V_pd = desc(mem_plus, "V^+"), desc(mem_delta, "V^Delta"), desc(mem_all, "V^{+Delta}")

    def evaluate(I, x, y):
        if not np.all(V_pd.contains_xy(x, y, I)):
            raise DomainError("point outside V^{+Delta}")
        yy, flip = _upper(y, I)
        out = np.empty((len(x), I1.dim))
        for m in range(len(x)):
            L = -I if flip[m] else I
            xm, ym = x[m:m + 1], yy[m:m + 1]
            if ym[0, 0] == 0:
                out[m] = fs[0](xm, ym)[0] if U1.contains(xm, ym)[0] else fs[1](xm, ym)[0]
            elif L.matches(I1) and U1.contains(xm, ym)[0]:
                out[m] = fs[0](xm, ym)[0]
            elif L.matches(I2) and U2.contains(xm, ym)[0]:
                out[m] = fs[1](xm, ym)[0]
            else:
                stem = inv @ np.concatenate([fs[0](xm, ym)[0], fs[1](xm, ym)[0]])
                out[m] = one_i(L) @ stem
        return out

    f_tilde = SliceFunctionData("per-slice-callable", evaluate, 1, I1.dim, V_pd)
    return QuaternionicExtension(V_plus, V_delta, V_pd, f_tilde)


# ---------------------------------------------------------------------------
# hyper-sigma-polydiscs


@dataclass(eq=False)
class HyperSigmaPolydisc:
    center: SlicePoint
    radius: np.ndarray
    structures: StructureTuple
    membership: SliceSetDescriptor

    @property
    def z(self) -> np.ndarray:
        y = self.center.coords_on(self.structures[0])
        return self.center.x + 1j * y

    def contains(self, p: SlicePoint) -> bool:
        return self.membership.contains(p)

    def slice_tuple(self) -> SliceOpenTuple:
        """U = (P(z, r) on every J_l), whose U_Delta^~ is this set."""
        P = Polydisc(self.z, self.radius)
        return SliceOpenTuple(self.structures, tuple(P for _ in self.structures))


def hyper_sigma_polydisc(q: SlicePoint, r, J, cone_sample: Sequence[ComplexStructure] | None = None
                         ) -> HyperSigmaPolydisc:
    """Sigma(q, r, J): P(z, r) on slices in C_ker(J), P(z, r) & P(conj z, r)
    on every other slice.  Open sets; radii may be +inf."""
    J = as_tuple(J)
    y = q.coords_on(J[0])
    if y is None:
        raise InvalidInputError("the center must lie on the slice of J_1")
    if cone_sample is not None:
        if not is_hyper_solution(J, cone_sample):
            raise InvalidInputError("J is not a hyper-solution on the sampled cone")
    elif is_slice_solution(J):
        raise InvalidInputError("J is a slice-solution, not a hyper-solution")
    r = np.broadcast_to(np.asarray(r, float), q.x.shape).copy()
    z = q.x + 1j * y
    P = Polydisc(z, r)
    lens = Intersection((P, Conjugate(P)))
    d = q.d

    def mem(x, yy, I):
        out = lens.contains(x, yy)
        for ys, K in _representations(yy, I):
            if kernel_membership(K, J):
                out |= P.contains(x, ys)
        real = np.all(yy == 0, axis=-1)
        out[real] = P.contains(x[real], yy[real])
        return out

    def per_slice(I):
        return PredicateRegion(lambda x, yy: mem(x.reshape(-1, d), yy.reshape(-1, d), I).reshape(x.shape[:-1]),
                               d, P.bounds())

    trace = PredicateRegion(lambda x, yy: P.contains(x, np.zeros_like(x)), d)
    desc = SliceSetDescriptor(per_slice, d, real_trace=trace, known_slices=tuple(J),
                              name="hyper-sigma-polydisc")
    return HyperSigmaPolydisc(q, r, J, desc)
