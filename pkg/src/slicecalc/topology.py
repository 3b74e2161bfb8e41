"""sigma-distance, sigma-balls and executable topology counterexamples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import ComplexStructure, MATCH_TOL, SlicePoint
from .errors import DimensionError, InvalidInputError, InvalidProbeError
from .regions import (Ellipse, Region, SliceSetDescriptor, finite_box,
                      label_region)

SIGMA_VARIANTS = ("gentili-stoppato", "orthogonal")


def common_slice(p: SlicePoint, q: SlicePoint, tol: float = MATCH_TOL) -> ComplexStructure | None:
    """A structure K with p, q both in C_K^d, or None."""
    if p.is_real:
        return q.I
    if q.is_real:
        return p.I
    return p.I if p.I.same_slice(q.I, tol) else None


def sigma_distance(p: SlicePoint, q: SlicePoint, variant: str = "gentili-stoppato") -> float:
    """sigma-distance between two points of the cone.

    On a common slice this is the Euclidean distance in C^d.  Otherwise the
    default variant returns sqrt(|Re(q-p)|^2 + (|Im q| + |Im p|)^2), which is
    the distance from q to the conjugate of p after rotating q onto the slice
    of p; it makes sigma-balls the convergence sets of power series.  The
    ``orthogonal`` variant drops the cross term:
    sqrt(|Re(q-p)|^2 + |Im q|^2 + |Im p|^2).  Norms over coordinates are
    Euclidean.
    """
    if variant not in SIGMA_VARIANTS:
        raise InvalidInputError(f"unknown sigma variant {variant!r}")
    if p.d != q.d:
        raise DimensionError("points live in cones of different dimension")
    K = common_slice(p, q)
    if K is not None:
        yp, yq = p.coords_on(K), q.coords_on(K)
        return float(np.sqrt(np.sum((q.x - p.x) ** 2) + np.sum((yq - yp) ** 2)))
    dx = float(np.sum((q.x - p.x) ** 2))
    a, b = float(np.linalg.norm(q.y)), float(np.linalg.norm(p.y))
    if variant == "orthogonal":
        return float(np.sqrt(dx + a * a + b * b))
    return float(np.sqrt(dx + (a + b) ** 2))


def sigma_ball_contains(center: SlicePoint, r: float, q: SlicePoint, variant: str = "gentili-stoppato") -> bool:
    if not r > 0:
        raise InvalidInputError("radius must be positive")
    return sigma_distance(center, q, variant) < r


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class WitnessReport:
    """Per-probe boundary distances dist_{C_J}(0, C_J minus Omega_J)."""

    parameters: list
    values: np.ndarray  # the scalar attached to each probe (dist(J, C_I) or k)
    distances: np.ndarray
    threshold: float
    verdict: bool = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        self.distances = np.asarray(self.distances, float)
        self.verdict = bool(len(self.distances) and self.distances.min() < self.threshold)

    def rows(self):
        """(probe_index, parameter, distance) triples for CSV output."""
        return [(k, float(v), float(dd)) for k, (v, dd) in enumerate(zip(self.values, self.distances))]


def slice_distance(J: ComplexStructure, I: ComplexStructure) -> float:
    """Distance from J to span{1, I} in the normalized Frobenius norm
    |A|_F / sqrt(2n).  For quaternionic L_J, L_I this is the Euclidean
    distance from the unit J to the plane C_I."""
    m = J.dim
    A = J.mat
    a = np.trace(A) / m
    b = np.sum(A * I.mat) / m
    R = A - a * np.eye(m) - b * I.mat
    return float(np.linalg.norm(R) / np.sqrt(m))


def tau_sigma_slice_region(J: ComplexStructure, I: ComplexStructure) -> Region:
    """Omega_J of the tau_s-open, not tau_sigma-open set: an ellipse
    x^2 + y^2/dist(J, C_I) < 1, the unit disc on the slice of I."""
    if J.same_slice(I):
        return Ellipse(0j, 1.0, 1.0)
    delta = slice_distance(J, I)
    return Ellipse(0j, 1.0, float(np.sqrt(delta)))


def tau_sigma_descriptor(I: ComplexStructure) -> SliceSetDescriptor:
    return SliceSetDescriptor(lambda J: tau_sigma_slice_region(J, I), d=1,
                              real_trace=Ellipse(0j, 1.0, 1.0), name="tau-sigma witness")


def tau_sigma_witness(I: ComplexStructure, probes: Sequence[ComplexStructure],
                      threshold: float = 1e-3) -> WitnessReport:
    """Boundary distances from 0 on each probe slice.

    The semi-axes of Omega_J are 1 and sqrt(dist(J, C_I)), so the distance is
    min(1, sqrt(dist(J, C_I))), which tends to 0 as J approaches I.
    """
    deltas, dists = [], []
    for J in probes:
        if J.dim != I.dim:
            raise DimensionError("probe dimension differs from I")
        if J.same_slice(I):
            raise InvalidProbeError("probe coincides with +-I")
        delta = slice_distance(J, I)
        deltas.append(delta)
        dists.append(min(1.0, float(np.sqrt(delta))))
    return WitnessReport(list(probes), deltas, dists, threshold)


def metrizability_region(k: int) -> Region:
    """U[J_k] on its slice: x^2 + k^2 y^2 < 1."""
    return Ellipse(0j, 1.0, 1.0 / k)


def metrizability_witness(structures: Sequence[ComplexStructure], threshold: float = 1e-3) -> WitnessReport:
    """Distances 1/k from 0 to the boundary of U[J_k] on the k-th slice."""
    structures = list(structures)
    for a in range(len(structures)):
        for b in range(a + 1, len(structures)):
            if structures[a].same_slice(structures[b]):
                raise InvalidProbeError(f"structures {a + 1} and {b + 1} agree up to sign")
    ks = np.arange(1, len(structures) + 1, dtype=float)
    return WitnessReport(structures, ks, 1.0 / ks, threshold)


def metrizability_descriptor(structures: Sequence[ComplexStructure]) -> SliceSetDescriptor:
    pieces = [(T, metrizability_region(k)) for k, T in enumerate(structures, start=1)]
    return SliceSetDescriptor.from_slices(pieces, name="metrizability witness")


# ---------------------------------------------------------------------------
# connectivity


def _real_labels(desc: SliceSetDescriptor, box, resolution: int):
    """Connected components of Omega_R on a grid over the real box."""
    from scipy import ndimage

    d = desc.d
    lo_x, hi_x = box[0], box[1]
    per_axis = resolution if d == 1 else max(9, int(round(resolution ** (1.0 / d))))
    axes = [np.linspace(lo_x[l], hi_x[l], per_axis) for l in range(d)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    probe = desc.known_slices[0] if desc.known_slices else None
    mask = np.asarray(desc.contains_real(X.reshape(-1, d), probe), bool).reshape(X.shape[:-1])
    labels, count = ndimage.label(mask)
    return axes, labels, int(count)


def _desc_box(desc: SliceSetDescriptor, structures, fallback: float):
    regions = []
    if desc.real_trace is not None:
        regions.append(desc.real_trace)
    regions += [desc.region(I) for I in structures]
    boxes = [finite_box(R, fallback) for R in regions]
    return (np.min([b[0] for b in boxes], 0), np.max([b[1] for b in boxes], 0),
            np.min([b[2] for b in boxes], 0), np.max([b[3] for b in boxes], 0))


def is_real_connected(desc: SliceSetDescriptor, resolution: int = 2001, box=None,
                      fallback: float = 10.0):
    """True if Omega_R is empty or connected, False if it splits, None when
    the sampling cannot decide (a component only one sample wide).

    Sampled evidence on a grid of ``resolution`` points per real axis.
    """
    if box is None:
        box = _desc_box(desc, desc.known_slices, fallback)
    axes, labels, count = _real_labels(desc, box, resolution)
    if count == 0:
        return True
    sizes = np.bincount(labels.ravel())[1:]
    if np.any(sizes < 2):
        return None
    return count == 1


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def st_domain_check(desc: SliceSetDescriptor, samples: Sequence[ComplexStructure], resolution: int = 201,
                    strict_corollary: bool = False, box=None, fallback: float = 10.0) -> bool:
    """Sampled evidence that Omega is slice-connected.

    Two slices only meet along R^d, so a slice component is reachable from
    the rest only through its real points.  Each sampled slice is flood
    filled; its components glue together the components of Omega_R they
    touch.  Omega passes when every slice component touches R^d and all of
    Omega_R ends up in one class.  With Omega_R empty, exactly one slice
    component may be nonempty.

    ``strict_corollary`` instead tests the sufficient condition
    "Omega_R nonempty and every sampled slice connected".
    """
    samples = list(samples)
    if box is None:
        box = _desc_box(desc, samples, fallback)
    _, real_lab, n_real = _real_labels(desc, box, resolution)

    if strict_corollary:
        if n_real == 0:
            return False
        for I in samples:
            grid = label_region(desc.region(I), resolution, box)
            if grid.count != 1:
                return False
        return True

    uf = _UnionFind(max(n_real, 1))
    isolated = 0
    seen = []
    for I in samples:
        if any(I.same_slice(S) for S in seen):
            continue
        seen.append(I)
        region = _TraceFixed(desc, I)
        grid = label_region(region, resolution, box)
        on_real = grid.real_labels()
        for comp in range(1, grid.count + 1):
            touched = set(np.unique(_map_real(on_real == comp, real_lab, grid, box, resolution)))
            touched.discard(0)
            if not touched:
                isolated += 1
                continue
            touched = sorted(touched)
            for t in touched[1:]:
                uf.union(touched[0] - 1, t - 1)
    if n_real == 0:
        return isolated == 1
    if isolated:
        return False
    roots = {uf.find(k) for k in range(n_real)}
    return len(roots) == 1


class _TraceFixed(Region):
    """Slice region whose real points follow the descriptor's real trace."""

    def __init__(self, desc, I):
        self.desc, self.I = desc, I

    @property
    def d(self):
        return self.desc.d

    def contains(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        shape = x.shape[:-1]
        flat = self.desc.contains_xy(x.reshape(-1, self.d), y.reshape(-1, self.d), self.I)
        return flat.reshape(shape)


def _map_real(mask, real_lab, grid, box, resolution):
    # the slice grid and the real grid share x axes when built from the same box
    if mask.shape == real_lab.shape:
        return real_lab[mask]
    # different resolutions: nearest-neighbour lookup
    idx = np.argwhere(mask)
    out = []
    for row in idx:
        coords = [grid.x_axes[l][row[l]] for l in range(grid.d)]
        pos = []
        for l, c in enumerate(coords):
            n = real_lab.shape[l]
            ax = np.linspace(box[0][l], box[1][l], n)
            pos.append(int(np.argmin(np.abs(ax - c))))
        out.append(real_lab[tuple(pos)])
    return np.asarray(out, int)
