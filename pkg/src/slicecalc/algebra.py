"""Finite-dimensional real algebras, complex structures and slice-cone points.

Algebra elements are dense real vectors in a fixed canonical basis:

* ``quaternion``: (1, i, j, k)
* ``octonion``: Cayley-Dickson doubling of the quaternions, (1, e1, ..., e7)
* ``clifford:m``: blades of R_m in graded-lexicographic order,
  (1, e1, ..., em, e1e2, e1e3, ..., e1...em), with e_a e_b + e_b e_a = -2 delta_ab
* ``endo:2n``: bare R^{2n} without multiplication; only complex structures
  given as explicit matrices are available there.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, InvalidInputError, InvalidStructureError, UnsupportedAlgebraError

#: Absolute Frobenius tolerance for every structural validation.
TOL = 1e-10
#: Two complex structures closer than this (Frobenius) are treated as equal.
MATCH_TOL = 1e-9
#: Acceptance threshold on the smallest singular value when building I-bases.
BASIS_SV_TOL = 1e-8


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# multiplication tables


def _cd_conj(a: np.ndarray) -> np.ndarray:
    out = -a
    out[0] = a[0]
    return out


def _cd_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (p, q)(r, s) = (pr - s* q, s p + q r*)
    m = len(a)
    if m == 1:
        return a * b
    h = m // 2
    p, q = a[:h], a[h:]
    r, s = b[:h], b[h:]
    return np.concatenate([_cd_mul(p, r) - _cd_mul(_cd_conj(s), q),
                           _cd_mul(s, p) + _cd_mul(q, _cd_conj(r))])


def cayley_dickson_table(dim: int) -> np.ndarray:
    """Structure constants T[i, j, k] = coefficient of e_k in e_i e_j."""
    eye = np.eye(dim)
    table = np.zeros((dim, dim, dim))
    for i in range(dim):
        for j in range(dim):
            table[i, j] = _cd_mul(eye[i], eye[j])
    return table


def clifford_blades(m: int) -> list[tuple[int, ...]]:
    blades: list[tuple[int, ...]] = []
    for grade in range(m + 1):
        blades.extend(itertools.combinations(range(1, m + 1), grade))
    return blades


def _blade_product(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    seq = list(a) + list(b)
    sign = 1
    # bubble sort, counting transpositions
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    out: list[int] = []
    for g in seq:
        if out and out[-1] == g:
            out.pop()
            sign = -sign  # e_g e_g = -1
        else:
            out.append(g)
    return sign, tuple(out)


def clifford_table(m: int) -> np.ndarray:
    blades = clifford_blades(m)
    index = {b: k for k, b in enumerate(blades)}
    dim = len(blades)
    table = np.zeros((dim, dim, dim))
    for i, a in enumerate(blades):
        for j, b in enumerate(blades):
            sign, c = _blade_product(a, b)
            table[i, j, index[c]] = sign
    return table


# ---------------------------------------------------------------------------
# algebras


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    name: str
    dim: int
    mul_table: np.ndarray | None = None
    unit: int = 0
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise DimensionError(f"algebra dimension must be a positive even integer, got {self.dim}")
        if self.mul_table is not None:
            t = _frozen(self.mul_table)
            if t.shape != (self.dim,) * 3:
                raise DimensionError(f"multiplication table must have shape {(self.dim,) * 3}")
            object.__setattr__(self, "mul_table", t)

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def has_table(self) -> bool:
        return self.mul_table is not None

    def _require_table(self):
        if self.mul_table is None:
            raise UnsupportedAlgebraError(f"algebra {self.name!r} has no multiplication table")
        return self.mul_table

    def one(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[self.unit] = 1.0
        return e

    def basis(self, k: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[k] = 1.0
        return e

    def mul(self, a, b) -> np.ndarray:
        t = self._require_table()
        return np.einsum("i,j,ijk->k", np.asarray(a, float), np.asarray(b, float), t)

    def element(self, label: str) -> np.ndarray:
        """Basis element by label, e.g. ``'i'`` or ``'e1e2'``."""
        try:
            return self.basis(self.labels.index(label))
        except ValueError:
            raise InvalidInputError(f"unknown basis label {label!r} for {self.name}") from None

    def is_left_alternative(self, tol: float = TOL) -> bool:
        """Check x(xy) = (xx)y through its polarization on all basis triples."""
        t = self._require_table()
        # L[i] is left multiplication by e_i, as a matrix acting on coordinates
        L = np.transpose(t, (0, 2, 1))
        for a in range(self.dim):
            for b in range(a, self.dim):
                lhs = L[a] @ L[b] + L[b] @ L[a]
                sym = t[a, b] + t[b, a]
                rhs = np.einsum("k,kij->ij", sym, L)
                if np.linalg.norm(lhs - rhs) > tol:
                    return False
        return True

    def __repr__(self):
        return f"AlgebraSpec({self.name!r}, dim={self.dim})"


@lru_cache(maxsize=None)
def algebra(name: str) -> AlgebraSpec:
    """Look up an algebra by name: ``quaternion``, ``octonion``, ``complex``,
    ``clifford:m`` or ``endo:2n``."""
    key = name.strip().lower()
    if key in ("quaternion", "h"):
        return AlgebraSpec("quaternion", 4, cayley_dickson_table(4), 0, ("1", "i", "j", "k"))
    if key in ("octonion", "o"):
        return AlgebraSpec("octonion", 8, cayley_dickson_table(8), 0,
                           tuple(["1"] + [f"e{k}" for k in range(1, 8)]))
    if key in ("complex", "c"):
        return AlgebraSpec("complex", 2, cayley_dickson_table(2), 0, ("1", "i"))
    m = re.fullmatch(r"clifford:(\d+)", key)
    if m:
        order = int(m.group(1))
        if order < 1:
            raise UnsupportedAlgebraError("clifford:m needs m >= 1")
        labels = tuple("1" if not b else "".join(f"e{g}" for g in b) for b in clifford_blades(order))
        return AlgebraSpec(f"clifford:{order}", 2 ** order, clifford_table(order), 0, labels)
    m = re.fullmatch(r"endo:(\d+)", key)
    if m:
        dim = int(m.group(1))
        return AlgebraSpec(f"endo:{dim}", dim, None, 0, tuple(f"e{k + 1}" for k in range(dim)))
    raise UnsupportedAlgebraError(f"unknown algebra {name!r}")


def left_mult_operator(a, spec: AlgebraSpec) -> np.ndarray:
    """Matrix of x -> a x in the canonical basis."""
    t = spec._require_table()
    a = np.asarray(a, float)
    if a.shape != (spec.dim,):
        raise DimensionError(f"element must have {spec.dim} coordinates")
    return np.einsum("i,ijk->kj", a, t)


def validate_complex_structure(T, tol: float = TOL) -> bool:
    """True iff ``T @ T + 1`` vanishes within ``tol`` in Frobenius norm."""
    T = np.asarray(T, float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionError("complex structure must be a square matrix")
    if T.shape[0] % 2:
        raise DimensionError("no complex structure exists in odd dimension")
    return bool(np.linalg.norm(T @ T + np.eye(T.shape[0])) <= tol)


def imaginary_unit_check(a, spec: AlgebraSpec, tol: float = TOL) -> bool:
    return bool(np.linalg.norm(spec.mul(a, a) + spec.one()) <= tol)


# ---------------------------------------------------------------------------
# complex structures and cones


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """A real 2n x 2n matrix squaring to minus the identity."""

    mat: np.ndarray
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        m = _frozen(self.mat)
        if not validate_complex_structure(m, self.tol):
            err = np.linalg.norm(m @ m + np.eye(m.shape[0]))
            raise InvalidStructureError(f"T^2 + 1 has Frobenius norm {err:.3e} > {self.tol:g}")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2

    def __neg__(self) -> "ComplexStructure":
        return ComplexStructure(-self.mat, self.tol)

    def __matmul__(self, other):
        return self.mat @ other

    def distance(self, other: "ComplexStructure") -> float:
        return float(np.linalg.norm(self.mat - other.mat))

    def matches(self, other: "ComplexStructure", tol: float = MATCH_TOL) -> bool:
        return self.distance(other) <= tol

    def same_slice(self, other: "ComplexStructure", tol: float = MATCH_TOL) -> int:
        """+1 if equal, -1 if opposite, 0 otherwise."""
        if self.matches(other, tol):
            return 1
        if float(np.linalg.norm(self.mat + other.mat)) <= tol:
            return -1
        return 0

    def sign(self) -> int:
        """Sign of the first coordinate of vec(mat) that is not negligible."""
        flat = self.mat.ravel()
        nz = np.flatnonzero(np.abs(flat) > 1e-12)
        return 1 if flat[nz[0]] > 0 else -1

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2))

    def key(self) -> bytes:
        return np.round(self.mat, 12).tobytes()


def standard_structure(n: int) -> ComplexStructure:
    """Block rotation by pi/2 on R^{2n} paired as (e_k, e_{n+k})."""
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    J[:n, n:] = -np.eye(n)
    return ComplexStructure(J)


def unit_structure(u, spec: AlgebraSpec, tol: float = TOL) -> ComplexStructure:
    """The complex structure L_u for an imaginary unit u of ``spec``."""
    u = np.asarray(u, float)
    if not imaginary_unit_check(u, spec, tol):
        raise InvalidStructureError("element is not an imaginary unit (u^2 != -1)")
    return ComplexStructure(left_mult_operator(u, spec), tol)


def random_unit_imaginary(spec: AlgebraSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector in the imaginary span: a square root of -1 for
    quaternions, octonions and for 1-vectors of Clifford algebras."""
    spec._require_table()
    if spec.name.startswith("clifford:"):
        m = int(spec.name.split(":")[1])
        v = np.zeros(spec.dim)
        g = rng.standard_normal(m)
        v[1:m + 1] = g / np.linalg.norm(g)
        return v
    v = rng.standard_normal(spec.dim)
    v[spec.unit] = 0.0
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """A negation-closed family of complex structures, listed or sampled."""

    structures: tuple[ComplexStructure, ...] | None = None
    sampler: Callable[[np.random.Generator], ComplexStructure] | None = None
    closed_under_negation: bool = True
    name: str = "cone"

    def __post_init__(self):
        if self.structures is None and self.sampler is None:
            raise InvalidInputError("a cone needs structures or a sampler")
        if self.structures is not None:
            items = tuple(self.structures)
            object.__setattr__(self, "structures", items)
            if self.closed_under_negation:
                for T in items:
                    if not any(T.same_slice(S) == -1 for S in items):
                        raise InvalidStructureError("listed cone is not closed under negation")

    def sample(self, rng: np.random.Generator, k: int = 1) -> list[ComplexStructure]:
        if self.sampler is not None:
            return [self.sampler(rng) for _ in range(k)]
        idx = rng.integers(len(self.structures), size=k)
        return [self.structures[i] for i in idx]


def algebra_cone(spec: AlgebraSpec) -> ConeSpec:
    """The cone {L_u : u imaginary unit} sampled uniformly on the unit sphere."""
    return ConeSpec(sampler=lambda rng: unit_structure(random_unit_imaginary(spec, rng), spec),
                    name=f"L({spec.name})")


def complex_structure_cone(n: int) -> ConeSpec:
    """Random conjugates P J0 P^-1 of the standard structure on R^{2n}."""
    J0 = standard_structure(n).mat

    def draw(rng):
        P = np.eye(2 * n) + 0.5 * rng.standard_normal((2 * n, 2 * n))
        return ComplexStructure(P @ J0 @ np.linalg.inv(P), tol=1e-8)

    return ConeSpec(sampler=draw, name=f"C_{n}")


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True, eq=False)
class SlicePoint:
    """The point x + yI of the cone, x, y in R^d."""

    x: np.ndarray
    y: np.ndarray
    I: ComplexStructure

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, float)).copy()
        y = np.atleast_1d(np.asarray(self.y, float)).copy()
        if x.shape != y.shape or x.ndim != 1:
            raise DimensionError("x and y must be vectors of equal length")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return len(self.x)

    @property
    def is_real(self) -> bool:
        return not np.any(self.y)

    def operator(self, ell: int = 0) -> np.ndarray:
        """L_{q_ell} = x_ell + y_ell I as a 2n x 2n matrix."""
        return self.x[ell] * np.eye(self.I.dim) + self.y[ell] * self.I.mat

    def coords_on(self, K: ComplexStructure, tol: float = MATCH_TOL) -> np.ndarray | None:
        """y' with x + yI = x + y'K, or None if the point is off the slice of K."""
        if self.is_real:
            return self.y.copy()
        s = self.I.same_slice(K, tol)
        if s == 0:
            return None
        return s * self.y

    def with_structure(self, K: ComplexStructure) -> "SlicePoint":
        return SlicePoint(self.x, self.y, K)

    def complex(self) -> np.ndarray:
        """Preimage x + yi in C^d."""
        return self.x + 1j * self.y

    def element(self, spec: AlgebraSpec, ell: int | None = None) -> np.ndarray:
        """Coordinates of q (or of q_ell) as algebra elements, L_q applied to 1."""
        one = spec.one()
        if ell is not None:
            return self.operator(ell) @ one
        return np.array([self.operator(k) @ one for k in range(self.d)])

    def __eq__(self, other):
        if not isinstance(other, SlicePoint):
            return NotImplemented
        if self.x.shape != other.x.shape or not np.allclose(self.x, other.x, rtol=0, atol=1e-12):
            return False
        if self.is_real or other.is_real:
            return self.is_real and other.is_real
        a, b = canonicalize(self), canonicalize(other)
        return bool(np.allclose(a.y, b.y, rtol=0, atol=1e-12) and a.I.matches(b.I))

    __hash__ = None

    def __repr__(self):
        return f"SlicePoint(x={self.x.tolist()}, y={self.y.tolist()})"

    @classmethod
    def real(cls, x, I: ComplexStructure) -> "SlicePoint":
        x = np.atleast_1d(np.asarray(x, float))
        return cls(x, np.zeros_like(x), I)


def canonicalize(p: SlicePoint) -> SlicePoint:
    """Fix the sign so that vec(I) starts with a positive entry.

    Uses x + yI = x + (-y)(-I).  Real points keep their structure; equality
    of points ignores it.
    """
    if p.I.sign() > 0:
        return p
    return SlicePoint(p.x, -p.y, -p.I)


def point_from_element(q, spec: AlgebraSpec, default: ComplexStructure | None = None,
                       tol: float = 1e-12) -> SlicePoint:
    """Decompose algebra elements q (shape (2n,) or (d, 2n)) as x + yI.

    All imaginary parts must be parallel.  A real q gets ``default`` as its
    structure (first imaginary basis unit when omitted).
    """
    q = np.atleast_2d(np.asarray(q, float))
    if q.shape[1] != spec.dim:
        raise DimensionError(f"elements must have {spec.dim} coordinates")
    x = q[:, spec.unit].copy()
    im = q.copy()
    im[:, spec.unit] = 0.0
    norms = np.linalg.norm(im, axis=1)
    k = int(np.argmax(norms))
    if norms[k] <= tol:
        if default is None:
            default = unit_structure(spec.basis(1 if spec.unit == 0 else 0), spec)
        return SlicePoint(x, np.zeros_like(x), default)
    u = im[k] / norms[k]
    y = im @ u
    if np.linalg.norm(im - np.outer(y, u)) > 1e-9 * max(1.0, norms.max()):
        raise InvalidInputError("coordinates do not lie on a common slice")
    return SlicePoint(x, y, unit_structure(u, spec, tol=1e-8))


# ---------------------------------------------------------------------------
# I-bases


@dataclass(frozen=True, eq=False)
class IBasis:
    structure: ComplexStructure
    vectors: np.ndarray  # (n, 2n), row k is theta_k

    def __post_init__(self):
        v = _frozen(self.vectors)
        object.__setattr__(self, "vectors", v)
        M = np.hstack([v.T, self.structure.mat @ v.T])
        if M.shape[0] != M.shape[1] or np.linalg.svd(M, compute_uv=False).min() <= BASIS_SV_TOL:
            raise InvalidStructureError("vectors do not form an I-basis")


def i_basis(I: ComplexStructure) -> IBasis:
    """Greedy I-basis: scan e_1..e_2n, keep e_k while {theta, I theta} stays
    well conditioned."""
    dim = I.dim
    chosen: list[np.ndarray] = []
    eye = np.eye(dim)
    for k in range(dim):
        trial = chosen + [eye[k]]
        A = np.array(trial).T
        M = np.hstack([A, I.mat @ A])
        if np.linalg.svd(M, compute_uv=False).min() > BASIS_SV_TOL:
            chosen = trial
            if len(chosen) == I.n:
                break
    return IBasis(I, np.array(chosen))


def d_matrix(basis: IBasis) -> np.ndarray:
    """Columns theta_1..theta_n, I theta_1..I theta_n."""
    A = basis.vectors.T
    return np.hstack([A, basis.structure.mat @ A])


# ---------------------------------------------------------------------------
# JSON helpers


def matrix_to_json(M) -> dict:
    M = np.atleast_2d(np.asarray(M, float))
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": M.ravel().tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        return np.asarray(obj["data"], float).reshape(int(obj["rows"]), int(obj["cols"]))
    except (KeyError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix JSON: {exc}") from None


def structure_to_json(T: ComplexStructure) -> dict:
    return matrix_to_json(T.mat)


def structure_from_json(obj: dict) -> ComplexStructure:
    return ComplexStructure(matrix_from_json(obj))


def point_to_json(p: SlicePoint) -> dict:
    return {"x": p.x.tolist(), "y": p.y.tolist(), "I": structure_to_json(p.I)}


def point_from_json(obj: dict) -> SlicePoint:
    return SlicePoint(obj["x"], obj["y"], structure_from_json(obj["I"]))


def stack_structures(structures: Sequence[ComplexStructure]) -> np.ndarray:
    return np.array([T.mat for T in structures])
