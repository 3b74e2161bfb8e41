"""zeta-matrices, their slice inverses and the path-representation formula.

Structures act on R^{2n}; a stem value (F1, F2) is stored as one vector of
length 4n, and a stack of k values f(x + yJ_l) as one vector of length 2nk.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import ComplexStructure, MATCH_TOL, d_matrix, i_basis
from .errors import DimensionError, InvalidInputError, KernelViolationError, SingularPairError

#: relative SVD cutoff defining numerical rank
SVD_CUTOFF = 1e-10
#: tolerance on |(1, I) v| for kernel vectors v
KERNEL_TOL = 1e-9


def mp_inverse(M, tol: float = SVD_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudoinverse by SVD, zeroing singular values below
    ``tol * sigma_max``."""
    M = np.atleast_2d(np.asarray(M, float))
    if M.size == 0:
        return np.zeros(M.shape[::-1])
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(M.shape[::-1])
    keep = s > tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def null_space(M, tol: float = SVD_CUTOFF) -> np.ndarray:
    """Orthonormal basis (as columns) of ker M with the same rank rule."""
    M = np.atleast_2d(np.asarray(M, float))
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return Vt[rank:].T.copy()


def mp_residuals(M, P) -> tuple[float, float, float, float]:
    """Relative residuals of the four Moore-Penrose conditions."""
    M = np.asarray(M, float)
    P = np.asarray(P, float)
    sM = max(np.linalg.norm(M), 1e-300)
    sP = max(np.linalg.norm(P), 1e-300)
    MP, PM = M @ P, P @ M
    return (float(np.linalg.norm(MP @ M - M) / sM),
            float(np.linalg.norm(PM @ P - P) / sP),
            float(np.linalg.norm(MP - MP.T) / max(np.linalg.norm(MP), 1e-300)),
            float(np.linalg.norm(PM - PM.T) / max(np.linalg.norm(PM), 1e-300)))


@dataclass(frozen=True, eq=False)
class StructureTuple:
    """J = (J_1, ..., J_k)."""

    entries: tuple
    distinct_up_to_sign: bool = field(init=False)

    def __post_init__(self):
        items = tuple(self.entries)
        if not items:
            raise InvalidInputError("a structure tuple needs at least one entry")
        dims = {T.dim for T in items}
        if len(dims) != 1:
            raise DimensionError("all structures of a tuple must act on the same space")
        object.__setattr__(self, "entries", items)
        distinct = all(items[a].same_slice(items[b]) == 0
                       for a in range(len(items)) for b in range(a + 1, len(items)))
        object.__setattr__(self, "distinct_up_to_sign", distinct)

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return self.entries[0].dim

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __iter__(self):
        return iter(self.entries)

    def append(self, I: ComplexStructure) -> "StructureTuple":
        return StructureTuple(self.entries + (I,))

    def key(self) -> bytes:
        return b"".join(T.key() for T in self.entries)


def as_tuple(J) -> StructureTuple:
    if isinstance(J, StructureTuple):
        return J
    if isinstance(J, ComplexStructure):
        return StructureTuple((J,))
    return StructureTuple(tuple(J))


def zeta(J) -> np.ndarray:
    """Block rows (1 | J_l), shape (2nk, 4n)."""
    J = as_tuple(J)
    m = J.dim
    return np.vstack([np.hstack([np.eye(m), T.mat]) for T in J])


def one_i(I: ComplexStructure) -> np.ndarray:
    """The row (1, I), shape (2n, 4n)."""
    return np.hstack([np.eye(I.dim), I.mat])


@dataclass(frozen=True, eq=False)
class SliceInverse:
    structures: StructureTuple
    zeta: np.ndarray
    zeta_plus: np.ndarray
    kernel_basis: np.ndarray  # columns, shape (4n, m)
    residual_projector: np.ndarray
    d_block: np.ndarray

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]

    @property
    def is_slice_solution(self) -> bool:
        return self.kernel_dim == 0

    def conjugated(self) -> np.ndarray:
        """D_J zeta(J), the matrix whose pseudoinverse defines zeta^+."""
        return self.d_block @ self.zeta

    def apply(self, values) -> np.ndarray:
        """zeta^+(J) acting on stacked values; accepts (k, 2n) or (..., k, 2n)."""
        v = np.asarray(values, float)
        k, m = self.structures.k, self.structures.dim
        if v.shape[-2:] != (k, m):
            raise DimensionError(f"values must have trailing shape {(k, m)}")
        flat = v.reshape(v.shape[:-2] + (k * m,))
        return flat @ self.zeta_plus.T


_CACHE: dict[bytes, SliceInverse] = {}
_CACHE_LOCK = threading.Lock()


def block_d_matrix(J) -> np.ndarray:
    J = as_tuple(J)
    m = J.dim
    D = np.zeros((m * J.k, m * J.k))
    for l, T in enumerate(J):
        D[l * m:(l + 1) * m, l * m:(l + 1) * m] = d_matrix(i_basis(T))
    return D


def slice_inverse(J, bases=None) -> SliceInverse:
    """The J-slice inverse zeta^+(J) = [D_J zeta(J)]^+ D_J.

    D_J is the block diagonal of the basis matrices D_{J_l}; it is the real
    form of the change of coordinates used before taking the pseudoinverse.
    ``bases`` may supply one IBasis per entry; by default the greedy bases
    are used and the result is cached.
    """
    J = as_tuple(J)
    if bases is None:
        key = J.key()
        with _CACHE_LOCK:
            hit = _CACHE.get(key)
        if hit is not None:
            return hit
        D = block_d_matrix(J)
    else:
        if len(bases) != J.k:
            raise DimensionError("need one basis per structure")
        m = J.dim
        D = np.zeros((m * J.k, m * J.k))
        for l, b in enumerate(bases):
            D[l * m:(l + 1) * m, l * m:(l + 1) * m] = d_matrix(b)
    Z = zeta(J)
    Zp = mp_inverse(D @ Z) @ D
    K = null_space(Z)
    P = np.eye(Z.shape[1]) - Zp @ Z
    for a in (Z, Zp, K, P, D):
        a.setflags(write=False)
    out = SliceInverse(J, Z, Zp, K, P, D)
    if bases is None:
        with _CACHE_LOCK:
            if len(_CACHE) > 4096:
                _CACHE.clear()
            _CACHE[key] = out
    return out


def kernel_membership(I: ComplexStructure, J, tol: float = KERNEL_TOL) -> bool:
    """I in C_ker(J): ker(1, I) contains ker zeta(J)."""
    S = slice_inverse(J)
    if S.kernel_dim == 0:
        return True
    return bool(np.linalg.norm(one_i(I) @ S.kernel_basis) <= tol)


def is_slice_solution(J, cone_sample: Sequence[ComplexStructure] | None = None) -> bool:
    """Trivial kernel, or (for a sub-cone given by ``cone_sample``) every
    sampled structure lies in C_ker(J)."""
    S = slice_inverse(J)
    if S.kernel_dim == 0:
        return True
    if cone_sample is None:
        return False
    return all(kernel_membership(I, J) for I in cone_sample)


def is_hyper_solution(J, cone_sample: Sequence[ComplexStructure]) -> bool:
    """Not a slice-solution, and appending any sampled I outside C_ker(J)
    gives one.  Sampled evidence over ``cone_sample``."""
    J = as_tuple(J)
    cone_sample = list(cone_sample)
    if is_slice_solution(J, cone_sample):
        return False
    for I in cone_sample:
        if kernel_membership(I, J):
            continue
        if slice_inverse(J.append(I)).kernel_dim != 0:
            return False
    return True


def represent(values, J, I: ComplexStructure, assume_slice_solution: bool = False) -> np.ndarray:
    """f(x + yI) = (1, I) zeta^+(J) (f(x + yJ_l))_l.

    ``values`` has shape (k, 2n) or (..., k, 2n).  Raises KernelViolationError
    when I is outside C_ker(J), unless the caller vouches that J is a
    slice-solution of the relevant cone.
    """
    J = as_tuple(J)
    S = slice_inverse(J)
    if not assume_slice_solution and not kernel_membership(I, J):
        raise KernelViolationError("I is not in C_ker(J); the value is only determined up to "
                                   "(1, I) applied to ker zeta(J)")
    stem = S.apply(values)
    return stem @ one_i(I).T


def residual_subspace(J) -> np.ndarray:
    """Orthonormal basis (columns) of ker zeta(J) = Ran(1 - zeta^+ zeta)."""
    return slice_inverse(J).kernel_basis


def represent_set(values, J, I: ComplexStructure) -> tuple[np.ndarray, np.ndarray]:
    """The affine set (1, I)[zeta^+ f + ker zeta(J)] as (center, spanning
    columns).  The spanning set is empty exactly when I is in C_ker(J)."""
    S = slice_inverse(J)
    center = S.apply(values) @ one_i(I).T
    span = one_i(I) @ S.kernel_basis
    if span.size and np.linalg.norm(span) <= KERNEL_TOL:
        span = span[:, :0]
    return center, span


# ---------------------------------------------------------------------------
# two slices


def two_slice_inverse(J: ComplexStructure, K: ComplexStructure, cond_max: float = 1e12) -> np.ndarray:
    """Inverse of [[1, J], [1, K]] as a real 4n x 4n matrix.

    The block matrix is invertible exactly when J - K is.
    """
    diff = J.mat - K.mat
    if np.linalg.cond(diff) > cond_max:
        raise SingularPairError("J - K is singular; two slices do not determine a stem")
    return np.linalg.inv(zeta((J, K)))


def l1_inverse(J: ComplexStructure, K: ComplexStructure) -> np.ndarray:
    """Closed form [[M J, -M K], [M, -M]] with M = (J - K)^{-1}.

    Valid when J, K are left multiplications in a left alternative algebra
    (for instance quaternions or octonions), where M J + J M = 1.
    """
    diff = J.mat - K.mat
    if np.linalg.cond(diff) > 1e12:
        raise SingularPairError("J - K is singular")
    M = np.linalg.inv(diff)
    return np.block([[M @ J.mat, -M @ K.mat], [M, -M]])


def quaternion_kernel_dim(units: Sequence[np.ndarray], tol: float = MATCH_TOL) -> int:
    """dim of the common kernel of (1, L_u) for imaginary units of a real
    division algebra: 2n if all units coincide, 0 otherwise.

    ker(1, L_u) = {(-u b, b)}, and L_u - L_v = L_{u - v} is invertible for
    u != v.
    """
    units = [np.asarray(u, float) for u in units]
    if all(np.linalg.norm(u - units[0]) <= tol for u in units[1:]):
        return len(units[0])
    return 0


def quaternion_kernel_membership(v: np.ndarray, units: Sequence[np.ndarray], tol: float = MATCH_TOL) -> bool:
    """Closed-form C_ker for a division algebra: everything when the units
    differ, otherwise only the common unit itself."""
    if quaternion_kernel_dim(units, tol) == 0:
        return True
    return bool(np.linalg.norm(np.asarray(v, float) - np.asarray(units[0], float)) <= tol)
