"""Exterior powers of V in the lexicographic multi-index basis.

A basis vector of the m-th exterior power is ``e_I = e_{i_1} ^ ... ^ e_{i_m}``
with ``i_1 < ... < i_m``, and the multi-indices are ordered
lexicographically.  Coordinates of a wedge ``v_1 ^ ... ^ v_m`` are the m x m
minors of the n x m matrix ``[v_1 ... v_m]`` (rows ``I``), so every operator
here is a dense ``C(n, m) x C(n, m)`` matrix acting on such coordinate
columns.
"""
from __future__ import annotations

import os
from functools import lru_cache
from itertools import combinations, permutations
from math import comb

import numpy as np

from .hermitian import GrassmannPoint, HermitianSpace, TangentVector, adjoint

DEFAULT_MAX_N = 12


def max_dense_n() -> int:
    """Dense-wedge guard rail; overridable through ``GRASSGEO_MAX_N``."""
    return int(os.environ.get("GRASSGEO_MAX_N", DEFAULT_MAX_N))


def _check_dense(n: int):
    if n > max_dense_n():
        raise ValueError(f"n = {n} exceeds the dense wedge limit {max_dense_n()} (set GRASSGEO_MAX_N to raise it)")


class MultiIndexBasis:
    """Strictly increasing m-subsets of ``range(n)`` in lexicographic order."""

    def __init__(self, n: int, m: int):
        _check_dense(n)
        if not 1 <= m <= n:
            raise ValueError(f"degree m must satisfy 1 <= m <= n = {n}, got {m}")
        self.n = n
        self.m = m
        self.indices = list(combinations(range(n), m))
        self.position = {I: a for a, I in enumerate(self.indices)}
        self.array = np.array(self.indices, dtype=np.intp).reshape(len(self.indices), m)

    def __len__(self):
        return len(self.indices)

    def label(self, a: int) -> str:
        """1-based label of the a-th multi-index, e.g. ``"13"`` or ``"1,10"``."""
        I = self.indices[a]
        sep = "," if self.n > 9 else ""
        return sep.join(str(i + 1) for i in I)

    def __repr__(self):
        return f"MultiIndexBasis(n={self.n}, m={self.m})"


def multi_index_basis(n: int, m: int) -> MultiIndexBasis:
    _check_dense(n)  # outside the cache, so the limit is read on every call
    return _basis_cached(n, m)


@lru_cache(maxsize=None)
def _basis_cached(n: int, m: int) -> MultiIndexBasis:
    return MultiIndexBasis(n, m)


def _minors(mats, m):
    """All m x m row-minors of a stack of n x m matrices -> (..., C(n, m))."""
    mats = np.asarray(mats)
    rows = multi_index_basis(mats.shape[-2], m).array
    return np.linalg.det(mats[..., rows, :])


def compound(A, m: int) -> np.ndarray:
    """The m-th compound matrix: entry (I, K) = det A[I, K]."""
    A = np.asarray(A)
    nr, nc = A.shape
    rows = multi_index_basis(nr, m).array
    cols = multi_index_basis(nc, m).array
    sub = A[rows[:, None, :, None], cols[None, :, None, :]]
    return np.linalg.det(sub)


def wedge_coords(vectors) -> np.ndarray:
    """Coordinates of v_1 ^ ... ^ v_m for the columns of an n x m matrix."""
    V = np.asarray(vectors)
    return _minors(V, V.shape[1])


def induced_form(J, m: int) -> np.ndarray:
    """Matrix of the induced form on the m-th exterior power.

    Uses the same convention as ``J``: entry (K, I) is <e_I, e_K> =
    det[<e_{I_a}, e_{K_b}>], which makes the result the m-th compound of J.
    """
    J = np.asarray(J)
    if not 1 <= m <= J.shape[0]:
        raise ValueError(f"degree m must satisfy 1 <= m <= {J.shape[0]}, got {m}")
    M = compound(J, m)
    return (M + M.conj().T) / 2


@lru_cache(maxsize=64)
def _wedge_space_cached(key, n, field, m):
    J = np.frombuffer(key, dtype=np.complex128 if field == "C" else np.float64).reshape(n, n)
    return HermitianSpace(induced_form(J, m), field)


def wedge_space(space: HermitianSpace, m: int) -> HermitianSpace:
    """The m-th exterior power of (V, <,>) as a HermitianSpace."""
    multi_index_basis(space.n, m)
    return _wedge_space_cached(space.J.tobytes(), space.n, space.field, m)


def wedge_inner(space: HermitianSpace, vs, ws):
    """<v_1 ^ ... ^ v_m, w_1 ^ ... ^ w_m> = det[<v_i, w_j>]."""
    V = np.asarray(vs)
    W = np.asarray(ws)
    if V.ndim == 1:
        V = V[:, None]
    if W.ndim == 1:
        W = W[:, None]
    if V.shape != W.shape or V.shape[0] != space.n:
        raise ValueError(f"need two lists of m vectors of length {space.n}, got {V.shape} and {W.shape}")
    return np.linalg.det(W.conj().T @ space.J @ V)


def plucker_point(point: GrassmannPoint, m: int) -> GrassmannPoint:
    """E^m p: the point spanned by the wedges of m columns of p.

    Column A of the representative holds the minors det p[I, A].
    """
    if not 1 <= m <= point.k:
        raise ValueError(f"degree m must satisfy 1 <= m <= k = {point.k}, got {m}")
    return GrassmannPoint(wedge_space(point.space, m), compound(point.p, m))


def _as_operator(T):
    if isinstance(T, TangentVector):
        return T.endomorphism()
    return np.asarray(T)


def derivation_extension(T, m: int) -> np.ndarray:
    """The derivation v_1 ^ ... ^ v_m -> sum_i v_1 ^ ... ^ T v_i ^ ... ^ v_m.

    ``T`` is an n x n matrix or a TangentVector (taken as an endomorphism of
    V vanishing on p^perp).
    """
    T = _as_operator(T)
    n = T.shape[0]
    basis = multi_index_basis(n, m)
    C = len(basis)
    eye = np.eye(n, dtype=T.dtype)
    mats = np.empty((C, m, n, m), dtype=T.dtype)
    for a, K in enumerate(basis.indices):
        EK = eye[:, K]
        for i in range(m):
            mats[a, i] = EK
            mats[a, i][:, i] = T[:, K[i]]
    return _minors(mats, m).sum(axis=1).T


def bform(T1, T2, m: int) -> np.ndarray:
    """The operator v_1 ^ ... ^ v_m -> sum_{i != j} (... T1 v_i ... T2 v_j ...).

    Built slot by slot on the basis wedges; zero when m = 1.
    """
    if isinstance(T1, TangentVector) and isinstance(T2, TangentVector):
        if not T1.base.same_subspace(T2.base):
            raise ValueError("tangent vectors live at different points")
    T1 = _as_operator(T1)
    T2 = _as_operator(T2)
    n = T1.shape[0]
    basis = multi_index_basis(n, m)
    C = len(basis)
    dtype = np.result_type(T1, T2)
    if m == 1:
        return np.zeros((C, C), dtype=dtype)
    pairs = list(permutations(range(m), 2))
    eye = np.eye(n, dtype=dtype)
    mats = np.empty((C, len(pairs), n, m), dtype=dtype)
    for a, K in enumerate(basis.indices):
        EK = eye[:, K]
        for r, (i, j) in enumerate(pairs):
            mats[a, r] = EK
            mats[a, r][:, i] = T1[:, K[i]]
            mats[a, r][:, j] = T2[:, K[j]]
    return _minors(mats, m).sum(axis=1).T


def plucker_tangent(t: TangentVector, m: int) -> TangentVector:
    """The differential E^m t as a tangent vector at E^m p."""
    Q = plucker_point(t.base, m)
    return TangentVector(Q, derivation_extension(t, m) @ Q.p)


def wedge_adjoint(space: HermitianSpace, X, m: int) -> np.ndarray:
    """Adjoint of an operator on the m-th exterior power under the induced form."""
    return adjoint(wedge_space(space, m), X)


def isometry_factor(k: int, m: int) -> int:
    """C(k - 1, m - 1): the factor by which E^m rescales the metric."""
    return comb(k - 1, m - 1)
