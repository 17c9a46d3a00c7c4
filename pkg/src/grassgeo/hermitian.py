"""Indefinite hermitian linear algebra over the reals and the complexes.

Convention used everywhere in the package: the form is linear in the first
slot and conjugate-linear in the second,

    <v, w> = w^H J v,

so that ``J[b, a] = <e_a, e_b>``.  Adjoints, projectors and Gram matrices all
follow from this choice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateForm, DegeneratePoint

REAL = "R"
COMPLEX = "C"

#: smallest admissible |eigenvalue| / largest |eigenvalue| of a Gram matrix
EIG_RATIO = 1e-10
#: largest admissible condition number of a Gram matrix
COND_LIMIT = 1e12
#: relative rank threshold for representatives
RANK_RTOL = 1e-10
#: relative threshold below which a self-pairing counts as isotropic
ISOTROPY_RTOL = 1e-10


def _dtype(field):
    return np.float64 if field == REAL else np.complex128


def _coerce(matrix, field, what):
    a = np.asarray(matrix)
    if field == REAL:
        if np.iscomplexobj(a):
            if np.any(a.imag != 0):
                raise ValueError(f"{what}: complex entries are not allowed over the real field")
            a = a.real
        return np.array(a, dtype=np.float64)
    return np.array(a, dtype=np.complex128)


def _gram_is_degenerate(G):
    lam = np.abs(np.linalg.eigvalsh(G))
    amax = lam.max() if lam.size else 0.0
    if amax == 0.0:
        return True
    amin = lam.min()
    return amin < EIG_RATIO * amax or amax > COND_LIMIT * amin


@dataclass(frozen=True, eq=False)
class HermitianSpace:
    """The ambient space K^n with a nondegenerate hermitian form ``J``."""

    J: np.ndarray
    field: str = REAL

    def __post_init__(self):
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"field must be 'R' or 'C', got {self.field!r}")
        J = _coerce(self.J, self.field, "J")
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] == 0:
            raise ValueError(f"J must be a nonempty square matrix, got shape {J.shape}")
        bad = np.argwhere(J != J.conj().T)
        if bad.size:
            a, b = bad[0]
            raise ValueError(
                f"J is not hermitian: J[{a}][{b}] = {J[a, b]} but conj(J[{b}][{a}]) = {np.conj(J[b, a])}"
            )
        if _gram_is_degenerate(J):
            raise DegenerateForm("J is singular (or numerically so)")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    @property
    def dtype(self):
        return _dtype(self.field)

    @classmethod
    def diagonal(cls, signs, field=REAL):
        return cls(np.diag(np.asarray(signs, dtype=float)), field)


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """A k-subspace of V given by a full-rank n x k representative ``p``.

    Representatives are never normalized behind the caller's back; use
    :func:`orthonormalize` for a form-orthonormal one.
    """

    space: HermitianSpace
    p: np.ndarray

    def __post_init__(self):
        p = _coerce(self.p, self.space.field, "p")
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] != self.space.n:
            raise ValueError(f"representative must have {self.space.n} rows, got shape {p.shape}")
        k = p.shape[1]
        if k < 1 or k > self.space.n:
            raise ValueError(f"subspace dimension must be in 1..{self.space.n}, got {k}")
        sv = np.linalg.svd(p, compute_uv=False)
        if sv[-1] <= RANK_RTOL * sv[0]:
            raise ValueError("representative is not of full column rank")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.shape[1]

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def gram(self) -> np.ndarray:
        """p^H J p; entry (a, b) is <p_b, p_a>."""
        G = self.p.conj().T @ self.space.J @ self.p
        return (G + G.conj().T) / 2

    @property
    def is_nondegenerate(self) -> bool:
        return not _gram_is_degenerate(self.gram)

    def require_nondegenerate(self):
        if not self.is_nondegenerate:
            raise DegeneratePoint("the restricted form p^H J p is singular")
        return self

    def with_rep(self, p) -> "GrassmannPoint":
        return GrassmannPoint(self.space, p)

    def same_subspace(self, other: "GrassmannPoint", tol=1e-8) -> bool:
        if other.space is not self.space and not np.array_equal(other.space.J, self.space.J):
            return False
        if other.k != self.k:
            return False
        if other.p is self.p or np.array_equal(other.p, self.p):
            return True
        # rank test on the concatenation: both spans coincide iff rank stays k
        q1, _ = np.linalg.qr(self.p)
        q2, _ = np.linalg.qr(other.p)
        return np.linalg.norm(q2 - q1 @ (q1.conj().T @ q2)) <= tol


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector t in Lin(p, p^perp), stored as tau = t p (n x k).

    Column j of ``tau`` is the image of column j of the base representative.
    """

    base: GrassmannPoint
    tau: np.ndarray

    def __post_init__(self):
        tau = _coerce(self.tau, self.base.space.field, "tau")
        if tau.ndim == 1:
            tau = tau[:, None]
        if tau.shape != self.base.p.shape:
            raise ValueError(f"tangent must have shape {self.base.p.shape}, got {tau.shape}")
        p, J = self.base.p, self.base.space.J
        scale = max(1.0, np.linalg.norm(p) * np.linalg.norm(J) * np.linalg.norm(tau))
        off = np.linalg.norm(p.conj().T @ J @ tau)
        if off > 1e-8 * scale:
            raise ValueError(f"columns of tau are not orthogonal to p (|p^H J tau| = {off:.3e})")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def space(self) -> HermitianSpace:
        return self.base.space

    def endomorphism(self) -> np.ndarray:
        """The n x n matrix of t, extended by zero on p^perp."""
        p, J = self.base.p, self.space.J
        return self.tau @ np.linalg.solve(self.base.gram, p.conj().T @ J)

    def at(self, rep) -> "TangentVector":
        """The same tangent vector written against another representative."""
        point = rep if isinstance(rep, GrassmannPoint) else self.base.with_rep(rep)
        return TangentVector(point, self.endomorphism() @ point.p)

    def _aligned(self, other: "TangentVector") -> np.ndarray:
        if other.base is self.base or np.array_equal(other.base.p, self.base.p):
            return other.tau
        if not self.base.same_subspace(other.base):
            raise ValueError("tangent vectors live at different points")
        return other.at(self.base).tau

    def __add__(self, other):
        return TangentVector(self.base, self.tau + self._aligned(other))

    def __sub__(self, other):
        return TangentVector(self.base, self.tau - self._aligned(other))

    def __mul__(self, c):
        return TangentVector(self.base, c * self.tau)

    __rmul__ = __mul__

    def __neg__(self):
        return TangentVector(self.base, -self.tau)


def inner(space: HermitianSpace, v, w):
    """<v, w> = w^H J v."""
    v = np.asarray(v)
    w = np.asarray(w)
    if v.shape != (space.n,) or w.shape != (space.n,):
        raise ValueError(f"vectors must have shape ({space.n},), got {v.shape} and {w.shape}")
    return w.conj() @ space.J @ v


def adjoint(space: HermitianSpace, A) -> np.ndarray:
    """The form adjoint J^{-1} A^H J, so that <A v, w> = <v, A* w>."""
    A = np.asarray(A)
    if A.shape != (space.n, space.n):
        raise ValueError(f"operator must be {space.n} x {space.n}, got {A.shape}")
    return np.linalg.solve(space.J, A.conj().T @ space.J)


def projectors(point: GrassmannPoint):
    """(pi', pi): the orthogonal projectors onto p and onto p^perp."""
    point.require_nondegenerate()
    p, J = point.p, point.space.J
    pi_prime = p @ np.linalg.solve(point.gram, p.conj().T @ J)
    pi = np.eye(point.n, dtype=pi_prime.dtype) - pi_prime
    return pi_prime, pi


def tangent_component(point: GrassmannPoint, A) -> TangentVector:
    """The tangent vector t_p = pi[p] A pi'[p], stored as pi[p] A p."""
    _, pi = projectors(point)
    return TangentVector(point, pi @ np.asarray(A) @ point.p)


def signature(matrix) -> tuple[int, int]:
    """(n_plus, n_minus) of a hermitian matrix; raises on a degenerate one."""
    M = np.asarray(matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("signature needs a square matrix")
    if not np.allclose(M, M.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError("signature needs a hermitian matrix")
    lam = np.linalg.eigvalsh((M + M.conj().T) / 2)
    amax = np.abs(lam).max()
    if amax == 0 or np.abs(lam).min() < EIG_RATIO * amax:
        raise DegenerateForm("matrix has a (numerically) zero eigenvalue")
    return int((lam > 0).sum()), int((lam < 0).sum())


def form_orthonormal_basis(J, vectors, rtol=ISOTROPY_RTOL):
    """Pivoted Gram-Schmidt under an indefinite form.

    Returns ``(basis, signs)`` with ``basis^H J basis = diag(signs)`` spanning
    the same space as the columns of ``vectors``.  At every step the remaining
    vector of largest |self-pairing| is taken.  When all remaining vectors are
    isotropic, a sum ``v_a + c v_b`` (c in {1, -1, i, -i}) replaces ``v_a``;
    this keeps the span and always succeeds on a nondegenerate subspace.
    """
    J = np.asarray(J)
    V = np.array(vectors, dtype=np.result_type(J, vectors, np.float64))
    jscale = np.linalg.norm(J, 2)
    coeffs = (1, -1, 1j, -1j) if np.iscomplexobj(V) else (1, -1)
    remaining = [V[:, a].copy() for a in range(V.shape[1])]
    out, signs = [], []

    def selfp(v):
        return float(np.real(v.conj() @ J @ v))

    while remaining:
        vals = [selfp(v) for v in remaining]
        best = int(np.argmax(np.abs(vals)))
        v = remaining[best]
        if abs(vals[best]) <= rtol * jscale * max(np.vdot(v, v).real, np.finfo(float).tiny):
            replaced = False
            for a in range(len(remaining)):
                for b in range(len(remaining)):
                    if a == b:
                        continue
                    for c in coeffs:
                        u = remaining[a] + c * remaining[b]
                        if abs(selfp(u)) > rtol * jscale * np.vdot(u, u).real:
                            remaining[a] = u
                            replaced = True
                            break
                    if replaced:
                        break
                if replaced:
                    break
            if not replaced:
                raise DegeneratePoint("no nonisotropic pivot left")
            continue
        remaining.pop(best)
        s = 1.0 if vals[best] > 0 else -1.0
        v = v / np.sqrt(abs(vals[best]))
        out.append(v)
        signs.append(s)
        for idx, w in enumerate(remaining):
            remaining[idx] = w - s * (v.conj() @ J @ w) * v
    return np.column_stack(out), np.array(signs)


def orthonormalize(point: GrassmannPoint) -> GrassmannPoint:
    """Same subspace, new representative with p^H J p = diag(+-1)."""
    point.require_nondegenerate()
    basis, _ = form_orthonormal_basis(point.space.J, point.p)
    return point.with_rep(basis)


def orthogonal_complement(point: GrassmannPoint) -> GrassmannPoint:
    """A representative of p^perp (an (n - k)-dimensional point)."""
    point.require_nondegenerate()
    if point.k == point.n:
        raise ValueError("p^perp is zero-dimensional")
    N = scipy.linalg.null_space(point.p.conj().T @ point.space.J)
    return GrassmannPoint(point.space, N)
