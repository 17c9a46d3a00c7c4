"""Pseudo-riemannian geometry of the nondegenerate grassmannian.

Tangent vectors at p are maps t: p -> p^perp, viewed as endomorphisms of V
vanishing on p^perp.  The metric is <t1, t2> = tr(t1* t2), the connection is
the intrinsic one

    nabla_t X(p) = (d/de X((1 + e t) p))_p ,

evaluated with central differences plus one Richardson step, and the
curvature is the closed-form (2,1)-symmetrization of the triple product
t t1* t2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DegeneratePoint
from .exterior import bform, derivation_extension, plucker_point, wedge_space
from .hermitian import (
    REAL,
    GrassmannPoint,
    TangentVector,
    adjoint,
    form_orthonormal_basis,
    orthogonal_complement,
    projectors,
    tangent_component,
)

#: base step of the finite-difference connection
DEFAULT_STEP = 1e-4

#: closed-form curvature = CURVATURE_SIGN * ([nabla_X, nabla_Y] - nabla_[X,Y]);
#: fixed once by comparing both sides on coordinate fields
CURVATURE_SIGN = -1


def _same_base(*ts: TangentVector) -> GrassmannPoint:
    base = ts[0].base
    for t in ts[1:]:
        if t.base is not base and not base.same_subspace(t.base):
            raise ValueError("tangent vectors live at different points")
    return base


def metric(t1: TangentVector, t2: TangentVector):
    """tr(t1* t2), computed on the k-dimensional domain p.

    Conjugate-linear in ``t1``; the real part is the pseudo-riemannian metric.
    """
    base = _same_base(t1, t2)
    base.require_nondegenerate()
    tau2 = t1._aligned(t2)
    J = base.space.J
    return np.trace(np.linalg.solve(base.gram, t1.tau.conj().T @ J @ tau2))


def real_metric(t1: TangentVector, t2: TangentVector) -> float:
    return float(np.real(metric(t1, t2)))


def operator_pairing(space, A, B):
    """tr(A* B) for operators on a hermitian space."""
    return np.trace(adjoint(space, A) @ B)


# -- lifted fields -------------------------------------------------------------


@dataclass(frozen=True)
class LiftedField:
    """A smooth tangent field, given on representatives.

    ``func(point)`` returns the n x n endomorphism X(p).  It must satisfy
    X(p)_p = X(p) and X(pg) = X(p) and must be free of side effects.
    """

    func: Callable[[GrassmannPoint], np.ndarray]
    name: str = "field"

    def __call__(self, point: GrassmannPoint) -> np.ndarray:
        return self.func(point)

    def tangent(self, point: GrassmannPoint) -> TangentVector:
        return TangentVector(point, self.func(point) @ point.p)

    def check(self, point: GrassmannPoint, g) -> tuple[float, float]:
        """(tangency residual, representative-independence residual) at p, pg."""
        X = self.func(point)
        pi_prime, pi = projectors(point)
        moved = self.func(point.with_rep(point.p @ g))
        return float(np.linalg.norm(pi @ X @ pi_prime - X)), float(np.linalg.norm(moved - X))


def zero_field(space) -> LiftedField:
    return LiftedField(lambda q: np.zeros((space.n, space.n), dtype=space.dtype), "zero")


def constant_field(A0) -> LiftedField:
    """The constant-in-chart field q -> pi[q] A0 pi'[q]."""
    A0 = np.asarray(A0)

    def func(q):
        pi_prime, pi = projectors(q)
        return pi @ A0 @ pi_prime

    return LiftedField(func, "constant")


def chart_field(point: GrassmannPoint, direction) -> LiftedField:
    """Coordinate field of the affine chart x -> p + x, x in Lin(p, p^perp).

    ``direction`` is an n x k matrix with columns in p^perp.  Coordinate
    fields of the same chart commute, so their Lie bracket vanishes.
    """
    p0 = point.p
    G0 = point.gram
    J = point.space.J
    D = np.asarray(direction)

    def func(q):
        a = np.linalg.solve(G0, p0.conj().T @ J @ q.p)
        chart_rep = q.with_rep(q.p @ np.linalg.inv(a))
        _, pi = projectors(chart_rep)
        return TangentVector(chart_rep, pi @ D).endomorphism()

    return LiftedField(func, "chart")


# -- connection ----------------------------------------------------------------


def _richardson(f, h):
    """Central difference at step h refined with the h/2 estimate."""
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h / 2) - f(-h / 2)) / h
    return (4 * d2 - d1) / 3


def covariant_derivative(X: LiftedField, t: TangentVector, h: float = DEFAULT_STEP) -> TangentVector:
    """nabla_t X at the base point of t."""
    if not 0 < h <= 1e-2:
        raise ValueError("step must lie in (0, 1e-2]")
    base = t.base.require_nondegenerate()

    def moved(eps):
        return X(base.with_rep(base.p + eps * t.tau))

    try:
        D = _richardson(moved, h)
    except DegeneratePoint:
        D = _richardson(moved, h / 10)
    return tangent_component(base, D)


def covariant_derivative_along(values, points, s: float, h: float = DEFAULT_STEP) -> TangentVector:
    """Covariant derivative of a field given only along a curve.

    ``points(s)`` is the curve of GrassmannPoints, ``values(s)`` the field as
    endomorphisms along it.
    """
    D = _richardson(lambda e: values(s + e), h)
    return tangent_component(points(s), D)


# -- curvature -----------------------------------------------------------------


def curvature(t1: TangentVector, t2: TangentVector, t: TangentVector) -> TangentVector:
    """R(t1, t2) t = t t1* t2 + t2 t1* t - t t2* t1 - t1 t2* t."""
    base = _same_base(t1, t2, t)
    space = base.space
    A1, A2, A = t1.endomorphism(), t2.endomorphism(), t.endomorphism()
    A1s, A2s = adjoint(space, A1), adjoint(space, A2)
    R = A @ A1s @ A2 + A2 @ A1s @ A - A @ A2s @ A1 - A1 @ A2s @ A
    return TangentVector(base, R @ base.p)


class GaussResidual(NamedTuple):
    scalar: float
    operator: float


def gauss_equation_verify(t, t1, t2, w, m: int) -> GaussResidual:
    """Both sides of the Gauss equation of the m-Plucker embedding.

    ``scalar`` is |<E^m w, B(t,t1*t2) + B(t2,t1*t) - B(t,t2*t1) - B(t1,t2*t)>
    - <B(t1,w), B(t2,t)> + <B(t2,w), B(t1,t)>| with operators restricted to the
    m-th power of p and paired by tr(A* B).  ``operator`` is the spectral-norm
    residual, relative to 1 + the product of the four operator norms, of the
    underlying operator identities
    (E^m w)* B(t, t1*t2) + (E^m w)* B(t2, t1*t) = B(t1, w)* B(t2, t) and its
    companion with t1, t2 exchanged.
    """
    base = _same_base(t, t1, t2, w)
    space = base.space
    if not 1 <= m <= base.k:
        raise ValueError(f"degree m must satisfy 1 <= m <= k = {base.k}")
    W = wedge_space(space, m)
    Pi, _ = projectors(plucker_point(base, m))
    A, A1, A2, Aw = (x.endomorphism() for x in (t, t1, t2, w))
    adj = lambda X: adjoint(space, X)  # noqa: E731
    wadj = lambda X: adjoint(W, X)  # noqa: E731

    B = lambda X, Y: bform(X, Y, m) @ Pi  # noqa: E731
    Ew = derivation_extension(Aw, m) @ Pi
    normal = B(A, adj(A1) @ A2) + B(A2, adj(A1) @ A) - B(A, adj(A2) @ A1) - B(A1, adj(A2) @ A)
    lhs = np.trace(wadj(Ew) @ normal)
    B1w, B2t, B2w, B1t = B(A1, Aw), B(A2, A), B(A2, Aw), B(A1, A)
    rhs = np.trace(wadj(B1w) @ B2t) - np.trace(wadj(B2w) @ B1t)

    Ews = wadj(Ew)
    first = Ews @ B(A, adj(A1) @ A2) + Ews @ B(A2, adj(A1) @ A) - wadj(B1w) @ B2t
    second = Ews @ B(A, adj(A2) @ A1) + Ews @ B(A1, adj(A2) @ A) - wadj(B2w) @ B1t
    scale = 1 + np.prod([np.linalg.norm(X, 2) for X in (A, A1, A2, Aw)])
    op = max(np.linalg.norm(first @ Pi, 2), np.linalg.norm(second @ Pi, 2)) / scale
    return GaussResidual(float(abs(lhs - rhs)), float(op))


# -- Ricci and Einstein --------------------------------------------------------


def tangent_basis(point: GrassmannPoint):
    """A real basis of T_p with metric signs, built on orthonormal frames.

    Returns ``(basis, signs)`` where basis[a] is a TangentVector at the
    orthonormalized representative and signs[a] = Re <b_a, b_a> = +-1.  The
    vectors are t_ij (e_j -> f_i, other e_l -> 0) and, over C, also i t_ij.
    """
    point.require_nondegenerate()
    E, se = form_orthonormal_basis(point.space.J, point.p)
    F, sf = form_orthonormal_basis(point.space.J, orthogonal_complement(point).p)
    frame = point.with_rep(E)
    scalars = (1,) if point.space.field == REAL else (1, 1j)
    basis, signs = [], []
    for c in scalars:
        for i in range(F.shape[1]):
            for j in range(E.shape[1]):
                tau = np.zeros_like(E, dtype=point.space.dtype)
                tau[:, j] = c * F[:, i]
                basis.append(TangentVector(frame, tau))
                signs.append(sf[i] * se[j])
    return basis, np.array(signs)


def ricci(t1: TangentVector, t: TangentVector) -> float:
    """Real trace of t2 -> R(t1, t2) t over the real tangent space."""
    _same_base(t1, t)
    basis, signs = tangent_basis(t1.base)
    frame = basis[0].base
    a1, a = t1.at(frame), t.at(frame)
    total = 0.0
    for b, eps in zip(basis, signs):
        total += eps * real_metric(curvature(a1, b, a), b)
    return total


def einstein_constant(field: str, n: int) -> int:
    return n - 2 if field == REAL else 2 * n


# -- minimality and second fundamental form ------------------------------------


class MinimalityReport(NamedTuple):
    max_residual: float
    mean_curvature: float


def minimality_verify(point: GrassmannPoint, m: int) -> MinimalityReport:
    """max ||B(t_ij, t_ij)|| over the orthonormal basis t_ij, and the norm of
    the trace sum_ij eps_ij B(t_ij, t_ij)."""
    if not 1 <= m <= point.k:
        raise ValueError(f"degree m must satisfy 1 <= m <= k = {point.k}")
    basis, signs = tangent_basis(point)
    worst = 0.0
    trace = None
    for b, eps in zip(basis, signs):
        Bb = bform(b, b, m)
        worst = max(worst, float(np.linalg.norm(Bb, 2)))
        trace = eps * Bb if trace is None else trace + eps * Bb
    return MinimalityReport(worst, float(np.linalg.norm(trace, 2)))


def pushforward_field(X: LiftedField, m: int):
    """q -> E^m X(q) on the Plucker image, as an operator on the m-th power."""

    def value(q: GrassmannPoint):
        Pi, _ = projectors(plucker_point(q, m))
        return derivation_extension(X(q), m) @ Pi

    return value


def second_fundamental_form_verify(t: TangentVector, X: LiftedField, m: int, h: float = DEFAULT_STEP) -> float:
    """|| nabla_{E^m t} E^m X - E^m nabla_t X - B(X(p), t) || at E^m p,
    relative to 1 + || nabla_{E^m t} E^m X ||.

    The ambient derivative is taken along the curve E^m((1 + e t) p), which
    stays on the image and has velocity E^m t.
    """
    base = t.base.require_nondegenerate()
    Pi, pi_big = projectors(plucker_point(base, m))
    push = pushforward_field(X, m)
    D = _richardson(lambda e: push(base.with_rep(base.p + e * t.tau)), h)
    ambient = pi_big @ D @ Pi
    intrinsic = derivation_extension(covariant_derivative(X, t, h), m) @ Pi
    normal = bform(X(base), t, m) @ Pi
    return float(np.linalg.norm(ambient - intrinsic - normal) / (1 + np.linalg.norm(ambient)))


def sff_orthogonality(t: TangentVector, X: LiftedField, m: int, h: float = DEFAULT_STEP) -> complex:
    """<E^m nabla_t X, B(X(p), t)> under the trace pairing on the m-th power."""
    base = t.base
    Pi, _ = projectors(plucker_point(base, m))
    tangential = derivation_extension(covariant_derivative(X, t, h), m) @ Pi
    normal = bform(X(base), t, m) @ Pi
    return operator_pairing(wedge_space(base.space, m), tangential, normal)


def curvature_from_connection(X: LiftedField, Y: LiftedField, Z: LiftedField, point: GrassmannPoint,
                              h: float = DEFAULT_STEP) -> TangentVector:
    """nabla_X nabla_Y Z - nabla_Y nabla_X Z at p, for commuting X and Y."""

    def nested(outer, inner):
        def field(q):
            return covariant_derivative(Z, inner.tangent(q), h).endomorphism()

        return covariant_derivative(LiftedField(field), outer.tangent(point), h)

    return nested(X, Y) - nested(Y, X)
