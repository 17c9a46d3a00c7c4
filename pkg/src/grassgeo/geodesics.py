"""Closed-form generic geodesics.

A tangent vector t at p is generic when the self-adjoint map t*t: p -> p has
an orthonormal basis p_1..p_k of nonisotropic eigenvectors.  Each p_j spans,
together with v_j = t p_j, a plane W_j (a spine), and the geodesic moves
every p_j inside its own plane with a uniformly parameterized lift.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DegeneratePoint, NotGeneric
from .geometry import DEFAULT_STEP, _richardson, covariant_derivative_along, metric
from .hermitian import REAL, GrassmannPoint, TangentVector, form_orthonormal_basis

#: imaginary parts of eigenvalues above this (relative) fraction are fatal
REAL_TOL = 1e-8
#: |lambda| below this fraction of the eigenvalue scale counts as zero
ZERO_TOL = 1e-10
#: eigenvalues closer than this (relative) are treated as one cluster
CLUSTER_TOL = 1e-8
#: minimum |<p_j, p_j>| for a unit-norm eigenvector
ISOTROPY_TOL = 1e-8


class SpineClass(str, Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    FIXED = "fixed"


@dataclass(frozen=True)
class Spine:
    p: np.ndarray          # eigenvector, <p, p> = sign
    v: np.ndarray          # t p
    lam: float
    sign: float
    kind: SpineClass

    @property
    def speed(self) -> float:
        return float(np.sqrt(abs(self.lam)))

    def position(self, s):
        lam = self.lam
        if self.kind is SpineClass.FIXED:
            return self.p.copy()
        if self.kind is SpineClass.EUCLIDEAN:
            return self.p + s * self.v
        w = np.sqrt(abs(lam))
        if self.kind is SpineClass.SPHERICAL:
            return np.cos(w * s) * self.p + (np.sin(w * s) / w) * self.v
        return np.cosh(w * s) * self.p + (np.sinh(w * s) / w) * self.v

    def velocity(self, s):
        lam = self.lam
        if self.kind is SpineClass.FIXED:
            return np.zeros_like(self.p)
        if self.kind is SpineClass.EUCLIDEAN:
            return self.v.copy()
        w = np.sqrt(abs(lam))
        if self.kind is SpineClass.SPHERICAL:
            return -w * np.sin(w * s) * self.p + np.cos(w * s) * self.v
        return w * np.sinh(w * s) * self.p + np.cosh(w * s) * self.v


def _classify(lam, v, scale, vscale):
    if abs(lam) <= ZERO_TOL * scale:
        if np.linalg.norm(v) <= ZERO_TOL * vscale:
            return SpineClass.FIXED
        return SpineClass.EUCLIDEAN
    return SpineClass.SPHERICAL if lam > 0 else SpineClass.HYPERBOLIC


def _split_kernel(J, vecs, images, vscale):
    """Orthonormal basis of a zero eigenspace putting the kernel of t first.

    The geodesic does not depend on the basis, but this one makes the fixed
    columns show up as Fixed spines.
    """
    _, sv, vh = np.linalg.svd(images)
    rank = int(np.count_nonzero(sv > ZERO_TOL * vscale))
    ker = vecs @ vh[rank:].conj().T
    rest = vecs @ vh[:rank].conj().T
    if ker.shape[1] == 0 or rest.shape[1] == 0:
        return form_orthonormal_basis(J, vecs, rtol=ISOTROPY_TOL)
    kb, ks = form_orthonormal_basis(J, ker, rtol=ISOTROPY_TOL)
    rest = rest - kb @ (ks[:, None] * (kb.conj().T @ J @ rest))
    rb, rs = form_orthonormal_basis(J, rest, rtol=ISOTROPY_TOL)
    return np.column_stack([kb, rb]), np.concatenate([ks, rs])


def spine_decomposition(t: TangentVector) -> list[Spine]:
    """Spines of the geodesic with initial velocity t; raises NotGeneric."""
    base = t.base.require_nondegenerate()
    J = base.space.J
    p, tau = base.p, t.tau
    M = np.linalg.solve(base.gram, tau.conj().T @ J @ tau)
    scale = max(np.linalg.norm(M, 2), np.linalg.norm(np.linalg.inv(base.gram), 2) * np.linalg.norm(tau, 2) ** 2,
                np.finfo(float).tiny)
    vscale = max(np.linalg.norm(tau, 2), np.finfo(float).tiny)
    lam_all = np.linalg.eigvals(M)
    if np.any(np.abs(lam_all.imag) > REAL_TOL * scale):
        raise NotGeneric("complex eigenvalues")
    lam_all = np.sort(lam_all.real)

    # cluster (numerically) repeated eigenvalues
    clusters = []
    for lam in lam_all:
        if clusters and abs(lam - clusters[-1][-1]) <= CLUSTER_TOL * scale:
            clusters[-1].append(lam)
        else:
            clusters.append([lam])

    spines = []
    for cl in clusters:
        lam = float(np.mean(cl))
        r = len(cl)
        _, sv, vh = np.linalg.svd(M - lam * np.eye(base.k))
        if np.count_nonzero(sv <= CLUSTER_TOL * scale) < r:
            raise NotGeneric("defective map t*t")
        # right singular vectors of the smallest singular values span the kernel
        null = vh[-r:].conj().T
        null = null / np.linalg.norm(p @ null, axis=0)
        vecs = p @ null
        selfp = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), J, vecs))
        if r == 1 and abs(selfp[0]) <= ISOTROPY_TOL * np.linalg.norm(J, 2):
            raise NotGeneric("isotropic eigenvector")
        try:
            if r > 1 and abs(lam) <= ZERO_TOL * scale:
                ortho, signs = _split_kernel(J, vecs, tau @ null, vscale)
            else:
                ortho, signs = form_orthonormal_basis(J, vecs, rtol=ISOTROPY_TOL)
        except DegeneratePoint:
            raise NotGeneric("isotropic eigenvectors") from None
        for j in range(r):
            pj = ortho[:, j]
            coeff = np.linalg.solve(base.gram, p.conj().T @ J @ pj)
            vj = tau @ coeff
            if base.space.field == REAL:
                pj, vj = pj.real, vj.real
            kind = _classify(lam, vj, scale, vscale * np.linalg.norm(coeff))
            if kind is SpineClass.FIXED:
                vj = np.zeros_like(vj)
            spines.append(Spine(pj, vj, lam if kind not in (SpineClass.EUCLIDEAN, SpineClass.FIXED) else 0.0,
                                float(signs[j]), kind))
    return spines


@dataclass(frozen=True)
class GeodesicCurve:
    """s -> p(s); ``lift(s)`` returns the spine columns p_j(s)."""

    base: GrassmannPoint
    tangent: TangentVector
    spines: tuple

    def lift(self, s) -> np.ndarray:
        return np.column_stack([sp.position(s) for sp in self.spines])

    def lift_velocity(self, s) -> np.ndarray:
        return np.column_stack([sp.velocity(s) for sp in self.spines])

    def point(self, s) -> GrassmannPoint:
        return GrassmannPoint(self.base.space, self.lift(s))

    def velocity(self, s) -> TangentVector:
        return TangentVector(self.point(s), self.lift_velocity(s))

    def velocity_operator(self, s) -> np.ndarray:
        """t(s): p_j(s) -> p_j'(s), zero on p(s)^perp."""
        return self.velocity(s).endomorphism()

    @property
    def speeds(self) -> list[float]:
        return [sp.speed for sp in self.spines]


def geodesic(t: TangentVector) -> GeodesicCurve:
    """The generic geodesic through t.base with initial velocity t."""
    return GeodesicCurve(t.base, t, tuple(spine_decomposition(t)))


class GeodesicReport(NamedTuple):
    nabla_residual: float
    speed_residual: float
    lift_norm_residual: float
    lift_orthogonality_residual: float
    acceleration_residual: float
    spine_orthogonality_residual: float
    worst_s: float


def geodesic_verify(curve: GeodesicCurve, s_values, h: float = DEFAULT_STEP) -> GeodesicReport:
    """Check the geodesic equation and the uniform-lift contract at samples.

    nabla_residual is max_s ||nabla_{G'(s)} G'(s)|| with the covariant
    derivative of the velocity field taken by finite differences along the
    curve; speed_residual is max_s |g(G'(s), G'(s)) - g(G'(0), G'(0))|.
    """
    J = curve.base.space.J
    g0 = metric(curve.velocity(0.0), curve.velocity(0.0))
    nab = speed = lnorm = lorth = acc = sorth = 0.0
    worst = float(s_values[0]) if len(s_values) else 0.0
    signs = np.array([sp.sign for sp in curve.spines])
    for s in s_values:
        s = float(s)
        try:
            t_nabla = covariant_derivative_along(curve.velocity_operator, curve.point, s, h)
        except DegeneratePoint as exc:
            raise DegeneratePoint(f"degenerate point on the curve at s = {s}") from exc
        r = float(np.linalg.norm(t_nabla.endomorphism()))
        if r > nab:
            nab, worst = r, s
        vel = curve.velocity(s)
        speed = max(speed, float(abs(metric(vel, vel) - g0)))
        P, Pd = curve.lift(s), curve.lift_velocity(s)
        gram = P.conj().T @ J @ P
        lnorm = max(lnorm, float(np.abs(np.real(np.diag(gram)) - signs).max()))
        sorth = max(sorth, float(np.abs(gram - np.diag(np.diag(gram))).max()) if P.shape[1] > 1 else 0.0)
        lorth = max(lorth, float(np.abs(P.conj().T @ J @ Pd).max()))
        # the second derivative of each lift stays on the line of p_j(s)
        for j, sp in enumerate(curve.spines):
            d2 = _richardson(lambda e: sp.velocity(s + e), h)
            pj = P[:, j]
            along = (np.vdot(pj, d2) / np.vdot(pj, pj)) * pj
            acc = max(acc, float(np.linalg.norm(d2 - along)))
    return GeodesicReport(nab, speed, lnorm, lorth, acc, sorth, worst)
