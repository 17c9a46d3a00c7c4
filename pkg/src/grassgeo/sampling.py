"""Seeded random instances for tests and verification sweeps."""
from __future__ import annotations

import numpy as np

from .hermitian import (
    COMPLEX,
    REAL,
    GrassmannPoint,
    HermitianSpace,
    TangentVector,
    form_orthonormal_basis,
    orthogonal_complement,
    projectors,
    tangent_component,
)

#: sweeps reject points whose Gram matrix is worse conditioned than this
SWEEP_COND = 1e3
#: and points whose projector onto p exceeds this norm; such points sit near the
#: isotropic cone, where every finite-difference derivative gains a factor ||pi'||
SWEEP_PROJ = 30.0

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x`` (state advanced by the golden gamma)."""
    z = (x + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Per-trial seed: fold each path element into the master seed with splitmix64."""
    s = master & _MASK64
    for p in path:
        s = splitmix64((s ^ splitmix64(p & _MASK64)) & _MASK64)
    return s


def gaussian(rng, shape, field=REAL):
    if field == REAL:
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n, field=REAL):
    q, r = np.linalg.qr(gaussian(rng, (n, n), field))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_space(rng, n, field=REAL, n_minus=None) -> HermitianSpace:
    """J = Q^H D Q with Q unitary and |D| in [0.5, 2]; ``n_minus`` negative directions."""
    if n_minus is None:
        n_minus = int(rng.integers(0, n + 1))
    if not 0 <= n_minus <= n:
        raise ValueError("n_minus out of range")
    signs = np.array([1.0] * (n - n_minus) + [-1.0] * n_minus)
    D = signs * rng.uniform(0.5, 2.0, n)
    Q = random_unitary(rng, n, field)
    J = Q.conj().T @ np.diag(D) @ Q
    J = (J + J.conj().T) / 2
    if field == REAL:
        J = J.real
    return HermitianSpace(J, field)


def random_point(rng, space, k, max_cond=SWEEP_COND, tries=1000, max_proj=SWEEP_PROJ) -> GrassmannPoint:
    """Gaussian representative, redrawn until p^H J p is comfortably invertible
    and the subspace keeps away from the isotropic cone."""
    for _ in range(tries):
        point = GrassmannPoint(space, gaussian(rng, (space.n, k), space.field))
        lam = np.abs(np.linalg.eigvalsh(point.gram))
        if lam.min() * max_cond < lam.max():
            continue
        if np.linalg.norm(projectors(point)[0], 2) <= max_proj:
            return point
    raise RuntimeError("could not draw a nondegenerate point")


def random_tangent(rng, point, normalize=True) -> TangentVector:
    if point.k == point.n:
        return TangentVector(point, np.zeros_like(point.p))
    t = tangent_component(point, gaussian(rng, (point.n, point.n), point.space.field))
    if normalize:
        nrm = np.linalg.norm(t.tau)
        if nrm > 0:
            t = TangentVector(point, t.tau / nrm)
    return t


def random_gl(rng, k, field=REAL, max_cond=20.0):
    while True:
        g = gaussian(rng, (k, k), field)
        if np.linalg.cond(g) <= max_cond:
            return g


def random_instance(rng, n, k, field=REAL, n_minus=None, n_tangents=2, max_cond=SWEEP_COND):
    """(space, point, [tangents]) with a well-conditioned point."""
    space = random_space(rng, n, field, n_minus)
    point = random_point(rng, space, k, max_cond)
    return space, point, [random_tangent(rng, point) for _ in range(n_tangents)]


def orthonormal_frame(point):
    """Form-orthonormal bases (E, signs_E), (F, signs_F) of p and p^perp."""
    E, se = form_orthonormal_basis(point.space.J, point.p)
    F, sf = form_orthonormal_basis(point.space.J, orthogonal_complement(point).p)
    return E, se, F, sf


def spine_instance(rng, n, kinds, field=REAL, scale=(0.3, 1.2)):
    """A point and tangent whose geodesic has prescribed spine classes.

    ``kinds`` lists one of "spherical", "hyperbolic", "euclidean", "fixed" per
    column.  The form is J = S^H D S for a random well-conditioned S, so the
    columns of S^{-1} are an orthonormal basis with signs D.  Each spherical or
    hyperbolic spine uses one vector of p^perp; a euclidean spine uses an
    isotropic sum of a positive and a negative one.  The result is disguised
    by a random change of representative.
    """
    k = len(kinds)
    need_pos = need_neg = 0
    perp = []
    for kind in kinds:
        # base vectors are all positive; a spherical spine wants a positive
        # partner, a hyperbolic one a negative partner
        if kind == "spherical":
            perp.append(("+",))
            need_pos += 1
        elif kind == "hyperbolic":
            perp.append(("-",))
            need_neg += 1
        elif kind == "euclidean":
            perp.append(("+", "-"))
            need_pos += 1
            need_neg += 1
        elif kind == "fixed":
            perp.append(())
        else:
            raise ValueError(f"unknown spine class {kind!r}")
    rest = n - k - need_pos - need_neg
    if rest < 0:
        raise ValueError(f"n = {n} too small for spines {kinds}")
    signs = [1.0] * k + [1.0] * need_pos + [-1.0] * need_neg + [1.0] * rest
    S = np.eye(n) + 0.3 * gaussian(rng, (n, n), field) / np.sqrt(n)
    J = S.conj().T @ np.diag(signs) @ S
    J = (J + J.conj().T) / 2
    if field == REAL:
        J = J.real
    space = HermitianSpace(J, field)
    basis = np.linalg.inv(S)
    E = basis[:, :k]
    pos = list(range(k, k + need_pos))
    neg = list(range(k + need_pos, k + need_pos + need_neg))
    tau = np.zeros((n, k), dtype=space.dtype)
    for j, slots in enumerate(perp):
        c = rng.uniform(*scale)
        if field == COMPLEX:
            c = c * np.exp(1j * rng.uniform(0, 2 * np.pi))
        v = np.zeros(n, dtype=space.dtype)
        for s in slots:
            v = v + basis[:, pos.pop(0) if s == "+" else neg.pop(0)]
        tau[:, j] = c * v
    g = random_gl(rng, k, field)
    point = GrassmannPoint(space, E @ g)
    return point, TangentVector(point, tau @ g)
