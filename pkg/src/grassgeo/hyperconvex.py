"""Convexity of cyclic polyhedra of hyperplane segments in real hyperbolic 4-space.

Poles are positive points p_1..p_n of R^{4,1} (form diag(1,1,1,1,-1)), known
only through their Gram matrix U.  The face F_i lies on H_i = p_i^perp in the
closed ball and is bounded by the slices E_{i-1} = span(p_{i-1}, p_i)^perp and
E_i = span(p_i, p_{i+1})^perp.  Indices are 0-based and cyclic modulo n.

Brackets are minors of U:

    <i1 i2, j1 j2>       = det U[(i1, i2), (j1, j2)]
    <i1 i2 i3, j1 j2 j3> = det U[(i1, i2, i3), (j1, j2, j3)]
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleGram

LORENTZ = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])
#: band around zero inside which a strict inequality counts as marginal
DEFAULT_TOL = 1e-10
#: relative eigenvalue threshold used when realizing a Gram matrix
RANK_RTOL = 1e-10
#: default Monte Carlo budget per (i, j) pair
DEFAULT_SAMPLES = 100_000
#: fewer face members than this makes an oracle verdict inconclusive
MIN_MEMBERS = 100
#: relative band for the segment sign of sampled points
MEMBER_BAND = 1e-12


def _gram(U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {U.shape}")
    if U.shape[0] < 3:
        raise ValueError(f"need at least 3 faces, got {U.shape[0]}")
    bad = np.argwhere(U != U.T)
    if bad.size:
        i, j = bad[0]
        raise ValueError(f"Gram matrix is not symmetric at ({i}, {j}): {U[i, j]} != {U[j, i]}")
    return U


def bracket2(U, i1, i2, j1, j2) -> float:
    U = np.asarray(U)
    return float(U[i1, j1] * U[i2, j2] - U[i1, j2] * U[i2, j1])


def bracket3(U, i1, i2, i3, j1, j2, j3) -> float:
    if len({i1, i2, i3}) < 3 or len({j1, j2, j3}) < 3:
        return 0.0
    # cofactor expansion: exact on small integer entries, unlike LU
    (a, b, c), (d, e, f), (g, h, k) = np.asarray(U)[np.ix_((i1, i2, i3), (j1, j2, j3))]
    return float(a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g))


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    MARGINAL = "marginal"
    INFEASIBLE = "infeasible"


class Verdict(str, Enum):
    CONVEX = "Convex"
    NOT_CONVEX = "NotConvex"
    INFEASIBLE = "Infeasible"


@dataclass
class ConditionRecord:
    condition: str
    indices: tuple
    values: dict
    status: Status
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "indices": list(self.indices),
            "values": {k: float(v) for k, v in self.values.items()},
            "status": self.status.value,
            "reason": self.reason,
        }


def _positive(value, tol):
    """Status of the strict inequality value > 0."""
    if value > tol:
        return Status.PASS
    return Status.MARGINAL if value >= -tol else Status.FAIL


def _merge(statuses):
    for s in (Status.INFEASIBLE, Status.FAIL, Status.MARGINAL):
        if s in statuses:
            return s
    return Status.PASS


def adjacency_conditions(U, i, tol=DEFAULT_TOL) -> ConditionRecord:
    """<(i-1)i, (i-1)i> > 0 and <(i-1)i(i+1), (i-1)i(i+1)> < 0."""
    n = len(U)
    a, b = (i - 1) % n, (i + 1) % n
    pair = bracket2(U, a, i, a, i)
    triple = bracket3(U, a, i, b, a, i, b)
    s_pair, s_triple = _positive(pair, tol), _positive(-triple, tol)
    reason = []
    if s_pair is not Status.PASS:
        reason.append("hyperplanes of adjacent faces do not meet")
    if s_triple is not Status.PASS:
        reason.append("end slices of the face are not disjoint")
    return ConditionRecord("adjacency", (a, i, b), {"pair": pair, "triple": triple},
                           _merge([s_pair, s_triple]), "; ".join(reason))


def triple_condition(U, i, j, tol=DEFAULT_TOL) -> ConditionRecord:
    """<(i-1)ij, (i-1)ij> < 0: the edge E_{i-1} misses H_j."""
    n = len(U)
    a = (i - 1) % n
    value = bracket3(U, a, i, j, a, i, j)
    status = _positive(-value, tol)
    return ConditionRecord("edge_triple", (a, i, j), {"triple": value}, status,
                           "" if status is Status.PASS else "edge meets a nonadjacent hyperplane")


def nonadjacent_condition(U, i, j, tol=DEFAULT_TOL) -> ConditionRecord:
    """Whether the face F_i misses the hyperplane H_j, for j not in {i-1, i, i+1}."""
    n = len(U)
    a, b = (i - 1) % n, (i + 1) % n
    if j % n in (a, i, b):
        raise ValueError(f"j = {j} is adjacent to i = {i}")
    s = bracket2(U, i, j, i, j)
    A = bracket2(U, a, i, i, b)
    B = bracket2(U, i, j, i, b)
    C = bracket2(U, a, i, i, j)
    values = {"s": s, "A": A, "B": B, "C": C}
    if s < -tol:
        return ConditionRecord("nonadjacent", (i, j), values, Status.PASS, "disjoint hyperplanes")
    if abs(s) <= tol:
        prod = C * A * B
        values["product"] = prod
        status = _positive(prod, tol)
        return ConditionRecord("nonadjacent", (i, j), values, status,
                               "tangent hyperplanes" + ("" if status is Status.PASS else ", face touches H_j"))
    if A == 0.0:
        return ConditionRecord("nonadjacent", (i, j), values, Status.INFEASIBLE,
                               "<(i-1)i, i(i+1)> vanishes")
    T1 = bracket3(U, a, i, j, a, i, j)
    T2 = bracket3(U, i, b, j, i, b, j)
    T12 = bracket3(U, a, i, j, i, b, j)
    pa = bracket2(U, a, i, a, i)
    pb = bracket2(U, i, b, i, b)
    lhs = C * B / A
    values.update({"T1": T1, "T2": T2, "T12": T12, "pa": pa, "pb": pb, "lhs": lhs})
    statuses = [_positive(-T1, tol), _positive(-T2, tol), _positive(lhs - s, tol)]
    reason = []
    if statuses[0] is not Status.PASS or statuses[1] is not Status.PASS:
        reason.append("triple spans are not of signature ++-")
    if statuses[2] is not Status.PASS:
        reason.append("ordering inequality fails")
    if pa > 0 and pb > 0:
        eight = abs(T12) / np.sqrt(pa * pb) + max(T1 / pa, T2 / pb)
        values["margin"] = eight
        if eight < -tol:
            statuses.append(Status.FAIL)
            reason.append("H_j crosses the face")
    else:
        statuses.append(Status.INFEASIBLE)
        reason.append("adjacent pair bracket is not positive")
    status = _merge(statuses)
    return ConditionRecord("nonadjacent", (i, j), values, status,
                           "meeting hyperplanes" + (", " + "; ".join(reason) if reason else ""))


@dataclass
class ConvexityReport:
    verdict: Verdict
    records: list = field(default_factory=list)
    oracle: dict | None = None

    @property
    def witnesses(self) -> list:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "records": [r.to_dict() for r in self.records],
            "witnesses": [r.to_dict() for r in self.witnesses],
        }
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out


def nonadjacent_pairs(n):
    for i in range(n):
        for j in range(n):
            if j not in ((i - 1) % n, i, (i + 1) % n):
                yield i, j


def convexity_check(U, tol=DEFAULT_TOL) -> ConvexityReport:
    """Evaluate every condition of the convexity criterion for the Gram matrix U."""
    U = _gram(U)
    n = len(U)
    records = []
    for i in range(n):
        status = Status.PASS if U[i, i] > tol else (Status.MARGINAL if U[i, i] >= -tol else Status.FAIL)
        records.append(ConditionRecord("positive_pole", (i,), {"u": U[i, i]}, status,
                                       "" if status is Status.PASS else "pole is not positive"))
    for i in range(n):
        records.append(adjacency_conditions(U, i, tol))
        for j in range(n):
            if j not in ((i - 1) % n, i, (i + 1) % n):
                records.append(triple_condition(U, i, j, tol))
    for i, j in nonadjacent_pairs(n):
        records.append(nonadjacent_condition(U, i, j, tol))
    statuses = [r.status for r in records]
    if all(s is Status.PASS for s in statuses):
        verdict = Verdict.CONVEX
    elif any(s in (Status.FAIL, Status.MARGINAL) for s in statuses):
        verdict = Verdict.NOT_CONVEX
    else:
        verdict = Verdict.INFEASIBLE
    return ConvexityReport(verdict, records)


# -- realizations ---------------------------------------------------------------


def realize_gram(U) -> np.ndarray:
    """Columns p_1..p_n in R^{4,1} with p_i^T LORENTZ p_j = u_ij.

    Raises InfeasibleGram when U has more than four positive or more than one
    negative eigenvalue.
    """
    U = _gram(U)
    lam, Q = np.linalg.eigh(U)
    cut = RANK_RTOL * max(np.abs(lam).max(), np.finfo(float).tiny)
    pos = np.flatnonzero(lam > cut)
    neg = np.flatnonzero(lam < -cut)
    if len(pos) > 4 or len(neg) > 1:
        raise InfeasibleGram(f"Gram matrix has signature ({len(pos)}, {len(neg)}), exceeding (4, 1)")
    P = np.zeros((5, len(U)))
    for row, idx in enumerate(pos):
        P[row] = np.sqrt(lam[idx]) * Q[:, idx]
    for idx in neg:
        P[4] = np.sqrt(-lam[idx]) * Q[:, idx]
    return P


def lorentz(x, y):
    return np.asarray(x) @ LORENTZ @ np.asarray(y)


class Membership(str, Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"
    NOT_ON_FACE = "NotOnFace"


def segment_sign(P, i, X) -> np.ndarray:
    """<(i-1)i, i(i+1)> <x, p_{i-1}> <p_{i+1}, x> for each column x of X."""
    n = P.shape[1]
    a, b = (i - 1) % n, (i + 1) % n
    U = P.T @ LORENTZ @ P
    A = bracket2(U, a, i, i, b)
    X = np.asarray(X, dtype=float)
    return A * (P[:, a] @ LORENTZ @ X) * (P[:, b] @ LORENTZ @ X)


def segment_membership(P, i, x, tol=1e-10) -> Membership:
    """Locate x relative to the face F_i; x must lie in the closed ball."""
    x = np.asarray(x, dtype=float)
    scale = max(float(np.dot(x, x)), np.finfo(float).tiny)
    if lorentz(x, x) > tol * scale:
        raise ValueError("point is outside the closed ball")
    if abs(lorentz(x, P[:, i])) > tol * np.sqrt(scale) * np.linalg.norm(P[:, i]):
        return Membership.NOT_ON_FACE
    val = float(segment_sign(P, i, x))
    n = P.shape[1]
    ref = np.linalg.norm(P[:, (i - 1) % n]) * np.linalg.norm(P[:, (i + 1) % n]) * scale
    U = P.T @ LORENTZ @ P
    ref *= abs(bracket2(U, (i - 1) % n, i, i, (i + 1) % n))
    if abs(val) <= tol * ref:
        return Membership.BOUNDARY
    return Membership.INSIDE if val > 0 else Membership.OUTSIDE


def hyperplane_frame(p):
    """(n0, E): a negative unit n0 and three positive unit vectors spanning p^perp."""
    p = np.asarray(p, dtype=float)
    if lorentz(p, p) <= 0:
        raise ValueError("pole must be a positive point")
    # p^perp = kernel of the row p^T LORENTZ
    _, _, vh = np.linalg.svd((LORENTZ @ p)[None, :])
    basis = vh[1:].T
    G = basis.T @ LORENTZ @ basis
    lam, Q = np.linalg.eigh(G)
    if not (lam[0] < 0 < lam[1]):
        raise ValueError("hyperplane does not meet the ball")
    frame = basis @ Q / np.sqrt(np.abs(lam))
    return frame[:, 0], frame[:, 1:]


class OracleResult(NamedTuple):
    verdict: str            # "Intersects", "ProbablyDisjoint" or "Inconclusive"
    members: int
    positive: int
    negative: int

    def to_dict(self) -> dict:
        return dict(self._asdict())


def _rim(n0, E, q):
    """Center, radius and plane basis of the circle where q^perp cuts the sphere |y| = 1."""
    a = E.T @ LORENTZ @ q
    c = n0 @ LORENTZ @ q
    d = abs(c) / np.linalg.norm(a)
    if d >= 1:
        return None
    basis = np.linalg.svd(a[None, :])[2][1:].T
    return -c * a / (a @ a), np.sqrt(1 - d * d), basis


def sample_hyperplane(rng, p, samples, ends=()):
    """Points x = n0 + E y on H = p^perp in the closed ball, |y| <= 1.

    Linear functionals take their extremes on the boundary, so the samples are
    split between the solid ball, its sphere, and the circles where the sphere
    meets q^perp for each q in ``ends``.  Thin slivers of a face near the ideal
    boundary are found on those circles long before they are hit in the ball.
    """
    n0, E = hyperplane_frame(p)
    y = rng.standard_normal((samples, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    rims = [r for r in (_rim(n0, E, np.asarray(q, dtype=float)) for q in ends) if r is not None]
    size = samples // (2 + len(rims))
    y[:size] *= rng.uniform(size=(size, 1)) ** (1 / 3)
    for k, (center, radius, basis) in enumerate(rims):
        theta = rng.uniform(0, 2 * np.pi, size)
        rows = slice(samples - (k + 1) * size, samples - k * size)
        y[rows] = center + radius * (np.cos(theta)[:, None] * basis[:, 0] + np.sin(theta)[:, None] * basis[:, 1])
    return n0[:, None] + E @ y.T


def oracle_face_disjoint(P, i, j, samples=DEFAULT_SAMPLES, rng=None, tol=1e-12) -> OracleResult:
    """Monte Carlo test of F_i cap H_j = empty on a realization P."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(rng)
    n = P.shape[1]
    a, b = (i - 1) % n, (i + 1) % n
    X = sample_hyperplane(rng, P[:, i], samples, ends=(P[:, a], P[:, b]))
    # points on the end slices count as members: the band absorbs roundoff in the sign
    U = P.T @ LORENTZ @ P
    ref = abs(bracket2(U, a, i, i, b)) * np.linalg.norm(P[:, a]) * np.linalg.norm(P[:, b]) * (X * X).sum(axis=0)
    inside = segment_sign(P, i, X) >= -MEMBER_BAND * ref
    vals = P[:, j] @ LORENTZ @ X[:, inside]
    members = int(inside.sum())
    if members < MIN_MEMBERS:
        return OracleResult("Inconclusive", members, 0, 0)
    scale = np.linalg.norm(P[:, j]) * np.linalg.norm(X[:, inside], axis=0)
    pos = int((vals > tol * scale).sum())
    neg = int((vals < -tol * scale).sum())
    if (pos and neg) or pos + neg < members:
        return OracleResult("Intersects", members, pos, neg)
    return OracleResult("ProbablyDisjoint", members, pos, neg)


def oracle_report(P, samples=DEFAULT_SAMPLES, seed=0) -> dict:
    """Oracle verdicts for every nonadjacent pair; per-pair seeds come from ``seed``."""
    from .sampling import derive_seed

    n = P.shape[1]
    out = {}
    for i, j in nonadjacent_pairs(n):
        res = oracle_face_disjoint(P, i, j, samples, np.random.default_rng(derive_seed(seed, i, j)))
        out[f"{i},{j}"] = res.to_dict()
    return out


# -- random instances -----------------------------------------------------------


def random_polyhedron(rng, n, tries=10_000, margin=1e-3):
    """A random Gram matrix realized in R^{4,1} satisfying the adjacency conditions.

    Poles are hyperplanes at random distances whose normals follow a perturbed
    great circle of the 3-sphere; poles are then rescaled and sign-flipped at
    random.  Returns (U, P).
    """
    for _ in range(tries):
        theta = 2 * np.pi * (np.arange(n) + rng.uniform(-0.3, 0.3, n)) / n
        dirs = np.zeros((n, 4))
        dirs[:, 0], dirs[:, 1] = np.cos(theta), np.sin(theta)
        dirs += rng.uniform(0.0, 0.6) * rng.standard_normal((n, 4))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        d = rng.uniform(0.1, 1.6, n)
        P = np.vstack([np.cosh(d) * dirs.T, np.sinh(d)])
        P = P * rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
        U = P.T @ LORENTZ @ P
        U = (U + U.T) / 2
        if all(adjacency_conditions(U, i, margin).passed for i in range(n)):
            return U, P
    raise RuntimeError("could not draw a polyhedron satisfying the adjacency conditions")
