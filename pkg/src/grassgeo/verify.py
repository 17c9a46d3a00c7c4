"""Seeded verification suites.

Every check draws a random instance from a per-trial seed, evaluates one or
more residuals and compares each with a tolerance.  Instances are plain
JSON-ready dicts, so any record can be replayed standalone.
"""
from __future__ import annotations

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from . import geodesics, geometry, hyperconvex
from .exterior import (
    derivation_extension,
    induced_form,
    isometry_factor,
    max_dense_n,
    plucker_point,
    plucker_tangent,
    wedge_adjoint,
    wedge_coords,
)
from .hermitian import COMPLEX, REAL, GrassmannPoint, TangentVector, adjoint
from .sampling import SWEEP_COND, derive_seed, gaussian, random_instance, spine_instance
from .serialize import decode_matrix, encode

SUITES = ("embedding", "connection", "curvature", "einstein", "minimality", "geodesic", "brackets")
FIELDS = (REAL, COMPLEX, "both")
S_SAMPLES = 33

#: cond(p^H J p) bound for minimality instances; B(t_ij, t_ij) carries roundoff
#: of order eps * |t_ij|^2 and |t_ij| grows with the conditioning of p
MINIMALITY_COND = 10.0


@dataclass
class SuiteConfig:
    seed: int = 0
    trials: int = 10
    tol: dict = field(default_factory=dict)
    field: str = "both"
    n_min: int = 2
    n_max: int = 6
    k_max: int = 3
    samples: int = hyperconvex.DEFAULT_SAMPLES
    jobs: int = 1
    keep_instances: bool = False

    def validate(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}, got {self.field!r}")
        if not 2 <= self.n_min <= self.n_max:
            raise ValueError(f"need 2 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        if self.n_max > max_dense_n():
            raise ValueError(f"n_max = {self.n_max} exceeds the dense wedge limit {max_dense_n()}")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        unknown = sorted(set(self.tol) - set(METRICS) - {"*"})
        if unknown:
            raise ValueError(f"unknown tolerance name(s): {', '.join(unknown)}")
        return self

    def tolerance(self, metric: str) -> float:
        return float(self.tol.get(metric, self.tol.get("*", METRICS[metric][1])))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "trials": self.trials, "tol": dict(sorted(self.tol.items())),
            "field": self.field, "n_min": self.n_min, "n_max": self.n_max, "k_max": self.k_max,
            "samples": self.samples,
        }


# -- instance encoding ---------------------------------------------------------


def _pick_field(cfg, trial):
    if cfg.field == "both":
        return REAL if trial % 2 == 0 else COMPLEX
    return cfg.field


def _dims(rng, cfg, k_min=1, k_cap=None, n_min=None):
    k_cap = cfg.k_max if k_cap is None else min(k_cap, cfg.k_max)
    lo = max(cfg.n_min, k_min + 1, n_min or 0)
    if lo > cfg.n_max or k_min > k_cap:
        raise ValueError(f"size bounds n <= {cfg.n_max}, k <= {cfg.k_max} leave no admissible instance")
    n = int(rng.integers(lo, cfg.n_max + 1))
    k = int(rng.integers(k_min, min(k_cap, n - 1) + 1))
    return n, k


def _instance(space, point, tangents, **extra):
    out = {"field": space.field, "J": encode(space.J), "p": encode(point.p),
           "taus": [encode(t.tau) for t in tangents]}
    out.update(extra)
    return out


def _decode(inst):
    from .hermitian import HermitianSpace

    field_ = inst["field"]
    space = HermitianSpace(decode_matrix(inst["J"], field_, "J"), field_)
    point = GrassmannPoint(space, decode_matrix(inst["p"], field_, "p"))
    taus = [TangentVector(point, decode_matrix(t, field_, "tau")) for t in inst.get("taus", [])]
    return space, point, taus


def _generic_maker(n_tangents, k_min=1, k_cap=None, extra=None, max_cond=SWEEP_COND):
    def make(rng, cfg, trial):
        n, k = _dims(rng, cfg, k_min, k_cap)
        space, point, ts = random_instance(rng, n, k, _pick_field(cfg, trial), None, n_tangents, max_cond)
        more = extra(rng, space, point) if extra else {}
        return _instance(space, point, ts, **more)

    return make


# -- checks -------------------------------------------------------------------


def run_isometry(inst):
    _, point, (t1, t2) = _decode(inst)
    k = point.k
    worst_iso = worst_adj = worst_prod = 0.0
    factors = {}
    g = geometry.metric(t1, t2)
    for m in range(1, k + 1):
        c = isometry_factor(k, m)
        factors[str(m)] = c
        E1, E2 = plucker_tangent(t1, m), plucker_tangent(t2, m)
        worst_iso = max(worst_iso, abs(geometry.metric(E1, E2) - c * g) / (1 + abs(g)))
        space = point.space
        D1 = derivation_extension(t1, m)
        D2 = derivation_extension(t2, m)
        adj1 = adjoint(space, t1.endomorphism())
        worst_adj = max(worst_adj, np.linalg.norm(wedge_adjoint(space, D1, m) - derivation_extension(adj1, m), 2))
        # restrict to the m-th power of p through a Euclidean orthonormal basis
        Q, _ = np.linalg.qr(plucker_point(point, m).p)
        lhs = wedge_adjoint(space, D1, m) @ D2
        rhs = derivation_extension(adj1 @ t2.endomorphism(), m)
        worst_prod = max(worst_prod, np.linalg.norm((lhs - rhs) @ Q, 2))
    return ({"isometry_factor": float(worst_iso), "adjoint_identity": float(worst_adj),
             "adjoint_product": float(worst_prod)}, {"factors": factors})


def _constant_fields(rng, space, point):
    return {"A": encode(gaussian(rng, (space.n, space.n), space.field)),
            "B": encode(gaussian(rng, (space.n, space.n), space.field))}


def run_connection(inst):
    space, point, (t,) = _decode(inst)
    A = decode_matrix(inst["A"], space.field, "A")
    B = decode_matrix(inst["B"], space.field, "B")
    X, Y = geometry.constant_field(A), geometry.constant_field(B)

    def g_along(e):
        q = point.with_rep(point.p + e * t.tau)
        return geometry.metric(X.tangent(q), Y.tangent(q))

    lhs = geometry._richardson(g_along, geometry.DEFAULT_STEP)
    nX = geometry.covariant_derivative(X, t)
    nY = geometry.covariant_derivative(Y, t)
    rhs = geometry.metric(nX, Y.tangent(point)) + geometry.metric(X.tangent(point), nY)
    out = {"metricity": float(abs(lhs - rhs))}
    if point.k >= 2:
        m = int(inst.get("m", 2))
        out["second_fundamental_form"] = geometry.second_fundamental_form_verify(t, X, m)
        out["sff_orthogonality"] = float(abs(geometry.sff_orthogonality(t, X, m)))
    return out, {}


def run_curvature_fd(inst):
    _, point, (t1, t2, t3) = _decode(inst)
    X, Y, Z = (geometry.chart_field(point, t.tau) for t in (t1, t2, t3))
    fd = geometry.curvature_from_connection(X, Y, Z, point)
    cf = geometry.curvature(t1, t2, t3)
    res = np.linalg.norm(cf.tau - geometry.CURVATURE_SIGN * fd.tau)
    return {"curvature_connection": float(res)}, {"sign": geometry.CURVATURE_SIGN}


def run_gauss(inst):
    _, point, (t, t1, t2, w) = _decode(inst)
    r = geometry.gauss_equation_verify(t, t1, t2, w, 2)
    return {"gauss_scalar": r.scalar, "gauss_operator": r.operator}, {}


def run_einstein(inst):
    space, point, (t1, t) = _decode(inst)
    c = geometry.einstein_constant(space.field, space.n)
    g = geometry.real_metric(t1, t)
    return {"einstein": abs(geometry.ricci(t1, t) - c * g) / (1 + abs(g))}, {"constant": c}


def run_minimality(inst):
    _, point, _ = _decode(inst)
    r = geometry.minimality_verify(point, int(inst["m"]))
    return {"minimality": r.max_residual, "mean_curvature": r.mean_curvature}, {}


def make_geodesic(rng, cfg, trial):
    classes = ["spherical", "hyperbolic", "euclidean", "fixed"]
    cost = {"spherical": 2, "hyperbolic": 2, "euclidean": 3, "fixed": 1}
    for _ in range(100):
        k = int(rng.integers(1, min(3, cfg.k_max) + 1))
        kinds = [classes[int(c)] for c in rng.integers(0, 4, k)]
        # mostly nontrivial spines
        if all(c == "fixed" for c in kinds) and rng.uniform() < 0.9:
            continue
        need = sum(cost[c] for c in kinds)
        if need <= cfg.n_max:
            break
    else:
        raise ValueError(f"n_max = {cfg.n_max} too small for geodesic instances")
    n = int(rng.integers(max(need, cfg.n_min), cfg.n_max + 1))
    point, t = spine_instance(rng, n, kinds, _pick_field(cfg, trial))
    return _instance(point.space, point, [t], kinds=kinds)


def run_geodesic(inst):
    _, point, (t,) = _decode(inst)
    curve = geodesics.geodesic(t)
    s = np.linspace(-1.0, 1.0, S_SAMPLES)
    r = geodesics.geodesic_verify(curve, s)
    table = [{"lambda": sp.lam, "class": sp.kind.value, "speed": sp.speed} for sp in curve.spines]
    return ({"geodesic_nabla": r.nabla_residual, "geodesic_speed": r.speed_residual,
             "lift_norm": r.lift_norm_residual, "lift_orthogonality": r.lift_orthogonality_residual,
             "lift_acceleration": r.acceleration_residual,
             "spine_orthogonality": r.spine_orthogonality_residual},
            {"spines": table})


def make_brackets(rng, cfg, trial):
    n = int(rng.integers(4, 8))
    U, P = hyperconvex.random_polyhedron(rng, n)
    return {"gram": encode(U), "poles": encode(P), "oracle_seed": int(rng.integers(0, 2**63)),
            "samples": cfg.samples}


def bracket_plucker_residual(U, P) -> float:
    n = len(U)
    worst = 0.0
    for m, bracket in ((2, hyperconvex.bracket2), (3, hyperconvex.bracket3)):
        idx = list(combinations(range(n), m))
        W = induced_form(hyperconvex.LORENTZ, m)
        G = np.column_stack([wedge_coords(P[:, list(I)]) for I in idx])
        pairing = G.T @ W @ G
        for a, I in enumerate(idx):
            for b, K in enumerate(idx):
                worst = max(worst, abs(bracket(U, *I, *K) - pairing[b, a]))
    return float(worst)


def run_brackets(inst):
    U = decode_matrix(inst["gram"], REAL, "gram")
    P = decode_matrix(inst["poles"], REAL, "poles")
    seed = int(inst["oracle_seed"])
    samples = int(inst.get("samples", hyperconvex.DEFAULT_SAMPLES))
    disagree, inconclusive, tally = [], 0, {}
    for i, j in hyperconvex.nonadjacent_pairs(len(U)):
        rec = hyperconvex.nonadjacent_condition(U, i, j)
        res = hyperconvex.oracle_face_disjoint(P, i, j, samples, np.random.default_rng(derive_seed(seed, i, j)))
        key = f"{rec.status.value}/{res.verdict}"
        tally[key] = tally.get(key, 0) + 1
        if res.verdict == "Inconclusive":
            inconclusive += 1
        elif rec.passed != (res.verdict == "ProbablyDisjoint"):
            disagree.append([i, j])
    verdict = hyperconvex.convexity_check(U).verdict.value
    return ({"bracket_plucker": bracket_plucker_residual(U, P), "criterion_oracle": float(len(disagree))},
            {"verdict": verdict, "pairs": tally, "disagreements": disagree, "inconclusive": inconclusive})


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    make: Callable
    run: Callable


CHECKS = {
    c.name: c
    for c in (
        Check("plucker_isometry", "embedding", _generic_maker(2), run_isometry),
        Check("hermitian_connection", "connection",
              _generic_maker(1, extra=lambda rng, s, p: dict(_constant_fields(rng, s, p),
                                                               m=int(rng.integers(1, p.k + 1)))),
              run_connection),
        Check("curvature_vs_connection", "curvature", _generic_maker(3, 1, 1), run_curvature_fd),
        Check("gauss_equation", "curvature", _generic_maker(4, 2), run_gauss),
        Check("einstein", "einstein", _generic_maker(2), run_einstein),
        Check("minimality", "minimality",
              _generic_maker(0, 2, extra=lambda rng, s, p: {"m": int(rng.integers(2, p.k + 1))},
                             max_cond=MINIMALITY_COND), run_minimality),
        Check("geodesic", "geodesic", make_geodesic, run_geodesic),
        Check("brackets", "brackets", make_brackets, run_brackets),
    )
}

#: metric -> (property checked, default tolerance)
METRICS = {
    "isometry_factor": ("Plucker map rescales the metric by C(k-1, m-1)", 1e-9),
    "adjoint_identity": ("adjoint of the derivation extension is the extension of the adjoint", 1e-10),
    "adjoint_product": ("(E t1)* E t2 = E(t1* t2) on the m-th power of p", 1e-10),
    "metricity": ("intrinsic connection is hermitian (product rule)", 1e-6),
    "second_fundamental_form": ("ambient derivative splits into E(nabla X) + B(X, t)", 1e-6),
    "sff_orthogonality": ("B(X, t) is orthogonal to the image of the differential", 1e-6),
    "curvature_connection": ("closed-form curvature equals -(nabla commutator) on coordinate fields", 1e-4),
    "gauss_scalar": ("Gauss equation of the Plucker embedding, scalar form", 1e-9),
    "gauss_operator": ("Gauss equation of the Plucker embedding, operator form", 1e-9),
    "einstein": ("Ricci tensor is c times the metric", 1e-9),
    "minimality": ("B vanishes on every orthonormal t_ij", 1e-12),
    "mean_curvature": ("trace of B over an orthonormal basis vanishes", 1e-12),
    "geodesic_nabla": ("spine curve satisfies the geodesic equation", 1e-6),
    "geodesic_speed": ("geodesic has constant speed", 1e-8),
    "lift_norm": ("uniform lift keeps <p_j(s), p_j(s)> constant", 1e-9),
    "lift_orthogonality": ("uniform lift velocity lies in p(s)^perp", 1e-9),
    "lift_acceleration": ("uniform lift acceleration lies on the line of p_j(s)", 1e-8),
    "spine_orthogonality": ("spine planes stay pairwise orthogonal", 1e-9),
    "bracket_plucker": ("brackets equal induced-form pairings of wedges", 1e-9),
    "criterion_oracle": ("criterion agrees with the Monte Carlo oracle (disagreeing pairs)", 0.0),
}


def _name_seed(name: str) -> int:
    return zlib.crc32(name.encode())


def run_trial(name: str, trial: int, cfg: SuiteConfig) -> list:
    check = CHECKS[name]
    seed = derive_seed(cfg.seed, _name_seed(name), trial)
    rng = np.random.default_rng(seed)
    inst = check.make(rng, cfg, trial)
    try:
        residuals, details = check.run(inst)
        error = None
    except Exception as exc:  # domain failures become failing records
        residuals, details, error = {}, {}, f"{type(exc).__name__}: {exc}"
    records = []
    if error is not None:
        records.append({"name": name, "check": name, "trial": trial, "seed": seed, "anchor": "evaluation",
                        "residual": None, "tolerance": None, "pass": False, "error": error, "instance": inst})
        return records
    for metric, value in residuals.items():
        tol = cfg.tolerance(metric)
        value = float(value)
        ok = bool(np.isfinite(value) and value <= tol)
        rec = {"name": metric, "check": name, "trial": trial, "seed": seed, "anchor": METRICS[metric][0],
               "residual": value, "tolerance": tol, "pass": ok}
        if details:
            rec["details"] = details
        if not ok or cfg.keep_instances:
            rec["instance"] = inst
        records.append(rec)
    return records


def checks_for(suite: str) -> list:
    if suite == "all":
        return list(CHECKS)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    return [c.name for c in CHECKS.values() if c.suite == suite]


def run_suite(suite: str, cfg: SuiteConfig, command=None) -> dict:
    """Run every check of ``suite`` for ``cfg.trials`` trials; deterministic given the seed."""
    cfg.validate()
    names = checks_for(suite)
    tasks = [(name, trial) for name in names for trial in range(cfg.trials)]
    start = time.perf_counter()
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            chunks = list(pool.map(run_trial, *zip(*tasks), [cfg] * len(tasks)))
    else:
        chunks = [run_trial(name, trial, cfg) for name, trial in tasks]
    records = [r for chunk in chunks for r in chunk]
    failed = sum(not r["pass"] for r in records)
    return {
        "command": list(command) if command is not None else ["verify", "--suite", suite],
        "suite": suite,
        "config": cfg.to_dict(),
        "records": records,
        "summary": {"records": len(records), "failed": failed},
        "pass": failed == 0,
        "timing": {"seconds": round(time.perf_counter() - start, 3)},
    }


def replay_record(record: dict) -> dict:
    """Re-evaluate a stored record from its embedded instance."""
    if "instance" not in record or "check" not in record:
        raise ValueError("record has no embedded instance to replay")
    check = CHECKS.get(record["check"])
    if check is None:
        raise ValueError(f"unknown check {record['check']!r}")
    residuals, _ = check.run(record["instance"])
    name = record.get("name", record["check"])
    if name not in residuals:
        raise ValueError(f"check {record['check']!r} does not produce {name!r}")
    value = float(residuals[name])
    stored = record.get("residual")
    diff = None if stored is None else abs(value - float(stored))
    return {"name": name, "check": record["check"], "trial": record.get("trial"), "residual": value,
            "stored": stored, "difference": diff, "reproduced": diff is not None and diff <= 1e-12,
            "tolerance": record.get("tolerance"),
            "pass": record.get("tolerance") is not None and value <= float(record["tolerance"])}
