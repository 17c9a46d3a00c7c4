import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassgeo.errors import InfeasibleGram
from grassgeo.hyperconvex import (
    LORENTZ,
    Membership,
    Status,
    Verdict,
    adjacency_conditions,
    bracket2,
    bracket3,
    convexity_check,
    hyperplane_frame,
    nonadjacent_condition,
    nonadjacent_pairs,
    oracle_face_disjoint,
    random_polyhedron,
    realize_gram,
    sample_hyperplane,
    segment_membership,
    segment_sign,
)

seeds = st.integers(0, 2**32 - 1)
FIXTURES = Path(__file__).parent / "fixtures"


def circle_polyhedron(n, c2=2.0):
    """Poles on a circle of the positive cone; convex for the sizes used here."""
    c, s = np.sqrt(c2), np.sqrt(c2 - 1)
    th = 2 * np.pi * np.arange(n) / n
    P = np.vstack([c * np.cos(th), c * np.sin(th), np.zeros(n), np.zeros(n), s * np.ones(n)])
    return P.T @ LORENTZ @ P, P


def _l(x, y):
    return x @ LORENTZ @ y


def _slice_vectors(P, i, j):
    """q_1, q_2, q_3 of the segment analysis, from an explicit realization.

    q_3 is None unless H_i and H_j meet.
    """
    n = P.shape[1]
    a, b = (i - 1) % n, (i + 1) % n
    U = P.T @ LORENTZ @ P
    uii = U[i, i]

    def q(k):
        return (uii * P[:, k] - U[k, i] * P[:, i]) / np.sqrt(uii * bracket2(U, k, i, k, i))

    return q(a), q(b), q(j) if bracket2(U, i, j, i, j) > 0 else None


# -- brackets ---------------------------------------------------------------------


def test_bracket_examples():
    U = np.array([[1.0, 0.3, -2.0], [0.3, 1.0, 0.5], [-2.0, 0.5, 1.0]])
    assert bracket2(U, 0, 1, 0, 1) == pytest.approx(1 - 0.3**2, abs=1e-15)
    assert bracket2(U, 0, 0, 1, 2) == 0
    assert bracket3(U, 0, 0, 1, 0, 1, 2) == 0
    assert bracket3(U, 0, 1, 2, 0, 1, 2) == pytest.approx(np.linalg.det(U), abs=1e-14)


@given(seeds)
def test_bracket_permutation_signs(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((5, 5))
    U = A + A.T
    assert bracket2(U, 1, 0, 2, 3) == pytest.approx(-bracket2(U, 0, 1, 2, 3), abs=1e-12)
    assert bracket2(U, 0, 1, 2, 3) == pytest.approx(bracket2(U, 2, 3, 0, 1), abs=1e-12)
    assert bracket3(U, 1, 0, 2, 0, 3, 4) == pytest.approx(-bracket3(U, 0, 1, 2, 0, 3, 4), abs=1e-10)


# -- adjacency -----------------------------------------------------------------------


def test_right_angled_triple():
    U = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0], [2.0, 0.0, 1.0]])
    r = adjacency_conditions(U, 1)
    assert r.values["pair"] == 1
    assert r.values["triple"] == -3
    assert r.passed


def test_duplicate_pole_fails():
    U = np.array([[1.0, 1.0, 2.0], [1.0, 1.0, 2.0], [2.0, 2.0, 1.0]])
    r = adjacency_conditions(U, 1)
    assert r.values["pair"] == 0
    assert not r.passed
    assert convexity_check(U).verdict is Verdict.NOT_CONVEX


def test_three_faces_are_vacuous():
    x = -0.9
    U = np.array([[1.0, x, x], [x, 1.0, x], [x, x, 1.0]])
    rep = convexity_check(U)
    assert {r.condition for r in rep.records} == {"positive_pole", "adjacency"}
    assert rep.verdict is Verdict.CONVEX


def test_negative_pole_fails():
    U, _ = circle_polyhedron(5)
    U = U.copy()
    U[2, 2] = -1.0
    rep = convexity_check(U)
    assert rep.verdict is Verdict.NOT_CONVEX
    assert any(r.condition == "positive_pole" and r.indices == (2,) for r in rep.witnesses)


def test_gram_validation():
    with pytest.raises(ValueError, match="symmetric"):
        convexity_check(np.array([[1.0, 0.1, 0.0], [0.2, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(ValueError, match="at least 3"):
        convexity_check(np.eye(2))


# -- nonadjacent pairs ---------------------------------------------------------------


def _unit(entries, n=4):
    U = np.eye(n)
    for (i, j), v in entries.items():
        U[i, j] = U[j, i] = v
    return U


def test_disjoint_hyperplanes_pass():
    # <13, 13> = 1 - u13^2 = -0.5
    U = _unit({(1, 3): np.sqrt(1.5), (0, 2): 2.0})
    r = nonadjacent_condition(U, 1, 3)
    assert r.values["s"] == pytest.approx(-0.5, abs=1e-15)
    assert r.passed and r.reason == "disjoint hyperplanes"


def test_margin_equality_passes():
    # s = 1, T1 = -3, T2 = -8, |T12| = 3: the margin is exactly 0
    U = _unit({(0, 2): 3.0, (0, 3): 2.0, (2, 3): 3.0})
    r = nonadjacent_condition(U, 1, 3)
    assert r.values["s"] == 1
    assert (r.values["T1"], r.values["T2"], abs(r.values["T12"])) == pytest.approx((-3, -8, 3), abs=1e-13)
    assert r.values["lhs"] == 2
    assert abs(r.values["margin"]) <= 1e-13
    assert r.passed
    U[0, 2] = U[2, 0] = 3.0 + 1e-6
    assert nonadjacent_condition(U, 1, 3).status is Status.FAIL


def test_zero_denominator_is_infeasible():
    U = _unit({(0, 2): 0.0, (1, 3): 0.5})
    r = nonadjacent_condition(U, 1, 3)
    assert r.status is Status.INFEASIBLE


def test_adjacent_index_rejected():
    U, _ = circle_polyhedron(5)
    with pytest.raises(ValueError):
        nonadjacent_condition(U, 1, 2)


@given(seeds, st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_tangent_case_matches_ordering_inequality(seed, x, y, z):
    # with <ij, ij> = 0 exactly the ordering inequality reduces to the product test
    U = _unit({(1, 3): 1.0, (0, 1): x, (1, 2): y, (0, 3): z, (0, 2): 2.5, (2, 3): 0.3})
    r = nonadjacent_condition(U, 1, 3)
    assert r.values["s"] == 0
    A, B, C = r.values["A"], r.values["B"], r.values["C"]
    if A != 0 and abs(C * A * B) > 1e-9:
        assert (C * B / A > 0) == r.passed


# -- invariance ------------------------------------------------------------------------


def _verdicts(U):
    return convexity_check(U).verdict


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_verdict_invariances(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 8))
    U, _ = random_polyhedron(rng, n)
    v = _verdicts(U)
    D = np.diag(rng.uniform(0.3, 3.0, n) * rng.choice([-1.0, 1.0], n))
    W = D @ U @ D
    assert _verdicts((W + W.T) / 2) is v
    d = 1 / np.sqrt(np.diag(U))
    assert _verdicts(U * np.outer(d, d)) is v
    roll = np.roll(np.arange(n), int(rng.integers(1, n)))
    assert _verdicts(U[np.ix_(roll, roll)]) is v
    rev = np.arange(n)[::-1]
    assert _verdicts(U[np.ix_(rev, rev)]) is v


@pytest.mark.parametrize("n", [5, 6, 7])
def test_circle_polyhedra_convex(n):
    U, P = circle_polyhedron(n)
    assert convexity_check(U).verdict is Verdict.CONVEX
    for i, j in nonadjacent_pairs(n):
        assert oracle_face_disjoint(P, i, j, 20_000, np.random.default_rng(i * n + j)).verdict == "ProbablyDisjoint"


def test_wide_circle_not_convex():
    U, _ = circle_polyhedron(5, 10.0)
    rep = convexity_check(U)
    assert rep.verdict is Verdict.NOT_CONVEX and rep.witnesses


# -- realizations -----------------------------------------------------------------------


def test_realize_identity():
    P = realize_gram(np.eye(4))
    np.testing.assert_allclose(P.T @ LORENTZ @ P, np.eye(4), atol=1e-14)
    assert P.shape == (5, 4)


@given(seeds)
def test_realize_round_trip(seed):
    rng = np.random.default_rng(seed)
    U, _ = random_polyhedron(rng, int(rng.integers(3, 9)))
    P = realize_gram(U)
    assert np.abs(P.T @ LORENTZ @ P - U).max() <= 1e-10 * max(1, np.abs(U).max())


def test_realize_rejects_two_negative_directions():
    U = np.diag([1.0, 1.0, 1.0, 1.0, -1.0, -1.0])
    with pytest.raises(InfeasibleGram, match=r"\(4, 2\)"):
        realize_gram(U)
    with pytest.raises(InfeasibleGram):
        realize_gram(np.eye(5))


def test_hyperplane_frame(rng):
    p = np.array([0.3, -1.2, 0.4, 2.0, 1.1])
    n0, E = hyperplane_frame(p)
    F = np.column_stack([n0, E])
    np.testing.assert_allclose(F.T @ LORENTZ @ F, np.diag([-1.0, 1, 1, 1]), atol=1e-12)
    np.testing.assert_allclose(p @ LORENTZ @ F, 0, atol=1e-12)
    with pytest.raises(ValueError):
        hyperplane_frame(np.array([0, 0, 0, 0, 1.0]))


# -- segment description -------------------------------------------------------------------


def _ball_point_in(P_perp_rows, rng):
    """A random negative vector orthogonal to every column given."""
    _, _, vh = np.linalg.svd(P_perp_rows.T @ LORENTZ)
    K = vh[P_perp_rows.shape[1]:].T
    G = K.T @ LORENTZ @ K
    lam, Q = np.linalg.eigh(G)
    F = K @ Q / np.sqrt(np.abs(lam))
    y = rng.standard_normal(F.shape[1] - 1)
    y *= rng.uniform(0, 1) / max(np.linalg.norm(y), 1e-300)
    return F[:, 0] + F[:, 1:] @ y


def test_membership_boundary_on_end_slice(rng):
    _, P = circle_polyhedron(5)
    i = 2
    x = _ball_point_in(P[:, [i - 1, i]], rng)
    assert segment_membership(P, i, x) is Membership.BOUNDARY
    assert segment_membership(P, i, x + 0.1 * P[:, i]) is Membership.NOT_ON_FACE
    with pytest.raises(ValueError):
        segment_membership(P, i, P[:, 0])


@given(seeds)
def test_membership_along_slices(seed):
    rng = np.random.default_rng(seed)
    U, P = random_polyhedron(rng, int(rng.integers(4, 8)))
    n = P.shape[1]
    i = int(rng.integers(n))
    q1, q2, _ = _slice_vectors(P, i, (i + 2) % n)
    v12 = _l(q1, q2)
    assert abs(v12) > 1
    sigma = np.sign(v12)
    for t, expected in ((rng.uniform(0.05, 0.95), Membership.INSIDE), (rng.uniform(-0.4, -0.05), Membership.OUTSIDE),
                        (rng.uniform(1.05, 1.4), Membership.OUTSIDE)):
        q = (1 - t) * q1 + sigma * t * q2
        if _l(q, q) <= 1e-6:
            continue
        x = _ball_point_in(np.column_stack([q, P[:, i]]), rng)
        assert segment_membership(P, i, x) is expected


@given(seeds)
def test_slice_quantities(seed):
    rng = np.random.default_rng(seed)
    U, P = random_polyhedron(rng, int(rng.integers(4, 8)))
    n = len(U)
    for i, j in nonadjacent_pairs(n):
        a, b = (i - 1) % n, (i + 1) % n
        s = bracket2(U, i, j, i, j)
        if s <= 1e-6:
            continue
        q1, q2, q3 = _slice_vectors(P, i, j)
        Q = np.column_stack([q1, q2, q3])
        V = Q.T @ LORENTZ @ Q
        tol = 1e-8 * max(1, np.abs(V).max()) ** 3
        np.testing.assert_allclose(P[:, i] @ LORENTZ @ Q, 0, atol=1e-8 * np.abs(U).max())
        np.testing.assert_allclose(np.diag(V), 1, atol=tol)
        pa, pb = bracket2(U, a, i, a, i), bracket2(U, i, b, i, b)
        A, B, C = bracket2(U, a, i, i, b), bracket2(U, i, j, i, b), bracket2(U, a, i, i, j)
        v12, v13, v23 = V[0, 1], V[0, 2], V[1, 2]
        assert v12 == pytest.approx(-A / np.sqrt(pa * pb), abs=tol)
        assert v23 == pytest.approx(bracket2(U, i, b, i, j) / np.sqrt(pb * s), abs=tol)
        assert v13 == pytest.approx(-C / np.sqrt(pa * s), abs=tol)
        T12 = bracket3(U, a, i, j, i, b, j)
        assert v13 * v23 - v12 == pytest.approx(U[i, i] * T12 / (s * np.sqrt(pa * pb)), abs=tol)
        sigma = np.sign(v12)
        a_, b_ = (v13 - sigma * v23) ** 2 + 2 * abs(v12) - 2, v13**2 - sigma * v13 * v23 + abs(v12) - 1
        c_ = v13**2 - 1
        assert a_ * c_ - b_**2 == pytest.approx(np.linalg.det(V), abs=tol * 10)
        for t in np.linspace(0, 1, 5):
            q = (1 - t) * q1 + sigma * t * q2
            f_direct = _l(q, q3) ** 2 - _l(q, q)
            assert t * t * a_ - 2 * t * b_ + c_ == pytest.approx(f_direct, abs=tol * 10)


# -- oracle -----------------------------------------------------------------------------------


def test_oracle_disjoint_hyperplanes(rng):
    U, P = circle_polyhedron(6)
    for i, j in nonadjacent_pairs(6):
        if bracket2(U, i, j, i, j) < 0:
            r = oracle_face_disjoint(P, i, j, 10_000, rng)
            assert r.verdict == "ProbablyDisjoint" and r.members >= 100
            break
    else:
        pytest.fail("no disjoint pair")


def test_oracle_detects_pole_of_interior_slice(rng):
    # put H_j through the middle slice of F_i
    for _ in range(50):
        U, P = random_polyhedron(rng, 5)
        i, j = 0, 2
        q1, q2, _ = _slice_vectors(P, i, j)
        q = 0.5 * q1 + 0.5 * np.sign(_l(q1, q2)) * q2
        if _l(q, q) > 0.05:
            break
    P = P.copy()
    P[:, j] = q / np.sqrt(_l(q, q))
    U = P.T @ LORENTZ @ P
    r = oracle_face_disjoint(P, i, j, 20_000, rng)
    assert r.verdict == "Intersects"
    assert nonadjacent_condition(U, i, j).status is not Status.PASS


def test_oracle_inconclusive_and_validation(rng):
    _, P = circle_polyhedron(5)
    assert oracle_face_disjoint(P, 0, 2, 50, rng).verdict == "Inconclusive"
    with pytest.raises(ValueError):
        oracle_face_disjoint(P, 0, 2, 0, rng)


def test_segment_sign_vectorized(rng):
    _, P = circle_polyhedron(5)
    X = rng.standard_normal((5, 7))
    vals = segment_sign(P, 1, X)
    assert vals.shape == (7,)
    assert vals[3] == pytest.approx(float(segment_sign(P, 1, X[:, 3])))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_criterion_agrees_with_oracle(seed):
    rng = np.random.default_rng(seed)
    U, P = random_polyhedron(rng, int(rng.integers(4, 8)))
    for i, j in nonadjacent_pairs(len(U)):
        rec = nonadjacent_condition(U, i, j)
        if rec.status not in (Status.PASS, Status.FAIL):
            continue
        r = oracle_face_disjoint(P, i, j, 20_000, rng)
        if r.verdict != "Inconclusive":
            assert (r.verdict == "ProbablyDisjoint") == rec.passed, (i, j, rec.to_dict(), r)


def test_perturbation_flips_ordering_inequality():
    """Continuation on one u_ij of a convex instance until the ordering test fails."""
    for seed in range(200):
        rng = np.random.default_rng(seed)
        U, _ = random_polyhedron(rng, 5)
        if convexity_check(U).verdict is not Verdict.CONVEX:
            continue
        pairs = [(i, j) for i, j in nonadjacent_pairs(5) if bracket2(U, i, j, i, j) > 0.05]
        if pairs:
            break
    else:
        pytest.skip("no convex instance with meeting hyperplanes")
    i, j = pairs[0]

    def gap(delta):
        V = U.copy()
        V[i, j] = V[j, i] = U[i, j] + delta
        r = nonadjacent_condition(V, i, j)
        return V, r

    # walk u_ij until lhs - s changes sign, then bisect
    base = gap(0.0)[1]
    step = 0.01 * np.sign(base.values["lhs"] - base.values["s"]) * -np.sign(U[i, j])
    lo, hi = 0.0, None
    for k in range(1, 2000):
        _, r = gap(k * step)
        if "lhs" not in r.values or r.values["lhs"] <= r.values["s"]:
            hi = k * step
            break
        lo = k * step
    assert hi is not None
    V, r = gap(hi)
    rep = convexity_check(V)
    assert rep.verdict is Verdict.NOT_CONVEX
    assert any(w.indices == (i, j) and w.condition == "nonadjacent" for w in rep.witnesses)
    try:
        P = realize_gram(V)
    except InfeasibleGram:
        return
    o = oracle_face_disjoint(P, i, j, 50_000, np.random.default_rng(1))
    if o.verdict != "Inconclusive":
        assert o.verdict == "Intersects"


def test_sliver_near_ideal_boundary():
    # H_4 crosses the end slice E_6 only in a shell of width ~6e-4 under the sphere
    doc = json.loads((FIXTURES / "sliver7.json").read_text())
    U, P = np.array(doc["gram"]), np.array(doc["poles"])
    i, j = 6, 4
    r = nonadjacent_condition(U, i, j)
    assert r.status is Status.FAIL and 0 < r.values["T2"] < 1e-4
    # exact witness: span(p_i, p_{i+1}, p_j)^perp contains a timelike vector
    _, _, vh = np.linalg.svd(P[:, [i, 0, j]].T @ LORENTZ)
    W = vh[3:].T
    assert np.linalg.eigvalsh(W.T @ LORENTZ @ W)[0] < 0
    assert oracle_face_disjoint(P, i, j, 100_000, np.random.default_rng(0)).verdict == "Intersects"
    # solid ball and sphere samples alone never reach the far side of H_j
    X = sample_hyperplane(np.random.default_rng(0), P[:, i], 100_000)
    inside = segment_sign(P, i, X) >= 0
    assert (P[:, j] @ LORENTZ @ X[:, inside] > 0).all()


def test_rim_samples_lie_on_end_slices(rng):
    U, P = circle_polyhedron(6)
    # four strata of 1000: ball, sphere, rim of P3^perp, rim of P1^perp
    X = sample_hyperplane(rng, P[:, 2], 4000, ends=(P[:, 1], P[:, 3]))
    np.testing.assert_allclose(P[:, 2] @ LORENTZ @ X, 0, atol=1e-12)
    assert (np.einsum("ij,ik,jk->k", LORENTZ, X, X) <= 1e-12).all()
    rim1, rim3 = X[:, 3000:], X[:, 2000:3000]
    np.testing.assert_allclose(P[:, 1] @ LORENTZ @ rim1, 0, atol=1e-12)
    np.testing.assert_allclose(P[:, 3] @ LORENTZ @ rim3, 0, atol=1e-12)
    for R in (X[:, 1000:2000], rim1, rim3):
        np.testing.assert_allclose(np.einsum("ij,ik,jk->k", LORENTZ, R, R), 0, atol=1e-12)
