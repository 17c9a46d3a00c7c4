import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from grassgeo import geometry
from grassgeo.geometry import (
    CURVATURE_SIGN,
    chart_field,
    constant_field,
    covariant_derivative,
    curvature,
    curvature_from_connection,
    einstein_constant,
    gauss_equation_verify,
    metric,
    minimality_verify,
    real_metric,
    ricci,
    second_fundamental_form_verify,
    sff_orthogonality,
    tangent_basis,
    zero_field,
)
from grassgeo.hermitian import COMPLEX, REAL, GrassmannPoint, HermitianSpace, TangentVector, projectors
from grassgeo.sampling import SWEEP_COND, gaussian, random_gl, random_instance
from grassgeo.verify import MINIMALITY_COND

from oracles import form_adjoint

seeds = st.integers(0, 2**32 - 1)
fields = st.sampled_from([REAL, COMPLEX])


def _instance(seed, field, n_tangents=3, k_min=1, n_min=3, n_max=6, max_cond=SWEEP_COND):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    k = int(rng.integers(k_min, min(3, n - 1) + 1))
    space, point, ts = random_instance(rng, n, k, field, None, n_tangents, max_cond)
    return rng, space, point, ts


def _rm(a, b):
    return float(np.real(metric(a, b)))


# -- metric ------------------------------------------------------------------------


def test_metric_examples():
    space = HermitianSpace(np.eye(3))
    p = GrassmannPoint(space, np.eye(3)[:, :1])
    t = TangentVector(p, np.eye(3)[:, 1:2])
    assert metric(t, t) == 1
    lor = HermitianSpace(np.diag([1.0, -1.0]))
    q = GrassmannPoint(lor, [[1.0], [0.0]])
    s = TangentVector(q, [[0.0], [2.0]])
    assert metric(s, s) == -4


@given(seeds, fields)
def test_metric_is_trace_of_adjoint_product(seed, field):
    _, space, point, (t1, t2, _) = _instance(seed, field)
    A1, A2 = t1.endomorphism(), t2.endomorphism()
    expected = np.trace(form_adjoint(space.J, A1) @ A2)
    assert abs(metric(t1, t2) - expected) <= 1e-10 * (1 + abs(expected))
    assert abs(metric(t2, t1) - np.conj(metric(t1, t2))) <= 1e-10 * (1 + abs(expected))


@given(seeds, fields)
def test_metric_independent_of_representative(seed, field):
    rng, space, point, (t1, t2, _) = _instance(seed, field)
    g = random_gl(rng, point.k, field)
    moved = point.with_rep(point.p @ g)
    a, b = t1.at(moved), t2.at(moved)
    assert abs(metric(a, b) - metric(t1, t2)) <= 1e-10 * (1 + abs(metric(t1, t2)))


def test_metric_rejects_different_points(rng):
    _, _, (t1,) = random_instance(rng, 4, 2, REAL, 0, 1)
    _, _, (t2,) = random_instance(rng, 4, 2, REAL, 0, 1)
    with pytest.raises(ValueError):
        metric(t1, t2)


# -- connection --------------------------------------------------------------------


@given(seeds, fields)
def test_metricity(seed, field):
    rng, space, point, (t, _, _) = _instance(seed, field)
    X = constant_field(gaussian(rng, (space.n, space.n), field))
    Y = constant_field(gaussian(rng, (space.n, space.n), field))

    def g_along(e):
        q = point.with_rep(point.p + e * t.tau)
        return metric(X.tangent(q), Y.tangent(q))

    lhs = geometry._richardson(g_along, 1e-4)
    rhs = metric(covariant_derivative(X, t), Y.tangent(point)) + metric(X.tangent(point), covariant_derivative(Y, t))
    assert abs(lhs - rhs) <= 1e-6 * (1 + abs(lhs))


@given(seeds, fields)
def test_chart_fields_torsion_free(seed, field):
    _, space, point, (t1, t2, _) = _instance(seed, field)
    X, Y = chart_field(point, t1.tau), chart_field(point, t2.tau)
    d = covariant_derivative(Y, X.tangent(point)) - covariant_derivative(X, Y.tangent(point))
    assert np.linalg.norm(d.tau) <= 1e-6


def test_lifted_field_contract(rng):
    space, point, (t,) = random_instance(rng, 5, 2, COMPLEX, None, 1)
    g = random_gl(rng, 2, COMPLEX)
    for X in (constant_field(gaussian(rng, (5, 5), COMPLEX)), chart_field(point, t.tau), zero_field(space)):
        tangency, rep = X.check(point, g)
        assert tangency <= 1e-10 and rep <= 1e-10


def test_zero_field_has_zero_derivative(rng):
    space, point, (t,) = random_instance(rng, 5, 2, REAL, None, 1)
    np.testing.assert_array_equal(covariant_derivative(zero_field(space), t).tau, 0)


def test_step_range_checked(rng):
    space, point, (t,) = random_instance(rng, 4, 2, REAL, None, 1)
    with pytest.raises(ValueError):
        covariant_derivative(zero_field(space), t, h=0.5)


# -- curvature -----------------------------------------------------------------------


def test_real_projective_sectional_curvature_is_one():
    space = HermitianSpace(np.eye(4))
    point = GrassmannPoint(space, np.eye(4)[:, :1])
    e = np.eye(4)
    t1, t2 = TangentVector(point, e[:, 1:2]), TangentVector(point, e[:, 2:3])
    # <R(t1, t2) t2, t1> carries the opposite sign of K in this convention
    assert _rm(curvature(t1, t2, t2), t1) == -1


def test_complex_projective_holomorphic_curvature_is_four():
    space = HermitianSpace(np.eye(3), COMPLEX)
    point = GrassmannPoint(space, np.eye(3)[:, :1])
    t = TangentVector(point, np.eye(3)[:, 1:2])
    it = t * 1j
    assert _rm(curvature(t, it, it), t) == -4


@given(seeds, fields)
def test_curvature_symmetries(seed, field):
    rng, space, point, (x, y, z) = _instance(seed, field)
    w = TangentVector(point, geometry.tangent_component(point, gaussian(rng, (space.n, space.n), field)).tau)
    R = lambda a, b, c: curvature(a, b, c)  # noqa: E731
    norms = [np.linalg.norm(a.endomorphism(), 2) for a in (x, y, z, w)]
    tol = 1e-13 * (1 + np.prod(norms[:3]))
    assert np.linalg.norm((R(x, y, z) + R(y, x, z)).tau) <= tol
    bianchi = R(x, y, z) + R(y, z, x) + R(z, x, y)
    if field == REAL:
        assert np.linalg.norm(bianchi.tau) <= tol
    tol = 1e-13 * (1 + np.prod(norms))
    assert abs(_rm(R(x, y, z), w) + _rm(R(x, y, w), z)) <= tol
    assert abs(_rm(R(x, y, z), w) - _rm(R(z, w, x), y)) <= tol


@given(seeds, fields)
def test_curvature_is_tangent(seed, field):
    _, space, point, (x, y, z) = _instance(seed, field)
    r = curvature(x, y, z)
    np.testing.assert_allclose(point.p.conj().T @ space.J @ r.tau, 0, atol=1e-10)


@pytest.mark.parametrize("field", [REAL, COMPLEX])
def test_curvature_matches_connection(field):
    rng = np.random.default_rng(11 if field == REAL else 12)
    for _ in range(4):
        space, point, ts = random_instance(rng, 4, 2, field, None, 3)
        X, Y, Z = (chart_field(point, t.tau) for t in ts)
        fd = curvature_from_connection(X, Y, Z, point)
        cf = curvature(*ts)
        assert np.linalg.norm(cf.tau - CURVATURE_SIGN * fd.tau) <= 1e-4
        assert np.linalg.norm(cf.tau) > 1e-2


# -- Ricci and Einstein ----------------------------------------------------------------


def test_einstein_constants():
    assert einstein_constant(REAL, 5) == 3
    assert einstein_constant(COMPLEX, 5) == 10


@given(seeds, fields)
def test_tangent_basis_orthonormal(seed, field):
    _, space, point, _ = _instance(seed, field)
    basis, signs = tangent_basis(point)
    dim = (space.n - point.k) * point.k * (1 if field == REAL else 2)
    assert len(basis) == dim
    gram = np.array([[_rm(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.diag(signs), atol=1e-10)


@given(seeds, fields)
def test_einstein(seed, field):
    _, space, point, (t1, t, _) = _instance(seed, field)
    c = einstein_constant(field, space.n)
    g = real_metric(t1, t)
    assert abs(ricci(t1, t) - c * g) <= 1e-9 * (1 + abs(g))


@given(seeds, fields)
def test_ricci_symmetric(seed, field):
    _, _, point, (a, b, _) = _instance(seed, field)
    assert abs(ricci(a, b) - ricci(b, a)) <= 1e-9 * (1 + abs(ricci(a, b)))


# -- Plucker embedding -----------------------------------------------------------------


@given(seeds, fields)
def test_minimality(seed, field):
    rng, space, point, _ = _instance(seed, field, k_min=2, n_min=4, max_cond=MINIMALITY_COND)
    m = int(rng.integers(1, point.k + 1))
    r = minimality_verify(point, m)
    assert r.max_residual <= 1e-12
    assert r.mean_curvature <= 1e-12


def test_minimality_roundoff_grows_near_degenerate_points():
    # the residual is pure roundoff of size eps |t_ij|^2
    space = HermitianSpace(np.diag([1.0, 1.0, -1.0, -1.0]))
    for c in (1.0, 1e3):
        a = np.sqrt(1 + 1 / c)
        point = GrassmannPoint(space, [[a, 0], [0, 1], [1, 0], [0, 0]])
        basis, _ = tangent_basis(point)
        size = max(np.linalg.norm(b.endomorphism(), 2) for b in basis)
        assert minimality_verify(point, 2).max_residual <= 10 * np.finfo(float).eps * size**2


@given(seeds, fields)
def test_gauss_equation(seed, field):
    _, space, point, ts = _instance(seed, field, n_tangents=4, k_min=2, n_min=4, n_max=5)
    r = gauss_equation_verify(*ts, 2)
    assert r.scalar <= 1e-9
    assert r.operator <= 1e-9


def test_gauss_equation_detects_sign_error(rng, monkeypatch):
    _, point, ts = random_instance(rng, 5, 2, REAL, 2, 4)
    assert gauss_equation_verify(*ts, 2).scalar <= 1e-9
    real_bform = geometry.bform
    monkeypatch.setattr(geometry, "bform", lambda a, b, m: -real_bform(a, b, m))
    assert gauss_equation_verify(*ts, 2).scalar > 1e-6


@given(seeds, fields)
def test_second_fundamental_form(seed, field):
    rng, space, point, (t, _, _) = _instance(seed, field, k_min=2, n_min=4, n_max=5)
    # nested differences at h = 1e-4 lose digits in proportion to the projector norm
    assume(np.linalg.norm(projectors(point)[0], 2) <= 30)
    X = constant_field(gaussian(rng, (space.n, space.n), field))
    assert second_fundamental_form_verify(t, X, 2) <= 1e-6
    assert abs(sff_orthogonality(t, X, 2)) <= 1e-6


def test_second_fundamental_form_of_zero_field(rng):
    space, point, (t,) = random_instance(rng, 5, 2, COMPLEX, None, 1)
    assert second_fundamental_form_verify(t, zero_field(space), 2) == 0
