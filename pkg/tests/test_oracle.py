"""Brute-force layer: stencils, transport, holonomy, generator fits."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pullconn.algebra import Field, frob, inner_re, matmul, orthonormalize, random_matrix
from pullconn.catalog import (
    clifford_torus,
    grassmann_sub,
    quaternionic_line,
    totally_real,
    veronese,
)
from pullconn.immersion import differential
from pullconn.oracle import (
    base_transport,
    covariant_derivative,
    curvature_oracle,
    curvature_pairing_fd,
    curvature_raw,
    dr_oracle,
    exp_chart,
    fit_m_generator,
    gram_at,
    holonomy_generator,
    left_mult_matrix,
    lemma_omega_check,
    m_basis,
    parallel_transport,
    scalar_units,
    sectional_base_fd,
)
from pullconn.homogeneous import point_from_stiefel, random_horizontal, GrassTangent


def sample_charts():
    return [
        (veronese(2), np.array([0.3, -0.2])),
        (clifford_torus(), np.array([0.5, 1.0])),
        (grassmann_sub(2, 4, 5), np.array([0.3, -0.2, 0.1, 0.4])),
        (quaternionic_line(3), np.array([0.2, -0.1, 0.3, 0.05])),
    ]


@pytest.mark.parametrize("chart,u", sample_charts(),
                         ids=["veronese", "clifford", "gsub", "hline"])
def test_curvature_methods_agree(chart, u):
    w = chart(u).V
    a = curvature_oracle(chart, u, 0, 1, w, method="projector")
    b = curvature_oracle(chart, u, 0, 1, w, method="commutator")
    assert frob(a - b) < 1e-6


def test_curvature_antisymmetry_and_anti_self_adjointness():
    rng = np.random.default_rng(7)
    for chart, u in sample_charts():
        pt = chart(u)
        c1 = random_matrix(rng, pt.field, pt.k, 1)
        c2 = random_matrix(rng, pt.field, pt.k, 1)
        w = matmul(pt.V, c1)
        v = matmul(pt.V, c2)
        i, j = 0, 1
        rij = curvature_oracle(chart, u, i, j, w)
        rji = curvature_oracle(chart, u, j, i, w)
        assert frob(rij + rji) < 1e-9
        lhs = inner_re(rij, v)
        rhs = -inner_re(curvature_oracle(chart, u, i, j, v), w)
        assert abs(lhs - rhs) < 2e-6


def test_covariant_derivative_metric_compatibility():
    chart = veronese(2)
    u = np.array([0.3, -0.2])
    rng = np.random.default_rng(3)
    c1 = random_matrix(rng, Field.COMPLEX, 3, 1)
    c2 = random_matrix(rng, Field.COMPLEX, 3, 1)

    def s1(up):
        return matmul(chart(up).P, c1)

    def s2(up):
        return matmul(chart(up).P, c2)

    for i in range(2):
        def slope(h):
            e = np.zeros(2)
            e[i] = h
            return (inner_re(s1(u + e), s2(u + e)) - inner_re(s1(u - e), s2(u - e))) / (2 * h)

        lhs = (4.0 * slope(5e-4) - slope(1e-3)) / 3.0
        rhs = inner_re(covariant_derivative(chart, u, i, s1), s2(u)) \
            + inner_re(s1(u), covariant_derivative(chart, u, i, s2))
        assert abs(lhs - rhs) < 1e-7


def test_parallel_transport_stays_in_fiber_and_preserves_norm():
    for chart, u in sample_charts():
        pt = chart(u)
        u1 = u + 0.3 * np.ones_like(u) * np.array([1] + [-1] * (len(u) - 1))
        w1, pt1 = parallel_transport(chart, u, u1, pt.V, steps=60)
        drift = abs(inner_re(w1, w1) - inner_re(pt.V, pt.V))
        assert drift < 1e-9
        assert frob(w1 - matmul(pt1.P, w1)) < 1e-9
        back, _ = parallel_transport(chart, u1, u, w1, steps=60)
        assert frob(back - pt.V) < 1e-8


def test_parallel_transport_is_fourth_order():
    chart = veronese(2)
    u0 = np.array([0.1, -0.3])
    u1 = np.array([-0.4, 0.5])
    w0 = chart(u0).V
    ref, _ = parallel_transport(chart, u0, u1, w0, steps=160)
    e5 = frob(parallel_transport(chart, u0, u1, w0, steps=5)[0] - ref)
    e10 = frob(parallel_transport(chart, u0, u1, w0, steps=10)[0] - ref)
    assert e5 / e10 >= 8.0


def _raw_matrix(chart, u, i, j):
    """Real fibre matrix of the raw operator P [d_i P, d_j P]."""
    pt = chart(u)
    field, k = pt.field, pt.k
    units = scalar_units(field)
    d = len(units)

    def fib(base, a, q):
        col = base[:, a:a + 1]
        if field is Field.QUATERNION:
            qm = np.zeros((1, 1, 4))
            qm[0, 0] = q
            return matmul(col, qm)
        return col * q

    Rv = curvature_raw(chart, u, i, j, pt.V)
    M = np.zeros((k * d, k * d))
    for a in range(k):
        for t, q in enumerate(units):
            img = fib(Rv, a, q)
            for b in range(k):
                for s, qs in enumerate(units):
                    M[b * d + s, a * d + t] = inner_re(img, fib(pt.V, b, qs))
    return M


@pytest.mark.parametrize("chart,u", [
    (veronese(2), np.array([0.3, -0.2])),
    (grassmann_sub(2, 4, 5), np.array([0.3, -0.2, 0.1, 0.4])),
], ids=["veronese", "gsub"])
def test_holonomy_generator_matches_raw_curvature_at_third_order(chart, u):
    M = _raw_matrix(chart, u, 0, 1)
    errs = []
    for eps in (0.02, 0.01, 0.005):
        G = holonomy_generator(chart, u, 0, 1, eps, steps_per_leg=10, order="ij")
        errs.append(np.linalg.norm(G - (-eps**2) * M))
    p1 = np.log2(errs[0] / errs[1])
    p2 = np.log2(errs[1] / errs[2])
    assert min(p1, p2) >= 2.7


def test_holonomy_traversal_order_flips_the_generator():
    chart = veronese(2)
    u = np.array([0.3, -0.2])
    gij = holonomy_generator(chart, u, 0, 1, 0.01, order="ij", centered=True)
    gji = holonomy_generator(chart, u, 0, 1, 0.01, order="ji", centered=True)
    assert np.linalg.norm(gij + gji) < 1e-9


@pytest.mark.parametrize("field,N,k,trials", [
    (Field.REAL, 4, 2, 6),
    (Field.COMPLEX, 3, 1, 4),
    (Field.QUATERNION, 2, 1, 3),
], ids=["r-g2", "c-cp2", "h-hp1"])
def test_loop_generator_constant_is_half(field, N, k, trials):
    res = lemma_omega_check(field, N, k, trials=trials, eps=0.01, seed=11)
    assert abs(res.c_fit - 0.5) < 1e-3
    assert res.max_deviation < 1e-4
    assert res.mean_residual < 1e-6


def test_m_basis_fit_roundtrip():
    rng = np.random.default_rng(5)
    for field, k in [(Field.REAL, 2), (Field.COMPLEX, 1), (Field.COMPLEX, 2),
                     (Field.QUATERNION, 1)]:
        basis = m_basis(field, k)
        coeffs = rng.standard_normal(len(basis))
        beta = basis[0] * 0.0
        for c, b in zip(coeffs, basis):
            beta = beta + c * b
        L = left_mult_matrix(field, k, beta)
        fit, res = fit_m_generator(field, k, L)
        assert res < 1e-10
        assert frob(fit - beta) < 1e-10
    # something outside the algebra leaves a residual
    _, res = fit_m_generator(Field.COMPLEX, 1, np.eye(2))
    assert res > 0.5


def test_exp_chart_matches_finite_differences():
    rng = np.random.default_rng(9)
    for field, N, k in [(Field.REAL, 4, 2), (Field.COMPLEX, 3, 1)]:
        V = orthonormalize(random_matrix(rng, field, N, k))
        pt = point_from_stiefel(V)
        X = random_horizontal(rng, pt)
        X = GrassTangent(pt, X.H / X.norm())
        Y = random_horizontal(rng, pt)
        Y = GrassTangent(pt, Y.H - X.H * inner_re(Y.H, X.H))
        Y = GrassTangent(pt, Y.H / Y.norm())
        chart = exp_chart(pt, X, Y, half_width=0.5)
        u = np.array([0.1, -0.2])
        import dataclasses
        fd = differential(dataclasses.replace(chart, analytic_diff=None), u)
        an = differential(chart, u)
        for a, f in zip(an, fd):
            assert frob(a.H - f.H) < 1e-8
        assert frob(chart(np.zeros(2)).P - pt.P) < 1e-12


def test_base_transport_isometry_and_reversal():
    for chart, u in [(veronese(2), np.array([0.3, -0.2])),
                     (grassmann_sub(2, 4, 5), np.array([0.3, -0.2, 0.1, 0.4]))]:
        rng = np.random.default_rng(1)
        x0 = rng.standard_normal(chart.dim)
        u1 = u + 0.25 * rng.standard_normal(chart.dim)
        x1 = base_transport(chart, u, u1, x0)
        before = x0 @ gram_at(chart, u) @ x0
        after = x1 @ gram_at(chart, u1) @ x1
        assert abs(after - before) < 1e-7 * max(1.0, before)
        back = base_transport(chart, u1, u, x1)
        assert np.linalg.norm(back - x0) < 1e-7


@given(st.integers(0, 10_000))
@settings(max_examples=8, deadline=None)
def test_pairing_antisymmetric_in_base_arguments(seed):
    rng = np.random.default_rng(seed)
    chart = veronese(2)
    u = rng.uniform(-0.7, 0.7, size=2)
    x = rng.standard_normal(2)
    y = rng.standard_normal(2)
    pt = chart(u)
    w = pt.V
    v = matmul(pt.V, 1j * np.ones((1, 1)))
    a = curvature_pairing_fd(chart, u, x, y, w, v)
    b = curvature_pairing_fd(chart, u, y, x, w, v)
    assert abs(a + b) < 1e-8 * max(1.0, abs(a))


def test_dr_oracle_vanishes_for_parallel_pullbacks():
    chart = totally_real(2)
    u = np.array([0.2, -0.3])
    w = chart(u).V
    v = matmul(w, 1j * np.ones((1, 1)))
    assert abs(dr_oracle(chart, u, [1, 0], [0, 1], [1, 0], w, v)) < 1e-8
    for d in (2, 3):
        ch = veronese(d)
        u = np.array([0.3, -0.2])
        w = ch(u).V
        v = matmul(w, 1j * np.ones((1, 1)))
        assert abs(dr_oracle(ch, u, [1, 0], [0, 1], [1, 0], w, v)) < 1e-6


def test_sectional_base_fd_reference_values():
    assert abs(sectional_base_fd(veronese(1), [0.3, -0.2], [1, 0], [0, 1]) - 4.0) < 1e-5
    assert abs(sectional_base_fd(totally_real(2), [0.2, -0.3], [1, 0], [0, 1]) - 1.0) < 1e-5
    assert abs(sectional_base_fd(clifford_torus(), [0.5, 1.0], [1, 0], [0, 1])) < 1e-6
    assert abs(sectional_base_fd(quaternionic_line(2), [0.2, -0.1, 0.3, 0.05],
                                 [1, 0, 0, 0], [0, 1, 0, 0]) - 4.0) < 1e-4
