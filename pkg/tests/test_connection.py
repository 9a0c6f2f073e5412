"""Frame-layer closed forms against the brute-force layer, plus fixtures."""
import numpy as np
import pytest

from pullconn.algebra import Field, frob, inner_re, matmul
from pullconn.catalog import (
    clifford_torus,
    grassmann_sub,
    linear_embedding,
    perturbed,
    quaternionic_line,
    totally_real,
    veronese,
)
from pullconn.connection import (
    AlphaElement,
    DegenerateStructureError,
    alpha_basis,
    analyze_point,
    base_sectional,
    corollary_bound,
    curvature_norm,
    curvature_pairing,
    dr_component,
    fatness_margin,
    inequality_min_margin,
    parallel_residual,
    radial_residual,
)
from pullconn.homogeneous import GrassTangent, frame_lift, lie_lift, point_from_stiefel
from pullconn.immersion import point_frame, second_fundamental_form
from pullconn.oracle import curvature_pairing_fd, dr_oracle, sectional_base_fd


def frames():
    return [
        (veronese(2), np.array([0.3, -0.2])),
        (quaternionic_line(3), np.array([0.2, -0.1, 0.3, 0.05])),
        (grassmann_sub(2, 4, 5), np.array([0.3, -0.2, 0.1, 0.4])),
    ]


def test_pairing_equals_half_jay_inner():
    for chart, u in frames():
        pf = point_frame(chart, u)
        for al in alpha_basis(chart.field, chart.k):
            for a in range(pf.n):
                for c in range(pf.n):
                    lhs = curvature_pairing(pf.E_lifts[a], pf.E_lifts[c], al)
                    rhs = 0.5 * inner_re(al.jay(pf.E[a]).H, pf.E[c].H)
                    assert abs(lhs - rhs) < 1e-12


def test_pairing_signed_against_finite_differences():
    for chart, u in frames():
        pf = point_frame(chart, u)
        for al in alpha_basis(chart.field, chart.k):
            w, v = al.fiber_pair(pf.pt.V)
            for a in range(min(pf.n, 2)):
                for c in range(pf.n):
                    frame_val = curvature_pairing(pf.E_lifts[a], pf.E_lifts[c], al)
                    oracle_val = curvature_pairing_fd(
                        chart, u, pf.coeff[a], pf.coeff[c], w, v)
                    assert abs(frame_val - oracle_val) < 1e-8


def test_pairing_antisymmetry_and_frame_guard():
    chart, u = veronese(2), np.array([0.3, -0.2])
    pf = point_frame(chart, u)
    al = AlphaElement.imaginary_unit(Field.COMPLEX, 1j)
    assert abs(curvature_pairing(pf.E_lifts[0], pf.E_lifts[1], al)
               + curvature_pairing(pf.E_lifts[1], pf.E_lifts[0], al)) < 1e-12
    other = point_frame(chart, [0.1, 0.1])
    with pytest.raises(ValueError):
        curvature_pairing(pf.E_lifts[0], other.E_lifts[1], al)


def test_rank_two_real_bracket_fixture():
    # plane span(e1, e2) in R^4, horizontal directions W B with W = [e3 e4]
    V = np.zeros((4, 2))
    V[0, 0] = V[1, 1] = 1.0
    pt = point_from_stiefel(V)
    fr = frame_lift(pt)
    alpha = AlphaElement.decomposable(np.eye(2)[0], np.eye(2)[1])

    def lift_of(B):
        H = np.zeros((4, 2))
        H[2:, :] = B
        return lie_lift(fr, GrassTangent(pt, H))

    e11 = np.array([[1.0, 0.0], [0.0, 0.0]])
    e22 = np.array([[0.0, 0.0], [0.0, 1.0]])
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    # disjoint row/column supports commute into the vertical algebra trivially
    assert abs(curvature_pairing(lift_of(e11), lift_of(e22), alpha)) < 1e-15
    # shared row support pairs at half strength
    assert abs(curvature_pairing(lift_of(e11), lift_of(e12), alpha) + 0.5) < 1e-15


def test_curvature_norm_value_and_orthonormal_guard():
    pf = point_frame(veronese(2), [0.3, -0.2])
    al = AlphaElement.imaginary_unit(Field.COMPLEX, 1j)
    val = curvature_norm(pf.E[0], al, pf.E)
    assert abs(val - 0.5) < 1e-9
    bad = [pf.E[0], GrassTangent(pf.pt, 2.0 * pf.E[1].H)]
    with pytest.raises(ValueError):
        curvature_norm(pf.E[0], al, bad)


def test_alpha_element_validation():
    with pytest.raises(ValueError):
        AlphaElement.imaginary_unit(Field.COMPLEX, 1.0 + 0j)   # not imaginary
    with pytest.raises(ValueError):
        AlphaElement.imaginary_unit(Field.COMPLEX, 2j)         # not unit
    with pytest.raises(ValueError):
        AlphaElement.decomposable([1.0, 0.0], [1.0, 0.0])      # not orthonormal
    with pytest.raises(DegenerateStructureError):
        AlphaElement.imaginary_unit(Field.REAL, 1.0)
    assert alpha_basis(Field.REAL, 1) == []


def test_fatness_margin_fixtures():
    for d in (1, 2, 3):
        res = fatness_margin(point_frame(veronese(d), [0.3, -0.2]))
        assert abs(res.margin - 1.0) < 1e-9
        assert res.fat is True
    res = fatness_margin(point_frame(grassmann_sub(2, 4, 5), [0.3, -0.2, 0.1, 0.4]))
    assert abs(res.margin - 1.0) < 1e-9
    assert fatness_margin(point_frame(totally_real(2), [0.2, -0.3])).margin < 1e-12
    assert fatness_margin(point_frame(clifford_torus(), [0.5, 1.0])).margin < 1e-12
    hres = fatness_margin(point_frame(quaternionic_line(3), [0.2, -0.1, 0.3, 0.05]))
    assert abs(hres.margin - 1.0) < 1e-9
    dres = fatness_margin(point_frame(linear_embedding(Field.REAL, 3, 5), [0.1, -0.4]))
    assert dres.degenerate and dres.fat is None


def test_dr_paths_identical():
    rng = np.random.default_rng(2)
    for chart, u in frames():
        pf = point_frame(chart, u)
        ff = second_fundamental_form(chart, u, pf=pf)
        for al in alpha_basis(chart.field, chart.k):
            x = rng.standard_normal(pf.n)
            y = rng.standard_normal(pf.n)
            z = rng.standard_normal(pf.n)
            a = dr_component(pf, ff, x, y, z, al, path="shape")
            b = dr_component(pf, ff, x, y, z, al, path="bracket")
            assert abs(a - b) < 1e-12
            assert abs(dr_component(pf, ff, y, x, z, al) + a) < 1e-12


def test_residuals_vanish_on_catalog_parallels():
    cases = frames() + [
        (totally_real(2), np.array([0.2, -0.3])),
        (clifford_torus(), np.array([0.5, 1.0])),
    ]
    for chart, u in cases:
        pf = point_frame(chart, u)
        ff = second_fundamental_form(chart, u, pf=pf)
        par = parallel_residual(pf, ff)
        rad = radial_residual(pf, ff)
        assert par.value < 1e-9, chart.name
        assert rad.value <= par.value + 1e-12
        assert par.holds is True and rad.holds is True


def test_residual_degenerate_real_line():
    chart = linear_embedding(Field.REAL, 3, 5)
    u = np.array([0.1, -0.4])
    pf = point_frame(chart, u)
    ff = second_fundamental_form(chart, u, pf=pf)
    res = parallel_residual(pf, ff)
    assert res.degenerate and res.value == 0.0 and res.holds is None


def test_perturbed_chart_breaks_parallelism_and_matches_oracle():
    chart = perturbed(veronese(2), amplitude=0.08, seed=5)
    u = np.array([0.25, -0.15])
    pf = point_frame(chart, u)
    ff = second_fundamental_form(chart, u, pf=pf)
    par = parallel_residual(pf, ff)
    assert par.value > 1e-4
    rad = radial_residual(pf, ff)
    assert rad.value <= par.value + 1e-12

    al = AlphaElement.imaginary_unit(Field.COMPLEX, 1j)
    e = np.eye(2)
    drc = dr_component(pf, ff, e[0], e[1], e[0], al)
    w, v = al.fiber_pair(pf.pt.V)
    dro = dr_oracle(chart, u, pf.coeff[0], pf.coeff[1], pf.coeff[0], w, v)
    assert abs(drc - 2.0 * dro) < 1e-6


def test_base_sectional_matches_fd_riemann():
    e = np.eye(2)
    pf = point_frame(veronese(2), [0.3, -0.2])
    ff = second_fundamental_form(veronese(2), [0.3, -0.2], pf=pf)
    gauss = base_sectional(pf, ff, e[0], e[1])
    fd = sectional_base_fd(veronese(2), [0.3, -0.2], e[0], e[1])
    assert abs(gauss - 2.0) < 1e-6
    assert abs(gauss - fd) < 1e-4

    pfc = point_frame(clifford_torus(), [0.5, 1.0])
    ffc = second_fundamental_form(clifford_torus(), [0.5, 1.0], pf=pfc)
    assert abs(base_sectional(pfc, ffc, e[0], e[1])) < 1e-8

    u = np.array([0.3, -0.2, 0.1, 0.4])
    pfg = point_frame(grassmann_sub(2, 4, 5), u)
    ffg = second_fundamental_form(grassmann_sub(2, 4, 5), u, pf=pfg)
    # same plane in both conventions: frame vectors vs chart coordinates
    gauss = base_sectional(pfg, ffg, np.eye(4)[0], np.eye(4)[3])
    fd = sectional_base_fd(grassmann_sub(2, 4, 5), u, pfg.coeff[0], pfg.coeff[3])
    assert abs(gauss - fd) < 1e-4


def test_inequality_margins():
    for d, expect in ((2, 2.0), (3, 4.0 / 3.0)):
        pf = point_frame(veronese(d), [0.3, -0.2])
        ff = second_fundamental_form(veronese(d), [0.3, -0.2], pf=pf)
        res = inequality_min_margin(pf, ff)
        assert abs(res.min_margin - expect) < 1e-6
        assert res.strict is True
    pfc = point_frame(clifford_torus(), [0.5, 1.0])
    ffc = second_fundamental_form(clifford_torus(), [0.5, 1.0], pf=pfc)
    res = inequality_min_margin(pfc, ffc)
    assert abs(res.min_margin) < 1e-9
    assert res.strict is False
    # the quaternionic line is a round 4-sphere: every section curves at 4
    pfh = point_frame(quaternionic_line(3), [0.2, -0.1, 0.3, 0.05])
    ffh = second_fundamental_form(quaternionic_line(3), [0.2, -0.1, 0.3, 0.05], pf=pfh)
    res = inequality_min_margin(pfh, ffh)
    assert abs(res.min_margin - 4.0) < 1e-6


def test_corollary_bound_reference_values():
    lhs, rhs, ok = corollary_bound(0.0, 0.0)
    assert rhs == pytest.approx(1.0 / 8.0) and ok
    _, rhs, _ = corollary_bound(0.0, np.pi / 4.0)
    assert rhs == pytest.approx(1.0 / 24.0)
    _, rhs, _ = corollary_bound(0.0, np.pi / 2.0)
    assert rhs == 0.0
    lhs, rhs, ok = corollary_bound(0.25, 0.0)
    assert not ok


def test_corollary_soundness_on_linear_chart():
    # totally geodesic complex subspace: bound satisfied and indeed fat
    res = analyze_point(linear_embedding(Field.COMPLEX, 3, 4),
                        [0.1, 0.2, -0.3, 0.4], normalize=True)
    lhs, rhs, ok = res.corollary
    assert ok and lhs < 1e-8
    assert res.fatness.fat is True
    # holomorphic curve of degree 2: bound fails, no implication claimed
    res2 = analyze_point(veronese(2), [0.3, -0.2], normalize=True)
    lhs2, rhs2, ok2 = res2.corollary
    assert abs(lhs2 - 0.25) < 1e-4 and abs(rhs2 - 0.125) < 1e-12 and not ok2


def test_analysis_frame_and_gauge_independent():
    chart, u = veronese(2), np.array([0.3, -0.2])
    base = fatness_margin(point_frame(chart, u))
    rev = fatness_margin(point_frame(chart, u, completion="reversed"))
    gauged = fatness_margin(point_frame(chart, u, gauge=np.array([[np.exp(0.9j)]])))
    assert abs(base.margin - rev.margin) < 1e-8
    assert abs(base.margin - gauged.margin) < 1e-8

    pf1 = point_frame(chart, u)
    pf2 = point_frame(chart, u, gauge=np.array([[np.exp(-1.3j)]]))
    ff1 = second_fundamental_form(chart, u, pf=pf1)
    ff2 = second_fundamental_form(chart, u, pf=pf2)
    assert abs(parallel_residual(pf1, ff1).value
               - parallel_residual(pf2, ff2).value) < 1e-8
    assert abs(inequality_min_margin(pf1, ff1).min_margin
               - inequality_min_margin(pf2, ff2).min_margin) < 1e-8


def test_analyze_point_bundle():
    res = analyze_point(veronese(3), [0.1, 0.4], normalize=True)
    v = res.verdict
    assert v["fat"] and v["parallel"] and v["radial"] and v["inequality_strict"]
    assert v["corollary_satisfied"] is False
    assert res.radial.value <= res.parallel.value + 1e-12
    assert res.theta.value < 1e-6
    assert abs(res.normalization - 4.0) < 1e-6

    real_res = analyze_point(linear_embedding(Field.REAL, 3, 5), [0.1, -0.4],
                             normalize=True)
    assert real_res.theta is None and real_res.corollary is None
    assert real_res.verdict["fat"] is None
