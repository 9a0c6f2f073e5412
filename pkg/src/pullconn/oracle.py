"""Brute-force reference computations: finite-difference curvature,
parallel transport, holonomy loops, transported derivatives.

Everything here is deliberately independent of the closed-form frame
expressions — projector stencils, RK4 integration and matrix logarithms
only — so agreement with the frame layer is evidence, not tautology.

Orientation note.  The fibre curvature operator that holonomy actually
measures is the raw projector bracket ``P [d_i P, d_j P]``; the exported
``curvature_oracle`` rescales it by ``bridge(field)`` so that pairings
against vertical-algebra elements use the same normalization as the frame
layer.  Loop traversal order matters: with the i-leg first, the loop
generator is ``-eps^2`` times the raw operator; the opposite traversal
flips the sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .algebra import (
    Field,
    ct,
    expm_alg,
    frob,
    inner_re,
    matmul,
    orthonormalize,
    random_matrix,
)
from .constants import FD_STEP, FD_STEP2, TRANSPORT_STEPS, bridge
from .homogeneous import (
    GrassPoint,
    GrassTangent,
    frame_lift,
    lie_lift,
    point_from_stiefel,
    proj_m,
    random_horizontal,
)
from .immersion import ImmersionChart, differential

# ----------------------------------------------------------------------------
# scalar bookkeeping for fibre coefficients
# ----------------------------------------------------------------------------

_QUNITS = np.eye(4)


def scalar_units(field: Field):
    """Real basis of the scalar field, in the package's representation."""
    if field is Field.QUATERNION:
        return [np.array(_QUNITS[t]) for t in range(4)]
    if field is Field.COMPLEX:
        return [1.0 + 0.0j, 1.0j]
    return [1.0]


def _coeff_basis_vector(field: Field, k: int, a: int, unit):
    """Fibre coefficient e_a * unit as a k-by-1 scalar column."""
    if field is Field.QUATERNION:
        c = np.zeros((k, 1, 4))
        c[a, 0] = unit
        return c
    c = np.zeros((k, 1), dtype=complex if field is Field.COMPLEX else float)
    c[a, 0] = unit
    return c


def _scalar_component(field: Field, entry, unit) -> float:
    if field is Field.QUATERNION:
        return float(np.dot(entry, unit))
    if field is Field.COMPLEX:
        return float((np.conj(unit) * entry).real)
    return float(entry)


def m_basis(field: Field, k: int):
    """Basis of anti-Hermitian k-by-k scalar matrices (the vertical algebra)."""
    out = []

    def zero():
        if field is Field.QUATERNION:
            return np.zeros((k, k, 4))
        return np.zeros((k, k), dtype=complex if field is Field.COMPLEX else float)

    units = scalar_units(field)[1:]  # imaginary units only
    if field is not Field.REAL:
        for q in units:
            for a in range(k):
                M = zero()
                M[a, a] = q
                out.append(M)
    for a in range(k):
        for b in range(a + 1, k):
            M = zero()
            if field is Field.QUATERNION:
                M[a, b] = _QUNITS[0]
                M[b, a] = -_QUNITS[0]
            else:
                M[a, b] = 1.0
                M[b, a] = -1.0
            out.append(M)
            for q in units:
                M = zero()
                M[a, b] = q
                M[b, a] = q
                out.append(M)
    return out


def left_mult_matrix(field: Field, k: int, beta) -> np.ndarray:
    """Real matrix of c -> beta c on fibre coefficients, basis e_a * unit_t."""
    units = scalar_units(field)
    d = len(units)
    n = k * d
    L = np.zeros((n, n))
    for a in range(k):
        for t, q in enumerate(units):
            col = matmul(beta, _coeff_basis_vector(field, k, a, q))
            for b in range(k):
                entry = col[b, 0]
                for s, qs in enumerate(units):
                    L[b * d + s, a * d + t] = _scalar_component(field, entry, qs)
    return L


def fit_m_generator(field: Field, k: int, G: np.ndarray):
    """Least-squares fit of a real fibre matrix to a vertical-algebra action.

    Returns (beta, residual): the anti-Hermitian scalar matrix whose
    left-multiplication matrix best matches G, and the Frobenius residual.
    """
    basis = m_basis(field, k)
    if not basis:
        return None, float(np.linalg.norm(G))
    cols = np.stack([left_mult_matrix(field, k, b).ravel() for b in basis], axis=1)
    x, *_ = np.linalg.lstsq(cols, G.ravel(), rcond=None)
    beta = basis[0] * 0.0
    for xe, b in zip(x, basis):
        beta = beta + float(xe) * b
    residual = float(np.linalg.norm(G.ravel() - cols @ x))
    return beta, residual


# ----------------------------------------------------------------------------
# covariant derivative and curvature stencils
# ----------------------------------------------------------------------------

def covariant_derivative(chart: ImmersionChart, u, i: int, section,
                         h: float = FD_STEP, richardson: bool = True):
    """P * (central difference of the section) along coordinate i."""
    u = np.asarray(u, dtype=float)
    P = chart(u).P

    def diff(step):
        e = np.zeros_like(u)
        e[i] = step
        return (section(u + e) - section(u - e)) / (2.0 * step)

    d = diff(h)
    if richardson:
        d = (4.0 * diff(h / 2.0) - d) / 3.0
    return matmul(P, d)


def _ambient_derivatives(chart: ImmersionChart, u, h: float = FD_STEP,
                         use_analytic: bool = True):
    """d_i P as ambient matrices, via the differential machinery."""
    D = differential(chart, u, h=h, use_analytic=use_analytic)
    return D[0].base, [t.delta for t in D]


def curvature_raw(chart: ImmersionChart, u, i: int, j: int, w, h: float = FD_STEP):
    """P [d_i P, d_j P] w — unbridged, exactly what holonomy measures."""
    pt, dP = _ambient_derivatives(chart, u, h=h)
    comm = matmul(dP[i], dP[j]) - matmul(dP[j], dP[i])
    return matmul(pt.P, matmul(comm, w))


def curvature_oracle(chart: ImmersionChart, u, i: int, j: int, w,
                     method: str = "projector", h: float = FD_STEP2):
    """Bridged fibre curvature R(d_i, d_j) w by one of two routes."""
    if method == "projector":
        return bridge(chart.field) * curvature_raw(chart, u, i, j, w)
    if method != "commutator":
        raise ValueError(f"unknown method '{method}'")
    u = np.asarray(u, dtype=float)
    P0 = chart(u).P

    def grad_section(l, up, step):
        e = np.zeros_like(up)
        e[l] = step
        dP = (chart(up + e).P - chart(up - e).P) / (2.0 * step)
        return matmul(chart(up).P, matmul(dP, w))

    def nested(step):
        def second(i_, j_):
            e = np.zeros_like(u)
            e[i_] = step
            inner = (grad_section(j_, u + e, step) - grad_section(j_, u - e, step)) / (2.0 * step)
            return matmul(P0, inner)

        return second(i, j) - second(j, i)

    val = nested(h)
    val = (4.0 * nested(h / 2.0) - val) / 3.0
    return bridge(chart.field) * val


def curvature_in_directions(chart: ImmersionChart, u, x_coords, y_coords, w,
                            h: float = FD_STEP, use_analytic: bool = True):
    """Bridged R(X, Y) w with X, Y given by coordinate components."""
    pt, dP = _ambient_derivatives(chart, u, h=h, use_analytic=use_analytic)
    DX = sum(float(c) * d for c, d in zip(x_coords, dP))
    DY = sum(float(c) * d for c, d in zip(y_coords, dP))
    comm = matmul(DX, DY) - matmul(DY, DX)
    return bridge(chart.field) * matmul(pt.P, matmul(comm, w))


def curvature_pairing_fd(chart: ImmersionChart, u, x_coords, y_coords, w, v,
                         h: float = FD_STEP, use_analytic: bool = True) -> float:
    """Real pairing Re <R(X, Y) w, v> from finite differences alone."""
    return inner_re(curvature_in_directions(chart, u, x_coords, y_coords, w,
                                            h=h, use_analytic=use_analytic), v)


# ----------------------------------------------------------------------------
# parallel transport and holonomy
# ----------------------------------------------------------------------------

def parallel_transport(chart: ImmersionChart, u0, u1, w0,
                       steps: int = TRANSPORT_STEPS, project: bool = True):
    """Transport a fibre vector along the straight coordinate segment.

    Integrates s' = [P', P] s with classical RK4; optionally re-projects
    into the fibre after every step.  Returns (w1, endpoint).
    """
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    du = u1 - u0

    cache = {}

    def field_at(t: float):
        key = round(t, 12)
        if key not in cache:
            D = differential(chart, u0 + t * du)
            Pd = sum(float(c) * tg.delta for c, tg in zip(du, D))
            P = D[0].base.P
            cache[key] = (matmul(Pd, P) - matmul(P, Pd), P)
        return cache[key]

    s = np.array(w0, copy=True)
    hstep = 1.0 / steps
    for n in range(steps):
        t = n * hstep
        A1, _ = field_at(t)
        A2, _ = field_at(t + hstep / 2.0)
        A4, P4 = field_at(t + hstep)
        k1 = matmul(A1, s)
        k2 = matmul(A2, s + (hstep / 2.0) * k1)
        k3 = matmul(A2, s + (hstep / 2.0) * k2)
        k4 = matmul(A4, s + hstep * k3)
        s = s + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if project:
            s = matmul(P4, s)
    return s, chart(u1)


def holonomy_map(chart: ImmersionChart, u, i: int, j: int, eps: float,
                 steps_per_leg: int = 10, order: str = "ij",
                 centered: bool = False):
    """Transport the fibre frame around a coordinate square of side eps.

    Returns (start point, transported frame).  order "ij" walks the i leg
    first; "ji" walks the same square the other way around.
    """
    u = np.asarray(u, dtype=float)
    ei = np.zeros_like(u)
    ei[i] = eps
    ej = np.zeros_like(u)
    ej[j] = eps
    first, second = (ei, ej) if order == "ij" else (ej, ei)
    c0 = u - 0.5 * (ei + ej) if centered else u
    corners = [c0, c0 + first, c0 + first + second, c0 + second, c0]
    pt0 = chart(corners[0])
    s = np.array(pt0.V, copy=True)
    for a, b in zip(corners[:-1], corners[1:]):
        s, _ = parallel_transport(chart, a, b, s, steps=steps_per_leg)
    return pt0, s


def holonomy_generator(chart: ImmersionChart, u, i: int, j: int, eps: float,
                       steps_per_leg: int = 10, order: str = "ij",
                       centered: bool = False) -> np.ndarray:
    """log of the real fibre return matrix of the square loop."""
    pt0, T = holonomy_map(chart, u, i, j, eps, steps_per_leg, order, centered)
    field, k = pt0.field, pt0.k
    units = scalar_units(field)
    d = len(units)
    n = k * d

    def fib(base, a, q):
        col = base[:, a:a + 1]
        if field is Field.QUATERNION:
            qm = np.zeros((1, 1, 4))
            qm[0, 0] = q
            return matmul(col, qm)
        return col * q

    M = np.zeros((n, n))
    for a in range(k):
        for t, q in enumerate(units):
            img = fib(T, a, q)
            for b in range(k):
                for s_, qs in enumerate(units):
                    M[b * d + s_, a * d + t] = inner_re(img, fib(pt0.V, b, qs))
    G = sla.logm(M)
    return np.real(G)


# ----------------------------------------------------------------------------
# two-parameter exponential charts and the loop-generator fit
# ----------------------------------------------------------------------------

def exp_chart(pt: GrassPoint, X: GrassTangent, Y: GrassTangent,
              half_width: float = 1.0) -> ImmersionChart:
    """Internal chart u -> span of (g e^{u1 X~} e^{u2 Y~})[:, :k]."""
    fr = frame_lift(pt)
    Xl = lie_lift(fr, X).mat
    Yl = lie_lift(fr, Y).mat
    g = fr.g
    k = pt.k

    def pieces(u):
        gE = matmul(g, expm_alg(Xl * float(u[0])))
        E1 = expm_alg(Yl * float(u[1]))
        return gE, E1

    def ev(u):
        gE, E1 = pieces(u)
        return point_from_stiefel(matmul(gE, E1)[:, :k])

    def diff(u):
        gE, E1 = pieces(u)
        V = matmul(gE, E1)[:, :k]
        pt_u = point_from_stiefel(V)
        dV0 = matmul(gE, matmul(Xl, E1))[:, :k]
        dV1 = matmul(gE, matmul(E1, Yl))[:, :k]
        out = []
        for dV in (dV0, dV1):
            H = dV - matmul(V, matmul(ct(V), dV))
            out.append(GrassTangent(pt_u, H))
        return out

    box = ((-half_width, half_width), (-half_width, half_width))
    return ImmersionChart(name="exp-pair", field=pt.field, N=pt.N, k=k,
                          dim=2, box=box, eval_point=ev, analytic_diff=diff)


@dataclass(frozen=True)
class LoopGeneratorCheck:
    """Per-trial record of loop-generator versus bracket-projection."""

    c_fit: float
    max_deviation: float
    mean_residual: float
    trials: int


def lemma_omega_check(field, N: int, k: int, trials: int = 20,
                      eps: float = 0.01, seed: int = 424242,
                      steps_per_leg: int = 10) -> LoopGeneratorCheck:
    """Fit the constant relating loop generators to bracket projections.

    For random points and orthonormal horizontal pairs (X, Y), the square
    loop traversed with the second leg first has generator G with
    -G / (2 eps^2) proportional to the vertical projection of [X~, Y~].
    A Richardson pair in eps removes the O(eps^2) loop bias.  Returns the
    least-squares constant (expected 1/2), the worst absolute deviation of
    the fitted algebra element from c_fit times the bracket projection,
    and the mean fit residual.
    """
    field = Field.parse(field)
    rng = np.random.default_rng(seed)
    omegas = []
    refs = []
    residuals = []
    for _ in range(trials):
        V = orthonormalize(random_matrix(rng, field, N, k))
        pt = point_from_stiefel(V)
        X = random_horizontal(rng, pt)
        X = GrassTangent(pt, X.H / X.norm())
        Y = random_horizontal(rng, pt)
        Y = GrassTangent(pt, Y.H - X.H * inner_re(Y.H, X.H))
        Y = GrassTangent(pt, Y.H / Y.norm())
        chart = exp_chart(pt, X, Y, half_width=4.0 * eps)
        fr = frame_lift(pt)
        bracket = matmul(lie_lift(fr, X).mat, lie_lift(fr, Y).mat) \
            - matmul(lie_lift(fr, Y).mat, lie_lift(fr, X).mat)
        beta_ref = proj_m(bracket, k)

        def gen(e):
            return holonomy_generator(chart, np.zeros(2), 0, 1, e,
                                      steps_per_leg=steps_per_leg,
                                      order="ji", centered=True) / e**2

        G = (4.0 * gen(eps / 2.0) - gen(eps)) / 3.0
        beta_fit, res = fit_m_generator(field, k, -G / 2.0)
        omegas.append(beta_fit)
        refs.append(beta_ref)
        residuals.append(res)
    num = sum(inner_re(o, r) for o, r in zip(omegas, refs))
    den = sum(inner_re(r, r) for r in refs)
    c = float(num / den)
    dev = max(frob(o - c * r) for o, r in zip(omegas, refs))
    return LoopGeneratorCheck(c, float(dev), float(np.mean(residuals)), trials)


# ----------------------------------------------------------------------------
# base transport (Levi-Civita of the pulled-back metric) and the
# transported derivative of the curvature pairing
# ----------------------------------------------------------------------------

def gram_at(chart: ImmersionChart, u) -> np.ndarray:
    D = differential(chart, u)
    n = chart.dim
    G = np.empty((n, n))
    for a in range(n):
        for b in range(a, n):
            G[a, b] = G[b, a] = inner_re(D[a].H, D[b].H)
    return G


def christoffel(chart: ImmersionChart, u, h: float = FD_STEP) -> np.ndarray:
    """Gamma[l, i, j] of the pulled-back metric, by Richardson differences."""
    u = np.asarray(u, dtype=float)
    n = chart.dim

    def dg(step):
        out = np.empty((n, n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            out[i] = (gram_at(chart, u + e) - gram_at(chart, u - e)) / (2.0 * step)
        return out

    d = dg(h)
    d = (4.0 * dg(h / 2.0) - d) / 3.0
    ginv = np.linalg.inv(gram_at(chart, u))
    gamma = np.empty((n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                gamma[l, i, j] = 0.5 * sum(
                    ginv[l, m] * (d[i][j, m] + d[j][i, m] - d[m][i, j])
                    for m in range(n)
                )
    return gamma


def base_transport(chart: ImmersionChart, u0, u1, x0, steps: int = 40) -> np.ndarray:
    """Levi-Civita transport of coordinate components along a straight segment."""
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    du = u1 - u0
    x = np.array(x0, dtype=float)

    cache = {}

    def rhs_mat(t: float) -> np.ndarray:
        key = round(t, 12)
        if key not in cache:
            gamma = christoffel(chart, u0 + t * du)
            cache[key] = -np.einsum("lij,i->lj", gamma, du)
        return cache[key]

    hstep = 1.0 / steps
    for n in range(steps):
        t = n * hstep
        A1 = rhs_mat(t)
        A2 = rhs_mat(t + hstep / 2.0)
        A4 = rhs_mat(t + hstep)
        k1 = A1 @ x
        k2 = A2 @ (x + (hstep / 2.0) * k1)
        k3 = A2 @ (x + (hstep / 2.0) * k2)
        k4 = A4 @ (x + hstep * k3)
        x = x + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def dr_oracle(chart: ImmersionChart, u, x_coords, y_coords, z_coords, w0, v0,
              delta: float = 0.02, transport_steps: int = 24,
              base_steps: int = 12) -> float:
    """Transported derivative of t -> Re <R(X_t, Y_t) w_t, v_t> at t = 0.

    Base arguments ride Levi-Civita transport of the pulled-back metric,
    fibre arguments ride the connection, and the derivative direction is
    the coordinate line through u with velocity z_coords.  Central
    differences with one Richardson level.  Both base vectors share one
    transport integration, as do both fibre sections.
    """
    u = np.asarray(u, dtype=float)
    z = np.asarray(z_coords, dtype=float)
    xy0 = np.stack([np.asarray(x_coords, dtype=float),
                    np.asarray(y_coords, dtype=float)], axis=1)
    k = w0.shape[1]
    wv0 = np.concatenate([w0, v0], axis=1)

    def f(t: float) -> float:
        if t == 0.0:
            return curvature_pairing_fd(chart, u, x_coords, y_coords, w0, v0)
        ut = u + t * z
        xy = base_transport(chart, u, ut, xy0, steps=base_steps)
        wv, _ = parallel_transport(chart, u, ut, wv0, steps=transport_steps)
        return curvature_pairing_fd(chart, ut, xy[:, 0], xy[:, 1],
                                    wv[:, :k], wv[:, k:])

    def slope(dl: float) -> float:
        return (f(dl) - f(-dl)) / (2.0 * dl)

    g1 = slope(delta)
    g2 = slope(delta / 2.0)
    return (4.0 * g2 - g1) / 3.0


# ----------------------------------------------------------------------------
# finite-difference Riemann tensor of the base metric (tests only)
# ----------------------------------------------------------------------------

def sectional_base_fd(chart: ImmersionChart, u, x_coords, y_coords,
                      h: float = FD_STEP2) -> float:
    """Sectional curvature of the pulled-back metric from its Christoffels."""
    u = np.asarray(u, dtype=float)
    n = chart.dim

    def dgamma(step):
        out = np.empty((n, n, n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            out[i] = (christoffel(chart, u + e) - christoffel(chart, u - e)) / (2.0 * step)
        return out

    dG = dgamma(h)
    dG = (4.0 * dgamma(h / 2.0) - dG) / 3.0
    gam = christoffel(chart, u)
    G = gram_at(chart, u)
    # R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    #           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    R = (
        np.einsum("iljk->lkij", dG)
        - np.einsum("jlik->lkij", dG)
        + np.einsum("lim,mjk->lkij", gam, gam)
        - np.einsum("ljm,mik->lkij", gam, gam)
    )
    Rlow = np.einsum("pl,lkij->pkij", G, R)
    x = np.asarray(x_coords, dtype=float)
    y = np.asarray(y_coords, dtype=float)
    num = np.einsum("pkij,p,k,i,j->", Rlow, x, y, x, y)
    den = (x @ G @ x) * (y @ G @ y) - (x @ G @ y) ** 2
    return float(num / den)
