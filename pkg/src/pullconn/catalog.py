"""Built-in example immersions.

Each builder returns an ImmersionChart with closed-form evaluation and,
where cheap, closed-form differentials.  Registry names are the ones the
command line accepts.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .algebra import Field, ct, matmul, quat
from .homogeneous import (
    GrassPoint,
    GrassTangent,
    geodesic_stiefel_k1,
    point_from_stiefel,
)
from .immersion import ImmersionChart


def _k1_point(field: Field, w: np.ndarray) -> GrassPoint:
    """Normalize a nonzero ambient vector to a rank-one point."""
    pt = point_from_stiefel(w.reshape(w.shape[0], 1, *w.shape[1:]))
    assert pt.field is field
    return pt


def _scalar_slots(field: Field) -> int:
    return field.real_dim


def _real_to_scalar(field: Field, comps: np.ndarray):
    if field is Field.REAL:
        return float(comps[0])
    if field is Field.COMPLEX:
        return complex(comps[0], comps[1])
    return quat(*comps)


# ----------------------------------------------------------------------------
# linear: K P^{m-1} ⊂ G_1(K^N) via an affine chart
# ----------------------------------------------------------------------------

def linear_embedding(field: Field, m: int = 3, N: int = 4) -> ImmersionChart:
    field = Field.parse(field)
    if not 2 <= m <= N:
        raise ValueError("need 2 <= m <= N")
    d = _scalar_slots(field)
    n = d * (m - 1)

    def ambient(u: np.ndarray) -> np.ndarray:
        if field is Field.QUATERNION:
            w = np.zeros((N, 4))
            w[0] = quat(1.0)
            for j in range(m - 1):
                w[1 + j] = quat(*u[4 * j:4 * j + 4])
        else:
            dt = float if field is Field.REAL else complex
            w = np.zeros(N, dtype=dt)
            w[0] = 1.0
            for j in range(m - 1):
                w[1 + j] = _real_to_scalar(field, u[d * j:d * j + d])
        return w

    def ev(u: np.ndarray) -> GrassPoint:
        return _k1_point(field, ambient(u))

    def diff(u: np.ndarray):
        pt = ev(u)
        w = ambient(u)
        nw = float(np.sqrt(np.sum(np.abs(w) ** 2))) if field is not Field.QUATERNION \
            else float(np.sqrt(np.sum(w**2)))
        out = []
        for c in range(n):
            j, s = divmod(c, d)
            comps = np.zeros(d)
            comps[s] = 1.0
            if field is Field.QUATERNION:
                dw = np.zeros((N, 1, 4))
                dw[1 + j, 0] = quat(*comps)
            else:
                dw = np.zeros((N, 1), dtype=complex if field is Field.COMPLEX else float)
                dw[1 + j, 0] = _real_to_scalar(field, comps)
            h = dw / nw
            h = h - matmul(pt.V, matmul(ct(pt.V), h))
            out.append(GrassTangent(pt, h))
        return out

    box = tuple((-1.5, 1.5) for _ in range(n))
    return ImmersionChart(
        name="linear", field=field, N=N, k=1, dim=n, box=box,
        eval_point=ev, analytic_diff=diff, params={"m": m, "N": N},
    )


# ----------------------------------------------------------------------------
# veronese: degree-d rational normal curve CP^1 → CP^d
# ----------------------------------------------------------------------------

def veronese(d: int = 2) -> ImmersionChart:
    if d < 1:
        raise ValueError("degree must be >= 1")
    coef = np.array([np.sqrt(comb(d, j)) for j in range(d + 1)])
    powers = np.arange(d + 1)

    def ambient(z: complex) -> np.ndarray:
        return coef * z**powers

    def ev(u: np.ndarray) -> GrassPoint:
        return _k1_point(Field.COMPLEX, ambient(complex(u[0], u[1])))

    def diff(u: np.ndarray):
        z = complex(u[0], u[1])
        w = ambient(z)
        wp = np.zeros(d + 1, dtype=complex)
        wp[1:] = coef[1:] * powers[1:] * z ** (powers[1:] - 1)
        pt = ev(u)
        h = (wp / np.linalg.norm(w)).reshape(d + 1, 1)
        h = h - matmul(pt.V, matmul(ct(pt.V), h))
        return [GrassTangent(pt, h), GrassTangent(pt, 1j * h)]

    return ImmersionChart(
        name="veronese", field=Field.COMPLEX, N=d + 1, k=1, dim=2,
        box=((-1.2, 1.2), (-1.2, 1.2)), eval_point=ev, analytic_diff=diff,
        params={"d": d},
    )


# ----------------------------------------------------------------------------
# totally-real: RP^n inside CP^n
# ----------------------------------------------------------------------------

def totally_real(n: int = 2) -> ImmersionChart:
    if n < 1:
        raise ValueError("need n >= 1")

    def ambient(u: np.ndarray) -> np.ndarray:
        w = np.zeros(n + 1, dtype=complex)
        w[0] = 1.0
        w[1:] = u
        return w

    def ev(u: np.ndarray) -> GrassPoint:
        return _k1_point(Field.COMPLEX, ambient(u))

    def diff(u: np.ndarray):
        pt = ev(u)
        nw = np.sqrt(1.0 + float(u @ u))
        out = []
        for i in range(n):
            dw = np.zeros((n + 1, 1), dtype=complex)
            dw[1 + i, 0] = 1.0 / nw
            h = dw - matmul(pt.V, matmul(ct(pt.V), dw))
            out.append(GrassTangent(pt, h))
        return out

    box = tuple((-1.5, 1.5) for _ in range(n))
    return ImmersionChart(
        name="totally-real", field=Field.COMPLEX, N=n + 1, k=1, dim=n,
        box=box, eval_point=ev, analytic_diff=diff, params={"n": n},
    )


# ----------------------------------------------------------------------------
# clifford: flat torus (u, v) ↦ [e^{iu} : e^{iv} : 1] in CP^2
# ----------------------------------------------------------------------------

def clifford_torus() -> ImmersionChart:
    def ambient(u: np.ndarray) -> np.ndarray:
        return np.array([np.exp(1j * u[0]), np.exp(1j * u[1]), 1.0 + 0j])

    def ev(u: np.ndarray) -> GrassPoint:
        return _k1_point(Field.COMPLEX, ambient(u))

    def diff(u: np.ndarray):
        pt = ev(u)
        s = np.sqrt(3.0)
        out = []
        for i in range(2):
            dw = np.zeros((3, 1), dtype=complex)
            dw[i, 0] = 1j * np.exp(1j * u[i]) / s
            h = dw - matmul(pt.V, matmul(ct(pt.V), dw))
            out.append(GrassTangent(pt, h))
        return out

    return ImmersionChart(
        name="clifford", field=Field.COMPLEX, N=3, k=1, dim=2,
        box=((-3.0, 3.0), (-3.0, 3.0)), eval_point=ev, analytic_diff=diff,
        params={},
    )


# ----------------------------------------------------------------------------
# hline: quaternionic projective line HP^1 inside HP^{N-1}
# ----------------------------------------------------------------------------

def quaternionic_line(N: int = 3) -> ImmersionChart:
    if N < 2:
        raise ValueError("need N >= 2")

    def ambient(u: np.ndarray) -> np.ndarray:
        w = np.zeros((N, 4))
        w[0] = quat(1.0)
        w[1] = quat(*u)
        return w

    def ev(u: np.ndarray) -> GrassPoint:
        return _k1_point(Field.QUATERNION, ambient(u))

    def diff(u: np.ndarray):
        pt = ev(u)
        nw = np.sqrt(1.0 + float(u @ u))
        out = []
        for s in range(4):
            comps = np.zeros(4)
            comps[s] = 1.0
            dw = np.zeros((N, 1, 4))
            dw[1, 0] = quat(*comps) / nw
            h = dw - matmul(pt.V, matmul(ct(pt.V), dw))
            out.append(GrassTangent(pt, h))
        return out

    box = tuple((-1.5, 1.5) for _ in range(4))
    return ImmersionChart(
        name="hline", field=Field.QUATERNION, N=N, k=1, dim=4,
        box=box, eval_point=ev, analytic_diff=diff, params={"N": N},
    )


# ----------------------------------------------------------------------------
# grassmann-sub: G_k(R^m) inside G_k(R^N), standard affine patch
# ----------------------------------------------------------------------------

def grassmann_sub(k: int = 2, m: int = 4, N: int = 5) -> ImmersionChart:
    if not (1 <= k < m <= N):
        raise ValueError("need 1 <= k < m <= N")
    n = k * (m - k)

    def ev(u: np.ndarray) -> GrassPoint:
        B = u.reshape(m - k, k)
        A = np.zeros((N, k))
        A[:k] = np.eye(k)
        A[k:m] = B
        return point_from_stiefel(A)

    box = tuple((-1.0, 1.0) for _ in range(n))
    return ImmersionChart(
        name="grassmann-sub", field=Field.REAL, N=N, k=k, dim=n,
        box=box, eval_point=ev, analytic_diff=None,
        params={"k": k, "m": m, "N": N},
    )


# ----------------------------------------------------------------------------
# perturbed: geodesic-graph perturbation of a rank-one base chart
# ----------------------------------------------------------------------------

def perturbed(base: ImmersionChart = None, amplitude: float = 0.05,
              seed: int = 7, modes: int = 3) -> ImmersionChart:
    if base is None:
        base = veronese(2)
    if base.k != 1:
        raise ValueError("perturbation wrapper supports rank-one charts only")
    rng = np.random.default_rng(seed)
    n = base.dim
    omegas = rng.integers(1, 3, size=(modes, n)) * rng.choice([-1.0, 1.0], size=(modes, n))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    if base.field is Field.QUATERNION:
        cvecs = rng.standard_normal((modes, base.N, 1, 4))
    elif base.field is Field.COMPLEX:
        cvecs = rng.standard_normal((modes, base.N, 1)) + 1j * rng.standard_normal((modes, base.N, 1))
    else:
        cvecs = rng.standard_normal((modes, base.N, 1))
    for i in range(modes):
        cvecs[i] = cvecs[i] / np.sqrt(np.sum(np.abs(cvecs[i]) ** 2))

    def ev(u: np.ndarray) -> GrassPoint:
        pt0 = base(u)
        V0 = pt0.V
        H = np.zeros_like(V0)
        for i in range(modes):
            c = np.array(cvecs[i])
            c = c - matmul(V0, matmul(ct(V0), c))
            H = H + float(np.sin(np.dot(omegas[i], u) + phases[i])) * c
        V1 = geodesic_stiefel_k1(V0, amplitude * H, 1.0)
        return point_from_stiefel(V1)

    return ImmersionChart(
        name="perturbed", field=base.field, N=base.N, k=1, dim=n,
        box=base.box, eval_point=ev, analytic_diff=None,
        params={"base": base.name, "amplitude": amplitude, "seed": seed,
                **{f"base_{k}": v for k, v in base.params.items()}},
    )


# ----------------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    summary: str
    fields: tuple              # fields the chart exists over
    defaults: dict
    expected: dict             # headline properties for reports and tests

    def build(self, field: Field = None, **params) -> ImmersionChart:
        p = dict(self.defaults)
        p.update({k: v for k, v in params.items() if v is not None})
        if self.name == "linear":
            f = Field.parse(field) if field is not None else Field.COMPLEX
            return linear_embedding(f, m=int(p["m"]), N=int(p["N"]))
        if self.name == "veronese":
            return veronese(int(p["d"]))
        if self.name == "totally-real":
            return totally_real(int(p["n"]))
        if self.name == "clifford":
            return clifford_torus()
        if self.name == "hline":
            return quaternionic_line(int(p["N"]))
        if self.name == "grassmann-sub":
            return grassmann_sub(int(p["k"]), int(p["m"]), int(p["N"]))
        if self.name == "perturbed":
            base = CATALOG[p.get("base", "veronese")].build(
                field, **{k[5:]: v for k, v in p.items() if k.startswith("base_")}
            )
            return perturbed(base, amplitude=float(p["amplitude"]),
                             seed=int(p["seed"]))
        raise KeyError(self.name)


CATALOG = {
    "linear": CatalogEntry(
        "linear", "projective subspace K P^{m-1} in G_1(K^N)",
        (Field.REAL, Field.COMPLEX, Field.QUATERNION),
        {"m": 3, "N": 4},
        {"totally_geodesic": True, "fat_expected": "field-dependent"},
    ),
    "veronese": CatalogEntry(
        "veronese", "degree-d rational normal curve in CP^d",
        (Field.COMPLEX,),
        {"d": 2},
        {"holomorphic": True, "parallel": True, "gram_ratio": "d"},
    ),
    "totally-real": CatalogEntry(
        "totally-real", "real projective space RP^n in CP^n",
        (Field.COMPLEX,),
        {"n": 2},
        {"totally_geodesic": True, "wirtinger": "pi/2"},
    ),
    "clifford": CatalogEntry(
        "clifford", "flat Lagrangian torus in CP^2",
        (Field.COMPLEX,),
        {},
        {"flat": True, "minimal": True, "wirtinger": "pi/2"},
    ),
    "hline": CatalogEntry(
        "hline", "quaternionic projective line in HP^{N-1}",
        (Field.QUATERNION,),
        {"N": 3},
        {"totally_geodesic": True, "quaternionic": True},
    ),
    "grassmann-sub": CatalogEntry(
        "grassmann-sub", "real sub-Grassmannian G_k(R^m) in G_k(R^N)",
        (Field.REAL,),
        {"k": 2, "m": 4, "N": 5},
        {"totally_geodesic": True},
    ),
    "perturbed": CatalogEntry(
        "perturbed", "seeded geodesic-graph perturbation of a base chart",
        (Field.REAL, Field.COMPLEX, Field.QUATERNION),
        {"base": "veronese", "amplitude": 0.05, "seed": 7, "base_d": 2},
        {"deterministic": True, "breaks_parallel": True},
    ),
}


def build_chart(name: str, field=None, **params) -> ImmersionChart:
    if name not in CATALOG:
        raise KeyError(f"unknown example '{name}'; known: {sorted(CATALOG)}")
    return CATALOG[name].build(field, **params)
