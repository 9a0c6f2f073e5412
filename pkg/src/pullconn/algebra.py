"""Dense matrix algebra over the real, complex and quaternion scalar fields.

Matrices over R and C are ordinary numpy arrays (float64 / complex128).
Quaternion matrices are float64 arrays of shape (m, n, 4) holding the
(1, i, j, k) components; a quaternion scalar is a shape-(4,) array.  The
convention throughout the package is that scalar coefficients act on column
vectors from the *right*, so that column spans stay well defined over the
noncommutative scalars.

Array rank decides the representation: rank 2 arrays are real/complex
matrices, rank 3 arrays (trailing axis 4) are quaternion matrices; rank 0
vs rank 1 likewise for scalars.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
import scipy.linalg as sla

TOL_ALG = 1e-10


class Field(Enum):
    """Scalar field tag: real, complex or quaternion."""

    REAL = "r"
    COMPLEX = "c"
    QUATERNION = "h"

    @property
    def real_dim(self) -> int:
        return {Field.REAL: 1, Field.COMPLEX: 2, Field.QUATERNION: 4}[self]

    @classmethod
    def parse(cls, s) -> "Field":
        if isinstance(s, Field):
            return s
        key = str(s).strip().lower()
        aliases = {
            "r": cls.REAL, "real": cls.REAL,
            "c": cls.COMPLEX, "complex": cls.COMPLEX,
            "h": cls.QUATERNION, "quaternion": cls.QUATERNION,
            "quaternionic": cls.QUATERNION,
        }
        if key not in aliases:
            raise ValueError(f"unknown scalar field {s!r} (use r, c or h)")
        return aliases[key]


class DegenerateColumnsError(ValueError):
    """Raised when a column set is numerically rank deficient."""

    def __init__(self, column: int, norm: float):
        self.column = column
        self.norm = norm
        super().__init__(
            f"column {column} is dependent on its predecessors (residual norm {norm:.3e})"
        )


# ----------------------------------------------------------------------------
# quaternion scalars
# ----------------------------------------------------------------------------

def _structure_tensor() -> np.ndarray:
    """QL[s,t,u] with e_t e_u = sum_s QL[s,t,u] e_s for the basis (1,i,j,k)."""
    L = np.zeros((4, 4, 4))
    for t in range(4):
        L[t, 0, t] = 1.0
        L[t, t, 0] = 1.0
    L[0, 0, 0] = 1.0
    for t in (1, 2, 3):
        L[0, t, t] = -1.0
    # i j = k and cyclic
    for (t, u, s) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        L[s, t, u] = 1.0
        L[s, u, t] = -1.0
    return L


QL = _structure_tensor()


def quat(w=0.0, x=0.0, y=0.0, z=0.0) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


QONE = quat(1.0)
QI = quat(0.0, 1.0)
QJ = quat(0.0, 0.0, 1.0)
QK = quat(0.0, 0.0, 0.0, 1.0)


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Quaternion product, broadcasting over leading axes."""
    return np.einsum("stu,...t,...u->...s", QL, a, b)


def qconj(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qabs(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(a) ** 2, axis=-1))


def is_quat(A: np.ndarray) -> bool:
    A = np.asarray(A)
    return A.ndim in (1, 3) and A.shape[-1] == 4


# ----------------------------------------------------------------------------
# field-generic matrix operations
# ----------------------------------------------------------------------------

def field_of(A: np.ndarray) -> Field:
    A = np.asarray(A)
    if is_quat(A):
        return Field.QUATERNION
    return Field.COMPLEX if np.iscomplexobj(A) else Field.REAL

def eye(field: Field, n: int) -> np.ndarray:
    if field is Field.QUATERNION:
        out = np.zeros((n, n, 4))
        out[np.arange(n), np.arange(n), 0] = 1.0
        return out
    return np.eye(n, dtype=complex if field is Field.COMPLEX else float)


def zeros(field: Field, m: int, n: int) -> np.ndarray:
    if field is Field.QUATERNION:
        return np.zeros((m, n, 4))
    return np.zeros((m, n), dtype=complex if field is Field.COMPLEX else float)


def from_real(A: np.ndarray, field: Field) -> np.ndarray:
    """Embed a real array as a matrix over `field`."""
    A = np.asarray(A, dtype=float)
    if field is Field.QUATERNION:
        out = np.zeros(A.shape + (4,))
        out[..., 0] = A
        return out
    return A.astype(complex) if field is Field.COMPLEX else A


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    qa, qb = is_quat(A), is_quat(B)
    if qa or qb:
        if not qa:
            A = from_real(A, Field.QUATERNION)
        if not qb:
            B = from_real(B, Field.QUATERNION)
        return np.einsum("stu,mkt,knu->mns", QL, np.asarray(A), np.asarray(B))
    return np.asarray(A) @ np.asarray(B)


def ct(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    if is_quat(A):
        return qconj(A).transpose(1, 0, 2)
    return np.asarray(A).conj().T


def scalar_right(A: np.ndarray, q) -> np.ndarray:
    """Right scalar action A -> A q (quaternion q may be a (4,) array)."""
    if is_quat(A):
        q = np.asarray(q, dtype=float)
        if q.ndim == 0:
            return np.asarray(A) * float(q)
        return np.einsum("stu,mnt,u->mns", QL, np.asarray(A), q)
    return np.asarray(A) * q


def re_trace(A: np.ndarray) -> float:
    if is_quat(A):
        n = min(A.shape[0], A.shape[1])
        return float(np.sum(A[np.arange(n), np.arange(n), 0]))
    return float(np.real(np.trace(A)))


def inner_g0(A: np.ndarray, B: np.ndarray) -> float:
    """Bi-invariant pairing (1/2) Re tr(A B*)."""
    return 0.5 * re_trace(matmul(A, ct(B)))


def inner_re(A: np.ndarray, B: np.ndarray) -> float:
    """Unhalved real inner product Re tr(B* A) = sum of Re(conj(b) a)."""
    if is_quat(A):
        return float(np.sum(np.asarray(A) * np.asarray(B)))
    return float(np.real(np.vdot(np.asarray(B), np.asarray(A))))


def frob(A: np.ndarray) -> float:
    return float(np.sqrt(max(inner_re(A, A), 0.0)))


def norm_g0(A: np.ndarray) -> float:
    return float(np.sqrt(max(inner_g0(A, A), 0.0)))


def hstack(cols) -> np.ndarray:
    return np.concatenate(list(cols), axis=1)


def col(A: np.ndarray, j: int) -> np.ndarray:
    return A[:, j : j + 1]


def orthonormalize(A: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Column orthonormalization by modified Gram-Schmidt over the scalar field.

    Coefficients multiply from the right; a second sweep keeps things stable
    near machine precision.  Raises DegenerateColumnsError if some column is
    (numerically) in the span of the previous ones.
    """
    A = np.asarray(A)
    ncols = A.shape[1]
    scale = max(frob(A) / max(np.sqrt(ncols), 1.0), 1.0)
    out = []
    for jcol in range(ncols):
        v = np.array(col(A, jcol), copy=True)
        for _ in range(2):
            for q in out:
                v = v - matmul(q, matmul(ct(q), v))
        n = frob(v)
        if n < tol * scale:
            raise DegenerateColumnsError(jcol, n)
        out.append(v / n)
    return hstack(out)


def complete_basis(V: np.ndarray, order: str = "standard", tol: float = 1e-8) -> np.ndarray:
    """Extend orthonormal columns V to a full unitary [V | W].

    Candidate completion vectors are the standard basis vectors taken in index
    order ("standard") or reversed ("reversed"); near-dependent candidates are
    dropped.  Deterministic for a given order.
    """
    field = field_of(V)
    N = V.shape[0]
    k = V.shape[1]
    idx = range(N) if order == "standard" else range(N - 1, -1, -1)
    cols = [col(V, j) for j in range(k)]
    I = eye(field, N)
    for j in idx:
        v = np.array(col(I, j), copy=True)
        for _ in range(2):
            for q in cols:
                v = v - matmul(q, matmul(ct(q), v))
        n = frob(v)
        if n > tol:
            cols.append(v / n)
        if len(cols) == N:
            break
    if len(cols) != N:
        raise DegenerateColumnsError(len(cols), 0.0)
    return hstack(cols)


# ----------------------------------------------------------------------------
# exponential and small symmetric eigenproblems
# ----------------------------------------------------------------------------

def expm_alg(A: np.ndarray) -> np.ndarray:
    """Matrix exponential; quaternion case by scaling-and-squaring Taylor."""
    if not is_quat(A):
        return sla.expm(np.asarray(A))
    n = A.shape[0]
    nrm = frob(A)
    s = 0
    if nrm > 0.25:
        s = int(np.ceil(np.log2(nrm / 0.25)))
    T = A / (2.0 ** s)
    out = eye(Field.QUATERNION, n)
    term = eye(Field.QUATERNION, n)
    for mdeg in range(1, 19):
        term = matmul(term, T) / mdeg
        out = out + term
    for _ in range(s):
        out = matmul(out, out)
    return out


def sym_eig_small(S: np.ndarray, check: bool = True, tol: float = 1e-8):
    """Eigensystem of a small real symmetric matrix with canonical vector signs."""
    S = np.asarray(S, dtype=float)
    if check and (S.shape[0] != S.shape[1] or np.max(np.abs(S - S.T)) > tol * max(1.0, np.max(np.abs(S)))):
        raise ValueError("matrix is not symmetric within tolerance")
    w, Q = np.linalg.eigh(0.5 * (S + S.T))
    for j in range(Q.shape[1]):
        i = int(np.argmax(np.abs(Q[:, j])))
        if Q[i, j] < 0:
            Q[:, j] = -Q[:, j]
    return w, Q


def random_matrix(rng: np.random.Generator, field: Field, m: int, n: int, scale: float = 1.0) -> np.ndarray:
    if field is Field.QUATERNION:
        return scale * rng.standard_normal((m, n, 4))
    if field is Field.COMPLEX:
        return scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    return scale * rng.standard_normal((m, n))
