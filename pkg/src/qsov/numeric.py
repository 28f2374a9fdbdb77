"""Field-generic dense linear algebra, tensor-leg machinery and interpolation.

Two scalar fields are supported.  Float mode uses ``complex128`` numpy arrays.
Exact mode uses numpy ``object`` arrays holding :class:`fractions.Fraction`
entries, so matrix products never round.  Determinants, ranks and solves in
exact mode go through sympy's ``DomainMatrix`` over QQ.

Leg convention: when an operator acts on ``V_aux (x) H`` the auxiliary leg is
the leading (slowest) tensor factor, and sites 1..N follow slow-to-fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


class FieldMismatch(TypeError):
    pass


class CoincidentNodes(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# scalars and arrays
# ---------------------------------------------------------------------------

def is_exact(x) -> bool:
    if isinstance(x, np.ndarray):
        return x.dtype == object
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def frac(x) -> Fraction:
    """Exact rational from int, Fraction or a decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {x!r}")


def to_exact(A) -> np.ndarray:
    A = np.asarray(A, dtype=object)
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        out[idx] = frac(v)
    return out


def to_float(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        out = np.empty(A.shape, dtype=complex)
        for idx, v in np.ndenumerate(A):
            out[idx] = complex(v)
        return out
    return A.astype(complex)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape, dtype=complex)


def eye(d: int, exact: bool) -> np.ndarray:
    out = zeros((d, d), exact)
    for i in range(d):
        out[i, i] = Fraction(1) if exact else 1.0
    return out


def _check_fields(*arrays):
    kinds = {is_exact(a) for a in arrays}
    if len(kinds) > 1:
        raise FieldMismatch("mixing exact and floating operands")


def frob(A) -> float:
    if is_exact(A):
        return math.sqrt(float(sum(v * v for v in np.asarray(A).ravel())))
    return float(np.linalg.norm(A))


def rel_residual(lhs, rhs):
    """Frobenius ||lhs - rhs|| / ||lhs||.  Exact zero is returned as int 0."""
    diff = np.asarray(lhs) - np.asarray(rhs)
    if is_exact(diff) and all(v == 0 for v in diff.ravel()):
        return 0
    den = frob(lhs) or frob(rhs) or 1.0
    return frob(diff) / den


# ---------------------------------------------------------------------------
# tensor legs
# ---------------------------------------------------------------------------

def kron(A, B) -> np.ndarray:
    _check_fields(A, B)
    return np.kron(A, B)


def embed_at(M, site: int, n: int, N: int) -> np.ndarray:
    """I (x) ... (x) M (x) ... (x) I with M on ``site`` (1-based)."""
    if not 1 <= site <= N:
        raise ValueError(f"site {site} outside 1..{N}")
    exact = is_exact(M)
    left = eye(n ** (site - 1), exact)
    right = eye(n ** (N - site), exact)
    return np.kron(np.kron(left, M), right)


def partial_trace_aux(X, n: int) -> np.ndarray:
    """Trace over the leading leg of dimension ``n``."""
    D = X.shape[0]
    if D % n:
        raise ValueError(f"dimension {D} not divisible by aux dim {n}")
    d = D // n
    Y = X.reshape(n, d, n, d)
    out = Y[0, :, 0, :].copy()
    for i in range(1, n):
        out = out + Y[i, :, i, :]
    return out


def partial_transpose_aux(X, n: int) -> np.ndarray:
    d = X.shape[0] // n
    return X.reshape(n, d, n, d).transpose(2, 1, 0, 3).reshape(n * d, n * d)


def aux_block(X, n: int, i: int, j: int) -> np.ndarray:
    """Operator on H given by <i|_aux X |j>_aux (0-based)."""
    d = X.shape[0] // n
    return X[i * d:(i + 1) * d, j * d:(j + 1) * d]


def matmul(A, B) -> np.ndarray:
    """A @ B; exact operands go through sparse DomainMatrix products over QQ.

    Object-array products of Fractions pay a gcd per scalar operation and
    ignore the sparsity of R-matrices and projectors, which makes them
    roughly three orders of magnitude slower at the sizes used here.
    """
    if not (is_exact(A) or is_exact(B)):
        return A @ B
    _check_fields(A, B)
    A = np.asarray(A)
    B = np.asarray(B)
    vec = B.ndim == 1
    if vec:
        B = B.reshape(-1, 1)
    lvec = A.ndim == 1
    if lvec:
        A = A.reshape(1, -1)
    C = _from_sdm(_sdm(A) * _sdm(B))
    if vec:
        C = C[:, 0]
    if lvec:
        C = C[0]
    return C


def _sdm(A) -> DomainMatrix:
    rows = {}
    for i, j in zip(*np.nonzero(A != 0)):
        v = A[i, j]
        rows.setdefault(int(i), {})[int(j)] = QQ(v.numerator, v.denominator)
    return DomainMatrix(rows, A.shape, QQ)


def _from_sdm(M: DomainMatrix) -> np.ndarray:
    out = np.full(M.shape, Fraction(0), dtype=object)
    for i, row in M.to_sdm().items():
        for j, v in row.items():
            out[i, j] = Fraction(int(v.numerator), int(v.denominator))
    return out


def apply_two_leg(R, X, i: int, j: int, n: int, L: int) -> np.ndarray:
    """Left-multiply X (n^L rows) by the two-leg operator R acting on legs i, j."""
    cols = X.shape[1]
    Y = X.reshape((n,) * L + (cols,))
    if is_exact(X):
        Y = np.moveaxis(Y, [i, j], [0, 1])
        shape = Y.shape
        Z = matmul(R, Y.reshape(n * n, -1)).reshape(shape)
        Z = np.moveaxis(Z, [0, 1], [i, j])
        return Z.reshape(n ** L, cols)
    Rt = R.reshape(n, n, n, n)
    Z = np.tensordot(Rt, Y, axes=([2, 3], [i, j]))
    Z = np.moveaxis(Z, [0, 1], [i, j])
    return Z.reshape(n ** L, cols)


def apply_one_leg(M, X, i: int, n: int, L: int) -> np.ndarray:
    cols = X.shape[1]
    Y = X.reshape((n,) * L + (cols,))
    if is_exact(X):
        Y = np.moveaxis(Y, i, 0)
        shape = Y.shape
        Z = matmul(M, Y.reshape(n, -1)).reshape(shape)
        return np.moveaxis(Z, 0, i).reshape(n ** L, cols)
    Z = np.tensordot(M, Y, axes=([1], [i]))
    Z = np.moveaxis(Z, 0, i)
    return Z.reshape(n ** L, cols)


def permutation_matrix(n: int, exact: bool = False) -> np.ndarray:
    P = zeros((n * n, n * n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n):
        for j in range(n):
            P[i * n + j, j * n + i] = one
    return P


def leg_permutation(n: int, L: int, perm: Sequence[int], exact: bool = False) -> np.ndarray:
    """Operator sending e_{i_1}(x)...(x)e_{i_L} to the tensor with factor k on leg perm[k]."""
    d = n ** L
    P = zeros((d, d), exact)
    one = Fraction(1) if exact else 1.0
    for idx in np.ndindex(*(n,) * L):
        out = [0] * L
        for k, p in enumerate(perm):
            out[p] = idx[k]
        P[np.ravel_multi_index(out, (n,) * L), np.ravel_multi_index(idx, (n,) * L)] = one
    return P


# ---------------------------------------------------------------------------
# exact helpers
# ---------------------------------------------------------------------------

def _domain(A) -> DomainMatrix:
    rows = [[QQ(v.numerator, v.denominator) for v in row] for row in to_exact(A)]
    return DomainMatrix(rows, (len(rows), len(rows[0]) if rows else 0), QQ)


def exact_det(A) -> Fraction:
    d = _domain(A).det()
    return Fraction(int(d.numerator), int(d.denominator))


def exact_rank(A) -> int:
    return _domain(A).rank()


def exact_solve(A, b) -> np.ndarray:
    """Solve A x = b over QQ (A square, b vector)."""
    sol = _domain(A).lu_solve(_domain(np.asarray(b, dtype=object).reshape(-1, 1)))
    out = np.empty(len(b), dtype=object)
    for i, v in enumerate(sol.to_Matrix()):
        out[i] = Fraction(int(v.p), int(v.q))
    return out


def det(A):
    return exact_det(A) if is_exact(A) else complex(np.linalg.det(A))


@dataclass(frozen=True)
class DetCertificate:
    value: complex | Fraction
    log_abs: float
    log_floor: float       # log of the rcond floor (float mode)
    nonzero: bool
    exact: bool
    rcond: float = math.nan


def det_floor(dim: int) -> float:
    """Default rcond floor: 1e3 dim eps (backward error of the rows), at least 1e-12."""
    return float(max(1e-12, 1e3 * dim * np.finfo(float).eps))


def certify_det(A, rel_floor: float | None = None) -> DetCertificate:
    """Nonzero-determinant certificate.

    Exact mode: the determinant itself.  Float mode: the reciprocal
    condition number of the row-equilibrated matrix must exceed
    ``rel_floor`` (default ``det_floor(dim)``).  Row scaling does not move
    the zero set of det; a perturbation of relative size rcond would be
    needed to reach a singular matrix.
    """
    if is_exact(A):
        v = exact_det(A)
        la = math.log(abs(v.numerator)) - math.log(v.denominator) if v != 0 else -math.inf
        return DetCertificate(v, la, -math.inf, v != 0, True)
    A = np.asarray(A, dtype=complex)
    if rel_floor is None:
        rel_floor = det_floor(A.shape[0])
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0):
        return DetCertificate(0j, -math.inf, math.log(rel_floor), False, False, 0.0)
    sign, logabs = np.linalg.slogdet(A)
    sv = np.linalg.svd(A / norms[:, None], compute_uv=False)
    rc = float(sv[-1] / sv[0])
    value = complex(sign * np.exp(logabs)) if -700 < logabs < 700 else (0j if logabs <= -700 else complex(np.inf))
    return DetCertificate(value, float(logabs), math.log(rel_floor), rc > rel_floor, False, rc)


def solve_refined(A, b, steps: int = 2) -> np.ndarray:
    """LU solve with a couple of iterative-refinement sweeps."""
    lu = sla.lu_factor(A)
    x = sla.lu_solve(lu, b)
    for _ in range(steps):
        r = b - A @ x
        x = x + sla.lu_solve(lu, r)
    return x


def cond(A) -> float:
    return float(np.linalg.cond(A))


# ---------------------------------------------------------------------------
# eigen-decomposition oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenData:
    values: np.ndarray
    right: np.ndarray      # columns
    left: np.ndarray       # rows, l_i X = lambda_i l_i
    pairings: np.ndarray   # <l_i|r_i> / (|l_i| |r_i|)
    degenerate: bool
    min_gap: float


def _sort_key(z):
    return (round(z.real, 12), round(z.imag, 12))


def eigen_decompose(X, gap_tol: float = 1e-8) -> EigenData:
    X = np.asarray(X, dtype=complex)
    scale = np.linalg.norm(X) or 1.0
    wr, vr = np.linalg.eig(X)
    wl, vl = np.linalg.eig(X.T)
    order = sorted(range(len(wr)), key=lambda k: _sort_key(wr[k]))
    wr, vr = wr[order], vr[:, order]
    # greedy nearest-eigenvalue matching of left to right
    free = list(range(len(wl)))
    match = []
    for w in wr:
        k = min(free, key=lambda j: abs(wl[j] - w))
        match.append(k)
        free.remove(k)
    left = vl[:, match].T
    for i in range(len(wr)):
        if abs(wl[match[i]] - wr[i]) > 1e-6 * scale:
            raise NonConvergence("left/right eigenvalue collision in matching")
    pair = np.array([left[i] @ vr[:, i] / (np.linalg.norm(left[i]) * np.linalg.norm(vr[:, i]))
                     for i in range(len(wr))])
    gaps = [abs(wr[i] - wr[j]) for i in range(len(wr)) for j in range(i)]
    min_gap = min(gaps) if gaps else math.inf
    return EigenData(wr, vr, left, pair, min_gap < gap_tol * scale, float(min_gap))


# ---------------------------------------------------------------------------
# interpolation polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterpPoly:
    """Polynomial stored through node values plus asymptotic data.

    ``kind='rational'``: if ``asym`` is None the degree is ``len(nodes)-1``
    (plain Lagrange); otherwise the degree is ``len(nodes)`` and ``asym`` is
    the coefficient of lambda^degree.

    ``kind='trig'``: a trigonometric polynomial of degree N = len(nodes),
    i.e. a combination of exp((N-2k) lambda).  ``asym`` is the pair
    (T_+, T_-) of limits of exp(-+ lambda N) t(lambda).  Evaluation uses the
    shifted-sinh interpolation formula with the free constant ``shift``; any
    shift gives the same function once the sum rule holds.  ``asym=None``
    means no +-N terms at all (degree N-1 sinh-Lagrange form).
    """

    kind: str
    points: tuple
    values: tuple
    asym: object = None
    shift: complex | None = None

    def __post_init__(self):
        pts = self.points
        for i in range(len(pts)):
            for j in range(i):
                dx = pts[i] - pts[j]
                if self.kind == "trig":
                    if abs(np.sinh(complex(dx))) < 1e-14:
                        raise CoincidentNodes(f"nodes {i},{j} coincide mod i*pi")
                elif dx == 0:
                    raise CoincidentNodes(f"nodes {i},{j} coincide")

    @property
    def degree(self) -> int:
        if self.asym is None:
            return len(self.points) - 1
        return len(self.points)

    def __call__(self, lam):
        return eval_interp(self, lam)

    # trig helpers ---------------------------------------------------------
    def _trig_sigma(self) -> complex:
        x = [complex(p) for p in self.points]
        s = 0j
        for a, xa in enumerate(x):
            den = 1.0 + 0j
            for b, xb in enumerate(x):
                if b != a:
                    den *= np.sinh(xa - xb)
            s += complex(self.values[a]) / den
        return s

    def _trig_pm(self):
        x = [complex(p) for p in self.points]
        N = len(x)
        tp, tm = self.asym if self.asym is not None else (0.0, 0.0)
        sx = sum(x)
        P = complex(tp) * 2 ** N * np.exp(sx)
        M = complex(tm) * 2 ** N * np.exp(-sx) * (-1) ** N
        return P, M

    def sum_rule_mismatch(self) -> float:
        """|P - M - 2 sigma|: zero iff nodes and asymptotics are consistent."""
        if self.kind != "trig":
            return 0.0
        P, M = self._trig_pm()
        sig = self._trig_sigma()
        return abs(P - M - 2 * sig) / max(1.0, abs(P) + abs(M) + abs(2 * sig))


def _lagrange_basis(points, a, lam):
    out = 1
    for b, xb in enumerate(points):
        if b != a:
            out = out * (lam - xb) / (points[a] - xb)
    return out


def eval_interp(p: InterpPoly, lam):
    pts = p.points
    if p.kind == "rational":
        acc = 0
        for a in range(len(pts)):
            acc = acc + _lagrange_basis(pts, a, lam) * p.values[a]
        if p.asym is not None:
            lead = p.asym
            for xb in pts:
                lead = lead * (lam - xb)
            acc = acc + lead
        return acc
    if p.kind != "trig":
        raise ValueError(p.kind)
    lam = complex(lam)
    x = [complex(v) for v in pts]
    N = len(x)
    if p.asym is None:
        # no leading +-N terms: plain sinh-Lagrange form of degree N-1
        acc = 0j
        for a in range(N):
            g = 1.0 + 0j
            for b in range(N):
                if b != a:
                    g *= np.sinh(lam - x[b]) / np.sinh(x[a] - x[b])
            acc += g * complex(p.values[a])
        return acc
    P, M = p._trig_pm()
    sig = p._trig_sigma()
    t = p.shift if p.shift is not None else 0.5 + 0.5j * np.pi
    C = 0.5 * (P + M) - sig * np.cosh(t) / np.sinh(t)
    prod_all = 1.0 + 0j
    for xb in x:
        prod_all *= np.sinh(lam - xb)
    acc = C * prod_all
    for a in range(N):
        g = 1.0 + 0j
        for b in range(N):
            if b != a:
                g *= np.sinh(lam - x[b]) / np.sinh(x[a] - x[b])
        acc += np.sinh(t + lam - x[a]) / np.sinh(t) * g * complex(p.values[a])
    return acc
