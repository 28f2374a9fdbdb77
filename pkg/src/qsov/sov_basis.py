"""SoV covector basis generated by transfer-matrix action."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
import sympy

from .charge_algebra import NotABasis, mixed_radix, w_simple_check
from .monodromy import TransferFamily, a_fn
from .numeric import certify_det, embed_at, is_exact, kron, rel_residual, to_exact, to_float
from .yang_baxter import ModelSpec


class LocalConditionViolated(ValueError):
    pass


def default_norms(spec: ModelSpec) -> tuple:
    """Per-site normalizations: a(xi_a) for gl_2, (e^alpha)^{delta_{0,a}} a(xi_a) for trig, 1 for gl_3."""
    if spec.algebra == "trig":
        pref = np.exp(spec.alpha) if spec.a == 0 else 1.0
        return tuple(complex(pref * a_fn(spec, x)) for x in spec.xi)
    if spec.n == 2:
        return tuple(a_fn(spec, x) for x in spec.xi)
    one = Fraction(1) if spec.exact else 1.0 + 0j
    return tuple(one for _ in spec.xi)


def default_grid(spec: ModelSpec) -> tuple:
    return tuple(tuple([x] * (spec.n - 1)) for x in spec.xi)


@dataclass(frozen=True, eq=False)
class SovBasis:
    spec: ModelSpec
    S: np.ndarray
    order: tuple          # HIndex tuples, h_1 fastest
    rows: np.ndarray      # row i is the covector for order[i]
    norms: tuple
    grid: tuple
    det: object
    log_abs_det: float
    log_floor: float
    nonzero: bool

    def index(self, h) -> int:
        n = self.spec.n
        return sum(int(v) * n ** a for a, v in enumerate(h))

    def row(self, h) -> np.ndarray:
        return self.rows[self.index(h)]

    def float_rows(self) -> np.ndarray:
        return to_float(self.rows) if is_exact(self.rows) else self.rows

    def recursion_residual(self, family: TransferFamily | None = None):
        """Max relative deviation of row(h) from row(h - e_a) T(grid)/norm_a over all (h, a)."""
        fam = family or TransferFamily(self.spec)
        worst = 0
        for h in self.order:
            for a, ha in enumerate(h):
                if ha == 0:
                    continue
                prev = list(h)
                prev[a] -= 1
                rhs = self.row(prev) @ fam.T1(self.grid[a][ha - 1]) / self.norms[a]
                r = rel_residual(self.row(h), rhs)
                worst = max(worst, r)
        return worst


def build_basis(spec: ModelSpec, S, norms=None, grid=None, family: TransferFamily | None = None,
                raise_on_zero: bool = True, rel_floor: float | None = None) -> SovBasis:
    """<h| = <S| prod_a prod_{k < h_a} T(grid[a][k]) / norm_a, enumerated with h_1 fastest."""
    fam = family or TransferFamily(spec)
    S = to_exact(S) if spec.exact else np.asarray(S, dtype=complex)
    if S.shape != (spec.dim,):
        raise ValueError("covector length must be n^N")
    if not np.any(S != 0):
        raise ValueError("S must be nonzero")
    norms = tuple(norms) if norms is not None else default_norms(spec)
    grid = tuple(tuple(g) for g in grid) if grid is not None else default_grid(spec)
    n = spec.n
    order = tuple(mixed_radix([n] * spec.N))
    rows = [None] * len(order)
    for i, h in enumerate(order):
        if not any(h):
            rows[i] = S
            continue
        a = next(k for k, v in enumerate(h) if v)
        parent = i - n ** a
        rows[i] = rows[parent] @ fam.T1(grid[a][h[a] - 1]) / norms[a]
    R = np.array(rows, dtype=object if spec.exact else complex)
    cert = certify_det(R, rel_floor)
    basis = SovBasis(spec, S, order, R, norms, grid, cert.value, cert.log_abs, cert.log_floor,
                     cert.nonzero)
    if raise_on_zero and not cert.nonzero:
        raise NotABasis("transition determinant vanishes (or is below the conditioning floor)",
                        witness=S)
    return basis


# ---------------------------------------------------------------------------
# tensor-product covectors
# ---------------------------------------------------------------------------

def local_det(K, s):
    """det of the rows s K^h, h = 0..n-1."""
    rows = [s]
    for _ in range(K.shape[0] - 1):
        rows.append(rows[-1] @ K)
    return certify_det(np.array(rows, dtype=K.dtype)).value


def jordan_frame(K):
    """(W, blocks) with K = W J W^{-1}, J upper Jordan, blocks = [(eigenvalue, size)].

    The block with the largest-modulus eigenvalue comes first, so the first
    column of W is an eigenvector for k_0.
    """
    if is_exact(K):
        M = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in K])
        P, J = M.jordan_form()
        d = K.shape[0]
        blocks, i = [], 0
        while i < d:
            m = 1
            while i + m < d and J[i + m - 1, i + m] == 1:
                m += 1
            blocks.append((J[i, i], i, m))
            i += m
        blocks.sort(key=lambda b: -abs(complex(b[0])))
        cols = [P[:, j] for (_, s, m) in blocks for j in range(s, s + m)]
        W = sympy.Matrix.hstack(*cols)
        if all(v.is_rational for v in W) and all(b[0].is_rational for b in blocks):
            Wout = to_exact([[Fraction(int(v.p), int(v.q)) for v in W.row(r)] for r in range(d)])
        else:
            Wout = np.array(W.evalf(30).tolist(), dtype=complex)
        return Wout, [(complex(b[0]) if not b[0].is_rational else Fraction(int(b[0].p), int(b[0].q)), b[2])
                      for b in blocks]
    K = np.asarray(K, dtype=complex)
    w, V = np.linalg.eig(K)
    idx = sorted(range(len(w)), key=lambda k: (-abs(w[k]), w[k].real, w[k].imag))
    w, V = w[idx], V[:, idx]
    if np.linalg.cond(V) > 1e10:
        raise ValueError("float twist with a nontrivial Jordan block: use exact mode")
    return V, [(complex(v), 1) for v in w]


def local_covector_gl3(K, xyz):
    """(x, y, z) Gamma_W^{-1} on one site, with the case i/ii/iii condition checked."""
    W, blocks = jordan_frame(K)
    x = to_exact(xyz) if is_exact(W) else np.asarray(xyz, dtype=complex)
    firsts, o = [], 0
    for _, m in blocks:
        firsts.append(x[o])
        o += m
    if any(v == 0 for v in firsts):
        raise LocalConditionViolated("first component on some Jordan block vanishes")
    if is_exact(W):
        return x @ _exact_inv(W)
    return x @ np.linalg.inv(W)


def _exact_inv(W):
    M = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in W])
    Mi = M.inv()
    return to_exact([[Fraction(int(Mi[i, j].p), int(Mi[i, j].q)) for j in range(M.cols)]
                     for i in range(M.rows)])


def tensor_S(spec: ModelSpec, local, frame: str = "jordan") -> np.ndarray:
    """Tensor-product covector; ``local`` is one covector or a per-site list.

    gl_2 / trig: the local covector is used as given after checking that
    {<s|, <s|K^h} is a basis.  gl_3 with ``frame="jordan"``: ``local`` holds
    (x, y, z) coordinates in the Jordan frame of K.  ``frame="raw"`` skips
    the frame change (needed in exact mode when K has irrational
    eigenvalues); the local determinant is checked either way.
    """
    cert = w_simple_check(spec.K)
    if cert.is_wsimple is False:
        raise ValueError("twist is not w-simple")
    locs = list(local) if np.ndim(local) == 2 else [local] * spec.N
    if len(locs) != spec.N:
        raise ValueError("need one local covector per site")
    out = []
    for s in locs:
        if spec.n == 3 and frame == "jordan":
            v = local_covector_gl3(spec.K, s)
        else:
            v = to_exact(s) if spec.exact else np.asarray(s, dtype=complex)
        ld = local_det(spec.K, v)
        if ld == 0 or (not spec.exact and abs(ld) < 1e-12 * max(1.0, np.linalg.norm(v)) ** spec.n):
            raise LocalConditionViolated(f"local determinant vanishes for {s}")
        out.append(v)
    return reduce(kron, out)


def gl2_local_det(K, x, y):
    """b x^2 + (d - a) x y - c y^2 for K = [[a, b], [c, d]]."""
    (a, b), (c, d) = K
    return b * x * x + (d - a) * x * y - c * y * y


def gl3_local_det_diag(ks, x, y, z):
    """-x y z V(k0, k1, k2) for a diagonal twist."""
    k0, k1, k2 = ks
    return -x * y * z * (k0 - k1) * (k0 - k2) * (k1 - k2)


# ---------------------------------------------------------------------------
# degeneration of T(xi_l) at widely separated inhomogeneities
# ---------------------------------------------------------------------------

def degeneration_coefficient(N: int, l: int) -> int:
    """c_{l,N-1} = (-1)^{N-l} (l-1)! (N-l)!  (l is 1-based)."""
    from math import factorial
    return (-1) ** (N - l) * factorial(l - 1) * factorial(N - l)


@dataclass(frozen=True)
class DegenerationReport:
    site: int
    coefficient: int
    xi_scale: float
    rel_error: float


def degeneration_check(spec: ModelSpec, l: int, xi_scale: float = 1e3) -> DegenerationReport:
    """Fit lim xi^{-(N-1)} T(xi_l) with xi_a = a xi against eta c_{l,N-1} K_l.

    Two-point Richardson on xi and 2 xi removes the 1/xi tail.
    """
    if spec.algebra != "rational":
        raise ValueError("degeneration check is for rational models")
    base = spec.to_float()
    N = base.N

    def scaled(s):
        sp = ModelSpec.rational(base.n, [s * (a + 1) for a in range(N)], base.eta, base.K, "float")
        return TransferFamily(sp).T1(sp.xi[l - 1]) / s ** (N - 1)

    F1, F2 = scaled(xi_scale), scaled(2 * xi_scale)
    lim = 2 * F2 - F1
    c = degeneration_coefficient(N, l)
    target = base.eta * c * embed_at(base.K, l, base.n, N)
    return DegenerationReport(l, c, xi_scale, float(rel_residual(lim, target)))
