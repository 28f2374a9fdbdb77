"""w-simplicity, companion form, power bases and confluent Vandermonde determinants."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numeric import (_domain, certify_det, eye, is_exact, solve_refined, to_exact,
                      zeros)


class NotWSimple(ValueError):
    pass


class NotABasis(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotAnEigenvalue(ValueError):
    pass


@dataclass(frozen=True)
class WSimpleCertificate:
    is_wsimple: bool | None          # None when inconclusive
    min_poly_degree: int | None
    jordan_sketch: tuple = ()
    tol: float | None = None
    inconclusive: bool = False
    notes: tuple = field(default_factory=tuple)


def _min_poly_degree_exact(X) -> int:
    d = X.shape[0]
    cols = []
    P = eye(d, True)
    for k in range(d + 1):
        cols.append(list(P.ravel()))
        dm = _domain(np.array(cols, dtype=object))
        if dm.rank() < len(cols):
            return k
        P = P @ X
    return d


def _krylov_rank_exact(X, v) -> int:
    rows = [v]
    for _ in range(X.shape[0] - 1):
        rows.append(rows[-1] @ X)
    return _domain(np.array(rows, dtype=object)).rank()


def w_simple_check(X, gap_rel: float = 1e-8, cluster_rel: float = 1e-6,
                   rng: np.random.Generator | None = None) -> WSimpleCertificate:
    """Nonderogatory test.

    Exact input: minimal-polynomial degree from linear dependence of the
    powers of X, confirmed by a Krylov rank over canonical and random
    small-integer covectors.  Float input: eigenvalue clustering plus the
    geometric multiplicity of each cluster.
    """
    d = X.shape[0]
    if is_exact(X):
        deg = _min_poly_degree_exact(X)
        rng = rng or np.random.default_rng(0)
        best = 0
        cands = [np.array([Fraction(int(i == j)) for j in range(d)], dtype=object) for i in range(d)]
        for _ in range(4):
            cands.append(np.array([Fraction(int(v)) for v in rng.integers(-5, 6, size=d)], dtype=object))
        for v in cands:
            best = max(best, _krylov_rank_exact(X, v))
            if best == d:
                break
        ok = deg == d
        notes = () if (best == d) == ok else ("krylov and minimal polynomial disagree",)
        return WSimpleCertificate(ok, deg, (), None, False, notes)

    X = np.asarray(X, dtype=complex)
    scale = np.linalg.norm(X) or 1.0
    w = np.linalg.eigvals(X)
    # single-linkage clustering
    clusters: list[list[int]] = []
    for i in sorted(range(d), key=lambda k: (w[k].real, w[k].imag)):
        for c in clusters:
            if min(abs(w[i] - w[j]) for j in c) < cluster_rel * scale:
                c.append(i)
                break
        else:
            clusters.append([i])
    sketch = []
    inconclusive = False
    wsimple = True
    deg = 0
    for c in clusters:
        mu = np.mean(w[c])
        sv = np.linalg.svd(X - mu * np.eye(d), compute_uv=False)
        m = len(c)
        small = sv[-m:]
        nullity = int(np.sum(small < 1e-7 * scale))
        spread = max(abs(w[i] - w[j]) for i in c for j in c) if m > 1 else 0.0
        if m > 1 and spread > gap_rel * scale:
            inconclusive = True        # split cluster: Jordan block or near-degenerate pair
        if nullity == 0 and m > 1:
            inconclusive = True
        nullity = max(nullity, 1)
        if nullity > 1:
            wsimple = False
        blocks = (m,) if nullity == 1 else tuple([1] * nullity)
        sketch.append((complex(mu), blocks))
        deg += m - nullity + 1
    if inconclusive and wsimple:
        return WSimpleCertificate(None, None, tuple(sketch), cluster_rel, True)
    return WSimpleCertificate(wsimple, deg, tuple(sketch), cluster_rel, False)


def char_poly(X):
    """Monic characteristic coefficients [a_0, ..., a_{d-1}] of t^d + sum a_k t^k."""
    if is_exact(X):
        cp = _domain(X).charpoly()
        cp = [Fraction(int(c.numerator), int(c.denominator)) for c in cp]
        return cp[1:][::-1]
    c = np.poly(np.asarray(X, dtype=complex))
    return list(c[1:][::-1])


def companion_matrix(coeffs, exact: bool) -> np.ndarray:
    d = len(coeffs)
    C = zeros((d, d), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(d - 1):
        C[i, i + 1] = one
    for k in range(d):
        C[d - 1, k] = -coeffs[k]
    return C


def _krylov_rows(X, v, k):
    rows = [v]
    for _ in range(k - 1):
        rows.append(rows[-1] @ X)
    return np.array(rows, dtype=object if is_exact(X) else complex)


def companion_conjugate(X, rng: np.random.Generator | None = None):
    """(C, V) with V X V^{-1} = C; rows of V are <v| X^k for a cyclic covector v."""
    d = X.shape[0]
    exact = is_exact(X)
    rng = rng or np.random.default_rng(0)
    cands = [np.eye(d)[i] for i in range(d)] + [rng.integers(-5, 6, size=d) for _ in range(8)]
    for c in cands:
        v = to_exact(c.astype(int)) if exact else np.asarray(c, dtype=complex)
        V = _krylov_rows(X, v, d)
        if certify_det(V).nonzero:
            C = companion_matrix(char_poly(X), exact)
            return C, V
    raise NotWSimple("no cyclic covector found; matrix is not w-simple")


def mixed_radix(dims):
    """All h tuples in mixed-radix order with h_1 fastest."""
    for idx in itertools.product(*[range(d) for d in reversed(dims)]):
        yield tuple(reversed(idx))


@dataclass(frozen=True)
class PowerBasis:
    rows: np.ndarray
    order: tuple
    exponents: tuple
    det: object
    nonzero: bool


def power_basis(X, dims, S, raise_on_zero: bool = True) -> PowerBasis:
    """Covectors <S| prod_j X_j^{h_j} with X_j = X^{delta_j}, delta_j = prod_{n<j} d_n."""
    d = X.shape[0]
    if int(np.prod(dims)) != d:
        raise ValueError("product of dims must equal dim(X)")
    deltas = [int(np.prod(dims[:j])) for j in range(len(dims))]
    exact = is_exact(X)
    S = to_exact(S) if exact else np.asarray(S, dtype=complex)
    powers = [S]
    for _ in range(d - 1):
        powers.append(powers[-1] @ X)
    order = tuple(mixed_radix(dims))
    exps = tuple(sum(h * dl for h, dl in zip(hh, deltas)) for hh in order)
    rows = np.array([powers[e] for e in exps], dtype=object if exact else complex)
    cert = certify_det(rows)
    if raise_on_zero and not cert.nonzero:
        raise NotABasis("power basis is degenerate for this covector", witness=S)
    return PowerBasis(rows, order, exps, cert.value, cert.nonzero)


def jordan_block(k, n: int, exact: bool) -> np.ndarray:
    J = zeros((n, n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n):
        J[i, i] = k
        if i + 1 < n:
            J[i, i + 1] = one
    return J


def block_diag(blocks, exact: bool) -> np.ndarray:
    d = sum(b.shape[0] for b in blocks)
    out = zeros((d, d), exact)
    o = 0
    for b in blocks:
        m = b.shape[0]
        out[o:o + m, o:o + m] = b
        o += m
    return out


def confluent_vandermonde_formula(blocks, x):
    out = 1
    for (k, n), x1 in zip(blocks, x):
        out = out * x1 ** n
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            (ka, na), (kb, nb) = blocks[a], blocks[b]
            out = out * (kb - ka) ** (na * nb)
    return out


def confluent_vandermonde_det(blocks, x, tol: float = 1e-10):
    """Closed form and brute-force determinant of <S|X^{i-1}|s_j> for X in Jordan form.

    ``blocks`` is a sequence of (eigenvalue, size); ``x`` the first component
    of <S| on each block (the remaining components are set to 1, the
    determinant does not depend on them).  Returns (formula, brute).
    """
    exact = all(is_exact(k) for k, _ in blocks) and all(is_exact(v) for v in x)
    cast = (lambda v: Fraction(v)) if exact else complex
    blocks = [(cast(k), int(n)) for k, n in blocks]
    x = [cast(v) for v in x]
    X = block_diag([jordan_block(k, n, exact) for k, n in blocks], exact)
    S = []
    for (k, n), x1 in zip(blocks, x):
        S += [x1] + [cast(1)] * (n - 1)
    S = np.array(S, dtype=object if exact else complex)
    rows = _krylov_rows(X, S, X.shape[0])
    brute = certify_det(rows).value
    formula = confluent_vandermonde_formula(blocks, x)
    if exact:
        if brute != formula:
            raise AssertionError(f"confluent Vandermonde mismatch {formula} vs {brute}")
    elif abs(brute - formula) > tol * max(1.0, abs(formula)):
        raise AssertionError(f"confluent Vandermonde mismatch {formula} vs {brute}")
    return formula, brute


def eigvec_from_eigenvalue(X, lam, basis: PowerBasis | None = None, S=None, tol: float = 1e-9):
    """Vector with <f_n|Lambda> = lam^{n-1} in the basis f_n = <S|X^{n-1}."""
    d = X.shape[0]
    if basis is None:
        basis = power_basis(X, (d,), S if S is not None else np.eye(d, dtype=int)[0])
    F = np.asarray(basis.rows, dtype=complex) if not is_exact(basis.rows) else \
        np.array([[complex(v) for v in r] for r in basis.rows])
    rhs = np.array([complex(lam) ** e for e in basis.exponents])
    v = solve_refined(F, rhs)
    Xc = np.array([[complex(e) for e in r] for r in X]) if is_exact(X) else np.asarray(X, dtype=complex)
    res = np.linalg.norm(Xc @ v - lam * v) / np.linalg.norm(v)
    if res > tol * max(1.0, np.linalg.norm(Xc)):
        raise NotAnEigenvalue(f"residual {res:.3e} for lambda={lam}")
    return v
