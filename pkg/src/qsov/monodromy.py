"""Monodromy and transfer matrices, fused gl_3 transfer matrix, quantum determinants.

The monodromy is K_a R_{aN}(lam - xi_N) ... R_{a1}(lam - xi_1) on
V_aux (x) H with the auxiliary leg leading.  Everything here works in both
exact and float mode for the rational models; the six-vertex chain is float.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import numpy as np

from .numeric import (apply_one_leg, apply_two_leg, aux_block, eye, is_exact, kron,
                      leg_permutation, matmul, partial_trace_aux, partial_transpose_aux,
                      rel_residual, zeros)
from .yang_baxter import ModelSpec


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def _sh(spec: ModelSpec, x):
    return np.sinh(complex(x)) if spec.algebra == "trig" else x


def a_fn(spec: ModelSpec, lam):
    """a(lam) = prod (lam - xi + eta) (sinh products for the six-vertex chain)."""
    out = 1
    for x in spec.xi:
        out = out * _sh(spec, lam - x + spec.eta)
    return out


def d_fn(spec: ModelSpec, lam):
    """d(lam) = a(lam - eta) = prod (lam - xi)."""
    out = 1
    for x in spec.xi:
        out = out * _sh(spec, lam - x)
    return out


def det_K(spec: ModelSpec):
    if spec.exact:
        from .numeric import exact_det
        return exact_det(spec.K)
    return complex(np.linalg.det(spec.K))


def trace_K(spec: ModelSpec):
    return sum(spec.K[i, i] for i in range(spec.n))


def trace_K2(spec: ModelSpec):
    K2 = spec.K @ spec.K
    return sum(K2[i, i] for i in range(spec.n))


def lam_cast(spec: ModelSpec, lam):
    return spec.scalar(lam)


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def _monodromy_on(spec: ModelSpec, lam, aux_leg: int, L: int, offset: int,
                  twist: str = "left") -> np.ndarray:
    """Monodromy with auxiliary space on ``aux_leg`` of an L-leg space; sites at offset+j.

    ``twist="left"`` gives K_a R_aN ... R_a1, ``twist="right"`` gives
    R_aN ... R_a1 K_a.  Both have the same trace.
    """
    X = eye(spec.n ** L, spec.exact)
    if twist == "right":
        X = apply_one_leg(spec.K, X, aux_leg, spec.n, L)
    for j, x in enumerate(spec.xi):
        X = apply_two_leg(spec.R(lam - x), X, aux_leg, offset + j, spec.n, L)
    if twist == "left":
        X = apply_one_leg(spec.K, X, aux_leg, spec.n, L)
    return X


def monodromy(spec: ModelSpec, lam, twist: str = "left") -> np.ndarray:
    lam = lam_cast(spec, lam)
    return _monodromy_on(spec, lam, 0, spec.N + 1, 1, twist)


def entry(M: np.ndarray, n: int, i: int, j: int) -> np.ndarray:
    """Monodromy entry (0-based i, j) as an operator on H."""
    return aux_block(M, n, i, j)


def transfer1(spec: ModelSpec, lam) -> np.ndarray:
    return partial_trace_aux(monodromy(spec, lam), spec.n)


def sz_operator(N: int) -> np.ndarray:
    diag = [N - 2 * bin(i).count("1") for i in range(2 ** N)]
    return np.diag(np.array(diag, dtype=complex))


# ---------------------------------------------------------------------------
# gl_2 quantum determinant
# ---------------------------------------------------------------------------

def qdet2(spec: ModelSpec, lam):
    lam = lam_cast(spec, lam)
    return a_fn(spec, lam) * d_fn(spec, lam - spec.eta) * det_K(spec)


def qdet2_operator(spec: ModelSpec, lam) -> np.ndarray:
    lam = lam_cast(spec, lam)
    M0, M1 = monodromy(spec, lam), monodromy(spec, lam - spec.eta)
    A, B = entry(M0, 2, 0, 0), entry(M0, 2, 0, 1)
    C, D = entry(M1, 2, 1, 0), entry(M1, 2, 1, 1)
    return A @ D - B @ C


def trig_asymptotic_operator(spec: ModelSpec, sign: int) -> np.ndarray:
    """lim exp(-+ lam N) T(lam) as lam -> +-infinity, in terms of S_z."""
    N = spec.N
    if spec.a != 0:
        return np.zeros((2 ** N, 2 ** N), dtype=complex)
    pref = (-1) ** ((1 - sign) * N // 2) * np.exp(sign * (spec.eta * N / 2 - sum(spec.xi))) / 2 ** (N - 1)
    sz = np.diag(sz_operator(N))
    return np.diag(pref * np.cosh(spec.eta * sz / 2 + sign * spec.alpha))


def trig_asymptotic_value(spec: ModelSpec, sign: int, l: int) -> complex:
    if spec.a != 0:
        return 0j
    N = spec.N
    pref = (-1) ** ((1 - sign) * N // 2) * np.exp(sign * (spec.eta * N / 2 - sum(spec.xi))) / 2 ** (N - 1)
    return complex(pref * np.cosh(spec.eta * l / 2 + sign * spec.alpha))


def trig_sum_rule_operator(spec: ModelSpec, h) -> np.ndarray:
    """Sum_eps eps exp(eps eta (N/2 - sum h)) cosh(eta S_z/2 + eps alpha), times delta_{0,a}."""
    N = spec.N
    if spec.a != 0:
        return np.zeros((2 ** N, 2 ** N), dtype=complex)
    sz = np.diag(sz_operator(N))
    s = spec.eta * (N / 2 - sum(h))
    vals = sum(eps * np.exp(eps * s) * np.cosh(spec.eta * sz / 2 + eps * spec.alpha) for eps in (1, -1))
    return np.diag(vals)


def trig_sum_rule_lhs(spec: ModelSpec, h, T=None) -> np.ndarray:
    T = T or (lambda x: transfer1(spec, x))
    pts = [x - hh * spec.eta for x, hh in zip(spec.xi, h)]
    out = 0
    for a, xa in enumerate(pts):
        den = 1.0 + 0j
        for b, xb in enumerate(pts):
            if b != a:
                den *= np.sinh(xa - xb)
        out = out + T(xa) / den
    return out


# ---------------------------------------------------------------------------
# gl_3 fusion
# ---------------------------------------------------------------------------

def antisymmetrizer(n: int = 3, exact: bool = False) -> np.ndarray:
    """P^- = (1/n!) sum_sigma sgn(sigma) P_sigma on (C^n)^{(x) n}."""
    d = n ** n
    P = zeros((d, d), exact)
    for perm in permutations(range(n)):
        sgn = 1
        p = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if p[i] > p[j]:
                    sgn = -sgn
        P = P + sgn * leg_permutation(n, n, perm, exact)
    fact = math.factorial(n)
    return P * (Fraction(1, fact) if exact else 1.0 / fact)


def _aux3_monodromies(spec: ModelSpec, lams, k: int = 3, twist: str = "left"):
    """M_a(lams[i]) with auxiliary leg i among k auxiliary legs followed by the N sites."""
    return [_monodromy_on(spec, lam_cast(spec, lam), i, k + spec.N, k, twist)
            for i, lam in enumerate(lams)]


def fused_U(spec: ModelSpec, lam, twist: str = "left") -> np.ndarray:
    """U_c(lam), where U_c(lam)^t = 3 tr_ab P^-_abc M_a(lam) M_b(lam + eta).

    The transpose is the partial transpose on the auxiliary leg c.  This is
    the placement for which the quantum determinant identities hold (checked
    in :func:`qdet3_identity_residuals`).
    """
    if spec.n != 3:
        raise ValueError("fused U is defined for gl_3")
    lam = lam_cast(spec, lam)
    Ma, Mb = _aux3_monodromies(spec, [lam, lam + spec.eta], twist=twist)
    d = spec.dim
    Pm = kron(antisymmetrizer(3, spec.exact), eye(d, spec.exact))
    X = matmul(matmul(Pm, Ma), Mb)
    X = partial_trace_aux(X, 9) * 3
    return partial_transpose_aux(X, 3)


def transfer2(spec: ModelSpec, lam) -> np.ndarray:
    return partial_trace_aux(fused_U(spec, lam), 3)


def qdet3(spec: ModelSpec, lam):
    lam = lam_cast(spec, lam)
    out = det_K(spec)
    for x in spec.xi:
        out = out * (lam - x) * (lam + spec.eta - x) * (lam + 3 * spec.eta - x)
    return out


def qdet3_operator(spec: ModelSpec, lam) -> np.ndarray:
    """tr_123 P^- M_1(lam) M_2(lam+eta) M_3(lam+2 eta)."""
    lam = lam_cast(spec, lam)
    M1, M2, M3 = _aux3_monodromies(spec, [lam, lam + spec.eta, lam + 2 * spec.eta])
    Pm = kron(antisymmetrizer(3, spec.exact), eye(spec.dim, spec.exact))
    return partial_trace_aux(matmul(matmul(matmul(Pm, M1), M2), M3), 27)


def qdet3_identity_residuals(spec: ModelSpec, lam, twist: str = "left") -> dict:
    """Residuals of the four orderings M^t U, U M^t, U^t M, M U^t against qdet."""
    lam = lam_cast(spec, lam)
    eta = spec.eta
    q = qdet3(spec, lam)
    ident = q * eye(3 * spec.dim, spec.exact)
    Mt0 = partial_transpose_aux(monodromy(spec, lam, twist), 3)
    U1 = fused_U(spec, lam + eta, twist)
    Ut0 = partial_transpose_aux(fused_U(spec, lam, twist), 3)
    M2 = monodromy(spec, lam + 2 * eta, twist)
    return {
        "Mt(l) U(l+eta)": rel_residual(matmul(Mt0, U1), ident),
        "U(l+eta) Mt(l)": rel_residual(matmul(U1, Mt0), ident),
        "Ut(l) M(l+2eta)": rel_residual(matmul(Ut0, M2), ident),
        "M(l+2eta) Ut(l)": rel_residual(matmul(M2, Ut0), ident),
        "tr P- MMM": rel_residual(qdet3_operator(spec, lam), q * eye(spec.dim, spec.exact)),
    }


def t2_asym(spec: ModelSpec):
    return (trace_K(spec) ** 2 - trace_K2(spec)) / 2


def f_weight(spec: ModelSpec, a: int, lam, h: int = 1):
    """f_{a,h}(lam) = g_{a,h}(lam) prod_b (lam - xi_b)/(xi_a^(h) - xi_b)."""
    eta = spec.eta
    pts = [x - h * eta for x in spec.xi]
    out = 1
    for b, xb in enumerate(pts):
        if b != a:
            out = out * (lam - xb) / (pts[a] - xb)
    for xb in spec.xi:
        out = out * (lam - xb) / (pts[a] - xb)
    return out


def t2_infinity(spec: ModelSpec, lam, h: int = 1):
    out = t2_asym(spec)
    for x in spec.xi:
        out = out * (lam - x) * (lam - x + h * spec.eta)
    return out


class TransferFamily:
    """Transfer matrices of one model with a write-once cache of evaluations."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self._t1: dict = {}
        self._t2: dict = {}

    def _key(self, lam):
        return lam if self.spec.exact else complex(lam)

    def T1(self, lam) -> np.ndarray:
        lam = lam_cast(self.spec, lam)
        k = self._key(lam)
        if k not in self._t1:
            self._t1[k] = transfer1(self.spec, lam)
        return self._t1[k]

    def T(self, lam) -> np.ndarray:
        return self.T1(lam)

    def T2_direct(self, lam) -> np.ndarray:
        lam = lam_cast(self.spec, lam)
        k = self._key(lam)
        if k not in self._t2:
            self._t2[k] = transfer2(self.spec, lam)
        return self._t2[k]

    def T2(self, lam) -> np.ndarray:
        """T_2 from T_1 node data through the fusion interpolation formula."""
        spec = self.spec
        lam = lam_cast(spec, lam)
        out = t2_infinity(spec, lam) * eye(spec.dim, spec.exact)
        for a, x in enumerate(spec.xi):
            out = out + f_weight(spec, a, lam) * matmul(self.T1(x - spec.eta), self.T1(x))
        return out

    def T1_interp(self, lam) -> np.ndarray:
        """T_1 rebuilt from its N node values and leading coefficient tr K (rational)."""
        spec = self.spec
        lam = lam_cast(spec, lam)
        pts = spec.xi
        out = trace_K(spec) * eye(spec.dim, spec.exact)
        for x in pts:
            out = out * (lam - x)
        for a, xa in enumerate(pts):
            w = 1
            for b, xb in enumerate(pts):
                if b != a:
                    w = w * (lam - xb) / (xa - xb)
            out = out + w * self.T1(xa)
        return out


def transfer2_from_T1(spec: ModelSpec, lam, family: TransferFamily | None = None) -> np.ndarray:
    return (family or TransferFamily(spec)).T2(lam)


def fusion_residuals(spec: ModelSpec, family: TransferFamily | None = None) -> dict:
    fam = family or TransferFamily(spec)
    eta = spec.eta
    out = {}
    ident = eye(spec.dim, spec.exact)
    for a, x in enumerate(spec.xi):
        if spec.n == 2:
            lhs = matmul(fam.T1(x), fam.T1(x - eta))
            out[f"T(xi{a + 1})T(xi{a + 1}-eta)=qdet"] = rel_residual(lhs, qdet2(spec, x) * ident)
        elif spec.n == 3:
            lhs = matmul(fam.T1(x), fam.T2_direct(x - 2 * eta))
            out[f"T1(xi{a + 1})T2(xi{a + 1}-2eta)=qdet"] = rel_residual(lhs, qdet3(spec, x - 2 * eta) * ident)
            lhs = matmul(fam.T1(x - eta), fam.T1(x))
            out[f"T1(xi{a + 1}-eta)T1(xi{a + 1})=T2"] = rel_residual(lhs, fam.T2_direct(x - eta))
    return out


def commutator_residual(X, Y) -> float:
    XY, YX = matmul(X, Y), matmul(Y, X)
    r = rel_residual(XY, YX)
    return float(r)


def is_scalar_spec(spec: ModelSpec) -> bool:
    K = spec.K
    c = K[0, 0]
    return all((K[i, j] == (c if i == j else 0)) if is_exact(K) else abs(K[i, j] - (c if i == j else 0)) < 1e-14
               for i in range(spec.n) for j in range(spec.n))
