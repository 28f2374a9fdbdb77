"""R-matrices, twists, model specification and Yang-Baxter residuals."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numeric import (eye, frac, is_exact, kron, matmul, permutation_matrix, rel_residual,
                      to_exact, to_float, zeros)


MAX_DIM = 10 ** 4      # dense kernels only; gl_2 stops at N = 13


class InhomogeneityViolation(ValueError):
    pass


# ---------------------------------------------------------------------------
# R-matrices
# ---------------------------------------------------------------------------

def rational_R(n: int, lam, eta) -> np.ndarray:
    """lam*I + eta*P on C^n (x) C^n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    exact = is_exact(lam) and is_exact(eta)
    if exact:
        lam, eta = frac(lam), frac(eta)
    return lam * eye(n * n, exact) + eta * permutation_matrix(n, exact)


def trig_R(lam, eta) -> np.ndarray:
    """Six-vertex R-matrix with entries sinh(lam+eta), sinh(lam), sinh(eta)."""
    if isinstance(lam, Fraction) or isinstance(eta, Fraction):
        raise TypeError("trigonometric R-matrix is float-only")
    lam, eta = complex(lam), complex(eta)
    a, b, c = np.sinh(lam + eta), np.sinh(lam), np.sinh(eta)
    return np.array([[a, 0, 0, 0],
                     [0, b, c, 0],
                     [0, c, b, 0],
                     [0, 0, 0, a]], dtype=complex)


def twist_trig(a: int, alpha, mult=1.0) -> np.ndarray:
    """K^(a,alpha): diag(e^alpha, e^-alpha) for a=0, antidiagonal for a=1."""
    e = np.exp(complex(alpha))
    if a == 0:
        K = np.array([[e, 0], [0, 1 / e]], dtype=complex)
    elif a == 1:
        K = np.array([[0, e], [1 / e, 0]], dtype=complex)
    else:
        raise ValueError("a must be 0 or 1")
    return complex(mult) * K


def _R(kind: str, n: int, lam, eta):
    return rational_R(n, lam, eta) if kind == "rational" else trig_R(lam, eta)


def _legs3(A, slot: str, n: int):
    """Embed a two-leg operator on (12), (13) or (23) of a three-leg space."""
    exact = is_exact(A)
    I = eye(n, exact)
    if slot == "12":
        return kron(A, I)
    if slot == "23":
        return kron(I, A)
    P23 = kron(I, permutation_matrix(n, exact))
    return matmul(matmul(P23, kron(A, I)), P23)


def ybe_residual(kind: str, lam, mu, eta, n: int = 2):
    """Relative residual of R12(lam-mu) R13(lam) R23(mu) = R23(mu) R13(lam) R12(lam-mu)."""
    if kind == "trig":
        n = 2
    R12 = _legs3(_R(kind, n, lam - mu, eta), "12", n)
    R13 = _legs3(_R(kind, n, lam, eta), "13", n)
    R23 = _legs3(_R(kind, n, mu, eta), "23", n)
    return rel_residual(matmul(matmul(R12, R13), R23), matmul(matmul(R23, R13), R12))


def scalar_ybe_residual(kind: str, K, lam, mu, eta, n: int | None = None):
    """Relative residual of R12(lam-mu) K1 K2 = K2 K1 R12(lam-mu)."""
    K = np.asarray(K)
    n = K.shape[0]
    R = _R(kind, n, lam - mu, eta)
    if kind == "trig":
        K = to_float(K)
    KK = kron(K, K)
    return rel_residual(matmul(R, KK), matmul(KK, R))


def unitarity_factor(n: int, lam, eta):
    """R(lam) R(-lam) for the rational R; returns (matrix, scalar if proportional)."""
    M = matmul(rational_R(n, lam, eta), rational_R(n, -lam, eta))
    c = M[0, 0]
    prop = rel_residual(M, c * eye(n * n, is_exact(M))) == 0 or \
        rel_residual(M, c * eye(n * n, is_exact(M))) < 1e-13
    return M, (c if prop else None)


# ---------------------------------------------------------------------------
# model specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Chain definition: algebra, local dimension, sites, eta, xi, twist, mode.

    ``algebra`` is ``"rational"`` (gl_n, any n x n twist) or ``"trig"``
    (six-vertex, twist from the K^(a,alpha) family).  ``mode`` is
    ``"exact"`` (Fraction entries) or ``"float"``.
    """

    algebra: str
    n: int
    xi: tuple
    eta: object
    K: np.ndarray
    mode: str = "float"
    a: int | None = None
    alpha: complex | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.algebra not in ("rational", "trig"):
            raise ValueError(f"unknown algebra {self.algebra}")
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode}")
        if self.algebra == "trig":
            if self.mode == "exact":
                raise ValueError("trigonometric models are float-only")
            if self.n != 2 or self.a not in (0, 1):
                raise ValueError("trig models need n=2 and a in {0,1}")
        if self.K.shape != (self.n, self.n):
            raise ValueError("twist shape does not match n")
        if self.n ** len(self.xi) > MAX_DIM:
            raise ValueError(f"dimension n^N above the dense cap {MAX_DIM}")
        if self.check:
            bad = inhomogeneity_violations(self)
            if bad:
                raise InhomogeneityViolation(f"xi_a - xi_b = r*eta for (a,b,r) in {bad}")

    # constructors --------------------------------------------------------
    @classmethod
    def rational(cls, n, xi, eta, K, mode="float", check=True):
        if mode == "exact":
            xi = tuple(frac(x) for x in xi)
            eta = frac(eta)
            K = to_exact(K)
        else:
            xi = tuple(complex(x) for x in xi)
            eta = complex(eta)
            K = to_float(K)
        return cls("rational", n, xi, eta, K, mode, check=check)

    @classmethod
    def trig(cls, xi, eta, a, alpha, mult=1.0, check=True):
        K = twist_trig(a, alpha, mult)
        return cls("trig", 2, tuple(complex(x) for x in xi), complex(eta), K, "float",
                   a=a, alpha=complex(alpha), check=check)

    # properties ----------------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.xi)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def dim(self) -> int:
        return self.n ** self.N

    def R(self, lam):
        if self.algebra == "rational":
            return rational_R(self.n, lam, self.eta)
        return trig_R(lam, self.eta)

    def scalar(self, x):
        return frac(x) if self.exact else complex(x)

    def with_K(self, K) -> "ModelSpec":
        if self.algebra == "trig":
            raise ValueError("trig twist is fixed by (a, alpha)")
        return ModelSpec.rational(self.n, self.xi, self.eta, K, self.mode, self.check)

    def to_float(self) -> "ModelSpec":
        if not self.exact:
            return self
        return ModelSpec.rational(self.n, [complex(x) for x in self.xi], complex(self.eta),
                                  to_float(self.K), "float", self.check)

    def describe(self) -> dict:
        def enc(z):
            if isinstance(z, Fraction):
                return str(z)
            z = complex(z)
            return [z.real, z.imag]
        return {
            "algebra": self.algebra, "n": self.n, "N": self.N, "mode": self.mode,
            "eta": enc(self.eta), "xi": [enc(x) for x in self.xi],
            "K": [[enc(v) for v in row] for row in self.K],
            "a": self.a, "alpha": None if self.alpha is None else enc(self.alpha),
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def inhomogeneity_violations(spec: ModelSpec, tol: float = 1e-12):
    rmax = 1 if spec.n == 2 else 2
    out = []
    for i in range(spec.N):
        for j in range(spec.N):
            if i == j:
                continue
            for r in range(-rmax, rmax + 1):
                d = spec.xi[i] - spec.xi[j] - r * spec.eta
                if spec.algebra == "trig":
                    if abs(np.sinh(d)) < tol:
                        out.append((i + 1, j + 1, r))
                elif spec.exact:
                    if d == 0:
                        out.append((i + 1, j + 1, r))
                elif abs(d) < tol:
                    out.append((i + 1, j + 1, r))
    return out


def zero_like(spec: ModelSpec):
    return Fraction(0) if spec.exact else 0j


__all__ = ["rational_R", "trig_R", "twist_trig", "ybe_residual", "scalar_ybe_residual",
           "unitarity_factor", "ModelSpec", "InhomogeneityViolation",
           "inhomogeneity_violations", "zeros"]
