"""gl_3 spectrum: cubic system, t_2 interpolation, third-order spectral curve, reference state, ABA."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .monodromy import (TransferFamily, d_fn, f_weight, qdet3, t2_asym, t2_infinity,
                        trace_K)
from .numeric import InterpPoly, NonConvergence, kron, solve_refined, to_float
from .sov_basis import SovBasis, jordan_frame
from .spectrum_gl2 import (NoAdmissibleQ, RejectedCandidate, SpectrumRecord, aba_state,
                           brute_force_spectrum, eigen_residual, float_spec, generic_point,
                           wavefunction)
from .yang_baxter import ModelSpec


def brute_force_spectrum_gl3(spec: ModelSpec, rng=None, family=None, **kw) -> list[SpectrumRecord]:
    if spec.n != 3:
        raise ValueError("gl_3 oracle needs n=3")
    return brute_force_spectrum(spec, rng, family, **kw)


def t1_poly(spec: ModelSpec, nodes) -> InterpPoly:
    return InterpPoly("rational", tuple(spec.xi), tuple(nodes), trace_K(spec))


def t2_from_t1_nodes(spec: ModelSpec, nodes) -> InterpPoly:
    """t_2 as a degree-2N interpolation: zeros at xi_n, t1(xi_n - eta) t1(xi_n) at xi_n - eta."""
    fspec = float_spec(spec)
    t1 = t1_poly(fspec, nodes)
    pts = tuple(fspec.xi) + tuple(x - fspec.eta for x in fspec.xi)
    vals = tuple([0j] * fspec.N) + tuple(complex(t1(x - fspec.eta)) * complex(nodes[a])
                                         for a, x in enumerate(fspec.xi))
    return InterpPoly("rational", pts, vals, t2_asym(fspec))


def t2_formula(spec: ModelSpec, nodes, lam) -> complex:
    """T2_inf(lam) + sum_n f_{n,1}(lam) t1(xi_n - eta) t1(xi_n), the displayed form."""
    fspec = float_spec(spec)
    t1 = t1_poly(fspec, nodes)
    out = t2_infinity(fspec, lam)
    for a, x in enumerate(fspec.xi):
        out += f_weight(fspec, a, lam) * t1(x - fspec.eta) * nodes[a]
    return complex(out)


def cubic_system_residual(spec: ModelSpec, nodes) -> float:
    fspec = float_spec(spec)
    t2 = t2_from_t1_nodes(fspec, nodes)
    worst = 0.0
    for a, x in enumerate(fspec.xi):
        lhs = complex(nodes[a]) * complex(t2(x - 2 * fspec.eta))
        q = complex(qdet3(fspec, x - 2 * fspec.eta))
        worst = max(worst, abs(lhs - q) / max(abs(lhs), abs(q)))
    return worst


def solve_cubic_system(spec: ModelSpec, seed, tol: float = 1e-12, max_iter: int = 50):
    """Newton on x_a S_a(x) = qdet(xi_a - 2 eta), S_a = T2_inf + sum_n F_an (c_n + (G x)_n) x_n."""
    fspec = float_spec(spec)
    N, eta = fspec.N, fspec.eta
    xi = fspec.xi
    zero = t1_poly(fspec, [0j] * N)
    c = np.array([complex(zero(x - eta)) for x in xi])
    G = np.zeros((N, N), dtype=complex)
    for m in range(N):
        e = [0j] * N
        e[m] = 1.0
        tp = t1_poly(fspec, e)
        G[:, m] = [complex(tp(x - eta)) - c[n] for n, x in enumerate(xi)]
    F = np.array([[complex(f_weight(fspec, n, x - 2 * eta)) for n in range(N)] for x in xi])
    T2i = np.array([complex(t2_infinity(fspec, x - 2 * eta)) for x in xi])
    q = np.array([complex(qdet3(fspec, x - 2 * eta)) for x in xi])
    x = np.array(seed, dtype=complex)
    for it in range(max_iter + 1):
        u = c + G @ x
        S = T2i + F @ (u * x)
        Fx = x * S - q
        if np.max(np.abs(Fx) / (np.abs(x * S) + np.abs(q))) <= tol:
            return tuple(x), it
        dS = F * u[None, :] + F @ (x[:, None] * G)
        J = np.diag(S) + x[:, None] * dS
        if np.linalg.cond(J) > 1e14:
            raise NonConvergence("singular Jacobian in cubic-system Newton step")
        x = x - np.linalg.solve(J, Fx)
    raise NonConvergence(f"no convergence in {max_iter} Newton iterations")


def factorized_eigenvector_gl3(spec: ModelSpec, basis: SovBasis, nodes, family=None, rng=None,
                               tol: float = 1e-8, n_probe: int = 5, check_t2: bool = True):
    """|t> from <h|t> = prod t1(xi_n)^{h_n}; returns (vector, residual_T1, residual_T2)."""
    fspec = float_spec(spec)
    fam = family or TransferFamily(fspec)
    v = solve_refined(basis.float_rows(), wavefunction(basis, nodes))
    t1, t2 = t1_poly(fspec, nodes), t2_from_t1_nodes(fspec, nodes)
    rng = rng or np.random.default_rng(12345)
    r1 = r2 = 0.0
    for _ in range(n_probe):
        lam = generic_point(rng, fspec)
        r1 = max(r1, eigen_residual(fam.T1(lam), v, complex(t1(lam))))
        if check_t2:
            r2 = max(r2, eigen_residual(fam.T2(lam), v, complex(t2(lam))))
    if max(r1, r2) > tol:
        raise RejectedCandidate(f"eigen residuals {r1:.3e}, {r2:.3e} above {tol:g}", max(r1, r2))
    return v, r1, r2


# ---------------------------------------------------------------------------
# third-order spectral curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiPoly:
    M: int
    coeffs: tuple           # ascending, monic
    roots: tuple
    gamma0: complex
    lsq_residual: float
    curve_residual: float
    root_margin: float

    def __call__(self, lam):
        return complex(np.polyval(self.coeffs[::-1], complex(lam)))


def gamma_fn(spec: ModelSpec, gamma0, lam) -> complex:
    out = complex(gamma0)
    for x in spec.xi:
        out *= lam + spec.eta - x
    return out


def curve_terms(spec: ModelSpec, nodes, phi, gamma0, lam):
    eta = spec.eta
    g = lambda z: gamma_fn(spec, gamma0, z)
    t1, t2 = t1_poly(spec, nodes), t2_from_t1_nodes(spec, nodes)
    alpha = g(lam) * g(lam - eta) * g(lam - 2 * eta)
    beta = g(lam) * g(lam - eta)
    return [alpha * phi(lam - 3 * eta),
            -beta * complex(t1(lam - 2 * eta)) * phi(lam - 2 * eta),
            g(lam) * complex(t2(lam - 2 * eta)) * phi(lam - eta),
            -complex(qdet3(spec, lam - 2 * eta)) * phi(lam)]


def curve_residual(spec: ModelSpec, nodes, phi, gamma0, rng=None, n_random: int = 10) -> float:
    """Max over the 4N grid points xi_a + k eta (k = -1..2) and random points.

    Each point is normalized by the sum of the absolute values of the four
    terms.  At the points xi_a - eta every coefficient vanishes, so the
    normalization is floored at 1e-8 of the largest sum seen.
    """
    fspec = float_spec(spec)
    rng = rng or np.random.default_rng(4242)
    pts = [x + k * fspec.eta for x in fspec.xi for k in (-1, 0, 1, 2)]
    pts += [generic_point(rng, fspec) for _ in range(n_random)]
    rows = [curve_terms(fspec, nodes, phi, gamma0, p) for p in pts]
    sums = [sum(abs(t) for t in r) for r in rows]
    floor = 1e-8 * max(sums)
    return max(abs(sum(r)) / max(s, floor) for r, s in zip(rows, sums))


def spectral_curve_gl3(spec: ModelSpec, nodes, gamma0=None, tol: float = 1e-9,
                       margin: float = 1e-6, rng=None) -> PhiPoly:
    """Smallest-degree monic phi with gamma(xi_a) phi(xi_a - eta) = t1(xi_a) phi(xi_a)."""
    fspec = float_spec(spec)
    if gamma0 is None:
        gamma0 = jordan_frame(to_float(fspec.K))[1][0][0]
    gamma0 = complex(gamma0)
    eta = fspec.eta
    for M in range(fspec.N + 1):
        P = np.array([gamma_fn(fspec, gamma0, x) * (x - eta) ** np.arange(M + 1) for x in fspec.xi])
        Q = np.array([complex(nodes[a]) * x ** np.arange(M + 1) for a, x in enumerate(fspec.xi)])
        A = P - Q
        c = np.linalg.lstsq(A[:, :M], -A[:, M], rcond=None)[0] if M else np.zeros(0, dtype=complex)
        full = np.concatenate([c, [1.0]])
        scale = np.abs(P) @ np.abs(full) + np.abs(Q) @ np.abs(full)
        res = float(np.max(np.abs(A @ full) / np.where(scale > 0, scale, 1.0)))
        if res > tol:
            continue
        roots = tuple(np.roots(full[::-1])) if M else ()
        marg = min((abs(r - x) for r in roots for x in fspec.xi), default=np.inf)
        if marg < margin:
            continue
        phi = PhiPoly(M, tuple(complex(v) for v in full), roots, gamma0, res, 0.0, float(marg))
        return replace(phi, curve_residual=curve_residual(fspec, nodes, phi, gamma0, rng))
    raise NoAdmissibleQ("no degree admits a phi polynomial within tolerance")


def curve_residual_for_gamma(spec: ModelSpec, nodes, phi: PhiPoly, gamma0, rng=None) -> float:
    """Curve residual with phi held fixed and gamma0 replaced (negative control)."""
    return curve_residual(float_spec(spec), nodes, phi, complex(gamma0), rng)


def phi_rewriting_residual(spec: ModelSpec, nodes, phi: PhiPoly) -> float:
    """prod phi^2(xi) prod t1^h(xi) against prod gamma^h(xi) phi^h(xi - eta) phi^{2-h}(xi), all h."""
    fspec = float_spec(spec)
    eta = fspec.eta
    from .charge_algebra import mixed_radix
    common = np.prod([phi(x) ** 2 for x in fspec.xi])
    worst = 0.0
    for h in mixed_radix([3] * fspec.N):
        lhs = common * np.prod([complex(nodes[a]) ** hh for a, hh in enumerate(h)])
        rhs = np.prod([gamma_fn(fspec, phi.gamma0, x) ** hh * phi(x - eta) ** hh * phi(x) ** (2 - hh)
                       for x, hh in zip(fspec.xi, h)])
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# reference state and ABA form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReferenceState:
    vector: np.ndarray
    k0: complex
    k_rest: complex
    nodes: tuple
    residual_T1: float
    residual_T2: float


def reference_state(spec: ModelSpec, family=None, rng=None) -> ReferenceState:
    """Gamma_W (x)(1,0,0) with W from the Jordan frame of K (k0 = largest-modulus eigenvalue)."""
    fspec = float_spec(spec)
    fam = family or TransferFamily(fspec)
    W, blocks = jordan_frame(spec.K)
    W = to_float(W) if W.dtype == object else W
    k0 = complex(blocks[0][0])
    if k0 == 0:
        raise ValueError("k0 = 0: no reference state")
    w0 = W[:, 0]
    vec = reduce(kron, [w0] * fspec.N)
    k_rest = complex(trace_K(fspec)) - k0
    eta = fspec.eta

    def t10(lam):
        return k0 * d_fn(fspec, lam + eta) + k_rest * d_fn(fspec, lam)

    rng = rng or np.random.default_rng(99)
    r1 = r2 = 0.0
    for _ in range(3):
        lam = generic_point(rng, fspec)
        r1 = max(r1, eigen_residual(fam.T1(lam), vec, t10(lam)))
    nodes = tuple(complex(t10(x)) for x in fspec.xi)
    t2 = t2_from_t1_nodes(fspec, nodes)
    for _ in range(3):
        lam = generic_point(rng, fspec)
        r2 = max(r2, eigen_residual(fam.T2_direct(lam), vec, complex(t2(lam))))
    return ReferenceState(vec, k0, k_rest, nodes, r1, r2)


def b_eigenvalue_gl3(spec: ModelSpec, h, lam) -> complex:
    out = 1.0 + 0j
    for x, hh in zip(spec.xi, h):
        out *= (lam - x) ** (2 - hh) * (lam - x + spec.eta) ** hh
    return out


def aba_state_gl3(spec: ModelSpec, basis: SovBasis, phi: PhiPoly, ref: ReferenceState) -> np.ndarray:
    """prod_a BB(lam_a)|t0> with BB diagonal in the SoV basis."""
    return aba_state(float_spec(spec), basis, phi.roots, b_eigenvalue_gl3, ref.vector)
