"""gl_2 spectrum: oracle, quadratic system, factorized eigenvectors, sum rule, Baxter Q, ABA."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .monodromy import (TransferFamily, a_fn, d_fn, det_K, qdet2, sz_operator,
                        trace_K, trig_asymptotic_value)
from .numeric import InterpPoly, NonConvergence, eigen_decompose, solve_refined, to_float
from .sov_basis import SovBasis
from .yang_baxter import ModelSpec


class DegenerateFamily(RuntimeError):
    def __init__(self, msg, params=None):
        super().__init__(msg)
        self.params = params


class RejectedCandidate(ValueError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class SectorAmbiguity(ValueError):
    pass


class NoAdmissibleQ(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectrumRecord:
    index: int
    t_nodes: tuple
    t_asym: object = None
    sector: int | None = None           # trig: S_z eigenvalue of the oracle eigenvector
    right: np.ndarray | None = None
    left: np.ndarray | None = None
    pairing: complex | None = None
    system_residual: float | None = None
    wave_residual: float | None = None
    q_roots: tuple | None = None
    extra: dict = field(default_factory=dict)


def float_spec(spec: ModelSpec) -> ModelSpec:
    return spec.to_float()


def generic_point(rng: np.random.Generator, spec: ModelSpec) -> complex:
    z = complex(rng.normal(), rng.normal())
    if spec.algebra == "trig":
        return 0.3 * z
    return z


def expectation(l, X, r) -> complex:
    return complex(l @ X @ r / (l @ r))


def sector_of(spec: ModelSpec, l, r) -> float | None:
    if spec.algebra != "trig":
        return None
    return expectation(l, sz_operator(spec.N), r).real


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def brute_force_spectrum(spec: ModelSpec, rng: np.random.Generator | None = None,
                         family: TransferFamily | None = None, retries: int = 5,
                         gap_tol: float = 1e-8) -> list[SpectrumRecord]:
    """Eigen-decompose T(lam0) at a generic lam0 and read node values from each eigenpair."""
    spec = float_spec(spec)
    fam = family or TransferFamily(spec)
    rng = rng or np.random.default_rng(0)
    for _ in range(retries + 1):
        lam0 = generic_point(rng, spec)
        try:
            ed = eigen_decompose(fam.T1(lam0), gap_tol)
        except NonConvergence:
            continue
        if not ed.degenerate:
            break
    else:
        raise DegenerateFamily("transfer matrix spectrum is degenerate at every probe point",
                               params=spec.describe())
    nodes_ops = [fam.T1(x) for x in spec.xi]
    out = []
    for i in range(len(ed.values)):
        l, r = ed.left[i], ed.right[:, i]
        nodes = tuple(expectation(l, X, r) for X in nodes_ops)
        sec = sector_of(spec, l, r)
        asym = None
        if spec.algebra == "rational":
            asym = trace_K(spec)
        elif spec.a == 0:
            li = int(round(sec))
            asym = (trig_asymptotic_value(spec, 1, li), trig_asymptotic_value(spec, -1, li))
        out.append(SpectrumRecord(i, nodes, asym, None if sec is None else int(round(sec)),
                                  r, l, complex(ed.pairings[i]),
                                  extra={"lam0": lam0, "sector_raw": sec}))
    return out


# ---------------------------------------------------------------------------
# interpolation and the quadratic system
# ---------------------------------------------------------------------------

def t_poly(spec: ModelSpec, nodes, l: int | None = None) -> InterpPoly:
    """t(lam) from its N node values plus asymptotic data."""
    if spec.algebra == "rational":
        return InterpPoly("rational", tuple(spec.xi), tuple(nodes), trace_K(spec))
    if spec.a == 1:
        return InterpPoly("trig", tuple(spec.xi), tuple(nodes), None)
    if l is None:
        l = sector_from_sum_rule(spec, nodes).sector
    asym = (trig_asymptotic_value(spec, 1, l), trig_asymptotic_value(spec, -1, l))
    return InterpPoly("trig", tuple(spec.xi), tuple(nodes), asym)


def quadratic_system_terms(spec: ModelSpec, nodes, l: int | None = None):
    tp = t_poly(spec, nodes, l)
    out = []
    for a, x in enumerate(spec.xi):
        out.append((nodes[a] * tp(x - spec.eta), qdet2(spec, x)))
    return out


def quadratic_system_residual(spec: ModelSpec, nodes, l: int | None = None) -> float:
    """max_a |t(xi_a) t(xi_a - eta) - qdet(xi_a)| / max(|lhs|, |qdet|)."""
    worst = 0.0
    for lhs, q in quadratic_system_terms(spec, nodes, l):
        lhs, q = complex(lhs), complex(q)
        scale = max(abs(lhs), abs(q))
        worst = max(worst, abs(lhs - q) / scale if scale else 0.0)
    return worst


def _shifted_linear_map(spec: ModelSpec, l):
    """t(xi_a - eta) = c_a + sum_n G[a, n] x_n (linear in the node values)."""
    N = spec.N
    pts = [x - spec.eta for x in spec.xi]
    zero = t_poly(spec, [0j] * N, l)
    c = np.array([complex(zero(p)) for p in pts])
    G = np.zeros((N, N), dtype=complex)
    for n in range(N):
        e = [0j] * N
        e[n] = 1.0
        tp = t_poly(spec, e, l)
        G[:, n] = [complex(tp(p)) - c[a] for a, p in enumerate(pts)]
    return c, G


def solve_quadratic_system(spec: ModelSpec, seed, l: int | None = None, tol: float = 1e-12,
                           max_iter: int = 50):
    """Newton iteration on x_a t_x(xi_a - eta) = qdet(xi_a).

    scipy's root finders are real-only, the system is complex-analytic, so
    the Jacobian is formed directly.  Returns (nodes, iterations).
    The map is quadratic, so J((x1 + x2)/2)(x1 - x2) = F(x1) - F(x2): the
    exact midpoint of two solutions always has a singular Jacobian.
    """
    spec = float_spec(spec)
    if spec.algebra == "trig" and spec.a == 0 and l is None:
        l = sector_from_sum_rule(spec, seed).sector
    c, G = _shifted_linear_map(spec, l)
    q = np.array([complex(qdet2(spec, x)) for x in spec.xi])
    x = np.array(seed, dtype=complex)
    for it in range(max_iter + 1):
        s = c + G @ x
        F = x * s - q
        if np.max(np.abs(F) / np.maximum(np.abs(x * s), np.abs(q))) <= tol:
            return tuple(x), it
        J = np.diag(s) + x[:, None] * G
        if np.linalg.cond(J) > 1e14:
            raise NonConvergence("singular Jacobian in quadratic-system Newton step")
        x = x - np.linalg.solve(J, F)
    raise NonConvergence(f"no convergence in {max_iter} Newton iterations")


# ---------------------------------------------------------------------------
# factorized eigenvectors
# ---------------------------------------------------------------------------

def wavefunction(basis: SovBasis, nodes) -> np.ndarray:
    ratios = [complex(x) / complex(nv) for x, nv in zip(nodes, basis.norms)]
    return np.array([np.prod([r ** h for r, h in zip(ratios, hh)]) for hh in basis.order])


def eigen_residual(X, v, value) -> float:
    return float(np.linalg.norm(X @ v - value * v) / (np.linalg.norm(X) * np.linalg.norm(v)))


def factorized_eigenvector(spec: ModelSpec, basis: SovBasis, nodes, l: int | None = None,
                           family: TransferFamily | None = None, rng=None, tol: float = 1e-8,
                           n_probe: int = 5):
    """Vector with <h|t> = prod (t(xi_a)/norm_a)^{h_a}; returns (vector, waveResidual)."""
    fspec = float_spec(spec)
    fam = family or TransferFamily(fspec)
    psi = wavefunction(basis, nodes)
    v = solve_refined(basis.float_rows(), psi)
    tp = t_poly(fspec, nodes, l)
    rng = rng or np.random.default_rng(12345)
    worst = 0.0
    for _ in range(n_probe):
        lam = generic_point(rng, fspec)
        worst = max(worst, eigen_residual(fam.T1(lam), v, complex(tp(lam))))
    if worst > tol:
        raise RejectedCandidate(f"wave residual {worst:.3e} above {tol:g}", worst)
    return v, worst


def angle(u, v) -> float:
    """Sine of the angle between two complex lines."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(v - (np.vdot(u, v)) * u))


# ---------------------------------------------------------------------------
# trig sector sum rule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorResult:
    sector: int | None
    sigma: complex
    mismatch: float | None
    runner_up: float | None
    table: tuple = ()


def sum_rule_sigma(spec: ModelSpec, nodes) -> complex:
    return InterpPoly("trig", tuple(spec.xi), tuple(nodes), None)._trig_sigma()


def sum_rule_rhs(spec: ModelSpec, l: int) -> complex:
    N = spec.N
    return complex(sum(e * np.exp(e * spec.eta * N / 2) * np.cosh(spec.eta * l / 2 + e * spec.alpha)
                       for e in (1, -1)))


def sector_from_sum_rule(spec: ModelSpec, nodes, win_tol: float = 1e-8,
                         gap_tol: float = 1e-3) -> SectorResult:
    """Sector l from sum_a t(xi_a)/prod sinh(xi_a - xi_b).

    For the antidiagonal twist there is no sector label; the sum is
    returned without a target value.
    """
    sig = sum_rule_sigma(spec, nodes)
    if spec.a == 1:
        return SectorResult(None, sig, None, None)
    N = spec.N
    rows = []
    for l in range(-N, N + 1, 2):
        rhs = sum_rule_rhs(spec, l)
        rows.append((abs(rhs - sig) / max(1.0, abs(sig)), l))
    rows.sort()
    (m0, l0), (m1, _) = rows[0], rows[1]
    if m1 < gap_tol and m0 <= win_tol:
        raise SectorAmbiguity(f"sectors {rows[0][1]} and {rows[1][1]} both fit the sum rule")
    return SectorResult(l0, sig, m0, m1, tuple(rows))


# ---------------------------------------------------------------------------
# Baxter Q
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaxterQ:
    M: int
    coeffs: tuple          # ascending, monic (rational: in lam; trig: in z = e^{2 lam})
    roots: tuple
    k0: complex
    lsq_residual: float
    tq_residual: float
    root_margin: float
    kind: str
    sigma_min: float = np.inf     # smallest relative singular value of the degree-M system

    @property
    def unique(self) -> bool:
        return self.sigma_min > 1e-10

    def __call__(self, lam):
        lam = complex(lam)
        if self.kind == "rational":
            return complex(np.polyval(self.coeffs[::-1], lam))
        return complex(np.exp(-self.M * lam) * np.polyval(self.coeffs[::-1], np.exp(2 * lam)))


def twist_eigenvalues(spec: ModelSpec):
    w = np.linalg.eigvals(to_float(spec.K))
    return sorted(w, key=lambda z: (-abs(z), z.real, z.imag))


def _q_basis(kind, M, lam):
    if kind == "rational":
        return np.array([complex(lam) ** k for k in range(M + 1)])
    z = np.exp(2 * complex(lam))
    return np.exp(-M * complex(lam)) * np.array([z ** k for k in range(M + 1)])


def tq_residual(spec: ModelSpec, tp, Q, k0, rng, n: int = 20) -> float:
    fspec = float_spec(spec)
    k1 = complex(det_K(fspec)) / k0
    eta = fspec.eta
    worst = 0.0
    for _ in range(n):
        lam = generic_point(rng, fspec)
        terms = [k0 * a_fn(fspec, lam) * Q(lam - eta), -complex(tp(lam)) * Q(lam),
                 k1 * d_fn(fspec, lam) * Q(lam + eta)]
        worst = max(worst, abs(sum(terms)) / sum(abs(t) for t in terms))
    return worst


def baxter_q(spec: ModelSpec, nodes, l: int | None = None, k0=None, tol: float = 1e-9,
             margin: float = 1e-6, rng=None, max_degree: int | None = None) -> BaxterQ:
    """Smallest-degree monic Q with k0 a(xi) Q(xi - eta) = t(xi) Q(xi) at every node."""
    fspec = float_spec(spec)
    kind = "rational" if fspec.algebra == "rational" else "trig"
    if kind == "trig" and fspec.a != 0:
        raise ValueError("trig Baxter Q is implemented for the diagonal twist")
    if k0 is None:
        k0 = np.exp(fspec.alpha) if kind == "trig" else twist_eigenvalues(fspec)[0]
    k0 = complex(k0)
    tp = t_poly(fspec, nodes, l)
    eta = fspec.eta
    rng = rng or np.random.default_rng(777)
    N = fspec.N
    for M in range(0, (max_degree if max_degree is not None else N) + 1):
        P = np.array([k0 * a_fn(fspec, x) * _q_basis(kind, M, x - eta) for x in fspec.xi])
        Qm = np.array([complex(nodes[a]) * _q_basis(kind, M, x) for a, x in enumerate(fspec.xi)])
        A = P - Qm
        if M == 0:
            c = np.zeros(0, dtype=complex)
            smin = np.inf
        else:
            c, *_ = np.linalg.lstsq(A[:, :M], -A[:, M], rcond=None)
            smin = float(np.linalg.svd(A[:, :M], compute_uv=False)[-1] / np.linalg.norm(A))
        full = np.concatenate([c, [1.0]])
        scale = np.abs(P) @ np.abs(full) + np.abs(Qm) @ np.abs(full)
        res = float(np.max(np.abs(A @ full) / np.where(scale > 0, scale, 1.0)))
        if res > tol:
            continue
        coeffs = tuple(complex(v) for v in c) + (1.0 + 0j,)
        roots = tuple(np.roots(coeffs[::-1])) if M else ()
        if kind == "trig":
            roots = tuple(0.5 * np.log(r) for r in roots)
        if kind == "rational":
            marg = min((abs(r - x) for r in roots for x in fspec.xi), default=np.inf)
        else:
            marg = min((abs(np.sinh(r - x)) for r in roots for x in fspec.xi), default=np.inf)
        if marg < margin:
            continue
        probe = BaxterQ(M, coeffs, roots, k0, res, 0.0, float(marg), kind, smin)
        tqr = tq_residual(fspec, tp, probe, k0, rng)
        return replace(probe, tq_residual=tqr)
    raise NoAdmissibleQ("no degree admits a Q polynomial within tolerance")


# ---------------------------------------------------------------------------
# ABA representation for the diagonal six-vertex twist
# ---------------------------------------------------------------------------

def b_eigenvalue_gl2(spec: ModelSpec, h, lam) -> complex:
    out = 1.0 + 0j
    for x, hh in zip(spec.xi, h):
        arg = complex(lam - x + hh * spec.eta)
        out *= np.sinh(arg) if spec.algebra == "trig" else arg
    return out


def reference_vector(spec: ModelSpec) -> np.ndarray:
    v = np.zeros(spec.dim, dtype=complex)
    v[0] = 1.0
    return v


def aba_state(spec: ModelSpec, basis: SovBasis, roots, b_eigenvalue=b_eigenvalue_gl2,
              ref: np.ndarray | None = None, sign: complex = 1.0) -> np.ndarray:
    """sign * prod_m BB(lam_m)|ref>, with BB diagonal in the SoV basis."""
    Phi = basis.float_rows()
    ref = reference_vector(spec) if ref is None else ref
    psi = Phi @ ref
    for lam in roots:
        psi = psi * np.array([b_eigenvalue(spec, h, lam) for h in basis.order])
    return sign * solve_refined(Phi, psi)


def aba_state_trig(spec: ModelSpec, basis: SovBasis, q: BaxterQ) -> np.ndarray:
    """(-1)^{N M} prod_m BB(lam_m)|0> for the diagonal twist; BB(lam) has eigenvalue prod sinh(lam - xi^{(h)})."""
    if spec.algebra != "trig" or spec.a != 0:
        raise ValueError("ABA form is stated for the diagonal six-vertex twist")
    # eigenvalue on <h| is prod sinh(lam - xi_n + h_n eta)
    return aba_state(spec, basis, q.roots, sign=(-1) ** (spec.N * q.M))
