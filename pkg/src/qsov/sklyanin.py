"""Comparison with Sklyanin's separated variables.

gl_2: the transfer-built basis with <S| = (x)(1,0) against the basis built
from A^(K)(xi_a).  gl_3: Sklyanin's B and A operators, their spectrum, the
identification with the diagonal operator of the SoV basis, and the shift
success / failure witnesses.

The gl_3 operators are assembled from the monodromy with the twist on the
right, R_aN ... R_a1 K_a, and the matching fused U.  With that placement the
eigen-covector labels and the <L1| closed forms line up; with the twist on
the left one gets the Gamma_K-conjugate family with the labels shifted.
The shift operator pairs B3 with the fused entry C3 (see SklyaninOps.script_A).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .charge_algebra import mixed_radix
from .monodromy import TransferFamily, a_fn, entry, fused_U, monodromy, qdet3
from .numeric import is_exact, kron, rel_residual, to_exact, to_float
from .sov_basis import build_basis
from .spectrum_gl2 import angle
from .yang_baxter import ModelSpec

TWIST = "right"


class SingularAt(ValueError):
    def __init__(self, lam, cond):
        super().__init__(f"B3 is singular at lambda={lam} (cond {cond:.2e})")
        self.lam = lam
        self.cond = cond


class UnstableLimit(RuntimeError):
    pass


def _tensor(vs):
    return reduce(kron, vs)


def _max_entry_dev(X, Y) -> float:
    if is_exact(X) and is_exact(Y):
        return 0.0 if np.all(X == Y) else float(np.max(np.abs(to_float(X - Y))))
    X, Y = np.asarray(to_float(X) if is_exact(X) else X), np.asarray(to_float(Y) if is_exact(Y) else Y)
    return float(np.max(np.abs(X - Y)) / max(np.max(np.abs(X)), np.max(np.abs(Y)), 1e-300))


# ---------------------------------------------------------------------------
# gl_2
# ---------------------------------------------------------------------------

def up_covector(spec: ModelSpec) -> np.ndarray:
    e = to_exact([1, 0]) if spec.exact else np.array([1, 0], dtype=complex)
    return _tensor([e] * spec.N)


def a_built_basis(spec: ModelSpec, S, norms) -> np.ndarray:
    """Rows <S| prod_a (A^(K)(xi_a)/norm_a)^{h_a}, h_1 fastest."""
    A = [entry(monodromy(spec, x), 2, 0, 0) for x in spec.xi]
    rows = []
    for h in mixed_radix([2] * spec.N):
        r = S
        for a, hh in enumerate(h):
            if hh:
                r = r @ A[a] / norms[a]
        rows.append(r)
    return np.array(rows, dtype=object if spec.exact else complex)


def _gl2_B_eigen_residual(spec: ModelSpec, rows, coef, rng, n: int = 5) -> float:
    worst = 0.0
    fspec = spec.to_float()
    R = to_float(rows) if is_exact(rows) else rows
    for _ in range(n):
        lam = complex(rng.normal(), rng.normal()) * (0.3 if spec.algebra == "trig" else 1.0)
        B = entry(monodromy(fspec, lam), 2, 0, 1)
        for h, r in zip(mixed_radix([2] * spec.N), R):
            val = complex(coef)
            for x, hh in zip(fspec.xi, h):
                z = lam - x + hh * fspec.eta
                val *= np.sinh(z) if spec.algebra == "trig" else z
            lhs = r @ B
            worst = max(worst, float(np.linalg.norm(lhs - val * r) /
                                     (np.linalg.norm(lhs) + abs(val) * np.linalg.norm(r))))
    return worst


@dataclass(frozen=True)
class Gl2SklyaninResult:
    path: str
    deviation: float
    b_eigen_residual: float
    raw_deviation: float | None = None
    detail: dict = field(default_factory=dict)


def _conjugator(K, exact):
    cands = [[[1, 1], [0, 1]], [[1, 0], [1, 1]], [[1, 2], [1, 3]], [[2, 1], [1, 1]]]
    for W in cands:
        W = to_exact(W) if exact else np.array(W, dtype=complex)
        Wi = np.array([[W[1, 1], -W[0, 1]], [-W[1, 0], W[0, 0]]], dtype=W.dtype) / (W[0, 0] * W[1, 1] - W[0, 1] * W[1, 0])
        Kb = Wi @ K @ W
        if Kb[0, 1] != 0 and (exact or abs(Kb[0, 1]) > 1e-8):
            return W, Wi, Kb
    raise ValueError("no conjugator with nonzero upper-right entry")


def gl2_basis_equals_sklyanin(spec: ModelSpec, rng=None) -> Gl2SklyaninResult:
    """Max entrywise deviation between the T-built and A-built covector bases."""
    rng = rng or np.random.default_rng(11)
    if spec.n != 2:
        raise ValueError("gl_2 comparison")
    S0 = up_covector(spec)
    if spec.algebra == "trig":
        if spec.a != 1:
            raise ValueError("the six-vertex comparison is for the antidiagonal twist")
        ours = build_basis(spec, S0).rows
        norms = [a_fn(spec, x) for x in spec.xi]
        theirs_i = a_built_basis(spec, S0, [1j * v for v in norms])
        theirs = a_built_basis(spec, S0, norms)
        phase = np.array([1j ** sum(h) for h in mixed_radix([2] * spec.N)])
        dev = _max_entry_dev(ours, theirs)
        raw = _max_entry_dev(ours, theirs_i)
        corrected = _max_entry_dev(ours, theirs_i * phase[:, None])
        res = _gl2_B_eigen_residual(spec, ours, spec.K[0, 1], rng)
        return Gl2SklyaninResult("trig-a1", dev, res, raw, {"i_corrected": corrected})
    K = spec.K
    b = K[0, 1]
    if b != 0 and (spec.exact or abs(b) > 1e-12):
        ours = build_basis(spec, S0)
        theirs = a_built_basis(spec, S0, ours.norms)
        res = _gl2_B_eigen_residual(spec, ours.rows, b, rng)
        return Gl2SklyaninResult("b!=0", _max_entry_dev(ours.rows, theirs), res)
    W, Wi, Kb = _conjugator(K, spec.exact)
    specb = spec.with_K(Kb)
    Wg = _tensor([W] * spec.N)
    Wgi = _tensor([Wi] * spec.N)
    ours = build_basis(spec, S0 @ Wgi)
    theirs = a_built_basis(specb, S0, ours.norms) @ Wgi
    res = _gl2_B_eigen_residual(specb, a_built_basis(specb, S0, ours.norms), Kb[0, 1], rng)
    return Gl2SklyaninResult("b=0 conjugated", _max_entry_dev(ours.rows, theirs), res,
                             detail={"Kbar": Kb})


# ---------------------------------------------------------------------------
# gl_3 operators
# ---------------------------------------------------------------------------

def kappa(K):
    k = [K[i, j] for i in range(3) for j in range(3)]
    k1, k2, k3, k4, k5, k6, k7, k8, k9 = k
    return k1 * k3 * k6 - k3 * k5 * k6 - k3 * k3 * k4 + k2 * k6 * k6


def b0(spec: ModelSpec, lam):
    out = 1
    for x in spec.xi:
        out = out * (lam - x - spec.eta)
    return out


def b_sklyanin_eigenvalue(spec: ModelSpec, h, lam):
    """prod (lam - xi)^{2-h} (lam - xi + eta)^h: eigenvalue of BB on <h|."""
    out = 1
    for x, hh in zip(spec.xi, h):
        out = out * (lam - x) ** (2 - hh) * (lam - x + spec.eta) ** hh
    return out


class SklyaninOps:
    """Entries of the right-twisted monodromy and fused U with per-point caches."""

    def __init__(self, spec: ModelSpec, twist: str = TWIST, cond_max: float = 1e12):
        if spec.n != 3:
            raise ValueError("Sklyanin gl_3 operators need n=3")
        self.spec = spec
        self.twist = twist
        self.cond_max = cond_max
        self._M: dict = {}
        self._U: dict = {}

    def _key(self, lam):
        return lam if self.spec.exact else complex(lam)

    def M(self, lam):
        k = self._key(lam)
        if k not in self._M:
            self._M[k] = monodromy(self.spec, lam, self.twist)
        return self._M[k]

    def U(self, lam):
        k = self._key(lam)
        if k not in self._U:
            self._U[k] = fused_U(self.spec, lam, self.twist)
        return self._U[k]

    # layout [[A1, B1, B2], [C1, A2, B3], [C2, C3, A3]]
    def B2(self, lam):
        return entry(self.M(lam), 3, 0, 2)

    def B3(self, lam):
        return entry(self.M(lam), 3, 1, 2)

    def C1(self, lam):
        return entry(self.M(lam), 3, 1, 0)

    def UB1(self, lam):
        return entry(self.U(lam), 3, 0, 1)

    def UC2(self, lam):
        return entry(self.U(lam), 3, 2, 0)

    def UC3(self, lam):
        return entry(self.U(lam), 3, 2, 1)

    def script_B(self, lam):
        eta = self.spec.eta
        return self.B3(lam) @ self.UC2(lam - eta) - self.B2(lam) @ self.UC3(lam - eta)

    def _check(self, X, lam):
        if is_exact(X):
            return
        c = np.linalg.cond(X)
        if c > self.cond_max:
            raise SingularAt(lam, c)

    def script_A(self, lam):
        """-B3(lam - eta)^{-1} C3(lam - eta).

        The fused entry paired with B3 is C3: on the zeros of BB one has
        B3 C2 = B2 C3, so C3/B3 (equivalently C2/B2) is the consistent ratio.
        With C2 in place of C3 neither closure identity holds beyond N = 1.
        """
        eta = self.spec.eta
        B = self.B3(lam - eta)
        self._check(B, lam - eta)
        return -np.linalg.solve(to_float(B) if is_exact(B) else B, self.UC3(lam - eta))

    def script_D(self, lam):
        """A(lam)^{-1} = -C3(lam - eta)^{-1} B3(lam - eta)."""
        eta = self.spec.eta
        C = self.UC3(lam - eta)
        self._check(C, lam - eta)
        return -np.linalg.solve(C, self.B3(lam - eta))

    def Xi1(self, lam, mu):
        eta = self.spec.eta
        P = self.B3(lam) @ self.B3(lam - eta)
        self._check(P, lam)
        return eta * self.script_A(mu) @ np.linalg.solve(P, self.B3(mu - eta) @ self.B3(mu))

    def Xi2(self, lam):
        eta = self.spec.eta
        P = self.B3(lam) @ self.B3(lam - eta) @ self.B3(lam - 2 * eta)
        self._check(P, lam)
        rhs = self.C1(lam - 2 * eta) @ self.UC3(lam - 2 * eta) - self.B3(lam - 2 * eta) @ self.UB1(lam - 2 * eta)
        return np.linalg.solve(P, rhs)


def build_sklyanin_B3(spec: ModelSpec, lam) -> np.ndarray:
    """Sklyanin's separated-variable operator (named B3 in the harness)."""
    return SklyaninOps(spec).script_B(lam)


def build_sklyanin_A3(spec: ModelSpec, lam) -> np.ndarray:
    return SklyaninOps(spec.to_float()).script_A(lam)


# ---------------------------------------------------------------------------
# basis fixed by <L1|
# ---------------------------------------------------------------------------

def L1_local(K):
    return np.array([-K[1, 2], K[0, 2], 0 * K[0, 0]], dtype=K.dtype)


def fixed_basis_rows(spec: ModelSpec, L1, family: TransferFamily | None = None) -> np.ndarray:
    """<h| = <L1| prod_n T2(xi_n - 2 eta)^{delta_{h_n,0}} T1(xi_n)^{delta_{h_n,2}}."""
    fam = family or TransferFamily(spec)
    eta = spec.eta
    rows = []
    for h in mixed_radix([3] * spec.N):
        r = L1
        for x, hh in zip(spec.xi, h):
            if hh == 0:
                r = r @ fam.T2_direct(x - 2 * eta)
            elif hh == 2:
                r = r @ fam.T1(x)
        rows.append(r)
    return np.array(rows, dtype=object if spec.exact else complex)


def covector_constants(spec: ModelSpec):
    """Scalars n0, n2 with <0...0| = n0 <L1| (x) adj K and <2...2| = n2 <L1| (x) K.

    n0 = 2^N eta^{2N} prod_{a != b} (xi_ab - eta)(xi_ab - 2 eta) and
    n2 = eta^N prod_{a != b} (xi_ab + eta), xi_ab = xi_a - xi_b.  At N = 1
    these reduce to 2 eta^2 and eta.
    """
    eta, xi, N = spec.eta, spec.xi, spec.N
    n0, n2 = 2 ** N * eta ** (2 * N), eta ** N
    for a in range(N):
        for b in range(N):
            if a != b:
                d = xi[a] - xi[b]
                n0 = n0 * (d - eta) * (d - 2 * eta)
                n2 = n2 * (d + eta)
    return n0, n2


def adjugate3(K):
    out = np.empty((3, 3), dtype=K.dtype)
    for i in range(3):
        for j in range(3):
            m = np.delete(np.delete(K, j, axis=0), i, axis=1)
            out[i, j] = (-1) ** (i + j) * (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return out


@dataclass(frozen=True)
class SklyaninReport:
    kappa: object
    path: str
    eigen_residual: float                 # max over HIndex and lambda
    identification_residual: float
    covector0: dict
    covector2: dict
    vector0: float
    vector2: float
    commutator: float
    simple_spectrum: bool
    per_h: dict = field(default_factory=dict)


def _eig_row_residual(r, X, val) -> float:
    lhs = r @ X
    return float(np.linalg.norm(lhs - val * r) / (np.linalg.norm(lhs) + abs(val) * np.linalg.norm(r)))


def _eig_col_residual(X, v, val) -> float:
    lhs = X @ v
    return float(np.linalg.norm(lhs - val * v) / (np.linalg.norm(lhs) + abs(val) * np.linalg.norm(v)))


def _similar_with_kappa(K, rng, exact):
    for _ in range(200):
        G = rng.integers(-3, 4, size=(3, 3))
        if round(np.linalg.det(G)) == 0:
            continue
        if exact:
            from .sov_basis import _exact_inv
            G = to_exact(G)
            Gi = _exact_inv(G)
        else:
            G = G.astype(complex)
            Gi = np.linalg.inv(G)
        Kh = Gi @ K @ G
        kap = kappa(Kh)
        if (kap != 0) if exact else abs(kap) > 1e-3 * max(1.0, np.max(np.abs(K))) ** 3:
            return G, Gi, Kh
    raise ValueError("no similar twist with nonzero kappa found")


def verify_sklyanin_B_spectrum(spec: ModelSpec, lams=None, rng=None) -> SklyaninReport:
    """Eigenvalue formula, closed-form extreme (co)vectors and the BB identification."""
    rng = rng or np.random.default_rng(2024)
    fspec = spec.to_float()
    K = fspec.K
    kap = kappa(spec.K)
    path = "direct"
    G = Gi = None
    if (kap == 0) if spec.exact else abs(kap) < 1e-12:
        path = "similar"
        G, Gi, Kh = _similar_with_kappa(spec.K, rng, spec.exact)
        hspec = spec.with_K(Kh).to_float()
        G, Gi = to_float(G) if is_exact(G) else G, to_float(Gi) if is_exact(Gi) else Gi
    else:
        hspec = fspec
    Kh = hspec.K
    kh = complex(kappa(Kh))
    ops = SklyaninOps(hspec)
    fam = TransferFamily(fspec)
    L1 = _tensor([L1_local(Kh)] * fspec.N)
    if path == "similar":
        L1 = L1 @ _tensor([Gi] * fspec.N)
    rows = fixed_basis_rows(fspec, L1, fam)
    order = list(mixed_radix([3] * fspec.N))
    lams = lams or [complex(rng.normal(), rng.normal()) for _ in range(5)]
    eta = fspec.eta

    def script_B_for_K(lam):
        Bh = ops.script_B(lam)
        if path == "similar":
            Gg, Ggi = _tensor([G] * fspec.N), _tensor([Gi] * fspec.N)
            return Gg @ Bh @ Ggi
        return Bh

    eig_res, ident = 0.0, 0.0
    per_h = {}
    comm = 0.0
    prev = None
    for lam in lams:
        B = script_B_for_K(lam)
        if prev is not None:
            comm = max(comm, float(rel_residual(B @ prev, prev @ B)))
        prev = B
        scale = kh * complex(b0(fspec, lam))
        for h, r in zip(order, rows):
            val = scale * complex(b_sklyanin_eigenvalue(fspec, h, lam))
            e = _eig_row_residual(r, B, val)
            per_h[h] = max(per_h.get(h, 0.0), e)
            eig_res = max(eig_res, e)
        D = np.diag([complex(b_sklyanin_eigenvalue(fspec, h, lam)) for h in order])
        BB = np.linalg.solve(rows, D @ rows)
        ident = max(ident, _max_entry_dev(BB, B / scale))
    # closed forms in the frame where kappa != 0
    N = fspec.N
    k = [Kh[i, j] for i in range(3) for j in range(3)]
    k1, k2, k3, k4, k5, k6, k7, k8, k9 = k
    row0 = np.array([k6 * (k3 * k7 + k6 * k8) - k9 * (k3 * k4 + k5 * k6),
                     k9 * (k1 * k3 + k2 * k6) - k3 * (k3 * k7 + k6 * k8), -kh])
    row2 = np.array([k1 * k6 - k3 * k4, k2 * k6 - k3 * k5, 0])
    hrows = fixed_basis_rows(hspec, _tensor([L1_local(Kh)] * N), TransferFamily(hspec))
    r0, r1, r2 = hrows[0], hrows[order.index((1,) * N)], hrows[-1]
    c0 = 2 * eta ** (2 * N) * _tensor([row0] * N)
    c0_adj = 2 * eta ** (2 * N) * r1 @ _tensor([adjugate3(Kh)] * N)
    c2 = eta ** N * _tensor([row2] * N)
    c2_K = eta * r1 @ _tensor([Kh] * N)
    n0, n2 = covector_constants(hspec)
    cov0 = {"stated": _max_entry_dev(r0, c0), "stated_adjugate": _max_entry_dev(r0, c0_adj),
            "scaled": _max_entry_dev(r0, n0 * r1 @ _tensor([adjugate3(Kh)] * N)),
            "direction": angle(r0, c0)}
    cov2 = {"stated": _max_entry_dev(r2, c2), "stated_K": _max_entry_dev(r2, c2_K),
            "scaled": _max_entry_dev(r2, n2 * r1 @ _tensor([Kh] * N)),
            "direction": angle(r2, c2)}
    v0 = _tensor([np.array([0, 0, 1], dtype=complex)] * N)
    v2 = eta ** N * _tensor([Kh[:, 2]] * N)
    vec0 = vec2 = 0.0
    for lam in lams:
        Bh = ops.script_B(lam)
        scale = kh * complex(b0(hspec, lam))
        vec0 = max(vec0, _eig_col_residual(Bh, v0, scale * complex(b_sklyanin_eigenvalue(hspec, (0,) * N, lam))))
        vec2 = max(vec2, _eig_col_residual(Bh, v2, scale * complex(b_sklyanin_eigenvalue(hspec, (2,) * N, lam))))
    # simple spectrum: distinct eigenvalue polynomials on the 3^N labels
    probe = complex(rng.normal(), rng.normal())
    vals = [complex(b_sklyanin_eigenvalue(fspec, h, probe)) for h in order]
    simple = min(abs(a - b) for a, b in itertools.combinations(vals, 2)) > 1e-10 * max(abs(v) for v in vals)
    return SklyaninReport(kap, path, eig_res, ident, cov0, cov2, vec0, vec2, comm, simple, per_h)


# ---------------------------------------------------------------------------
# shift witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftRecord:
    kind: str        # "A: 0->1", "D: 2->1", "A: 1->2", "D: 1->0"
    h: tuple
    site: int
    point: str
    angle: float
    ratio: complex | None = None
    behaviour: str = "finite"


def _limit(f, base, eps=(1e-4, 1e-5)):
    """Leading behaviour of f(base + e) as e -> 0.

    Returns (vector, kind) with kind "finite", "pole" (residue direction
    e f) or "zero" (first-order direction f / e).  Richardson extrapolation
    removes the linear term.
    """
    e1, e2 = eps
    v1, v2 = f(base + e1), f(base + e2)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    kind = "finite"
    if n2 > 5 * n1:
        v1, v2, kind = e1 * v1, e2 * v2, "pole"
    elif n2 < 0.2 * n1:
        v1, v2, kind = v1 / e1, v2 / e2, "zero"
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if not (0.1 < n2 / n1 < 10):
        raise UnstableLimit("two epsilon scales disagree by more than 10x")
    return (e1 * v2 - e2 * v1) / (e1 - e2), kind


def shift_witness(spec: ModelSpec, site: int, rng=None) -> list[ShiftRecord]:
    """Success (0->1 via A, 2->1 via D) and failure (1->2 via A, 1->0 via D) at every label."""
    fspec = spec.to_float()
    if abs(kappa(fspec.K)) < 1e-12:
        raise ValueError("shift witnesses need kappa != 0")
    ops = SklyaninOps(fspec)
    N = fspec.N
    rows = fixed_basis_rows(fspec, _tensor([L1_local(fspec.K)] * N))
    order = list(mixed_radix([3] * N))
    idx = {h: i for i, h in enumerate(order)}
    n = site - 1
    xi, eta = fspec.xi[n], fspec.eta
    out = []
    others = [h for h in order if h[n] == 0]
    for base in others:
        def lab(v):
            return tuple(v if j == n else base[j] for j in range(N))
        r0, r1, r2 = rows[idx[lab(0)]], rows[idx[lab(1)]], rows[idx[lab(2)]]
        lim, kind = _limit(lambda lam: r0 @ ops.script_A(lam), xi)
        ratio = complex(np.vdot(r1, lim) / np.vdot(r1, r1))
        out.append(ShiftRecord("A: 0->1", lab(0), site, "xi", angle(lim, r1), ratio, kind))
        lim, kind = _limit(lambda lam: r2 @ ops.script_D(lam), xi)
        ratio = complex(np.vdot(r1, lim) / np.vdot(r1, r1))
        out.append(ShiftRecord("D: 2->1", lab(2), site, "xi", angle(lim, r1), ratio, kind))
        for name, pt in (("xi", xi), ("xi+eta", xi + eta), ("xi-eta", xi - eta)):
            lim, kind = _limit(lambda lam: r1 @ ops.script_A(lam), pt)
            out.append(ShiftRecord("A: 1->2", lab(1), site, name, angle(lim, r2), None, kind))
            lim, kind = _limit(lambda lam: r1 @ ops.script_D(lam), pt)
            out.append(ShiftRecord("D: 1->0", lab(1), site, name, angle(lim, r0), None, kind))
    return out


# ---------------------------------------------------------------------------
# closure identities
# ---------------------------------------------------------------------------

def sklyanin_closure_residuals(spec: ModelSpec, lam, mu) -> tuple[float, float]:
    """Relative residuals of the shift identity and the spectral-curve identity."""
    fspec = spec.to_float()
    ops = SklyaninOps(fspec)
    fam = TransferFamily(fspec)
    eta = fspec.eta
    A_l, B_mu = ops.script_A(lam), ops.script_B(mu)
    lhs = (lam - mu) * A_l @ B_mu
    rhs = (lam - mu - eta) * B_mu @ A_l + ops.script_B(lam) @ ops.Xi1(lam, mu)
    shift = float(rel_residual(lhs, rhs))
    A0, A1, A2 = ops.script_A(lam), ops.script_A(lam - eta), ops.script_A(lam - 2 * eta)
    I = np.eye(fspec.dim)
    curve_l = (A0 @ A1 @ A2 - A0 @ A1 @ fam.T1(lam - 2 * eta) + A0 @ fam.T2_direct(lam - 2 * eta)
               - complex(qdet3(fspec, lam - 2 * eta)) * I)
    curve_r = ops.script_B(lam) @ ops.Xi2(lam)
    return shift, float(rel_residual(curve_l, curve_r))


@dataclass(frozen=True)
class TruncatedWitness:
    entries: dict          # (site, point, h) -> relative residual
    regular_max: float     # h_n = 0 at xi_n: the truncated equation does close there
    singular_min: float    # every other zero of the eigenvalue: it does not


def truncated_closure_witness(spec: ModelSpec, mu=None, eps: float = 1e-6) -> TruncatedWitness:
    """Shift identity with the Xi term dropped, on <h| next to zeros of its BB eigenvalue.

    If Xi_1 were finite there, <h|BB(lam) Xi_1 would vanish with the
    eigenvalue and the truncated identity would hold on <h|.  It does for
    h_n = 0 at xi_n (residual O(eps)); for h_n = 1 at xi_n and for
    h_n in {1, 2} at xi_n - eta it stays O(1).
    """
    fspec = spec.to_float()
    ops = SklyaninOps(fspec, cond_max=np.inf)
    N, eta = fspec.N, fspec.eta
    rows = fixed_basis_rows(fspec, _tensor([L1_local(fspec.K)] * N))
    order = list(mixed_radix([3] * N))
    mu = mu if mu is not None else 0.37 + 0.21j
    B_mu = ops.script_B(mu)
    out = {}
    regular, singular = [], []
    for n in range(N):
        for z_name, z in (("xi", fspec.xi[n]), ("xi-eta", fspec.xi[n] - eta)):
            lam = z + eps
            A_l = ops.script_A(lam)
            T = (lam - mu) * A_l @ B_mu - (lam - mu - eta) * B_mu @ A_l
            for h, r in zip(order, rows):
                if (z_name == "xi" and h[n] == 2) or (z_name == "xi-eta" and h[n] == 0):
                    continue            # not a zero of the eigenvalue on this label
                den = np.linalg.norm((lam - mu) * r @ A_l @ B_mu) + 1e-300
                v = float(np.linalg.norm(r @ T) / den)
                out[(n + 1, z_name, h)] = v
                (regular if (z_name == "xi" and h[n] == 0) else singular).append(v)
    return TruncatedWitness(out, max(regular), min(singular))
