"""Experiment harness: random model draws, per-suite checks, JSON-lines reports, sweeps."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import sklyanin as sk
from .charge_algebra import w_simple_check
from .monodromy import TransferFamily, commutator_residual, fusion_residuals, qdet3_identity_residuals
from .numeric import certify_det, det_floor, to_exact
from .sov_basis import build_basis, degeneration_check, local_det, tensor_S
from .spectrum_gl2 import (aba_state_trig, angle, baxter_q, brute_force_spectrum,
                           factorized_eigenvector, quadratic_system_residual,
                           sector_from_sum_rule, solve_quadratic_system)
from .spectrum_gl3 import (aba_state_gl3, brute_force_spectrum_gl3, cubic_system_residual,
                           factorized_eigenvector_gl3, reference_state, solve_cubic_system,
                           spectral_curve_gl3)
from .yang_baxter import ModelSpec, inhomogeneity_violations, scalar_ybe_residual, ybe_residual

SCHEMA_VERSION = 1
MODELS = ("gl2-rational", "gl2-trig", "gl3-rational")
SUITES = ("ybe", "basis", "spectrum", "baxter", "sklyanin")
OUT_DIR_ENV = "QSOV_OUT_DIR"
ROW_KEYS = ("suite", "check", "anchor", "params_digest", "residual", "tol", "pass", "ms", "cmp")


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str = "all"
    model: str = "gl2-rational"
    sites: int = 3
    seed: int = 0
    mode: str = "float"
    tol: float | None = None          # replaces the bound of every upper-bound check
    eta: complex | None = None        # overrides the drawn eta
    alpha: complex | None = None      # trig twist parameter override
    trig_twist: int = 0               # a in K^(a, alpha)

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model}")
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode}")
        if self.model == "gl2-trig" and self.mode == "exact":
            raise ValueError("trigonometric models are float-only")
        if self.sites < 1:
            raise ValueError("need at least one site")

    def describe(self) -> dict:
        d = asdict(self)
        for k in ("eta", "alpha"):
            if d[k] is not None:
                z = complex(d[k])
                d[k] = [z.real, z.imag]
        return d


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def check_rng(master: int, check_id: str) -> np.random.Generator:
    """Generator seeded from (master seed, check id) so checks are order independent."""
    h = int.from_bytes(hashlib.sha256(check_id.encode()).digest()[:8], "little")
    return np.random.default_rng([int(master) & 0xFFFFFFFF, h])


# ---------------------------------------------------------------------------
# random model draws
# ---------------------------------------------------------------------------

def _rand_complex(rng, scale=1.0) -> complex:
    return complex(rng.normal(), rng.normal()) * scale


def _draw_xi(rng, N, eta, rmax, radius, margin, trig=False, tries=1000):
    for _ in range(tries):
        r = radius * np.sqrt(rng.uniform(size=N))
        th = rng.uniform(0, 2 * np.pi, size=N)
        xi = r * np.exp(1j * th)
        ok = True
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                for s in range(-rmax, rmax + 1):
                    d = xi[i] - xi[j] - s * eta
                    if (abs(np.sinh(d)) if trig else abs(d)) < margin:
                        ok = False
        if ok:
            return [complex(v) for v in xi]
    raise RuntimeError("could not draw separated inhomogeneities")


def _twist_ok(K, gap) -> bool:
    w = np.linalg.eigvals(K)
    d = min((abs(a - b) for i, a in enumerate(w) for b in w[i + 1:]), default=np.inf)
    return d > gap * max(1.0, np.max(np.abs(w)))


def _generic3(K) -> bool:
    """Nonzero entries, cofactors and kappa: small integer draws hit these zeros often,
    and any of them makes a Sklyanin operator or its inverse vanish identically."""
    return all(v != 0 for v in K.flat) and all(v != 0 for v in sk.adjugate3(K).flat) and sk.kappa(K) != 0


def random_twist(n: int, rng, exact: bool = False, gap: float = 0.1):
    """Random invertible w-simple twist with separated eigenvalues."""
    for _ in range(200):
        if exact:
            K = rng.integers(-4, 5, size=(n, n))
            Kx = np.array([[Fraction(int(v)) for v in row] for row in K], dtype=object)
            # det K != 0 keeps the quantum determinant from vanishing identically
            if round(np.linalg.det(K)) != 0 and w_simple_check(Kx).is_wsimple \
                    and _twist_ok(K.astype(complex), 1e-6) and (n != 3 or _generic3(Kx)):
                return Kx
        else:
            K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            if _twist_ok(K, gap):
                return K
    raise RuntimeError("could not draw a w-simple twist")


def random_spec(model: str, N: int, mode: str, rng, eta=None, alpha=None, trig_twist: int = 0) -> ModelSpec:
    """Draw a model with well separated inhomogeneities.

    Rational float: |eta| in [0.5, 1], xi uniform in a disc of radius
    max(1, N/2)|eta| with every xi_a - xi_b - r eta at least 0.1|eta| away
    from zero.  The disc grows with N because the SoV basis conditioning
    degrades quickly when the xi crowd together.
    """
    if model == "gl2-trig":
        eta = complex(eta) if eta is not None else complex(rng.uniform(0.25, 0.4), rng.uniform(-0.1, 0.1))
        alpha = complex(alpha) if alpha is not None else complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        xi = _draw_xi(rng, N, eta, 1, 0.15 * max(2, N), 0.05, trig=True)
        return ModelSpec.trig(xi, eta, trig_twist, alpha)
    n = 2 if model == "gl2-rational" else 3
    rmax = 1 if n == 2 else 2
    if mode == "exact":
        eta = Fraction(eta) if eta is not None else Fraction(int(rng.integers(1, 4)), int(rng.integers(1, 3)))
        for _ in range(1000):
            q = int(rng.integers(1, 5))
            xi = [Fraction(int(rng.integers(-6 * N, 6 * N + 1)), q) for _ in range(N)]
            spec = ModelSpec.rational(n, xi, eta, random_twist(n, rng, True), "exact", check=False)
            if not inhomogeneity_violations(spec):
                return ModelSpec.rational(n, xi, eta, spec.K, "exact")
        raise RuntimeError("could not draw exact inhomogeneities")
    if eta is None:
        eta = rng.uniform(0.5, 1.0) * np.exp(1j * rng.uniform(-0.5, 0.5))
    eta = complex(eta)
    radius = max(1.0, N / 2) * abs(eta)
    xi = _draw_xi(rng, N, eta, rmax, radius, 0.1 * abs(eta))
    return ModelSpec.rational(n, xi, eta, random_twist(n, rng), "float")


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    tol: float
    cmp: str                     # "le", "ge" or "gt"
    fn: Callable[[], float]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    check: str
    anchor: str
    params_digest: str
    residual: float | None
    tol: float
    passed: bool
    ms: float
    error: str | None = None
    cmp: str = "le"

    def row(self, with_timing: bool = False) -> dict:
        return {"suite": self.suite, "check": self.check, "anchor": self.anchor,
                "params_digest": self.params_digest, "residual": self.residual, "tol": self.tol,
                "pass": self.passed, "ms": round(self.ms, 3) if with_timing else None, "cmp": self.cmp}


def _compare(value, tol, cmp) -> bool:
    if value is None or not np.isfinite(value):
        return False
    return bool({"le": value <= tol, "ge": value >= tol, "gt": value > tol}[cmp])


def _lam(rng, spec):
    if spec.exact:
        return Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 9))) + Fraction(1, 97)
    z = _rand_complex(rng)
    return 0.3 * z if spec.algebra == "trig" else z


class Context:
    """Shared, lazily computed state for one (config, spec) pair."""

    def __init__(self, config: ExperimentConfig, spec: ModelSpec):
        self.config = config
        self.spec = spec
        self.fspec = spec.to_float()
        self._cache: dict = {}

    def rng(self, name: str):
        return check_rng(self.config.seed, f"{self.config.model}/{self.spec.N}/{self.config.mode}/{name}")

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def family(self) -> TransferFamily:
        return self.get("family", lambda: TransferFamily(self.fspec))

    def local_covectors(self, rng):
        """Random per-site covectors whose local determinant is nonzero."""
        spec = self.spec
        out = []
        while len(out) < spec.N:
            if spec.exact:
                s = [int(v) for v in rng.integers(-3, 4, size=spec.n)]
            else:
                s = list(rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n))
            v = to_exact(s) if spec.exact else np.asarray(s, dtype=complex)
            ld = local_det(spec.K, v)
            if ld != 0 and (spec.exact or abs(ld) > 1e-3 * np.linalg.norm(v) ** spec.n):
                out.append(s)
        return out

    def basis(self):
        def make():
            S = tensor_S(self.fspec, self.local_covectors(self.rng("spectrum-S")), frame="raw")
            return build_basis(self.fspec, S, family=self.family)
        return self.get("basis", make)

    def records(self):
        def make():
            rng = self.rng("oracle")
            if self.fspec.n == 2:
                return brute_force_spectrum(self.fspec, rng, self.family)
            return brute_force_spectrum_gl3(self.fspec, rng, self.family)
        return self.get("records", make)


def _max(values: Iterable[float]) -> float:
    vals = [float(v) for v in values]
    return max(vals) if vals else 0.0


def _min(values: Iterable[float]) -> float:
    vals = [float(v) for v in values]
    return min(vals) if vals else float("inf")


# --- ybe ------------------------------------------------------------------

def ybe_checks(ctx: Context) -> list[Check]:
    spec = ctx.spec
    kind = "trig" if spec.algebra == "trig" else "rational"
    exact = spec.exact
    tol = 0.0 if exact else 1e-12

    def ybe():
        rng = ctx.rng("ybe")
        return _max(ybe_residual(kind, _lam(rng, spec), _lam(rng, spec), spec.eta, spec.n) for _ in range(5))

    def sym():
        rng = ctx.rng("ybe-K")
        return _max(scalar_ybe_residual(kind, spec.K, _lam(rng, spec), _lam(rng, spec), spec.eta)
                    for _ in range(5))

    def commute():
        rng = ctx.rng("commute")
        fam = TransferFamily(spec)
        return _max(commutator_residual(fam.T1(_lam(rng, spec)), fam.T1(_lam(rng, spec))) for _ in range(2))

    def fusion():
        return _max(fusion_residuals(spec).values())

    out = [Check("ybe", "ybe-residual", "Yang-Baxter equation", tol, "le", ybe),
           Check("ybe", "twist-symmetry", "scalar Yang-Baxter equation", tol, "le", sym),
           Check("ybe", "transfer-commute", "commuting transfer matrices", 0.0 if exact else 1e-11, "le", commute),
           Check("ybe", "fusion-nodes", "Fusion-1-eq", 0.0 if exact else 1e-10, "le", fusion)]
    if spec.n == 3:
        def qdet():
            rng = ctx.rng("qdet3")
            return _max(qdet3_identity_residuals(spec, _lam(rng, spec)).values())
        out.append(Check("ybe", "qdet-identities", "Bound-q-detU_1", 0.0 if exact else 1e-11, "le", qdet))
    return out


# --- basis ----------------------------------------------------------------

def basis_checks(ctx: Context) -> list[Check]:
    spec = ctx.spec

    def build():
        return ctx.get("basis-exact-or-float", lambda: build_basis(
            spec, tensor_S(spec, ctx.local_covectors(ctx.rng("basis-S")), frame="raw"), raise_on_zero=False))

    if spec.exact:
        det = Check("basis", "transition-det-nonzero", "sb1", 0.0, "gt",
                    lambda: float(abs(build().det)))
    else:
        det = Check("basis", "transition-rcond", "sb1", det_floor(spec.dim), "ge", lambda: _rcond(build()))
    out = [det,
           Check("basis", "recursion", "sb1", 0.0 if spec.exact else 1e-10, "le",
                 lambda: float(build().recursion_residual()))]
    if spec.algebra == "rational" and not spec.exact:
        out.append(Check("basis", "degeneration-limit", "t.choice", 1e-5, "le",
                         lambda: _max(degeneration_check(spec, l).rel_error for l in range(1, spec.N + 1))))
    return out


def _rcond(basis) -> float:
    return float(certify_det(basis.float_rows()).rcond)


# --- spectrum -------------------------------------------------------------

def _sector(spec, r):
    return r.sector if spec.algebra == "trig" and spec.a == 0 else None


def spectrum_checks(ctx: Context) -> list[Check]:
    fspec = ctx.fspec
    n, N = fspec.n, fspec.N
    out = [Check("spectrum", "record-count", "SoV-Ch-T-eigenV-gl2" if n == 2 else "gl3 SoV characterization",
                 0.0, "le", lambda: float(abs(len(ctx.records()) - n ** N)))]
    if n == 2:
        def system():
            return _max(quadratic_system_residual(fspec, r.t_nodes, _sector(fspec, r)) for r in ctx.records())

        def wave():
            return _max(factorized_eigenvector(fspec, ctx.basis(), r.t_nodes, _sector(fspec, r),
                                               ctx.family, tol=np.inf)[1] for r in ctx.records())

        def newton():
            rng = ctx.rng("newton")
            worst = 0.0
            for r in ctx.records():
                seed = np.array(r.t_nodes) + 1e-4 * (rng.normal(size=N) + 1j * rng.normal(size=N))
                sol, _ = solve_quadratic_system(fspec, seed, _sector(fspec, r))
                worst = max(worst, float(np.max(np.abs(np.array(sol) - np.array(r.t_nodes)))))
            return worst

        out += [Check("spectrum", "quadratic-system", "Quadratic System", 1e-9, "le", system),
                Check("spectrum", "wave-residual", "SoV-Ch-T-eigenV-gl2", 1e-8, "le", wave),
                Check("spectrum", "newton-return", "Quadratic System", 1e-8, "le", newton)]
        if fspec.algebra == "trig" and fspec.a == 0:
            def sectors():
                bad = 0
                for r in ctx.records():
                    try:
                        res = sector_from_sum_rule(fspec, r.t_nodes)
                    except ValueError:
                        bad += 1
                        continue
                    bad += res.sector != r.sector
                return float(bad)

            def runner_up():
                return _min(sector_from_sum_rule(fspec, r.t_nodes).runner_up for r in ctx.records())

            out += [Check("spectrum", "sum-rule-sector-mismatches", "roots-sum-role", 0.0, "le", sectors),
                    Check("spectrum", "sum-rule-runner-up", "roots-sum-role", 1e-3, "ge", runner_up)]
    else:
        def system():
            return _max(cubic_system_residual(fspec, r.t_nodes) for r in ctx.records())

        def eig(which):
            def f():
                vals = [factorized_eigenvector_gl3(fspec, ctx.basis(), r.t_nodes, ctx.family, tol=np.inf)
                        for r in ctx.records()]
                return _max(v[which] for v in vals)
            return f

        def newton():
            rng = ctx.rng("newton")
            worst = 0.0
            for r in ctx.records():
                seed = np.array(r.t_nodes) * (1 + 1e-4 * rng.normal(size=N))
                sol, _ = solve_cubic_system(fspec, seed)
                worst = max(worst, float(np.max(np.abs(np.array(sol) - np.array(r.t_nodes)))))
            return worst

        out += [Check("spectrum", "cubic-system", "gl3 cubic system", 1e-8, "le", system),
                Check("spectrum", "T1-eigen-residual", "gl3 SoV characterization", 1e-8, "le", eig(1)),
                Check("spectrum", "T2-eigen-residual", "gl3 SoV characterization", 1e-8, "le", eig(2)),
                Check("spectrum", "newton-return", "gl3 cubic system", 1e-8, "le", newton)]
    out.append(Check("spectrum", "min-pairing", "diagonalizability", 1e-10, "gt",
                     lambda: _min(abs(r.pairing) for r in ctx.records())))
    return out


# --- baxter ---------------------------------------------------------------

def baxter_checks(ctx: Context) -> list[Check]:
    fspec = ctx.fspec
    N = fspec.N
    if fspec.n == 2:
        if fspec.algebra == "trig" and fspec.a == 1:
            return []
        qs = lambda: ctx.get("qs", lambda: [baxter_q(fspec, r.t_nodes, _sector(fspec, r))
                                            for r in ctx.records()])
        out = [Check("baxter", "tq-residual", "t-q-gl2", 1e-8, "le", lambda: _max(q.tq_residual for q in qs())),
               Check("baxter", "q-root-margin", "Q-form", 1e-6, "ge", lambda: _min(q.root_margin for q in qs())),
               Check("baxter", "q-degree-excess", "Q-form", 0.0, "le",
                     lambda: float(sum(max(q.M - N, 0) for q in qs()))),
               Check("baxter", "q-not-unique", "Q-form", 0.0, "le",
                     lambda: float(sum(not q.unique for q in qs())))]
        if fspec.algebra == "trig":
            def degree_rule():
                return float(sum(r.sector != N - 2 * q.M for r, q in zip(ctx.records(), qs())))

            def sz_integer():
                return _max(abs(r.extra["sector_raw"] - round(r.extra["sector_raw"])) for r in ctx.records())

            def aba():
                worst = 0.0
                for r, q in zip(ctx.records(), qs()):
                    v, _ = factorized_eigenvector(fspec, ctx.basis(), r.t_nodes, r.sector, ctx.family, tol=np.inf)
                    worst = max(worst, angle(aba_state_trig(fspec, ctx.basis(), q), v))
                return worst

            out += [Check("baxter", "sector-degree-mismatches", "Q-form-trig", 0.0, "le", degree_rule),
                    Check("baxter", "sz-integer-error", "Q-form-trig", 1e-8, "le", sz_integer),
                    Check("baxter", "aba-angle", "ABA representation", 1e-8, "le", aba)]
        return out

    phis = lambda: ctx.get("phis", lambda: [spectral_curve_gl3(fspec, r.t_nodes) for r in ctx.records()])
    ref = lambda: ctx.get("ref", lambda: reference_state(fspec, ctx.family))

    def ref_phi():
        p = spectral_curve_gl3(fspec, ref().nodes)
        return float(p.M + max(abs(c - 1) for c in p.coeffs))

    def aba():
        worst = 0.0
        for r, p in zip(ctx.records(), phis()):
            v = factorized_eigenvector_gl3(fspec, ctx.basis(), r.t_nodes, ctx.family, tol=np.inf)[0]
            worst = max(worst, angle(aba_state_gl3(fspec, ctx.basis(), p, ref()), v))
        return worst

    return [Check("baxter", "spectral-curve", "third-order quantum spectral curve", 1e-7, "le",
                  lambda: _max(p.curve_residual for p in phis())),
            Check("baxter", "phi-degree-excess", "third-order quantum spectral curve", 0.0, "le",
                  lambda: float(sum(max(p.M - N, 0) for p in phis()))),
            Check("baxter", "reference-phi-trivial", "reference state", 1e-12, "le", ref_phi),
            Check("baxter", "reference-eigen-residual", "reference state", 1e-10, "le",
                  lambda: max(ref().residual_T1, ref().residual_T2)),
            Check("baxter", "aba-angle", "ABA representation", 1e-8, "le", aba)]


# --- sklyanin -------------------------------------------------------------

def _b_zero_twist(spec: ModelSpec, rng) -> ModelSpec:
    K = spec.K.copy()
    K[0, 1] = 0 * K[0, 1]
    for _ in range(50):
        if K[0, 0] != K[1, 1] and K[1, 0] != 0:
            break
        K[1, 0] = K[1, 0] + 1
        K[0, 0] = K[0, 0] + 1
    return spec.with_K(K)


def _kappa_zero_twist(spec: ModelSpec, rng) -> ModelSpec:
    K = np.array(spec.K, copy=True)
    K[0, 2] = 0 * K[0, 2]
    K[1, 2] = 0 * K[1, 2]
    return spec.with_K(K)


def sklyanin_checks(ctx: Context) -> list[Check]:
    spec = ctx.spec
    if spec.n == 2:
        exact_tol = 0.0 if spec.exact else 1e-10
        if spec.algebra == "trig":
            s1 = ModelSpec.trig(spec.xi, spec.eta, 1, spec.alpha)
            res = lambda: ctx.get("gl2", lambda: sk.gl2_basis_equals_sklyanin(s1, ctx.rng("sk-gl2")))
            return [Check("sklyanin", "trig-a1-basis-equality", "six-vertex Sklyanin comparison", 1e-10, "le",
                          lambda: res().detail["i_corrected"]),
                    Check("sklyanin", "trig-a1-B-eigen", "six-vertex Sklyanin comparison", 1e-10, "le",
                          lambda: res().b_eigen_residual)]
        res = lambda: ctx.get("gl2", lambda: sk.gl2_basis_equals_sklyanin(spec, ctx.rng("sk-gl2")))
        res0 = lambda: ctx.get("gl2b0", lambda: sk.gl2_basis_equals_sklyanin(
            _b_zero_twist(spec, None), ctx.rng("sk-gl2-b0")))
        return [Check("sklyanin", "basis-equality", "D-zeros", exact_tol, "le", lambda: res().deviation),
                Check("sklyanin", "B-eigen", "D-zeros", 1e-10, "le", lambda: res().b_eigen_residual),
                Check("sklyanin", "basis-equality-b0", "D-zeros", exact_tol, "le", lambda: res0().deviation),
                Check("sklyanin", "B-eigen-b0", "D-zeros", 1e-10, "le", lambda: res0().b_eigen_residual)]

    fspec = ctx.fspec
    rep = lambda: ctx.get("skrep", lambda: sk.verify_sklyanin_B_spectrum(fspec, rng=ctx.rng("sk-B")))
    rep0 = lambda: ctx.get("skrep0", lambda: sk.verify_sklyanin_B_spectrum(
        _kappa_zero_twist(fspec, None), rng=ctx.rng("sk-B0")))
    out = [Check("sklyanin", "B-eigenvalues", "Skly-B-eigenV", 1e-8, "le", lambda: rep().eigen_residual),
           Check("sklyanin", "identification", "Coincidence of B", 1e-8, "le", lambda: rep().identification_residual),
           Check("sklyanin", "covector-0", "EigenCovector-0", 1e-8, "le",
                 lambda: max(rep().covector0["scaled"], rep().covector0["direction"])),
           Check("sklyanin", "covector-2", "EigenCovector-2", 1e-8, "le",
                 lambda: max(rep().covector2["scaled"], rep().covector2["direction"])),
           Check("sklyanin", "eigenvectors", "EigenVector-0", 1e-9, "le", lambda: max(rep().vector0, rep().vector2)),
           Check("sklyanin", "B-commute", "Sklyanin B family", 1e-11, "le", lambda: rep().commutator),
           Check("sklyanin", "simple-spectrum-violations", "Skly-B-eigenV", 0.0, "le",
                 lambda: 0.0 if rep().simple_spectrum else 1.0),
           Check("sklyanin", "kappa-zero-identification", "Coincidence of B", 1e-8, "le",
                 lambda: max(rep0().eigen_residual, rep0().identification_residual))]
    if fspec.N <= 2:
        recs = lambda: ctx.get("shift", lambda: [w for n in range(1, fspec.N + 1)
                                                 for w in sk.shift_witness(fspec, n)])
        clos = lambda: ctx.get("closure", lambda: [sk.sklyanin_closure_residuals(
            fspec, _lam(ctx.rng(f"closure{i}"), fspec), _lam(ctx.rng(f"closure-mu{i}"), fspec)) for i in range(3)])
        trunc = lambda: ctx.get("trunc", lambda: sk.truncated_closure_witness(fspec))
        out += [Check("sklyanin", "shift-success-max-angle", "Sklyanin shift limits", 1e-6, "le",
                      lambda: _max(w.angle for w in recs() if w.kind in ("A: 0->1", "D: 2->1"))),
                Check("sklyanin", "shift-failure-min-angle", "Sklyanin shift limits", 1e-3, "ge",
                      lambda: _min(w.angle for w in recs() if w.kind in ("A: 1->2", "D: 1->0"))),
                Check("sklyanin", "closure-shift", "Skly-shift", 1e-8, "le", lambda: _max(c[0] for c in clos())),
                Check("sklyanin", "closure-curve", "Skly-Q-Sp-Curve", 1e-8, "le", lambda: _max(c[1] for c in clos())),
                Check("sklyanin", "truncated-closure-min", "Skly-shift", 1e-3, "ge", lambda: trunc().singular_min)]
    return out


SUITE_BUILDERS = {"ybe": ybe_checks, "basis": basis_checks, "spectrum": spectrum_checks,
                  "baxter": baxter_checks, "sklyanin": sklyanin_checks}


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def draw_spec(config: ExperimentConfig) -> ModelSpec:
    rng = check_rng(config.seed, f"spec/{config.model}/{config.sites}/{config.mode}")
    return random_spec(config.model, config.sites, config.mode, rng, config.eta, config.alpha,
                       config.trig_twist)


def run_checks(config: ExperimentConfig, spec: ModelSpec | None = None) -> list[CheckResult]:
    spec = spec or draw_spec(config)
    ctx = Context(config, spec)
    digest = spec.digest()
    suites = SUITES if config.suite == "all" else (config.suite,)
    out = []
    for suite in suites:
        for chk in SUITE_BUILDERS[suite](ctx):
            tol = config.tol if (config.tol is not None and chk.cmp == "le") else chk.tol
            t0 = time.perf_counter()
            err = None
            try:
                value = float(chk.fn())
            except Exception as e:           # a failing check is reported, not raised
                value, err = None, f"{type(e).__name__}: {e}"
            ms = (time.perf_counter() - t0) * 1e3
            out.append(CheckResult(suite, chk.name, chk.anchor, digest, value, float(tol),
                                   _compare(value, tol, chk.cmp), ms, err, chk.cmp))
    return out


def header(config: ExperimentConfig, extra: dict | None = None) -> dict:
    h = {"schema_version": SCHEMA_VERSION, "kind": "header", "config": config.describe()}
    if extra:
        h.update(extra)
    return h


def _dumps(obj) -> str:
    return json.dumps(obj, allow_nan=True)


def write_report(path: Path, blocks: list[tuple[dict, list[CheckResult]]], timings: bool = True) -> Path:
    """JSON lines: one header per block followed by its rows.

    Rows carry ms = null so that reports are byte-identical across runs;
    wall times go to a sidecar file next to the report.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for head, results in blocks:
            f.write(_dumps(head) + "\n")
            for r in results:
                f.write(_dumps(r.row()) + "\n")
    if timings:
        side = path.with_name(path.name + ".timings")
        with open(side, "w") as f:
            for _, results in blocks:
                for r in results:
                    row = r.row(with_timing=True)
                    if r.error:
                        row["error"] = r.error
                    f.write(_dumps(row) + "\n")
    return path


def read_report(path) -> list[dict]:
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def output_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "reports"))


def default_report_path(config: ExperimentConfig, tag: str | None = None) -> Path:
    name = tag or f"{config.suite}-{config.model}-N{config.sites}-{config.mode}-s{config.seed}"
    return output_dir() / f"{name}.jsonl"


def all_passed(results: Iterable[CheckResult]) -> bool:
    return all(r.passed for r in results)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("N", "eta", "alpha", "seed")


def sweep(config: ExperimentConfig, axis: str, values) -> list[tuple[dict, list[CheckResult]]]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    blocks = []
    for v in values:
        if axis == "N":
            cfg = replace(config, sites=int(v))
        elif axis == "seed":
            cfg = replace(config, seed=int(v))
        elif axis == "eta":
            cfg = replace(config, eta=complex(v))
        else:
            cfg = replace(config, alpha=complex(v))
        try:
            results = run_checks(cfg)
        except Exception as e:           # isolate the point, keep sweeping
            results = [CheckResult(cfg.suite, "config", "draw", None, None, 0.0, False, 0.0,
                                   f"{type(e).__name__}: {e}")]
        blocks.append((header(cfg, {"sweep": {"axis": axis, "value": _enc(v)}}), results))
    return blocks


def _enc(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def summarize(rows: list[dict]) -> dict:
    body = [r for r in rows if r.get("kind") != "header"]
    failed = [r for r in body if not r.get("pass")]
    max_res: dict = {}
    for r in body:
        if r.get("residual") is not None and r.get("cmp", "le") == "le":
            max_res[r["suite"]] = max(max_res.get(r["suite"], 0.0), r["residual"])
    return {"checks": len(body), "passed": len(body) - len(failed), "failed": len(failed),
            "max_residual": max_res,
            "failures": [(r["suite"], r["check"], r["residual"], r["tol"]) for r in failed]}
