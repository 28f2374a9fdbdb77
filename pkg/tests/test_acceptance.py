"""Acceptance criteria 1-11, one test per criterion.

Each test records a PASS/FAIL line; conftest prints them in the terminal
summary.
"""

import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from qsov import harness as H
from qsov import sklyanin as sk
from qsov.charge_algebra import (companion_conjugate, confluent_vandermonde_det, power_basis,
                                 w_simple_check)
from qsov.numeric import to_exact
from qsov.sov_basis import build_basis, tensor_S
from qsov.spectrum_gl2 import (angle, baxter_q, brute_force_spectrum, factorized_eigenvector,
                               quadratic_system_residual, sector_from_sum_rule,
                               solve_quadratic_system)
from qsov.spectrum_gl3 import brute_force_spectrum_gl3
from qsov.yang_baxter import ybe_residual

from conftest import draw
from test_charge_algebra import DEROGATORY, partitions

LINES: list[str] = []


@contextmanager
def criterion(k: int, title: str):
    t0 = time.perf_counter()
    info: dict = {}
    try:
        yield info
    except BaseException:
        LINES.append(f"criterion {k:2d} FAIL  {title}  {_fmt(info)}")
        raise
    LINES.append(f"criterion {k:2d} PASS  {title}  {_fmt(info)} ({time.perf_counter() - t0:.1f} s)")


def _fmt(info):
    return " ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items())


def _rand_fraction(rng, lo=-10, hi=10):
    return Fraction(int(rng.integers(lo * 12, hi * 12 + 1)), int(rng.integers(1, 13)))


def _basis_for(model, N, mode, seed):
    cfg = H.ExperimentConfig(model=model, sites=N, mode=mode, seed=seed)
    spec = H.draw_spec(cfg)
    ctx = H.Context(cfg, spec)
    S = tensor_S(spec, ctx.local_covectors(ctx.rng("basis-S")), frame="raw")
    return build_basis(spec, S, raise_on_zero=False)


def test_criterion_01_ybe():
    with criterion(1, "YBE certificates") as info:
        rng = np.random.default_rng(101)
        t0 = time.perf_counter()
        for n in (2, 3, 4):
            for _ in range(50):
                lam, mu = _rand_fraction(rng), _rand_fraction(rng)
                eta = _rand_fraction(rng, 1, 5)
                assert ybe_residual("rational", lam, mu, eta, n) == 0
        worst = 0.0
        for _ in range(100):
            lam, mu, eta = rng.normal(size=3) * 0.7 + 1j * rng.normal(size=3) * 0.7
            worst = max(worst, ybe_residual("trig", lam, mu, eta))
        info["trig_max"] = worst
        info["seconds"] = time.perf_counter() - t0
        assert worst <= 1e-12
        assert info["seconds"] < 5


def test_criterion_02_basis():
    with criterion(2, "basis certificates") as info:
        fails = 0
        for model, Ns in (("gl2-rational", range(1, 5)), ("gl3-rational", range(1, 3))):
            for N in Ns:
                for seed in range(50):
                    fails += _basis_for(model, N, "exact", seed).det == 0
        info["exact_fail"] = fails
        worst = np.inf
        for model, Ns in (("gl2-rational", range(1, 9)), ("gl2-trig", range(1, 9)),
                          ("gl3-rational", range(1, 4))):
            for N in Ns:
                for seed in range(50):
                    b = _basis_for(model, N, "float", seed)
                    fails += not b.nonzero
                    worst = min(worst, H._rcond(b))
        info["float_min_rcond"] = worst
        info["fail"] = fails
        assert fails == 0


def test_criterion_03_gl2_spectrum():
    with criterion(3, "gl2 spectrum equivalence") as info:
        spec = draw("gl2-rational", 3, seed=3)
        rng = np.random.default_rng(3)
        recs = brute_force_spectrum(spec, rng)
        basis = build_basis(spec, tensor_S(spec, [[1.0, 0.4 + 0.3j], [0.5, -1.0], [1.0, 0.2j]]))
        assert len(recs) == 8
        nodes = np.array([r.t_nodes for r in recs])
        sys_w = wave_w = dist_w = 0.0
        for r in recs:
            sys_w = max(sys_w, quadratic_system_residual(spec, r.t_nodes))
            v, wave = factorized_eigenvector(spec, basis, r.t_nodes)
            wave_w = max(wave_w, wave)
            seed = np.array(r.t_nodes) * (1 + 1e-4 * rng.normal(size=3))
            sol, _ = solve_quadratic_system(spec, seed)
            dist_w = max(dist_w, float(np.min(np.max(np.abs(nodes - np.array(sol)), axis=1))))
        info.update(system=sys_w, wave=wave_w, newton=dist_w)
        assert sys_w <= 1e-9 and wave_w <= 1e-8 and dist_w <= 1e-8


def test_criterion_04_tq():
    with criterion(4, "gl2 TQ") as info:
        spec = draw("gl2-rational", 3, seed=4)
        res = margin = 0.0
        margin = np.inf
        for r in brute_force_spectrum(spec, np.random.default_rng(4)):
            q = baxter_q(spec, r.t_nodes)
            assert q.unique and q.M <= 3
            res, margin = max(res, q.tq_residual), min(margin, q.root_margin)
        trig = draw("gl2-trig", 3, seed=4)
        sz_err = 0.0
        for r in brute_force_spectrum(trig, np.random.default_rng(4)):
            q = baxter_q(trig, r.t_nodes, r.sector)
            assert q.unique and q.M <= 3
            assert r.sector == 3 - 2 * q.M
            sz_err = max(sz_err, abs(r.extra["sector_raw"] - r.sector))
            res, margin = max(res, q.tq_residual), min(margin, q.root_margin)
        info.update(tq=res, margin=margin, sz_err=sz_err)
        assert res <= 1e-8 and margin >= 1e-6 and sz_err <= 1e-8


def test_criterion_05_sum_rule():
    with criterion(5, "trig sector sum rule") as info:
        spec = draw("gl2-trig", 3, seed=5)
        runner = np.inf
        recs = brute_force_spectrum(spec, np.random.default_rng(5))
        assert len(recs) == 8
        for r in recs:
            s = sector_from_sum_rule(spec, r.t_nodes)
            assert s.sector == r.sector
            runner = min(runner, s.runner_up)
        info["runner_up_min"] = runner
        assert runner >= 1e-3


def test_criterion_06_gl3():
    with criterion(6, "gl3 spectrum, curve, reference, ABA") as info:
        for N, count in ((2, 9), (3, 27)):
            cfg = H.ExperimentConfig(model="gl3-rational", sites=N, seed=6)
            spec = H.draw_spec(cfg)
            assert len(brute_force_spectrum_gl3(spec, np.random.default_rng(6))) == count
            t0 = time.perf_counter()
            rows = H.run_checks(cfg, spec)
            info[f"N{N}_seconds"] = time.perf_counter() - t0
            bad = [(r.suite, r.check, r.residual) for r in rows
                   if r.suite in ("spectrum", "baxter") and not r.passed]
            info[f"N{N}_failed"] = len(bad)
            assert not bad, bad
        assert info["N3_seconds"] < 60


def test_criterion_07_sklyanin_gl2():
    with criterion(7, "Sklyanin equivalence gl2") as info:
        for N in (1, 2):
            s = draw("gl2-rational", N, mode="exact", seed=7)
            assert sk.gl2_basis_equals_sklyanin(s).deviation == 0
            b0 = s.with_K(to_exact([[2, 0], [3, -1]]))
            r0 = sk.gl2_basis_equals_sklyanin(b0)
            assert r0.path == "b=0 conjugated" and r0.deviation == 0
        worst = 0.0
        for N in (1, 2, 3, 4):
            s = draw("gl2-rational", N, seed=7)
            worst = max(worst, sk.gl2_basis_equals_sklyanin(s).deviation)
            r0 = sk.gl2_basis_equals_sklyanin(s.with_K(np.array([[2.0, 0.0], [0.7 + 0.2j, -1.1]])))
            worst = max(worst, r0.deviation)
            t = draw("gl2-trig", N, seed=7, trig_twist=1)
            worst = max(worst, sk.gl2_basis_equals_sklyanin(t).detail["i_corrected"])
        info["float_max"] = worst
        assert worst <= 1e-10


def test_criterion_08_appendix():
    with criterion(8, "gl3 Sklyanin operators") as info:
        eig = ident = cov = 0.0
        good, bad, clos = 0.0, np.inf, 0.0
        for N in (1, 2, 3):
            spec = draw("gl3-rational", N, seed=8)
            rep = sk.verify_sklyanin_B_spectrum(spec)
            eig = max(eig, max(rep.per_h.values()))
            ident = max(ident, rep.identification_residual)
            cov = max(cov, rep.covector0["scaled"], rep.covector2["scaled"],
                      rep.covector0["direction"], rep.covector2["direction"])
            assert rep.simple_spectrum
            if N <= 2:
                for site in range(1, N + 1):
                    recs = sk.shift_witness(spec, site)
                    good = max(good, max(w.angle for w in recs if w.kind in ("A: 0->1", "D: 2->1")))
                    bad = min(bad, min(w.angle for w in recs if w.kind in ("A: 1->2", "D: 1->0")))
                rng = np.random.default_rng(8)
                for _ in range(3):
                    lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
                    clos = max(clos, *sk.sklyanin_closure_residuals(spec, lam, mu))
        info.update(eigen=eig, ident=ident, covector=cov, shift_ok=good, shift_fail=bad, closure=clos)
        assert eig <= 1e-8 and ident <= 1e-8 and cov <= 1e-8
        assert good <= 1e-6 and bad >= 1e-3 and clos <= 1e-8


def test_criterion_09_pairing():
    with criterion(9, "diagonalizability pairing") as info:
        shapes = [("gl2-rational", N) for N in range(1, 5)] + [("gl3-rational", N) for N in (1, 2)]
        worst = np.inf
        for i in range(20):
            model, N = shapes[i % len(shapes)]
            spec = draw(model, N, seed=900 + i)
            recs = brute_force_spectrum(spec, np.random.default_rng(i))
            worst = min(worst, min(abs(r.pairing) for r in recs))
        info["min_pairing"] = worst
        assert worst > 1e-10


def test_criterion_10_charge_algebra():
    with criterion(10, "charge algebra") as info:
        rng = np.random.default_rng(10)
        n_part = 0
        for d in range(1, 7):
            for part in partitions(d):
                ks = rng.choice(np.arange(-6, 7), size=len(part), replace=False)
                blocks = [(Fraction(int(k)), m) for k, m in zip(ks, part)]
                x = [Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4))) for _ in part]
                f, b = confluent_vandermonde_det(blocks, x)
                assert f == b
                n_part += 1
        info["partitions"] = n_part
        drawn = 0
        while drawn < 30:
            X = to_exact(rng.integers(-4, 5, size=(4, 4)))
            if not w_simple_check(X).is_wsimple:
                continue
            _, V = companion_conjugate(X)
            assert power_basis(X, (2, 2), V[0]).nonzero
            drawn += 1
        for X in DEROGATORY:
            for _ in range(5):
                S = to_exact(rng.integers(-5, 6, size=X.shape[0]))
                assert power_basis(X, (X.shape[0],), S, raise_on_zero=False).det == 0
        info["derogatory"] = len(DEROGATORY)


@pytest.mark.parametrize("model,N", [("gl2-rational", 3), ("gl2-trig", 3), ("gl3-rational", 2)])
def test_criterion_11_determinism(model, N, tmp_path):
    with criterion(11, f"determinism {model} N={N}") as info:
        outs = []
        for k in range(2):
            out = tmp_path / f"run{k}.jsonl"
            cmd = [sys.executable, "-m", "qsov.cli", "sweep", "--suite", "all", "--model", model,
                   "--sites", str(N), "--axis", "seed", "--values", "42", "--out", str(out), "--quiet"]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stdout + proc.stderr
            outs.append(out.read_bytes())
        info["bytes"] = len(outs[0])
        assert outs[0] == outs[1]
