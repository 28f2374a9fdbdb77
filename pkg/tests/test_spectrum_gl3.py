import time

import numpy as np
import pytest

from qsov.monodromy import TransferFamily
from qsov.numeric import NonConvergence
from qsov.sov_basis import build_basis, tensor_S
from qsov.spectrum_gl2 import RejectedCandidate, angle, generic_point
from qsov.spectrum_gl3 import (aba_state_gl3, brute_force_spectrum_gl3, cubic_system_residual,
                               curve_residual_for_gamma, factorized_eigenvector_gl3, gamma_fn,
                               phi_rewriting_residual, reference_state, solve_cubic_system,
                               spectral_curve_gl3, t2_from_t1_nodes)
from qsov.yang_baxter import ModelSpec

from conftest import draw

LOCAL = [1.0, 0.3 + 0.2j, -0.4 + 0.5j]


@pytest.fixture(scope="module")
def two_site():
    s = draw("gl3-rational", 2, seed=5)
    fam = TransferFamily(s)
    recs = brute_force_spectrum_gl3(s, np.random.default_rng(1), fam)
    basis = build_basis(s, tensor_S(s, [LOCAL, [0.7, -0.2, 1.0 + 0.1j]], frame="raw"), family=fam)
    return s, fam, recs, basis


def test_single_site_records():
    K = np.diag([2.0, 3.0, 5.0])
    s = ModelSpec.rational(3, [0.2], 0.7, K)
    recs = brute_force_spectrum_gl3(s)
    got = sorted(round((r.t_nodes[0] / 0.7).real, 10) for r in recs)
    assert got == [2, 3, 5]


def test_two_site_records_distinct(two_site):
    s, fam, recs, basis = two_site
    assert len(recs) == 9
    nodes = np.array([r.t_nodes for r in recs])
    for i in range(9):
        for j in range(i):
            assert np.max(np.abs(nodes[i] - nodes[j])) > 1e-6


def test_three_site_oracle_runtime():
    s = draw("gl3-rational", 3, seed=2)
    t0 = time.perf_counter()
    recs = brute_force_spectrum_gl3(s, np.random.default_rng(0))
    assert time.perf_counter() - t0 < 10
    assert len(recs) == 27


def test_t2_interpolation_matches_oracle(two_site, rng):
    s, fam, recs, basis = two_site
    for r in recs:
        t2 = t2_from_t1_nodes(s, r.t_nodes)
        for x in s.xi:
            assert abs(t2(x)) <= 1e-12 * (1 + max(abs(v) for v in t2.values))
        for _ in range(5):
            lam = generic_point(rng, s)
            val = r.left @ fam.T2(lam) @ r.right / (r.left @ r.right)
            assert abs(t2(lam) - val) <= 1e-9 * max(1.0, abs(val))


def test_cubic_system(two_site):
    s, fam, recs, basis = two_site
    for r in recs:
        assert cubic_system_residual(s, r.t_nodes) <= 1e-9
        bumped = (r.t_nodes[0] + 1e-3 * abs(r.t_nodes[0]),) + tuple(r.t_nodes[1:])
        assert cubic_system_residual(s, bumped) > 1e-4


def test_newton_returns_to_record(two_site, rng):
    s, fam, recs, basis = two_site
    for r in recs:
        seed = np.array(r.t_nodes) * (1 + 1e-4 * rng.normal(size=s.N))
        sol, it = solve_cubic_system(s, seed)
        assert np.max(np.abs(np.array(sol) - np.array(r.t_nodes))) <= 1e-8 * max(1, np.max(np.abs(sol)))


def test_newton_failure_is_reported():
    s = draw("gl3-rational", 2, seed=5)
    with pytest.raises(NonConvergence):
        solve_cubic_system(s, [0.0, 0.0], max_iter=0)


def test_factorized_eigenvectors(two_site):
    s, fam, recs, basis = two_site
    for r in recs:
        v, r1, r2 = factorized_eigenvector_gl3(s, basis, r.t_nodes, fam)
        assert max(r1, r2) <= 1e-8
        assert angle(v, r.right) <= 1e-7


def test_non_solution_rejected(two_site):
    s, fam, recs, basis = two_site
    fake = tuple(x * 1.01 for x in recs[0].t_nodes)
    with pytest.raises(RejectedCandidate):
        factorized_eigenvector_gl3(s, basis, fake, fam)


def test_spectral_curve_and_rewriting(two_site):
    s, fam, recs, basis = two_site
    for r in recs:
        phi = spectral_curve_gl3(s, r.t_nodes)
        assert phi.M <= s.N
        assert phi.curve_residual <= 1e-7
        assert phi_rewriting_residual(s, r.t_nodes, phi) <= 1e-8


def test_curve_negative_control(two_site):
    s, fam, recs, basis = two_site
    r = recs[0]
    phi = spectral_curve_gl3(s, r.t_nodes)
    assert curve_residual_for_gamma(s, r.t_nodes, phi, phi.gamma0 + 1.0) > 1e-2


def test_reference_state(two_site):
    s, fam, recs, basis = two_site
    ref = reference_state(s, fam)
    assert ref.residual_T1 <= 1e-11
    assert ref.residual_T2 <= 1e-10
    for a, x in enumerate(s.xi):
        g = gamma_fn(s, ref.k0, x)
        assert abs(ref.nodes[a] - g) <= 1e-12 * max(1, abs(g))
    phi = spectral_curve_gl3(s, ref.nodes)
    assert phi.M == 0 and phi.curve_residual <= 1e-7


def test_aba_matches_sov(two_site):
    s, fam, recs, basis = two_site
    ref = reference_state(s, fam)
    for r in recs:
        phi = spectral_curve_gl3(s, r.t_nodes)
        v = factorized_eigenvector_gl3(s, basis, r.t_nodes, fam)[0]
        assert angle(aba_state_gl3(s, basis, phi, ref), v) <= 1e-8


def test_gamma0_branch_experiment(two_site, record_property):
    # other eigenvalues of K as gamma0: recorded only
    s, fam, recs, basis = two_site
    ks = np.linalg.eigvals(np.asarray(s.K, dtype=complex))
    outcome = {}
    for k in ks:
        ok = 0
        for r in recs:
            try:
                spectral_curve_gl3(s, r.t_nodes, gamma0=k)
                ok += 1
            except Exception:
                pass
        outcome[f"{k:.4g}"] = ok
    record_property("gamma0_branches", outcome)
