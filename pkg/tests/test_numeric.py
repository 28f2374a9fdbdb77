from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsov.numeric import (CoincidentNodes, FieldMismatch, InterpPoly, certify_det, embed_at,
                          eigen_decompose, eval_interp, exact_det, eye, kron, matmul,
                          partial_trace_aux, permutation_matrix, to_exact)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=30)


@given(fractions, fractions)
def test_exact_no_rounding(a, b):
    A = to_exact([[a]])
    B = to_exact([[b]])
    assert (A + B - B)[0, 0] == a


def test_kron_identity_and_mixed_product(rng):
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    A, B, C, D = (rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(kron(A, B) @ kron(C, D), kron(A @ C, B @ D), atol=1e-13)


def test_kron_field_mismatch():
    with pytest.raises(FieldMismatch):
        kron(eye(2, True), np.eye(2))


def test_permutation_trace_over_leading_leg():
    P = permutation_matrix(2)
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    # tr_1 (P (I x X)) = X
    assert np.allclose(partial_trace_aux(P @ kron(np.eye(2), X), 2), X)
    # tr_1 (P (X x I)) = X as well, while tr_1 (I x X) = 2 X
    assert np.allclose(partial_trace_aux(kron(np.eye(2), X), 2), 2 * X)


def test_embed_at():
    sz = np.diag([1.0, -1.0])
    assert np.array_equal(embed_at(sz, 1, 2, 2), np.diag([1.0, 1.0, -1.0, -1.0]))
    assert np.array_equal(embed_at(np.eye(3), 2, 3, 3), np.eye(27))
    with pytest.raises(ValueError):
        embed_at(sz, 3, 2, 2)


def test_embed_at_commute(rng):
    A, B = rng.normal(size=(2, 2, 2))
    X, Y = embed_at(A, 1, 2, 2), embed_at(B, 2, 2, 2)
    assert np.linalg.norm(X @ Y - Y @ X) < 1e-14


def test_partial_trace_factorized(rng):
    K = rng.normal(size=(3, 3))
    X = rng.normal(size=(4, 4))
    assert np.allclose(partial_trace_aux(kron(K, X), 3), np.trace(K) * X)
    assert np.array_equal(partial_trace_aux(np.eye(6), 2), 2 * np.eye(3))
    with pytest.raises(ValueError):
        partial_trace_aux(np.eye(5), 2)


def test_partial_trace_of_twisted_permutation(rng):
    K = rng.normal(size=(2, 2))
    X = kron(K, np.eye(2)) @ permutation_matrix(2)
    assert np.allclose(partial_trace_aux(X, 2), K)


def test_trace_of_kron(rng):
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(4, 4))
    assert np.isclose(np.trace(kron(A, B)), np.trace(A) * np.trace(B))


@given(st.integers(0, 10_000))
def test_exact_matmul_matches_object_product(seed):
    r = np.random.default_rng(seed)
    A = to_exact(r.integers(-3, 4, size=(5, 4)) * (r.random((5, 4)) < 0.5))
    B = to_exact(r.integers(-3, 4, size=(4, 3)))
    A[0, 0] = Fraction(1, 7)
    assert np.array_equal(matmul(A, B), A @ B)
    v = to_exact(r.integers(-3, 4, size=4))
    assert np.array_equal(matmul(A, v), A @ v)


def test_exact_det_matches_float(rng):
    for _ in range(10):
        A = rng.integers(-5, 6, size=(5, 5))
        if abs(np.linalg.det(A)) < 1:
            continue
        ex = exact_det(to_exact(A))
        assert abs(float(ex) - np.linalg.det(A)) <= 1e-10 * abs(float(ex))


def test_certify_det():
    assert certify_det(to_exact([[1, 2], [2, 4]])).nonzero is False
    assert certify_det(to_exact([[1, 2], [3, 4]])).value == -2
    c = certify_det(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-12]]))
    assert not c.nonzero and c.rcond < 1e-8


def test_interp_rational_examples():
    p = InterpPoly("rational", (0, 1), (1, 3))
    assert eval_interp(p, 2) == 5
    q = InterpPoly("rational", (Fraction(1), Fraction(2)), (Fraction(1), Fraction(4)), asym=Fraction(1))
    assert q(3) == 9
    with pytest.raises(CoincidentNodes):
        InterpPoly("rational", (1, 1), (0, 0))


@given(st.lists(fractions, min_size=1, max_size=5, unique=True), fractions)
def test_interp_exact_reproduces_polynomial(pts, lam):
    n = len(pts)
    coeffs = [Fraction(3), Fraction(-1, 2)] + [Fraction(k, 3) for k in range(n - 1)]
    f = lambda x: sum(c * x ** k for k, c in enumerate(coeffs))
    p = InterpPoly("rational", tuple(pts), tuple(f(x) for x in pts), asym=coeffs[n])
    assert p(lam) == f(lam)
    assert all(p(x) == f(x) for x in pts)
    g = lambda x: sum(c * x ** k for k, c in enumerate(coeffs[:n]))
    q = InterpPoly("rational", tuple(pts), tuple(g(x) for x in pts))
    assert q(lam) == g(lam)


def test_interp_float_random_points(rng):
    c = rng.normal(size=5) + 1j * rng.normal(size=5)
    f = lambda x: np.polyval(c[::-1], x)
    pts = tuple(rng.normal(size=4) + 1j * rng.normal(size=4))
    p = InterpPoly("rational", pts, tuple(f(x) for x in pts), asym=c[-1])
    for lam in rng.normal(size=100) + 1j * rng.normal(size=100):
        assert abs(p(lam) - f(lam)) <= 1e-12 * max(1.0, abs(f(lam)))


def test_interp_trig_product(rng):
    x, y = 0.3 + 0.1j, -0.2 + 0.4j
    f = lambda lam: np.sinh(lam - x) * np.sinh(lam - y)
    nodes = (0.1 + 0.05j, 0.45 - 0.2j)
    # e^{-2 lam} f -> e^{-x-y}/4 and e^{2 lam} f -> e^{x+y}/4
    asym = (np.exp(-x - y) / 4, np.exp(x + y) / 4)
    p = InterpPoly("trig", nodes, tuple(f(z) for z in nodes), asym=asym)
    assert p.sum_rule_mismatch() < 1e-13
    for lam in 0.5 * (rng.normal(size=10) + 1j * rng.normal(size=10)):
        assert abs(p(lam) - f(lam)) < 1e-12 * max(1.0, abs(f(lam)))


def test_eigen_decompose():
    e = eigen_decompose(np.diag([2.0, 3.0]).astype(complex))
    assert np.allclose(sorted(e.values.real), [2, 3])
    assert np.allclose(np.abs(e.pairings), 1)
    j = eigen_decompose(np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex))
    assert j.degenerate
    assert np.min(np.abs(j.pairings)) < 1e-6


def test_eigen_decompose_residuals_and_commuting_pair(rng):
    X = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    e = eigen_decompose(X)
    nrm = np.linalg.norm(X)
    for i, lam in enumerate(e.values):
        r, l = e.right[:, i], e.left[i]
        assert np.linalg.norm(X @ r - lam * r) <= 1e-10 * nrm * np.linalg.norm(r)
        assert np.linalg.norm(l @ X - lam * l) <= 1e-10 * nrm * np.linalg.norm(l)
    Y = X @ X + 2 * X
    for i in range(8):
        r = e.right[:, i]
        w = Y @ r
        assert np.linalg.norm(w - (np.vdot(r, w) / np.vdot(r, r)) * r) < 1e-8 * np.linalg.norm(w)
