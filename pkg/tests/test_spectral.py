import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import k4, k44, random_regular
from specnorm import spectral, treeops
from specnorm.errors import ConvergenceFailure


def test_k4_spectrum():
    spec = spectral.eig_sym(treeops.adjacency_op(k4()))
    expect = np.array([-1, -1, -1, 3]) / math.sqrt(2)
    np.testing.assert_allclose(spec.eigenvalues, expect, atol=1e-12)
    assert spec.tempered.tolist() == [True, True, True, False]


def test_k44_spectrum():
    spec = spectral.eig_sym(treeops.adjacency_op(k44()))
    expect = np.array([-4] + [0] * 6 + [4]) / math.sqrt(3)
    np.testing.assert_allclose(spec.eigenvalues, expect, atol=1e-12)


def test_eigenvector_signs_and_residuals(rr60):
    op = treeops.adjacency_op(rr60)
    spec = spectral.eig_sym(op)
    assert np.max(spectral.residuals(op, spec)) < 1e-10
    V = spec.eigenvectors
    np.testing.assert_allclose(V.T @ V, np.eye(60), atol=1e-10)
    for j in range(60):
        col = V[:, j]
        first = col[np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]]
        assert first > 0


def test_eig_failure_reports(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(ConvergenceFailure, match="asymmetry"):
        spectral.eig_sym(np.eye(3))


def test_theta_parametrization():
    theta, sign, temp = spectral.theta_of([2.0, -2.0, 0.0, 2.5, -3.0])
    np.testing.assert_allclose(theta[:3], [0.0, math.pi, math.pi / 2])
    np.testing.assert_allclose(theta[3:], [math.acosh(1.25), math.acosh(1.5)])
    assert sign.tolist() == [1, -1, 1, 1, -1]
    assert temp.tolist() == [True, True, True, False, False]


def test_spherical_function_values():
    assert spectral.spherical_function(2, 1.0, 0) == 1.0
    assert spectral.spherical_function(2, math.pi / 2, 2) == pytest.approx(-0.5)
    # complex theta on the untempered branch agrees with the cosh form
    t = 0.4
    a = spectral.spherical_function(3, complex(0, t), 3)
    b = spectral.spherical_function(3, t, 3, sign=1.0, tempered=False)
    assert a == pytest.approx(b)
    c = spectral.spherical_function(3, complex(math.pi, t), 3)
    assert c == pytest.approx(-b)


@settings(max_examples=40, deadline=None)
@given(q=st.integers(2, 6), n=st.integers(1, 8), lam=st.floats(-2.0, 2.0))
def test_spherical_function_recursion(q, n, lam):
    # S_n eigenvalues obey the same three-term recursion as the operators
    mu = [spectral.sphere_eigenvalue(q, lam, k) for k in range(n + 2)]
    assert mu[1] == pytest.approx(lam, abs=1e-9)
    if n >= 2:
        assert mu[2] == pytest.approx(lam * mu[1] - (q + 1) / q, abs=1e-8)
    for k in range(2, n + 1):
        assert mu[k + 1] == pytest.approx(lam * mu[k] - mu[k - 1], abs=1e-7 * max(1, abs(mu[k + 1])))


def test_edge_limit_continuity():
    for lam in (2.0, -2.0):
        for n in range(1, 6):
            a = spectral.spherical_from_lambda(3, lam, n)
            b = spectral.spherical_from_lambda(3, lam * (1 - 1e-9), n)
            assert a == pytest.approx(b, rel=1e-6, abs=1e-9)


def test_sphere_eigenvalue_law(rr60):
    spec = spectral.eig_sym(treeops.adjacency_op(rr60))
    rows = spectral.sn_eigenvalue_check(spec, rr60.q, treeops.sphere_ops(rr60, 6))
    for row in rows[1:]:
        assert row.measured_constant == pytest.approx((rr60.q + 1) / rr60.q, abs=1e-9)
        assert row.dev_corrected < 1e-8
        assert row.dev_unit > 1e-3
        assert row.matches == "corrected"
    assert rows[0].matches == "both"


def test_projector(rr60):
    spec = spectral.eig_sym(treeops.adjacency_op(rr60))
    P = spectral.projector(spec, 0.0)
    np.testing.assert_allclose(P.matrix @ P.matrix, P.matrix, atol=1e-10)
    np.testing.assert_allclose(P.matrix, P.matrix.T)
    assert P.rank == int(spec.tempered.sum())
    assert spectral.projector(spec, 10.0).rank == 60
    with pytest.raises(ValueError):
        spectral.projector(spec, -1.0)


def test_spectrum_csv():
    spec = spectral.eig_sym(treeops.adjacency_op(k4()))
    lines = spec.to_csv().splitlines()
    assert lines[0] == "index,lambda,theta,tempered"
    assert len(lines) == 5
    assert lines[4].split(",")[3] == "0"


def test_larger_graph_residual():
    g = random_regular(300, 4, 1)
    op = treeops.adjacency_op(g)
    spec = spectral.eig_sym(op)
    assert np.max(spectral.residuals(op, spec)) < 1e-9
