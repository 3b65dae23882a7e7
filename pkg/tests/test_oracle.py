"""Reference-route checks: wavefunction, joint-Gaussian algebra, brute correlator."""

import math

import numpy as np
import pytest

from lgsq import oracle
from lgsq.core import ConvergenceFailure, SingularConfiguration, SqueezeParams
from lgsq.correlator import correlator_general

from conftest import random_params

STATES = [
    SqueezeParams(0.0),
    SqueezeParams(0.6, 0.0),
    SqueezeParams(1.0, 0.4),
    SqueezeParams(2.0, -1.2),
]


def _moment(p, power):
    q = np.linspace(-40.0, 40.0, 200_001)
    psi = oracle.wavefunction(p, q)
    return float(np.trapezoid(np.abs(psi) ** 2 * q**power, q))


@pytest.mark.parametrize("p", STATES)
def test_wavefunction_normalization(p):
    assert _moment(p, 0) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("p", STATES)
def test_wavefunction_width(p):
    # one-mode squeezed vacuum: <Q^2> = (cosh 2r - cos 2phi sinh 2r) / 2
    want = (math.cosh(2 * p.r) - math.cos(2 * p.phi) * math.sinh(2 * p.r)) / 2.0
    assert _moment(p, 2) == pytest.approx(want, rel=1e-8)


def test_coupling_matrix_is_symmetric():
    m = oracle.coupling_matrix(SqueezeParams(1.1, 0.5), SqueezeParams(0.4, -0.8))
    assert np.allclose(m, m.T)
    assert not np.allclose(m, np.conj(m.T))  # symmetric, not hermitian


def test_overlap_coeffs_match_linear_solve():
    rng = np.random.default_rng(29)
    for _ in range(50):
        a, b = random_params(rng), random_params(rng)
        if abs(oracle.coupling_det(a, b)) / 128.0 < 1e-6:
            continue
        m = oracle.coupling_matrix(a, b)
        c_first, c_second, c_cross = oracle.overlap_quad_coeffs(a, b)
        x, y = rng.uniform(-2.0, 2.0, size=2)
        j = oracle.source_vector(x, y)
        direct = 0.5 * j @ np.linalg.solve(m, j)
        closed = c_first * x * x + c_second * y * y + c_cross * x * y
        assert closed == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_source_vector_layout():
    j = oracle.source_vector(0.7, -1.2)
    assert j[0] == j[1] == 0.0
    assert j[2] == pytest.approx(-math.sqrt(2.0) * -1.2)
    assert j[4] == pytest.approx(-math.sqrt(2.0) * 0.7)


def test_matrix_element_fixture_roundtrip(matrix_element_fixture):
    for e in matrix_element_fixture:
        a = SqueezeParams(**e["a"])
        b = SqueezeParams(**e["b"])
        got = oracle.matrix_element(a, b, e["Qt"], e["Qb"])
        assert complex(got) == pytest.approx(
            complex(e["matrix_element_re"], e["matrix_element_im"]), rel=1e-12
        )


def test_matrix_element_rejects_singular_pair():
    with pytest.raises(SingularConfiguration):
        oracle.matrix_element(SqueezeParams(1.0, 0.0), SqueezeParams(0.5, 0.0), 0.3, 0.1)


def test_oracle_correlator_goldens(goldens):
    a = SqueezeParams(1.0, 0.4)
    b = SqueezeParams(0.7, 0.1)
    for key, want in goldens["oracle"].items():
        got = oracle.oracle_correlator(a, b, float(key))
        assert got == pytest.approx(want, abs=1e-9), f"ell={key}"


def test_coupling_det_golden(goldens):
    d = oracle.coupling_det(SqueezeParams(1.0, 0.4), SqueezeParams(0.7, 0.1))
    want = complex(*goldens["coupling_det"])
    assert d == pytest.approx(want, abs=1e-12)


def test_oracle_anchors_small_angle_path():
    # the oracle quadrature cannot reach the zero-angle manifold itself
    # (its grid budget blows up with the oscillation scale), so it anchors
    # the small-angle end of the chain oracle <-> general <-> zero-angle;
    # the last link is closed in the correlator tests
    ra, rb, ell = 1.0, 0.5, 2.0
    for phi in (0.05, 0.01):
        a, b = SqueezeParams(ra, phi), SqueezeParams(rb, phi)
        got = oracle.oracle_correlator(a, b, ell)
        assert got == pytest.approx(correlator_general(a, b, ell).value, abs=1e-9)


def test_oracle_budget_failure_near_singular():
    with pytest.raises(ConvergenceFailure):
        oracle.oracle_correlator(SqueezeParams(1.0, 1e-4), SqueezeParams(0.5, 1e-4), 2.0)


def test_oracle_symmetry():
    a = SqueezeParams(1.2, 0.7)
    b = SqueezeParams(0.5, -0.4)
    assert oracle.oracle_correlator(a, b, 1.1) == pytest.approx(
        oracle.oracle_correlator(b, a, 1.1), abs=1e-8
    )
