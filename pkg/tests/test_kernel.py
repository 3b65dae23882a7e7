"""Pair kernel coefficients, the dephasing channel, and the closed determinant."""

import math

import numpy as np
import pytest

from lgsq import oracle
from lgsq.core import SingularConfiguration, SqueezeParams, ToleranceConfig
from lgsq.kernel import (
    CROSS_SIGN_CHOICES,
    IDENTITY_CHANNEL,
    DecoherenceChannel,
    apply_decoherence,
    kernel_coefficients,
    pair_scale,
)

from conftest import random_params


def _scale_expansion(a, b):
    ta, tb = math.tanh(a.r), math.tanh(b.r)
    return (
        tb * math.sin(2 * b.phi)
        - ta * math.sin(2 * a.phi)
        + ta * tb * math.sin(2 * (a.phi - b.phi))
    )


def test_pair_scale_matches_trigonometric_expansion():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = random_params(rng), random_params(rng)
        assert pair_scale(a, b) == pytest.approx(_scale_expansion(a, b), abs=1e-14)


def test_pair_scale_vanishes_on_singular_manifolds():
    assert pair_scale(SqueezeParams(1.0, 0.0), SqueezeParams(0.5, 0.0)) == 0.0
    p = SqueezeParams(1.3, 0.8)
    assert pair_scale(p, p) == pytest.approx(0.0, abs=1e-16)
    assert pair_scale(SqueezeParams(0.0), SqueezeParams(0.0)) == 0.0


def test_kernel_coefficients_rejects_singular_pairs():
    with pytest.raises(SingularConfiguration):
        kernel_coefficients(SqueezeParams(1.0, 0.0), SqueezeParams(0.5, 0.0))
    p = SqueezeParams(1.0, 0.4)
    with pytest.raises(SingularConfiguration):
        kernel_coefficients(p, p)


def test_kernel_integrability_and_decay_form():
    rng = np.random.default_rng(5)
    for _ in range(100):
        a, b = random_params(rng), random_params(rng)
        if abs(pair_scale(a, b)) < 1e-6:
            continue
        k = kernel_coefficients(a, b)
        assert k.is_integrable
        s = k.real_decay_form()
        assert s[0, 1] == s[1, 0]
        assert np.all(np.linalg.eigvalsh(s) > 0.0)


def test_kernel_exchange_symmetry():
    rng = np.random.default_rng(8)
    for _ in range(50):
        a, b = random_params(rng), random_params(rng)
        if abs(pair_scale(a, b)) < 1e-6:
            continue
        kab = kernel_coefficients(a, b)
        kba = kernel_coefficients(b, a)
        assert kba.prefactor == pytest.approx(np.conj(kab.prefactor), rel=1e-12)
        assert kba.quad_a == pytest.approx(np.conj(kab.quad_b), rel=1e-12)
        assert kba.quad_b == pytest.approx(np.conj(kab.quad_a), rel=1e-12)
        assert kba.cross == pytest.approx(np.conj(kab.cross), rel=1e-12)
        x, y = rng.uniform(-2.0, 2.0, size=2)
        assert kba(y, x) == pytest.approx(np.conj(kab(x, y)), rel=1e-10)


def test_kernel_pointwise_against_oracle_route():
    rng = np.random.default_rng(13)
    worst = 0.0
    done = 0
    while done < 300:
        a, b = random_params(rng), random_params(rng)
        if abs(pair_scale(a, b)) < 1e-6:
            continue
        k = kernel_coefficients(a, b)
        x = rng.uniform(-3.0, 3.0, size=5)
        y = rng.uniform(-3.0, 3.0, size=5)
        lhs = k(x, y)
        rhs = (
            np.conj(oracle.wavefunction(a, x))
            * oracle.wavefunction(b, y)
            * oracle.matrix_element(a, b, x, y)
        )
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        ok = scale > 1e-250
        if np.any(ok):
            worst = max(worst, float(np.max(np.abs(lhs - rhs)[ok] / scale[ok])))
        done += 1
    assert worst < 1e-8, f"worst pointwise relative deviation {worst:.3e}"


def test_closed_determinant_against_numeric():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(1000):
        a, b = random_params(rng, r_max=2.5), random_params(rng, r_max=2.5)
        closed = oracle.coupling_det(a, b)
        numeric = np.linalg.det(oracle.coupling_matrix(a, b))
        worst = max(worst, abs(closed - numeric) / max(abs(numeric), 1e-30))
    assert worst < 1e-10, f"worst relative deviation {worst:.3e}"


def test_determinant_vanishes_with_pair_scale():
    rng = np.random.default_rng(19)
    for _ in range(100):
        a, b = random_params(rng), random_params(rng)
        d = oracle.coupling_det(a, b)
        assert abs(d) == pytest.approx(128.0 * abs(pair_scale(a, b)), rel=1e-10, abs=1e-12)


def test_channel_validation():
    assert IDENTITY_CHANNEL.xi == 0.0
    assert set(CROSS_SIGN_CHOICES) == {"subtract", "add"}
    with pytest.raises(ValueError):
        DecoherenceChannel(-0.5)
    with pytest.raises(ValueError):
        DecoherenceChannel(math.nan)
    with pytest.raises(ValueError):
        DecoherenceChannel(1.0, "other")


def test_apply_decoherence_shifts():
    k = kernel_coefficients(SqueezeParams(1.0, 0.4), SqueezeParams(0.7, 0.1))
    assert apply_decoherence(k, IDENTITY_CHANNEL) == k
    xi = 0.8
    sub = apply_decoherence(k, DecoherenceChannel(xi, "subtract"))
    add = apply_decoherence(k, DecoherenceChannel(xi, "add"))
    for shifted in (sub, add):
        assert shifted.prefactor == k.prefactor
        assert shifted.quad_a == k.quad_a - xi / 2.0
        assert shifted.quad_b == k.quad_b - xi / 2.0
    assert sub.cross == k.cross - xi
    assert add.cross == k.cross + xi


def test_apply_decoherence_keeps_integrability():
    rng = np.random.default_rng(23)
    for _ in range(50):
        a, b = random_params(rng), random_params(rng)
        if abs(pair_scale(a, b)) < 1e-6:
            continue
        k = kernel_coefficients(a, b)
        for sign in CROSS_SIGN_CHOICES:
            for xi in (0.3, 2.0, 50.0):
                assert apply_decoherence(k, DecoherenceChannel(xi, sign)).is_integrable


def test_singular_threshold_is_configurable():
    a, b = SqueezeParams(1.0, 0.2), SqueezeParams(1.0, 0.2 + 1e-5)
    s = abs(pair_scale(a, b))
    loose = ToleranceConfig(singular_threshold=10.0 * s)
    with pytest.raises(SingularConfiguration):
        kernel_coefficients(a, b, loose)
    kernel_coefficients(a, b)  # default threshold clears it
