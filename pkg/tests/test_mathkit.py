#!/usr/bin/env python3
"""
Tests for special functions and quadrature helpers.
"""

import math

import numpy as np
import pytest
from scipy import special

from secrecy_outage.errors import DomainError, NoConvergence
from secrecy_outage.mathkit import (QuadratureSpec, bessel_k1, exp_scaled_e1, gamma_fn,
                                    gamma_upper_inc, hyp2f1_special, integrate_1d,
                                    integrate_2d_polar, integrate_semi_infinite,
                                    psi_alpha2_closed, psi_kernel)

# ∫_0^20 e^{-x} cos 5x dx
DAMPED_COSINE_INTEGRAL = (1.0 - math.exp(-20.0) * (math.cos(100.0) - 5.0 * math.sin(100.0))) / 26.0


@pytest.mark.unit
def test_gamma_values():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)
    with pytest.raises(DomainError):
        gamma_fn(0.0)


@pytest.mark.unit
@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 4.0, 25.0])
def test_upper_incomplete_gamma_half(x):
    expected = math.sqrt(math.pi) * math.erfc(math.sqrt(x))
    assert gamma_upper_inc(0.5, x) == pytest.approx(expected, rel=1e-12, abs=1e-300)


@pytest.mark.unit
def test_upper_incomplete_gamma_rejects_negative_limit():
    with pytest.raises(DomainError):
        gamma_upper_inc(1.0, -1.0)


@pytest.mark.unit
def test_bessel_k1_reference_and_small_argument():
    assert bessel_k1(1.0) == pytest.approx(0.6019072301972346, rel=1e-14)
    for x in (1e-9, 5e-7, 2e-6):
        assert bessel_k1(x) == pytest.approx(float(special.k1(x)), rel=1e-10)
    # Still finite where 1/x is huge
    assert math.isfinite(bessel_k1(1e-300))
    with pytest.raises(DomainError):
        bessel_k1(-1.0)


@pytest.mark.unit
def test_exp_scaled_e1_reference():
    assert exp_scaled_e1(1.0) == pytest.approx(0.596347362323194, rel=1e-13)
    for x in (0.5, 10.0, 49.0, 51.0, 120.0, 500.0):
        assert exp_scaled_e1(x) == pytest.approx(math.exp(x) * float(special.exp1(x)), rel=1e-11)


@pytest.mark.unit
def test_exp_scaled_e1_sandwich_and_vectorised():
    xs = np.geomspace(1e-3, 1e4, 60)
    values = exp_scaled_e1(xs)
    assert values.shape == xs.shape
    assert np.all(values > 1.0 / (xs + 1.0))
    assert np.all(values < 1.0 / xs)
    with pytest.raises(DomainError):
        exp_scaled_e1(np.array([1.0, 0.0]))


@pytest.mark.unit
def test_integrate_1d_polynomial_and_breakpoints():
    res = integrate_1d(lambda x: x * x, 0.0, 3.0)
    assert res.value == pytest.approx(9.0, rel=1e-12)
    kink = integrate_1d(lambda x: abs(x - 0.3), 0.0, 1.0, points=[0.3, 5.0])
    assert kink.value == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, rel=1e-12)
    assert integrate_1d(math.sin, 2.0, 2.0).value == 0.0


@pytest.mark.unit
def test_integrate_1d_raises_on_divergent_integrand():
    spec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14, max_subdivisions=5)
    with pytest.raises(NoConvergence) as excinfo:
        integrate_1d(lambda x: 1.0 / x, 0.0, 1.0, spec)
    assert excinfo.value.error > 0


@pytest.mark.unit
def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0.0)
    loose = QuadratureSpec().loosened(10.0)
    assert loose.rel_tol == pytest.approx(1e-7)


@pytest.mark.unit
def test_integrate_semi_infinite():
    res = integrate_semi_infinite(lambda x: math.exp(-x), scale=1.0)
    assert res.value == pytest.approx(1.0, rel=1e-10)
    res = integrate_semi_infinite(lambda x: math.exp(-x / 250.0), scale=250.0)
    assert res.value == pytest.approx(250.0, rel=1e-9)


@pytest.mark.unit
def test_integrate_2d_polar_disk_area():
    area = integrate_2d_polar(lambda r, t: r, 2.0)
    assert area.value == pytest.approx(4.0 * math.pi, rel=1e-10)
    half = integrate_2d_polar(lambda r, t: r * (1.0 + math.cos(t)), 2.0, theta_symmetric=True)
    assert half.value == pytest.approx(4.0 * math.pi, rel=1e-10)


@pytest.mark.unit
@pytest.mark.parametrize("b", [0.25, 0.5, 2.0 / 3.0, 0.8])
@pytest.mark.parametrize("z", [0.0, 1e-3, 0.7, 12.0, 1e5])
def test_hyp2f1_special_matches_scipy(b, z):
    assert hyp2f1_special(b, z) == pytest.approx(float(special.hyp2f1(1.0, b, 1.0 + b, -z)),
                                                 rel=1e-10)


@pytest.mark.unit
def test_hyp2f1_special_closed_forms():
    z = 37.0
    assert hyp2f1_special(1.0, z) == pytest.approx(math.log1p(z) / z, rel=1e-12)
    assert hyp2f1_special(0.5, z) == pytest.approx(math.atan(math.sqrt(z)) / math.sqrt(z), rel=1e-12)
    with pytest.raises(DomainError):
        hyp2f1_special(1.5, 1.0)


@pytest.mark.unit
@pytest.mark.parametrize("y, delta", [(1e-3, 0.1), (0.5, 0.1), (3.0, 0.2), (80.0, 0.5), (2e3, 0.9)])
def test_psi_kernel_matches_alpha2_closed_form(y, delta):
    assert psi_kernel(y, 2.0, delta) == pytest.approx(psi_alpha2_closed(y, delta), abs=1e-6)


@pytest.mark.unit
def test_psi_kernel_limits():
    assert psi_kernel(0.0, 3.0, 0.2) == 0.0
    # Ψ increases with y towards π
    values = [psi_kernel(y, 3.0, 0.2) for y in (0.1, 10.0, 1e4)]
    assert values[0] < values[1] < values[2] < math.pi
    assert values[2] > 0.99 * math.pi


@pytest.mark.unit
@pytest.mark.parametrize("f, a, b, exact", [
    (math.sqrt, 0.0, 1.0, 2.0 / 3.0),
    (lambda x: math.log(x) if x > 0 else 0.0, 0.0, 1.0, -1.0),
    (lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0, 0.0, 4.0, 4.0),
    (lambda x: math.exp(-x) * math.cos(5.0 * x), 0.0, 20.0, DAMPED_COSINE_INTEGRAL),
])
def test_integrate_1d_error_estimate_covers_the_true_error(f, a, b, exact):
    loose = QuadratureSpec(rel_tol=1e-5, abs_tol=1e-8)
    result = integrate_1d(f, a, b, loose)
    # A few ulps of round-off on top of the estimate
    assert abs(result.value - exact) <= result.error + 8.0 * np.finfo(float).eps * abs(exact)


@pytest.mark.unit
def test_psi_never_exceeds_pi_on_random_arguments():
    rng = np.random.default_rng(20240611)
    for _ in range(12):
        y = float(10.0 ** rng.uniform(-3.0, 3.0))
        alpha = float(rng.uniform(2.0, 5.0))
        delta = float(rng.uniform(0.05, 0.9))
        value = psi_kernel(y, alpha, delta)
        assert 0.0 <= value <= math.pi + 1e-9
        assert psi_alpha2_closed(y, delta) <= math.pi + 1e-9


@pytest.mark.unit
@pytest.mark.parametrize("b", [0.2, 0.5, 2.0 / 3.0, 1.0])
def test_hyp2f1_special_decreases_in_z(b):
    z = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 40)])
    values = np.array([hyp2f1_special(b, float(x)) for x in z])
    assert values[0] == 1.0
    assert np.all(np.diff(values) < 0.0)
    assert values[-1] > 0.0
