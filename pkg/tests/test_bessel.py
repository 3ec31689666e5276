import math

import numpy as np
import pytest

from alpha_vortex import DomainError, bessel_k0, bessel_k1
from alpha_vortex.bessel import one_minus_xk1
from alpha_vortex.oracles import bessel_k_quadrature

# Frozen from 40-digit mpmath quadrature of int_0^inf exp(-x cosh t) cosh(nu t) dt.
K0_AT_1 = 0.42102443824070834
K1_AT_1 = 0.6019072301972346
K0_AT_50 = 3.4101677497894956e-23


def test_k0_k1_at_one_match_frozen_oracle():
    assert abs(bessel_k0(1.0) - K0_AT_1) <= 1e-9
    assert abs(bessel_k1(1.0) - K1_AT_1) <= 1e-9


def test_k0_tail_at_50():
    v = bessel_k0(50.0)
    assert v < 1e-20
    assert v == pytest.approx(K0_AT_50, rel=1e-12)
    assert v == pytest.approx(math.sqrt(math.pi / 100) * math.exp(-50), rel=5e-3)


@pytest.mark.parametrize("x", [1e-6, 1e-4, 1e-2, 0.5, 1.9999, 2.0, 2.0001, 3.7, 10.0, 25.0, 50.0])
def test_against_live_quadrature_oracle(x):
    assert abs(bessel_k0(x) - bessel_k_quadrature(0, x)) <= 1e-9
    assert abs(bessel_k1(x) - bessel_k_quadrature(1, x)) <= 1e-9


def test_relative_accuracy_dense_grid():
    special = pytest.importorskip("scipy.special")
    x = np.geomspace(1e-6, 50.0, 5001)
    assert np.max(np.abs(bessel_k0(x) / special.k0(x) - 1)) < 1e-13
    assert np.max(np.abs(bessel_k1(x) / special.k1(x) - 1)) < 1e-13


def test_log_singularity_and_small_argument_limit():
    ratios = [bessel_k0(x) / math.log(1 / x) for x in (1e-3, 1e-4, 1e-5)]
    gaps = [abs(r - 1) for r in ratios]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(1e-3 * bessel_k1(1e-3) - 1) <= 1e-4


def test_k1_is_minus_k0_derivative_at_10():
    h = 1e-4
    fd = -(bessel_k0(10 + h) - bessel_k0(10 - h)) / (2 * h)
    assert abs(fd - bessel_k1(10.0)) <= 1e-6


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_k0(bad)
    with pytest.raises(DomainError):
        bessel_k1(bad)


def test_array_input_keeps_shape():
    x = np.array([[0.5, 1.0], [2.0, 4.0]])
    assert bessel_k0(x).shape == (2, 2)


def test_one_minus_xk1_has_no_cancellation_near_zero():
    # 1 - x K1(x) ~ (x^2/4)(1 - 2 log(x/2) - 2 gamma_E + 1) for small x
    x = 1e-7
    approx = x * x / 4 * (2 * math.log(2 / x) - 2 * 0.5772156649015329 + 1)
    assert one_minus_xk1(x) == pytest.approx(approx, rel=1e-10)
    assert one_minus_xk1(0.0) == 0.0
    assert one_minus_xk1(45.0) == 1.0
