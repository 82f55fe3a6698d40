import math

import mpmath as mp
import numpy as np
import pytest

from thprates.numerics import (QuadratureError, erf, erfc, integrate,
                               std_normal_cdf, std_normal_pdf, std_normal_ppf)

mp.mp.dps = 30


def test_erf_trivial_points():
    assert erf(0.0) == 0.0
    for x in [0.3, 1.0, 2.7, 5.5, 9.0]:
        assert erf(x) + erf(-x) == pytest.approx(0.0, abs=1e-16)


def test_erf_against_high_precision_oracle():
    # dense grid across both algorithm branches
    for x in np.arange(-8.0, 8.01, 0.13):
        ref = float(mp.erf(mp.mpf(x)))
        assert abs(erf(x) - ref) < 1e-13, f"erf({x})"


def test_erf_spot_value():
    assert erf(1.0) == pytest.approx(0.842700792949715, abs=1e-14)


def test_erf_monotone_and_bounded():
    xs = np.linspace(-10, 10, 401)
    vals = erf(xs)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(np.abs(vals[np.isfinite(xs)]) <= 1.0)
    assert abs(erf(25.0)) <= 1.0


def test_erfc_relative_accuracy_in_tail():
    for x in [2.0, 3.0, 5.0, 8.0, 12.31, 20.0, 25.0]:
        ref = float(mp.erfc(mp.mpf(x)))
        assert erfc(x) == pytest.approx(ref, rel=1e-12), f"erfc({x})"
    assert erfc(-3.0) == pytest.approx(float(mp.erfc(-3)), rel=1e-14)


def test_normal_pdf_cdf():
    assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-15)
    assert std_normal_cdf(0.0) == 0.5
    # derived via the erf oracle: Phi(1.96) = (1 + erf(1.96/sqrt(2)))/2
    assert std_normal_cdf(1.96) == pytest.approx(0.975002104851780, abs=1e-12)


def test_cdf_erf_consistency_grid():
    for x in np.arange(-6.0, 6.01, 0.1):
        assert abs(std_normal_cdf(x) - 0.5 * (1 + erf(x / math.sqrt(2)))) < 1e-12


def test_ppf_round_trip_and_oracle():
    ps = np.concatenate([np.linspace(1e-10, 1 - 1e-10, 101), [1e-15, 1 - 1e-15]])
    for p in ps:
        x = std_normal_ppf(p)
        assert std_normal_cdf(x) == pytest.approx(p, abs=2e-14, rel=1e-12)
    assert std_normal_ppf(0.975) == pytest.approx(1.959963984540054, abs=1e-13)
    with pytest.raises(ValueError):
        std_normal_ppf(0.0)
    with pytest.raises(ValueError):
        std_normal_ppf(1.0)


def test_integrate_polynomials():
    assert integrate(lambda x: np.ones_like(x), 0, 1).value == pytest.approx(1.0, abs=1e-14)
    assert integrate(lambda x: x, -1, 1).value == pytest.approx(0.0, abs=1e-14)
    assert integrate(lambda x: x * x, 0, 1).value == pytest.approx(1.0 / 3.0, abs=1e-14)
    # a single 15-point panel is exact through degree 29
    res = integrate(lambda x: x ** 29 + x ** 12, 0, 1, tol=1e-12)
    assert res.value == pytest.approx(1.0 / 30.0 + 1.0 / 13.0, abs=1e-13)


def test_integrate_gaussian_mass():
    f = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    res = integrate(f, -8, 8, tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.abs_error_estimate >= 0.0


def test_integrate_linearity():
    f = lambda x: np.exp(-x) * np.sin(3 * x)
    g = lambda x: np.cos(x) ** 2
    tol = 1e-10
    lhs = integrate(lambda x: 2.5 * f(x) - 1.75 * g(x), 0, 4, tol=tol).value
    rhs = 2.5 * integrate(f, 0, 4, tol=tol).value - 1.75 * integrate(g, 0, 4, tol=tol).value
    assert abs(lhs - rhs) < 10 * tol


def test_integrate_validation_and_budget():
    with pytest.raises(ValueError):
        integrate(lambda x: x, 1, 0)
    with pytest.raises(ValueError):
        integrate(lambda x: x, 0, 1, tol=0.0)
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda x: np.sin(1e9 * x), 0, 1, tol=1e-12)
    assert math.isfinite(exc.value.best)


def test_gl_nodes_match_reference():
    # frozen constants vs an independently computed rule
    from numpy.polynomial.legendre import leggauss
    from thprates.numerics import _GL15_NODES, _GL15_WEIGHTS
    nodes, weights = leggauss(15)
    assert np.allclose(_GL15_NODES, nodes, atol=1e-15)
    assert np.allclose(_GL15_WEIGHTS, weights, atol=1e-15)
