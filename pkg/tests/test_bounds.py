import math

import mpmath as mp
import numpy as np
import pytest

from thprates.bounds import (NoiseModel, RatePoint, alpha_mmse, asymptote,
                             awgn_capacity, bound_gap_new_vs_original,
                             bound_new, bound_new_from_entropy,
                             bound_original, shaping_loss_bits,
                             shaping_loss_db, snr_prime)

mp.mp.dps = 30


def bound_new_reference(sp):
    """Independent re-derivation of the new bound at 30 digits."""
    sp = mp.mpf(sp)
    z = mp.erf(mp.sqrt(mp.mpf(3) / 2 * (1 + sp)))
    return float(mp.mpf("0.5") * mp.log(12 * (1 + sp), 2) - mp.log(z, 2)
                 - mp.log(mp.sqrt(2 * mp.pi), 2) - 1 / (2 * z * mp.log(2)))


def bound_original_reference(s):
    s = mp.mpf(s)
    return float(mp.mpf("0.5") * mp.log(6 * (1 + s) / (mp.pi * mp.e), 2))


def test_alpha_mmse():
    assert alpha_mmse(1.0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert alpha_mmse(3.0) == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert alpha_mmse(1e12) == pytest.approx(1.0, abs=1e-12)
    snrs = np.geomspace(0.01, 100, 20)
    vals = [alpha_mmse(s) for s in snrs]
    assert np.all(np.diff(vals) > 0)
    assert all(0 < a < 1 for a in vals)
    with pytest.raises(ValueError):
        alpha_mmse(0.0)
    with pytest.raises(ValueError):
        alpha_mmse(-1.0)


def test_awgn_capacity():
    assert awgn_capacity(0.0) == 0.0
    assert awgn_capacity(1.0) == pytest.approx(0.5, abs=1e-15)
    assert awgn_capacity(3.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        awgn_capacity(-0.1)


def test_bound_original():
    zero_snr = math.pi * math.e / 6.0 - 1.0
    assert bound_original(zero_snr) == pytest.approx(0.0, abs=1e-14)
    assert bound_original(1.0) == pytest.approx(bound_original_reference(1.0), abs=1e-14)
    assert bound_original(1.0) == pytest.approx(0.2453856651799370, abs=1e-13)
    assert bound_original(1e6) == pytest.approx(asymptote(1e6), abs=1e-6)
    assert bound_original(0.1) < 0  # unclamped at low snr


def test_bound_new_matches_independent_rederivation():
    for sp in (0.0, 0.1, 1.0, 3.0, 10.0, 100.0, 1e4, 1e6):
        assert bound_new(sp) == pytest.approx(bound_new_reference(sp), abs=1e-12), sp
    assert bound_new(1.0) == pytest.approx(0.2557044557561508, abs=1e-13)


def test_bound_new_asymptotics_and_ordering():
    sp = 1e6
    assert bound_new(sp) == pytest.approx(0.5 * math.log2(6 * (1 + sp) / (math.pi * math.e)),
                                          abs=1e-3)
    assert bound_new(1.0) > bound_original(1.0)
    with pytest.raises(ValueError):
        bound_new(-0.5)


def test_bound_gap_matches_difference_where_representable():
    for s in (0.0, 0.5, 1.0, 3.0, 10.0):
        direct = bound_new_reference(s) - bound_original_reference(s)
        assert bound_gap_new_vs_original(s) == pytest.approx(direct, rel=1e-10)
    # strictly positive through the float-saturated region below 20 dB
    for db in range(-10, 20):
        assert bound_gap_new_vs_original(10 ** (db / 10)) > 0.0


def test_scale_freedom():
    for sp in (0.1, 1.0, 10.0, 100.0):
        ref = bound_new(sp)
        for t in (0.1, 1.0, 7.3):
            assert bound_new_from_entropy(sp, t=t) == pytest.approx(ref, abs=1e-10)


def test_asymptote():
    assert asymptote(math.pi * math.e / 6.0) == pytest.approx(0.0, abs=1e-14)
    assert asymptote(math.pi * math.e / 3.0) == pytest.approx(0.5, abs=1e-14)
    for s in (1.0, 10.0, 100.0):
        ident = bound_original(s) - asymptote(s)
        assert ident == pytest.approx(0.5 * math.log2(1 + 1 / s), abs=1e-12)
    with pytest.raises(ValueError):
        asymptote(0.0)


def test_shaping_loss():
    assert shaping_loss_db() == pytest.approx(1.533, abs=1e-3)
    assert shaping_loss_bits() == pytest.approx(0.2546, abs=1e-4)
    # unit-conversion identity
    assert 10 * math.log10(2 ** (2 * shaping_loss_bits())) == pytest.approx(
        shaping_loss_db(), abs=1e-12)


def test_snr_prime():
    assert snr_prime(1.0, 0.0, 0.5) == pytest.approx(1.0 / 0.5)
    assert snr_prime(1.0, 0.5, 0.5) == pytest.approx(1.0)
    assert snr_prime(1.0 / 12.0, 0.0, 1.0 / 12.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        snr_prime(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        snr_prime(1.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        snr_prime(1.0, 0.0, 0.0)


def test_noise_model():
    nm = NoiseModel.from_powers(p_total=1.0, sigma_s2=0.25, sigma_n2=0.25)
    assert nm.sigma2 == pytest.approx(nm.sigma_s2 + nm.sigma_n2, abs=0)
    assert nm.snr == pytest.approx(4.0)
    assert nm.snr_prime == pytest.approx(2.0)
    assert nm.snr_prime <= nm.snr
    assert nm.alpha == pytest.approx(math.sqrt(nm.snr_prime / (1 + nm.snr_prime)), abs=1e-15)

    nm2 = NoiseModel.from_snr_db(10.0, p_total=1.0 / 12.0)
    assert nm2.snr_prime == pytest.approx(nm2.snr)
    assert nm2.sigma_s2 == 0.0
    with pytest.raises(ValueError):
        NoiseModel.from_snr(0.0)


def test_monotonicity_of_curves():
    grid = [10 ** (db / 10) for db in range(-10, 31)]
    for fn in (awgn_capacity, bound_new, bound_original, asymptote):
        vals = [fn(s) for s in grid]
        assert np.all(np.diff(vals) > 0), fn.__name__


def test_fig3_ordering_property():
    for db in range(-10, 31):
        s = 10 ** (db / 10)
        assert awgn_capacity(s) >= bound_new(s) >= bound_original(s)
        if db < 20:
            assert awgn_capacity(s) - bound_new(s) > 0
            assert bound_gap_new_vs_original(s) > 0


def test_reachability_cap():
    # derived scale never exceeds the cell's uniform deviation
    for db in range(-20, 61, 4):
        nm = NoiseModel.from_snr(10 ** (db / 10), p_total=1.0 / 12.0)
        assert (nm.alpha ** 2) * nm.sigma2 * 12.0 <= 1.0 + 1e-12


def test_rate_point_defaults():
    p = RatePoint(snr_db=0.0, c_awgn=0.5, bound_original=0.24, bound_new=0.25,
                  asymptote=-0.25)
    assert p.exact_modt is None and p.mc_rate is None
    assert p.snr_prime_db is None and p.sigma_s2 is None
