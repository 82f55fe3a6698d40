import numpy as np
import pytest
from scipy import stats

from thprates.bounds import NoiseModel
from thprates.channel import RngStream, estimate_residual_variance, gen_channel
from thprates.modulo import Modulus
from thprates.precoder import (PrecoderSet, SingularChannelError, lq_decompose,
                               receiver_decode, synthesize_mmse, synthesize_zf,
                               thp_encode)

M1 = Modulus(1.0)


def test_lq_identity():
    l, q = lq_decompose(np.eye(3))
    assert np.allclose(l, np.eye(3), atol=1e-14)
    assert np.allclose(q, np.eye(3), atol=1e-14)


def test_lq_sign_convention():
    l, q = lq_decompose(np.diag([-2.0, 3.0]))
    assert np.allclose(l, np.diag([2.0, 3.0]), atol=1e-14)
    assert np.allclose(q, np.diag([-1.0, 1.0]), atol=1e-14)


def test_lq_reconstruction_random():
    h = gen_channel(4, 4, RngStream(5))
    l, q = lq_decompose(h)
    assert np.linalg.norm(l @ q - h) < 1e-10
    assert np.linalg.norm(q @ q.T - np.eye(4)) < 1e-10
    assert np.all(np.diag(l) > 0)
    assert np.allclose(l, np.tril(l), atol=1e-14)


def test_lq_wide_channel():
    h = gen_channel(3, 6, RngStream(6))
    l, q = lq_decompose(h)
    assert l.shape == (3, 3) and q.shape == (3, 6)
    assert np.linalg.norm(l @ q - h) < 1e-10
    assert np.linalg.norm(q @ q.T - np.eye(3)) < 1e-10


def test_lq_singular_names_row():
    h = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularChannelError) as exc:
        lq_decompose(h)
    assert exc.value.row in (1, 2)
    assert "rank deficient" in str(exc.value)


def test_channel_validation():
    with pytest.raises(ValueError):
        lq_decompose(np.ones((3, 2)))  # more users than antennas
    with pytest.raises(ValueError):
        lq_decompose(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_zf_identity_channel():
    pset = synthesize_zf(np.eye(2))
    for mat in (pset.f, pset.g, pset.b):
        assert np.allclose(mat, np.eye(2), atol=1e-14)


def test_zf_hand_example():
    h = np.array([[2.0, 0.0], [1.0, 1.0]])
    pset = synthesize_zf(h)
    assert np.allclose(pset.l, h, atol=1e-12)
    assert np.allclose(pset.q, np.eye(2), atol=1e-12)
    assert np.allclose(pset.g, np.diag([0.5, 1.0]), atol=1e-14)
    assert np.allclose(pset.b, np.array([[1.0, 0.0], [1.0, 1.0]]), atol=1e-12)


def test_zf_filter_algebra_seeded():
    for i in range(20):
        h = gen_channel(4, 4, RngStream(7, i))
        pset = synthesize_zf(h)
        assert np.linalg.norm(pset.g @ h @ pset.f - pset.b) < 1e-10
        assert np.array_equal(np.diag(pset.b), np.ones(4))


def test_mmse_zero_reg_equals_zf():
    h = gen_channel(4, 4, RngStream(8))
    noise = NoiseModel.from_snr_db(10.0, p_total=M1.p_t)
    zf = synthesize_zf(h)
    mmse0 = synthesize_mmse(h, noise, M1, regularization=0.0)
    for a, b in ((zf.f, mmse0.f), (zf.b, mmse0.b), (zf.g, mmse0.g)):
        assert np.linalg.norm(a - b) < 1e-10


def test_mmse_residual_grows_with_regularization():
    h = gen_channel(4, 4, RngStream(9))
    noise = NoiseModel.from_snr_db(10.0, p_total=M1.p_t)
    prev = -1.0
    f_norms = []
    for reg in (1e-4, 1e-2, 1.0, 1e2, 1e6):
        pset = synthesize_mmse(h, noise, M1, regularization=reg)
        resid = np.linalg.norm(pset.residual())
        assert resid >= prev
        prev = resid
        f_norms.append(np.linalg.norm(pset.f))
    assert f_norms[-1] < 10 * f_norms[0]  # feedforward stays bounded


def test_mmse_default_reg_residual_envelope():
    noise = NoiseModel.from_snr_db(10.0, p_total=M1.p_t)
    h = gen_channel(4, 4, RngStream(10))
    pset = synthesize_mmse(h, noise, M1)
    assert pset.regularization == pytest.approx(4 * noise.sigma_n2 * 12.0, rel=1e-12)
    sigma_s2 = estimate_residual_variance(pset, M1, trials=20_000, rng=RngStream(10, 1))
    assert 0.0 < sigma_s2 < 10.0 * noise.sigma_n2


def test_thp_encode_identity_feedback():
    pset = synthesize_zf(np.eye(3))
    w = np.array([0.3, -0.2, 0.45])
    x, v = thp_encode(w, pset, M1)
    assert np.array_equal(v, w)
    assert np.allclose(x, w, atol=1e-15)


def test_thp_encode_hand_recursions():
    h = np.array([[1.0, 0.0], [1.0, 1.0]])  # gives B = [[1,0],[1,1]]
    pset = synthesize_zf(h)
    _, v = thp_encode(np.array([0.3, 0.4]), pset, M1)
    assert v == pytest.approx([0.3, 0.1], abs=1e-12)

    pset_b = PrecoderSet(h=h, l=pset.l, q=pset.q, f=pset.f,
                         b=np.array([[1.0, 0.0], [0.9, 1.0]]), g=pset.g,
                         kind="zf", ordering=(0, 1))
    _, v = thp_encode(np.array([0.4, 0.4]), pset_b, M1)
    assert v == pytest.approx([0.4, 0.04], abs=1e-12)


def test_thp_encode_validation():
    pset = synthesize_zf(np.eye(2))
    with pytest.raises(ValueError):
        thp_encode(np.array([0.3, 0.7]), pset, M1)  # outside the cell
    with pytest.raises(ValueError):
        thp_encode(np.array([0.1, 0.1, 0.1]), pset, M1)


def test_encoder_outputs_in_cell_and_power_preserved():
    h = gen_channel(4, 4, RngStream(15))
    pset = synthesize_zf(h)
    w = RngStream(15, 1).uniform(-M1.half, M1.half, (4, 100_000))
    x, v = thp_encode(w, pset, M1)
    assert np.all(v >= -M1.half) and np.all(v < M1.half)
    # orthonormal feedforward columns: per-use norm preserved exactly
    assert np.max(np.abs(np.sum(x ** 2, axis=0) - np.sum(v ** 2, axis=0))) < 1e-12
    power = np.mean(np.sum(x ** 2, axis=0))
    assert power == pytest.approx(4 * M1.p_t, rel=0.01)


def test_encoder_uniformity_per_user():
    h = gen_channel(4, 4, RngStream(16))
    pset = synthesize_zf(h)
    w = RngStream(16, 1).uniform(-M1.half, M1.half, (4, 250_000))
    _, v = thp_encode(w, pset, M1)
    for i in range(4):
        counts, _ = np.histogram(v[i], bins=64, range=(-M1.half, M1.half))
        assert stats.chisquare(counts).pvalue > 1e-3


def test_receiver_decode_basics():
    pset = synthesize_zf(np.eye(2))
    assert np.array_equal(receiver_decode(np.zeros(2), pset, 1.0, M1), np.zeros(2))
    y = np.array([0.2, -0.3])
    assert receiver_decode(y, pset, 0.9, M1) == pytest.approx(0.9 * y, abs=1e-15)


def test_noiseless_end_to_end():
    for i in range(100):
        rng = RngStream(17, i)
        h = gen_channel(4, 4, rng)
        pset = synthesize_zf(h)
        w = rng.uniform(-M1.half, M1.half, 4)
        x, _ = thp_encode(w, pset, M1)
        z = receiver_decode(h @ x, pset, alpha=1.0, m=M1)
        assert np.max(np.abs(z - w)) < 1e-9


def test_ordering_hook_round_trip():
    rng = RngStream(18)
    h = gen_channel(4, 4, rng)
    pset = synthesize_zf(h, ordering=(2, 0, 3, 1))
    assert pset.ordering == (2, 0, 3, 1)
    w = rng.uniform(-M1.half, M1.half, 4)
    x, _ = thp_encode(w, pset, M1)
    z = receiver_decode(h @ x, pset, alpha=1.0, m=M1)
    assert np.max(np.abs(z - w)) < 1e-9
    with pytest.raises(ValueError):
        synthesize_zf(h, ordering=(0, 0, 1, 2))
