"""Channel model tests: substream determinism, phase trajectories, ISI
transforms, and additive noise moments."""

import numpy as np
import pytest

from phasetrack.channel import (
    PROAKIS_C_TAPS,
    STREAM_NOISE_W,
    STREAM_THETA,
    ChromaticDispersion,
    CirculantOfdm,
    Identity,
    NoiseParams,
    PnParams,
    apply_pn_channel,
    make_channel,
    sample_cscg,
    sample_wiener_phase,
    substream,
)
from phasetrack.numerics import wrap_angle


def test_substream_reproducible_and_keyed():
    a = substream(1, 5, STREAM_THETA).standard_normal(8)
    b = substream(1, 5, STREAM_THETA).standard_normal(8)
    assert np.array_equal(a, b)
    c = substream(1, 6, STREAM_THETA).standard_normal(8)
    d = substream(1, 5, STREAM_NOISE_W).standard_normal(8)
    e = substream(2, 5, STREAM_THETA).standard_normal(8)
    for other in (c, d, e):
        assert not np.array_equal(a, other)


def test_wiener_phase_increment_moments():
    nu_delta = 0.02
    rng = np.random.default_rng(3)
    theta = sample_wiener_phase(200000, PnParams(nu_delta), rng)
    inc = wrap_angle(np.diff(theta))
    assert np.mean(inc) == pytest.approx(0.0, abs=3e-3)
    assert np.var(inc) == pytest.approx(nu_delta, rel=0.02)
    assert np.all(theta >= -np.pi) and np.all(theta < np.pi)


def test_wiener_phase_zero_variance_is_constant():
    theta = sample_wiener_phase(100, PnParams(0.0), np.random.default_rng(0))
    assert np.max(np.abs(wrap_angle(theta - theta[0]))) < 1e-12


def test_wiener_phase_initial_uniform():
    starts = np.array(
        [sample_wiener_phase(1, PnParams(0.0), np.random.default_rng(i))[0] for i in range(4000)]
    )
    assert np.mean(np.exp(1j * starts)) == pytest.approx(0.0, abs=0.06)


def test_params_reject_bad_values():
    with pytest.raises(ValueError):
        PnParams(-1.0)
    with pytest.raises(ValueError):
        NoiseParams(nu_w=np.inf)


def test_cscg_moments():
    rng = np.random.default_rng(4)
    z = sample_cscg(200000, 2.5, rng)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2.5, rel=0.02)
    assert np.mean(z) == pytest.approx(0.0, abs=0.02)
    assert np.mean(z**2) == pytest.approx(0.0, abs=0.02)  # circular symmetry


@pytest.mark.parametrize("channel", [Identity(), ChromaticDispersion()])
def test_unitary_channels_preserve_energy_and_invert(channel):
    rng = np.random.default_rng(5)
    x = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    y = channel.apply(x)
    assert np.sum(np.abs(y) ** 2) == pytest.approx(np.sum(np.abs(x) ** 2), rel=1e-12)
    assert np.max(np.abs(channel.equalize(y) - x)) < 1e-10


def test_cd_response_allpass_and_nontrivial():
    ch = ChromaticDispersion()
    resp = ch.response(1024)
    assert np.max(np.abs(np.abs(resp) - 1.0)) < 1e-12
    # The default fiber spreads energy: a unit impulse is dispersed.
    imp = np.zeros(1024, dtype=complex)
    imp[0] = 1.0
    out = ch.apply(imp)
    assert np.abs(out[0]) < 0.99


def test_cd_constant_input_passthrough():
    # DC sees the omega = 0 response, so a constant block is unchanged.
    ch = ChromaticDispersion()
    x = np.full(256, 0.3 + 0.1j)
    assert np.max(np.abs(ch.apply(x) - x)) < 1e-12


def test_ofdm_gains_are_tap_dft():
    ch = CirculantOfdm()
    n = 128
    gains = ch.gains(n)
    k = np.arange(n)
    want = np.sum(
        PROAKIS_C_TAPS[None, :] * np.exp(-2j * np.pi * np.outer(k, np.arange(5)) / n),
        axis=1,
    )
    assert np.max(np.abs(gains - want)) < 1e-12
    assert gains[0] == pytest.approx(np.sum(PROAKIS_C_TAPS))
    assert abs(gains[0]) == pytest.approx(2.062)
    assert np.argmax(np.abs(gains)) == 0


def test_ofdm_apply_is_circular_convolution():
    # Diagonal frequency gains = circular convolution with the taps in time.
    ch = CirculantOfdm()
    n = 64
    rng = np.random.default_rng(6)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = ch.apply(x)
    x_time = np.fft.ifft(x, norm="ortho")
    taps = np.zeros(n)
    taps[:5] = PROAKIS_C_TAPS
    want = np.fft.ifft(np.fft.fft(taps) * np.fft.fft(x_time))
    assert np.max(np.abs(y - want)) < 1e-12


def test_ofdm_equalize_recovers_frequency_domain():
    ch = CirculantOfdm()
    rng = np.random.default_rng(7)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    y2 = ch.equalize(ch.apply(x))
    assert np.max(np.abs(y2 - ch.gains(64) * x)) < 1e-12


def test_apply_pn_channel_noiseless_and_moments():
    rng = np.random.default_rng(8)
    z = rng.standard_normal(50000) + 1j * rng.standard_normal(50000)
    theta = rng.uniform(-np.pi, np.pi, 50000)
    y0 = apply_pn_channel(z, theta, NoiseParams(0.0, 0.0), rng)
    assert np.max(np.abs(y0 - z * np.exp(1j * theta))) < 1e-12
    y1 = apply_pn_channel(z, theta, NoiseParams(0.0, 0.5), np.random.default_rng(9))
    w = y1 - z * np.exp(1j * theta)
    assert np.mean(np.abs(w) ** 2) == pytest.approx(0.5, rel=0.03)


def test_apply_pn_channel_length_mismatch():
    with pytest.raises(ValueError):
        apply_pn_channel(np.zeros(3, complex), np.zeros(4), NoiseParams(), np.random.default_rng(0))


def test_make_channel_factory():
    assert isinstance(make_channel("identity"), Identity)
    assert isinstance(make_channel("cd"), ChromaticDispersion)
    assert isinstance(make_channel("ofdm_proakis_c"), CirculantOfdm)
    with pytest.raises(ValueError):
        make_channel("bogus")
