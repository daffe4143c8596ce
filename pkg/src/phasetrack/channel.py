"""Channel realizations: ISI transforms, Wiener phase trajectories, AWGN.

Randomness is drawn from counter-style substreams keyed by
(global seed, frame index, substream id), so frames are reproducible and
independent of execution order or thread count. The frame index alone (not
the sweep grid index) keys the stream: sweep points then share underlying
standard-normal draws, which smooths rate curves across a grid without
affecting any single-point statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import wrap_angle

# Substream ids.
STREAM_THETA = 0
STREAM_MESSAGE = 1
STREAM_NOISE_W = 2
STREAM_NOISE_N = 3

# Frame-index offset reserved for metric-calibration frames so they never
# overlap evaluation frames.
CALIBRATION_FRAME_OFFSET = 1_000_000

PROAKIS_C_TAPS = np.array([0.227, 0.460, 0.688, 0.460, 0.227])


def substream(seed, frame_index, stream_id):
    """Deterministic per-frame generator."""
    return np.random.default_rng([int(seed), int(frame_index), int(stream_id)])


@dataclass(frozen=True)
class PnParams:
    nu_delta: float

    def __post_init__(self):
        if not np.isfinite(self.nu_delta) or self.nu_delta < 0:
            raise ValueError("nu_delta must be finite and >= 0")


@dataclass(frozen=True)
class NoiseParams:
    nu_n: float = 0.0
    nu_w: float = 0.0

    def __post_init__(self):
        for v in (self.nu_n, self.nu_w):
            if not np.isfinite(v) or v < 0:
                raise ValueError("noise variances must be finite and >= 0")


def sample_wiener_phase(n, params, rng):
    """Random-walk phase: theta0 ~ U[-pi, pi), Gaussian increments."""
    if n < 1:
        raise ValueError("n must be >= 1")
    theta0 = rng.uniform(-np.pi, np.pi)
    steps = rng.standard_normal(n) * np.sqrt(params.nu_delta)
    return wrap_angle(theta0 + np.cumsum(steps))


def sample_cscg(n, variance, rng):
    """CSCG vector with per-entry variance."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z * np.sqrt(variance / 2.0)


class Identity:
    """No ISI."""

    is_unitary = True

    def apply(self, x):
        return np.asarray(x, dtype=np.complex128)

    def equalize(self, y):
        return np.asarray(y, dtype=np.complex128)


class ChromaticDispersion:
    """All-pass quadratic-phase distortion applied per block via the DFT.

    The per-block circular transform keeps the channel exactly unitary;
    defaults are 10 km of SSMF (beta2 = -21.7 ps^2/km) at 64 GBd.
    """

    is_unitary = True

    def __init__(self, beta2_ps2_per_km=-21.7, length_km=10.0, symbol_rate_gbd=64.0):
        self.beta2_ps2_per_km = float(beta2_ps2_per_km)
        self.length_km = float(length_km)
        self.symbol_rate_gbd = float(symbol_rate_gbd)
        self._response = {}

    def response(self, n):
        """Per-bin factor exp(-j (beta2 L / 2) omega^2), |.| = 1."""
        if n not in self._response:
            rate_hz = self.symbol_rate_gbd * 1e9
            omega = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / rate_hz)
            beta2_l = self.beta2_ps2_per_km * 1e-24 * self.length_km
            self._response[n] = np.exp(-1j * (beta2_l / 2.0) * omega**2)
        return self._response[n]

    def apply(self, x):
        x = np.asarray(x, dtype=np.complex128)
        return np.fft.ifft(self.response(len(x)) * np.fft.fft(x))

    def equalize(self, y):
        y = np.asarray(y, dtype=np.complex128)
        return np.fft.ifft(np.conj(self.response(len(y))) * np.fft.fft(y))


class CirculantOfdm:
    """Circulant multipath channel driven by frequency-domain symbols.

    Input x lives in the frequency domain; the transform is
    F^H (Delta . x) with Delta the un-normalized DFT of the taps
    (Delta_0 = sum of taps).
    """

    is_unitary = False

    def __init__(self, taps=PROAKIS_C_TAPS):
        taps = np.asarray(taps, dtype=np.float64)
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        self.taps = taps
        self._delta = {}

    def gains(self, n):
        """Diagonal Delta_k, k = 0..n-1."""
        if n not in self._delta:
            self._delta[n] = np.fft.fft(self.taps, n)
        return self._delta[n]

    def apply(self, x):
        x = np.asarray(x, dtype=np.complex128)
        return np.fft.ifft(self.gains(len(x)) * x, norm="ortho")

    def equalize(self, y):
        return np.fft.fft(np.asarray(y, dtype=np.complex128), norm="ortho")


def apply_isi(channel, x):
    return channel.apply(x)


def apply_pn_channel(z, theta, noise, rng):
    """y_i = z_i e^{j theta_i} + w_i with w ~ CN(0, nu_w)."""
    z = np.asarray(z, dtype=np.complex128)
    theta = np.asarray(theta, dtype=np.float64)
    if len(z) != len(theta):
        raise ValueError("z and theta length mismatch")
    y = z * np.exp(1j * theta)
    if noise.nu_w > 0:
        y = y + sample_cscg(len(z), noise.nu_w, rng)
    return y


def make_channel(kind, **kwargs):
    """Channel factory for config-file names."""
    kind = kind.lower()
    if kind == "identity":
        return Identity()
    if kind == "cd":
        return ChromaticDispersion(**kwargs)
    if kind in ("ofdm", "ofdm_proakis_c"):
        return CirculantOfdm(**kwargs)
    raise ValueError(f"unknown channel kind: {kind}")
