"""Transmit frames: constellations, pilot schemes, power accounting,
waterfilling, and the side-information split x = p + m, s = Hp, t = Hm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CirculantOfdm, sample_cscg


def qam_points(order):
    """Square QAM, zero mean, unit average energy."""
    side = int(round(np.sqrt(order)))
    if side * side != order:
        raise ValueError("QAM order must be a perfect square")
    levels = np.arange(side) * 2.0 - (side - 1)
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


@dataclass(frozen=True)
class Constellation:
    kind: str  # "cscg" | "qam16" | "qam64"
    points: np.ndarray | None = None

    @staticmethod
    def make(kind):
        kind = kind.lower()
        if kind == "cscg":
            return Constellation("cscg", None)
        if kind in ("qam16", "qam64"):
            return Constellation(kind, qam_points(int(kind[3:])))
        raise ValueError(f"unknown constellation: {kind}")

    def draw(self, n, rng):
        """Unit-average-energy message symbols."""
        if self.kind == "cscg":
            return sample_cscg(n, 1.0, rng)
        idx = rng.integers(0, len(self.points), size=n)
        return self.points[idx]


@dataclass(frozen=True)
class PilotScheme:
    kind: str  # "superposed" | "interleaved" | "tone_zero"
    psr: float

    def __post_init__(self):
        if not (0.0 < self.psr <= 1.0):
            raise ValueError("psr must be in (0, 1]")
        if self.kind not in ("superposed", "interleaved", "tone_zero"):
            raise ValueError(f"unknown pilot scheme: {self.kind}")


@dataclass
class Frame:
    """One transmit block plus its deterministic side information."""

    x: np.ndarray  # channel input (time domain; frequency domain for OFDM)
    p: np.ndarray
    m: np.ndarray
    s: np.ndarray  # H p
    t: np.ndarray  # H m
    msg_mask: np.ndarray  # input-domain positions carrying message symbols
    msg_amp: np.ndarray  # per-position message amplitude (0 at pilot slots)
    msg_units: np.ndarray  # unit-energy message draws, m = msg_amp * msg_units
    nu_x: float
    nu_p: float
    nu_m: float
    nu_t: float
    allocation: np.ndarray | None = None  # OFDM per-tone powers


def waterfill(gains, total_power, noise_var):
    """Waterfilling over parallel subchannels with power gains |Delta_k|^2.

    Exact water level by sorting; p_k = (mu - noise_var/g_k)^+.
    """
    gains = np.asarray(gains, dtype=np.float64)
    if np.all(gains <= 0):
        raise ValueError("all-zero gains")
    if total_power <= 0:
        return np.zeros_like(gains)
    inv = np.where(gains > 0, noise_var / np.maximum(gains, 1e-300), np.inf)
    inv_sorted = np.sort(inv)
    n_finite = int(np.sum(np.isfinite(inv_sorted)))
    csum = np.cumsum(np.where(np.isfinite(inv_sorted), inv_sorted, 0.0))
    # The active set is the k tones with the smallest noise_var/gain; the
    # largest feasible k has water level above its worst active tone.
    k_active = 1
    for k in range(n_finite, 0, -1):
        if (total_power + csum[k - 1]) / k > inv_sorted[k - 1]:
            k_active = k
            break
    mu = (total_power + csum[k_active - 1]) / k_active
    alloc = np.maximum(mu - inv, 0.0)
    alloc[~np.isfinite(inv)] = 0.0
    return alloc


def build_frame(scheme, constellation, channel, n, nu_x, rng, noise_var_for_wf=None):
    """Assemble one frame for the given pilot scheme.

    noise_var_for_wf is the post-channel AWGN variance used by the OFDM
    waterfilling allocation (nu_w + nu_n).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    nu_p = scheme.psr * nu_x
    nu_m = nu_x - nu_p
    allocation = None

    if scheme.kind == "superposed":
        p = np.full(n, np.sqrt(nu_p), dtype=np.complex128)
        msg_mask = np.ones(n, dtype=bool)
        msg_amp = np.full(n, np.sqrt(nu_m))
    elif scheme.kind == "interleaved":
        spacing = int(round(1.0 / scheme.psr))
        if spacing < 1:
            raise ValueError("interleaved spacing < 1")
        p = np.zeros(n, dtype=np.complex128)
        p[::spacing] = np.sqrt(nu_x)
        msg_mask = np.ones(n, dtype=bool)
        msg_mask[::spacing] = False
        msg_amp = np.where(msg_mask, np.sqrt(nu_x), 0.0)
    elif scheme.kind == "tone_zero":
        if not isinstance(channel, CirculantOfdm):
            raise ValueError("tone_zero pilots require a CirculantOfdm channel")
        p = np.zeros(n, dtype=np.complex128)
        p[0] = np.sqrt(n * nu_p)
        gains = np.abs(channel.gains(n)) ** 2
        gains_msg = gains.copy()
        gains_msg[0] = 0.0  # pilot bin carries no message
        nv = noise_var_for_wf if noise_var_for_wf is not None else 1.0
        allocation = waterfill(gains_msg, n * nu_m, nv)
        msg_mask = np.ones(n, dtype=bool)
        msg_mask[0] = False
        msg_amp = np.sqrt(allocation)
    else:  # pragma: no cover
        raise ValueError(scheme.kind)

    units = np.zeros(n, dtype=np.complex128)
    units[msg_mask] = constellation.draw(int(msg_mask.sum()), rng)
    m = msg_amp * units
    x = p + m
    s = channel.apply(p)
    t = channel.apply(m)
    nu_t = effective_nu_t(channel, n, nu_m, allocation)
    return Frame(
        x=x, p=p, m=m, s=s, t=t,
        msg_mask=msg_mask, msg_amp=msg_amp, msg_units=units,
        nu_x=nu_x, nu_p=nu_p, nu_m=nu_m, nu_t=nu_t,
        allocation=allocation,
    )


def effective_nu_t(channel, n, nu_m, allocation=None):
    """Analytic per-symbol power of t = H m."""
    if isinstance(channel, CirculantOfdm):
        gains = np.abs(channel.gains(n)) ** 2
        if allocation is not None:
            return float(np.sum(allocation * gains) / n)
        return float(nu_m * np.mean(gains))
    return float(nu_m)  # unitary H
