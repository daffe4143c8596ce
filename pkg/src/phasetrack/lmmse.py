"""Pilot-aided LMMSE phasor tracking baseline.

The filter estimates d_i = |s_i| e^{j theta_i} from the de-rotated
observations y~ = y . e^{-j angle(s)}. Second moments are closed form
under the mismatched independent-message prior and Wiener phase:

    (R_yy)_{ik} = |s_i||s_k| e^{-nu_delta |i-k| / 2} + (nu_z|s + nu_w) d_{ik}
    (R_dy)_{ik} = |s_i||s_k| e^{-nu_delta |i-k| / 2}

so R_dy = R_yy - (nu_z|s + nu_w) I, and the full-frame filter output is
V y~ = y~ - (nu_z|s + nu_w) R_yy^{-1} y~ (one linear solve per frame).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

LMMSE_OPS_PER_TAP = 4  # complex MAC cost, matching the SPA accounting basis


@dataclass
class LmmseFilterSpec:
    s_abs: np.ndarray  # deterministic |s_i| pattern
    nu_z_given_s: float
    nu_w: float
    nu_delta: float
    taps: int | None = None  # odd window length; None = full frame

    def __post_init__(self):
        self.s_abs = np.asarray(self.s_abs, dtype=np.float64)
        if self.taps is not None:
            if self.taps < 1 or self.taps % 2 == 0:
                raise ValueError("taps must be odd and >= 1")
        self._full_solver = None
        self._window_weights = None

    @property
    def noise_diag(self):
        return self.nu_z_given_s + self.nu_w

    def phase_corr(self, lags):
        """E[e^{j(Theta_i - Theta_k)}] = e^{-nu_delta |i-k| / 2}."""
        return np.exp(-self.nu_delta * np.abs(lags) / 2.0)

    def ops_per_symbol(self):
        taps = self.taps if self.taps is not None else len(self.s_abs)
        return LMMSE_OPS_PER_TAP * taps


def _is_constant(v):
    return np.ptp(v) <= 1e-12 * max(np.max(np.abs(v)), 1e-300)


class _FullSolver:
    """Whole-frame solve, Toeplitz fast path for constant |s|."""

    def __init__(self, spec):
        self.spec = spec
        n = len(spec.s_abs)
        self.toeplitz = _is_constant(spec.s_abs)
        if self.toeplitz:
            col = spec.s_abs[0] ** 2 * spec.phase_corr(np.arange(n))
            col[0] += spec.noise_diag
            self.col = col
        else:
            lags = np.arange(n)
            ryy = np.outer(spec.s_abs, spec.s_abs) * spec.phase_corr(lags[:, None] - lags[None, :])
            ryy[np.diag_indices(n)] += spec.noise_diag
            self.chol = scipy.linalg.cho_factor(ryy)

    def apply(self, y_tilde):
        if self.toeplitz:
            u = scipy.linalg.solve_toeplitz(self.col, y_tilde)
        else:
            u = scipy.linalg.cho_solve(self.chol, y_tilde)
        return y_tilde - self.spec.noise_diag * u


def _window_weights(spec):
    """Per-output filter rows for the finite window, truncated at edges."""
    n = len(spec.s_abs)
    taps = min(spec.taps, n)
    half = taps // 2
    weights = np.zeros((n, taps))
    starts = np.clip(np.arange(n) - half, 0, n - taps)
    # Batch identical interior windows when |s| is shift-invariant there.
    cache = {}
    for i in range(n):
        j0 = starts[i]
        sw = spec.s_abs[j0 : j0 + taps]
        center = i - j0
        key = (center, sw.tobytes())
        row = cache.get(key)
        if row is None:
            lags = np.arange(taps)
            r = np.outer(sw, sw) * spec.phase_corr(lags[:, None] - lags[None, :])
            rdy = r[center].copy()
            r = r.copy()
            r[np.diag_indices(taps)] += spec.noise_diag
            row = np.linalg.solve(r, rdy)
            cache[key] = row
        weights[i] = row
    return weights, starts


def build_lmmse_filter(spec):
    """Materialize the solver/weights; idempotent, cached on the spec."""
    if spec.taps is None:
        if spec._full_solver is None:
            spec._full_solver = _FullSolver(spec)
        return spec._full_solver
    if spec._window_weights is None:
        spec._window_weights = _window_weights(spec)
    return spec._window_weights


def filter_output(y_tilde, spec):
    """V y~, the LMMSE phasor estimate."""
    if spec.taps is None:
        return build_lmmse_filter(spec).apply(y_tilde)
    weights, starts = build_lmmse_filter(spec)
    taps = weights.shape[1]
    n = len(y_tilde)
    if taps >= n:
        windows = np.broadcast_to(y_tilde, (n, taps))
    else:
        windows = np.lib.stride_tricks.sliding_window_view(y_tilde, taps)[starts]
    return np.sum(weights * windows, axis=1)


def predicted_mmse(spec):
    """Diagonal of R_dd - V R_dy^H, the analytic per-symbol filter MSE."""
    n = len(spec.s_abs)
    lags = np.arange(n)
    rdy = np.outer(spec.s_abs, spec.s_abs) * spec.phase_corr(lags[:, None] - lags[None, :])
    ryy = rdy.copy()
    ryy[np.diag_indices(n)] += spec.noise_diag
    v = np.linalg.solve(ryy, rdy).T
    return spec.s_abs**2 - np.sum(v * rdy, axis=1)


def run_lmmse(y, s, spec):
    """Phase-corrected output y' = y . e^{-j angle(V y~)}.

    nu_w' has no analytic form here; the rates module calibrates it.
    """
    y = np.asarray(y, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    y_tilde = y * np.exp(-1j * np.angle(s))
    est = filter_output(y_tilde, spec)
    phase = np.angle(est)  # angle(0) = 0 is the specified fallback
    from .spa import CompensatorOutput

    return CompensatorOutput(y_prime=y * np.exp(-1j * phase), nu_w_prime=None)
