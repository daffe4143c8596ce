"""Fast built-in sanity checks behind the `selftest` CLI subcommand.

These are quick smoke oracles; the full oracle suite lives in tests/.
"""

from __future__ import annotations

import numpy as np

from . import numerics as nm
from . import spa
from .channel import Identity, NoiseParams, PnParams, apply_pn_channel, sample_wiener_phase
from .framing import Constellation, PilotScheme, build_frame, waterfill


def _check(name, ok, failures):
    print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if not ok:
        failures.append(name)


def run_selftest():
    failures = []

    th = np.linspace(-np.pi, np.pi, 200001)
    for kappa in (0.0, 2.0, 5 * np.exp(1j * 1.0), 1e4):
        integral = np.trapezoid(nm.von_mises_pdf(th, kappa), th)
        _check(f"von_mises_pdf normalizes (kappa={kappa})", abs(integral - 1) < 1e-6, failures)

    _check("bessel_ratio(0) == 0", nm.bessel_ratio(0.0) == 0.0, failures)
    _check("bessel_ratio(2) ~ 0.697775", abs(nm.bessel_ratio(2.0) - 0.697775) < 1e-5, failures)
    _check("bessel_ratio monotone", np.all(np.diff(nm.bessel_ratio(np.linspace(0, 100, 500))) > 0), failures)

    x = np.exp(1j * np.linspace(0, 5, 256))
    _check("dft round trip", np.max(np.abs(nm.idft(nm.dft(x)) - x)) < 1e-12, failures)
    _check("dft Parseval", abs(np.linalg.norm(nm.dft(x)) - np.linalg.norm(x)) < 1e-12, failures)

    # Extrinsic Gaussian-product round trip.
    rng = np.random.default_rng(7)
    z_hat = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    s = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    nu, nu_zs = 0.3, 1.1
    y_prime, nu_w_prime = spa.extrinsic(z_hat, nu, s, nu_zs)
    back_mean = (s * nu_w_prime + y_prime * nu_zs) / (nu_zs + nu_w_prime)
    back_var = nu_zs * nu_w_prime / (nu_zs + nu_w_prime)
    _check("extrinsic round trip", np.max(np.abs(back_mean - z_hat)) < 1e-12 and abs(back_var - nu) < 1e-12, failures)

    # Recursion fixed point for constant gamma.
    c, nu_delta = 3.0, 5e-3
    kg = np.full(4000, c, dtype=np.complex128)
    ka, _ = spa.forward_backward(kg, nu_delta)
    k_star = (np.sqrt(c**2 * nu_delta**2 + 4 * c * nu_delta) - c * nu_delta) / (2 * nu_delta)
    _check("recursion fixed point", abs(abs(ka[-1]) - k_star) / k_star < 1e-6, failures)

    # Waterfilling KKT.
    gains = np.array([1.0, 0.5, 0.1, 2.0])
    alloc = waterfill(gains, 3.0, 0.2)
    mu = alloc[alloc > 0] + 0.2 / gains[alloc > 0]
    _check("waterfilling KKT", np.ptp(mu) < 1e-9 and abs(alloc.sum() - 3.0) < 1e-9, failures)

    # Noiseless constant-phase limit (t = 0): residual phase error vanishes.
    n = 256
    s_const = np.ones(n, dtype=np.complex128)
    theta = sample_wiener_phase(n, PnParams(0.0), rng)
    y = apply_pn_channel(s_const, theta, NoiseParams(0.0, 1e-10), rng)
    out = spa.run_spa(spa.SpaInputs(y, s_const, 1e-6, 1e-10, 0.0))
    resid = np.max(np.abs(nm.wrap_angle(np.angle(out.y_prime / s_const))))
    _check("noiseless constant-phase limit", resid < 1e-3, failures)

    print(f"{'OK' if not failures else 'FAILED'}: {len(failures)} failure(s)")
    return len(failures) == 0
