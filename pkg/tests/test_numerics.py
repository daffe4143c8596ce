"""Oracle and property tests for the circular-statistics primitives."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasetrack.numerics import (
    bessel_ratio,
    bessel_ratio_lut,
    circular_mean,
    circular_mean_of_product,
    dft,
    idft,
    log_i0,
    von_mises_pdf,
    wrap_angle,
    wrapped_gaussian_pdf,
)

mpmath.mp.dps = 40


def mp_bessel_ratio(x):
    if x == 0:
        return 0.0
    return float(mpmath.besseli(1, x) / mpmath.besseli(0, x))


def mp_log_i0(x):
    return float(mpmath.log(mpmath.besseli(0, x)))


# Spans both the series branch and the asymptotic branch, plus the exact
# switchover neighborhood.
ORACLE_GRID = np.concatenate(
    [
        [0.0, 1e-12, 1e-6, 1e-3],
        np.linspace(0.01, 14.99, 97),
        [14.999999, 15.0, 15.000001],
        np.logspace(np.log10(15.01), 8, 97),
    ]
)


def test_bessel_ratio_vs_mpmath():
    vals = bessel_ratio(ORACLE_GRID)
    for x, got in zip(ORACLE_GRID, vals):
        want = mp_bessel_ratio(x)
        err = abs(got - want) / max(abs(want), 1e-300) if want else abs(got)
        assert err <= 1e-10, (x, got, want)


def test_log_i0_vs_mpmath():
    vals = log_i0(ORACLE_GRID)
    for x, got in zip(ORACLE_GRID, vals):
        want = mp_log_i0(x)
        # Relative accuracy where the value is representable; tiny values
        # of log I0 fall below double precision of the intermediate I0.
        err = abs(got - want) / max(abs(want), 1e-300) if want else abs(got)
        assert err <= 1e-10 or abs(got - want) <= 1e-15, (x, got, want)


def test_bessel_ratio_scalar_and_array_agree():
    xs = np.array([0.0, 0.5, 14.9, 15.1, 1e6])
    arr = bessel_ratio(xs)
    for x, v in zip(xs, arr):
        assert bessel_ratio(float(x)) == pytest.approx(v, rel=0, abs=0)


def test_bessel_ratio_rejects_bad_input():
    with pytest.raises(ValueError):
        bessel_ratio(-1.0)
    with pytest.raises(ValueError):
        bessel_ratio(np.inf)
    with pytest.raises(ValueError):
        log_i0(np.nan)


@given(st.floats(min_value=0.0, max_value=1e8, allow_nan=False))
def test_bessel_ratio_in_unit_interval(x):
    r = bessel_ratio(x)
    assert 0.0 <= r < 1.0


@given(
    st.floats(min_value=0.0, max_value=1e6),
    st.floats(min_value=1e-9, max_value=1e6),
)
def test_bessel_ratio_monotone(x, dx):
    assert bessel_ratio(x + dx) >= bessel_ratio(x) - 1e-14


def test_bessel_ratio_lut_close_to_direct():
    xs = np.logspace(-5, 8, 4001)
    direct = bessel_ratio(xs)
    lut = bessel_ratio_lut(xs)
    assert np.max(np.abs(lut - direct)) < 1e-5


def test_von_mises_normalizes():
    theta = np.linspace(-np.pi, np.pi, 200001)
    for kappa in (0.0, 0.3 + 0.1j, 5.0, 30.0 * np.exp(1j * 2.0)):
        pdf = von_mises_pdf(theta, kappa)
        mass = np.trapezoid(pdf, theta)
        assert mass == pytest.approx(1.0, abs=1e-8)


def test_circular_mean_vs_quadrature():
    theta = np.linspace(-np.pi, np.pi, 200001)
    for kappa in (0.5, 4.0 * np.exp(1j * 1.1), 20.0 * np.exp(-1j * 2.5)):
        pdf = von_mises_pdf(theta, kappa)
        want = np.trapezoid(pdf * np.exp(1j * theta), theta)
        got = circular_mean(kappa)
        assert abs(got - want) < 1e-8


def test_circular_mean_of_product_vs_quadrature():
    theta = np.linspace(-np.pi, np.pi, 400001)
    ka = 3.0 * np.exp(1j * 0.7)
    kb = 1.5 * np.exp(-1j * 2.1)
    prod = von_mises_pdf(theta, ka) * von_mises_pdf(theta, kb)
    prod /= np.trapezoid(prod, theta)
    want = np.trapezoid(prod * np.exp(1j * theta), theta)
    got = circular_mean_of_product(ka, kb)
    assert abs(got - want) < 1e-8


def test_circular_mean_zero_kappa():
    assert circular_mean(0.0) == 0.0


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_wrap_angle_range_and_congruence(theta):
    w = float(wrap_angle(theta))
    assert -np.pi <= w < np.pi
    assert abs((theta - w) / (2.0 * np.pi) - round((theta - w) / (2.0 * np.pi))) < 1e-6


def test_wrapped_gaussian_normalizes():
    delta = np.linspace(-np.pi, np.pi, 100001)
    for var in (1e-6, 0.01, 1.0, 25.0):
        pdf = wrapped_gaussian_pdf(delta, var)
        assert np.trapezoid(pdf, delta) == pytest.approx(1.0, abs=1e-7)


def test_wrapped_gaussian_small_variance_matches_gaussian():
    # Negligible wrapping mass: the wrapped density equals the plain one.
    delta = np.linspace(-0.1, 0.1, 2001)
    var = 1e-4
    want = np.exp(-0.5 * delta**2 / var) / np.sqrt(2.0 * np.pi * var)
    got = wrapped_gaussian_pdf(delta, var)
    assert np.max(np.abs(got - want)) < 1e-10


def test_wrapped_gaussian_large_variance_is_uniform():
    delta = np.linspace(-np.pi, np.pi, 101)
    pdf = wrapped_gaussian_pdf(delta, 1e4)
    assert np.max(np.abs(pdf - 1.0 / (2.0 * np.pi))) < 1e-12


def test_wrapped_gaussian_zero_variance():
    assert wrapped_gaussian_pdf(np.array([0.0]), 0.0)[0] == np.inf
    assert wrapped_gaussian_pdf(np.array([0.5]), 0.0)[0] == 0.0
    with pytest.raises(ValueError):
        wrapped_gaussian_pdf(np.array([0.0]), -1.0)


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    mat = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    return mat @ x


def test_dft_matches_naive_oracle():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    assert np.max(np.abs(dft(x) - naive_dft(x))) < 1e-12


def test_dft_roundtrip_and_parseval():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(257) + 1j * rng.standard_normal(257)
    assert np.max(np.abs(idft(dft(x)) - x)) < 1e-12
    assert np.sum(np.abs(dft(x)) ** 2) == pytest.approx(np.sum(np.abs(x) ** 2), rel=1e-12)
