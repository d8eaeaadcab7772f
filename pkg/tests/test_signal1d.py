from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from radonshear.errors import AdmissibilityError, DomainError, ParseError, SizeError
from radonshear.signal1d import (
    Signal1D,
    admissibility,
    calderon_constant,
    chi_from_psi1,
    cwt,
    export_spectrum_csv,
    forward_spectrum,
    hilbert_derivative_residual,
    indicator_wavelet,
    inverse_spectrum,
    meyer_annulus_spectrum,
    meyer_calderon_exact,
    meyer_wavelet,
    riesz_halfpower,
    smooth_step,
    wavelet_from_id,
    zero_wavelet,
)

N, DX = 1024, 1.0 / 32.0


def gaussian(n=N, dx=DX, width=1.0, shift=0.0):
    return Signal1D.from_function(lambda x: np.exp(-np.pi * ((x - shift) / width) ** 2), n, dx)


random_signals = st.integers(0, 2**32 - 1).map(lambda seed: np.random.default_rng(seed).normal(size=(2, 256)))


# -- forward spectrum -----------------------------------------------------------


def test_delta_has_flat_spectrum():
    vals = np.zeros(N)
    vals[N // 2] = 1.0 / DX
    spec = forward_spectrum(Signal1D(vals, DX))
    np.testing.assert_allclose(spec.values, 1.0, atol=1e-12)


def test_gaussian_pair():
    spec = forward_spectrum(gaussian())
    assert np.max(np.abs(spec.values - np.exp(-np.pi * spec.tau**2))) <= 1e-10


def test_one_sample_shift_is_a_phase():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=N)
    a = forward_spectrum(Signal1D(vals, DX))
    b = forward_spectrum(Signal1D(np.roll(vals, 1), DX))
    np.testing.assert_allclose(b.values, a.values * np.exp(-2j * np.pi * a.tau * DX), atol=1e-12)


def test_size_and_domain_errors():
    with pytest.raises(SizeError):
        Signal1D(np.zeros(12), 0.1)
    with pytest.raises(SizeError):
        Signal1D(np.zeros(4), 0.1)
    with pytest.raises(DomainError):
        Signal1D(np.zeros(8), 0.0)
    with pytest.raises(DomainError):
        forward_spectrum(forward_spectrum(gaussian()))


@given(random_signals, st.sampled_from([0.01, 0.5, 3.0]))
def test_parseval(parts, dx):
    vals = parts[0] + 1j * parts[1]
    sig = Signal1D(vals, dx)
    spec = forward_spectrum(sig)
    assert spec.norm == pytest.approx(sig.norm, rel=1e-12)
    np.testing.assert_allclose(inverse_spectrum(spec).values, vals, atol=1e-12)


# -- cwt --------------------------------------------------------------------------


def test_cwt_autocorrelation_peak():
    # the Meyer window needs the fine default grid to be resolved
    w = meyer_wavelet()
    psi = Signal1D(w.spectrum, w.dx, "frequency")
    val = cwt(psi, w, b_grid=[0.0], a_grid=[1.0])
    assert val.shape == (1, 1)
    assert val[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_cwt_indicator_inner_product():
    w = indicator_wavelet(1.0, 2.0, n=N, dx=DX)
    f = Signal1D(w.spectrum, DX, "frequency")
    assert cwt(f, w, [0.0], [1.0])[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_cwt_on_sample_grid_matches_direct_sum():
    f = gaussian(width=0.3, shift=0.2)
    w = meyer_wavelet()
    fast = cwt(f, w, None, [1.0, 2.0])
    direct = cwt(f, w, f.x, [1.0, 2.0])
    assert fast.shape == (N, 2)
    np.testing.assert_allclose(fast, direct, atol=1e-10)


def test_cwt_shift_covariance():
    shift = 7
    f = gaussian(width=0.2)
    g = Signal1D(np.roll(f.values, shift), DX)
    w = meyer_wavelet()
    cf, cg = cwt(f, w, None, [0.5, 1.0]), cwt(g, w, None, [0.5, 1.0])
    # b - c on the sample grid is a roll of the coefficient rows
    np.testing.assert_allclose(cg, np.roll(cf, shift, axis=0), atol=1e-10)


def test_cwt_dilation_covariance():
    c = 2.0
    w = meyer_wavelet()
    f = gaussian(w.n, w.dx, width=0.25)
    g = Signal1D.from_function(lambda x: np.exp(-np.pi * (x / (0.25 * c)) ** 2) / math.sqrt(c), w.n, w.dx)
    b = np.array([-0.5, 0.0, 0.25, 1.0])
    lhs = cwt(g, w, b, [2.0])
    rhs = cwt(f, w, b / c, [2.0 / c])
    np.testing.assert_allclose(lhs, rhs, atol=1e-8)


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_cwt_linearity(alpha, beta):
    f, g = gaussian(width=0.2), gaussian(width=0.4, shift=0.3)
    w = meyer_wavelet()
    combo = Signal1D(alpha * f.values + beta * g.values, DX)
    lhs = cwt(combo, w, None, [0.5, 1.0])
    rhs = alpha * cwt(f, w, None, [0.5, 1.0]) + beta * cwt(g, w, None, [0.5, 1.0])
    scale = 1.0 + abs(alpha) + abs(beta)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_cwt_rejects_zero_scale():
    with pytest.raises(DomainError):
        cwt(gaussian(), meyer_wavelet(), None, [1.0, 0.0])


# -- Calderon constant ------------------------------------------------------------------


def test_indicator_annulus_calderon():
    w = wavelet_from_id("indicator-annulus:[1,2]")
    assert calderon_constant(w) == pytest.approx(2.0 * math.log(2.0), abs=1e-3)
    assert admissibility(w).admissible


def test_zero_spectrum_is_not_admissible():
    w = zero_wavelet()
    assert calderon_constant(w) == 0.0
    assert not admissibility(w).admissible


def test_meyer_calderon_against_refined_quadrature():
    w = meyer_wavelet()
    fine = w.resampled(8 * w.n, w.dx)  # eight times finer tau spacing
    assert calderon_constant(w) == pytest.approx(calderon_constant(fine), abs=1e-4)
    # independent adaptive quadrature of the closed form
    val, _ = integrate.quad(lambda t: meyer_annulus_spectrum(t) ** 2 / t, 0.5, 2.0, epsabs=1e-13, limit=200)
    assert calderon_constant(w) == pytest.approx(2.0 * val, abs=1e-4)
    assert meyer_calderon_exact() == pytest.approx(2.0 * val, rel=1e-9)


def test_meyer_has_unit_norm():
    assert meyer_wavelet().norm == pytest.approx(1.0, abs=1e-10)


def test_smooth_step_symmetry():
    x = np.linspace(-0.5, 1.5, 101)
    np.testing.assert_allclose(smooth_step(x) + smooth_step(1.0 - x), 1.0, atol=1e-15)


# -- Riesz multiplier -------------------------------------------------------------------------


def test_riesz_exponent_zero_only_clears_dc():
    rng = np.random.default_rng(0)
    spec = Signal1D(rng.normal(size=64) + 1j * rng.normal(size=64), 0.1, "frequency")
    out = riesz_halfpower(spec, 0.0)
    expect = spec.values.copy()
    expect[32] = 0.0
    np.testing.assert_array_equal(out.values, expect)


def test_riesz_on_indicator():
    w = indicator_wavelet(1.0, 2.0)
    tau = np.linspace(1.01, 1.99, 50)
    np.testing.assert_allclose(riesz_halfpower(w, 0.5).spectrum_at(tau), np.sqrt(tau), atol=1e-15)
    np.testing.assert_allclose(riesz_halfpower(w, 1.0).spectrum_at(tau), tau, atol=1e-15)
    assert riesz_halfpower(w, 1.0).spectrum_at(np.array([2.5]))[0] == 0.0


def test_riesz_negative_exponent():
    with pytest.raises(DomainError):
        riesz_halfpower(meyer_wavelet(), -0.5)


@given(st.floats(0, 3), st.floats(0, 3))
def test_riesz_composition_on_wavelets(e1, e2):
    w = meyer_wavelet(1024, 1.0 / 64.0)
    lhs = riesz_halfpower(riesz_halfpower(w, e1), e2)
    rhs = riesz_halfpower(w, e1 + e2)
    assert np.array_equal(lhs.spectrum, rhs.spectrum)


def test_riesz_composition_on_signals():
    rng = np.random.default_rng(5)
    spec = Signal1D(rng.normal(size=128), 0.1, "frequency")
    lhs = riesz_halfpower(riesz_halfpower(spec, 0.5), 0.5)
    rhs = riesz_halfpower(spec, 1.0)
    # |tau|^0.5 |tau|^0.5 vs |tau|: equal up to one rounding per bin
    np.testing.assert_allclose(lhs.values, rhs.values, rtol=4e-16, atol=0)


def test_riesz_in_space_domain_roundtrips_domain():
    out = riesz_halfpower(gaussian(), 1.0)
    assert out.domain == "space"


# -- chi and the Hilbert identity ----------------------------------------------------------------


def test_chi_of_indicator():
    chi = chi_from_psi1(indicator_wavelet(1.0, 2.0))
    tau = np.linspace(-3, 3, 601)
    inside = (tau > 1) & (tau < 2)
    np.testing.assert_allclose(chi.spectrum_at(tau)[inside], tau[inside])
    assert np.all(chi.spectrum_at(tau)[(tau < 1) | (tau > 2)] == 0)
    assert chi.admissible


def test_chi_of_meyer_is_admissible_and_even():
    chi = chi_from_psi1(meyer_wavelet())
    c = calderon_constant(chi)
    assert 0 < c < np.inf
    spec = chi.spectrum
    np.testing.assert_array_equal(spec[1:], spec[1:][::-1])
    assert np.all(spec.imag == 0)


def test_chi_rejects_dc_mass():
    low = indicator_wavelet(-0.5, 0.5)
    with pytest.raises(AdmissibilityError):
        chi_from_psi1(low)


def test_chi_rejects_mass_at_grid_edge():
    wide = indicator_wavelet(1.0, 100.0)
    with pytest.raises(AdmissibilityError):
        chi_from_psi1(wide)


def test_admissibility_chain_default_mother():
    psi1 = meyer_wavelet()
    rep = admissibility(psi1)
    assert rep.conditions_hold and rep.new_condition_holds
    phi1 = riesz_halfpower(psi1, 0.5)
    assert admissibility(phi1).admissible


def test_hilbert_derivative_identity():
    psi1 = meyer_wavelet()
    assert hilbert_derivative_residual(psi1, chi_from_psi1(psi1)) <= 1e-10


def test_hilbert_identity_detects_wrong_chi():
    psi1 = meyer_wavelet()
    wrong = riesz_halfpower(psi1, 0.5)
    assert hilbert_derivative_residual(psi1, wrong) > 1e-2


# -- presets -------------------------------------------------------------------------------------


def test_preset_ids():
    assert wavelet_from_id("meyer-annulus").name == "meyer-annulus"
    w = wavelet_from_id("indicator:[1, 2]")
    assert w.spectrum_at(np.array([1.5, -1.5])).tolist() == [1.0, 0.0]
    with pytest.raises(ParseError):
        wavelet_from_id("haar")
    with pytest.raises(DomainError):
        wavelet_from_id("indicator:[2,1]")


def test_export_csv(tmp_path):
    w = meyer_wavelet(64, 0.25)
    path = tmp_path / "w.csv"
    export_spectrum_csv(w, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["tau", "re", "im"]
    assert len(rows) == 65
    back = np.array([[float(c) for c in r] for r in rows[1:]])
    np.testing.assert_array_equal(back[:, 0], w.tau)
    np.testing.assert_array_equal(back[:, 1], w.spectrum.real)
