"""1D spectral machinery.

Fourier convention throughout the package::

    F f(tau) = integral f(x) exp(-2 pi i tau x) dx

Signals are sampled on centered grids ``x_k = (k - n/2) dx`` and their
spectra on ``tau_m = (m - n/2) / (n dx)``.  Wavelets are frequency-side
objects: a :class:`Wavelet1D` holds a closed-form spectrum that can be
sampled on any grid and evaluated at dilated frequencies.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, signal

from .errors import AdmissibilityError, DomainError, ParseError, ShapeError, SizeError

SpectrumFn = Callable[[np.ndarray], np.ndarray]

# default sampling grid for wavelet quadratures: |tau| <= 8, dtau = 1/1024
WAVELET_N = 16384
WAVELET_DX = 1.0 / 16.0


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def centered_grid(n: int, dx: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * dx


def frequency_grid(n: int, dx: float) -> np.ndarray:
    return (np.arange(n) - n // 2) / (n * dx)


def fft_centered(values: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Continuous-FT approximation on centered grids along ``axis``."""
    shifted = np.fft.ifftshift(values, axes=axis)
    return np.fft.fftshift(np.fft.fft(shifted, axis=axis), axes=axis) * dx


def ifft_centered(spectrum: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`fft_centered`; ``dx`` is the *spatial* spacing."""
    shifted = np.fft.ifftshift(spectrum, axes=axis)
    return np.fft.fftshift(np.fft.ifft(shifted, axis=axis), axes=axis) / dx


@dataclass(frozen=True, eq=False)
class Signal1D:
    """Samples on a centered grid, in space or frequency domain.

    ``dx`` is always the spatial spacing; the frequency spacing is
    ``1 / (n dx)``.
    """

    values: np.ndarray
    dx: float
    domain: str = "space"

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise ShapeError("Signal1D needs a 1D array", module="signal-1d")
        n = vals.shape[0]
        if n < 8 or not is_power_of_two(n):
            raise SizeError(f"sample count must be a power of two >= 8, got {n}", module="signal-1d")
        if not self.dx > 0:
            raise DomainError(f"dx must be positive, got {self.dx}", module="signal-1d")
        if self.domain not in ("space", "frequency"):
            raise DomainError(f"unknown domain {self.domain!r}", module="signal-1d")
        vals = vals.astype(complex if np.iscomplexobj(vals) else float, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dtau(self) -> float:
        return 1.0 / (self.n * self.dx)

    @property
    def x(self) -> np.ndarray:
        return centered_grid(self.n, self.dx)

    @property
    def tau(self) -> np.ndarray:
        return frequency_grid(self.n, self.dx)

    @property
    def grid(self) -> np.ndarray:
        return self.x if self.domain == "space" else self.tau

    @property
    def norm(self) -> float:
        step = self.dx if self.domain == "space" else self.dtau
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * step))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int, dx: float) -> "Signal1D":
        return cls(fn(centered_grid(n, dx)), dx)


def forward_spectrum(sig: Signal1D) -> Signal1D:
    """Spectrum of a space-domain signal on the matching tau grid."""
    if sig.domain != "space":
        raise DomainError("forward_spectrum expects a space-domain signal", module="signal-1d")
    return Signal1D(fft_centered(sig.values, sig.dx), sig.dx, "frequency")


def inverse_spectrum(spec: Signal1D) -> Signal1D:
    if spec.domain != "frequency":
        raise DomainError("inverse_spectrum expects a frequency-domain signal", module="signal-1d")
    return Signal1D(ifft_centered(spec.values, spec.dx), spec.dx, "space")


# -- wavelets ----------------------------------------------------------------


def _riesz_factor(tau: np.ndarray, exponent: float) -> np.ndarray:
    mag = np.abs(tau)
    out = np.zeros_like(mag, dtype=float)
    nz = mag > 0
    out[nz] = mag[nz] ** exponent
    return out


@dataclass(frozen=True, eq=False)
class Wavelet1D:
    """A 1D wavelet given by its spectrum.

    The spectrum is ``|tau|**riesz_exponent * base(tau)``; keeping the Riesz
    exponent separate makes repeated multiplier application exact.
    ``n`` and ``dx`` fix the default sampling grid used by quadratures.
    """

    base: SpectrumFn = field(repr=False)
    name: str = "custom"
    riesz_exponent: float = 0.0
    n: int = WAVELET_N
    dx: float = WAVELET_DX
    admissible: bool | None = None

    def spectrum_at(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        vals = np.asarray(self.base(tau), dtype=complex)
        if self.riesz_exponent == 0.0:
            return vals
        return _riesz_factor(tau, self.riesz_exponent) * vals

    @property
    def tau(self) -> np.ndarray:
        return frequency_grid(self.n, self.dx)

    @property
    def dtau(self) -> float:
        return 1.0 / (self.n * self.dx)

    @property
    def spectrum(self) -> np.ndarray:
        """Samples of the spectrum on the default tau grid."""
        return self.spectrum_at(self.tau)

    def resampled(self, n: int, dx: float) -> "Wavelet1D":
        return replace(self, n=n, dx=dx)

    def space_samples(self) -> np.ndarray:
        return ifft_centered(self.spectrum, self.dx)

    @cached_property
    def calderon_constant(self) -> float:
        return calderon_constant(self)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.spectrum) ** 2, dx=self.dtau)))


def smooth_step(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, nu(x) + nu(1-x) = 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        h1 = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return h0 / (h0 + h1)


def bump(u) -> np.ndarray:
    """Window cos(pi/2 * nu(|u|)) on [-1, 1].

    Its squared integer translates sum to one, so its L2 norm is 1.
    """
    u = np.abs(np.asarray(u, dtype=float))
    return np.where(u < 1.0, np.cos(0.5 * np.pi * smooth_step(u)), 0.0)


@lru_cache(maxsize=None)
def _meyer_norm() -> float:
    val, _ = integrate.quad(lambda u: bump(u) ** 2 * 2.0**u, -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return math.sqrt(2.0 * math.log(2.0) * val)


def meyer_annulus_spectrum(tau) -> np.ndarray:
    """Real even C-infinity spectrum supported in 1/2 <= |tau| <= 2, unit L2 norm.

    It is the bump composed with log2|tau|, so dyadic dilates of its square
    form a partition of unity.
    """
    tau = np.abs(np.asarray(tau, dtype=float))
    out = np.zeros_like(tau)
    nz = tau > 0
    out[nz] = bump(np.log2(tau[nz])) / _meyer_norm()
    return out


def meyer_calderon_exact() -> float:
    """Closed form of the Calderon integral for the Meyer preset: 2 ln2 / c^2."""
    return 2.0 * math.log(2.0) / _meyer_norm() ** 2


def _indicator(t0: float, t1: float, symmetric: bool) -> SpectrumFn:
    # at a jump the squared value is 1/2, which keeps trapezoid quadratures of
    # |F psi|^2 second order
    def fn(tau):
        tau = np.asarray(tau, dtype=float)
        x = np.abs(tau) if symmetric else tau
        inside = ((x > t0) & (x < t1)).astype(float)
        edge = np.isclose(x, t0, rtol=0, atol=1e-12) | np.isclose(x, t1, rtol=0, atol=1e-12)
        return np.where(edge, math.sqrt(0.5), inside)

    return fn


def meyer_wavelet(n: int = WAVELET_N, dx: float = WAVELET_DX) -> Wavelet1D:
    return Wavelet1D(meyer_annulus_spectrum, "meyer-annulus", n=n, dx=dx)


def indicator_wavelet(t0: float, t1: float, symmetric: bool = False, n: int = WAVELET_N, dx: float = WAVELET_DX) -> Wavelet1D:
    """Test wavelet whose spectrum is the indicator of [t0, t1] (or of t0 <= |tau| <= t1)."""
    if not t0 < t1:
        raise DomainError(f"empty interval [{t0}, {t1}]", module="signal-1d")
    name = f"indicator-annulus:[{t0:g},{t1:g}]" if symmetric else f"indicator:[{t0:g},{t1:g}]"
    return Wavelet1D(_indicator(t0, t1, symmetric), name, n=n, dx=dx)


def zero_wavelet(n: int = WAVELET_N, dx: float = WAVELET_DX) -> Wavelet1D:
    return Wavelet1D(lambda tau: np.zeros_like(np.asarray(tau, dtype=float)), "zero", n=n, dx=dx)


_PRESET_RE = re.compile(r"(indicator|indicator-annulus):\[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\]")


def wavelet_from_id(text: str, n: int = WAVELET_N, dx: float = WAVELET_DX) -> Wavelet1D:
    """Presets: ``meyer-annulus``, ``indicator:[t0,t1]``, ``indicator-annulus:[t0,t1]``."""
    text = text.strip()
    if text == "meyer-annulus":
        return meyer_wavelet(n, dx)
    m = _PRESET_RE.fullmatch(text)
    if m:
        return indicator_wavelet(float(m.group(2)), float(m.group(3)), m.group(1) == "indicator-annulus", n, dx)
    raise ParseError(f"unknown wavelet preset {text!r}", module="signal-1d")


def export_spectrum_csv(w: Wavelet1D, path) -> None:
    spec = w.spectrum
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "re", "im"])
        for t, z in zip(w.tau, spec):
            writer.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])


# -- operations ---------------------------------------------------------------


def riesz_halfpower(x, exponent: float):
    """Multiply a spectrum by |tau|**exponent, zeroing the DC bin.

    Accepts a :class:`Wavelet1D` (exponents accumulate exactly) or a
    :class:`Signal1D` in either domain (the result stays in that domain).
    """
    exponent = float(exponent)
    if exponent < 0 or not np.isfinite(exponent):
        raise DomainError(f"Riesz exponent must be finite and >= 0, got {exponent}", module="signal-1d")
    if isinstance(x, Wavelet1D):
        return replace(x, riesz_exponent=x.riesz_exponent + exponent, admissible=None, name=f"{x.name}*|tau|^{exponent:g}")
    if isinstance(x, Signal1D):
        spec = x if x.domain == "frequency" else forward_spectrum(x)
        vals = spec.values * _riesz_factor(spec.tau, exponent)
        out = Signal1D(vals, x.dx, "frequency")
        return out if x.domain == "frequency" else inverse_spectrum(out)
    raise TypeError(f"riesz_halfpower expects Signal1D or Wavelet1D, got {type(x).__name__}")


def _quadrature(w: Wavelet1D, weight: np.ndarray) -> float:
    integrand = weight * np.abs(w.spectrum) ** 2
    return float(np.trapezoid(integrand, dx=w.dtau))


def calderon_constant(w: Wavelet1D) -> float:
    """Trapezoid quadrature of |F psi|^2 / |tau| on the wavelet's grid, DC bin excluded."""
    return _quadrature(w, _inv_abs(w.tau))


def _inv_abs(tau: np.ndarray) -> np.ndarray:
    out = np.zeros_like(tau)
    nz = tau != 0
    out[nz] = 1.0 / np.abs(tau[nz])
    return out


@dataclass(frozen=True)
class AdmissibilityReport:
    calderon: float
    riesz_energy: float  # integral |tau|^(d-1) |F psi|^2
    extra_energy: float  # integral |tau|^(2(d-1)) |F psi|^2
    mass_near_zero: float  # relative sup of |F psi| over the two bins nearest DC
    mass_at_edge: float  # relative sup of |F psi| over the outer 1/16 of the grid

    @property
    def admissible(self) -> bool:
        """Calderon constant strictly positive and finite, no DC mass."""
        return 0.0 < self.calderon < np.inf and self.mass_near_zero < 1e-8

    @property
    def conditions_hold(self) -> bool:
        """Both integrals of the standing conditions converge on the grid."""
        return self.admissible and np.isfinite(self.riesz_energy) and self.mass_at_edge < 1e-8

    @property
    def new_condition_holds(self) -> bool:
        return self.conditions_hold and np.isfinite(self.extra_energy)


def admissibility(w: Wavelet1D, d: int = 2) -> AdmissibilityReport:
    tau = w.tau
    spec = np.abs(w.spectrum)
    peak = float(spec.max()) if spec.size else 0.0
    if peak == 0.0:
        return AdmissibilityReport(0.0, 0.0, 0.0, 0.0, 0.0)
    near = np.abs(tau) <= 2.0 * w.dtau
    edge = np.abs(tau) >= (15.0 / 16.0) * np.abs(tau).max()
    return AdmissibilityReport(
        calderon=calderon_constant(w),
        riesz_energy=_quadrature(w, np.abs(tau) ** (d - 1)),
        extra_energy=_quadrature(w, np.abs(tau) ** (2 * (d - 1))),
        mass_near_zero=float(spec[near].max()) / peak,
        mass_at_edge=float(spec[edge].max()) / peak,
    )


def chi_from_psi1(psi1: Wavelet1D, d: int = 2) -> Wavelet1D:
    """The wavelet with spectrum |tau|^(d-1) F psi1 (Hilbert transform of psi1' / 2 pi for d = 2)."""
    report = admissibility(psi1, d)
    if not report.new_condition_holds:
        raise AdmissibilityError(
            f"{psi1.name} fails the admissibility quadratures: {report}", module="signal-1d"
        )
    chi = riesz_halfpower(psi1, float(d - 1))
    ok = admissibility(chi, d).admissible
    if not ok:
        raise AdmissibilityError(f"derived chi1 of {psi1.name} is not admissible", module="signal-1d")
    return replace(chi, name=f"chi1[{psi1.name}]", admissible=True)


def hilbert_derivative_residual(psi1: Wavelet1D, chi1: Wavelet1D) -> float:
    """max |F(H psi1') - 2 pi F chi1| / max |2 pi F chi1| on psi1's grid.

    The left side is computed in space: psi1 is synthesized, differentiated
    spectrally, and passed through scipy's analytic-signal Hilbert transform.
    """
    n, dx = psi1.n, psi1.dx
    x_samples = psi1.space_samples()
    deriv = ifft_centered(fft_centered(x_samples, dx) * (2j * np.pi * psi1.tau), dx)
    # scipy.signal.hilbert works on real input; split into real and imaginary parts
    h = np.imag(signal.hilbert(deriv.real)) + 1j * np.imag(signal.hilbert(deriv.imag))
    lhs = fft_centered(h, dx)
    rhs = 2.0 * np.pi * chi1.resampled(n, dx).spectrum
    # scipy zeroes nothing at Nyquist for even n; drop that single bin
    keep = np.ones(n, dtype=bool)
    keep[0] = False
    return float(np.max(np.abs(lhs - rhs)[keep]) / np.max(np.abs(rhs)))


# -- continuous wavelet transform ------------------------------------------


def dilated_spectrum(w: Wavelet1D, tau: np.ndarray, a: float) -> np.ndarray:
    """F(W_{0,a} psi)(tau) = |a|^(1/2) F psi(a tau)."""
    return math.sqrt(abs(a)) * w.spectrum_at(a * tau)


def cwt(sig: Signal1D, w: Wavelet1D, b_grid=None, a_grid=(1.0,)) -> np.ndarray:
    """Wavelet coefficients <f, W_{b,a} psi> for all (b, a).

    With ``b_grid=None`` the translations are the signal's own sample grid
    and each scale costs one inverse FFT.  Otherwise the inverse Fourier
    integral is evaluated directly at the requested translations.

    Returns an array of shape ``(len(b), len(a_grid))``.
    """
    a_grid = np.atleast_1d(np.asarray(a_grid, dtype=float))
    if np.any(a_grid == 0):
        raise DomainError("scale grid contains a = 0", module="signal-1d")
    spec = sig if sig.domain == "frequency" else forward_spectrum(sig)
    tau = spec.tau
    cols = []
    if b_grid is None:
        for a in a_grid:
            prod = spec.values * np.conj(dilated_spectrum(w, tau, a))
            cols.append(ifft_centered(prod, spec.dx))
    else:
        b = np.atleast_1d(np.asarray(b_grid, dtype=float))
        kernel = np.exp(2j * np.pi * np.outer(b, tau)) * spec.dtau
        for a in a_grid:
            prod = spec.values * np.conj(dilated_spectrum(w, tau, a))
            cols.append(kernel @ prod)
    return np.stack(cols, axis=1)
