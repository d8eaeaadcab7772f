"""2D shearlet transform for the standard group S^gamma, computed two ways.

Atoms are ``S_{b,s,a} psi(x) = |det h|^(-1/2) psi(h^-1 (x - b))`` with
``h = a [[1, -s |a|^(gamma-1)], [0, |a|^(gamma-1)]]``, so that::

    F(S_{b,s,a} psi)(xi) = |a|^((1+gamma)/2) e^{-2 pi i b.xi}
                           F psi1(a xi1) F psi2((xi2/xi1 - s) / |a|^(1-gamma))

The direct transform correlates the image spectrum with each atom.  The
Radon-domain pipeline instead takes 1D wavelet transforms of the sinogram
columns with ``chi1`` (spectrum ``|tau| F psi1``) and integrates over slopes
against the scale filter ``Phi_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.ndimage import map_coordinates, spline_filter1d

from .errors import AdmissibilityError, AliasingError, CoverageError, DomainError, ParseError, ShapeError, StageError
from .groups import DilationFamily, haar_density
from .radon2d import RAW, RIESZ, Image2D, Sinogram
from .signal1d import (
    Wavelet1D,
    admissibility,
    bump,
    centered_grid,
    chi_from_psi1,
    fft_centered,
    frequency_grid,
    ifft_centered,
    riesz_halfpower,
    wavelet_from_id,
)

SpectrumFn = Callable[[np.ndarray], np.ndarray]

U_GRID_N = 8193
U_GRID_MAX = 4.0


def prefactor_exponent(family: DilationFamily, path: str = "chi") -> float:
    """Power of |a| in front of the slope integral of the Radon-domain formula.

    ``path="chi"`` works on the raw sinogram with chi1, giving
    ``(lambda_D + 1 - d) / 2``; ``path="phi"`` works on Q f with phi1,
    giving ``lambda_D / 2``.  For S^gamma these are ``(d-1)(gamma-2)/2`` and
    ``(d-1)(gamma-1)/2``.
    """
    if path == "chi":
        return (family.lambda_D + 1 - family.d) / 2.0
    if path == "phi":
        return family.lambda_D / 2.0
    raise DomainError(f"unknown path {path!r}", module="shearlet2d")


def tensor_dilation_constant(family: DilationFamily) -> float:
    """Exponent c with (V_{0,a} (x) W_{0,a}) = |a|^c D_A, A = diag(Lambda(a)^-1, a).

    Follows from ``|det A| = |a|^(1 - lambda_D)`` and the normalizations of
    V and W; the value is ``(1 - lambda_D) / 2``.
    """
    return (1.0 - family.lambda_D) / 2.0


# -- mother shearlets ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SlopeWindow:
    """Spectrum of psi2 as a function of the slope u = xi2 / xi1."""

    fn: SpectrumFn = field(repr=False)
    name: str
    support: float

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(u, dtype=float)), dtype=complex)


def slope_window_from_id(text: str) -> SlopeWindow:
    """Presets ``bump`` (smooth, |u| <= 1, unit norm) and ``indicator:[u0,u1]``."""
    text = text.strip()
    if text == "bump":
        return SlopeWindow(bump, "bump", 1.0)
    if text.startswith("indicator:"):
        try:
            lo, hi = (float(p) for p in text[len("indicator:") :].strip("[] ").split(","))
        except ValueError as exc:
            raise ParseError(f"bad slope window {text!r}", module="shearlet2d") from exc
        if not lo < hi:
            raise DomainError(f"empty slope interval in {text!r}", module="shearlet2d")
        def fn(u):
            # jumps carry sqrt(1/2), as for the 1D indicator presets
            edge = np.isclose(u, lo, rtol=0, atol=1e-12) | np.isclose(u, hi, rtol=0, atol=1e-12)
            return np.where(edge, math.sqrt(0.5), ((u > lo) & (u < hi)).astype(float))

        return SlopeWindow(fn, text, max(abs(lo), abs(hi)))
    raise ParseError(f"unknown slope window {text!r}", module="shearlet2d")


def _support_of(w: Wavelet1D) -> tuple[float, float]:
    spec = np.abs(w.spectrum)
    nz = np.nonzero(spec > 1e-14 * spec.max())[0]
    mag = np.abs(w.tau[nz])
    return float(mag.min()), float(mag.max())


@dataclass(frozen=True, eq=False)
class MotherShearlet:
    """Tensor mother with F psi(xi) = F psi1(xi1) F psi2(xi2 / xi1)."""

    psi1: Wavelet1D
    psi2: SlopeWindow
    gamma: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}", module="shearlet2d")
        report = admissibility(self.psi1, 2)
        if not report.new_condition_holds:
            raise AdmissibilityError(
                f"psi1 {self.psi1.name} fails the admissibility quadratures: {report}", module="shearlet2d"
            )
        if self.psi2.support >= U_GRID_MAX:
            raise CoverageError(
                f"slope window {self.psi2.name} reaches |u| = {self.psi2.support} beyond the sampled grid",
                module="shearlet2d",
            )

    @property
    def family(self) -> DilationFamily:
        return DilationFamily.standard(2, self.gamma)

    @property
    def id(self) -> str:
        return f"psi1={self.psi1.name};psi2={self.psi2.name};gamma={self.gamma:g}"

    @cached_property
    def u_grid(self) -> np.ndarray:
        return np.linspace(-U_GRID_MAX, U_GRID_MAX, U_GRID_N)

    @cached_property
    def psi2_spectrum(self) -> np.ndarray:
        return self.psi2(self.u_grid)

    @cached_property
    def psi2_norm_sq(self) -> float:
        return float(np.trapezoid(np.abs(self.psi2_spectrum) ** 2, self.u_grid))

    @cached_property
    def phi1(self) -> Wavelet1D:
        return riesz_halfpower(self.psi1, 0.5)

    @cached_property
    def chi1(self) -> Wavelet1D:
        return chi_from_psi1(self.psi1, 2)

    def phi2(self, u) -> np.ndarray:
        return self.psi2(u)

    @cached_property
    def c_psi(self) -> float:
        """Quadrature of integral |F psi(xi)|^2 / xi1^2 dxi, which factorizes."""
        return self.psi1.calderon_constant * self.psi2_norm_sq

    @cached_property
    def psi1_support(self) -> tuple[float, float]:
        return _support_of(self.psi1)

    @cached_property
    def norm_sq(self) -> float:
        """||psi||^2 = integral |F psi1(tau)|^2 |tau| dtau * ||F psi2||^2."""
        w = self.psi1
        return float(np.trapezoid(np.abs(w.spectrum) ** 2 * np.abs(w.tau), dx=w.dtau)) * self.psi2_norm_sq

    def spectrum(self, xi1, xi2) -> np.ndarray:
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        out = np.zeros(np.broadcast(xi1, xi2).shape, dtype=complex)
        xi1b, xi2b = np.broadcast_arrays(xi1, xi2)
        nz = xi1b != 0
        out[nz] = self.psi1.spectrum_at(xi1b[nz]) * self.psi2(xi2b[nz] / xi1b[nz])
        return out

    def atom_spectrum(self, xi1, xi2, b=(0.0, 0.0), s: float = 0.0, a: float = 1.0) -> np.ndarray:
        """F(S_{b,s,a} psi) at the given frequencies, evaluated in closed form."""
        a = _check_a(a)
        h = abs(a) ** (1.0 - self.gamma)
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        xi1b, xi2b = np.broadcast_arrays(xi1, xi2)
        out = np.zeros(xi1b.shape, dtype=complex)
        nz = xi1b != 0
        # t(h) xi = a (xi1, |a|^(gamma-1) (xi2 - s xi1)): the sign of a cancels in the slope
        u = (xi2b[nz] / xi1b[nz] - s) / h
        out[nz] = self.psi1.spectrum_at(a * xi1b[nz]) * self.psi2(u)
        out *= abs(a) ** ((1.0 + self.gamma) / 2.0)
        if b[0] != 0.0 or b[1] != 0.0:
            out *= np.exp(-2j * np.pi * (b[0] * xi1b + b[1] * xi2b))
        return out

    def frequency_box(self, s: float, a: float) -> tuple[float, float]:
        """Largest |xi1| and |xi2| reached by the atom's spectrum."""
        hi = self.psi1_support[1] / abs(a)
        h = abs(a) ** (1.0 - self.gamma)
        return hi, hi * (abs(s) + h * self.psi2.support)


def make_mother(psi1="meyer-annulus", psi2="bump", gamma: float = 0.5) -> MotherShearlet:
    w = wavelet_from_id(psi1) if isinstance(psi1, str) else psi1
    p2 = slope_window_from_id(psi2) if isinstance(psi2, str) else psi2
    return MotherShearlet(w, p2, float(gamma))


def mother_from_id(text: str) -> MotherShearlet:
    """Parse ``psi1=<preset>;psi2=<preset>;gamma=<g>`` (any subset, defaults fill in)."""
    parts = {"psi1": "meyer-annulus", "psi2": "bump", "gamma": "0.5"}
    text = text.strip()
    if text and text != "default":
        for item in text.split(";"):
            if "=" not in item:
                raise ParseError(f"bad mother spec item {item!r}", module="shearlet2d")
            k, v = item.split("=", 1)
            if k.strip() not in parts:
                raise ParseError(f"unknown mother key {k!r}", module="shearlet2d")
            parts[k.strip()] = v.strip()
    try:
        gamma = float(parts["gamma"])
    except ValueError as exc:
        raise ParseError(f"bad gamma {parts['gamma']!r}", module="shearlet2d") from exc
    return make_mother(parts["psi1"], parts["psi2"], gamma)


def _check_a(a: float) -> float:
    a = float(a)
    if a == 0.0 or not np.isfinite(a):
        raise DomainError(f"scale must be finite and nonzero, got {a}", module="shearlet2d")
    return a


# -- lattice and volumes ----------------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    """Sampling of (b, s, a): b on the image grid, a = +-2^-j, s = k |a|^(1-gamma) s_step."""

    nx: int
    ny: int
    dx: float
    J: int = 3
    s_max: float = 1.5
    s_step: float = 0.5
    signs: tuple[int, ...] = (1, -1)
    gamma: float = 0.5

    @classmethod
    def for_image(cls, img: Image2D, **kw) -> "Lattice":
        return cls(img.nx, img.ny, img.dx, **kw)

    @property
    def a_values(self) -> list[float]:
        return [sign * 2.0 ** (-j) for sign in self.signs for j in range(self.J + 1)]

    def s_values(self, a: float) -> np.ndarray:
        step = self.s_step * abs(a) ** (1.0 - self.gamma)
        k = int(math.floor(self.s_max / step + 1e-9))
        return np.arange(-k, k + 1) * step

    def slices(self) -> list[tuple[float, float, float, float]]:
        """``(s, a, ds, da)`` for every slice; ``da = |a| ln 2`` is the log-spaced step."""
        out = []
        for a in self.a_values:
            ds = self.s_step * abs(a) ** (1.0 - self.gamma)
            for s in self.s_values(a):
                out.append((float(s), a, ds, abs(a) * math.log(2.0)))
        return out

    def weight(self, ds: float, a: float, da: float) -> float:
        """db ds da / |a|^3 with the G-Haar density of the standard group."""
        _, g_density = haar_density(DilationFamily.standard(2, self.gamma), a)
        return self.dx**2 * ds * da * g_density

    @property
    def b_x(self) -> np.ndarray:
        return centered_grid(self.nx, self.dx)

    @property
    def b_y(self) -> np.ndarray:
        return centered_grid(self.ny, self.dx)

    def as_dict(self) -> dict:
        return {
            "nx": self.nx,
            "ny": self.ny,
            "dx": self.dx,
            "J": self.J,
            "s_max": self.s_max,
            "s_step": self.s_step,
            "signs": list(self.signs),
            "gamma": self.gamma,
        }


@dataclass(frozen=True, eq=False)
class CoefficientVolume:
    """Coefficients S_psi f(b, s, a) stored slice by slice.

    The number of shears depends on the scale, so the natural layout is a
    list of ``(ny, nx)`` arrays with per-slice ``s``, ``a`` and weight.
    """

    lattice: Lattice
    s: np.ndarray
    a: np.ndarray
    weights: np.ndarray
    values: tuple[np.ndarray, ...]
    mother_id: str = ""
    c_psi: float = float("nan")

    def __post_init__(self):
        n = len(self.values)
        if not (len(self.s) == len(self.a) == len(self.weights) == n):
            raise ShapeError("slice metadata and values disagree in length", module="shearlet2d")
        if np.any(np.asarray(self.weights) <= 0):
            raise DomainError("quadrature weights must be positive", module="shearlet2d")
        shape = (self.lattice.ny, self.lattice.nx)
        for v in self.values:
            if v.shape != shape:
                raise ShapeError(f"slice shape {v.shape} differs from lattice {shape}", module="shearlet2d")

    @property
    def n_slices(self) -> int:
        return len(self.values)

    def stacked(self) -> np.ndarray:
        return np.stack(self.values)

    def slice_index(self, s: float, a: float) -> int:
        for i, (si, ai) in enumerate(zip(self.s, self.a)):
            if abs(si - s) < 1e-12 and abs(ai - a) < 1e-12:
                return i
        raise DomainError(f"(s, a) = ({s}, {a}) is not a lattice slice", module="shearlet2d")

    def energy(self) -> float:
        return float(sum(w * np.sum(np.abs(v) ** 2) for w, v in zip(self.weights, self.values)))

    def relative_distance(self, other: "CoefficientVolume") -> float:
        if self.n_slices != other.n_slices:
            raise ShapeError("volumes have different lattices", module="shearlet2d")
        num = sum(np.sum(np.abs(x - y) ** 2) for x, y in zip(self.values, other.values))
        den = sum(np.sum(np.abs(y) ** 2) for y in other.values)
        return float(np.sqrt(num / den)) if den > 0 else (0.0 if num == 0 else float("inf"))

    def __add__(self, other: "CoefficientVolume") -> "CoefficientVolume":
        return CoefficientVolume(
            self.lattice, self.s, self.a, self.weights,
            tuple(x + y for x, y in zip(self.values, other.values)), self.mother_id, self.c_psi,
        )

    def scaled(self, c: complex) -> "CoefficientVolume":
        return CoefficientVolume(
            self.lattice, self.s, self.a, self.weights, tuple(c * x for x in self.values), self.mother_id, self.c_psi
        )


def _volume(lattice: Lattice, m: MotherShearlet, slices, values) -> CoefficientVolume:
    return CoefficientVolume(
        lattice,
        np.array([sl[0] for sl in slices]),
        np.array([sl[1] for sl in slices]),
        np.array([lattice.weight(sl[2], sl[1], sl[3]) for sl in slices]),
        tuple(values),
        m.id,
        m.c_psi,
    )


def check_alias_free(m: MotherShearlet, s: float, a: float, dx: float) -> None:
    nyq = 0.5 / dx
    x1, x2 = m.frequency_box(s, a)
    if x1 >= nyq or x2 >= nyq:
        raise AliasingError(
            f"atom (s={s:g}, a={a:g}) reaches |xi1|={x1:.4g}, |xi2|={x2:.4g} beyond Nyquist {nyq:g}",
            module="shearlet2d",
        )


# -- direct route ----------------------------------------------------------------


def _freq_mesh(nx: int, ny: int, dx: float) -> tuple[np.ndarray, np.ndarray]:
    return np.meshgrid(frequency_grid(nx, dx), frequency_grid(ny, dx))


def _spectrum2(values: np.ndarray, dx: float) -> np.ndarray:
    return fft_centered(fft_centered(values, dx, axis=1), dx, axis=0)


def _ispectrum2(spec: np.ndarray, dx: float) -> np.ndarray:
    return ifft_centered(ifft_centered(spec, dx, axis=0), dx, axis=1)


def shear_atom(m: MotherShearlet, b, s: float, a: float, nx: int = 256, ny: int | None = None, dx: float = 1.0 / 64.0) -> Image2D:
    """Samples of S_{b,s,a} psi from its closed-form spectrum."""
    ny = nx if ny is None else ny
    check_alias_free(m, s, a, dx)
    X1, X2 = _freq_mesh(nx, ny, dx)
    return Image2D(_ispectrum2(m.atom_spectrum(X1, X2, tuple(b), s, a), dx), dx)


def direct_transform(img: Image2D, m: MotherShearlet, lattice: Lattice | None = None) -> CoefficientVolume:
    """<f, S_{b,s,a} psi> for all b on the image grid, one inverse FFT per (s, a)."""
    lattice = lattice or Lattice.for_image(img, gamma=m.gamma)
    _check_lattice(img, lattice, m)
    fhat = img.spectrum()
    X1, X2 = _freq_mesh(img.nx, img.ny, img.dx)
    slices = lattice.slices()
    out = []
    for s, a, _, _ in slices:
        check_alias_free(m, s, a, img.dx)
        out.append(_ispectrum2(fhat * np.conj(m.atom_spectrum(X1, X2, (0.0, 0.0), s, a)), img.dx))
    return _volume(lattice, m, slices, out)


def coefficient_at(img: Image2D, m: MotherShearlet, b, s: float, a: float) -> complex:
    """A single coefficient at an arbitrary (b, s, a), by direct spectral summation."""
    X1, X2 = _freq_mesh(img.nx, img.ny, img.dx)
    atom = m.atom_spectrum(X1, X2, tuple(b), s, a)
    dxi = 1.0 / (img.nx * img.dx) * 1.0 / (img.ny * img.dx)
    return complex(np.sum(img.spectrum() * np.conj(atom)) * dxi)


def _check_lattice(img: Image2D, lattice: Lattice, m: MotherShearlet) -> None:
    if (lattice.nx, lattice.ny) != (img.nx, img.ny) or abs(lattice.dx - img.dx) > 1e-15:
        raise ShapeError("lattice b grid must match the image grid", module="shearlet2d")
    if abs(lattice.gamma - m.gamma) > 1e-15:
        raise DomainError("lattice and mother use different gamma", module="shearlet2d")


def reconstruct(vol: CoefficientVolume, m: MotherShearlet, lattice: Lattice | None = None) -> Image2D:
    """(1 / C_psi) sum over the lattice of coefficient * atom * weight."""
    lattice = lattice or vol.lattice
    if not m.c_psi > 0:
        raise DomainError("C_psi must be positive for reconstruction", module="shearlet2d")
    nx, ny, dx = lattice.nx, lattice.ny, lattice.dx
    X1, X2 = _freq_mesh(nx, ny, dx)
    acc = np.zeros((ny, nx), dtype=complex)
    for s, a, w, c in zip(vol.s, vol.a, vol.weights, vol.values):
        # sum_b c(b) S_{b,s,a} psi db has spectrum fft(c) * atom_0; db is inside both w and fft_centered
        acc += (w / dx**2) * _spectrum2(c, dx) * m.atom_spectrum(X1, X2, (0.0, 0.0), s, a)
    return Image2D(_ispectrum2(acc / m.c_psi, dx), dx)


# -- acting on images ----------------------------------------------------------------


def apply_shearlet_operator(img: Image2D, b, s: float, a: float, gamma: float = 0.5) -> Image2D:
    """S_{b,s,a} f for a band-limited sampled f.

    F(S f)(xi) = |a|^((1+gamma)/2) e^{-2 pi i b.xi} F f(a xi1, a Lambda (xi2 - s xi1)) is
    evaluated exactly by a separable non-uniform DFT of the samples; spectral
    points outside the source Nyquist box are set to 0.
    """
    a = _check_a(a)
    if a == 1.0 and s == 0.0 and b[0] == 0.0 and b[1] == 0.0:
        return img
    lam = abs(a) ** (gamma - 1.0)
    dx = img.dx
    x, y = img.x, img.y
    xi1, xi2 = img.xi1, img.xi2
    e1 = np.exp(-2j * np.pi * np.outer(x, a * xi1)) * dx  # (nx, n_xi1)
    p = img.values @ e1  # (ny, n_xi1): rows y_k, columns xi1
    p = p * np.exp(2j * np.pi * a * lam * s * np.outer(y, xi1))
    e2 = np.exp(-2j * np.pi * np.outer(a * lam * xi2, y)) * dx  # (n_xi2, ny)
    spec = e2 @ p
    X1, X2 = np.meshgrid(xi1, xi2)
    eta1 = a * X1
    eta2 = a * lam * (X2 - s * X1)
    nyq = img.nyquist
    # the sampled box is [-nyq, nyq) on each axis
    tol = 1e-12 * nyq
    outside = (eta1 < -nyq - tol) | (eta1 >= nyq - tol) | (eta2 < -nyq - tol) | (eta2 >= nyq - tol)
    spec[outside] = 0.0
    spec *= abs(a) ** ((1.0 + gamma) / 2.0) * np.exp(-2j * np.pi * (b[0] * X1 + b[1] * X2))
    vals = _ispectrum2(spec, dx)
    if not np.iscomplexobj(img.values):
        vals = vals.real
    return Image2D(vals, dx)


# -- Radon route -------------------------------------------------------------------------


def scale_filter(m: MotherShearlet, a: float, v_grid) -> np.ndarray:
    """Phi_a(v) = conj(phi2(-v / |a|^(1-gamma))) on the given slopes."""
    a = _check_a(a)
    v = np.asarray(v_grid, dtype=float)
    return np.conj(m.phi2(-v / abs(a) ** (1.0 - m.gamma)))


def _bspline_eval(coef: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Evaluate cubic B-spline coefficients ``coef[i, :]`` at fractional indices ``pos[i, :]``."""
    n = coef.shape[1]
    i0 = np.floor(pos).astype(np.intp)
    f = pos - i0
    f2 = f * f
    f3 = f2 * f
    w0 = (1.0 - f) ** 3 / 6.0
    w1 = (3.0 * f3 - 6.0 * f2 + 4.0) / 6.0
    w2 = (-3.0 * f3 + 3.0 * f2 + 3.0 * f + 1.0) / 6.0
    w3 = f3 / 6.0
    rows = np.arange(coef.shape[0])[:, None] * n
    flat = coef.ravel()

    def tap(k):
        idx = np.clip(i0 + k, 0, n - 1)
        return flat[rows + idx]

    return w0 * tap(-1) + w1 * tap(0) + w2 * tap(1) + w3 * tap(2)


def _cwt_columns(spec: np.ndarray, tau: np.ndarray, dt: float, w: Wavelet1D, a: float, oversample: int) -> tuple[np.ndarray, float, float]:
    """Per-column CWT on a t grid refined ``oversample`` times; returns (values, t0, h)."""
    n = spec.shape[1]
    prod = spec * np.conj(math.sqrt(abs(a)) * w.spectrum_at(a * tau))[None, :]
    big = n * oversample
    padded = np.zeros((spec.shape[0], big), dtype=complex)
    start = big // 2 - n // 2
    padded[:, start : start + n] = prod
    h = dt / oversample
    vals = ifft_centered(padded, h, axis=1)
    return vals, -(big // 2) * h, h


def _slope_support(m: MotherShearlet, s_values, a: float, v_grid: np.ndarray) -> np.ndarray:
    h = abs(a) ** (1.0 - m.gamma)
    reach = m.psi2.support * h
    lo, hi = float(np.min(s_values)) - reach, float(np.max(s_values)) + reach
    if lo < v_grid[0] - 1e-12 or hi > v_grid[-1] + 1e-12:
        raise CoverageError(
            f"scale a={a:g}: slope filter needs v in [{lo:.4g}, {hi:.4g}] beyond the sinogram range "
            f"[{v_grid[0]:.4g}, {v_grid[-1]:.4g}]",
            module="shearlet2d",
        )
    return np.nonzero((v_grid > lo) & (v_grid < hi))[0]


def _v_weights(v_grid: np.ndarray) -> np.ndarray:
    w = np.empty_like(v_grid)
    w[1:-1] = 0.5 * (v_grid[2:] - v_grid[:-2])
    w[0] = 0.5 * (v_grid[1] - v_grid[0])
    w[-1] = 0.5 * (v_grid[-1] - v_grid[-2])
    return w


def pipeline_transform(
    sino: Sinogram,
    m: MotherShearlet,
    lattice: Lattice,
    *,
    oversample: int = 2,
    chunk: int = 8192,
) -> CoefficientVolume:
    """Shearlet coefficients from a sinogram alone.

    A raw sinogram is analysed with chi1 and prefactor ``|a|^((gamma-2)/2)``;
    a riesz-applied one (Q f) with phi1 and ``|a|^((gamma-1)/2)``.  For each
    scale the column CWTs are computed once, interpolated (cubic spline) at
    ``beta = x + v y`` for every pixel, and integrated over v by the
    trapezoid rule against ``conj(phi2((v - s) / |a|^(1-gamma)))``.
    """
    if sino.stage == RAW:
        w, path = m.chi1, "chi"
    elif sino.stage == RIESZ:
        w, path = m.phi1, "phi"
    else:  # pragma: no cover - Sinogram validates its stage
        raise StageError(f"unknown stage {sino.stage!r}", module="shearlet2d")
    if abs(lattice.gamma - m.gamma) > 1e-15:
        raise DomainError("lattice and mother use different gamma", module="shearlet2d")
    expo = prefactor_exponent(m.family, path)
    v_grid = sino.v_grid
    spec = sino.column_spectra()
    tau = sino.tau
    vw = _v_weights(v_grid)
    bx, by = lattice.b_x, lattice.b_y
    BX, BY = np.meshgrid(bx, by)
    px, py = BX.ravel(), BY.ravel()
    slices = lattice.slices()
    by_scale: dict[float, list[int]] = {}
    for i, (_, a, _, _) in enumerate(slices):
        by_scale.setdefault(a, []).append(i)
    out: list[np.ndarray | None] = [None] * len(slices)
    npix = px.size
    for a, idx in by_scale.items():
        s_vals = np.array([slices[i][0] for i in idx])
        vsel = _slope_support(m, s_vals, a, v_grid)
        h = abs(a) ** (1.0 - m.gamma)
        # quadrature matrix over the selected slopes, one row per shear
        filt = scale_filter(m, a, s_vals[:, None] - v_grid[vsel][None, :]) * vw[vsel][None, :]
        filt *= abs(a) ** expo
        g, t0, ht = _cwt_columns(spec[vsel], tau, sino.dt, w, a, oversample)
        real = not np.iscomplexobj(sino.values) and np.allclose(w.spectrum_at(-tau), np.conj(w.spectrum_at(tau)))
        if real:
            g = g.real
        coef = spline_filter1d(g.real, order=3, axis=1, mode="mirror")
        if not real:
            coef = coef + 1j * spline_filter1d(g.imag, order=3, axis=1, mode="mirror")
        vv = v_grid[vsel][:, None]
        res = np.empty((len(idx), npix), dtype=complex)
        for c0 in range(0, npix, chunk):
            c1 = min(npix, c0 + chunk)
            beta = px[None, c0:c1] + vv * py[None, c0:c1]
            pos = (beta - t0) / ht
            if pos.min() < 1 or pos.max() > g.shape[1] - 3:
                raise CoverageError("n(v).b leaves the sinogram t range", module="shearlet2d")
            vals = _bspline_eval(coef, pos)
            res[:, c0:c1] = filt @ vals
        for k, i in enumerate(idx):
            out[i] = res[k].reshape(lattice.ny, lattice.nx)
    return _volume(lattice, m, slices, out)


# -- intertwining ----------------------------------------------------------------------


def _interp2(values: np.ndarray, v_grid: np.ndarray, t_grid: np.ndarray, vq: np.ndarray, tq: np.ndarray, order: int) -> np.ndarray:
    cv = (vq - v_grid[0]) / (v_grid[1] - v_grid[0])
    ct = (tq - t_grid[0]) / (t_grid[1] - t_grid[0])
    iv, it = np.rint(cv), np.rint(ct)
    if np.array_equal(iv, cv) and np.array_equal(it, ct):
        # queries on the nodes: gather, so the identity map is exact
        inside = (iv >= 0) & (iv < values.shape[0]) & (it >= 0) & (it < values.shape[1])
        out = np.zeros(vq.shape, dtype=values.dtype)
        out[inside] = values[iv[inside].astype(np.intp), it[inside].astype(np.intp)]
        return out
    coords = np.stack([cv.ravel(), ct.ravel()])

    def run(arr):
        return map_coordinates(arr, coords, order=order, mode="constant", cval=0.0).reshape(vq.shape)

    if np.iscomplexobj(values):
        return run(values.real) + 1j * run(values.imag)
    return run(values)


def intertwined_sinogram(q: Sinogram, b, s: float, a: float, gamma: float = 0.5, order: int = 5) -> Sinogram:
    """(V_{s,a} (x) W_{n(v).b, a}) applied to a sinogram of Q f.

    Value at (v, t): ``|a|^((gamma-1)/2) |a|^(-1/2) Qf((v - s)/|a|^(1-gamma), (t - n(v).b)/a)``,
    read off by spline interpolation (zero outside the sampled grid).  Raises
    a coverage error if the map misses more than 1e-6 of the input energy.
    """
    a = _check_a(a)
    v, t = q.v_grid, q.t_grid
    vp = (v - s) / abs(a) ** (1.0 - gamma)
    beta = b[0] + v * b[1]
    tp = (t[None, :] - beta[:, None]) / a
    _check_intertwine_coverage(q, vp, tp)
    vals = _interp2(q.values, v, t, np.broadcast_to(vp[:, None], tp.shape), tp, order)
    vals = vals * abs(a) ** ((gamma - 1.0) / 2.0 - 0.5)
    return q.with_values(vals)


def _check_intertwine_coverage(q: Sinogram, vp: np.ndarray, tp: np.ndarray) -> None:
    energy = np.abs(q.values) ** 2
    total = energy.sum()
    if total == 0:
        return
    vmask = (q.v_grid >= vp.min()) & (q.v_grid <= vp.max())
    tmask = (q.t_grid >= tp.min()) & (q.t_grid <= tp.max())
    missed = total - energy[np.ix_(vmask, tmask)].sum()
    if missed > 1e-6 * total:
        raise CoverageError(
            f"intertwined grid misses {missed / total:.2e} of the sinogram energy", module="shearlet2d"
        )


def intertwine_residual(img: Image2D, b, s: float, a: float, *, gamma: float = 0.5, v_grid=None, t_grid=None) -> float:
    """Relative L2(v, t) distance between Q S_{b,s,a} f and (V (x) W) Q f."""
    from .radon2d import unitary_Q

    lhs = unitary_Q(apply_shearlet_operator(img, b, s, a, gamma), v_grid, t_grid)
    q = unitary_Q(img, v_grid, t_grid)
    rhs = intertwined_sinogram(q, b, s, a, gamma)
    diff = lhs.with_values(lhs.values - rhs.values)
    den = lhs.norm
    return diff.norm / den if den > 0 else (0.0 if diff.norm == 0 else float("inf"))
