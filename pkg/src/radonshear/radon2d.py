"""Affine Radon transform of sampled 2D images.

Images are stored as ``values[iy, ix]`` with ``x`` along axis 1 and ``y``
along axis 0, both on centered grids with spacing ``dx``.  The affine Radon
transform integrates along the lines ``x + v y = t``::

    R f(v, t) = integral f(t - v y, y) dy

and a :class:`Sinogram` stores it as ``values[iv, it]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from scipy.ndimage import map_coordinates

from .errors import CoverageError, DomainError, ShapeError, SizeError, StageError
from .signal1d import centered_grid, fft_centered, frequency_grid, ifft_centered, is_power_of_two

RAW = "raw"
RIESZ = "riesz-applied"
STAGES = (RAW, RIESZ)

DEFAULT_VMAX = 3.0
DEFAULT_NV = 257
NEAR_HORIZONTAL_FLAG = "near-horizontal energy; unitarity degraded"


@dataclass(frozen=True, eq=False)
class Image2D:
    """Samples ``values[iy, ix]`` on a centered square-pixel grid.

    ``band_limit`` (fraction of Nyquist) is a certificate checked at
    construction: spectral energy outside that disc must be <= 1e-10.
    """

    values: np.ndarray
    dx: float
    band_limit: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 2:
            raise ShapeError(f"Image2D needs a 2D array, got shape {vals.shape}", module="radon2d")
        ny, nx = vals.shape
        if not (is_power_of_two(nx) and is_power_of_two(ny)):
            raise SizeError(f"image dims must be powers of two, got {ny}x{nx}", module="radon2d")
        if not self.dx > 0:
            raise DomainError(f"dx must be positive, got {self.dx}", module="radon2d")
        if not np.all(np.isfinite(vals)):
            raise DomainError("image contains non-finite samples", module="radon2d")
        vals = vals.astype(complex if np.iscomplexobj(vals) else float, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.band_limit is not None:
            leak = self.energy_outside(self.band_limit)
            if leak > 1e-10:
                raise DomainError(
                    f"band_limit {self.band_limit} violated: relative energy outside disc {leak:.3e}",
                    module="radon2d",
                )

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return centered_grid(self.nx, self.dx)

    @property
    def y(self) -> np.ndarray:
        return centered_grid(self.ny, self.dx)

    @property
    def xi1(self) -> np.ndarray:
        return frequency_grid(self.nx, self.dx)

    @property
    def xi2(self) -> np.ndarray:
        return frequency_grid(self.ny, self.dx)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.dx

    @property
    def radius(self) -> float:
        """Half-width of the sampled square."""
        return 0.5 * max(self.nx, self.ny) * self.dx

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.dx)

    def spectrum(self) -> np.ndarray:
        """Centered continuous-FT approximation ``F[i_xi2, i_xi1]``."""
        return fft_centered(fft_centered(self.values, self.dx, axis=1), self.dx, axis=0)

    def energy_outside(self, fraction: float) -> float:
        spec = np.abs(self.spectrum()) ** 2
        total = spec.sum()
        if total == 0:
            return 0.0
        r = np.hypot(*np.meshgrid(self.xi1, self.xi2))
        return float(spec[r > fraction * self.nyquist].sum() / total)

    def inner(self, other: "Image2D") -> complex:
        return complex(np.vdot(other.values, self.values) * self.dx**2)


def image_from_spectrum(spec: np.ndarray, dx: float, real: bool = False) -> Image2D:
    vals = ifft_centered(ifft_centered(spec, dx, axis=0), dx, axis=1)
    return Image2D(vals.real if real else vals, dx)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Samples ``values[iv, it]`` of an affine Radon transform (or of Q f)."""

    v_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    stage: str = RAW
    flags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        v = np.asarray(self.v_grid, dtype=float)
        t = np.asarray(self.t_grid, dtype=float)
        vals = np.asarray(self.values)
        if vals.shape != (v.size, t.size):
            raise ShapeError(f"values shape {vals.shape} does not match grids ({v.size}, {t.size})", module="radon2d")
        if self.stage not in STAGES:
            raise StageError(f"unknown stage {self.stage!r}", module="radon2d")
        if t.size < 2 or not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0):
            raise ShapeError("t grid must be uniform", module="radon2d")
        for name, arr in (("v_grid", v), ("t_grid", t), ("values", vals)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_v(self) -> int:
        return self.v_grid.size

    @property
    def n_t(self) -> int:
        return self.t_grid.size

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def dv(self) -> float:
        return float(self.v_grid[1] - self.v_grid[0]) if self.n_v > 1 else 1.0

    @property
    def vmax(self) -> float:
        return float(np.max(np.abs(self.v_grid)))

    @property
    def tau(self) -> np.ndarray:
        return frequency_grid(self.n_t, self.dt)

    def column_spectra(self) -> np.ndarray:
        """F_t of every column, on :attr:`tau`."""
        return fft_centered(self.values, self.dt, axis=1)

    @property
    def norm(self) -> float:
        """L2(v, t) norm with trapezoid weights in v."""
        col = np.sum(np.abs(self.values) ** 2, axis=1) * self.dt
        return float(np.sqrt(np.trapezoid(col, self.v_grid))) if self.n_v > 1 else float(np.sqrt(col[0]))

    def inner(self, other: "Sinogram") -> complex:
        col = np.sum(self.values * np.conj(other.values), axis=1) * self.dt
        return complex(np.trapezoid(col, self.v_grid))

    def with_values(self, values: np.ndarray, stage: str | None = None) -> "Sinogram":
        return Sinogram(self.v_grid, self.t_grid, values, stage or self.stage, self.flags)


@dataclass(frozen=True, eq=False)
class PolarSinogram:
    """Samples ``values[itheta, it]`` of the polar Radon transform, theta in [0, pi)."""

    theta_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta_grid, dtype=float)
        vals = np.asarray(self.values)
        if vals.shape != (th.size, np.size(self.t_grid)):
            raise ShapeError("values shape does not match grids", module="radon2d")
        if np.any(th < 0) or np.any(th >= np.pi) or np.any(np.diff(th) <= 0):
            raise DomainError("theta grid must be increasing inside [0, pi)", module="radon2d")


# -- grids ------------------------------------------------------------------


def default_v_grid(vmax: float = DEFAULT_VMAX, n_v: int = DEFAULT_NV) -> np.ndarray:
    if n_v < 2 or vmax <= 0:
        raise DomainError("need vmax > 0 and at least two slopes", module="radon2d")
    return np.linspace(-vmax, vmax, n_v)


def default_t_grid(img: Image2D, vmax: float = DEFAULT_VMAX) -> np.ndarray:
    """Spacing dx; length the next power of two covering 2.2 R (1 + vmax) and 2 nx."""
    need = max(2 * max(img.nx, img.ny), math.ceil(2.2 * img.radius * (1.0 + vmax) / img.dx))
    n_t = 1 << (need - 1).bit_length()
    return centered_grid(n_t, img.dx)


def _check_coverage(img: Image2D, v_grid: np.ndarray, t_grid: np.ndarray) -> None:
    reach = img.radius * (1.0 + float(np.max(np.abs(v_grid))))
    if min(-t_grid[0], t_grid[-1]) < reach:
        raise CoverageError(
            f"t grid [{t_grid[0]:.4g}, {t_grid[-1]:.4g}] does not cover |t| <= R(1+Vmax) = {reach:.4g}",
            module="radon2d",
        )


# -- transforms -------------------------------------------------------------


def _padded_rows(img: Image2D, n_t: int) -> np.ndarray:
    rows = np.zeros((img.ny, n_t), dtype=img.values.dtype)
    start = n_t // 2 - img.nx // 2
    rows[:, start : start + img.nx] = img.values
    return rows


def _radon_fourier(img: Image2D, v_grid: np.ndarray, n_t: int) -> np.ndarray:
    # band-limited row shifts: column spectrum at tau is sum_k F_row_k(tau) e^{-2 pi i tau v y_k} dy,
    # evaluated for all uniformly spaced v at once with a chirp z-transform per tau
    dx = img.dx
    row_spec = fft_centered(_padded_rows(img, n_t), dx, axis=1)
    tau = frequency_grid(n_t, dx)
    kprime = np.arange(img.ny) - img.ny // 2
    v0, dv, n_v = float(v_grid[0]), float(v_grid[1] - v_grid[0]), v_grid.size
    jj = np.arange(n_v)
    out = np.zeros((n_v, n_t), dtype=complex)
    for m in range(n_t):
        col = row_spec[:, m]
        if not np.any(col):
            continue
        omega = -2.0 * np.pi * tau[m] * dx
        x = col * np.exp(1j * omega * v0 * kprime)
        w = np.exp(1j * omega * dv)
        vals = signal.czt(x, n_v, w=w, a=1.0)
        out[:, m] = vals * np.exp(1j * omega * dv * jj * kprime[0]) * dx
    return ifft_centered(out, dx, axis=1)


def _radon_linear(img: Image2D, v_grid: np.ndarray, t_grid: np.ndarray, oversample: int) -> np.ndarray:
    if oversample > 1:
        n_fine = img.nx * oversample
        spec = fft_centered(img.values, img.dx, axis=1)
        pad = np.zeros((img.ny, n_fine), dtype=complex)
        s = n_fine // 2 - img.nx // 2
        pad[:, s : s + img.nx] = spec
        rows = ifft_centered(pad, img.dx / oversample, axis=1)
        if not np.iscomplexobj(img.values):
            rows = rows.real
        hx = img.dx / oversample
    else:
        rows, hx = img.values, img.dx
    nxf = rows.shape[1]
    x0 = -(nxf // 2) * hx
    # zero border so out-of-support lookups read 0
    padded = np.concatenate([np.zeros((img.ny, 1), rows.dtype), rows, np.zeros((img.ny, 2), rows.dtype)], axis=1)
    y = img.y[:, None]
    out = np.zeros((v_grid.size, t_grid.size), dtype=rows.dtype)
    rix = np.arange(img.ny)[:, None]
    for i, v in enumerate(v_grid):
        pos = (t_grid[None, :] - v * y - x0) / hx
        pos = np.clip(pos, -1.0, nxf)
        lo = np.floor(pos).astype(int)
        frac = pos - lo
        vals = padded[rix, lo + 1] * (1.0 - frac) + padded[rix, lo + 2] * frac
        out[i] = vals.sum(axis=0) * img.dx
    return out


def affine_radon(
    img: Image2D,
    v_grid=None,
    t_grid=None,
    *,
    method: str = "fourier",
    oversample: int = 4,
) -> Sinogram:
    """Discrete affine Radon transform.

    ``method="fourier"`` shifts each row by ``v y`` with its band-limited
    (trigonometric) interpolant, which is exact for band-limited images up
    to rounding.  ``method="linear"`` sums linearly interpolated rows,
    optionally upsampled by ``oversample`` first.  The t grid must have
    spacing ``dx`` for the Fourier method.
    """
    v = default_v_grid() if v_grid is None else np.asarray(v_grid, dtype=float)
    t = default_t_grid(img, float(np.max(np.abs(v)))) if t_grid is None else np.asarray(t_grid, dtype=float)
    _check_coverage(img, v, t)
    if method == "fourier":
        if not np.allclose(t, centered_grid(t.size, img.dx), rtol=0, atol=1e-12 * img.dx * t.size):
            raise ShapeError("fourier method needs the centered t grid with spacing dx", module="radon2d")
        if v.size > 1 and not np.allclose(np.diff(v), v[1] - v[0], rtol=1e-9, atol=0):
            raise ShapeError("fourier method needs a uniform v grid", module="radon2d")
        if v.size == 1:
            vals = _radon_fourier(img, np.array([v[0], v[0] + 1.0]), t.size)[:1]
        else:
            vals = _radon_fourier(img, v, t.size)
        if not np.iscomplexobj(img.values):
            vals = vals.real
    elif method == "linear":
        vals = _radon_linear(img, v, t, max(1, int(oversample)))
    else:
        raise DomainError(f"unknown Radon method {method!r}", module="radon2d")
    return Sinogram(v, t, vals, RAW)


def apply_riesz(sino: Sinogram, exponent: float = 0.5) -> Sinogram:
    """Multiply every column's t-spectrum by |tau|^exponent (DC bin zeroed)."""
    if sino.stage != RAW:
        raise StageError(f"apply_riesz needs a raw sinogram, got stage {sino.stage!r}", module="radon2d")
    spec = sino.column_spectra()
    tau = np.abs(sino.tau)
    mult = np.where(tau > 0, tau ** float(exponent), 0.0)
    vals = ifft_centered(spec * mult[None, :], sino.dt, axis=1)
    if not np.iscomplexobj(sino.values):
        vals = vals.real
    return Sinogram(sino.v_grid, sino.t_grid, vals, RIESZ, sino.flags)


def near_horizontal_fraction(img: Image2D, bins: int = 2) -> float:
    """Fraction of spectral energy with |xi1| < ``bins`` frequency bins."""
    spec = np.abs(img.spectrum()) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    mask = np.abs(img.xi1) < bins / (img.nx * img.dx)
    return float(spec[:, mask].sum() / total)


def unitary_Q(img: Image2D, v_grid=None, t_grid=None, **kwargs) -> Sinogram:
    """Q f = I R f, flagged when the image carries energy near xi1 = 0."""
    q = apply_riesz(affine_radon(img, v_grid, t_grid, **kwargs))
    if near_horizontal_fraction(img) >= 0.1:
        warnings.warn(NEAR_HORIZONTAL_FLAG, RuntimeWarning, stacklevel=2)
        q = Sinogram(q.v_grid, q.t_grid, q.values, q.stage, q.flags + (NEAR_HORIZONTAL_FLAG,))
    return q


# -- Fourier slice residual ---------------------------------------------------


def padded_spectrum(img: Image2D, pad: int = 4) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """2D spectrum on a grid refined ``pad`` times by zero padding in space."""
    ny, nx = img.ny * pad, img.nx * pad
    big = np.zeros((ny, nx), dtype=complex)
    y0, x0 = ny // 2 - img.ny // 2, nx // 2 - img.nx // 2
    big[y0 : y0 + img.ny, x0 : x0 + img.nx] = img.values
    spec = fft_centered(fft_centered(big, img.dx, axis=1), img.dx, axis=0)
    return spec, frequency_grid(nx, img.dx), frequency_grid(ny, img.dx)


def bilinear(spec: np.ndarray, g1: np.ndarray, g2: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of ``spec[i2, i1]`` at points (p1, p2); zero outside the grid."""
    h1, h2 = g1[1] - g1[0], g2[1] - g2[0]
    c1 = (p1 - g1[0]) / h1
    c2 = (p2 - g2[0]) / h2
    coords = np.stack([c2.ravel(), c1.ravel()])
    re = map_coordinates(spec.real, coords, order=1, mode="constant", cval=0.0)
    im = map_coordinates(spec.imag, coords, order=1, mode="constant", cval=0.0)
    return (re + 1j * im).reshape(p1.shape)


def default_pad(img: Image2D) -> int:
    """Zero-padding factor giving a refined spectrum grid of at least 2048 points."""
    return max(4, 2048 // max(img.nx, img.ny))


def fourier_slice_residual(img: Image2D, sino: Sinogram, pad: int | None = None, riesz_exponent: float | None = None) -> float:
    """Max over v of the relative L2 distance between F_t R f(v, .) and F f(tau, tau v).

    The right side is bilinearly interpolated from the 2D spectrum refined
    ``pad`` times by zero padding.  For a riesz-applied sinogram it is
    multiplied by ``|tau|^riesz_exponent`` (default 1/2).
    """
    pad = default_pad(img) if pad is None else pad
    if sino.stage == RIESZ and riesz_exponent is None:
        riesz_exponent = 0.5
    lhs = sino.column_spectra()
    spec, g1, g2 = padded_spectrum(img, pad)
    tau = sino.tau
    p1 = np.broadcast_to(tau[None, :], lhs.shape)
    p2 = sino.v_grid[:, None] * tau[None, :]
    rhs = bilinear(spec, g1, g2, p1, p2)
    if riesz_exponent:
        rhs = rhs * np.abs(tau)[None, :] ** riesz_exponent
    worst = 0.0
    for i in range(sino.n_v):
        den = np.linalg.norm(rhs[i])
        num = np.linalg.norm(lhs[i] - rhs[i])
        if den == 0:
            if num > 0:
                return float("inf")
            continue
        worst = max(worst, float(num / den))
    return worst


# -- polar chart --------------------------------------------------------------


def _interp_rows(values: np.ndarray, grid_in: np.ndarray, rows: np.ndarray, t_query: np.ndarray) -> np.ndarray:
    # linear interpolation in t of each selected row at its own query points, zero outside
    out = np.empty(t_query.shape, dtype=values.dtype)
    for i in range(t_query.shape[0]):
        r = values[rows[i]]
        if np.iscomplexobj(r):
            out[i] = np.interp(t_query[i], grid_in, r.real, 0, 0) + 1j * np.interp(t_query[i], grid_in, r.imag, 0, 0)
        else:
            out[i] = np.interp(t_query[i], grid_in, r, 0.0, 0.0)
    return out


def _interp_2d(values: np.ndarray, g0: np.ndarray, g1: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    c0 = np.interp(p0, g0, np.arange(g0.size))
    c1 = (p1 - g1[0]) / (g1[1] - g1[0])
    # snap rounding overshoot at the grid ends back inside
    last = g1.size - 1
    c1 = np.where((c1 > last) & (c1 < last + 1e-9), last, np.where((c1 < 0) & (c1 > -1e-9), 0.0, c1))
    coords = np.stack([c0.ravel(), c1.ravel()])

    def run(a):
        return map_coordinates(a, coords, order=1, mode="constant", cval=0.0).reshape(p0.shape)
    if np.iscomplexobj(values):
        return run(values.real) + 1j * run(values.imag)
    return run(values)


def _theta_and_sign(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # the normal n(v)/|n(v)| has angle arctan v in (-pi/2, pi/2); negative angles are
    # folded into [0, pi) with the orientation flip R_pol(theta + pi, t) = R_pol(theta, -t)
    th = np.arctan(v)
    sign = np.where(th < 0, -1.0, 1.0)
    return np.where(th < 0, th + np.pi, th), sign


def _theta_lookup(theta_grid: np.ndarray, th: np.ndarray) -> np.ndarray:
    # angles are periodic mod pi, so allow the wrap between the last sample and pi
    lo, hi = theta_grid[0], theta_grid[-1]
    inside = (th >= lo - 1e-12) & (th <= hi + 1e-12)
    if not np.all(inside):
        bad = th[~inside]
        raise CoverageError(
            f"slope maps to theta={bad[0]:.6g} outside sampled range [{lo:.6g}, {hi:.6g}]", module="radon2d"
        )
    return np.clip(th, lo, hi)


def polar_to_affine(p: PolarSinogram, v_grid, t_grid) -> Sinogram:
    """R_aff(v, t) = (1 + v^2)^(-1/2) R_pol(arctan v, t / sqrt(1 + v^2)), linear interpolation."""
    v = np.asarray(v_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    th, sign = _theta_and_sign(v)
    th = _theta_lookup(np.asarray(p.theta_grid), th)
    scale = 1.0 / np.sqrt(1.0 + v**2)
    tq = sign[:, None] * t[None, :] * scale[:, None]
    thq = np.broadcast_to(th[:, None], tq.shape)
    vals = _interp_2d(np.asarray(p.values), np.asarray(p.theta_grid), np.asarray(p.t_grid), thq, tq)
    return Sinogram(v, t, vals * scale[:, None], RAW)


def affine_to_polar(sino: Sinogram, theta_grid, t_grid) -> PolarSinogram:
    """Inverse chart change: R_pol(theta, t) = sqrt(1 + v^2) R_aff(v, t sqrt(1 + v^2)), v = tan theta."""
    if sino.stage != RAW:
        raise StageError("polar conversion applies to raw sinograms", module="radon2d")
    th = np.asarray(theta_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.abs(th - np.pi / 2) < 1e-12):
        raise CoverageError("theta = pi/2 has no affine slope", module="radon2d")
    v = np.tan(th)
    vmax = sino.vmax
    if np.any(v < sino.v_grid[0] - 1e-12) or np.any(v > sino.v_grid[-1] + 1e-12):
        raise CoverageError(f"theta grid needs slopes beyond Vmax={vmax:g}", module="radon2d")
    scale = np.sqrt(1.0 + v**2)
    # theta in (pi/2, pi) gives v < 0 with the flipped normal: R_pol(theta, t) = R_pol(theta - pi, -t)
    sign = np.where(th > np.pi / 2, -1.0, 1.0)
    tq = sign[:, None] * t[None, :] * scale[:, None]
    vq = np.broadcast_to(v[:, None], tq.shape)
    vals = _interp_2d(sino.values, sino.v_grid, sino.t_grid, vq, tq)
    return PolarSinogram(th, t, vals * scale[:, None])


def theta_grid_for(v_grid) -> np.ndarray:
    """Polar angles matching the slopes of an affine grid, sorted into [0, pi)."""
    th, _ = _theta_and_sign(np.asarray(v_grid, dtype=float))
    return np.unique(th)
