"""Bundled test images.

``gauss``
    ``exp(-pi (x^2 + y^2))``, whose affine Radon transform is known in
    closed form.

``cone-noise``
    A seeded sum of real Gabor atoms ``exp(-|x - c|^2 / (2 sigma^2)) cos(2 pi k.x + phi)``.
    Carrier frequencies are drawn with ``|k1|`` in a band of the Nyquist
    frequency and ``|k2| <= slope_max |k1|``, so the spectrum is a sum of
    Gaussian blobs of width ``1 / (2 pi sigma)`` inside a horizontal cone and
    away from the line ``xi1 = 0``.  Centers ``c`` are normal with standard
    deviation ``spread``; amplitudes are standard normal, phases uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .radon2d import Image2D
from .signal1d import centered_grid


def gauss_image(n: int = 512, dx: float = 1.0 / 32.0) -> Image2D:
    x = centered_grid(n, dx)
    return Image2D(np.exp(-np.pi * (x[None, :] ** 2 + x[:, None] ** 2)), dx)


def gauss_radon(v, t) -> np.ndarray:
    """Closed form of the affine Radon transform of the gauss phantom on the (v, t) mesh."""
    v = np.asarray(v, dtype=float)[:, None]
    t = np.asarray(t, dtype=float)[None, :]
    return np.exp(-np.pi * t**2 / (1.0 + v**2)) / np.sqrt(1.0 + v**2)


def gauss_spectrum(xi1, xi2) -> np.ndarray:
    return np.exp(-np.pi * (np.asarray(xi1) ** 2 + np.asarray(xi2) ** 2))


@dataclass(frozen=True)
class ConeNoiseConfig:
    n: int = 256
    dx: float = 1.0 / 64.0
    n_atoms: int = 12
    sigma: float = 0.18
    band: tuple[float, float] = (0.14, 0.17)  # |k1| as a fraction of Nyquist
    slope_max: float = 0.2
    spread: float = 0.1


def cone_noise(cfg: ConeNoiseConfig | None = None, seed: int = 0, **overrides) -> Image2D:
    cfg = cfg or ConeNoiseConfig()
    if overrides:
        cfg = ConeNoiseConfig(**{**cfg.__dict__, **overrides})
    if cfg.n_atoms < 1 or cfg.sigma <= 0:
        raise DomainError("cone-noise needs at least one atom and sigma > 0", module="cli")
    rng = np.random.default_rng(seed)
    nyq = 0.5 / cfg.dx
    x = centered_grid(cfg.n, cfg.dx)
    X, Y = np.meshgrid(x, x)
    out = np.zeros((cfg.n, cfg.n))
    for _ in range(cfg.n_atoms):
        k1 = rng.uniform(*cfg.band) * nyq * rng.choice([-1.0, 1.0])
        k2 = rng.uniform(-cfg.slope_max, cfg.slope_max) * abs(k1)
        cx, cy = rng.normal(0.0, cfg.spread, size=2)
        amp = rng.normal()
        phase = rng.uniform(0.0, 2.0 * np.pi)
        env = np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * cfg.sigma**2))
        out += amp * env * np.cos(2.0 * np.pi * (k1 * X + k2 * Y) + phase)
    return Image2D(out, cfg.dx)


PHANTOMS = ("gauss", "cone-noise")


def phantom(name: str, seed: int = 0, n: int | None = None) -> Image2D:
    if name == "gauss":
        return gauss_image() if n is None else gauss_image(n, 16.0 / n)
    if name == "cone-noise":
        return cone_noise(seed=seed) if n is None else cone_noise(seed=seed, n=n)
    raise DomainError(f"unknown phantom {name!r}; choose from {', '.join(PHANTOMS)}", module="cli")
