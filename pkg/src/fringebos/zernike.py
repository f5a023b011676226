"""Zernike polynomial phase-map evaluation (OSA/ANSI single indexing)."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt

import numpy as np

from .errors import EmptySpec
from .raster import RealField

MAX_TERMS = 20


@dataclass(frozen=True)
class ZernikeSpec:
    """Coefficients c_j for OSA/ANSI single index j = 0..J-1.

    The unit disk is the one inscribed in the image rectangle; outside the
    disk the polynomials are evaluated at the unclipped normalized
    coordinates (no masking).
    """

    coefficients: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))


def osa_to_nm(j: int) -> tuple[int, int]:
    """Map OSA/ANSI single index j to radial degree n and azimuthal order m."""
    n = 0
    while (n + 1) * (n + 2) // 2 <= j:
        n += 1
    m = 2 * j - n * (n + 2)
    return n, m


def _radial(n: int, m_abs: int, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in range((n - m_abs) // 2 + 1):
        coef = ((-1) ** k * factorial(n - k)
                / (factorial(k) * factorial((n + m_abs) // 2 - k) * factorial((n - m_abs) // 2 - k)))
        out += coef * rho ** (n - 2 * k)
    return out


def zernike_term(j: int, rho: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Normalized Zernike polynomial Z_j at (rho, theta); Z_1 = 2 rho sin(theta)."""
    n, m = osa_to_nm(j)
    norm = sqrt(2.0 * (n + 1)) if m != 0 else sqrt(n + 1.0)
    r = _radial(n, abs(m), rho)
    if m < 0:
        return norm * r * np.sin(abs(m) * theta)
    if m > 0:
        return norm * r * np.cos(m * theta)
    return norm * r


def unit_disk_coords(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """(rho, theta) grids with the inscribed disk normalized to rho = 1."""
    r = min(width, height) / 2.0
    x = (np.arange(width) - (width - 1) / 2.0) / r
    y = (np.arange(height) - (height - 1) / 2.0) / r
    xx, yy = np.meshgrid(x, y)
    return np.hypot(xx, yy), np.arctan2(yy, xx)


def zernike_eval(spec: ZernikeSpec, width: int, height: int) -> RealField:
    """Evaluate sum_j c_j Z_j over the pixel grid."""
    if len(spec.coefficients) == 0:
        raise EmptySpec("need at least one coefficient")
    rho, theta = unit_disk_coords(width, height)
    out = np.zeros((height, width))
    for j, c in enumerate(spec.coefficients):
        if c != 0.0:
            out += c * zernike_term(j, rho, theta)
    return RealField(out)
