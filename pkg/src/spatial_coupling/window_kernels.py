"""Averaging windows and the kernels derived from them.

A window is an even probability density ``w`` on the line.  From it we build

* ``cdf``       Omega(x) = int_{-inf}^x w
* ``kernel_V``  V(x) = int_{-inf}^x Omega = x Omega(x) - int_{-inf}^x z w(z) dz  (convex)
* ``kappa``     V(x) - x Omega(x)  (even, non-negative, decays at infinity)
* ``abs_moment`` C_w = int |x| w(x) dx

Closed forms are used for every window shipped here, so there is no tabulation
error in any of the kernels.

Profiles on a grid are treated as step functions that are constant on the cell
around each sample.  Convolving such a step function with ``w`` and sampling
at the cell centres gives the discrete weights
``c_m = Omega((m + 1/2) dx) - Omega((m - 1/2) dx)``.  This is exact for any
window, and the weights are symmetric because ``w`` is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Window:
    """An even averaging density with closed-form derived kernels.

    ``kind`` is one of ``"uniform"``, ``"triangular"`` or ``"gaussian"``.
    ``half_width`` is the half support W for the compact kinds and the standard
    deviation for the Gaussian.  Gaussian windows are not compactly supported;
    convolution truncates them at ``truncation`` standard deviations.
    """

    kind: str
    half_width: float
    truncation: float = 10.0

    def __post_init__(self):
        if self.kind not in ("uniform", "triangular", "gaussian"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def compact(self) -> bool:
        return self.kind != "gaussian"

    @property
    def support_radius(self) -> float:
        """Radius beyond which the density is treated as zero."""
        if self.compact:
            return self.half_width
        return self.truncation * self.half_width

    def density(self, x):
        x = np.asarray(x, dtype=float)
        a = self.half_width
        if self.kind == "uniform":
            # symmetric derivative of the cdf, so the jump at |x| = a gets the midpoint
            return np.where(np.abs(x) < a, 0.5 / a, np.where(np.abs(x) == a, 0.25 / a, 0.0))
        if self.kind == "triangular":
            return np.clip(1.0 - np.abs(x) / a, 0.0, None) / a
        return np.exp(-0.5 * (x / a) ** 2) / (a * _SQRT2PI)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a = self.half_width
        if self.kind == "uniform":
            return np.clip((x + a) / (2 * a), 0.0, 1.0)
        if self.kind == "triangular":
            t = np.clip(x / a, -1.0, 1.0)
            return np.where(t < 0, 0.5 * (1 + t) ** 2, 1 - 0.5 * (1 - t) ** 2)
        return ndtr(x / a)

    def kernel_V(self, x):
        x = np.asarray(x, dtype=float)
        a = self.half_width
        if self.kind == "uniform":
            inside = (x + a) ** 2 / (4 * a)
            return np.where(x <= -a, 0.0, np.where(x >= a, x, inside))
        if self.kind == "triangular":
            t = np.clip(x / a, -1.0, 1.0)
            left = a * (1 + t) ** 3 / 6
            right = x + a * (1 - t) ** 3 / 6
            return np.where(t < 0, left, right)
        return x * ndtr(x / a) + a * np.exp(-0.5 * (x / a) ** 2) / _SQRT2PI

    def kappa(self, x):
        x = np.asarray(x, dtype=float)
        a = self.half_width
        if self.kind == "uniform":
            return np.where(np.abs(x) < a, (a * a - x * x) / (4 * a), 0.0)
        if self.kind == "triangular":
            t = np.clip(np.abs(x) / a, 0.0, 1.0)
            return a * (1 - t) ** 2 * (1 + 2 * t) / 6
        return a * np.exp(-0.5 * (x / a) ** 2) / _SQRT2PI

    def abs_moment(self) -> float:
        a = self.half_width
        if self.kind == "uniform":
            return a / 2
        if self.kind == "triangular":
            return a / 3
        return a * math.sqrt(2.0 / math.pi)

    def weights(self, dx: float) -> np.ndarray:
        """Discrete convolution weights ``c_{-M..M}`` for step profiles of spacing ``dx``."""
        if not dx > 0:
            raise ValueError("dx must be positive")
        if dx > self.half_width / 4:
            raise ValueError(
                f"grid spacing {dx} is too coarse for a window of half width {self.half_width}"
            )
        m_max = int(math.ceil(self.support_radius / dx + 0.5))
        m = np.arange(-m_max, m_max + 1)
        c = self.cdf((m + 0.5) * dx) - self.cdf((m - 0.5) * dx)
        # symmetrise to remove the last ulp of asymmetry from the cdf
        c = 0.5 * (c + c[::-1])
        return c


def uniform_window(half_width: float = 0.5) -> Window:
    return Window("uniform", float(half_width))


def triangular_window(half_width: float = 0.5) -> Window:
    return Window("triangular", float(half_width))


def gaussian_window(sigma: float = 0.25, truncation: float = 10.0) -> Window:
    return Window("gaussian", float(sigma), float(truncation))


def cumulative_Omega(win: Window, x):
    return win.cdf(x)


def kernel_V(win: Window, x):
    return win.kernel_V(x)


def kappa(win: Window, x):
    return win.kappa(x)


def abs_moment(win: Window) -> float:
    return win.abs_moment()


def convolve_values(win: Window, values: np.ndarray, dx: float, left: float = 0.0, right: float = 1.0):
    """Convolve step-function samples with the window.

    Outside the sampled range the function equals ``left`` / ``right``; those
    tails enter exactly through the padded constant cells.
    """
    c = win.weights(dx)
    m = len(c) // 2
    padded = np.concatenate([np.full(m, left), np.asarray(values, float), np.full(m, right)])
    return np.convolve(padded, c, mode="valid")


def convolve(win: Window, p):
    """Return ``p^w`` sampled on the grid of profile ``p``."""
    from .profiles import Profile

    vals = convolve_values(win, p.values, p.grid.dx)
    return Profile(p.grid, np.clip(vals, 0.0, 1.0))
