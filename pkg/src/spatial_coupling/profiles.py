"""Spatial profiles on a uniform grid.

A profile stores samples ``v_k`` at ``x_k = x_min + k dx``.  It is read as a
step function that equals ``v_k`` on ``[x_k - dx/2, x_k + dx/2)``, equals 0 left
of the grid and 1 right of it.  Under this reading a monotone profile is the
distribution function of a discrete measure whose atoms sit on the cell
boundaries ``b_k = x_k - dx/2`` (``k = 0..N``) with masses ``v_k - v_{k-1}``
(``v_{-1} = 0`` and ``v_N = 1``).  Rearrangement, translation and the quantile
map are exact under this reading.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    x_min: float
    dx: float
    n: int

    @classmethod
    def from_bounds(cls, x_min: float = -16.0, x_max: float = 16.0, dx: float = 1 / 64) -> "Grid":
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(float(x_min), float(dx), n)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def x_max(self) -> float:
        return self.x_min + self.dx * (self.n - 1)

    @property
    def boundaries(self) -> np.ndarray:
        """Cell boundaries ``b_0..b_N``; the atom of ``dv`` at index k sits at ``b_k``."""
        return self.x_min + self.dx * (np.arange(self.n + 1) - 0.5)

    def index_of(self, x: float) -> int:
        return int(round((x - self.x_min) / self.dx))


@dataclass(frozen=True)
class Profile:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {v.shape}")
        if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
            raise ValueError("profile values must lie in [0, 1]")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    def increments(self) -> np.ndarray:
        """Masses of ``dp`` at the cell boundaries, including the final jump to 1."""
        return np.diff(np.concatenate([[0.0], self.values, [1.0]]))

    def __call__(self, x):
        """Evaluate the step function (right-continuous at cell boundaries)."""
        x = np.asarray(x, dtype=float)
        k = np.floor((x - self.grid.x_min) / self.grid.dx + 0.5).astype(int)
        inside = np.clip(k, 0, self.grid.n - 1)
        out = self.values[inside]
        return np.where(k < 0, 0.0, np.where(k >= self.grid.n, 1.0, out))

    def with_values(self, values) -> "Profile":
        return Profile(self.grid, values)


@dataclass(frozen=True)
class ProfilePair:
    f: Profile
    g: Profile
    shift: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.f.grid != self.g.grid:
            raise ValueError("f and g must share a grid")

    @property
    def grid(self) -> Grid:
        return self.f.grid


def step_profile(grid: Grid, at: float = 0.0) -> Profile:
    """Unit step equal to 1 at every sample ``x_k >= at``."""
    k = int(math.ceil((at - grid.x_min) / grid.dx - 1e-9))
    v = (np.arange(grid.n) >= k).astype(float)
    return Profile(grid, v)


def ramp_profile(grid: Grid, half_width: float = 2.0, center: float = 0.0) -> Profile:
    return Profile(grid, np.clip((grid.x - center + half_width) / (2 * half_width), 0.0, 1.0))


def rearrange_increasing(p: Profile) -> Profile:
    """Increasing rearrangement: the ascending sort of the samples."""
    return p.with_values(np.sort(p.values))


def saturate(p: Profile, K: float) -> Profile:
    """Force the profile to 0 left of ``-K`` and 1 right of ``K``."""
    x = p.x
    span = min(-p.grid.x_min, p.grid.x_max)
    if K > span:
        warnings.warn(f"saturation radius {K} exceeds the grid span; clamped to {span}")
        K = span
    v = np.where(x < -K, 0.0, np.where(x > K, 1.0, p.values))
    return p.with_values(v)


def quantile(p: Profile, u):
    """Right-continuous generalised inverse ``inf{x : p(x) > u}`` for ``u`` in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("quantile levels must lie in (0, 1)")
    if not p.is_monotone:
        raise ValueError("quantile requires a monotone profile")
    k = np.searchsorted(p.values, u, side="right")
    return p.grid.boundaries[k]


def _shift_values(v: np.ndarray, s: int) -> np.ndarray:
    """Values of ``x -> p(x + s dx)`` with tails refilled by 0 and 1."""
    if s == 0:
        return v.copy()
    n = len(v)
    if abs(s) >= n:
        raise ValueError("shift moves the whole profile off the grid")
    if s > 0:
        return np.concatenate([v[s:], np.ones(s)])
    return np.concatenate([np.zeros(-s), v[:s]])


def translate(p: Profile, m: float, strict: bool = True) -> Profile:
    """Return ``x -> p(x - m)``, with ``m`` rounded to whole cells.

    With ``strict`` set, a shift that would push a non-saturated value off the
    grid is rejected.
    """
    s = -int(round(m / p.grid.dx))
    v = p.values
    if strict and s != 0:
        dropped = v[:s] if s > 0 else v[s:]
        target = 0.0 if s > 0 else 1.0
        if np.any(np.abs(dropped - target) > 1e-12):
            raise ValueError("translation pushes the transition off the grid")
    return p.with_values(_shift_values(v, s))


def center_index(p: Profile) -> int:
    """Index of the first sample with value at least 1/2."""
    hit = np.nonzero(p.values >= 0.5)[0]
    if len(hit) == 0:
        raise ValueError("profile never reaches 1/2; it is not interpolating")
    return int(hit[0])


def center_pair(pair: ProfilePair) -> ProfilePair:
    """Shift both profiles by whole cells so that ``f`` first reaches 1/2 at ``x = 0``."""
    grid = pair.grid
    zero = grid.index_of(0.0)
    s = center_index(pair.f) - zero
    f = pair.f.with_values(_shift_values(pair.f.values, s))
    g = pair.g.with_values(_shift_values(pair.g.values, s))
    return ProfilePair(f, g, shift=pair.shift + s, diagnostics=dict(pair.diagnostics))


def translate_pair(pair: ProfilePair, m: float, strict: bool = True) -> ProfilePair:
    return ProfilePair(translate(pair.f, m, strict), translate(pair.g, m, strict), pair.shift)


def write_pair_csv(path, pair: ProfilePair) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "f", "g"])
        for x, f, g in zip(pair.grid.x, pair.f.values, pair.g.values):
            w.writerow([f"{x:.17g}", f"{f:.17g}", f"{g:.17g}"])


def read_pair_csv(path, require_monotone: bool = False) -> ProfilePair:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = data[:, 0]
    dx = float(np.mean(np.diff(x)))
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=1e-12):
        raise ValueError("profile CSV must be on a uniform grid")
    grid = Grid(float(x[0]), dx, len(x))
    pair = ProfilePair(Profile(grid, data[:, 1]), Profile(grid, data[:, 2]))
    if require_monotone and not (pair.f.is_monotone and pair.g.is_monotone):
        raise ValueError("profiles in CSV are not monotone")
    return pair


def random_monotone_profile(rng: np.random.Generator, grid: Grid, K: float | None = None) -> Profile:
    """Random non-decreasing profile saturated off ``[-K, K]``.

    Mixes sorted uniform draws with a random logistic front so that both
    rough and smooth shapes appear.
    """
    span = min(-grid.x_min, grid.x_max)
    K = rng.uniform(0.5, 0.75 * span) if K is None else K
    x = grid.x
    inside = np.abs(x) <= K
    n = int(inside.sum())
    rough = np.sort(rng.random(n))
    centre = rng.uniform(-K / 2, K / 2)
    width = rng.uniform(0.05, K / 2)
    smooth = 1.0 / (1.0 + np.exp(-(x[inside] - centre) / width))
    a = rng.random()
    vals = np.where(x < -K, 0.0, 1.0)
    vals[inside] = a * rough + (1 - a) * smooth
    return Profile(grid, np.clip(vals, 0.0, 1.0))


def random_profile(rng: np.random.Generator, grid: Grid, K: float | None = None) -> Profile:
    """Random interpolating profile that is generally not monotone."""
    span = min(-grid.x_min, grid.x_max)
    K = rng.uniform(0.5, 0.75 * span) if K is None else K
    p = random_monotone_profile(rng, grid, K)
    inside = np.abs(grid.x) <= K
    v = p.values.copy()
    idx = np.nonzero(inside)[0]
    swaps = rng.integers(1, max(2, len(idx) // 2))
    for _ in range(swaps):
        i, j = rng.choice(idx, 2, replace=False)
        v[i], v[j] = v[j], v[i]
    return Profile(grid, v)
