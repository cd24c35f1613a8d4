"""Displacement interpolation of monotone profiles and convexity of ``W`` along it.

A monotone profile is the distribution function of a discrete measure
(see :mod:`profiles`).  Its quantile function is a step function in the level
``u``.  Mixing two quantile functions needs no lattice in ``u``: merge the
level breakpoints of the endpoints and mix the positions on each merged level
cell.  The result is again a discrete measure with the merged levels.

Along such a path the uncoupled part of ``W`` is an affine function of the
positions and the cross term is a sum of ``V`` evaluated at affine functions
of ``lambda``.  Both are evaluated exactly here, without re-gridding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import Grid, Profile, ProfilePair
from .scalar_systems import ScalarSystem, check_gap_condition
from .potential_functional import PGCViolation
from .window_kernels import Window


@dataclass(frozen=True)
class StepMeasure:
    """Atoms at non-decreasing ``positions``; ``levels`` is the cdf just after each atom."""

    levels: np.ndarray
    positions: np.ndarray

    @classmethod
    def from_profile(cls, p: Profile) -> "StepMeasure":
        if not p.is_monotone:
            raise ValueError("displacement interpolation needs monotone profiles")
        after = np.concatenate([p.values, [1.0]])
        mass = p.increments()
        keep = mass > 0
        return cls(after[keep], p.grid.boundaries[keep])

    @property
    def masses(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.levels]))

    def quantile(self, u):
        """``inf{x : F(x) > u}`` for levels ``u`` in (0, 1)."""
        k = np.searchsorted(self.levels, np.asarray(u, float), side="right")
        return self.positions[np.minimum(k, len(self.positions) - 1)]

    def cdf(self, x):
        k = np.searchsorted(self.positions, np.asarray(x, float), side="right")
        lv = np.concatenate([[0.0], self.levels])
        return lv[k]

    def to_profile(self, grid: Grid) -> Profile:
        """Sample the distribution function at the cell centres (the inf rule)."""
        return Profile(grid, np.clip(self.cdf(grid.x), 0.0, 1.0))

    def translate(self, m: float) -> "StepMeasure":
        return StepMeasure(self.levels, self.positions + m)


def merge_levels(a: StepMeasure, b: StepMeasure):
    """Common level cells of two measures and the positions of each on those cells."""
    levels = np.union1d(a.levels, b.levels)
    ia = np.searchsorted(a.levels, levels, side="left")
    ib = np.searchsorted(b.levels, levels, side="left")
    return levels, a.positions[ia], b.positions[ib]


def interpolate_measure(a: StepMeasure, b: StepMeasure, lam: float) -> StepMeasure:
    levels, pa, pb = merge_levels(a, b)
    return StepMeasure(levels, (1.0 - lam) * pa + lam * pb)


def interpolate_profile(p0: Profile, p1: Profile, lam: float) -> Profile:
    """Profile whose quantile function is ``(1 - lam) p0^{-1} + lam p1^{-1}``, on ``p0``'s grid."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    m = interpolate_measure(StepMeasure.from_profile(p0), StepMeasure.from_profile(p1), lam)
    return m.to_profile(p0.grid)


def uncoupled_of_measures(sys: ScalarSystem, fm: StepMeasure, gm: StepMeasure) -> float:
    """``L`` through the atoms (summation by parts); affine in the positions.

    The boundary term ``phi(1, 1)`` times the domain length vanishes for
    calibrated systems and is dropped.
    """
    dHf = np.diff(sys.h_f.inverse_antiderivative(np.concatenate([[0.0], fm.levels])))
    dG = np.diff(sys.G(np.concatenate([[0.0], gm.levels])))
    return float(-np.dot(fm.positions, dHf) + np.dot(gm.positions, dG))


def cross_of_measures(win: Window, fm: StepMeasure, gm: StepMeasure) -> float:
    d = fm.positions[:, None] - gm.positions[None, :]
    return float(fm.masses @ win.kernel_V(d) @ gm.masses)


def potential_of_measures(sys: ScalarSystem, win: Window, fm: StepMeasure, gm: StepMeasure) -> float:
    """``W = L + cross`` for two step measures, in closed form."""
    return uncoupled_of_measures(sys, fm, gm) + cross_of_measures(win, fm, gm)


@dataclass(frozen=True)
class DisplacementPath:
    pair0: ProfilePair
    pair1: ProfilePair
    lambdas: np.ndarray
    W: np.ndarray
    second_differences: np.ndarray
    tol: float

    @property
    def convex(self) -> bool:
        return bool(np.all(self.second_differences >= -self.tol))

    def chord_gap(self, lam: float = 0.5) -> float:
        """``W(lam) - [(1 - lam) W(0) + lam W(1)]`` (non-positive under convexity)."""
        k = int(np.argmin(np.abs(self.lambdas - lam)))
        lam = self.lambdas[k]
        return float(self.W[k] - ((1 - lam) * self.W[0] + lam * self.W[-1]))

    def pair_at(self, lam: float) -> ProfilePair:
        return ProfilePair(
            interpolate_profile(self.pair0.f, self.pair1.f, lam),
            interpolate_profile(self.pair0.g, self.pair1.g, lam),
        )


def _measures(pair0: ProfilePair, pair1: ProfilePair):
    f0, g0 = StepMeasure.from_profile(pair0.f), StepMeasure.from_profile(pair0.g)
    f1, g1 = StepMeasure.from_profile(pair1.f), StepMeasure.from_profile(pair1.g)
    return f0, g0, f1, g1


def path_measures(pair0: ProfilePair, pair1: ProfilePair, lambdas):
    """The step measures ``(f_lam, g_lam)`` along the displacement path, one per ``lam``."""
    f0, g0, f1, g1 = _measures(pair0, pair1)
    fl, fa, fb = merge_levels(f0, f1)
    gl, ga, gb = merge_levels(g0, g1)
    for lam in np.asarray(lambdas, float):
        yield StepMeasure(fl, (1 - lam) * fa + lam * fb), StepMeasure(gl, (1 - lam) * ga + lam * gb)


def W_along_path(sys: ScalarSystem, win: Window, pair0: ProfilePair, pair1: ProfilePair, lambdas) -> np.ndarray:
    return np.array([potential_of_measures(sys, win, fm, gm) for fm, gm in path_measures(pair0, pair1, lambdas)])


def convexity_sweep(sys: ScalarSystem, win: Window, pair0: ProfilePair, pair1: ProfilePair,
                    lambdas=None, rtol: float = 1e-6) -> DisplacementPath:
    lambdas = np.linspace(0.0, 1.0, 21) if lambdas is None else np.asarray(lambdas, float)
    if abs(float(sys.phi(1.0, 1.0))) > 1e-8 or (
        sys.calibration is not None and not check_gap_condition(sys, 64).pgc_holds
    ):
        raise PGCViolation("the positive gap condition fails for this system")
    W = W_along_path(sys, win, pair0, pair1, lambdas)
    second = W[:-2] - 2 * W[1:-1] + W[2:]
    tol = rtol * max(1.0, float(np.max(np.abs(W))))
    return DisplacementPath(pair0, pair1, lambdas, W, second, tol)


def displacement_field_D(pair0: ProfilePair, pair1: ProfilePair, u, v):
    """``(f1^{-1}(v) - g1^{-1}(u)) - (f0^{-1}(v) - g0^{-1}(u))``."""
    f0, g0, f1, g1 = _measures(pair0, pair1)
    return (f1.quantile(v) - g1.quantile(u)) - (f0.quantile(v) - g0.quantile(u))


def second_derivative_W(win: Window, pair0: ProfilePair, pair1: ProfilePair, lam: float) -> float:
    """``iint D(u, v)^2 w(f_lam^{-1}(v) - g_lam^{-1}(u)) du dv`` summed over level cells."""
    f0, g0, f1, g1 = _measures(pair0, pair1)
    fl, fa, fb = merge_levels(f0, f1)
    gl, ga, gb = merge_levels(g0, g1)
    mf = np.diff(np.concatenate([[0.0], fl]))
    mg = np.diff(np.concatenate([[0.0], gl]))
    d0 = fa[:, None] - ga[None, :]
    d1 = fb[:, None] - gb[None, :]
    D = d1 - d0
    d = (1 - lam) * d0 + lam * d1
    return float(mf @ (D * D * win.density(d)) @ mg)


def finite_difference_second_derivative(sys: ScalarSystem, win: Window, pair0: ProfilePair,
                                        pair1: ProfilePair, lam: float, h: float = 0.02) -> float:
    W = W_along_path(sys, win, pair0, pair1, [lam - h, lam, lam + h])
    return float((W[0] - 2 * W[1] + W[2]) / (h * h))
