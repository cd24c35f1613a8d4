"""Fixed points of the coupled equations ``g = h_g(f^w)``, ``f = h_f(g^w)``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .potential_functional import big_W
from .profiles import (
    Grid,
    Profile,
    ProfilePair,
    _shift_values,
    center_pair,
    ramp_profile,
    rearrange_increasing,
    step_profile,
)
from .scalar_systems import PiecewiseLinearUpdate, ScalarSystem, check_gap_condition
from .window_kernels import Window, convolve_values


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100_000
    tol: float = 1e-12
    cadence: int = 50
    init: str = "step"          # "step" or "ramp"
    ramp_half_width: float = 2.0
    damping: float = 0.0        # fraction of the old iterate kept in each half step

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.init not in ("step", "ramp"):
            raise ValueError("init must be 'step' or 'ramp'")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")


@dataclass(frozen=True)
class CFPVerdict:
    holds: bool
    defect: float
    location: float
    component: str


@dataclass(frozen=True)
class FixedPointReport:
    pair: ProfilePair
    iterations: int
    residual: float
    status: str                 # "converged", "max_iterations" or "trivial"
    cfp: CFPVerdict
    W: float
    transition_width: float
    tightness_bound: float
    history: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def initial_pair(grid: Grid, config: SolverConfig) -> ProfilePair:
    if config.init == "step":
        p = step_profile(grid, 0.0)
    else:
        p = ramp_profile(grid, config.ramp_half_width)
    return ProfilePair(p, p)


def _smooth(win: Window, v: np.ndarray, dx: float) -> np.ndarray:
    # continue each profile by its edge values; interpolating profiles end at exactly 0 and 1
    return convolve_values(win, v, dx, v[0], v[-1])


def _half_steps(sys: ScalarSystem, win: Window, f: np.ndarray, g: np.ndarray, dx: float, damping: float):
    g_new = np.clip(sys.h_g(_smooth(win, f, dx)), 0.0, 1.0)
    if damping:
        g_new = damping * g + (1 - damping) * g_new
    f_new = np.clip(sys.h_f(_smooth(win, g_new, dx)), 0.0, 1.0)
    if damping:
        f_new = damping * f + (1 - damping) * f_new
    return f_new, g_new


def de_step(sys: ScalarSystem, win: Window, pair: ProfilePair, damping: float = 0.0) -> ProfilePair:
    """One Gauss-Seidel sweep: ``g <- h_g(f^w)`` and then ``f <- h_f(g^w)``."""
    f, g = _half_steps(sys, win, pair.f.values, pair.g.values, pair.grid.dx, damping)
    return ProfilePair(pair.f.with_values(f), pair.g.with_values(g), pair.shift)


def de_residual(sys: ScalarSystem, win: Window, pair: ProfilePair) -> float:
    dx = pair.grid.dx
    f, g = pair.f.values, pair.g.values
    rg = np.abs(g - sys.h_g(_smooth(win, f, dx)))
    rf = np.abs(f - sys.h_f(_smooth(win, g, dx)))
    return float(max(rg.max(), rf.max()))


def is_cfp(sys: ScalarSystem, win: Window, pair: ProfilePair, tol: float = 1e-8) -> CFPVerdict:
    """Check ``f in [h_f(g^w -), h_f(g^w +)]`` and the analogue for ``g`` at every sample."""
    dx = pair.grid.dx
    x = pair.grid.x
    worst = (0.0, float(x[0]), "f")
    for name, own, other, h in (("f", pair.f, pair.g, sys.h_f), ("g", pair.g, pair.f, sys.h_g)):
        arg = _smooth(win, other.values, dx)
        lo, hi = h.eval_left(arg), h.eval_right(arg)
        v = own.values
        defect = np.maximum(np.maximum(lo - v, v - hi), 0.0)
        k = int(np.argmax(defect))
        if defect[k] > worst[0]:
            worst = (float(defect[k]), float(x[k]), name)
    return CFPVerdict(worst[0] <= tol, *worst)


def _transition(f: Profile, eps: float):
    x = f.grid.x
    v = f.values
    lo = x[np.argmax(v >= eps)] if np.any(v >= eps) else np.nan
    hi = x[np.argmax(v >= 1 - eps)] if np.any(v >= 1 - eps) else np.nan
    return float(hi - lo)


def tightness_eta(sys: ScalarSystem, eps: float = 0.01, n: int = 201) -> float:
    """Minimum of ``phi`` away from the two corner squares of side ``eps``."""
    t = np.linspace(0.0, 1.0, n)
    phi = sys.phi(t[:, None], t[None, :])
    u, v = np.meshgrid(t, t, indexing="ij")
    corner = ((u <= eps) & (v <= eps)) | ((u >= 1 - eps) & (v >= 1 - eps))
    return float(np.min(np.where(corner, np.inf, phi)))


def solve_fixed_point(sys: ScalarSystem, win: Window, grid: Grid | None = None,
                      config: SolverConfig | None = None, initial: ProfilePair | None = None,
                      track_W: bool = False) -> FixedPointReport:
    """Iterate ``de_step`` with periodic recentring until the update stalls."""
    config = config or SolverConfig()
    if initial is None:
        initial = initial_pair(grid or Grid.from_bounds(), config)
    if sys.calibration is not None and not check_gap_condition(sys, 64).spgc_holds:
        warnings.warn("strict positive gap condition not verified for this system")
    pair = initial
    dx = pair.grid.dx
    f, g = pair.f.values.copy(), pair.g.values.copy()
    shift = pair.shift
    history = []
    status = "max_iterations"
    it = 0
    for it in range(1, config.max_iterations + 1):
        f_new, g_new = _half_steps(sys, win, f, g, dx, config.damping)
        change = max(np.abs(f_new - f).max(), np.abs(g_new - g).max())
        f, g = f_new, g_new
        if track_W:
            history.append(big_W(sys, win, pair.f.with_values(f), pair.g.with_values(g), check=False))
        if f[-1] < 0.5 or f[0] > 0.5:
            status = "trivial"
            break
        if change <= config.tol:
            status = "converged"
            break
        if it % config.cadence == 0:
            centered = center_pair(ProfilePair(pair.f.with_values(f), pair.g.with_values(g), shift))
            f, g, shift = centered.f.values.copy(), centered.g.values.copy(), centered.shift
    out = ProfilePair(pair.f.with_values(f), pair.g.with_values(g), shift)
    if status != "trivial":
        out = center_pair(out)
    residual = de_residual(sys, win, out)
    verdict = is_cfp(sys, win, out)
    W = big_W(sys, win, out.f, out.g, check=False)
    width = _transition(out.f, 0.01)
    eta = tightness_eta(sys) if sys.calibration is not None else np.nan
    bound = (max(W, 0.0) + win.abs_moment()) / eta if eta and eta > 0 else np.inf
    out = ProfilePair(out.f, out.g, out.shift, {"residual": residual, "cfp": verdict.holds})
    return FixedPointReport(out, it, residual, status, verdict, W, width, bound, history)


def minimize(sys: ScalarSystem, win: Window, pair: ProfilePair, config: SolverConfig | None = None) -> FixedPointReport:
    """Rearrange an interpolating pair and descend ``W`` with the DE iteration."""
    start = ProfilePair(rearrange_increasing(pair.f), rearrange_increasing(pair.g))
    return solve_fixed_point(sys, win, config=config, initial=start)


def reconstruct_update(p: Profile, q_w: Profile) -> PiecewiseLinearUpdate:
    """Monotone update whose graph passes through the points ``(q_w(x_i), p(x_i))``."""
    if p.grid != q_w.grid:
        raise ValueError("profiles must share a grid")
    u = np.concatenate([[0.0], q_w.values, [1.0]])
    v = np.concatenate([[0.0], p.values, [1.0]])
    if np.any(np.diff(u) < 0) or np.any(np.diff(v) < 0):
        raise ValueError("parametric point set is not monotone")
    nodes, start = np.unique(u, return_index=True)
    stop = np.append(start[1:], len(u))
    lo = v[start]
    hi = v[stop - 1]
    return PiecewiseLinearUpdate(nodes, lo, hi)


def reconstructed_system(sys: ScalarSystem, win: Window, pair: ProfilePair) -> ScalarSystem:
    """Update functions read off a profile pair through ``f`` vs ``g^w`` and ``g`` vs ``f^w``."""
    dx = pair.grid.dx
    gw = pair.g.with_values(np.clip(_smooth(win, pair.g.values, dx), 0, 1))
    fw = pair.f.with_values(np.clip(_smooth(win, pair.f.values, dx), 0, 1))
    h_f = reconstruct_update(pair.f, gw)
    h_g = reconstruct_update(pair.g, fw)
    return ScalarSystem(h_f, h_g, sys.family + "/reconstructed", dict(sys.params), sys.calibration)


@dataclass(frozen=True)
class UniquenessResult:
    shift_cells: int
    shift: float
    deviation: float
    success: bool


def uniqueness_test(sys: ScalarSystem, win: Window, pair_a: ProfilePair, pair_b: ProfilePair,
                    tol: float | None = None, max_shift: int | None = None) -> UniquenessResult:
    """Best integer-cell alignment of two fixed points and the remaining sup deviation.

    ``shift_cells = m`` means ``pair_b`` is closest to ``pair_a`` translated
    right by ``m`` cells.
    """
    if not win.compact:
        raise ValueError("uniqueness up to translation needs a window supported on an interval")
    if sys.calibration is not None and not check_gap_condition(sys, 64).spgc_holds:
        raise ValueError("strict positive gap condition fails for this system")
    grid = pair_a.grid
    tol = 2 * grid.dx if tol is None else tol
    a = center_pair(ProfilePair(pair_a.f, pair_a.g))
    b = center_pair(ProfilePair(pair_b.f, pair_b.g))
    S = grid.n // 8 if max_shift is None else max_shift
    best = (np.inf, 0)
    for t in range(-S, S + 1):
        dev = max(
            np.abs(a.f.values - _shift_values(b.f.values, t)).max(),
            np.abs(a.g.values - _shift_values(b.g.values, t)).max(),
        )
        if dev < best[0]:
            best = (float(dev), t)
    m = best[1] + b.shift - a.shift
    dev = best[0]
    if dev > tol:
        warnings.warn(f"fixed points differ by {dev:.3e} after alignment; expected at most {tol:.3e}")
    return UniquenessResult(m, m * grid.dx, dev, dev <= tol)
