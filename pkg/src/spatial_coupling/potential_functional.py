"""The coupled potential ``W(f, g)`` and its equivalent forms.

All spatial integrals use the cell (midpoint) rule on the profile grid,
extended by ``2M`` constant cells on each side, where ``M`` is the window
radius in cells.  Beyond the padding the integrands vanish identically (left)
or equal ``phi(1, 1) = 0`` (right), so there is no truncation error.  On this
lattice the following hold to roundoff:

* ``W = L + cross`` (the algebraic split of the integrand);
* the stationarity conditions of ``W`` are exactly the discrete DE, so each
  Gauss-Seidel half step decreases ``W``.

Double integrals against ``df dg`` are exact sums over the atoms of the two
step profiles, which is the same as integrating over the quantile square.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import Profile, ProfilePair
from .scalar_systems import ScalarSystem
from .window_kernels import Window, convolve_values


class PGCViolation(ValueError):
    """The potential integrand went negative, so the gap condition fails."""


class DiscretizationFault(RuntimeError):
    """Two routes to the same quantity disagree beyond tolerance."""


def _pad_width(win: Window, dx: float) -> int:
    return 2 * (len(win.weights(dx)) // 2)


def _padded(win: Window, f: Profile, g: Profile):
    if f.grid != g.grid:
        raise ValueError("f and g must share a grid")
    dx = f.grid.dx
    P = _pad_width(win, dx)
    fp = np.concatenate([np.zeros(P), f.values, np.ones(P)])
    gp = np.concatenate([np.zeros(P), g.values, np.ones(P)])
    x = f.grid.x_min + dx * (np.arange(len(fp)) - P)
    return fp, gp, x, dx


def integrand_I_tilde(sys: ScalarSystem, win: Window, f: Profile, g: Profile):
    """Pointwise integrand ``H_g(g) + (H_f o f)^w - f^w g`` and its abscissae."""
    fp, gp, x, dx = _padded(win, f, g)
    fw = convolve_values(win, fp, dx)
    Hf1 = float(sys.h_f.inverse_antiderivative(1.0))
    Hfw = convolve_values(win, sys.h_f.inverse_antiderivative(fp), dx, 0.0, Hf1)
    return sys.h_g.inverse_antiderivative(gp) + Hfw - fw * gp, x, dx


def big_W(sys: ScalarSystem, win: Window, f: Profile, g: Profile, check: bool = True) -> float:
    I, x, dx = integrand_I_tilde(sys, win, f, g)
    if check and I.min() < -1e-10:
        k = int(np.argmin(I))
        raise PGCViolation(f"integrand {I[k]:.3e} < 0 at x = {x[k]:.6g}; the gap condition fails")
    return float(dx * np.sum(I))


def uncoupled_L(sys: ScalarSystem, win: Window, f: Profile, g: Profile) -> float:
    """``int [H_f(f) - G(g)]`` with ``G(t) = int_0^t (1 - h_g^{-1})``."""
    fp, gp, _, dx = _padded(win, f, g)
    return float(dx * np.sum(sys.h_f.inverse_antiderivative(fp) - sys.G(gp)))


def _offset_sum(win_fn, a: np.ndarray, b: np.ndarray, dx: float) -> float:
    """``sum_ij a_i b_j K((i - j) dx)`` for atoms on a common uniform lattice."""
    n = len(a)
    corr = np.correlate(a, b, mode="full")      # corr[k] pairs i - j = k - (n - 1)
    offsets = (np.arange(len(corr)) - (n - 1)) * dx
    return float(np.sum(corr * win_fn(offsets)))


def cross_term_direct(win: Window, f: Profile, g: Profile) -> float:
    fp, gp, _, dx = _padded(win, f, g)
    fw = convolve_values(win, fp, dx)
    return float(dx * np.sum((1.0 - fw) * gp))


def cross_term_atoms(win: Window, f: Profile, g: Profile) -> float:
    """``iint df(x) V(x - y) dg(y)`` summed over the atoms of the two step profiles."""
    return _offset_sum(win.kernel_V, f.increments(), g.increments(), f.grid.dx)


def cross_term(win: Window, f: Profile, g: Profile, rtol: float = 1e-4) -> float:
    direct = cross_term_direct(win, f, g)
    atoms = cross_term_atoms(win, f, g)
    if abs(direct - atoms) > rtol * max(1.0, abs(direct)):
        raise DiscretizationFault(f"cross term routes disagree: {direct:.12g} vs {atoms:.12g}")
    return direct


def W_kappa(win: Window, f: Profile, g: Profile, sys: ScalarSystem | None = None,
            assume_cfp: bool = False, tol: float = 1e-8) -> float:
    """``iint df(x) dg(y) kappa(x - y)``; equals ``W`` only at consistent fixed points.

    The pair is verified with ``is_cfp`` against ``sys`` unless the caller
    vouches for it with ``assume_cfp``.
    """
    if not assume_cfp:
        if sys is None:
            raise ValueError("the kappa form needs a consistent fixed point; pass sys to verify it")
        from .coupled_solver import is_cfp

        verdict = is_cfp(sys, win, ProfilePair(f, g), tol=tol)
        if not verdict.holds:
            raise ValueError(f"pair is not a consistent fixed point (defect {verdict.defect:.2e})")
    return _offset_sum(win.kappa, f.increments(), g.increments(), f.grid.dx)


def xi_phi(win: Window, f: Profile, g: Profile, x1: float, x2: float) -> float:
    """Mixed Omega-weighted mass of the two off-diagonal quadrants around ``(x2, x1)``."""
    b = f.grid.boundaries
    df, dg = f.increments(), g.increments()
    X = b[:, None]   # f atoms
    Y = b[None, :]   # g atoms
    c1 = (X <= x2) & (Y > x1)
    c2 = (X > x2) & (Y <= x1)
    weight = np.where(c1, win.cdf(X - Y), 0.0) + np.where(c2, win.cdf(Y - X), 0.0)
    return float(df @ weight @ dg)


def pointwise_phi_integral(sys: ScalarSystem, win: Window, f: Profile, g: Profile) -> float:
    """``int phi(g(x), f^w(x)) dx``, a lower bound for ``W`` under the gap condition."""
    fp, gp, _, dx = _padded(win, f, g)
    fw = convolve_values(win, fp, dx)
    return float(dx * np.sum(sys.phi(gp, fw)))


@dataclass(frozen=True)
class PotentialBreakdown:
    total: float
    uncoupled: float
    cross: float
    phi_integral: float

    def as_row(self) -> dict:
        return {"W": self.total, "L": self.uncoupled, "cross": self.cross, "phi_integral": self.phi_integral}


def breakdown(sys: ScalarSystem, win: Window, f: Profile, g: Profile, tol: float = 1e-8) -> PotentialBreakdown:
    total = big_W(sys, win, f, g)
    L = uncoupled_L(sys, win, f, g)
    cross = cross_term(win, f, g)
    lower = pointwise_phi_integral(sys, win, f, g)
    if abs(total - (L + cross)) > tol * max(1.0, abs(total)):
        raise DiscretizationFault(f"W = {total:.15g} but L + cross = {L + cross:.15g}")
    if total < lower - tol:
        raise DiscretizationFault(f"W = {total:.15g} below the pointwise bound {lower:.15g}")
    return PotentialBreakdown(total, L, cross, lower)
