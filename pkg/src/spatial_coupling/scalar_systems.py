"""Normalised scalar systems ``u = h_g(v)``, ``v = h_f(u)`` and their potential.

The potential is ``phi(u, v) = H_g(u) + H_f(v) - u v`` where ``H`` is the
integral of the inverse update function.  Four model families are calibrated
at their MAP thresholds so that ``h_f(1) = h_g(1) = 1`` and ``phi(1, 1) = 0``:
regular LDPC codes on the erasure channel, generalised LDPC codes with BCH
check constraints, regular LDPC codes under the Gaussian approximation, and
state evolution for compressed sensing with a Bernoulli-Gaussian signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq
from scipy.stats import binom

from .gaussian_channels import SignalPrior, mmse, mutual_information, psi, psi_inverse


class CalibrationError(RuntimeError):
    """Raised when a family has no MAP threshold for the requested parameters."""


# ---------------------------------------------------------------------------
# update functions

class UpdateFunction:
    """Monotone map on [0, 1] with inverse and the two antiderivatives.

    ``antiderivative(u) = int_0^u h`` and ``inverse_antiderivative(t) =
    int_0^t h^{-1}``.  Missing pieces are derived: the inverse by bisection
    seeded from a cached table, one antiderivative from the other through the
    Legendre identity ``H(h(s)) + K(s) = s h(s)``, and if neither antiderivative
    is known ``H`` is tabulated by quadrature of the inverse.
    """

    def __init__(
        self,
        forward: Callable,
        inverse: Callable | None = None,
        antiderivative: Callable | None = None,
        inverse_antiderivative: Callable | None = None,
        name: str = "",
        table_size: int = 4096,
    ):
        self._forward = forward
        self._inverse = inverse
        self._K = antiderivative
        self._H = inverse_antiderivative
        self.name = name
        self._table_size = table_size
        self._table = None
        self._H_spline = None

    def __repr__(self):
        return f"UpdateFunction({self.name!r})"

    # evaluation ---------------------------------------------------------
    def __call__(self, u):
        return self.eval(u)

    def eval(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        return self._forward(u)

    def eval_left(self, u):
        return self.eval(u)

    def eval_right(self, u):
        return self.eval(u)

    # inverse ------------------------------------------------------------
    def inverse(self, v):
        """Right-continuous inverse ``inf{u : h(u) > v}`` clipped to [0, 1]."""
        v = np.asarray(v, dtype=float)
        if self._inverse is not None:
            return np.clip(self._inverse(np.clip(v, 0.0, 1.0)), 0.0, 1.0)
        return self._bisect(v)

    def _grid_table(self):
        if self._table is None:
            u = np.linspace(0.0, 1.0, self._table_size + 1)
            self._table = (u, np.maximum.accumulate(self._forward(u)))
        return self._table

    def _bisect(self, v):
        u_tab, h_tab = self._grid_table()
        v_arr = np.atleast_1d(v).astype(float)
        k = np.searchsorted(h_tab, v_arr, side="right")
        top = k >= len(u_tab)
        k = np.clip(k, 1, len(u_tab) - 1)
        lo = u_tab[k - 1].copy()
        hi = u_tab[k].copy()
        for _ in range(44):
            mid = 0.5 * (lo + hi)
            above = self._forward(mid) > v_arr
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = np.where(top, 1.0, 0.5 * (lo + hi))
        out = np.where(v_arr < h_tab[0], 0.0, out)
        return out if np.ndim(v) else float(out[0])

    # antiderivatives ----------------------------------------------------
    def antiderivative(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        if self._K is not None:
            return self._K(u)
        h = self.eval(u)
        return u * h - self.inverse_antiderivative(h)

    def inverse_antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, 1.0)
        if self._H is not None:
            return self._H(tc)
        if self._K is not None:
            s = self.inverse(tc)
            return tc * s - self._K(s)
        return self._tabulated_H(tc)

    def _tabulated_H(self, t):
        if self._H_spline is None:
            n = 2048
            # cosine spacing clusters nodes at both ends where inverses may be singular
            nodes = 0.5 * (1.0 - np.cos(np.pi * np.arange(n + 1) / n))
            gt, gw = np.polynomial.legendre.leggauss(10)
            a, b = nodes[:-1], nodes[1:]
            pts = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * gt
            vals = self.inverse(pts.ravel()).reshape(pts.shape)
            pieces = 0.5 * (b - a) * (vals @ gw)
            H = np.concatenate([[0.0], np.cumsum(pieces)])
            self._H_spline = CubicHermiteSpline(nodes, H, self.inverse(nodes))
        return self._H_spline(t)


class PiecewiseLinearUpdate(UpdateFunction):
    """Monotone piecewise-linear update with jumps.

    Built from nodes ``u_j`` with left values ``lo_j`` and right values
    ``hi_j``; between nodes the graph runs linearly from ``hi_j`` to
    ``lo_{j+1}``.  The value at a node is the right value.
    """

    def __init__(self, u, lo, hi, name: str = "reconstructed"):
        u = np.asarray(u, float)
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        if np.any(np.diff(u) <= 0) or np.any(hi < lo) or np.any(hi[:-1] > lo[1:] + 1e-15):
            raise ValueError("node data do not describe a monotone function")
        self.nodes, self.lo, self.hi = u, lo, hi
        # the graph as a polyline including the vertical jump segments
        self._gu = np.repeat(u, 2)
        self._gv = np.column_stack([lo, hi]).ravel()
        seg = 0.5 * (hi[:-1] + lo[1:]) * np.diff(u)
        self._K_nodes = np.concatenate([[0.0], np.cumsum(seg)])
        super().__init__(self._eval, self._inv, self._antideriv, None, name)

    def _eval(self, x):
        x = np.asarray(x, float)
        j = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, len(self.nodes) - 2)
        u0, u1 = self.nodes[j], self.nodes[j + 1]
        t = (x - u0) / (u1 - u0)
        val = self.hi[j] + t * (self.lo[j + 1] - self.hi[j])
        return np.where(x >= self.nodes[-1], self.hi[-1], val)

    def eval_left(self, x):
        x = np.clip(np.asarray(x, float), 0.0, 1.0)
        j = np.searchsorted(self.nodes, x, side="left")
        at_node = (j < len(self.nodes)) & (self.nodes[np.minimum(j, len(self.nodes) - 1)] == x)
        return np.where(at_node, self.lo[np.minimum(j, len(self.nodes) - 1)], self._eval(x))

    def _inv(self, v):
        v = np.asarray(v, float)
        k = np.searchsorted(self._gv, v, side="right")
        top = k >= len(self._gv)
        k = np.clip(k, 1, len(self._gv) - 1)
        v0, v1 = self._gv[k - 1], self._gv[k]
        u0, u1 = self._gu[k - 1], self._gu[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(v1 > v0, (v - v0) / (v1 - v0), 0.0)
        out = u0 + t * (u1 - u0)
        out = np.where(top, self._gu[-1], out)
        return np.where(v < self._gv[0], self._gu[0], out)

    def _antideriv(self, x):
        x = np.asarray(x, float)
        j = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, len(self.nodes) - 2)
        u0, u1 = self.nodes[j], self.nodes[j + 1]
        # the segment's own end value, not the jump value at the last node
        end = self.hi[j] + (x - u0) / (u1 - u0) * (self.lo[j + 1] - self.hi[j])
        return self._K_nodes[j] + 0.5 * (self.hi[j] + end) * (x - u0)


# ---------------------------------------------------------------------------
# systems

@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    scale_x: float
    scale_y: float
    residuals: float
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScalarSystem:
    h_f: UpdateFunction
    h_g: UpdateFunction
    family: str
    params: dict
    calibration: CalibrationResult | None = None

    def phi(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return self.h_g.inverse_antiderivative(u) + self.h_f.inverse_antiderivative(v) - u * v

    def area_A(self, u):
        """``int_0^u (h_g^{-1} - h_f)``."""
        return self.h_g.inverse_antiderivative(u) - self.h_f.antiderivative(u)

    def area_Atilde(self, v):
        """``int_0^v (h_f^{-1} - h_g)``."""
        return self.h_f.inverse_antiderivative(v) - self.h_g.antiderivative(v)

    def G(self, t):
        """``int_0^t (1 - h_g^{-1})``, the g-part of the uncoupled functional."""
        t = np.asarray(t, float)
        return t - self.h_g.inverse_antiderivative(t)

    def label(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({args})"


def potential_phi(sys: ScalarSystem, u, v):
    return sys.phi(u, v)


def area_A(sys: ScalarSystem, u):
    return sys.area_A(u)


def area_Atilde(sys: ScalarSystem, v):
    return sys.area_Atilde(v)


@dataclass(frozen=True)
class GapReport:
    pgc_holds: bool
    spgc_holds: bool
    min_phi: float
    min_interior_phi: float
    argmin: tuple
    phi_00: float
    phi_11: float
    min_area_A: float
    min_area_Atilde: float

    @property
    def area_condition(self) -> bool:
        """Both signed areas strictly positive on the interior grid (sufficient for SPGC)."""
        return self.min_area_A > 0 and self.min_area_Atilde > 0


def check_gap_condition(sys: ScalarSystem, grid_n: int = 256) -> GapReport:
    """Evaluate the positive gap conditions on a ``grid_n x grid_n`` lattice.

    The strict version ignores the lattice points adjacent to the two corners
    (0, 0) and (1, 1), where ``phi`` vanishes.
    """
    if sys.calibration is None:
        raise ValueError("gap conditions are defined for calibrated systems only")
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    t = np.linspace(0.0, 1.0, grid_n)
    Hg = sys.h_g.inverse_antiderivative(t)
    Hf = sys.h_f.inverse_antiderivative(t)
    phi = Hg[:, None] + Hf[None, :] - t[:, None] * t[None, :]
    i, j = np.meshgrid(np.arange(grid_n), np.arange(grid_n), indexing="ij")
    near = (np.maximum(i, j) <= 1) | (np.minimum(i, j) >= grid_n - 2)
    interior_phi = np.where(near, np.inf, phi)
    k = np.unravel_index(np.argmin(interior_phi), phi.shape)
    inner = t[1:-1]
    min_A = float(np.min(sys.area_A(inner)))
    min_At = float(np.min(sys.area_Atilde(inner)))
    return GapReport(
        pgc_holds=bool(phi.min() >= -1e-10),
        spgc_holds=bool(interior_phi.min() > 0 and phi.min() >= -1e-10),
        min_phi=float(phi.min()),
        min_interior_phi=float(interior_phi.min()),
        argmin=(float(t[k[0]]), float(t[k[1]])),
        phi_00=float(phi[0, 0]),
        phi_11=float(phi[-1, -1]),
        min_area_A=min_A,
        min_area_Atilde=min_At,
    )


def _residual(sys: ScalarSystem, use_tilde: bool) -> float:
    area = sys.area_Atilde(1.0) if use_tilde else sys.area_A(1.0)
    return float(max(abs(sys.h_f(1.0) - 1.0), abs(sys.h_g(1.0) - 1.0), abs(area), abs(sys.phi(1.0, 1.0))))


def _scan_root(fn, lo, hi, n=200, last=True):
    xs = np.linspace(lo, hi, n + 1)
    vals = np.array([fn(x) for x in xs])
    ok = np.isfinite(vals)
    idx = [k for k in range(n) if ok[k] and ok[k + 1] and np.sign(vals[k]) != np.sign(vals[k + 1])]
    if not idx:
        return None
    k = idx[-1] if last else idx[0]
    return brentq(fn, xs[k], xs[k + 1], xtol=1e-15, rtol=1e-15, maxiter=200)


# ---------------------------------------------------------------------------
# LDPC on the erasure channel

def bec_area_at_one(x: float, ell: int, r: int) -> float:
    """``A(1)`` of the scaled (ell, r) erasure system as a function of ``x_MAP``."""
    y = 1.0 - (1.0 - x) ** (r - 1)
    Hg1 = (1.0 - (r - 1) / (r * y) * (1.0 - (1.0 - y) ** (r / (r - 1)))) / x
    return Hg1 - 1.0 / ell


def ldpc_bec_system(ell: int, r: int, x: float, y: float, eps: float | None = None,
                    calibration: CalibrationResult | None = None) -> ScalarSystem:
    """Scaled (ell, r) system for given scales; ``eps`` defaults to the calibrated ``x / y^(ell-1)``."""
    a = ell - 1
    c = 1.0 if eps is None else eps * y**a / x   # h_f(1); equals 1 when calibrated
    q = r / (r - 1)
    def hf_H(t):
        s = np.minimum((t / c) ** (1.0 / a), 1.0)
        # beyond h_f(1) the inverse is pinned at 1
        return c * a / ell * s**ell + np.maximum(t - c, 0.0)

    h_f = UpdateFunction(
        lambda u: c * u**a,
        inverse=lambda v: np.minimum((v / c) ** (1.0 / a), 1.0),
        antiderivative=lambda u: c * u**ell / ell,
        inverse_antiderivative=hf_H,
        name=f"v=u^{a}",
    )
    h_g = UpdateFunction(
        lambda v: (1.0 - (1.0 - x * v) ** (r - 1)) / y,
        inverse=lambda u: (1.0 - (1.0 - y * u) ** (1.0 / (r - 1))) / x,
        antiderivative=lambda v: (v - (1.0 - (1.0 - x * v) ** r) / (r * x)) / y,
        inverse_antiderivative=lambda u: (u - (1.0 - (1.0 - y * u) ** q) / (q * y)) / x,
        name="bec check",
    )
    return ScalarSystem(h_f, h_g, "ldpc_bec", {"l": ell, "r": r}, calibration)


def calibrate_ldpc_bec(ell: int = 3, r: int = 6) -> ScalarSystem:
    if ell < 2 or r < 2:
        raise CalibrationError("degrees must be at least 2")
    x = _scan_root(lambda t: bec_area_at_one(t, ell, r), 1e-6, 1.0 - 1e-9, n=400)
    if x is None or ell < 3:
        raise CalibrationError(f"({ell},{r}) has no non-trivial stable fixed point with a MAP threshold")
    y = 1.0 - (1.0 - x) ** (r - 1)
    eps = x / y ** (ell - 1)
    sys = ldpc_bec_system(ell, r, x, y)
    res = _residual(sys, use_tilde=False)
    return ldpc_bec_system(ell, r, x, y, calibration=CalibrationResult(eps, x, y, res))


def perturb_bec(sys: ScalarSystem, delta_eps: float) -> ScalarSystem:
    """Same scales, channel parameter moved by ``delta_eps`` (no longer normalised)."""
    cal = sys.calibration
    eps = cal.threshold + delta_eps
    new_cal = CalibrationResult(eps, cal.scale_x, cal.scale_y, float("nan"), {"perturbed": delta_eps})
    return ldpc_bec_system(sys.params["l"], sys.params["r"], cal.scale_x, cal.scale_y, eps, new_cal)


def bec_threshold_bisection(ell: int = 3, r: int = 6, tol: float = 1e-10, max_steps: int = 200) -> float:
    """MAP threshold from the sign of the single-variable potential at the stable fixed point.

    Inner loop: erasure DE from ``x = 1``.  Outer loop: bisection in ``eps``.
    """
    def gap(eps):
        x = 1.0
        for _ in range(200000):
            xn = eps * (1.0 - (1.0 - x) ** (r - 1)) ** (ell - 1)
            if abs(xn - x) < 1e-15:
                break
            x = xn
        if x < 1e-10:
            return 1.0   # only the trivial fixed point
        g = 1.0 - (1.0 - x) ** (r - 1)
        G = x - (1.0 - (1.0 - x) ** r) / r
        return x * g - G - eps * g**ell / ell

    lo, hi = 0.0, 1.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# generalised LDPC with BCH check constraints

def _binom_tail(N: int, e: int, t):
    """``P(Bin(N, t) >= e)``."""
    return binom.sf(e - 1, N, t)


def _binom_tail_integral(N: int, e: int, x):
    """``int_0^x P(Bin(N, t) >= e) dt`` through the Bin(N+1, x) tails."""
    x = np.asarray(x, float)
    j = np.arange(e + 1, N + 2).reshape((-1,) + (1,) * x.ndim)
    return np.sum(binom.sf(j - 1, N + 1, x), axis=0) / (N + 1)


def gldpc_atilde_double_sum(n: int, e: int, x: float, y: float, v, signed: bool = True):
    """Signed area from the expanded binomial double sum.

    Expanding ``(1 - x v)^(n-i-1)`` produces alternating signs; ``signed=False``
    drops them to expose how the unsigned expansion differs.
    """
    v = np.asarray(v, float)
    total = np.zeros_like(v)
    for i in range(e, n):
        for m in range(0, n - i):
            sign = (-1) ** m if signed else 1
            coef = math.comb(n - 1, i) * math.comb(n - i - 1, m) * sign
            total = total + coef * x ** (m + i) * v ** (m + i + 1) / (m + i + 1)
    return v * v / 2 - total / y


def gldpc_system(n: int, e: int, x: float, y: float, calibration=None) -> ScalarSystem:
    N = n - 1
    h_f = UpdateFunction(
        lambda u: u, inverse=lambda v: v, antiderivative=lambda u: u * u / 2,
        inverse_antiderivative=lambda t: t * t / 2, name="linear",
    )
    h_g = UpdateFunction(
        lambda v: _binom_tail(N, e, x * v) / y,
        antiderivative=lambda v: _binom_tail_integral(N, e, x * v) / (x * y),
        name=f"bch tail e={e}",
    )
    return ScalarSystem(h_f, h_g, "gldpc", {"n": n, "e": e}, calibration)


def calibrate_gldpc(n: int = 15, e: int = 3) -> ScalarSystem:
    if not 1 <= e <= n - 1:
        raise CalibrationError("need 1 <= e <= n - 1")
    N = n - 1

    def atilde_one(x):
        y = _binom_tail(N, e, x)
        return 0.5 - _binom_tail_integral(N, e, x) / (x * y)

    x = _scan_root(atilde_one, 1e-3, 1.0 - 1e-9, n=400)
    if x is None:
        raise CalibrationError(f"GLDPC({n},{e}) has no non-trivial fixed point with a MAP threshold")
    y = float(_binom_tail(N, e, x))
    sys = gldpc_system(n, e, x, y)
    res = _residual(sys, use_tilde=True)
    cal = CalibrationResult(x / y, x, y, res)
    return gldpc_system(n, e, x, y, cal)


# ---------------------------------------------------------------------------
# regular LDPC under the Gaussian approximation

def gaussian_ldpc_system(ell: int, r: int, x: float, y: float, m: float, calibration=None) -> ScalarSystem:
    a, b = ell - 1, r - 1
    h_f = UpdateFunction(
        lambda u: psi(m + a * psi_inverse(y * u)) / x,
        inverse=lambda v: psi(np.maximum(psi_inverse(np.minimum(x * v, 1.0)) - m, 0.0) / a) / y,
        name="gaussian variable",
    )
    h_g = UpdateFunction(
        lambda v: (1.0 - psi(b * psi_inverse(1.0 - x * v))) / y,
        inverse=lambda u: (1.0 - psi(psi_inverse(np.clip(1.0 - y * u, 0.0, 1.0)) / b)) / x,
        name="gaussian check",
    )
    return ScalarSystem(h_f, h_g, "gaussian_ldpc", {"l": ell, "r": r}, calibration)


def _gaussian_scales(x: float, ell: int, r: int):
    y = 1.0 - psi((r - 1) * psi_inverse(1.0 - x))
    m = psi_inverse(x) - (ell - 1) * psi_inverse(y)
    return float(y), float(m)


def calibrate_gaussian_ldpc(ell: int = 3, r: int = 6) -> ScalarSystem:
    if ell < 3:
        raise CalibrationError("the Gaussian-approximation family needs ell >= 3")

    def atilde_one(x):
        y, m = _gaussian_scales(x, ell, r)
        if m < 0:
            return np.nan
        sys = gaussian_ldpc_system(ell, r, x, y, m)
        f = lambda v: float(sys.h_f.inverse(v) - sys.h_g(v))
        return quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]

    x = _scan_root(atilde_one, 0.02, 0.98, n=48)
    if x is None:
        raise CalibrationError(f"Gaussian ({ell},{r}) system has no MAP threshold")
    y, m = _gaussian_scales(x, ell, r)
    sys = gaussian_ldpc_system(ell, r, x, y, m)
    res = _residual(sys, use_tilde=True)
    cal = CalibrationResult(m, x, y, res, {"channel_entropy": float(psi(m))})
    return gaussian_ldpc_system(ell, r, x, y, m, cal)


def gaussian_display_phi(sys: ScalarSystem, u, v):
    """The closed-form display of the potential for this family, taken literally.

    The transcription carries ``+`` in front of the first integral and ``u`` as
    the upper limit of the second; both differ from the first-principles
    potential ``sys.phi``.
    """
    cal = sys.calibration
    x, y, m = cal.scale_x, cal.scale_y, cal.threshold
    a, b = sys.params["l"] - 1, sys.params["r"] - 1
    first = lambda t: psi(psi_inverse(max(0.0, 1.0 - y * t)) / b)
    second = lambda t: psi(max(0.0, psi_inverse(min(1.0, x * t)) - m) / a)
    u = float(u)
    v = float(v)
    i1 = quad(first, 0.0, u, epsabs=1e-14)[0]
    i2 = quad(second, 0.0, u, epsabs=1e-14)[0]
    return u * (1.0 / x - v) + i1 / x + i2 / y


def gaussian_display_discrepancy(sys: ScalarSystem, n: int = 9) -> float:
    """Largest gap between the transcribed display and ``sys.phi`` on an n x n lattice."""
    t = np.linspace(0.0, 1.0, n)
    return max(abs(gaussian_display_phi(sys, a, b) - float(sys.phi(a, b))) for a in t for b in t)


# ---------------------------------------------------------------------------
# compressed sensing state evolution

def _se_fixed_point(prior: SignalPrior, snr: float, delta: float, x0: float, max_iter: int = 100000) -> float:
    """Iterate ``x <- mmse((1/snr + x/delta)^{-1})`` from ``x0`` and polish the limit."""
    F = lambda t: mmse(prior, 1.0 / (1.0 / snr + t / delta)) - t
    x = x0
    for _ in range(max_iter):
        xn = mmse(prior, 1.0 / (1.0 / snr + x / delta))
        if abs(xn - x) < 1e-11:
            x = xn
            break
        x = xn
    else:
        raise CalibrationError("state evolution did not converge")
    w = 1e-8
    lo, hi = max(x - w, 0.0), min(x + w, 1.0)
    if F(lo) * F(hi) < 0:
        x = brentq(F, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return float(x)


def _amp_pieces(prior: SignalPrior, snr: float, delta: float):
    xs = _se_fixed_point(prior, snr, delta, 0.0)
    x2 = _se_fixed_point(prior, snr, delta, 1.0)
    ys = 1.0 / (1.0 / snr + xs / delta)
    y2 = 1.0 / (1.0 / snr + x2 / delta)
    return xs, x2, ys, y2


def amp_area_at_one(prior: SignalPrior, snr: float, delta: float) -> float:
    """Closed-form ``A(1)``; ``nan`` if only one fixed point exists."""
    xs, x2, ys, y2 = _amp_pieces(prior, snr, delta)
    xm, ym = x2 - xs, y2 - ys
    if xm < 1e-7:
        return np.nan
    log_term = delta / (xm * ym) * math.log1p(ym / ys)
    mmse_integral = 2.0 * (mutual_information(prior, y2) - mutual_information(prior, ys)) / ym
    return log_term - delta / (xm * snr) - mmse_integral / xm


def amp_system(prior: SignalPrior, delta: float, snr: float, xs: float, ys: float,
               xm: float, ym: float, calibration=None) -> ScalarSystem:
    base = 1.0 / snr + xs / delta
    I0 = mutual_information(prior, ys)
    h_g = UpdateFunction(
        lambda v: (1.0 / (1.0 / snr + (xs + xm * v) / delta) - ys) / ym,
        inverse=lambda u: (delta * (1.0 / (ys + ym * u) - 1.0 / snr) - xs) / xm,
        antiderivative=lambda v: (delta / xm * np.log1p(xm * v / (delta * base)) - ys * v) / ym,
        name="amp linear step",
    )
    # mmse is costly and inverted by bisection, so evaluate it through a dense
    # spline in u (max error about 6e-11 after normalisation)
    u_nodes = np.linspace(0.0, 1.0, 4097)
    denoiser = CubicSpline(u_nodes, (mmse(prior, ys + ym * u_nodes) - xs) / xm)
    h_f = UpdateFunction(
        lambda u: denoiser(np.asarray(u, float)),
        antiderivative=lambda u: (-xs * u + 2.0 * (mutual_information(prior, ys + ym * np.asarray(u)) - I0) / ym) / xm,
        name="amp denoiser",
    )
    return ScalarSystem(h_f, h_g, "amp", {"rho": prior.rho, "delta": delta}, calibration)


def calibrate_amp(prior: SignalPrior | None = None, delta: float = 0.35,
                  snr_range: tuple = (1.0, 1e6)) -> ScalarSystem:
    """Find ``snr_MAP`` with ``A(1) = 0`` between the good and the bad fixed point."""
    prior = prior or SignalPrior()
    grid = np.geomspace(*snr_range, 49)
    vals = np.array([amp_area_at_one(prior, s, delta) for s in grid])
    ok = np.isfinite(vals)
    if not np.any(ok):
        raise CalibrationError(f"no coupling transition: a single fixed point for every snr at delta={delta}")
    idx = [k for k in range(len(grid) - 1) if ok[k] and ok[k + 1] and vals[k] < 0 <= vals[k + 1]]
    if not idx:
        raise CalibrationError(f"A(1) does not change sign over the three-fixed-point range at delta={delta}")
    k = idx[0]
    snr = brentq(lambda s: amp_area_at_one(prior, s, delta), grid[k], grid[k + 1], xtol=1e-12, rtol=1e-14)
    xs, x2, ys, y2 = _amp_pieces(prior, snr, delta)
    sys = amp_system(prior, delta, snr, xs, ys, x2 - xs, y2 - ys)
    res = _residual(sys, use_tilde=False)
    cal = CalibrationResult(snr, x2 - xs, y2 - ys, res, {"x_star": xs, "y_star": ys})
    return ScalarSystem(sys.h_f, sys.h_g, sys.family, sys.params, cal)


def amp_log_term(sys: ScalarSystem, u):
    """Closed form of ``int_0^u h_g^{-1}`` without the constant offsets."""
    cal = sys.calibration
    delta = sys.params["delta"]
    ys, xm, ym = cal.extra["y_star"], cal.scale_x, cal.scale_y
    return delta / (xm * ym) * np.log1p(ym * np.asarray(u) / ys)


# ---------------------------------------------------------------------------

FAMILIES = ("ldpc_bec", "gldpc", "gaussian_ldpc", "amp")


def calibrate(family: str, **params) -> ScalarSystem:
    """Dispatch by family name; unknown names raise ``ValueError``."""
    if family == "ldpc_bec":
        return calibrate_ldpc_bec(int(params.get("l", 3)), int(params.get("r", 6)))
    if family == "gldpc":
        return calibrate_gldpc(int(params.get("n", 15)), int(params.get("e", 3)))
    if family == "gaussian_ldpc":
        return calibrate_gaussian_ldpc(int(params.get("l", 3)), int(params.get("r", 6)))
    if family == "amp":
        prior = SignalPrior(float(params.get("rho", 0.2)))
        return calibrate_amp(prior, float(params.get("delta", 0.35)))
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
