"""Entropy of symmetric Gaussian LLR densities and the scalar Gaussian channel.

``psi(m)`` is the entropy (in bits) of a symmetric Gaussian log-likelihood
density with mean ``m`` and variance ``2m``.  ``mmse`` and
``mutual_information`` describe ``Y = sqrt(snr) S + Z`` for a Bernoulli-Gaussian
signal ``S`` with unit second moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtr

LN2 = math.log(2.0)

_GH_T, _GH_W = np.polynomial.hermite.hermgauss(61)
_GL_T, _GL_W = np.polynomial.legendre.leggauss(10)
_CORE = 40.0        # z in [-_CORE, _CORE] is integrated numerically for m > 1
_CORE_PANELS = 80
_S_MAX = 48.0       # table covers sqrt(m) <= _S_MAX; psi(_S_MAX**2) ~ 1e-252


def psi_quadrature(m) -> np.ndarray:
    """Direct quadrature for psi, accurate to about 1e-15 relative.

    Small means use Gauss-Hermite after centring on the Gaussian.  Larger means
    integrate ``log2(1 + e^-z)`` on a fixed window around ``z = 0`` (where it
    is curved) with composite Gauss-Legendre and add the two tails in closed
    form: left of the window the integrand is ``-z / ln 2``, right of it it is
    ``e^-z`` and shifts the Gaussian mass to mean ``-m``.
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if np.any(m < 0):
        raise ValueError("psi is defined for m >= 0")
    out = np.empty_like(m)
    zero = m == 0
    out[zero] = 1.0
    small = (m <= 1.0) & ~zero
    if np.any(small):
        ms = m[small]
        z = ms[:, None] + 2.0 * np.sqrt(ms)[:, None] * _GH_T
        out[small] = (np.logaddexp(0.0, -z) / LN2) @ _GH_W / math.sqrt(math.pi)
    big = m > 1.0
    if np.any(big):
        mb = m[big]
        s = np.sqrt(2.0 * mb)
        edges = np.linspace(-_CORE, _CORE, _CORE_PANELS + 1)
        h = edges[1] - edges[0]
        z = (0.5 * (edges[:-1] + edges[1:])[:, None] + 0.5 * h * _GL_T).ravel()
        wz = np.tile(0.5 * h * _GL_W, _CORE_PANELS)
        dens = np.exp(-((z[None, :] - mb[:, None]) ** 2) / (4.0 * mb[:, None]))
        dens /= np.sqrt(4.0 * math.pi * mb)[:, None]
        core = dens @ (wz * np.logaddexp(0.0, -z) / LN2)
        a = (-_CORE - mb) / s
        left = (s * np.exp(-0.5 * a * a) / math.sqrt(2 * math.pi) - mb * ndtr(a)) / LN2
        # e^{-z} times the N(m, 2m) density is the N(-m, 2m) density
        right = ndtr(-(mb + _CORE) / s) / LN2
        out[big] = core + left + right
    return out


@lru_cache(maxsize=1)
def _psi_tables():
    s = np.linspace(0.0, _S_MAX, 9601)
    logpsi = np.log(psi_quadrature(s * s))
    logpsi[0] = 0.0
    forward = CubicSpline(s, logpsi)
    # sqrt(-log psi) is close to linear in s near 0, which keeps the inverse smooth
    t = np.sqrt(-logpsi)
    backward = CubicSpline(t, s)
    end_value = float(logpsi[-1])
    end_slope = float(forward(_S_MAX, 1))
    return forward, backward, end_value, end_slope


def log_psi(m):
    """Natural log of ``psi``; stays finite where ``psi`` itself underflows."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise ValueError("psi is defined for m >= 0")
    forward, _, end_value, end_slope = _psi_tables()
    with np.errstate(invalid="ignore"):
        s = np.sqrt(m)
    inside = s <= _S_MAX
    d = np.where(inside, 0.0, s - _S_MAX)
    # beyond the table log psi continues with its asymptotic curvature -s^2/4
    tail = end_value + end_slope * d - 0.25 * d * d
    out = np.where(inside, forward(np.minimum(s, _S_MAX)), tail)
    out = np.where(np.isinf(m), -np.inf, out)
    return out if out.ndim else float(out)


def psi(m):
    """Entropy of the symmetric Gaussian density of mean ``m`` (``psi(inf) = 0``)."""
    return np.exp(log_psi(m))


def psi_inverse(y):
    """Inverse of ``psi`` on [0, 1], with ``psi_inverse(0) = inf``."""
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise ValueError("psi_inverse is defined on [0, 1]")
    _, backward, end_value, end_slope = _psi_tables()
    with np.errstate(divide="ignore"):
        logy = np.log(y)
    inside = logy >= end_value
    t = np.sqrt(np.maximum(-logy, 0.0))
    s_in = backward(np.minimum(t, math.sqrt(-end_value)))
    c = np.maximum(end_value - logy, 0.0)
    s_out = _S_MAX + 2.0 * (end_slope + np.sqrt(end_slope**2 + c))
    s = np.where(inside, s_in, s_out)
    out = np.where(y == 0, np.inf, s * s)
    out = np.where(y == 1, 0.0, out)
    return out if out.ndim else float(out)


def psi_inverse_bisection(y: float, tol: float = 1e-12) -> float:
    """Reference inverse by bisection on ``psi_quadrature``; slow, for checks."""
    if not 0 < y <= 1:
        raise ValueError("target must lie in (0, 1]")
    if y == 1:
        return 0.0
    hi = 1.0
    while psi_quadrature(hi)[0] > y:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        val = psi_quadrature(mid)[0]
        if abs(val - y) <= tol * y:
            return mid
        if val > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Bernoulli-Gaussian signal through a scalar Gaussian channel

@dataclass(frozen=True)
class SignalPrior:
    """Spike at zero with probability ``1 - rho`` and a ``N(0, 1/rho)`` slab."""

    rho: float = 0.2

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise ValueError("sparsity rho must lie in (0, 1]")

    @property
    def slab_variance(self) -> float:
        return 1.0 / self.rho

    def second_moment(self) -> float:
        return self.rho * self.slab_variance

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        slab = rng.random(size) < self.rho
        return np.where(slab, rng.normal(0.0, math.sqrt(self.slab_variance), size), 0.0)


_GL12_T, _GL12_W = np.polynomial.legendre.leggauss(12)
_Y_CORE = 14.0


def _panel_rule(n_panels: int):
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    h = edges[1] - edges[0]
    t = (0.5 * (edges[:-1] + edges[1:])[:, None] + 0.5 * h * _GL12_T).ravel()
    w = np.tile(0.5 * h * _GL12_W, n_panels)
    return t, w


_UNIT_CORE = _panel_rule(28)
_UNIT_SLAB = _panel_rule(80)


def _output_nodes(prior: SignalPrior, snr: np.ndarray):
    """Quadrature nodes in y >= 0 (the output law is even) for each snr."""
    slab_sd = np.sqrt(1.0 + snr * prior.slab_variance)
    t1, w1 = _UNIT_CORE
    t2, w2 = _UNIT_SLAB
    span = 40.0 * slab_sd[:, None]
    y = np.concatenate([np.broadcast_to(_Y_CORE * t1, (len(snr), len(t1))), _Y_CORE + span * t2], axis=1)
    w = np.concatenate([np.broadcast_to(_Y_CORE * w1, (len(snr), len(w1))), span * w2], axis=1)
    return y, 2.0 * w


def _log_components(prior: SignalPrior, snr: np.ndarray, y: np.ndarray):
    v_slab = (1.0 + snr * prior.slab_variance)[:, None]
    spike = math.log1p(-prior.rho) - 0.5 * math.log(2 * math.pi) - 0.5 * y * y if prior.rho < 1 else None
    slab = math.log(prior.rho) - 0.5 * np.log(2 * math.pi * v_slab) - 0.5 * y * y / v_slab
    total = slab if spike is None else np.logaddexp(spike, slab)
    return total, slab


def _check_mass(w, logp):
    mass = np.sum(w * np.exp(logp), axis=1)
    if np.any(np.abs(mass - 1.0) > 1e-11):
        raise ArithmeticError(f"output-density quadrature lost mass: {np.max(np.abs(mass - 1)):.2e}")


def mmse(prior: SignalPrior, snr):
    """Minimum mean square error of ``S`` given ``sqrt(snr) S + Z``."""
    shape = np.shape(snr)
    snr_arr = np.atleast_1d(np.asarray(snr, dtype=float)).ravel()
    if np.any(snr_arr < 0):
        raise ValueError("snr must be non-negative")
    out = np.ones_like(snr_arr)
    pos = snr_arr > 0
    if np.any(pos):
        s = snr_arr[pos]
        y, w = _output_nodes(prior, s)
        logp, log_slab = _log_components(prior, s, y)
        _check_mass(w, logp)
        gain = (np.sqrt(s) * prior.slab_variance / (1.0 + s * prior.slab_variance))[:, None]
        estimate = np.exp(log_slab - logp) * gain * y
        out[pos] = 1.0 - np.sum(w * np.exp(logp) * estimate**2, axis=1)
    out = np.clip(out, 0.0, 1.0)
    return out.reshape(shape) if shape else float(out[0])


def mutual_information(prior: SignalPrior, snr):
    """``I(S; sqrt(snr) S + Z)`` in nats; its snr-derivative is ``mmse / 2``."""
    shape = np.shape(snr)
    snr_arr = np.atleast_1d(np.asarray(snr, dtype=float)).ravel()
    if np.any(snr_arr < 0):
        raise ValueError("snr must be non-negative")
    out = np.zeros_like(snr_arr)
    pos = snr_arr > 0
    if np.any(pos):
        s = snr_arr[pos]
        y, w = _output_nodes(prior, s)
        logp, _ = _log_components(prior, s, y)
        entropy = -np.sum(w * np.exp(logp) * logp, axis=1)
        out[pos] = entropy - 0.5 * math.log(2 * math.pi * math.e)
    return out.reshape(shape) if shape else float(out[0])


def mmse_scalar(prior: SignalPrior, snr: float) -> float:
    return float(mmse(prior, float(snr)))
