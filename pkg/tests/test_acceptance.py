"""Acceptance criteria, one test per criterion.

The terminal summary prints a PASS/FAIL line for each one under the
``acceptance criteria`` heading.
"""

import time

import numpy as np
import pytest

from helpers import COARSE, scrambled_pair
from spatial_coupling.coupled_solver import SolverConfig, is_cfp, solve_fixed_point, uniqueness_test
from spatial_coupling.displacement import (
    convexity_sweep,
    finite_difference_second_derivative,
    second_derivative_W,
)
from spatial_coupling.gaussian_channels import SignalPrior, log_psi, mmse, psi
from spatial_coupling.potential_functional import W_kappa, big_W, uncoupled_L
from spatial_coupling.profiles import (
    Profile,
    ProfilePair,
    random_monotone_profile,
    rearrange_increasing,
)
from spatial_coupling.scalar_systems import calibrate, check_gap_condition
from spatial_coupling.window_kernels import abs_moment, convolve_values, kappa, kernel_V, uniform_window

criterion = pytest.mark.criterion


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


@criterion(1)
def test_bec_calibration():
    """(3,6) erasure calibration: threshold, x_MAP, y_MAP and runtime under 1 s."""
    sys, seconds = timed(calibrate, "ldpc_bec", l=3, r=6)
    cal = sys.calibration
    assert abs(cal.threshold - 0.4881) <= 5e-4
    assert abs(cal.scale_x - 0.432) <= 1e-3
    assert abs(cal.scale_y - 0.941) <= 1e-3
    assert seconds < 1.0


@criterion(2)
def test_gldpc_calibration():
    """GLDPC(15, 3) calibration: threshold, x_MAP, y_MAP and runtime under 2 s."""
    sys, seconds = timed(calibrate, "gldpc", n=15, e=3)
    cal = sys.calibration
    assert seconds < 2.0
    checks = {
        "threshold": (cal.threshold, 0.3901, 5e-4),
        "x_MAP": (cal.scale_x, 0.3670, 1e-3),
        "y_MAP": (cal.scale_y, 0.9342, 1e-3),
    }
    misses = {k: f"{got:.6f} vs {want} (tol {tol})" for k, (got, want, tol) in checks.items() if abs(got - want) > tol}
    assert not misses, misses


@criterion(3)
def test_strict_gap_condition(bec, gldpc):
    """Strict positive gap condition on a 256 x 256 lattice for both calibrated codes."""
    for sys in (bec, gldpc):
        report = check_gap_condition(sys, 256)
        assert report.spgc_holds
        assert abs(float(sys.phi(0.0, 0.0))) <= 1e-8
        assert abs(float(sys.phi(1.0, 1.0))) <= 1e-8


@criterion(4)
def test_bec_fixed_point(bec, window, default_grid):
    """Coupled solver on the (3,6) erasure system converges to a consistent monotone front in under 10 s."""
    report, seconds = timed(solve_fixed_point, bec, window, default_grid, SolverConfig())
    pair = report.pair
    assert report.converged
    assert report.residual <= 1e-10
    assert pair.f.is_monotone and pair.g.is_monotone
    assert pair.f.values[0] < 0.5 < pair.f.values[-1]
    assert pair.g.values[0] < 0.5 < pair.g.values[-1]
    assert is_cfp(bec, window, pair).holds
    assert seconds < 10.0


@criterion(5)
def test_kappa_identity(bec, gldpc, window, bec_fp, gldpc_fp):
    """Potential equals its kappa double integral at the converged fronts of both codes."""
    for sys, fp in ((bec, bec_fp), (gldpc, gldpc_fp)):
        f, g = fp.pair.f, fp.pair.g
        W = big_W(sys, window, f, g)
        assert abs(W - W_kappa(window, f, g, sys=sys)) <= 1e-4 * max(1.0, abs(W))


@criterion(6)
def test_displacement_convexity(all_systems, window):
    """Second differences of W along 21-point displacement paths are non-negative for 100 pairs per system."""
    lambdas = np.linspace(0.0, 1.0, 21)
    start = time.perf_counter()
    for k, sys in enumerate(all_systems.values()):
        rng = np.random.default_rng(6000 + k)
        for _ in range(100):
            draw = lambda: random_monotone_profile(rng, COARSE)  # noqa: E731
            a, b = ProfilePair(draw(), draw()), ProfilePair(draw(), draw())
            path = convexity_sweep(sys, window, a, b, lambdas)
            tol = 1e-6 * max(1.0, float(np.max(np.abs(path.W))))
            assert path.second_differences.min() >= -tol
            assert path.W[10] <= 0.5 * (path.W[0] + path.W[-1]) + tol
    assert time.perf_counter() - start < 300.0


@criterion(7)
def test_second_derivative_formula(bec, window):
    """Closed-form second derivative matches a centred finite difference within 1 percent."""
    rng = np.random.default_rng(7000)
    for _ in range(20):
        draw = lambda: random_monotone_profile(rng, COARSE)  # noqa: E731
        a, b = ProfilePair(draw(), draw()), ProfilePair(draw(), draw())
        for lam in (0.25, 0.5, 0.75):
            formula = second_derivative_W(window, a, b, lam)
            fd = finite_difference_second_derivative(bec, window, a, b, lam, h=0.02)
            assert abs(formula - fd) <= 1e-2 * max(1.0, formula)


@criterion(8)
def test_rearrangement_inequality(bec, window):
    """Increasing rearrangement never raises W and leaves the uncoupled part unchanged."""
    for seed in range(100):
        pair = scrambled_pair(8000 + seed)
        f_bar, g_bar = rearrange_increasing(pair.f), rearrange_increasing(pair.g)
        assert big_W(bec, window, pair.f, pair.g) >= big_W(bec, window, f_bar, g_bar) - 1e-8
        L = uncoupled_L(bec, window, pair.f, pair.g)
        assert abs(L - uncoupled_L(bec, window, f_bar, g_bar)) <= 1e-12 * max(1.0, abs(L))


def _bumped(rng, p: Profile) -> Profile:
    x = p.grid.x
    bump = np.zeros_like(x)
    for _ in range(rng.integers(1, 4)):
        centre = rng.uniform(-3.0, 3.0)
        width = rng.uniform(0.1, 1.5)
        bump += rng.uniform(-0.2, 0.2) * np.exp(-0.5 * ((x - centre) / width) ** 2)
    return Profile(p.grid, np.sort(np.clip(p.values + bump, 0.0, 1.0)))


@criterion(9)
def test_fixed_point_minimality(bec, window, bec_fp):
    """W at the fixed point is below W of 50 monotone perturbations, strictly for visible ones."""
    f, g = bec_fp.pair.f, bec_fp.pair.g
    W_fp = big_W(bec, window, f, g)
    rng = np.random.default_rng(9000)
    strict = 0
    for _ in range(50):
        fp, gp = _bumped(rng, f), _bumped(rng, g)
        W = big_W(bec, window, fp, gp)
        assert W_fp <= W + 1e-12
        size = max(np.abs(fp.values - f.values).max(), np.abs(gp.values - g.values).max())
        if size > 0.01:
            strict += 1
            assert W > W_fp
    assert strict > 0


@criterion(10)
def test_uniqueness_up_to_translation(bec, gldpc, window, default_grid, bec_fp, gldpc_fp):
    """Step and ramp starts give the same front up to an integer shift, for both codes."""
    for sys, fp in ((bec, bec_fp), (gldpc, gldpc_fp)):
        ramp = solve_fixed_point(sys, window, default_grid, SolverConfig(init="ramp"))
        assert ramp.converged
        result = uniqueness_test(sys, window, fp.pair, ramp.pair)
        assert result.deviation <= 2 * default_grid.dx


@criterion(11)
def test_window_kernels():
    """Uniform window constants, convexity of V and the convolution bound on 100 profiles."""
    win = uniform_window(0.5)
    assert abs(abs_moment(win) - 0.25) <= 1e-15
    assert abs(kernel_V(win, 0.0) - 0.125) <= 1e-15
    assert abs(kappa(win, 0.0) - 0.125) <= 1e-15
    x = np.linspace(-3.0, 3.0, 6001)
    far = np.abs(x) >= 0.5
    assert np.all(kappa(win, x[far]) == 0.0)
    V = kernel_V(win, x)
    assert np.min(V[:-2] - 2 * V[1:-1] + V[2:]) >= -1e-12
    rng = np.random.default_rng(11000)
    for _ in range(100):
        p = random_monotone_profile(rng, COARSE)
        smoothed = convolve_values(win, p.values, COARSE.dx)
        assert COARSE.dx * np.sum(np.abs(smoothed - p.values)) <= abs_moment(win) + 1e-12


@criterion(12)
def test_gaussian_and_amp_systems(gaussian_ldpc, amp):
    """Gaussian-approximation and AMP systems calibrate, with monotone psi and mmse and the strict gap."""
    for sys in (gaussian_ldpc, amp):
        assert sys.calibration.residuals <= 1e-8
        assert check_gap_condition(sys, 256).spgc_holds
    assert psi(0.0) == 1.0
    m = np.concatenate([[0.0], np.logspace(-6, 4, 2000)])
    assert np.all(np.diff(log_psi(m)) < 0)
    assert np.all(np.diff(psi(m)) <= 0)
    prior = SignalPrior(amp.params["rho"])
    assert mmse(prior, 0.0) == 1.0
    snr = np.concatenate([[0.0], np.logspace(-4, 6, 2000)])
    assert np.all(np.diff(mmse(prior, snr)) <= 0)
