import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from spatial_coupling.scalar_systems import (
    CalibrationError,
    PiecewiseLinearUpdate,
    ScalarSystem,
    UpdateFunction,
    amp_log_term,
    area_A,
    area_Atilde,
    bec_threshold_bisection,
    calibrate,
    check_gap_condition,
    gaussian_display_discrepancy,
    gldpc_atilde_double_sum,
    perturb_bec,
    potential_phi,
)

FAMILY_NAMES = ["ldpc_bec", "gldpc", "gaussian_ldpc", "amp"]


def graded_nodes(n: int) -> np.ndarray:
    """Nodes clustered at both ends, where inverses of power laws are singular."""
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(n + 1) / n))


# ---------------------------------------------------------------------------
# invariants shared by every calibrated family

@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_normalisation(all_systems, family):
    sys = all_systems[family]
    assert sys.h_f(0.0) == pytest.approx(0.0, abs=1e-12)
    assert sys.h_g(0.0) == pytest.approx(0.0, abs=1e-12)
    assert sys.h_f(1.0) == pytest.approx(1.0, abs=1e-9)
    assert sys.h_g(1.0) == pytest.approx(1.0, abs=1e-9)
    assert abs(potential_phi(sys, 0.0, 0.0)) <= 1e-12
    assert abs(potential_phi(sys, 1.0, 1.0)) <= 1e-8
    assert sys.calibration.residuals <= 1e-8


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_phi_on_update_graphs(all_systems, family):
    sys = all_systems[family]
    rng = np.random.default_rng(1)
    u = rng.random(1000)
    v = rng.random(1000)
    np.testing.assert_allclose(sys.phi(u, sys.h_f(u)), area_A(sys, u), atol=1e-9)
    np.testing.assert_allclose(sys.phi(sys.h_g(v), v), area_Atilde(sys, v), atol=1e-9)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_phi_dominates_areas(all_systems, family):
    sys = all_systems[family]
    t = np.linspace(0.0, 1.0, 256)
    phi = sys.phi(t[:, None], t[None, :])
    assert np.all(phi >= sys.area_A(t)[:, None] - 1e-12)
    assert np.all(phi >= sys.area_Atilde(t)[None, :] - 1e-12)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_inverse_antiderivatives_are_convex(all_systems, family):
    sys = all_systems[family]
    t = np.linspace(0.0, 1.0, 10_000)
    for H in (sys.h_f.inverse_antiderivative(t), sys.h_g.inverse_antiderivative(t)):
        assert np.min(H[:-2] - 2 * H[1:-1] + H[2:]) >= -1e-12


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_inverse_antiderivative_matches_trapezoid(all_systems, family):
    sys = all_systems[family]
    t = graded_nodes(200_000)
    for h in (sys.h_f, sys.h_g):
        ref = np.concatenate([[0.0], np.cumsum(np.diff(t) * 0.5 * (h.inverse(t[1:]) + h.inverse(t[:-1])))])
        idx = np.linspace(0, len(t) - 1, 101).astype(int)
        np.testing.assert_allclose(h.inverse_antiderivative(t[idx]), ref[idx], atol=1e-9)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_inverse_is_inverse(all_systems, family):
    sys = all_systems[family]
    u = np.linspace(0.01, 0.99, 99)
    for h in (sys.h_f, sys.h_g):
        np.testing.assert_allclose(h.inverse(h(u)), u, atol=1e-8)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_spgc_and_areas(all_systems, family):
    report = check_gap_condition(all_systems[family], 256)
    assert report.pgc_holds and report.spgc_holds
    assert report.area_condition


def test_gap_check_rejects_bad_input(bec):
    with pytest.raises(ValueError):
        check_gap_condition(ScalarSystem(bec.h_f, bec.h_g, "x", {}), 256)
    with pytest.raises(ValueError):
        check_gap_condition(bec, 16)


def test_unknown_family():
    with pytest.raises(ValueError):
        calibrate("turbo")


# ---------------------------------------------------------------------------
# erasure channel

def test_bec_values(bec):
    cal = bec.calibration
    assert cal.threshold == pytest.approx(0.4881, abs=5e-4)
    assert cal.scale_x == pytest.approx(0.432, abs=1e-3)
    assert cal.scale_y == pytest.approx(0.941, abs=1e-3)


def test_bec_threshold_against_bisection(bec):
    assert bec.calibration.threshold == pytest.approx(bec_threshold_bisection(3, 6), abs=1e-6)


@pytest.mark.parametrize("ell,r", [(3, 6), (4, 8), (3, 5), (5, 10)])
def test_bec_other_ensembles(ell, r):
    sys = calibrate("ldpc_bec", l=ell, r=r)
    assert sys.calibration.threshold == pytest.approx(bec_threshold_bisection(ell, r), abs=1e-6)
    assert check_gap_condition(sys, 128).spgc_holds


def test_bec_phi_and_area(bec):
    assert bec.phi(0.5, 0.5) > 0
    assert abs(area_A(bec, 1.0)) <= 1e-8
    direct, _ = quad(lambda u: bec.h_g.inverse(u) - bec.h_f(u), 0.0, 0.5, epsabs=1e-13)
    assert area_A(bec, 0.5) > 0
    assert area_A(bec, 0.5) == pytest.approx(direct, abs=1e-10)


def test_bec_perturbation_breaks_gap(bec):
    report = check_gap_condition(perturb_bec(bec, 0.01), 256)
    assert not report.pgc_holds
    assert abs(report.phi_11) > 1e-3


def test_bec_degenerate_degrees():
    with pytest.raises(CalibrationError):
        calibrate("ldpc_bec", l=2, r=4)


# ---------------------------------------------------------------------------
# generalised LDPC

def test_gldpc_areas(gldpc):
    assert abs(area_Atilde(gldpc, 1.0)) <= 1e-8
    assert area_Atilde(gldpc, 0.5) > 0
    direct, _ = quad(lambda v: gldpc.h_f.inverse(v) - gldpc.h_g(v), 0.0, 0.5, epsabs=1e-13)
    assert area_Atilde(gldpc, 0.5) == pytest.approx(direct, abs=1e-10)


def test_gldpc_update_monotone(gldpc):
    v = np.linspace(0.0, 1.0, 2001)
    assert np.all(np.diff(gldpc.h_g(v)) >= 0)


def test_gldpc_double_sum_matches_quadrature(gldpc):
    cal = gldpc.calibration
    for v in (0.3, 0.7, 1.0):
        direct, _ = quad(lambda t: gldpc.h_f.inverse(t) - gldpc.h_g(t), 0.0, v, epsabs=1e-14, epsrel=1e-13)
        assert gldpc_atilde_double_sum(15, 3, cal.scale_x, cal.scale_y, v) == pytest.approx(direct, abs=1e-8)
    # without the alternating signs the expansion no longer describes the area
    unsigned = gldpc_atilde_double_sum(15, 3, cal.scale_x, cal.scale_y, 1.0, signed=False)
    assert abs(unsigned) > 1e-2


def test_gldpc_bad_parameters():
    with pytest.raises(CalibrationError):
        calibrate("gldpc", n=15, e=0)


# ---------------------------------------------------------------------------
# Gaussian approximation

def test_gaussian_ldpc_calibration(gaussian_ldpc):
    cal = gaussian_ldpc.calibration
    assert cal.residuals <= 1e-8
    assert gaussian_ldpc.h_f(0.0) == 0.0
    assert 0 < cal.extra["channel_entropy"] < 1
    assert 0 < cal.scale_x < 1 and 0 < cal.scale_y < 1


def test_gaussian_ldpc_exit_curves_are_monotone(gaussian_ldpc):
    t = np.linspace(0.0, 1.0, 1001)
    assert np.all(np.diff(gaussian_ldpc.h_f(t)) >= 0)
    assert np.all(np.diff(gaussian_ldpc.h_g(t)) >= 0)


def test_gaussian_display_differs_from_potential(gaussian_ldpc):
    assert gaussian_display_discrepancy(gaussian_ldpc) > 1e-3


# ---------------------------------------------------------------------------
# compressed sensing

def test_amp_calibration(amp):
    cal = amp.calibration
    assert cal.residuals <= 1e-8
    assert cal.scale_x > 0 and cal.scale_y < 0
    u = np.linspace(0.0, 1.0, 257)[1:-1]
    assert np.all(amp.area_A(u) > 0)


def test_amp_log_term_against_quadrature(amp):
    cal = amp.calibration
    delta, snr = amp.params["delta"], cal.threshold
    xs, xm = cal.extra["x_star"], cal.scale_x
    for u in (0.2, 0.6, 1.0):
        direct, _ = quad(amp.h_g.inverse, 0.0, u, epsabs=1e-14, epsrel=1e-13)
        offset = (delta / snr + xs) * u / xm
        assert amp_log_term(amp, u) == pytest.approx(direct + offset, abs=1e-8)


def test_amp_without_transition():
    with pytest.raises(CalibrationError):
        calibrate("amp", rho=0.2, delta=0.95)


# ---------------------------------------------------------------------------
# generic update functions

def test_update_function_derived_pieces():
    h = UpdateFunction(lambda u: u**2, name="square")
    t = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(h.inverse(t), np.sqrt(t), atol=1e-12)
    np.testing.assert_allclose(h.inverse_antiderivative(t), 2.0 / 3.0 * t**1.5, atol=1e-9)
    np.testing.assert_allclose(h.antiderivative(t), t**3 / 3, atol=1e-9)


@given(st.lists(st.integers(1, 999), min_size=1, max_size=12, unique=True))
def test_piecewise_linear_update(points):
    u = np.sort(np.asarray(points)) / 1000.0
    u = np.unique(np.concatenate([[0.0], u, [1.0]]))
    vals = np.sort(np.random.default_rng(len(u)).random(2 * len(u)))
    lo, hi = vals[0::2], vals[1::2]
    h = PiecewiseLinearUpdate(u, lo, hi)
    x = np.linspace(0.0, 1.0, 401)
    y = h(x)
    assert np.all(np.diff(y) >= 0)
    np.testing.assert_allclose(h(u), hi)
    for b in (0.3, 0.8, 1.0):
        ref, _ = quad(h.eval, 0.0, b, points=u[(u > 0) & (u < b)], limit=200)
        assert h.antiderivative(b) == pytest.approx(ref, abs=1e-10)
    # inverse of the graph, jumps included
    v = np.linspace(lo[0], hi[-1], 57)
    inv = h.inverse(v)
    assert np.all(np.diff(inv) >= -1e-15)
    assert np.all(h.eval_left(inv) <= v + 1e-12) and np.all(h(inv) >= v - 1e-12)


def test_piecewise_linear_rejects_decreasing():
    with pytest.raises(ValueError):
        PiecewiseLinearUpdate([0.0, 1.0], [0.5, 0.2], [0.6, 0.3])
