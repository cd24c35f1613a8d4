import pytest
from hypothesis import HealthCheck, settings

from spatial_coupling.coupled_solver import SolverConfig, solve_fixed_point
from spatial_coupling.profiles import Grid
from spatial_coupling.scalar_systems import calibrate
from spatial_coupling.window_kernels import uniform_window

settings.register_profile(
    "suite", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def bec():
    return calibrate("ldpc_bec", l=3, r=6)


@pytest.fixture(scope="session")
def gldpc():
    return calibrate("gldpc", n=15, e=3)


@pytest.fixture(scope="session")
def gaussian_ldpc():
    return calibrate("gaussian_ldpc", l=3, r=6)


@pytest.fixture(scope="session")
def amp():
    return calibrate("amp", rho=0.2, delta=0.35)


@pytest.fixture(scope="session")
def all_systems(bec, gldpc, gaussian_ldpc, amp):
    return {"ldpc_bec": bec, "gldpc": gldpc, "gaussian_ldpc": gaussian_ldpc, "amp": amp}


@pytest.fixture(scope="session")
def window():
    return uniform_window(0.5)


@pytest.fixture(scope="session")
def default_grid():
    return Grid.from_bounds(-16.0, 16.0, 1 / 64)


@pytest.fixture(scope="session")
def bec_fp(bec, window, default_grid):
    return solve_fixed_point(bec, window, default_grid, SolverConfig())


@pytest.fixture(scope="session")
def gldpc_fp(gldpc, window, default_grid):
    return solve_fixed_point(gldpc, window, default_grid, SolverConfig())


# one PASS/FAIL line per acceptance criterion in the terminal summary
_ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and report.when in ("setup", "call"):
        number = item.get_closest_marker("criterion")
        if number is None:
            return
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        key = number.args[0]
        if report.failed or key not in _ACCEPTANCE:
            _ACCEPTANCE[key] = ("PASS" if report.passed else "FAIL", doc)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        verdict, doc = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{verdict}  criterion {key:2d}: {doc}")
