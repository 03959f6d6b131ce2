import numpy as np
import pytest

from dynoracle import _kernels

KERNEL_NAMES = ("jacobi_eigvalsh", "cholesky_lower", "pdgm_quadratic",
                "state_space_quadratic", "lmi_min_margin")

ACCEPTANCE_LINES = []


@pytest.fixture(params=_kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    impl = _kernels.get_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # keeps the call-phase outcome on the item for fixtures that report it
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
