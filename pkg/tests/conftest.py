import numpy as np
import pytest

from ballspec import _kernels_py, kernels


@pytest.fixture(params=["python", "cython"])
def kernel_impl(request):
    """Each kernel implementation that is importable in this environment."""
    if request.param == "python":
        return _kernels_py
    if kernels.IMPLEMENTATION != "cython":
        pytest.skip("compiled kernels not built")
    from ballspec import _kernels

    return _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
