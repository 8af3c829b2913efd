import numpy as np
import pytest

import ctmcreduce as cr


@pytest.fixture(scope="session")
def counterexample():
    return cr.load_bundled("counterexample")


@pytest.fixture(scope="session")
def three_state():
    return cr.load_bundled("three_state")


@pytest.fixture(scope="session")
def mwc():
    return cr.load_bundled("mwc")


@pytest.fixture(scope="session", params=cr.BUNDLED_MODELS)
def bundled(request):
    return cr.load_bundled(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title, elapsed, detail = RESULTS[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}  [{elapsed:.2f}s]  {detail}"
        )
