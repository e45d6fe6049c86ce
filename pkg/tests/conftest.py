"""Shared fixtures and the acceptance summary printed at the end of a run."""

import pytest

from bspir.csa import PirParams, build_csa
from bspir.harness import EXAMPLE_PARAMS

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _ACCEPTANCE[number] = ("PASS" if rep.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")


@pytest.fixture(scope="session")
def example_ctx():
    return build_csa(PirParams.create(**EXAMPLE_PARAMS))


@pytest.fixture(scope="session")
def tiny_params():
    return PirParams.create(5, 1, 2)


@pytest.fixture(scope="session")
def tiny_k1():
    return PirParams.create(5, 1, 1)
