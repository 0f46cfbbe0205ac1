import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("semishadow", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("semishadow")


@pytest.fixture
def doubling():
    from semishadow import GeneratorSet
    from semishadow.core import REAL_LINE
    from semishadow.maps import Affine
    return GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})


@pytest.fixture
def cyclic_pair():
    from semishadow import GeneratorSet
    from semishadow.core import finite_space
    from semishadow.maps import cyclic_g
    g = cyclic_g()
    return GeneratorSet.of(finite_space([1, 2, 3]), {"g": g, "gi": g.inverse()})


_AC_LINES: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_ac"):
        return
    label = "AC-" + str(int(name[7:9]))
    if report.when == "call" or report.outcome == "failed":
        prev = _AC_LINES.get(label)
        _AC_LINES[label] = "FAIL" if report.outcome == "failed" or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _AC_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_AC_LINES, key=lambda s: int(s[3:])):
        terminalreporter.write_line(f"{label}: {_AC_LINES[label]}")
