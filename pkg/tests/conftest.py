import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def hippocampal_params():
    from tripletstdp.presets import HIPPOCAMPAL_STYLE
    return HIPPOCAMPAL_STYLE


@pytest.fixture
def visual_params():
    from tripletstdp.presets import VISUAL_CORTEX_STYLE
    return VISUAL_CORTEX_STYLE


@pytest.fixture
def datasets_dir():
    return ROOT / "datasets"


@pytest.fixture
def configs_dir():
    return ROOT / "configs"


_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion for the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    detail = dict(item.user_properties).get("detail", "")
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
        _CRITERIA.append((marker.args[0], "WAIVED", reason.replace("Skipped: ", "")))
    elif report.when == "call" or report.failed:
        _CRITERIA.append((marker.args[0], "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _CRITERIA:
        terminalreporter.write_line(f"{status:<6} {name}: {detail}")
