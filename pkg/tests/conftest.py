import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DEFAULT_CORPUS_SEED = 20240917


def pytest_addoption(parser):
    parser.addoption(
        "--corpus-seed",
        type=int,
        default=DEFAULT_CORPUS_SEED,
        help="seed for randomly generated test corpora",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")
    config._criteria = {}


@pytest.fixture
def corpus_seed(request) -> int:
    return request.config.getoption("--corpus-seed")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            config._criteria[number] = title
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[number].append(report.outcome)


_outcomes: dict[int, list[str]] = defaultdict(list)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(config._criteria):
        results = _outcomes.get(number, [])
        if not results:
            verdict = "NOT RUN"
        elif "failed" in results:
            verdict = "FAIL"
        elif all(r == "skipped" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {number} {config._criteria[number]}: {verdict}")
