import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, outcome, duration = _acceptance[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title} ({duration:.1f}s)")


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """240 synthetic samples in 4 files."""
    from pixelsnn.clusters import write_synthetic_files

    out = tmp_path_factory.mktemp("small")
    return write_synthetic_files(out, 240, 4, seed=11)


@pytest.fixture(scope="session")
def tiny_config():
    """Training settings small enough for a few-second run."""
    from pixelsnn.config import TrainConfig
    from pixelsnn.evolution import EvoConfig

    evo = EvoConfig(population_size=6, starting_nodes=4, starting_edges=30, elitism_count=1, max_generations=2)
    return TrainConfig(evo=evo, test_fraction=0.25)
