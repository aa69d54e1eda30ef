import copy

import pytest

from etconsensus.scenario import ScenarioConfig, apply_overrides, bundled_config

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def s5_raw():
    return bundled_config()


@pytest.fixture
def make_cfg(s5_raw):
    """Bundled 5-node scenario with dotted overrides applied."""

    def _make(*overrides, validate=True):
        return ScenarioConfig.from_dict(apply_overrides(copy.deepcopy(s5_raw), overrides),
                                        validate=validate)

    return _make


@pytest.fixture
def make_single(s5_raw):
    """One isolated node carrying the two-position sensor of the bundled scenario."""

    def _make(*overrides, validate=True):
        raw = copy.deepcopy(s5_raw)
        raw["graph"] = {"nodes": 1, "edges": []}
        raw["sensors"] = [raw["sensors"][1]]
        raw["N"] = 1
        return ScenarioConfig.from_dict(apply_overrides(raw, overrides), validate=validate)

    return _make


@pytest.fixture
def accept():
    """Record one acceptance verdict line, then assert it."""

    def _record(tag, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
        assert ok, f"{tag}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
