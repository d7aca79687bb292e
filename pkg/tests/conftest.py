import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from arithdyn.systems import load_spec

ROOT = Path(__file__).resolve().parent.parent
SYSTEMS = ROOT / "systems"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def corpus_paths():
    return sorted(p for p in SYSTEMS.glob("*.json") if not p.name.endswith(".oracle.json"))


def oracle_for(path: Path) -> dict:
    return json.loads(path.with_name(path.stem + ".oracle.json").read_text())


@pytest.fixture(scope="session")
def corpus():
    """(spec, oracle) pairs for every shipped system."""
    return [(load_spec(p), oracle_for(p)) for p in corpus_paths()]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
