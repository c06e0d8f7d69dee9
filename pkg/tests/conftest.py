import time

import pytest

from opensis.config import bundled_config
from opensis.experiment import execute, write_outputs

# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def record():
    def _record(name, ok, detail=""):
        ACCEPTANCE_LINES.append((name, bool(ok), detail))
        return ok

    return _record


@pytest.fixture(scope="session")
def fig2_run(tmp_path_factory):
    """The bundled moment-comparison recipe, run once per session and written to disk."""
    cfg = bundled_config("fig2.cfg")
    out = tmp_path_factory.mktemp("fig2_a")
    start = time.perf_counter()
    result = execute(cfg)
    elapsed = time.perf_counter() - start
    write_outputs(result, out)
    return result, out, elapsed
