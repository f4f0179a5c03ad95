import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one sub-check of an acceptance criterion: ``criterion(id, what, ok, detail)``."""

    def record(cid, what, ok, detail=""):
        _ACCEPTANCE.setdefault(cid, []).append((what, bool(ok), detail))
        print(f"criterion {cid} [{'PASS' if ok else 'FAIL'}] {what}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=int):
        checks = _ACCEPTANCE[cid]
        ok = all(c[1] for c in checks)
        failed = [c for c in checks if not c[1]]
        line = f"criterion {cid}: {'PASS' if ok else 'FAIL'} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += " failed: " + "; ".join(f"{w} [{d}]" for w, _, d in failed)
        tr.write_line(line)
