import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = range(1, 10)
_records: dict[int, list[tuple[bool, str, str]]] = {}


@pytest.fixture
def acceptance(request):
    """record(k, ok, detail) files a result under acceptance criterion k."""

    def record(k: int, ok: bool, detail: str) -> bool:
        _records.setdefault(k, []).append((bool(ok), detail, request.node.name))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _records:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in CRITERIA:
        recs = _records.get(k)
        if not recs:
            tr.write_line(f"criterion {k}: FAIL (not run or errored before recording)")
            continue
        ok = all(r[0] for r in recs)
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}")
        for passed, detail, name in recs:
            tr.write_line(f"    [{'ok' if passed else 'FAIL'}] {name}: {detail}")
