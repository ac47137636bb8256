"""One test per acceptance criterion, each within its stated time bound."""

from __future__ import annotations

import pytest

from motivic_wf.acceptance import CRITERIA, run_criterion
from motivic_wf.config import Config

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number):
    res = run_criterion(number, Config())
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, res.detail
    assert res.seconds < res.limit, f"took {res.seconds:.2f}s, limit {res.limit}s"


@pytest.mark.slow
def test_all_criteria_at_q2():
    from motivic_wf.acceptance import run_all

    results = run_all(Config.for_q(2))
    failed = [r.line() for r in results if not r.ok]
    assert not failed, failed
