"""Acceptance gate: one test and one PASS/FAIL line per criterion."""

import pytest

from frameforge.reproduce import CRITERIA

LINES = []


@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(cid):
    result = CRITERIA[cid]()
    line = result.line()
    LINES.append(line)
    print(line)
    assert result.passed, line
