"""The nine exit criteria at full scale, one test each.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
terminal summary.
"""
import pytest

from vekua.acceptance import CRITERIA

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, request):
    result = CRITERIA[number - 1]("full")
    line = result.line()
    print(line)
    request.config.acceptance_lines.append(line)
    assert result.passed, line
