"""One test per acceptance criterion; each prints a PASS/FAIL line with its figures."""
import pytest

from conftest import ACCEPTANCE_LINES
from spheronlab import acceptance


def test_suite_is_nonempty():
    assert len(acceptance.CRITERIA) == 14
    assert [c.key for c in acceptance.CRITERIA] == list(range(1, 15))


@pytest.mark.parametrize("crit", acceptance.CRITERIA, ids=lambda c: f"{c.key:02d}-{c.name.replace(' ', '-')}")
def test_criterion(crit):
    outcome = acceptance.run_criterion(crit)
    print(outcome.line())
    ACCEPTANCE_LINES.append(outcome.line())
    assert outcome.passed, outcome.detail


@pytest.mark.parametrize("key", [1, 7, 12])
def test_injection_fails(key):
    outcome = acceptance.run_criterion(acceptance.by_key(key), inject=True)
    assert not outcome.passed
