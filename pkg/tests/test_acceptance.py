"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line (plus notes) straight to the
terminal, so the lines survive pytest's output capture.  Tolerances are
exact integers except for criterion 8, which allows three standard errors.
Run this file directly to print the lines without pytest.
"""

import sys

import pytest

from pebbling.acceptance import CHECKS, run_check


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    res = run_check(number, "quick")
    with capsys.disabled():
        print()
        print(res.line())
        for note in res.notes:
            print(f"       note: {note}")
    assert res.passed, res.detail


if __name__ == "__main__":
    results = [run_check(i, "quick") for i in sorted(CHECKS)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
