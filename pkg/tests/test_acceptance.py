"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Run directly (``python3 tests/test_acceptance.py``) for just the lines.
"""
import sys

import pytest

from torusbif import acceptance

N = acceptance.VERIFY_N


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check, capsys):
    result = check(N)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.summary


@pytest.mark.parametrize("number", sorted(acceptance.EXCLUDED))
def test_excluded_criterion(number, capsys):
    with capsys.disabled():
        print(f"\n[SKIP] criterion {number}: {acceptance.EXCLUDED[number]}")
    pytest.skip(acceptance.EXCLUDED[number])


if __name__ == "__main__":
    results = acceptance.run_all(N)
    for r in results:
        print(r.line())
    for number, why in acceptance.EXCLUDED.items():
        print(f"[SKIP] criterion {number}: {why}")
    sys.exit(0 if all(r.passed for r in results) else 1)
