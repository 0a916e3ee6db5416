"""Blind round trips: 100 seeds per recipe, truth inside 2 sigma at least 90 % of the time."""

import pytest
from roundtrip_cases import CASES, LEVEL, coverage


@pytest.mark.parametrize("case", CASES)
def test_two_sigma_coverage(case):
    cov = coverage(case)
    low = {k: v for k, v in cov.items() if v < LEVEL}
    assert not low, f"coverage below {LEVEL:.0%}: {low}"
