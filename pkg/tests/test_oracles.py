#!/usr/bin/env python3
"""
Tests for the self-check suites behind ``analyze_sop.py validate``.
"""

import pytest

from secrecy_outage import oracles


@pytest.mark.integration
def test_approximation_suite_passes_with_tight_tolerances():
    report = oracles.approximation_suite()
    assert report.passed, [(c.name, c.detail) for c in report.failures]
    names = [c.name for c in report.checks]
    assert 'omega vs reference integral (varrho=1)' in names
    assert any(name.startswith('approximation vs bound') for name in names)


@pytest.mark.unit
def test_distribution_suite_checks_the_simulator_draws():
    report = oracles.distribution_suite(seed=3, n_samples=20000)
    assert report.passed, [(c.name, c.detail) for c in report.failures]
    assert {c.name for c in report.checks} >= {'ppp mean count', 'disk radial cdf', 'disk angle cdf'}


@pytest.mark.unit
def test_unknown_suite_is_rejected():
    with pytest.raises(KeyError):
        oracles.run_suites(['nope'])
