#!/usr/bin/env python3
"""
Tests for the Monte Carlo simulator.
"""

import math

import numpy as np
import pytest
from scipy import stats

from secrecy_outage import analytic
from secrecy_outage.errors import EmptyInput
from secrecy_outage.params import Duplex, EdModel, Scenario, SystemParams
from secrecy_outage.simcore import (BLOCK_SIZE, STREAM_UE, EdRealization, OutageDefinition,
                                    TrialDraw, block_outages, draw_block, estimate_sop,
                                    sample_ppp_disk, sample_trial_draw, simulate_block, stream,
                                    tas_select, trial_outage, wilson_interval)


def draw(ue, bs, ue_side=None, si=0.0):
    bs = np.asarray(bs, dtype=float)
    return TrialDraw(ue_gains=np.asarray(ue, dtype=float), ed_bs_gains=bs,
                     ed_ue_gains=np.ones_like(bs) if ue_side is None else np.asarray(ue_side, float),
                     self_interference=si)


@pytest.mark.unit
def test_streams_are_reproducible_and_distinct():
    a = stream(42, 3, 1).random(5)
    b = stream(42, 3, 1).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, stream(42, 3, 2).random(5))
    assert not np.array_equal(a, stream(42, 4, 1).random(5))
    assert not np.array_equal(a, stream(43, 3, 1).random(5))
    with pytest.raises(ValueError):
        stream(0, 0, 256)


@pytest.mark.unit
def test_ppp_mean_count():
    rng = stream(7, 0, 0)
    counts = [sample_ppp_disk(0.005, 50.0, rng).count for _ in range(20000)]
    expected = 0.005 * math.pi * 50.0 ** 2
    assert expected == pytest.approx(39.27, abs=0.01)
    assert np.mean(counts) == pytest.approx(expected, rel=0.015)


@pytest.mark.unit
def test_ppp_points_fill_the_disk_uniformly():
    rng = stream(11, 0, 0)
    expected = 0.05 * math.pi * 30.0 ** 2
    assert expected == pytest.approx(141.37, abs=0.01)
    realizations = [sample_ppp_disk(0.05, 30.0, rng) for _ in range(40)]
    first = realizations[0].count
    assert abs(first - expected) <= 4.0 * math.sqrt(expected)
    r = np.concatenate([x.r for x in realizations])
    theta = np.concatenate([x.theta for x in realizations])
    assert abs(r.size - 40 * expected) <= 4.0 * math.sqrt(40 * expected)
    assert np.all(r <= 30.0)
    assert np.all((theta >= 0.0) & (theta < 2.0 * math.pi))
    assert stats.kstest(r, lambda x: np.clip(x / 30.0, 0.0, 1.0) ** 2).pvalue > 0.01
    assert stats.kstest(theta, stats.uniform(loc=0.0, scale=2.0 * math.pi).cdf).pvalue > 0.01


@pytest.mark.unit
def test_empty_ppp():
    assert sample_ppp_disk(0.0, 50.0, stream(0, 0, 0)).count == 0


@pytest.mark.unit
@pytest.mark.parametrize("k", [1, 3, 8])
def test_tas_max_gain_distribution(k):
    gains = stream(5, 0, STREAM_UE).exponential(size=(50000, k)).max(axis=1)
    result = stats.kstest(gains, lambda x: (-np.expm1(-x)) ** k)
    assert result.pvalue > 0.01


@pytest.mark.unit
def test_tas_select():
    assert tas_select([0.2, 1.5, 0.7]) == (1, 1.5)
    assert tas_select([0.9, 0.9]) == (0, 0.9)
    with pytest.raises(EmptyInput):
        tas_select([])


@pytest.mark.unit
def test_realization_points_round_trip():
    realization = EdRealization.from_points([(1.0, 0.5), (2.0, 3.0)])
    assert realization.count == 2
    assert realization.points == [(1.0, 0.5), (2.0, 3.0)]


@pytest.mark.unit
def test_no_eavesdroppers_no_outage():
    params = SystemParams(d_bu=10.0)
    assert not trial_outage(params, EdRealization.from_points([]), draw([1.0], []))


@pytest.mark.unit
def test_colluding_sum_versus_independent_max():
    # User SNR 1e5 * 1 / 100 = 1000; each eavesdropper 1e5 / 144 ≈ 694
    realization = EdRealization.from_points([(12.0, 1.0), (12.0, 2.0)])
    trial = draw([1.0], [1.0, 1.0])
    hd_ie = SystemParams(d_bu=10.0)
    hd_ce = hd_ie.with_scenario(Scenario(Duplex.HALF, EdModel.COLLUDING))
    assert not trial_outage(hd_ie, realization, trial)
    assert trial_outage(hd_ce, realization, trial)


@pytest.mark.unit
def test_jamming_protects_full_duplex_user():
    realization = EdRealization.from_points([(5.0, 0.0)])
    trial = draw([1.0], [1.0])
    hd = SystemParams(d_bu=10.0)
    assert trial_outage(hd, realization, trial)
    fd = hd.with_scenario(Scenario(Duplex.FULL, EdModel.INDEPENDENT))
    assert not trial_outage(fd, realization, trial)
    # Strong residual self-interference undoes it
    assert trial_outage(fd, realization, draw([1.0], [1.0], si=1e6))


@pytest.mark.unit
def test_outage_definitions_differ_at_positive_rate():
    params = SystemParams(d_bu=10.0, pb_over_n0_db=-10.0).replace(beta=2.0)
    nobody = EdRealization.from_points([])
    trial = draw([1.0], [])
    assert trial_outage(params, nobody, trial, OutageDefinition.EXACT_CAPACITY)
    assert not trial_outage(params, nobody, trial, OutageDefinition.SNR_RATIO)


@pytest.mark.unit
def test_trial_outage_rejects_mismatched_draw():
    with pytest.raises(ValueError):
        trial_outage(SystemParams(), EdRealization.from_points([(3.0, 0.0)]), draw([1.0], []))


@pytest.mark.unit
def test_outage_definition_parse():
    assert OutageDefinition.parse('SnrRatio') is OutageDefinition.SNR_RATIO
    assert OutageDefinition.parse('exact') is OutageDefinition.EXACT_CAPACITY
    with pytest.raises(ValueError):
        OutageDefinition.parse('median')


@pytest.mark.unit
def test_wilson_interval():
    low, high = wilson_interval(0, 100)
    assert low == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < high < 0.05
    low, high = wilson_interval(50, 100)
    assert low < 0.5 < high
    assert 0.5 - low == pytest.approx(high - 0.5, rel=1e-9)


@pytest.mark.unit
def test_estimate_is_reproducible_across_thread_counts():
    params = SystemParams(k_antennas=2, rho_e=0.003, d_bu=8.0, duplex=Duplex.FULL,
                          ed_model=EdModel.COLLUDING)
    n = 3 * BLOCK_SIZE + 17
    one = estimate_sop(params, n_trials=n, seed=99, threads=1)
    four = estimate_sop(params, n_trials=n, seed=99, threads=4)
    assert one == four
    assert one.n_trials == n
    assert estimate_sop(params, n_trials=n, seed=100, threads=1).n_outages != one.n_outages


@pytest.mark.unit
def test_block_counts_add_up():
    params = SystemParams(rho_e=0.002)
    total = sum(simulate_block(params, 5, b, BLOCK_SIZE) for b in range(2))
    assert estimate_sop(params, n_trials=2 * BLOCK_SIZE, seed=5, threads=1).n_outages == total


@pytest.mark.unit
def test_scenario_override_and_zero_density():
    params = SystemParams(rho_e=0.0)
    estimate = estimate_sop(params, scenario=Scenario.parse('fd-colluding'), n_trials=5000)
    assert estimate.p_hat == 0.0
    assert estimate.ci_low == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        estimate_sop(params, n_trials=0)


@pytest.mark.unit
def test_simulation_matches_exact_hd_colluding():
    params = SystemParams(rho_e=0.001, radius=100.0, d_bu=10.0, alpha=4.0,
                          ed_model=EdModel.COLLUDING)
    exact = analytic.sop_hd_colluding(params).value
    estimate = estimate_sop(params, n_trials=40000, seed=12)
    assert estimate.contains(exact, slack=0.01)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 3, 5])
@pytest.mark.parametrize("rho_e", [0.0005, 0.001, 0.002, 0.005])
def test_hd_formulas_match_simulation(k, rho_e):
    params = SystemParams(k_antennas=k, rho_e=rho_e, radius=100.0, d_bu=10.0, alpha=4.0)
    for ed_model, evaluator in ((EdModel.INDEPENDENT, analytic.sop_hd_independent),
                                (EdModel.COLLUDING, analytic.sop_hd_colluding)):
        p = params.with_scenario(Scenario(Duplex.HALF, ed_model))
        value = evaluator(p).value
        estimate = estimate_sop(p, n_trials=100000, seed=2024 + k)
        assert estimate.contains(value) or abs(value - estimate.p_hat) <= 0.02



FD_EVALUATORS = ((EdModel.INDEPENDENT, analytic.sop_fd_independent_bound),
                 (EdModel.COLLUDING, analytic.sop_fd_colluding_bound))


def fd_setup(k, pu_db, rho_e):
    return SystemParams(k_antennas=k, rho_e=rho_e, radius=50.0, d_bu=5.0, alpha=2.0,
                        pu_over_n0_db=pu_db, lambda_uu_db=0.0, ed_noise=False)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 5])
@pytest.mark.parametrize("pu_db", [40.0, 50.0, 60.0])
@pytest.mark.parametrize("rho_e", [0.001, 0.005])
def test_fd_bounds_hold_against_simulation(k, pu_db, rho_e):
    for ed_model, evaluator in FD_EVALUATORS:
        p = fd_setup(k, pu_db, rho_e).with_scenario(Scenario(Duplex.FULL, ed_model))
        bound = evaluator(p).value
        estimate = estimate_sop(p, n_trials=100000, seed=77)
        assert estimate.p_hat <= bound + estimate.half_width


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 5])
@pytest.mark.parametrize("pu_db", [50.0, 60.0])
@pytest.mark.parametrize("rho_e", [0.001, 0.003, 0.005])
def test_fd_bounds_are_tight_at_moderate_outage(k, pu_db, rho_e):
    # The bounds average out the residual self-interference; at P_U = 40 dB
    # and dense eavesdroppers that alone leaves several hundredths of slack
    for ed_model, evaluator in FD_EVALUATORS:
        p = fd_setup(k, pu_db, rho_e).with_scenario(Scenario(Duplex.FULL, ed_model))
        bound = evaluator(p).value
        estimate = estimate_sop(p, n_trials=100000, seed=78)
        assert bound - estimate.p_hat <= 0.05


@pytest.mark.unit
def test_block_outages_match_the_trial_by_trial_path():
    for scenario in Scenario.all():
        params = SystemParams(k_antennas=3, rho_e=0.004, radius=50.0, d_bu=8.0,
                              lambda_uu_db=3.0, pu_over_n0_db=45.0).with_scenario(scenario)
        block = draw_block(params, 31, 2, 300)
        vectorised = block_outages(params, block)
        looped = [trial_outage(params, *block.trial(i)) for i in range(block.n_trials)]
        np.testing.assert_array_equal(vectorised, np.array(looped))
        assert simulate_block(params, 31, 2, 300) == int(np.count_nonzero(vectorised))


@pytest.mark.unit
def test_block_draw_layout():
    params = SystemParams(k_antennas=4, rho_e=0.003)
    block = draw_block(params, 8, 0, 500)
    assert block.ue_gains.shape == (500, 4)
    assert block.eds.count == int(block.counts.sum())
    assert block.ed_bs_gains.size == block.ed_ue_gains.size == block.eds.count
    assert np.all(block.self_interference >= 0.0)
    realization, trial = block.trial(7)
    assert realization.count == block.counts[7]
    np.testing.assert_array_equal(trial.ue_gains, block.ue_gains[7])


@pytest.mark.unit
def test_sample_trial_draw_shapes():
    params = SystemParams(k_antennas=3, lambda_uu_db=10.0)
    trial = sample_trial_draw(params, 4, stream(1, 0, 0))
    assert trial.ue_gains.shape == (3,)
    assert trial.ed_bs_gains.shape == trial.ed_ue_gains.shape == (4,)
    assert trial.self_interference >= 0.0


@pytest.mark.unit
def test_half_duplex_ignores_the_interference_limited_switch():
    # Without jamming an eavesdropper always has its noise floor
    params = SystemParams(k_antennas=2, rho_e=0.003, d_bu=10.0)
    noisy = estimate_sop(params, n_trials=20000, seed=4)
    quiet = estimate_sop(params.replace(ed_noise=False), n_trials=20000, seed=4)
    assert noisy.n_outages == quiet.n_outages
    assert quiet.p_hat < 0.5


@pytest.mark.unit
def test_outage_definitions_agree_at_high_snr():
    params = SystemParams(k_antennas=2, rho_e=0.003, d_bu=10.0, pb_over_n0_db=50.0).replace(beta=2.0)
    exact = estimate_sop(params, n_trials=40000, seed=21,
                         outage_def=OutageDefinition.EXACT_CAPACITY)
    ratio = estimate_sop(params, n_trials=40000, seed=21, outage_def=OutageDefinition.SNR_RATIO)
    assert abs(exact.p_hat - ratio.p_hat) <= 0.01


@pytest.mark.unit
def test_interval_shrinks_like_root_n():
    params = SystemParams(k_antennas=1, rho_e=0.004, d_bu=10.0)
    small = estimate_sop(params, n_trials=20000, seed=6)
    large = estimate_sop(params, n_trials=40000, seed=6)
    assert 0.05 < small.p_hat < 0.95
    assert small.half_width / large.half_width == pytest.approx(math.sqrt(2.0), rel=0.1)


@pytest.mark.unit
@pytest.mark.parametrize("duplex", [Duplex.HALF, Duplex.FULL])
def test_colluding_never_below_independent_for_a_seed(duplex):
    params = SystemParams(k_antennas=2, rho_e=0.004, d_bu=8.0, duplex=duplex, ed_noise=False)
    independent = estimate_sop(params, scenario=Scenario(duplex, EdModel.INDEPENDENT),
                               n_trials=20000, seed=13)
    colluding = estimate_sop(params, scenario=Scenario(duplex, EdModel.COLLUDING),
                             n_trials=20000, seed=13)
    assert colluding.n_outages >= independent.n_outages


@pytest.mark.unit
def test_half_duplex_simulation_ignores_transmit_powers():
    params = SystemParams(k_antennas=2, rho_e=0.003, d_bu=10.0)
    reference = estimate_sop(params, n_trials=20000, seed=9, outage_def=OutageDefinition.SNR_RATIO)
    for pb_db, pu_db in ((30.0, 50.0), (50.0, 20.0), (70.0, 70.0)):
        moved = estimate_sop(params.replace(pb_over_n0_db=pb_db, pu_over_n0_db=pu_db),
                             n_trials=20000, seed=9, outage_def=OutageDefinition.SNR_RATIO)
        assert moved.n_outages == reference.n_outages
