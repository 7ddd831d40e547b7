#!/usr/bin/env python3
"""
Examples of using the secrecy_outage library.

Each example is a small, self-contained walkthrough. Run the file with an
example number (``python example_usage.py 2``) or without arguments to run
them all.
"""

import json
import os
import sys
import tempfile

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from secrecy_outage import (Scenario, SweepMethod, SweepSpec, SystemParams, Trend,
                            crossover_search, emit_csv, estimate_sop, evaluate,
                            load_recipe, run_sweep, sop_fd_colluding_approx_alpha2,
                            sop_fd_colluding_bound, sop_hd_independent,
                            sop_hd_independent_lower_bound, trend_check)
from secrecy_outage.errors import NoSignChange


def example_1_analytic_vs_simulation():
    """
    Example 1: One HD operating point, formula against simulation.
    """
    print("\n" + "="*80)
    print("Example 1: Analytic vs Monte Carlo")
    print("="*80 + "\n")

    params = SystemParams(k_antennas=3, rho_e=0.001, radius=100.0, d_bu=10.0, alpha=4.0)
    for scenario in (Scenario.parse('hd-independent'), Scenario.parse('hd-colluding')):
        p = params.with_scenario(scenario)
        analytic = evaluate(p)
        estimate = estimate_sop(p, n_trials=50000, seed=7)
        print(f"{scenario.label:>16}: analytic {analytic.value:.4f} ({analytic.kind.value}), "
              f"simulated {estimate.p_hat:.4f} [{estimate.ci_low:.4f}, {estimate.ci_high:.4f}]")


def example_2_full_duplex_bounds():
    """
    Example 2: FD colluding upper bound and its alpha = 2 approximation.
    """
    print("\n" + "="*80)
    print("Example 2: Full-Duplex Bound and Approximation")
    print("="*80 + "\n")

    params = SystemParams(rho_e=0.003, radius=50.0, d_bu=5.0, alpha=2.0,
                          duplex='fd', ed_model='colluding', ed_noise=False)
    bound = sop_fd_colluding_bound(params)
    approx = sop_fd_colluding_approx_alpha2(params, varrho=1.0)
    estimate = estimate_sop(params, n_trials=50000, seed=3)
    print(f"Upper bound:    {bound.value:.4f}")
    print(f"Approximation:  {approx.value:.4f}")
    print(f"Simulation:     {estimate.p_hat:.4f} +/- {estimate.half_width:.4f}")


def example_3_many_antennas():
    """
    Example 3: Slow decay of the HD SOP in the number of antennas.
    """
    print("\n" + "="*80)
    print("Example 3: Large K")
    print("="*80 + "\n")

    base = SystemParams(rho_e=0.005, radius=50.0, d_bu=5.0, alpha=2.0)
    for k in (2, 8, 64, 512):
        p = base.replace(k_antennas=k)
        sop = sop_hd_independent(p)
        bound = sop_hd_independent_lower_bound(p, rigorous=True)
        print(f"K={k:>4}: SOP {sop.value:.4f} via {sop.method.value}, "
              f"lower bound {bound.value:.4f}")


def example_4_sweep_and_trend():
    """
    Example 4: Sweep the jamming power and check the trend.
    """
    print("\n" + "="*80)
    print("Example 4: Sweep and Trend Check")
    print("="*80 + "\n")

    spec = SweepSpec(
        base=SystemParams(rho_e=0.005, radius=50.0, d_bu=5.0, ed_noise=False),
        axis='pu_over_n0_db',
        values=(30.0, 40.0, 50.0, 60.0),
        scenarios=(Scenario.parse('fd-independent'), Scenario.parse('fd-colluding')),
        methods=(SweepMethod.ANALYTIC,),
    )
    result = run_sweep(spec)
    for row in result.rows:
        print(f"P_U={row.axis_value:>5.1f} dB  {row.scenario.label:>16}: {row.value:.4f}")
    print()
    print(trend_check(result, Trend.DECREASING).summary())

    out = os.path.join(tempfile.gettempdir(), 'sop_pu_sweep.csv')
    emit_csv(result, out)
    print(f"\nCSV written to {out}")


def example_5_crossover():
    """
    Example 5: Where an FD user stops beating an HD user.
    """
    print("\n" + "="*80)
    print("Example 5: HD/FD Crossover in Self-Interference")
    print("="*80 + "\n")

    recipe = load_recipe('fig5a')
    pair = (Scenario.parse('hd-independent'), Scenario.parse('fd-independent'))
    try:
        found = crossover_search(recipe.spec.base, 'lambda_uu_db', 0.0, 40.0, pair,
                                 mode='montecarlo', n_trials=50000, tolerance=1.0, seed=5)
        print(f"Curves cross near lambda_UU = {found.value:.1f} dB "
              f"after {len(found.probes)} probes")
    except NoSignChange as e:
        print(f"No crossover: {e}")


def example_6_export_to_json():
    """
    Example 6: Store a parameter set and a result as JSON.
    """
    print("\n" + "="*80)
    print("Example 6: Export to JSON")
    print("="*80 + "\n")

    params = SystemParams(k_antennas=5, rho_e=0.002, duplex='fd', ed_model='independent')
    output = {
        'params': params.to_dict(),
        'analytic': evaluate(params).to_dict(),
        'monte_carlo': estimate_sop(params, n_trials=20000, seed=1).to_dict(),
    }
    print(json.dumps(output, indent=2))


EXAMPLES = [
    ("Analytic vs Monte Carlo", example_1_analytic_vs_simulation),
    ("Full-Duplex Bound and Approximation", example_2_full_duplex_bounds),
    ("Large K", example_3_many_antennas),
    ("Sweep and Trend Check", example_4_sweep_and_trend),
    ("HD/FD Crossover", example_5_crossover),
    ("Export to JSON", example_6_export_to_json),
]


def main():
    print("\n" + "="*80)
    print("Secrecy Outage Toolkit - Usage Examples")
    print("="*80)
    print("\nAvailable examples:")
    for idx, (name, _) in enumerate(EXAMPLES, 1):
        print(f"  {idx}. {name}")

    selected = [int(a) for a in sys.argv[1:]] or range(1, len(EXAMPLES) + 1)
    for idx in selected:
        EXAMPLES[idx - 1][1]()


if __name__ == '__main__':
    main()
