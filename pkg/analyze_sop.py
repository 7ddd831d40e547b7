#!/usr/bin/env python3
"""
Secrecy Outage Analysis - Main Script

Evaluate, simulate and sweep the secrecy outage probability of a
multi-antenna base station that selects its best antenna toward one
half-duplex or full-duplex user, with eavesdroppers scattered as a
Poisson point process.

Usage:
    python analyze_sop.py <command> [options]

Examples:
    # Analytic SOP for an HD user and independent eavesdroppers
    python analyze_sop.py analytic --duplex hd --ed independent --k 3 --alpha 4 \\
        --d-bu 10 --radius 100 --rho-e 0.001 --beta 1

    # Monte Carlo estimate with a fixed seed
    python analyze_sop.py simulate --duplex fd --ed colluding --trials 100000 --seed 42

    # Reproduce a figure recipe as CSV plus a plotting script
    python analyze_sop.py sweep --recipe fig2 --out fig2.csv --plot fig2_plot.py
"""

import argparse
import json
import logging
import re
import sys
import time
from typing import Any, Dict, List, Optional, TextIO

from secrecy_outage.analytic import available_families, evaluate
from secrecy_outage.errors import (DomainError, NoSignChange, ParameterError,
                                   SecrecyOutageError)
from secrecy_outage.harness import (Recipe, SweepMethod, SweepSpec, compare_analytic_mc,
                                    emit_csv, emit_plot_script, list_recipes,
                                    load_recipe, override_recipe, run_recipe,
                                    run_recipe_crossover, run_sweep)
from secrecy_outage.oracles import SUITES, run_suites
from secrecy_outage.params import (FIELD_DOCS, NUMERIC_FIELDS, Scenario, SystemParams,
                                   load_params, validate)
from secrecy_outage.simcore import OutageDefinition, estimate_sop

logger = logging.getLogger('analyze_sop')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# SystemParams field -> command-line flag
PARAM_FLAGS: Dict[str, str] = {
    'k_antennas': '--k',
    'rho_e': '--rho-e',
    'radius': '--radius',
    'd_bu': '--d-bu',
    'alpha': '--alpha',
    'beta': '--beta',
    'epsilon': '--epsilon',
    'pb_over_n0_db': '--pb-db',
    'pu_over_n0_db': '--pu-db',
    'lambda_uu_db': '--lambda-uu-db',
    'duplex': '--duplex',
    'ed_model': '--ed',
    'ed_noise': '--ed-noise',
}

FIX_HINTS = {
    'NonPositive': 'pass a value above zero (>= 0 for densities)',
    'NotInteger': 'pass a whole number',
    'NonFinite': 'pass a finite number',
    'NotANumber': 'pass a number',
    'OutOfRange': 'pass a value inside the allowed range (beta >= 1)',
    'InconsistentBetaEpsilon': 'pass only one of --beta / --epsilon',
    'Geometry': 'choose --d-bu smaller than --radius',
    'UnknownKey': 'remove the key from the config file',
    'AlphaRationalMismatch': 'use an alpha with a small fraction form, e.g. 2.5',
    'Invalid': 'use one of the values listed in --help',
}


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _field_help(name: str) -> str:
    unit, text = FIELD_DOCS[name]
    return f"{text} [{unit}]"


def _add_param_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('system parameters (override --config)')
    group.add_argument('--config', type=str, default=None,
                       help='JSON file whose keys are parameter names')
    group.add_argument('--k', dest='k_antennas', type=int, help=_field_help('k_antennas'))
    group.add_argument('--rho-e', dest='rho_e', type=float, help=_field_help('rho_e'))
    group.add_argument('--radius', dest='radius', type=float, help=_field_help('radius'))
    group.add_argument('--d-bu', dest='d_bu', type=float, help=_field_help('d_bu'))
    group.add_argument('--alpha', dest='alpha', type=float, help=_field_help('alpha'))
    group.add_argument('--beta', dest='beta', type=float, help=_field_help('beta'))
    group.add_argument('--epsilon', dest='epsilon', type=float, help=_field_help('epsilon'))
    group.add_argument('--pb-db', dest='pb_over_n0_db', type=float, help=_field_help('pb_over_n0_db'))
    group.add_argument('--pu-db', dest='pu_over_n0_db', type=float, help=_field_help('pu_over_n0_db'))
    group.add_argument('--lambda-uu-db', dest='lambda_uu_db', type=float,
                       help=_field_help('lambda_uu_db'))
    group.add_argument('--duplex', dest='duplex', choices=['hd', 'fd'], help=_field_help('duplex'))
    group.add_argument('--ed', dest='ed_model', choices=['independent', 'colluding'],
                       help=_field_help('ed_model'))
    group.add_argument('--ed-noise', dest='ed_noise', action=argparse.BooleanOptionalAction,
                       default=None, help=_field_help('ed_noise'))


def _add_run_flags(parser: argparse.ArgumentParser, trials: Optional[int] = 100000):
    # trials=None marks the sweep parser, where unset flags fall back to the recipe
    from_recipe = trials is None
    default_text = trials if not from_recipe else 'the recipe value, else 100000'
    parser.add_argument('--trials', type=int, default=trials,
                        help=f'Monte Carlo trials per point (default: {default_text})')
    parser.add_argument('--seed', type=int, default=None if from_recipe else 0,
                        help='64-bit seed every random stream derives from (default: '
                             + ('the recipe value, else 0)' if from_recipe else '0)'))
    parser.add_argument('--outage-def', type=str, default=None if from_recipe else 'ExactCapacity',
                        choices=['ExactCapacity', 'SnrRatio'],
                        help='outage test of simulated trials (default: '
                             + ('the recipe value, else ExactCapacity)' if from_recipe
                                else 'ExactCapacity)'))
    parser.add_argument('--threads', type=int, default=None,
                        help='worker threads (default: available CPUs); results do not depend on it')
    parser.add_argument('--progress', action='store_true', help='show progress bars')


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description='Secrecy outage probability of TAS downlinks with HD/FD users '
                    'and Poisson eavesdroppers',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s analytic --duplex hd --ed colluding --k 3 --alpha 4 --d-bu 10 --radius 100
  %(prog)s simulate --config params.json --trials 200000 --seed 7
  %(prog)s sweep --recipe fig4 --out fig4.csv --plot fig4_plot.py
  %(prog)s sweep --axis rho_e --values 0.001 0.002 0.005 --methods Analytic MonteCarlo
  %(prog)s compare --duplex fd --ed independent --axis pu_over_n0_db --values 40 50 60
  %(prog)s validate
  %(prog)s recipes
        """
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('analytic', help='evaluate the closed-form SOP',
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_param_flags(p)
    p.add_argument('--family', default='analytic', choices=['analytic', 'bound', 'approximation'],
                   help='evaluator family (default: analytic)')
    p.add_argument('--varrho', type=float, default=1.0,
                   help='split radius of the FD colluding approximation [m] (default: 1.0)')
    p.add_argument('--format', default='text', choices=['text', 'csv', 'json'],
                   help='csv prints one row: duplex,ed_model,value,raw_value,kind,method')

    p = sub.add_parser('simulate', help='estimate the SOP by Monte Carlo')
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument('--format', default='text', choices=['text', 'csv', 'json'],
                   help='csv prints one row: duplex,ed_model,p_hat,ci_low,ci_high,n_trials,seed')

    p = sub.add_parser('sweep', help='sweep one parameter and write CSV')
    _add_param_flags(p)
    _add_run_flags(p, trials=None)
    source = p.add_mutually_exclusive_group()
    source.add_argument('--recipe', type=str, help='built-in recipe name or recipe JSON path')
    source.add_argument('--axis', type=str, choices=NUMERIC_FIELDS, help='parameter to sweep')
    p.add_argument('--values', type=float, nargs='+', help='axis values (with --axis)')
    p.add_argument('--scenarios', nargs='+', default=None,
                   help='scenarios such as hd-independent fd-colluding '
                        '(default: the recipe value, else all four)')
    p.add_argument('--methods', nargs='+', default=None,
                   help='any of Analytic Bound Approximation MonteCarlo '
                        '(default: the recipe value, else Analytic)')
    p.add_argument('--varrho', type=float, default=None,
                   help='split radius for Approximation [m] (default: the recipe value, else 1.0)')
    p.add_argument('--out', type=str, default='-', help="CSV path, '-' for stdout (default)")
    p.add_argument('--plot', type=str, default=None, help='also write a matplotlib script here')
    p.add_argument('--layout', default='single', choices=['single', 'grid'],
                   help='plot layout (default: single)')
    p.add_argument('--crossover', action='store_true',
                   help="also run the recipe's crossover search")

    p = sub.add_parser('compare', help='analytic values against Monte Carlo, point by point')
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument('--axis', type=str, choices=NUMERIC_FIELDS, default=None,
                   help='parameter to vary (default: compare the single point)')
    p.add_argument('--values', type=float, nargs='+', default=None, help='axis values')
    p.add_argument('--family', default='analytic', choices=['analytic', 'bound', 'approximation'],
                   help='evaluator family (default: analytic)')
    p.add_argument('--varrho', type=float, default=1.0, help='split radius for approximation [m]')
    p.add_argument('--slack', type=float, default=0.02,
                   help='absolute tolerance added to the confidence interval (default: 0.02)')

    p = sub.add_parser('validate', help='run the built-in oracle suites')
    p.add_argument('--suite', action='append', choices=list(SUITES),
                   help='suite to run, repeatable (default: all)')
    p.add_argument('--seed', type=int, default=0, help='seed for random draws (default: 0)')
    p.add_argument('--samples', type=int, default=100000,
                   help='samples per distribution test (default: 100000)')

    p = sub.add_parser('recipes', help='list built-in figure recipes')
    p.add_argument('--show', type=str, default=None, help='print one recipe in full')

    return parser.parse_args(argv)


def build_params(args: argparse.Namespace) -> SystemParams:
    """SystemParams from --config and the parameter flags that were given."""
    overrides: Dict[str, Any] = {name: getattr(args, name) for name in PARAM_FLAGS
                                 if getattr(args, name, None) is not None}
    if args.config:
        return load_params(args.config, overrides)
    return SystemParams.from_dict(overrides)


def print_banner(title: str, out: TextIO = sys.stdout):
    print("\n" + "="*80, file=out)
    print(title, file=out)
    print("="*80 + "\n", file=out)


def cmd_analytic(args: argparse.Namespace) -> int:
    params = validate(build_params(args))
    result = evaluate(params, args.family, varrho=args.varrho)
    scenario = params.scenario
    if args.format == 'csv':
        print(','.join([scenario.duplex.value, scenario.ed_model.value, repr(result.value),
                        repr(result.raw_value), result.kind.value, result.method.value]))
    elif args.format == 'json':
        print(json.dumps({'params': params.to_dict(), 'result': result.to_dict()}, indent=2))
    else:
        print(f"{scenario.label}: SOP = {result.value:.6g} "
              f"({result.kind.value}, {result.method.value})"
              + (f" [clamped from {result.raw_value:.6g}]" if result.clamped else ''))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    params = validate(build_params(args))
    start = time.time()
    estimate = estimate_sop(params, n_trials=args.trials, seed=args.seed,
                            outage_def=OutageDefinition.parse(args.outage_def),
                            threads=args.threads, show_progress=args.progress)
    logger.info("Simulation took %.2f s", time.time() - start)
    scenario = params.scenario
    if args.format == 'csv':
        print(','.join([scenario.duplex.value, scenario.ed_model.value, repr(estimate.p_hat),
                        repr(estimate.ci_low), repr(estimate.ci_high),
                        str(estimate.n_trials), str(estimate.seed)]))
    elif args.format == 'json':
        print(json.dumps({'params': params.to_dict(), 'estimate': estimate.to_dict()}, indent=2))
    else:
        print_banner(f"Monte Carlo SOP - {scenario.label}")
        print(f"  SOP estimate:  {estimate.p_hat:.6f}")
        print(f"  95% Wilson CI: [{estimate.ci_low:.6f}, {estimate.ci_high:.6f}]")
        print(f"  Outages:       {estimate.n_outages} / {estimate.n_trials}")
        print(f"  Seed:          {estimate.seed}")
        print(f"  Outage test:   {estimate.outage_def.value}")
    return EXIT_OK


def _sweep_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """The sweep settings given on the command line, parsed; unset ones are left out."""
    settings: Dict[str, Any] = {}
    if args.scenarios:
        settings['scenarios'] = tuple(Scenario.parse(s) for s in args.scenarios)
    if args.methods:
        try:
            settings['methods'] = tuple(SweepMethod.parse(m) for m in args.methods)
        except ValueError as e:
            raise UsageError(f"--methods: {e}; use Analytic, Bound, Approximation or MonteCarlo")
    if args.trials is not None:
        settings['n_trials'] = args.trials
    if args.seed is not None:
        settings['seed'] = args.seed
    if args.outage_def is not None:
        settings['outage_def'] = OutageDefinition.parse(args.outage_def)
    if args.varrho is not None:
        settings['varrho'] = args.varrho
    return settings


def _inline_spec(args: argparse.Namespace) -> SweepSpec:
    if not args.values:
        raise UsageError("--values: give at least one axis value, e.g. --values 0.001 0.002")
    settings = _sweep_settings(args)
    settings.setdefault('scenarios', Scenario.all())
    return SweepSpec(base=build_params(args), axis=args.axis, values=tuple(sorted(args.values)),
                     **settings)


def _recipe_from_args(args: argparse.Namespace) -> Recipe:
    """The named recipe with the parameter flags and sweep settings given applied on top."""
    if args.config:
        raise UsageError("--config: not used with --recipe; pass single parameter flags instead")
    recipe = load_recipe(args.recipe)
    base_changes = {name: getattr(args, name) for name in PARAM_FLAGS
                    if getattr(args, name, None) is not None}
    try:
        return override_recipe(recipe, base_changes, **_sweep_settings(args))
    except ValueError as e:
        raise UsageError(f"--recipe {recipe.name}: {e}")


def cmd_sweep(args: argparse.Namespace) -> int:
    to_stdout = args.out == '-'
    report = sys.stderr if to_stdout else sys.stdout
    start = time.time()

    if args.recipe:
        recipe = _recipe_from_args(args)
        print_banner(f"Recipe {recipe.name}: {recipe.description}", report)
        if recipe.spec != load_recipe(args.recipe).spec:
            print("Overridden from the command line; the recipe's trend expectations "
                  "may no longer apply\n", file=report)
        result, trend_reports = run_recipe(recipe, threads=args.threads,
                                           show_progress=args.progress)
    elif args.axis:
        recipe = None
        spec = _inline_spec(args)
        print_banner(f"Sweep over {spec.axis}", report)
        result = run_sweep(spec, threads=args.threads, show_progress=args.progress)
        trend_reports = []
    else:
        raise UsageError("sweep: give --recipe NAME or --axis FIELD --values ...")

    emit_csv(result, sys.stdout if to_stdout else args.out)
    if not to_stdout:
        print(f"CSV written to: {args.out} ({len(result.rows)} rows)", file=report)
    if args.plot:
        csv_path = 'sweep.csv' if to_stdout else args.out
        emit_plot_script(result, csv_path, args.plot, layout=args.layout)
        print(f"Plot script written to: {args.plot}", file=report)

    status = EXIT_OK
    for failure in result.failures:
        print(f"Point failed: {result.axis_name}={failure.axis_value:g} "
              f"{failure.scenario.label} {failure.method.value}: {failure.error}", file=report)
        status = EXIT_FAILURE
    for trend in trend_reports:
        print(trend.summary(), file=report)
        if not trend.passed:
            status = EXIT_FAILURE

    if args.crossover:
        if recipe is None or recipe.crossover is None:
            raise UsageError("--crossover: only recipes with a crossover setup (fig5a, fig5b) support it")
        try:
            found = run_recipe_crossover(recipe, threads=args.threads)
            print(f"Crossover at {result.axis_name} = {found.value:.3f} "
                  f"(bracket [{found.lo:.3f}, {found.hi:.3f}], {len(found.probes)} probes"
                  + (", stopped on overlapping intervals" if found.resolved_by_ci else '') + ")",
                  file=report)
            if recipe.crossover.reference:
                lo, hi = recipe.crossover.reference
                print(f"Reference bracket: [{lo:g}, {hi:g}]", file=report)
        except NoSignChange as e:
            print(f"No crossover: {e}", file=report)
            status = EXIT_FAILURE

    print(f"\nTotal processing time: {time.time() - start:.2f} seconds", file=report)
    return status


def cmd_compare(args: argparse.Namespace) -> int:
    base = build_params(args)
    scenario = validate(base).scenario
    if args.axis:
        if not args.values:
            raise UsageError("--values: give the axis values to compare at")
        axis, values = args.axis, tuple(sorted(args.values))
    else:
        axis, values = 'rho_e', (base.rho_e,)
    family = SweepMethod.parse(args.family)
    if args.family not in available_families(base):
        raise UsageError(f"--family: no {args.family} evaluator for {scenario.label}; "
                         f"choose one of {', '.join(available_families(base))}")
    spec = SweepSpec(base=base, axis=axis, values=values, scenarios=(scenario,),
                     methods=(family, SweepMethod.MONTE_CARLO), n_trials=args.trials,
                     seed=args.seed, outage_def=OutageDefinition.parse(args.outage_def),
                     varrho=args.varrho)
    result = run_sweep(spec, threads=args.threads, show_progress=args.progress)
    comparisons = compare_analytic_mc(result, slack=args.slack)

    print_banner(f"Analytic vs Monte Carlo - {scenario.label}")
    print(f"{axis:>16} {'analytic':>10} {'kind':>14} {'monte carlo':>12} {'95% CI':>22}  result")
    for c in comparisons:
        ci = f"[{c.simulated.ci_low:.4f}, {c.simulated.ci_high:.4f}]"
        print(f"{c.axis_value:>16.6g} {c.analytic.value:>10.4f} {c.analytic.kind:>14} "
              f"{c.simulated.value:>12.4f} {ci:>22}  {'PASS' if c.passed else 'FAIL'}")
    for failure in result.failures:
        print(f"Point failed: {axis}={failure.axis_value:g} {failure.method.value}: {failure.error}")

    if result.failures or not comparisons or not all(c.passed for c in comparisons):
        return EXIT_FAILURE
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    print_banner("Secrecy Outage Toolkit - Self Check")
    reports = run_suites(args.suite, seed=args.seed, n_samples=args.samples)
    for suite in reports:
        print(f"[{'PASS' if suite.passed else 'FAIL'}] {suite.name}")
        for check in suite.checks:
            mark = 'ok  ' if check.passed else 'FAIL'
            print(f"    {mark} {check.name}" + (f"  ({check.detail})" if check.detail else ''))
    failed = [s.name for s in reports if not s.passed]
    print(f"\n{len(reports) - len(failed)}/{len(reports)} suites passed")
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_recipes(args: argparse.Namespace) -> int:
    if args.show:
        recipe = load_recipe(args.show)
        spec = recipe.spec
        print_banner(f"Recipe {recipe.name}")
        print(f"Description: {recipe.description}")
        print(f"Provenance:  {recipe.provenance}")
        print(f"Axis:        {spec.axis} = {', '.join(f'{v:g}' for v in spec.values)}")
        print(f"Scenarios:   {', '.join(s.label for s in spec.scenarios)}")
        print(f"Methods:     {', '.join(m.value for m in spec.methods)}")
        print(f"Trials:      {spec.n_trials} (seed {spec.seed})")
        print("Base parameters:")
        print(json.dumps(spec.base.to_dict(), indent=2))
        for t in recipe.trends:
            print(f"Expect {t.expected.value:<10} {t.scenario.label}/{t.method.value}")
        return EXIT_OK

    print_banner("Built-in recipes")
    for recipe in list_recipes():
        print(f"{recipe.name:<18} {recipe.description}")
        print(f"{'':<18} provenance: {recipe.provenance}")
    return EXIT_OK


COMMANDS = {
    'analytic': cmd_analytic,
    'simulate': cmd_simulate,
    'sweep': cmd_sweep,
    'compare': cmd_compare,
    'validate': cmd_validate,
    'recipes': cmd_recipes,
}


def _report_parameter_error(error: ParameterError):
    for violation in error.violations:
        code = re.match(r'[A-Za-z]+', violation)
        field_name = re.search(r'\{(\w+)\}', violation)
        flag = PARAM_FLAGS.get(field_name.group(1), field_name.group(1)) if field_name else 'parameters'
        hint = FIX_HINTS.get(code.group(0) if code else '', 'check the value')
        print(f"Error: {flag}: {violation}", file=sys.stderr)
        print(f"  Fix: {hint}", file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code."""
    args = parse_arguments(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except ParameterError as e:
        _report_parameter_error(e)
        return EXIT_USAGE
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SecrecyOutageError as e:
        print(f"\nError: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    """Main function."""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        sys.exit(EXIT_FAILURE)
    except Exception as e:
        print(f"\nError: {str(e)}", file=sys.stderr)
        import traceback
        traceback.print_exc()
        sys.exit(EXIT_FAILURE)


if __name__ == '__main__':
    main()
