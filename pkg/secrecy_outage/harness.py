"""
Parameter sweeps, trend checks, crossover search and sweep output.

A sweep evaluates every (axis value, scenario, method) combination the
evaluators support, concurrently, and returns rows sorted by axis value,
scenario and method so the output does not depend on scheduling.
"""

import csv
import glob
import json
import logging
import os
import struct
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from tqdm import tqdm

from .analytic import DEFAULT_VARRHO, available_families, evaluate
from .errors import InsufficientPoints, NoSignChange, SecrecyOutageError
from .params import NUMERIC_FIELDS, Duplex, EdModel, Scenario, SystemParams, validate
from .simcore import OutageDefinition, estimate_sop

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['axis_name', 'axis_value', 'duplex', 'ed_model', 'method', 'kind',
               'value', 'raw_value', 'ci_low', 'ci_high', 'n_trials', 'seed']
MC_KIND = 'Estimate'
ANALYTIC_TREND_TOL = 1e-9
ANALYTIC_FLAT_TOL = 1e-12
RECIPE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'recipes')
MASK64 = (1 << 64) - 1


class SweepMethod(str, Enum):
    """How a sweep point is evaluated."""
    ANALYTIC = 'Analytic'
    BOUND = 'Bound'
    APPROXIMATION = 'Approximation'
    MONTE_CARLO = 'MonteCarlo'

    @classmethod
    def parse(cls, value) -> 'SweepMethod':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('-', '').replace('_', '')
        for member in cls:
            if member.value.lower() == key:
                return member
        if key in ('mc', 'sim', 'simulation'):
            return cls.MONTE_CARLO
        raise ValueError(f"Unknown sweep method: {value!r}")

    @property
    def family(self) -> Optional[str]:
        """Family name understood by :func:`analytic.evaluate`."""
        return None if self is SweepMethod.MONTE_CARLO else self.value.lower()


class Trend(str, Enum):
    INCREASING = 'Increasing'
    DECREASING = 'Decreasing'
    FLAT = 'Flat'

    @classmethod
    def parse(cls, value) -> 'Trend':
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).strip().lower():
                return member
        raise ValueError(f"Unknown trend: {value!r}")


METHOD_ORDER = {m: i for i, m in enumerate(SweepMethod)}


@dataclass(frozen=True)
class SweepSpec:
    """
    One sweep: a base parameter set, an axis and what to evaluate on it.

    Attributes:
        base: Parameters shared by every point
        axis: Name of the numeric field being swept
        values: Axis values, ascending
        scenarios: Scenarios evaluated at every value
        methods: Evaluation methods
        n_trials: Monte Carlo trials per point
        seed: Master seed; per-point seeds are derived from it
        outage_def: Outage test of Monte Carlo points
        varrho: Split radius for the FD colluding approximation
    """
    base: SystemParams
    axis: str
    values: Tuple[float, ...]
    scenarios: Tuple[Scenario, ...]
    methods: Tuple[SweepMethod, ...] = (SweepMethod.ANALYTIC,)
    n_trials: int = 100000
    seed: int = 0
    outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY
    varrho: float = DEFAULT_VARRHO

    def validate(self) -> 'SweepSpec':
        problems = []
        if self.axis not in NUMERIC_FIELDS:
            problems.append(f"axis {self.axis!r} is not one of {', '.join(NUMERIC_FIELDS)}")
        if not self.values:
            problems.append("values must not be empty")
        elif any(b < a for a, b in zip(self.values, self.values[1:])):
            problems.append("values must be sorted ascending")
        if not self.scenarios:
            problems.append("at least one scenario is required")
        if not self.methods:
            problems.append("at least one method is required")
        if self.n_trials < 1:
            problems.append(f"n_trials must be >= 1, got {self.n_trials}")
        if problems:
            raise ValueError("Invalid sweep: " + "; ".join(problems))
        return self

    def point_params(self, value: float, scenario: Scenario) -> SystemParams:
        return self.base.replace(**{self.axis: value}).with_scenario(scenario)


@dataclass(frozen=True)
class SweepRow:
    """One evaluated point; ci/n_trials/seed are None for analytic rows."""
    axis_name: str
    axis_value: float
    duplex: Duplex
    ed_model: EdModel
    method: SweepMethod
    kind: str
    value: float
    raw_value: float
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    n_trials: Optional[int] = None
    seed: Optional[int] = None

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.duplex, self.ed_model)

    @property
    def half_width(self) -> float:
        if self.ci_low is None or self.ci_high is None:
            return 0.0
        return 0.5 * (self.ci_high - self.ci_low)

    def sort_key(self):
        return (self.axis_value, self.scenario.code, METHOD_ORDER[self.method])


@dataclass(frozen=True)
class PointFailure:
    axis_value: float
    scenario: Scenario
    method: SweepMethod
    error: str


@dataclass(frozen=True)
class SweepResult:
    axis_name: str
    rows: Tuple[SweepRow, ...]
    failures: Tuple[PointFailure, ...] = ()

    def columns(self) -> Dict[Tuple[Scenario, SweepMethod], List[SweepRow]]:
        """Rows grouped by (scenario, method), each sorted by axis value."""
        grouped: Dict[Tuple[Scenario, SweepMethod], List[SweepRow]] = {}
        for row in self.rows:
            grouped.setdefault((row.scenario, row.method), []).append(row)
        for rows in grouped.values():
            rows.sort(key=lambda r: r.axis_value)
        return dict(sorted(grouped.items(), key=lambda kv: (kv[0][0].code, METHOD_ORDER[kv[0][1]])))

    def column(self, scenario: Scenario, method: SweepMethod) -> List[SweepRow]:
        return self.columns().get((scenario, SweepMethod.parse(method)), [])

    def select(self, scenario: Optional[Scenario] = None,
               method: Optional[SweepMethod] = None) -> 'SweepResult':
        rows = tuple(r for r in self.rows
                     if (scenario is None or r.scenario == scenario)
                     and (method is None or r.method == SweepMethod.parse(method)))
        return SweepResult(self.axis_name, rows)


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixing function."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, axis_value: float, scenario: Optional[Scenario] = None) -> int:
    """
    Per-point seed from the master seed, the axis value and the scenario.

    Depends only on the point itself, so adding axis values leaves the
    other points' streams untouched.
    """
    bits = struct.unpack('<Q', struct.pack('<d', float(axis_value)))[0]
    mixed = splitmix64((seed & MASK64) ^ splitmix64(bits))
    if scenario is not None:
        mixed = splitmix64(mixed ^ (scenario.code + 1))
    return mixed


def _evaluate_point(spec: SweepSpec, value: float, scenario: Scenario,
                    method: SweepMethod, mc_threads: Optional[int]) -> SweepRow:
    params = validate(spec.point_params(value, scenario))
    duplex, ed_model = scenario.duplex, scenario.ed_model
    if method is SweepMethod.MONTE_CARLO:
        point_seed = derive_seed(spec.seed, value, scenario)
        est = estimate_sop(params, n_trials=spec.n_trials, seed=point_seed,
                           outage_def=spec.outage_def, threads=mc_threads)
        return SweepRow(spec.axis, float(value), duplex, ed_model, method, MC_KIND,
                        est.p_hat, est.p_hat, est.ci_low, est.ci_high, est.n_trials, point_seed)
    result = evaluate(params, method.family, varrho=spec.varrho)
    return SweepRow(spec.axis, float(value), duplex, ed_model, method, result.kind.value,
                    result.value, result.raw_value)


def run_sweep(spec: SweepSpec, threads: Optional[int] = None,
              show_progress: bool = False) -> SweepResult:
    """
    Evaluate a sweep.

    Combinations a scenario has no evaluator for (e.g. a bound for HD
    colluding) are skipped. Errors at single points are collected in
    ``failures`` instead of aborting the sweep.

    Args:
        spec: Sweep description
        threads: Worker threads over points (default: available CPUs)
        show_progress: Show a tqdm progress bar

    Returns:
        SweepResult with rows sorted by (axis value, scenario, method)
    """
    spec.validate()
    tasks = []
    for value in spec.values:
        for scenario in spec.scenarios:
            for method in spec.methods:
                if method is not SweepMethod.MONTE_CARLO:
                    try:
                        families = available_families(spec.point_params(value, scenario))
                    except SecrecyOutageError:
                        families = [method.family]
                    if method.family not in families:
                        logger.debug("Skipping %s for %s", method.value, scenario.label)
                        continue
                tasks.append((value, scenario, method))

    workers = max(1, threads or os.cpu_count() or 1)
    # Points already run in parallel; each simulation stays single-threaded
    mc_threads = 1 if workers > 1 else None
    rows: List[SweepRow] = []
    failures: List[PointFailure] = []
    progress = tqdm(total=len(tasks), desc=f"sweep {spec.axis}", unit='pt') if show_progress else None

    def record(task, future_or_row):
        value, scenario, method = task
        try:
            rows.append(future_or_row() if callable(future_or_row) else future_or_row)
        except Exception as e:
            logger.warning("Sweep point %s=%s %s %s failed: %s",
                           spec.axis, value, scenario.label, method.value, e)
            failures.append(PointFailure(float(value), scenario, method, f"{type(e).__name__}: {e}"))
        if progress is not None:
            progress.update(1)

    if workers == 1:
        for task in tasks:
            record(task, lambda t=task: _evaluate_point(spec, *t, mc_threads))
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(_evaluate_point, spec, *task, mc_threads): task
                       for task in tasks}
            for future in as_completed(futures):
                record(futures[future], future.result)
    if progress is not None:
        progress.close()

    rows.sort(key=SweepRow.sort_key)
    failures.sort(key=lambda f: (f.axis_value, f.scenario.code, METHOD_ORDER[f.method]))
    return SweepResult(spec.axis, tuple(rows), tuple(failures))


@dataclass
class TrendReport:
    """Outcome of a trend check over every column of a sweep."""
    expected: Trend
    passed: bool
    checked: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    def summary(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        lines = [f"{status} {self.expected.value}: " + ', '.join(self.checked)]
        lines.extend(f"  - {v}" for v in self.violations)
        return '\n'.join(lines)


def _check_column(rows: List[SweepRow], expected: Trend, label: str) -> List[str]:
    values = [r.value for r in rows]
    monte_carlo = rows[0].method is SweepMethod.MONTE_CARLO
    sign = 1.0 if expected is Trend.INCREASING else -1.0
    problems = []

    if expected is Trend.FLAT:
        spread = max(values) - min(values)
        limit = 2.0 * max(r.half_width for r in rows) if monte_carlo else ANALYTIC_FLAT_TOL
        if spread > limit:
            problems.append(f"{label}: spread {spread:.3g} exceeds {limit:.3g}")
        return problems

    for a, b in zip(rows, rows[1:]):
        step = sign * (b.value - a.value)
        slack = (a.half_width + b.half_width) if monte_carlo else ANALYTIC_TREND_TOL
        if step < -slack:
            problems.append(f"{label}: {a.axis_value:g} -> {b.axis_value:g} moves "
                            f"{b.value - a.value:+.3g} against the trend (slack {slack:.3g})")
    net = sign * (rows[-1].value - rows[0].value)
    net_slack = (rows[0].half_width + rows[-1].half_width) if monte_carlo else ANALYTIC_TREND_TOL
    if net <= -net_slack or (not monte_carlo and net <= ANALYTIC_TREND_TOL):
        problems.append(f"{label}: no net {expected.value.lower()} change "
                        f"({rows[0].value:.6g} -> {rows[-1].value:.6g})")
    return problems


def trend_check(result: SweepResult, expected: Union[Trend, str],
                scenario: Optional[Scenario] = None,
                method: Optional[SweepMethod] = None) -> TrendReport:
    """
    Check that every (scenario, method) column follows ``expected``.

    Analytic columns are strict. Monte Carlo columns only fail when a
    step goes against the trend by more than the two confidence
    half-widths combined, and Flat allows a spread of twice the largest
    half-width.

    Raises:
        InsufficientPoints: If a checked column has fewer than 3 points
    """
    expected = Trend.parse(expected)
    report = TrendReport(expected=expected, passed=True)
    columns = result.select(scenario, method).columns()
    if not columns:
        raise InsufficientPoints("no rows to check")
    for (scen, meth), rows in columns.items():
        label = f"{scen.label}/{meth.value}"
        if len(rows) < 3:
            raise InsufficientPoints(f"{label} has {len(rows)} points, need at least 3")
        report.checked.append(label)
        report.violations.extend(_check_column(rows, expected, label))
    report.passed = not report.violations
    return report


@dataclass
class CrossoverResult:
    """Where two SOP curves cross, with every probe made on the way."""
    value: float
    lo: float
    hi: float
    resolved_by_ci: bool = False
    probes: List[Tuple[float, float]] = field(default_factory=list)


def crossover_search(base: SystemParams, axis: str, lo: float, hi: float,
                     scenario_pair: Tuple[Scenario, Scenario],
                     mode: str = 'analytic',
                     tolerance: float = 0.1,
                     n_trials: int = 200000,
                     seed: int = 0,
                     outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY,
                     max_iterations: int = 60,
                     threads: Optional[int] = None) -> CrossoverResult:
    """
    Bisect for the axis value where SOP(first) - SOP(second) changes sign.

    In 'montecarlo' mode both scenarios share the per-probe seed, and a
    probe only counts as signed when the two estimates' confidence
    intervals are separated. Bisection stops early at a probe whose
    intervals overlap, reporting it with ``resolved_by_ci`` set.

    Raises:
        NoSignChange: If the difference does not change sign between lo
            and hi (in Monte Carlo mode, with separated intervals)
    """
    if axis not in NUMERIC_FIELDS:
        raise ValueError(f"axis {axis!r} is not a numeric parameter")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    first, second = scenario_pair
    monte_carlo = mode.lower() in ('montecarlo', 'mc')
    probes: List[Tuple[float, float]] = []

    def difference(x: float) -> Tuple[float, bool]:
        params = base.replace(**{axis: x})
        if monte_carlo:
            probe_seed = derive_seed(seed, x)
            a = estimate_sop(params.with_scenario(first), n_trials=n_trials, seed=probe_seed,
                             outage_def=outage_def, threads=threads)
            b = estimate_sop(params.with_scenario(second), n_trials=n_trials, seed=probe_seed,
                             outage_def=outage_def, threads=threads)
            diff = a.p_hat - b.p_hat
            separated = abs(diff) > a.half_width + b.half_width
        else:
            diff = (evaluate(params.with_scenario(first)).value
                    - evaluate(params.with_scenario(second)).value)
            separated = diff != 0.0
        probes.append((x, diff))
        logger.debug("crossover probe %s=%g diff=%+.4g", axis, x, diff)
        return diff, separated

    d_lo, sep_lo = difference(lo)
    d_hi, sep_hi = difference(hi)
    if not (sep_lo and sep_hi and d_lo * d_hi < 0):
        raise NoSignChange(
            f"{first.label} - {second.label} does not change sign on [{lo}, {hi}] "
            f"({d_lo:+.4g} -> {d_hi:+.4g})", d_lo, d_hi)

    for _ in range(max_iterations):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        d_mid, separated = difference(mid)
        if not separated:
            return CrossoverResult(mid, lo, hi, resolved_by_ci=True, probes=probes)
        if d_mid * d_lo < 0:
            hi, d_hi = mid, d_mid
        else:
            lo, d_lo = mid, d_mid
    return CrossoverResult(0.5 * (lo + hi), lo, hi, probes=probes)


def _fmt(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(result: SweepResult, out) -> Any:
    """
    Write a sweep as CSV.

    Args:
        result: Sweep to write
        out: Path or open text file

    Returns:
        The path or file written to
    """
    def write(f):
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for r in result.rows:
            writer.writerow([r.axis_name, _fmt(float(r.axis_value)), r.duplex.value,
                             r.ed_model.value, r.method.value, r.kind, _fmt(r.value),
                             _fmt(r.raw_value), _fmt(r.ci_low), _fmt(r.ci_high),
                             _fmt(r.n_trials), _fmt(r.seed)])

    if hasattr(out, 'write'):
        write(out)
        return out
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, 'w', encoding='utf-8', newline='') as f:
        write(f)
    return out


def read_csv(path: str) -> SweepResult:
    """Parse a CSV written by :func:`emit_csv`."""
    def opt(text: str, cast):
        return None if text == '' else cast(text)

    rows = []
    axis_name = ''
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for rec in reader:
            axis_name = rec['axis_name']
            rows.append(SweepRow(
                axis_name=rec['axis_name'],
                axis_value=float(rec['axis_value']),
                duplex=Duplex.parse(rec['duplex']),
                ed_model=EdModel.parse(rec['ed_model']),
                method=SweepMethod.parse(rec['method']),
                kind=rec['kind'],
                value=float(rec['value']),
                raw_value=float(rec['raw_value']),
                ci_low=opt(rec['ci_low'], float),
                ci_high=opt(rec['ci_high'], float),
                n_trials=opt(rec['n_trials'], int),
                seed=opt(rec['seed'], int),
            ))
    return SweepResult(axis_name, tuple(rows))


PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Plot {csv_name} (generated by analyze-sop)."""

import csv
import sys

import matplotlib.pyplot as plt

CSV_PATH = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
LAYOUT = {layout!r}
MARKERS = {{'Analytic': '-', 'Bound': '--', 'Approximation': ':', 'MonteCarlo': 'o'}}

series = {{}}
with open(CSV_PATH, newline='', encoding='utf-8') as f:
    for row in csv.DictReader(f):
        key = (row['duplex'].upper() + '-' + row['ed_model'], row['method'])
        series.setdefault(key, []).append(row)

scenarios = sorted({{k[0] for k in series}})
if LAYOUT == 'grid':
    fig, axes = plt.subplots(1, len(scenarios), figsize=(5 * len(scenarios), 4), squeeze=False)
    axis_for = {{s: axes[0][i] for i, s in enumerate(scenarios)}}
else:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    axis_for = {{s: ax for s in scenarios}}

for (scenario, method), rows in sorted(series.items()):
    ax = axis_for[scenario]
    xs = [float(r['axis_value']) for r in rows]
    ys = [max(float(r['value']), 1e-6) for r in rows]
    label = scenario + ' ' + method
    if method == 'MonteCarlo':
        lo = [max(float(r['value']) - float(r['ci_low']), 0.0) for r in rows]
        hi = [max(float(r['ci_high']) - float(r['value']), 0.0) for r in rows]
        ax.errorbar(xs, ys, yerr=[lo, hi], fmt='o', capsize=3, label=label)
    else:
        ax.plot(xs, ys, MARKERS.get(method, '-'), label=label)

for scenario, ax in axis_for.items():
    ax.set_yscale('log')
    ax.set_xlabel({axis_name!r})
    ax.set_ylabel('secrecy outage probability')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend(fontsize='small')
    if LAYOUT == 'grid':
        ax.set_title(scenario)

fig.tight_layout()
fig.savefig({png_path!r}, dpi=150)
print('Saved', {png_path!r})
'''


def emit_plot_script(result: SweepResult, csv_path: str, script_path: str,
                     layout: str = 'single') -> str:
    """
    Write a standalone matplotlib script that plots the CSV on a log-y axis.

    Args:
        result: Sweep the CSV holds (used for the axis label)
        csv_path: CSV the script reads by default
        script_path: Where to write the script
        layout: 'single' (one axes) or 'grid' (one panel per scenario)
    """
    if layout not in ('single', 'grid'):
        raise ValueError(f"layout must be 'single' or 'grid', got {layout!r}")
    png_path = os.path.splitext(csv_path)[0] + '.png'
    text = PLOT_TEMPLATE.format(csv_name=os.path.basename(csv_path), csv_path=csv_path,
                                layout=layout, axis_name=result.axis_name, png_path=png_path)
    directory = os.path.dirname(script_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(script_path, 'w', encoding='utf-8') as f:
        f.write(text)
    return script_path


@dataclass(frozen=True)
class TrendExpectation:
    scenario: Scenario
    method: SweepMethod
    expected: Trend


@dataclass(frozen=True)
class CrossoverSetup:
    pair: Tuple[Scenario, Scenario]
    lo: float
    hi: float
    mode: str = 'montecarlo'
    n_trials: int = 200000
    tolerance: float = 0.5
    reference: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class Recipe:
    """A sweep stored as JSON, with its trend expectations and provenance."""
    name: str
    description: str
    provenance: str
    spec: SweepSpec
    trends: Tuple[TrendExpectation, ...] = ()
    crossover: Optional[CrossoverSetup] = None


def _recipe_from_dict(data: Dict[str, Any], name: str) -> Recipe:
    base = SystemParams.from_dict(data['base'])
    spec = SweepSpec(
        base=base,
        axis=data['axis'],
        values=tuple(float(v) for v in data['values']),
        scenarios=tuple(Scenario.parse(s) for s in data['scenarios']),
        methods=tuple(SweepMethod.parse(m) for m in data['methods']),
        n_trials=int(data.get('n_trials', 100000)),
        seed=int(data.get('seed', 0)),
        outage_def=OutageDefinition.parse(data.get('outage_def', 'ExactCapacity')),
        varrho=float(data.get('varrho', DEFAULT_VARRHO)),
    ).validate()
    trends = tuple(TrendExpectation(Scenario.parse(t['scenario']), SweepMethod.parse(t['method']),
                                    Trend.parse(t['expected']))
                   for t in data.get('trends', []))
    crossover = None
    if 'crossover' in data:
        c = data['crossover']
        crossover = CrossoverSetup(
            pair=(Scenario.parse(c['pair'][0]), Scenario.parse(c['pair'][1])),
            lo=float(c['lo']), hi=float(c['hi']),
            mode=c.get('mode', 'montecarlo'),
            n_trials=int(c.get('n_trials', 200000)),
            tolerance=float(c.get('tolerance', 0.5)),
            reference=tuple(c['reference']) if 'reference' in c else None,
        )
    return Recipe(name=data.get('name', name), description=data.get('description', ''),
                  provenance=data.get('provenance', ''), spec=spec, trends=trends,
                  crossover=crossover)


def load_recipe(name_or_path: str) -> Recipe:
    """
    Load a built-in recipe by name (e.g. ``fig2``) or any recipe JSON file.
    """
    path = name_or_path
    if not os.path.exists(path):
        path = os.path.join(RECIPE_DIR, f"{name_or_path}.json")
    if not os.path.exists(path):
        available = ', '.join(r for r in recipe_names())
        raise FileNotFoundError(f"Unknown recipe {name_or_path!r}; built-in: {available}")
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    return _recipe_from_dict(data, os.path.splitext(os.path.basename(path))[0])


def recipe_names() -> List[str]:
    return sorted(os.path.splitext(os.path.basename(p))[0]
                  for p in glob.glob(os.path.join(RECIPE_DIR, '*.json')))


def list_recipes() -> List[Recipe]:
    """All built-in recipes, sorted by name."""
    return [load_recipe(name) for name in recipe_names()]


SPEC_SETTINGS = ('scenarios', 'methods', 'n_trials', 'seed', 'outage_def', 'varrho')


def override_recipe(recipe: Recipe, base_changes: Optional[Dict[str, Any]] = None,
                    **spec_changes: Any) -> Recipe:
    """
    Copy of a recipe with some base parameters or sweep settings replaced.

    The recipe's crossover search, if any, runs on the new base as well.
    Trend expectations on scenarios or methods no longer swept are dropped.

    Args:
        recipe: Recipe to start from
        base_changes: SystemParams fields to replace in the base
        **spec_changes: Any of SPEC_SETTINGS

    Raises:
        ValueError: If a change names the swept axis, the duplex or the ED
            model (the recipe's axis and scenarios fix those), or an unknown
            sweep setting
    """
    base_changes = dict(base_changes or {})
    fixed = sorted({recipe.spec.axis, 'duplex', 'ed_model'} & set(base_changes))
    if fixed:
        raise ValueError(f"Recipe {recipe.name} fixes {', '.join(fixed)} through its axis "
                         f"and scenarios")
    unknown = sorted(set(spec_changes) - set(SPEC_SETTINGS))
    if unknown:
        raise ValueError(f"Unknown sweep setting(s): {', '.join(unknown)}")
    if not base_changes and not spec_changes:
        return recipe

    spec = replace(recipe.spec, base=recipe.spec.base.replace(**base_changes), **spec_changes)
    spec.validate()
    logger.info("Recipe %s with overrides: %s", recipe.name,
                ', '.join(f"{k}={v!r}" for k, v in {**base_changes, **spec_changes}.items()))
    trends = tuple(t for t in recipe.trends
                   if t.scenario in spec.scenarios and t.method in spec.methods)
    return replace(recipe, spec=spec, trends=trends)


def run_recipe(recipe: Recipe, threads: Optional[int] = None,
               show_progress: bool = False,
               n_trials: Optional[int] = None) -> Tuple[SweepResult, List[TrendReport]]:
    """
    Run a recipe's sweep and its trend checks.

    Args:
        recipe: Recipe to run
        threads: Worker threads
        show_progress: Show progress bars
        n_trials: Override the recipe's Monte Carlo trial count
    """
    spec = recipe.spec
    if n_trials is not None:
        spec = replace(spec, n_trials=n_trials)
    result = run_sweep(spec, threads=threads, show_progress=show_progress)
    reports = []
    for t in recipe.trends:
        try:
            reports.append(trend_check(result, t.expected, t.scenario, t.method))
        except InsufficientPoints as e:
            reports.append(TrendReport(t.expected, False, [f"{t.scenario.label}/{t.method.value}"],
                                       [str(e)]))
    return result, reports


def run_recipe_crossover(recipe: Recipe, threads: Optional[int] = None) -> CrossoverResult:
    """Run the crossover search attached to a recipe."""
    if recipe.crossover is None:
        raise ValueError(f"Recipe {recipe.name} has no crossover setup")
    c = recipe.crossover
    return crossover_search(recipe.spec.base, recipe.spec.axis, c.lo, c.hi, c.pair,
                            mode=c.mode, tolerance=c.tolerance, n_trials=c.n_trials,
                            seed=recipe.spec.seed, outage_def=recipe.spec.outage_def,
                            threads=threads)


@dataclass(frozen=True)
class Comparison:
    """Analytic value against the Monte Carlo estimate at one point."""
    axis_value: float
    scenario: Scenario
    analytic: SweepRow
    simulated: SweepRow
    passed: bool

    @property
    def gap(self) -> float:
        return self.analytic.value - self.simulated.value


def compare_analytic_mc(result: SweepResult, slack: float = 0.0) -> List[Comparison]:
    """
    Pair analytic rows with Monte Carlo rows at the same point and judge them.

    Exact values and approximations pass when they fall inside the
    confidence interval widened by ``slack``. An upper bound passes when the
    estimate does not exceed it by more than the half-width plus slack; a
    lower bound mirrors that.
    """
    simulated = {(r.axis_value, r.scenario): r for r in result.rows
                 if r.method is SweepMethod.MONTE_CARLO}
    comparisons = []
    for row in result.rows:
        if row.method is SweepMethod.MONTE_CARLO:
            continue
        mc = simulated.get((row.axis_value, row.scenario))
        if mc is None:
            continue
        margin = mc.half_width + slack
        if row.kind == 'UpperBound':
            passed = mc.value <= row.value + margin
        elif row.kind == 'LowerBound':
            passed = mc.value >= row.value - margin
        else:
            passed = mc.ci_low - slack <= row.value <= mc.ci_high + slack
        comparisons.append(Comparison(row.axis_value, row.scenario, row, mc, passed))
    return comparisons
