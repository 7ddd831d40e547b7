"""
Self-check suites behind ``analyze_sop.py validate``.

Each suite compares the package against an independent reference: scipy's
own special functions, closed-form identities between evaluators, direct
quadrature, and goodness-of-fit tests on the simulator's random draws.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import special, stats

from . import analytic
from .analytic import Method
from .mathkit import (bessel_k1, exp_scaled_e1, gamma_upper_inc, hyp2f1_special,
                      psi_alpha2_closed, psi_kernel)
from .params import Duplex, EdModel, SystemParams, validate
from .simcore import BLOCK_SIZE, draw_block

logger = logging.getLogger(__name__)

KS_SIGNIFICANCE = 0.01
PPP_MEAN_TOLERANCE = 0.015
OMEGA_TOLERANCE = 1e-6
APPROXIMATION_GAP = 0.05


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ''


@dataclass
class SuiteReport:
    """Outcome of one suite of checks."""
    name: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = '') -> Check:
        check = Check(name, bool(passed), detail)
        self.checks.append(check)
        if not check.passed:
            logger.warning("Check failed: %s/%s %s", self.name, name, detail)
        return check


def _close(a: float, b: float, rel: float, abs_tol: float = 0.0) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol)


def special_function_suite() -> SuiteReport:
    """Special functions against scipy references and known identities."""
    report = SuiteReport('special-functions')

    k1_one = bessel_k1(1.0)
    report.add('bessel_k1(1)', _close(k1_one, 0.6019072301972346, 1e-14), f"{k1_one!r}")
    for x in (1e-7, 1e-3, 0.5, 5.0, 40.0):
        got, ref = bessel_k1(x), float(special.k1(x))
        report.add(f'bessel_k1({x:g})', _close(got, ref, 1e-10), f"{got!r} vs {ref!r}")

    e1_one = exp_scaled_e1(1.0)
    report.add('exp_scaled_e1(1)', _close(e1_one, 0.596347362323194, 1e-13), f"{e1_one!r}")
    for x in (0.01, 2.0, 49.0, 60.0, 300.0):
        got = exp_scaled_e1(x)
        ref = math.exp(x) * float(special.exp1(x))
        report.add(f'exp_scaled_e1({x:g})', _close(got, ref, 1e-11), f"{got!r} vs {ref!r}")
        report.add(f'exp_scaled_e1({x:g}) sandwich', 1.0 / (x + 1.0) < got < 1.0 / x,
                   f"{got!r} outside (1/(x+1), 1/x)")
    far = exp_scaled_e1(1e6)
    report.add('exp_scaled_e1(1e6) asymptote', _close(far, 1.0 / (1e6 + 1.0), 1e-11), f"{far!r}")

    for x in (0.0, 0.3, 2.0, 9.0):
        got = gamma_upper_inc(0.5, x)
        ref = math.sqrt(math.pi) * math.erfc(math.sqrt(x))
        report.add(f'gamma_upper_inc(0.5, {x:g})', _close(got, ref, 1e-12), f"{got!r} vs {ref!r}")

    for b in (0.25, 0.5, 2.0 / 3.0, 0.8):
        for z in (0.1, 3.0, 1e4):
            got = hyp2f1_special(b, z)
            ref = float(special.hyp2f1(1.0, b, 1.0 + b, -z))
            report.add(f'hyp2f1_special({b:.3g}, {z:g})', _close(got, ref, 1e-10),
                       f"{got!r} vs {ref!r}")
    for z in (0.1, 3.0, 1e4):
        got, ref = hyp2f1_special(1.0, z), math.log1p(z) / z
        report.add(f'hyp2f1_special(1, {z:g})', _close(got, ref, 1e-12), f"{got!r} vs {ref!r}")
    return report


def _random_hd(rng: np.random.Generator, alpha: float, ed_model: EdModel) -> SystemParams:
    d_bu = float(rng.uniform(2.0, 15.0))
    return SystemParams(
        k_antennas=int(rng.integers(1, 9)),
        rho_e=float(rng.uniform(5e-4, 1e-2)),
        radius=float(d_bu + rng.uniform(10.0, 150.0)),
        d_bu=d_bu,
        alpha=alpha,
        duplex=Duplex.HALF,
        ed_model=ed_model,
    ).replace(beta=float(rng.uniform(1.0, 8.0)))


def closed_form_suite(seed: int = 0, draws: int = 20, psi_draws: int = 100) -> SuiteReport:
    """
    Evaluators that must agree with each other.

    Laplace-integral vs Bessel paths of the HD independent SOP, the
    hypergeometric HD colluding SOP vs its α = 2 and α = 4 reductions, and
    the Ψ kernel quadrature vs its α = 2 closed form, on random draws.
    """
    report = SuiteReport('closed-forms')
    rng = np.random.default_rng(seed)

    worst = 0.0
    ok = True
    for _ in range(draws):
        params = _random_hd(rng, 2.0, EdModel.INDEPENDENT)
        laplace = analytic.sop_hd_independent(params, Method.LAPLACE_INTEGRAL).raw_value
        bessel = analytic.sop_hd_independent(params, Method.BESSEL_ALPHA2).raw_value
        worst = max(worst, abs(laplace - bessel) / max(abs(bessel), 1e-300))
        ok &= _close(laplace, bessel, 1e-8, 1e-11)
    report.add('hd-independent laplace vs bessel', ok, f"worst relative gap {worst:.3g}")

    for alpha, closed in ((2.0, Method.CLOSED_ALPHA2), (4.0, Method.CLOSED_ALPHA4)):
        worst = 0.0
        for _ in range(draws):
            params = _random_hd(rng, alpha, EdModel.COLLUDING)
            general = analytic.sop_hd_colluding(params, Method.HYP2F1).raw_value
            reduced = analytic.sop_hd_colluding(params, closed).raw_value
            worst = max(worst, abs(general - reduced))
        report.add(f'hd-colluding hyp2f1 vs {closed.value}', worst <= 1e-10,
                   f"worst absolute gap {worst:.3g}")

    worst = 0.0
    for _ in range(psi_draws):
        y = float(10.0 ** rng.uniform(-3.0, 3.0))
        delta = float(rng.uniform(0.02, 0.9))
        worst = max(worst, abs(psi_kernel(y, 2.0, delta) - psi_alpha2_closed(y, delta)))
    report.add('psi kernel vs alpha=2 closed form', worst <= 1e-6, f"worst absolute gap {worst:.3g}")
    return report


def approximation_suite() -> SuiteReport:
    """
    Pieces of the FD colluding α = 2 approximation against direct quadrature.

    Both the near-field term and Ω are exact integrals and must match their
    quadratures to OMEGA_TOLERANCE (1 + |reference|). The assembled
    approximation must stay within APPROXIMATION_GAP of the bound it
    approximates.
    """
    report = SuiteReport('approximation')
    base = SystemParams(k_antennas=1, d_bu=5.0, radius=50.0, alpha=2.0, pu_over_n0_db=50.0,
                        duplex=Duplex.FULL, ed_model=EdModel.COLLUDING, ed_noise=False)
    vp = validate(base)
    for varrho in (0.05, 1.0, 3.0):
        closed = analytic.near_field_term(vp, 1, varrho)
        reference = analytic.near_field_reference(vp, 1, varrho)
        report.add(f'near field (varrho={varrho:g})', _close(closed, reference, 1e-6, 1e-9),
                   f"{closed!r} vs {reference!r}")
    closed = analytic.near_field_asymptotic(vp, 1, 0.05)
    reference = analytic.near_field_reference(vp, 1, 0.05, asymptotic=True)
    report.add('near field, large-A form (varrho=0.05)', _close(closed, reference, 1e-6, 1e-9),
               f"{closed!r} vs {reference!r}")

    a0 = analytic.a_k_coefficient(vp, 1)
    for varrho in (0.5, 1.0, 2.0, 8.0):
        omega = analytic.omega_term(vp.beta, vp.d_bu, vp.radius, a0, varrho)
        reference = analytic.omega_reference(vp.d_bu, vp.radius, a0, varrho)
        gap = abs(omega - reference)
        report.add(f'omega vs reference integral (varrho={varrho:g})',
                   gap <= OMEGA_TOLERANCE * (1.0 + abs(reference)),
                   f"omega={omega:.9g}, integral={reference:.9g}, gap {gap:.3g}")

    for rho_e in (0.001, 0.003, 0.005):
        params = base.replace(rho_e=rho_e)
        approx = analytic.sop_fd_colluding_approx_alpha2(params, varrho=1.0).value
        bound = analytic.sop_fd_colluding_bound(params).value
        report.add(f'approximation vs bound (rho_e={rho_e:g})',
                   abs(approx - bound) <= APPROXIMATION_GAP,
                   f"approximation={approx:.6g}, bound={bound:.6g}")
    return report


def distribution_suite(seed: int = 0, n_samples: int = 100000) -> SuiteReport:
    """
    Goodness of fit of the draws :func:`estimate_sop` simulates with.

    Blocks come from :func:`draw_block`, the same generator the simulator
    consumes, so a broken stream layout shows up here.
    """
    report = SuiteReport('distributions')
    base = SystemParams(k_antennas=5, rho_e=0.005, radius=50.0, d_bu=10.0)
    expected = base.rho_e * math.pi * base.radius ** 2

    blocks = []
    for b in range(math.ceil(n_samples / BLOCK_SIZE)):
        blocks.append(draw_block(base, seed, b, BLOCK_SIZE))
    counts = np.concatenate([blk.counts for blk in blocks])
    mean = float(counts.mean())
    report.add('ppp mean count', abs(mean - expected) <= PPP_MEAN_TOLERANCE * expected,
               f"mean {mean:.3f}, expected {expected:.3f}")

    k = base.k_antennas
    gains = np.concatenate([blk.ue_gains.max(axis=1) for blk in blocks])
    result = stats.kstest(gains, lambda x: (-np.expm1(-x)) ** k)
    report.add(f'tas max gain cdf (K={k})', result.pvalue > KS_SIGNIFICANCE,
               f"p-value {result.pvalue:.3g}")

    r = np.concatenate([blk.eds.r for blk in blocks])[:n_samples]
    result = stats.kstest(r, lambda x: np.clip(x / base.radius, 0.0, 1.0) ** 2)
    report.add('disk radial cdf', result.pvalue > KS_SIGNIFICANCE, f"p-value {result.pvalue:.3g}")

    theta = np.concatenate([blk.eds.theta for blk in blocks])[:n_samples]
    result = stats.kstest(theta, stats.uniform(loc=0.0, scale=2.0 * math.pi).cdf)
    report.add('disk angle cdf', result.pvalue > KS_SIGNIFICANCE, f"p-value {result.pvalue:.3g}")
    return report


SUITES: Dict[str, Callable[..., SuiteReport]] = {
    'special-functions': lambda seed, n_samples: special_function_suite(),
    'closed-forms': lambda seed, n_samples: closed_form_suite(seed),
    'approximation': lambda seed, n_samples: approximation_suite(),
    'distributions': lambda seed, n_samples: distribution_suite(seed, n_samples),
}


def run_suites(names: Optional[Sequence[str]] = None, seed: int = 0,
               n_samples: int = 100000) -> List[SuiteReport]:
    """
    Run the named suites (all by default).

    Raises:
        KeyError: For an unknown suite name
    """
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"Unknown suite(s): {', '.join(unknown)}; available: {', '.join(SUITES)}")
    reports = []
    for name in names:
        logger.info("Running suite %s", name)
        reports.append(SUITES[name](seed, n_samples))
    return reports
