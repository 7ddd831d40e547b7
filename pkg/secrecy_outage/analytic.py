"""
Closed-form and quadrature evaluators of the secrecy outage probability.

Each evaluator takes a parameter set and returns an :class:`AnalyticResult`.
The function name fixes which of the four scenarios is evaluated; the
``duplex`` and ``ed_model`` fields of the parameters are only consulted by
:func:`evaluate`.

All four scenario formulas are alternating binomial sums over the number
of selected antennas k = 1..K. Terms are accumulated with ``math.fsum``.
"""

import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NoConvergence
from .mathkit import (EULER_GAMMA, QuadratureSpec, bessel_k1, exp_scaled_e1,
                      gamma_fn, hyp2f1_special, integrate_2d_polar,
                      integrate_semi_infinite, psi_alpha2_closed, psi_kernel)
from .params import EdModel, Duplex, SystemParams, ValidatedParams, as_validated

logger = logging.getLogger(__name__)

# Alternating sums beyond this K lose every significant digit
MAX_ALTERNATING_K = 64
# HD independent switches to the nonnegative CDF integral above this K
HD_INDEPENDENT_CDF_ABOVE_K = 20
DEFAULT_VARRHO = 1.0
PSI_GRID_POINTS = 64
PSI_GRID_MAX_REFINEMENTS = 2
# Ψ is tabulated on [PSI_GRID_DECADES below y_max, y_max]
PSI_GRID_DECADES = 9.0
# e^{-x} beyond this many decay lengths is ignored when sizing the Ψ grid
TAIL_DECAY_LENGTHS = 60.0

LAPLACE_SPEC = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15, max_subdivisions=2000)
BOUND_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13, max_subdivisions=2000)
DOUBLE_SPEC = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-10, max_subdivisions=500)
PSI_SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13, max_subdivisions=500)


class Kind(str, Enum):
    """What the returned number is relative to the true SOP."""
    EXACT = 'Exact'
    APPROXIMATION = 'Approximation'
    UPPER_BOUND = 'UpperBound'
    LOWER_BOUND = 'LowerBound'


class Method(str, Enum):
    """Numerical route taken by an evaluator."""
    LAPLACE_INTEGRAL = 'LaplaceIntegral'
    BESSEL_ALPHA2 = 'BesselAlpha2'
    CDF_INTEGRAL = 'CdfIntegral'
    HYP2F1 = 'Hyp2F1'
    CLOSED_ALPHA2 = 'ClosedAlpha2'
    CLOSED_ALPHA4 = 'ClosedAlpha4'
    PSI_BOUND = 'PsiBound'
    E1_BOUND = 'E1Bound'
    OMEGA_APPROX = 'OmegaApprox'
    LARGE_K_BOUND = 'LargeKBound'


@dataclass(frozen=True)
class AnalyticResult:
    """
    Outcome of one analytic evaluation.

    Attributes:
        value: SOP clamped to [0, 1]
        raw_value: Value before clamping
        kind: Exact, approximation or bound
        method: Numerical route taken
        clamped: True when raw_value fell outside [0, 1]
    """
    value: float
    raw_value: float
    kind: Kind
    method: Method
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'raw_value': self.raw_value,
            'kind': self.kind.value,
            'method': self.method.value,
            'clamped': self.clamped,
        }


ParamsLike = Union[SystemParams, ValidatedParams]


def _finish(raw: float, kind: Kind, method: Method, vp: ValidatedParams) -> AnalyticResult:
    if not math.isfinite(raw):
        raise NoConvergence(f"{method.value} produced a non-finite value", raw)
    value = min(1.0, max(0.0, raw))
    clamped = value != raw
    if clamped:
        logger.warning("%s raw SOP %.6g clamped to [0, 1] for %s",
                       method.value, raw, vp.to_dict())
    return AnalyticResult(value=value, raw_value=raw, kind=kind, method=method, clamped=clamped)


def _check_alternating_k(vp: ValidatedParams):
    if vp.k_antennas > MAX_ALTERNATING_K:
        raise DomainError(
            f"K={vp.k_antennas} exceeds {MAX_ALTERNATING_K}; the alternating binomial sum "
            f"cancels catastrophically")


def _success_sum(k_max: int, term: Callable[[int], float]) -> float:
    """Σ_{k=1}^{K} (-1)^{k+1} C(K, k) term(k), compensated."""
    parts = []
    for k in range(1, k_max + 1):
        sign = 1.0 if k % 2 == 1 else -1.0
        parts.append(sign * float(math.comb(k_max, k)) * term(k))
    return math.fsum(parts)


def hd_shape(vp: ValidatedParams) -> float:
    """s = π ρ_E Γ(1 + 2/α) β^(2/α) d_BU², the scale shared by the HD independent forms."""
    two_over_alpha = 2.0 / vp.alpha
    return (math.pi * vp.rho_e * gamma_fn(1.0 + two_over_alpha)
            * vp.beta ** two_over_alpha * vp.d_bu ** 2)


def laplace_integral(s: float, c: float, spec: QuadratureSpec = LAPLACE_SPEC) -> float:
    """
    J(s) = ∫_0^∞ exp(-t - s t^(-c)) dt, the scaled integral a·I(a, b, c).

    Substituting t = a x turns a ∫ e^{-ax} e^{-b x^{-c}} dx into J(b a^c).
    """
    if s == 0:
        return 1.0
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s!r}")
    # The integrand peaks where 1 = c s t^(-c-1)
    peak = (c * s) ** (1.0 / (1.0 + c))

    log_s = math.log(s)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        log_penalty = log_s - c * math.log(t)
        if log_penalty > 6.6:
            # s t^(-c) > 735, e^{-...} underflows
            return 0.0
        return math.exp(-t - math.exp(log_penalty))

    return integrate_semi_infinite(integrand, spec, scale=max(peak, 1e-3), points=[peak]).value


def sop_hd_independent(params: ParamsLike, method: Optional[Method] = None) -> AnalyticResult:
    """
    SOP of a half-duplex user facing independent eavesdroppers.

    Large-radius approximation
        P = 1 - Σ (-1)^{k+1} C(K,k) a_k I(a_k, b, 2/α),
    with a_k = k d_BU^α and b = π ρ_E Γ(1+2/α) β^(2/α).

    Args:
        params: Parameter set
        method: LaplaceIntegral, BesselAlpha2 (α = 2 only) or CdfIntegral;
            by default Bessel for α = 2, Laplace otherwise, and the CDF
            integral whenever K > 20

    Returns:
        AnalyticResult with kind Approximation
    """
    vp = as_validated(params)
    k_max = vp.k_antennas
    if method is None:
        if k_max > HD_INDEPENDENT_CDF_ABOVE_K:
            method = Method.CDF_INTEGRAL
        elif vp.alpha == 2.0:
            method = Method.BESSEL_ALPHA2
        else:
            method = Method.LAPLACE_INTEGRAL
    method = Method(method)

    if vp.rho_e == 0:
        return _finish(0.0, Kind.APPROXIMATION, method, vp)

    s = hd_shape(vp)
    two_over_alpha = 2.0 / vp.alpha

    if method is Method.CDF_INTEGRAL:
        return _finish(_hd_independent_cdf(s, vp.alpha, k_max), Kind.APPROXIMATION, method, vp)

    _check_alternating_k(vp)
    if method is Method.BESSEL_ALPHA2:
        if vp.alpha != 2.0:
            raise DomainError(f"Bessel form needs alpha = 2, got {vp.alpha}")

        def term(k: int) -> float:
            root = math.sqrt(s * k)
            return 2.0 * root * bessel_k1(2.0 * root)
    elif method is Method.LAPLACE_INTEGRAL:
        def term(k: int) -> float:
            return laplace_integral(s * k ** two_over_alpha, two_over_alpha)
    else:
        raise DomainError(f"{method.value} is not a method of sop_hd_independent")

    raw = 1.0 - _success_sum(k_max, term)
    return _finish(raw, Kind.APPROXIMATION, method, vp)


def _hd_independent_cdf(s: float, alpha: float, k_max: int,
                        spec: QuadratureSpec = LAPLACE_SPEC) -> float:
    """
    P = ∫_0^∞ (1 - exp(-(s/u)^(α/2)))^K e^{-u} du.

    The integrand is nonnegative, so no cancellation happens for large K.
    """
    half_alpha = 0.5 * alpha
    # Integrand drops from e^{-u} to ~0 around this u
    knee = s / max(math.log(k_max), 1.0) ** (1.0 / half_alpha)

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 1.0
        log_tail = half_alpha * (math.log(s) - math.log(u))
        if log_tail > 6.6:
            log_cdf = 0.0
        elif log_tail < -700.0:
            return 0.0
        else:
            log_cdf = math.log(-math.expm1(-math.exp(log_tail)))
        exponent = k_max * log_cdf - u
        return math.exp(exponent) if exponent > -745.0 else 0.0

    return integrate_semi_infinite(integrand, spec, scale=knee, points=[knee]).value


def sop_hd_independent_lower_bound(params: ParamsLike, rigorous: bool = False) -> AnalyticResult:
    """
    Large-K lower bound on the HD independent SOP.

    The default is the leading-order term s / (e (ln K)^(2/α)). With
    ``rigorous`` set, (1 - 1/K)^K (1 - exp(-s / (ln K)^(2/α))) is returned,
    which holds for every K >= 2.

    Raises:
        DomainError: If K < 2
    """
    vp = as_validated(params)
    k_max = vp.k_antennas
    if k_max < 2:
        raise DomainError(f"Lower bound needs K >= 2 (ln K > 0), got K={k_max}")
    s = hd_shape(vp)
    log_term = math.log(k_max) ** (2.0 / vp.alpha)
    if rigorous:
        raw = (1.0 - 1.0 / k_max) ** k_max * -math.expm1(-s / log_term)
    else:
        raw = s / (math.e * log_term)
    return _finish(raw, Kind.LOWER_BOUND, Method.LARGE_K_BOUND, vp)


def hd_colluding_exponent(vp: ValidatedParams, k: int, method: Method) -> float:
    """π R² ρ_E F(1, 2/α; 1+2/α; -R^α/(kβ d_BU^α)) for one k."""
    kb = k * vp.beta
    if method is Method.CLOSED_ALPHA2:
        # F(1,1;2;-z) = ln(1+z)/z
        return math.pi * vp.rho_e * kb * vp.d_bu ** 2 * math.log1p(vp.radius ** 2 / (kb * vp.d_bu ** 2))
    if method is Method.CLOSED_ALPHA4:
        # F(1,1/2;3/2;-z) = arctan(√z)/√z
        root = vp.d_bu ** 2 * math.sqrt(kb)
        return math.pi * vp.rho_e * root * math.atan(vp.radius ** 2 / root)
    z = (vp.radius / vp.d_bu) ** vp.alpha / kb
    return math.pi * vp.radius ** 2 * vp.rho_e * hyp2f1_special(2.0 / vp.alpha, z)


def sop_hd_colluding(params: ParamsLike, method: Optional[Method] = None) -> AnalyticResult:
    """
    Exact SOP of a half-duplex user facing colluding eavesdroppers.

    P = 1 - Σ C(K,k) (-1)^{k+1} exp(-π R² ρ_E F(1, 2/α; 1+2/α; -R^α/(kβ d_BU^α))).
    The α = 2 and α = 4 closed forms are picked automatically.
    """
    vp = as_validated(params)
    _check_alternating_k(vp)
    if method is None:
        if vp.alpha == 2.0:
            method = Method.CLOSED_ALPHA2
        elif vp.alpha == 4.0:
            method = Method.CLOSED_ALPHA4
        else:
            method = Method.HYP2F1
    method = Method(method)
    if method is Method.CLOSED_ALPHA2 and vp.alpha != 2.0:
        raise DomainError(f"ClosedAlpha2 needs alpha = 2, got {vp.alpha}")
    if method is Method.CLOSED_ALPHA4 and vp.alpha != 4.0:
        raise DomainError(f"ClosedAlpha4 needs alpha = 4, got {vp.alpha}")
    if method not in (Method.CLOSED_ALPHA2, Method.CLOSED_ALPHA4, Method.HYP2F1):
        raise DomainError(f"{method.value} is not a method of sop_hd_colluding")

    if vp.rho_e == 0:
        return _finish(0.0, Kind.EXACT, method, vp)

    raw = 1.0 - _success_sum(vp.k_antennas,
                             lambda k: math.exp(-hd_colluding_exponent(vp, k, method)))
    return _finish(raw, Kind.EXACT, method, vp)


class PsiTable:
    """
    Ψ(y; α, δ) tabulated on a log-spaced grid with monotone interpolation.

    Interpolation is PCHIP on (ln y, ln Ψ). Arguments outside the grid fall
    back to direct quadrature of the kernel.
    """

    def __init__(self, alpha: float, delta: float, y_min: float, y_max: float,
                 n_points: int = PSI_GRID_POINTS, spec: QuadratureSpec = PSI_SPEC):
        self.alpha = alpha
        self.delta = delta
        self.y_min = y_min
        self.y_max = y_max
        self.n_points = n_points
        self.spec = spec
        self.grid = np.geomspace(y_min, y_max, n_points)
        values = np.array([psi_kernel(float(y), alpha, delta, spec) for y in self.grid])
        self._interp = PchipInterpolator(np.log(self.grid), np.log(values))
        logger.debug("Tabulated Psi on %d points over [%.3g, %.3g] (alpha=%s, delta=%s)",
                     n_points, y_min, y_max, alpha, delta)

    def __call__(self, y: float) -> float:
        if y <= 0.0:
            return 0.0
        if y < self.y_min or y > self.y_max:
            return psi_kernel(y, self.alpha, self.delta, self.spec)
        return float(np.exp(self._interp(math.log(y))))

    def refined(self) -> 'PsiTable':
        """Table with twice as many grid points."""
        return _psi_table(self.alpha, self.delta, self.y_min, self.y_max, 2 * self.n_points)


@functools.lru_cache(maxsize=32)
def _psi_table(alpha: float, delta: float, y_min: float, y_max: float, n_points: int) -> PsiTable:
    return PsiTable(alpha, delta, y_min, y_max, n_points)


def _psi_function(vp: ValidatedParams) -> Callable[[float], float]:
    delta = vp.d_bu / vp.radius
    if vp.alpha == 2.0:
        return lambda y: psi_alpha2_closed(y, delta) if y > 0 else 0.0
    y_max = TAIL_DECAY_LENGTHS * vp.pu / (vp.d_bu ** vp.alpha * vp.beta)
    y_min = y_max * 10.0 ** (-PSI_GRID_DECADES)
    return _psi_table(vp.alpha, delta, y_min, y_max, PSI_GRID_POINTS)


def fd_independent_term(vp: ValidatedParams, k: int, psi: Callable[[float], float],
                        spec: QuadratureSpec = BOUND_SPEC) -> float:
    """
    k ∫_0^∞ g_k(x) exp(-ρ_E R² (π - Ψ(x/β)) - k d^α x / P_U) dx.

    The e^{-ρ_E π R²} prefactor is folded into the exponent, which keeps it
    nonpositive because Ψ <= π.
    """
    p_over_d = vp.pu / vp.d_bu ** vp.alpha
    lam = vp.lambda_uu
    rho_r2 = vp.rho_e * vp.radius ** 2
    decay = k / p_over_d

    def integrand(x: float) -> float:
        kxl = k * x * lam
        weight = (p_over_d * (1.0 + lam) + kxl) / (p_over_d + kxl) ** 2
        exponent = -rho_r2 * (math.pi - psi(x / vp.beta)) - decay * x
        return weight * math.exp(exponent)

    scale = 1.0 / decay
    # Ψ(x/β) approaches π once x/β is well above ρ_E π R²
    knee = vp.beta * max(math.pi * rho_r2, 1e-6)
    return k * integrate_semi_infinite(integrand, spec, scale=scale, points=[knee, scale]).value


def sop_fd_independent_bound(params: ParamsLike) -> AnalyticResult:
    """
    Upper bound on the SOP of a full-duplex user facing independent
    eavesdroppers in the interference-limited regime.

    Uses the closed form of Ψ for α = 2 and a cached PCHIP table of the
    kernel otherwise; the table is refined on quadrature failure.
    """
    vp = as_validated(params)
    _check_alternating_k(vp)
    if vp.rho_e == 0:
        return _finish(0.0, Kind.UPPER_BOUND, Method.PSI_BOUND, vp)

    psi = _psi_function(vp)
    for attempt in range(PSI_GRID_MAX_REFINEMENTS + 1):
        try:
            success = _success_sum(vp.k_antennas,
                                   lambda k: fd_independent_term(vp, k, psi))
            break
        except NoConvergence:
            if not isinstance(psi, PsiTable) or attempt == PSI_GRID_MAX_REFINEMENTS:
                raise
            psi = psi.refined()
            logger.info("Refining Psi grid to %d points", psi.n_points)
    return _finish(1.0 - success, Kind.UPPER_BOUND, Method.PSI_BOUND, vp)


def _self_interference_factor(vp: ValidatedParams) -> float:
    # Residual self-interference treated as extra noise of power λ_UU σ_n²
    return 1.0 + vp.lambda_uu


def a_k_coefficient(vp: ValidatedParams, k: int) -> float:
    """(1+λ_UU) k β d_BU^α / P_U; A_k(r, θ) is this times (d_UE / r)^α."""
    return _self_interference_factor(vp) * k * vp.beta * vp.d_bu ** vp.alpha / vp.pu


def _a_e1(a: float) -> float:
    # A e^A E1(A), continuous at both ends of [0, ∞]
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return 1.0
    return a * exp_scaled_e1(a)


def fd_colluding_exponent(params: ParamsLike, k: int,
                          spec: QuadratureSpec = DOUBLE_SPEC) -> float:
    """
    ∫_0^R ∫_0^2π A_k e^{A_k} E1(A_k) r dθ dr for one k.

    The integrand factor lies in [0, 1), so the result is at most π R².
    """
    vp = as_validated(params)
    coef = a_k_coefficient(vp, k)
    d = vp.d_bu
    alpha = vp.alpha
    d2 = d * d

    def integrand(r: float, theta: float) -> float:
        if r <= 0.0:
            return 0.0
        d_ue2 = max(r * r + d2 - 2.0 * r * d * math.cos(theta), 0.0)
        a = coef * (d_ue2 / (r * r)) ** (0.5 * alpha)
        return _a_e1(a) * r

    return integrate_2d_polar(integrand, vp.radius, spec, r_points=[d],
                              theta_symmetric=True).value


def sop_fd_colluding_bound(params: ParamsLike) -> AnalyticResult:
    """
    Upper bound on the SOP of a full-duplex user facing colluding
    eavesdroppers in the interference-limited regime.

    P <= 1 + Σ C(K,k) (-1)^k exp(-ρ_E ∫∫ A_k e^{A_k} E1(A_k) r dθ dr).
    """
    vp = as_validated(params)
    _check_alternating_k(vp)
    if vp.rho_e == 0:
        return _finish(0.0, Kind.UPPER_BOUND, Method.E1_BOUND, vp)
    success = _success_sum(vp.k_antennas,
                           lambda k: math.exp(-vp.rho_e * fd_colluding_exponent(vp, k)))
    return _finish(1.0 - success, Kind.UPPER_BOUND, Method.E1_BOUND, vp)


def _rational_near_primitive(a: float, d2: float, u: float) -> float:
    # ∫ u / sqrt(Q(u)) du with Q = (1+a)² u² + 2 a d² (1-a) u + a² d⁴
    p = (1.0 + a) ** 2
    b = 2.0 * a * d2 * (1.0 - a)
    c0 = a * a * d2 * d2
    root_q = math.sqrt(p * u * u + b * u + c0)
    root_p = math.sqrt(p)
    log_arg = 2.0 * root_p * root_q + 2.0 * p * u + b
    return root_q / p - b / (2.0 * p * root_p) * math.log(log_arg)


def near_field_term(vp: ValidatedParams, k: int, varrho: float) -> float:
    """
    ∫_0^ϱ ∫_0^2π A_k / (1 + A_k) r dθ dr for α = 2.

    A/(1+A) follows A e^A E1(A) for large A like 1 - 1/A does, but stays in
    [0, 1) where A_k is small. With a = A_k r² / d_UE² and u = r² the
    angular integral is 2π a D / sqrt(Q(u)), which integrates in closed form
    over u for any ϱ.
    """
    a = a_k_coefficient(vp, k)
    d2 = vp.d_bu * vp.d_bu
    u = varrho * varrho
    through = _rational_near_primitive(a, d2, u) - _rational_near_primitive(a, d2, 0.0)
    return math.pi * u - math.pi * through


def near_field_asymptotic(vp: ValidatedParams, k: int, varrho: float,
                          printed_sign: bool = False) -> float:
    """
    ∫_0^ϱ ∫_0^2π (1 - 1/A_k) r dθ dr for α = 2 and ϱ < d_BU.

    Evaluates to π ϱ² - (π P_U / ((1+λ_UU) k β)) (-ln(1-x) - x) with
    x = (ϱ/d_BU)². ``printed_sign`` swaps in (x - ln(1-x)), the variant
    that circulates in print, for comparison. Only accurate while A_k is
    large on the whole inner disk, i.e. ϱ well below d_BU sqrt(A₀).
    """
    if not 0 < varrho < vp.d_bu:
        raise DomainError(f"varrho={varrho} outside (0, d_bu={vp.d_bu}): log argument 1-(varrho/d_bu)^2 <= 0")
    x = (varrho / vp.d_bu) ** 2
    log_term = -math.log1p(-x)
    bracket = (x + log_term) if printed_sign else (log_term - x)
    scale = math.pi * vp.pu / (_self_interference_factor(vp) * k * vp.beta)
    return math.pi * varrho ** 2 - scale * bracket


def _shift(poly: Dict[int, float], by: int) -> Dict[int, float]:
    return {power + by: coef for power, coef in poly.items()}


def _combine(*terms: Tuple[float, Dict[int, float]]) -> Dict[int, float]:
    out: Dict[int, float] = {}
    for scale, poly in terms:
        for power, coef in poly.items():
            out[power] = out.get(power, 0.0) + scale * coef
    return out


def _omega_laurent(a: float, d: float, inside: bool) -> Tuple[Dict[int, float], Dict[int, float]]:
    """
    r times the angular integral of the Ω integrand, as Laurent polynomials.

    Returns (plain, logs) such that the angular integral divided by 2π,
    times r, is Σ plain[n] r^n + ln r Σ logs[n] r^n. ``inside`` selects
    r < d, where the Fourier series of ln D_UE² expands in r/d instead of d/r.
    """
    d2 = d * d
    s = {2: 1.0, 0: d2}
    quartic = {4: 1.0, 2: 4.0 * d2, 0: d2 * d2}
    sextic = {6: 1.0, 4: 9.0 * d2, 2: 9.0 * d2 * d2, 0: d2 ** 3}
    ln_a = math.log(a)
    if inside:
        m2, m4 = {2: 1.0}, {4: 1.0}
        ell_const, ell_log = ln_a + 2.0 * math.log(d), -2.0
    else:
        m2, m4 = {0: d2}, {0: d2 * d2}
        ell_const, ell_log = ln_a, 0.0
    s_m2 = {i + j: x * y for i, x in s.items() for j, y in m2.items()}
    kappa = EULER_GAMMA
    plain = _combine(
        (a ** 3, _shift(sextic, -6)),
        ((1.0 - kappa - ell_const) * a * a, _shift(quartic, -4)),
        (-4.0 * a * a, _shift(s_m2, -4)),
        (a * a, _shift(m4, -4)),
        (-(kappa + ell_const) * a, _shift(s, -2)),
        (-2.0 * a, _shift(m2, -2)),
    )
    logs = _combine(
        (-ell_log * a * a, _shift(quartic, -4)),
        (-ell_log * a, _shift(s, -2)),
    )
    return _shift(plain, 1), _shift(logs, 1)


def _laurent_primitive(plain: Dict[int, float], logs: Dict[int, float], r: float) -> float:
    ln_r = math.log(r)
    parts = []
    for n, coef in plain.items():
        parts.append(coef * ln_r if n == -1 else coef * r ** (n + 1) / (n + 1))
    for n, coef in logs.items():
        if n == -1:
            parts.append(0.5 * coef * ln_r * ln_r)
        else:
            m = n + 1
            parts.append(coef * r ** m * (ln_r / m - 1.0 / (m * m)))
    return math.fsum(parts)


def omega_term(beta: float, d_bu: float, R: float, A0: float, varrho: float) -> float:
    """
    Far-field term Ω(β; d_BU, R, A₀) of the α = 2 approximation.

    Ω = ∫_ϱ^R ∫_0^2π A (A+1)(A - ln A - κ) r dθ dr with A = A₀ D_UE² / r²,
    the second-order expansion of A e^A E1(A) at small A; κ is the
    Euler-Mascheroni constant. The angular integrals of D_UE^{2n} and
    D_UE^{2n} ln D_UE² are polynomials in r, d_BU and ln max(r, d_BU), so the
    radial integral is exact on either side of d_BU.

    β enters only through A₀ = (1+λ_UU) k β d_BU² / P_U; the argument is kept
    so the call mirrors Ω(β; d_BU, R, A₀).

    Raises:
        DomainError: Unless 0 < ϱ < R and A₀ > 0
    """
    if not 0 < varrho < R:
        raise DomainError(f"need 0 < varrho < R, got varrho={varrho}, R={R}")
    if not (A0 > 0 and math.isfinite(A0)):
        raise DomainError(f"A0 must be a finite real > 0, got {A0!r}")

    a = A0
    total = []
    for inside, lo, hi in ((True, varrho, min(d_bu, R)), (False, max(varrho, d_bu), R)):
        if hi <= lo:
            continue
        plain, logs = _omega_laurent(a, d_bu, inside)
        total.append(_laurent_primitive(plain, logs, hi) - _laurent_primitive(plain, logs, lo))
    return 2.0 * math.pi * math.fsum(total)


def omega_printed(d_bu: float, R: float, A0: float, varrho: float) -> float:
    """
    Ω as it circulates in print, transcribed group by group.

    It departs from the integral it stands for by roughly ten percent;
    kept to compare against :func:`omega_term`.

    Raises:
        DomainError: Unless 0 < ϱ < min(R, d_BU) and A₀ > 0
    """
    if not (0 < varrho < min(R, d_bu)):
        raise DomainError(f"need 0 < varrho < min(R, d_bu), got varrho={varrho}, R={R}, d_bu={d_bu}")
    if not A0 > 0:
        raise DomainError(f"A0 must be > 0, got {A0!r}")

    kappa = EULER_GAMMA
    rho = varrho
    d = d_bu
    ln_rho = math.log(rho)
    ln_r = math.log(R)
    r4rho4 = R ** 4 * rho ** 4
    common = A0 * kappa - (9.0 / 4.0) * A0 ** 2 + 0.25 * kappa + 0.25

    t1 = (4.0 * r4rho4 * d ** 2 * (A0 + 0.25)
          * (ln_rho ** 2 + 2.0 * math.log(A0 * d) * math.log(R / rho) - ln_r ** 2))
    t2 = r4rho4 * ln_rho * ((A0 + 1.0) * rho ** 2 - 8.0 * common * d ** 2 - d ** 4 * A0 / rho ** 4)
    t3 = r4rho4 * ln_r * ((A0 + 1.0) * R ** 2 - 8.0 * common * d ** 2 - d ** 4 * A0)
    inner = rho ** 2 * (R ** 2 * (A0 + 1.0) * rho ** 2 + d ** 4 * A0) * R ** 2
    t4 = (R ** 2 - rho ** 2) * (
        inner * math.log(A0)
        + inner * math.log(d)
        + R ** 4 * (-A0 ** 2 + (kappa + 1.0) * A0 + kappa + 1.5) * rho ** 4
        + A0 * ((kappa - 9.0 * A0) * R ** 2 - 0.5 * d ** 2 * A0) * d ** 4 * rho ** 2
        - 0.5 * R ** 2 * d ** 6 * A0 ** 2)
    return -(A0 * math.pi / r4rho4) * (t1 + t2 - t3 + t4)


def omega_reference(d_bu: float, R: float, A0: float, varrho: float,
                    spec: QuadratureSpec = DOUBLE_SPEC) -> float:
    """
    ∫_ϱ^R ∫_0^2π A (A+1)(A - ln A - κ) r dθ dr with A = A₀ (d_UE/r)²,
    the quantity Ω stands in for, by direct quadrature.
    """
    d2 = d_bu * d_bu

    def integrand(r: float, theta: float) -> float:
        if r < varrho:
            return 0.0
        a = A0 * max(r * r + d2 - 2.0 * r * d_bu * math.cos(theta), 0.0) / (r * r)
        if a <= 0.0:
            return 0.0
        return a * (a + 1.0) * (a - math.log(a) - EULER_GAMMA) * r

    return integrate_2d_polar(integrand, R, spec, r_points=[varrho, d_bu],
                              theta_symmetric=True).value


def near_field_reference(vp: ValidatedParams, k: int, varrho: float,
                         asymptotic: bool = False,
                         spec: QuadratureSpec = DOUBLE_SPEC) -> float:
    """
    Direct quadrature of the near-field term for α = 2.

    Integrates A_k / (1 + A_k) over the disk of radius ϱ, or 1 - 1/A_k when
    ``asymptotic`` is set.
    """
    coef = a_k_coefficient(vp, k)
    d = vp.d_bu

    def integrand(r: float, theta: float) -> float:
        a = coef * (r * r + d * d - 2.0 * r * d * math.cos(theta))
        if asymptotic:
            return (1.0 - r * r / a) * r
        return a / (r * r + a) * r

    return integrate_2d_polar(integrand, varrho, spec, theta_symmetric=True).value


def sop_fd_colluding_approx_alpha2(params: ParamsLike, varrho: float = DEFAULT_VARRHO,
                                   printed: bool = False) -> AnalyticResult:
    """
    Closed-form approximation of the FD colluding SOP for α = 2.

    P ≈ 1 + Σ C(K,k) (-1)^k exp(-ρ_E (near_k + Ω_k)), splitting the disk
    at radius ϱ: A/(1+A) inside, the small-A expansion of A e^A E1(A)
    outside. Both pieces are exact integrals, so the exponent tracks the
    one of :func:`sop_fd_colluding_bound` for ϱ up to a few metres.

    Args:
        params: Parameter set with alpha == 2
        varrho: Split radius in metres, 0 < ϱ < min(R, d_BU)
        printed: Use the published closed form instead, 1 - 1/A with the
            printed log sign inside and the transcribed Ω outside. It is
            only usable when A_k(ϱ) is large, i.e. ϱ well below
            d_BU sqrt(A₀), and goes negative otherwise

    Raises:
        DomainError: If alpha != 2 or ϱ is outside (0, min(R, d_BU))
    """
    vp = as_validated(params)
    if vp.alpha != 2.0:
        raise DomainError(f"approximation needs alpha = 2, got {vp.alpha}")
    if not (0 < varrho < vp.radius):
        raise DomainError(f"varrho must lie in (0, R={vp.radius}), got {varrho}")
    if varrho >= vp.d_bu:
        raise DomainError(f"varrho={varrho} >= d_bu={vp.d_bu}: log argument 1-(varrho/d_bu)^2 <= 0")
    _check_alternating_k(vp)
    if vp.rho_e == 0:
        return _finish(0.0, Kind.APPROXIMATION, Method.OMEGA_APPROX, vp)

    def success(k: int) -> float:
        a0 = a_k_coefficient(vp, k)
        if printed:
            exponent = (near_field_asymptotic(vp, k, varrho, printed_sign=True)
                        + omega_printed(vp.d_bu, vp.radius, a0, varrho))
        else:
            exponent = (near_field_term(vp, k, varrho)
                        + omega_term(vp.beta, vp.d_bu, vp.radius, a0, varrho))
        return math.exp(-vp.rho_e * exponent)

    raw = 1.0 - _success_sum(vp.k_antennas, success)
    return _finish(raw, Kind.APPROXIMATION, Method.OMEGA_APPROX, vp)


def available_families(params: ParamsLike) -> List[str]:
    """Method families :func:`evaluate` supports for the scenario of ``params``."""
    scenario = as_validated(params).scenario
    families = ['analytic']
    if scenario.duplex is Duplex.FULL or scenario.ed_model is EdModel.INDEPENDENT:
        families.append('bound')
    if scenario.duplex is Duplex.FULL and scenario.ed_model is EdModel.COLLUDING \
            and as_validated(params).alpha == 2.0:
        families.append('approximation')
    return families


def evaluate(params: ParamsLike, family: str = 'analytic',
             varrho: float = DEFAULT_VARRHO) -> AnalyticResult:
    """
    Evaluate the formula matching the scenario of ``params``.

    Args:
        params: Parameter set; duplex and ed_model pick the scenario
        family: 'analytic' (main result per scenario, the bound for FD),
            'bound' (large-K lower bound for HD independent, the FD bounds)
            or 'approximation' (FD colluding, α = 2)
        varrho: Split radius for the approximation

    Raises:
        DomainError: If the scenario has no evaluator of that family
    """
    vp = as_validated(params)
    scenario = vp.scenario
    hd = scenario.duplex is Duplex.HALF
    independent = scenario.ed_model is EdModel.INDEPENDENT
    family = family.lower()

    if family == 'analytic':
        if hd:
            return sop_hd_independent(vp) if independent else sop_hd_colluding(vp)
        return sop_fd_independent_bound(vp) if independent else sop_fd_colluding_bound(vp)
    if family == 'bound':
        if hd and independent:
            return sop_hd_independent_lower_bound(vp)
        if not hd:
            return sop_fd_independent_bound(vp) if independent else sop_fd_colluding_bound(vp)
    if family == 'approximation' and not hd and not independent:
        return sop_fd_colluding_approx_alpha2(vp, varrho)
    raise DomainError(f"No {family} evaluator for scenario {scenario.label}")
