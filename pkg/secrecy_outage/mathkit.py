"""
Special functions and quadrature used by the analytic evaluators.

Everything here is a pure function of its arguments. Quadrature goes through
QUADPACK (``scipy.integrate.quad``) and raises :class:`NoConvergence` instead
of silently returning a result that missed its tolerance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NoConvergence

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)

# Below this argument K1 is replaced by its two-term small-x expansion
BESSEL_K1_SMALL_X = 1e-6
# Above this argument e^x E1(x) comes from the continued fraction
E1_CONTINUED_FRACTION_X = 50.0
E1_CONTINUED_FRACTION_DEPTH = 40
# QUADPACK warnings are tolerated when the error estimate stays this close
# to the requested tolerance (round-off plateaus on smooth integrands)
QUAD_WARNING_SLACK = 100.0


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerances handed to adaptive quadrature.

    Args:
        rel_tol: Relative tolerance
        abs_tol: Absolute tolerance
        max_subdivisions: Subinterval limit per adaptive pass
    """
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError(
                f"Quadrature tolerances must be > 0 (rel_tol={self.rel_tol}, abs_tol={self.abs_tol})")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")

    def loosened(self, factor: float) -> 'QuadratureSpec':
        """Spec with both tolerances multiplied by ``factor``."""
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor, self.max_subdivisions)


DEFAULT_SPEC = QuadratureSpec()


class Quadrature(NamedTuple):
    """Integral value and its error estimate."""
    value: float
    error: float


def _require_positive(name: str, x: float):
    if not (isinstance(x, (int, float, np.floating, np.integer)) and x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be a finite positive real, got {x!r}")


def gamma_fn(x: float) -> float:
    """
    Gamma function Γ(x) for x > 0.

    Raises:
        DomainError: If x <= 0
    """
    _require_positive('x', x)
    return float(special.gamma(x))


def gamma_upper_inc(s: float, x: float) -> float:
    """
    Upper incomplete gamma function Γ(s, x) = ∫_x^∞ t^(s-1) e^(-t) dt.

    Args:
        s: Shape, s > 0
        x: Lower limit, x >= 0

    Returns:
        Non-normalised Γ(s, x)
    """
    _require_positive('s', s)
    if not (x >= 0 and math.isfinite(x)):
        raise DomainError(f"x must be a finite real >= 0, got {x!r}")
    if x == 0:
        return gamma_fn(s)
    return float(special.gammaincc(s, x) * special.gamma(s))


def bessel_k1(x: float) -> float:
    """
    Modified Bessel function of the second kind, order one.

    For x below 1e-6 the expansion 1/x + (x/2)(ln(x/2) + γ - 1/2) is used,
    which stays finite down to the smallest positive doubles.
    """
    _require_positive('x', x)
    if x < BESSEL_K1_SMALL_X:
        return 1.0 / x + 0.5 * x * (math.log(0.5 * x) + EULER_GAMMA - 0.5)
    return float(special.k1(x))


def _e1_continued_fraction(x: np.ndarray) -> np.ndarray:
    # e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...)))), evaluated bottom-up
    depth = E1_CONTINUED_FRACTION_DEPTH
    t = x + (2 * depth + 1)
    for n in range(depth, 0, -1):
        t = x + (2 * n - 1) - (n * n) / t
    return 1.0 / t


def exp_scaled_e1(x):
    """
    Scaled exponential integral e^x E1(x) for x > 0.

    Small and moderate arguments use ``scipy.special.exp1`` times an explicit
    exponential; beyond x = 50 a continued fraction is used so e^x is never
    formed. Accepts scalars or numpy arrays.

    Raises:
        DomainError: If any x <= 0
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise DomainError(f"exp_scaled_e1 needs finite x > 0, got {x!r}")

    small = arr <= E1_CONTINUED_FRACTION_X
    out = np.empty_like(arr)
    if np.any(small):
        xs = arr[small]
        out[small] = np.exp(xs) * special.exp1(xs)
    if np.any(~small):
        out[~small] = _e1_continued_fraction(arr[~small])

    if np.ndim(x) == 0:
        return float(out)
    return out


def integrate_1d(f: Callable[[float], float], a: float, b: float,
                 spec: QuadratureSpec = DEFAULT_SPEC,
                 points: Optional[Sequence[float]] = None) -> Quadrature:
    """
    Adaptive Gauss-Kronrod quadrature on a finite interval.

    Args:
        f: Integrand
        a: Lower limit
        b: Upper limit
        spec: Tolerances
        points: Interior breakpoints (kinks, peaks)

    Returns:
        Quadrature(value, error)

    Raises:
        NoConvergence: If QUADPACK gives up with an error estimate well
            above the requested tolerance
    """
    if a == b:
        return Quadrature(0.0, 0.0)
    if points is not None:
        lo, hi = min(a, b), max(a, b)
        points = sorted({p for p in points if lo < p < hi}) or None

    out = integrate.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                         limit=spec.max_subdivisions, points=points, full_output=1)
    value, error = float(out[0]), float(out[1])
    if len(out) > 3:
        tolerance = max(spec.abs_tol, spec.rel_tol * abs(value))
        if not math.isfinite(value) or error > QUAD_WARNING_SLACK * tolerance:
            raise NoConvergence(f"quad on [{a}, {b}]: {out[3].splitlines()[0]}", value, error)
        logger.debug("Accepted quad result on [%s, %s] despite warning (error=%.3g)", a, b, error)
    return Quadrature(value, error)


def integrate_semi_infinite(f: Callable[[float], float],
                            spec: QuadratureSpec = DEFAULT_SPEC,
                            scale: float = 1.0,
                            points: Optional[Sequence[float]] = None) -> Quadrature:
    """
    ∫_0^∞ f(x) dx through the map x = scale * t / (1 - t), t in (0, 1).

    ``scale`` should sit near where the integrand starts to decay so that
    adaptive refinement concentrates there.
    """
    _require_positive('scale', scale)

    def mapped(t: float) -> float:
        if t >= 1.0:
            return 0.0
        one_minus = 1.0 - t
        x = scale * t / one_minus
        value = f(x)
        if value == 0.0:
            return 0.0
        return value * scale / (one_minus * one_minus)

    t_points = None
    if points is not None:
        t_points = [p / (scale + p) for p in points if p > 0 and math.isfinite(p)]
    return integrate_1d(mapped, 0.0, 1.0, spec, points=t_points)


def integrate_2d_polar(f: Callable[[float, float], float], r_max: float,
                       spec: QuadratureSpec = DEFAULT_SPEC,
                       r_points: Optional[Sequence[float]] = None,
                       theta_points: Optional[Sequence[float]] = None,
                       theta_symmetric: bool = False) -> Quadrature:
    """
    ∫_0^r_max ∫_0^2π f(r, θ) dθ dr by nested adaptive quadrature.

    The integrand must include the polar Jacobian r itself. When
    ``theta_symmetric`` is set, f(r, θ) = f(r, -θ) is assumed and only
    [0, π] is integrated.
    """
    _require_positive('r_max', r_max)
    theta_max = math.pi if theta_symmetric else 2.0 * math.pi
    factor = 2.0 if theta_symmetric else 1.0
    inner_error = [0.0]

    def inner(r: float) -> float:
        res = integrate_1d(lambda theta: f(r, theta), 0.0, theta_max, spec, points=theta_points)
        inner_error[0] = max(inner_error[0], res.error)
        return res.value

    outer = integrate_1d(inner, 0.0, r_max, spec, points=r_points)
    return Quadrature(factor * outer.value,
                      factor * (outer.error + inner_error[0] * r_max))


def hyp2f1_special(b: float, z: float, spec: Optional[QuadratureSpec] = None) -> float:
    """
    Gauss hypergeometric function F(1, b; 1+b; -z) for b in (0, 1], z >= 0.

    Uses F = b ∫_0^1 t^(b-1)/(1+z t) dt, rewritten with u = t^b as
    ∫_0^1 du / (1 + z u^(1/b)) so the integrand is bounded and smooth.
    """
    if not (0 < b <= 1):
        raise DomainError(f"b must lie in (0, 1], got {b!r}")
    if not (z >= 0 and math.isfinite(z)):
        raise DomainError(f"z must be a finite real >= 0, got {z!r}")
    if z == 0:
        return 1.0
    spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)
    inv_b = 1.0 / b

    def integrand(u: float) -> float:
        return 1.0 / (1.0 + z * u ** inv_b)

    # The integrand falls off around u = z^(-b)
    knee = z ** (-b)
    return integrate_1d(integrand, 0.0, 1.0, spec, points=[knee]).value


def psi_kernel(y: float, alpha: float, delta: float,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """
    Ψ(y; α, δ) = ∫_0^2π ∫_0^1 y z^(α+1) / (y z^α + D^(α/2)) dz dθ,
    D = z² + δ² - 2 z δ cos θ.

    Args:
        y: Scaled threshold, y >= 0
        alpha: Path loss exponent
        delta: User distance over disk radius

    Returns:
        Ψ, which lies in [0, π]
    """
    if not (y >= 0 and math.isfinite(y)):
        raise DomainError(f"y must be a finite real >= 0, got {y!r}")
    _require_positive('alpha', alpha)
    _require_positive('delta', delta)
    if y == 0:
        return 0.0

    half_alpha = 0.5 * alpha

    def integrand(z: float, cos_theta: float) -> float:
        if z == 0.0:
            return 0.0
        # Bounded by z even where D vanishes (z = δ, θ = 0)
        dist = z * z + delta * delta - 2.0 * z * delta * cos_theta
        num = y * z ** (alpha + 1.0)
        return num / (y * z ** alpha + max(dist, 0.0) ** half_alpha)

    def over_z(theta: float) -> float:
        c = math.cos(theta)
        return integrate_1d(lambda z: integrand(z, c), 0.0, 1.0, spec, points=[delta]).value

    # Symmetric in θ
    outer = integrate_1d(over_z, 0.0, math.pi, spec, points=None)
    return 2.0 * outer.value


def psi_alpha2_closed(y: float, delta: float) -> float:
    """
    Closed form of Ψ(y; 2, δ).

    Ψ = π y / (y+1)^3 * ((y+1)(ψ - δ²)
        + δ² (y-1) ln(2 δ² y / (δ²(y-1) + (y+1)(ψ + y + 1))))
    with ψ = sqrt(δ⁴ + 2δ²(y-1) + (y+1)²).
    """
    _require_positive('y', y)
    _require_positive('delta', delta)
    d2 = delta * delta
    yp1 = y + 1.0
    psi = math.sqrt(d2 * d2 + 2.0 * d2 * (y - 1.0) + yp1 * yp1)
    first = yp1 * (psi - d2)
    # log of a ratio, split so that tiny δ² y does not underflow the quotient
    denominator = d2 * (y - 1.0) + yp1 * (psi + yp1)
    log_ratio = math.log(2.0 * d2 * y) - math.log(denominator)
    second = d2 * (y - 1.0) * log_ratio
    return math.pi * y / yp1 ** 3 * (first + second)
