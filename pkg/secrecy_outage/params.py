"""
System parameters, scenario labels and unit conventions.

Powers are configured in dB and converted to linear ratios against a unit
noise variance, so P_B/σ_n² = 50 dB becomes the linear power 1e5.
"""

import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from .errors import ParameterError

logger = logging.getLogger(__name__)

# Largest denominator accepted when α is expressed as p/q
MAX_ALPHA_DENOMINATOR = 100
BETA_EPSILON_RTOL = 1e-12
ALPHA_RATIONAL_TOL = 1e-12


class Duplex(str, Enum):
    """Receive mode of the legitimate user."""
    HALF = 'hd'
    FULL = 'fd'

    @classmethod
    def parse(cls, value: Any) -> 'Duplex':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {'hd': cls.HALF, 'halfduplex': cls.HALF, 'half': cls.HALF,
                   'fd': cls.FULL, 'fullduplex': cls.FULL, 'full': cls.FULL}
        if key not in aliases:
            raise ParameterError([f"Invalid{{duplex}}: expected hd or fd, got {value!r}"])
        return aliases[key]


class EdModel(str, Enum):
    """How eavesdroppers combine what they overhear."""
    INDEPENDENT = 'independent'
    COLLUDING = 'colluding'

    @classmethod
    def parse(cls, value: Any) -> 'EdModel':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {'independent': cls.INDEPENDENT, 'ie': cls.INDEPENDENT,
                   'colluding': cls.COLLUDING, 'ce': cls.COLLUDING}
        if key not in aliases:
            raise ParameterError(
                [f"Invalid{{ed_model}}: expected independent or colluding, got {value!r}"])
        return aliases[key]


@dataclass(frozen=True, order=True)
class Scenario:
    """One of the four {HD, FD} x {independent, colluding} cases."""
    duplex: Duplex
    ed_model: EdModel

    @classmethod
    def all(cls) -> Tuple['Scenario', ...]:
        return tuple(cls(d, e) for d in Duplex for e in EdModel)

    @classmethod
    def parse(cls, text: str) -> 'Scenario':
        """Parse labels such as ``hd-independent`` or ``FD-colluding``."""
        parts = text.replace('_', '-').replace(' ', '-').split('-')
        parts = [p for p in parts if p]
        if len(parts) != 2:
            raise ParameterError([f"Invalid{{scenario}}: cannot parse {text!r}"])
        return cls(Duplex.parse(parts[0]), EdModel.parse(parts[1]))

    @property
    def label(self) -> str:
        return f"{self.duplex.value.upper()}-{self.ed_model.value}"

    @property
    def code(self) -> int:
        """Stable small integer used when deriving per-point seeds."""
        return (0 if self.duplex is Duplex.HALF else 2) + \
            (0 if self.ed_model is EdModel.INDEPENDENT else 1)

    def __str__(self) -> str:
        return self.label


# Units and help text per configurable field, shared by the CLI help.
FIELD_DOCS: Dict[str, Tuple[str, str]] = {
    'k_antennas': ('count', 'number of BS antennas K used for antenna selection'),
    'rho_e': ('1/m^2', 'eavesdropper density inside the disk'),
    'radius': ('m', 'radius R of the eavesdropper disk centred at the BS'),
    'd_bu': ('m', 'BS to user distance, must be below the radius'),
    'alpha': ('dimensionless', 'path loss exponent'),
    'beta': ('ratio', 'target secrecy SNR ratio, beta = 2^epsilon'),
    'epsilon': ('bits/s/Hz', 'target secrecy rate'),
    'pb_over_n0_db': ('dB', 'BS transmit power to noise ratio'),
    'pu_over_n0_db': ('dB', 'user jamming power to noise ratio (FD only)'),
    'lambda_uu_db': ('dB', 'mean residual self-interference gain (FD only)'),
    'duplex': ('hd|fd', 'half-duplex or full-duplex user'),
    'ed_model': ('independent|colluding', 'eavesdropper combining model'),
    'ed_noise': ('bool', 'jammed eavesdroppers also see thermal noise (simulation only)'),
}

# Fields a sweep may vary
NUMERIC_FIELDS = ('k_antennas', 'rho_e', 'radius', 'd_bu', 'alpha', 'beta',
                  'epsilon', 'pb_over_n0_db', 'pu_over_n0_db', 'lambda_uu_db')


def db_to_linear(x_db: float) -> float:
    """Convert a dB value to a linear power ratio."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a positive linear power ratio to dB."""
    return 10.0 * math.log10(x)


def alpha_as_rational(alpha: float,
                      max_denominator: int = MAX_ALPHA_DENOMINATOR) -> Tuple[int, int]:
    """
    Express the path loss exponent as a reduced fraction p/q.

    Args:
        alpha: Path loss exponent
        max_denominator: Largest admissible q

    Returns:
        Tuple (p, q) with gcd(p, q) = 1

    Raises:
        ParameterError: If no fraction with q <= max_denominator matches
            alpha within 1e-12
    """
    frac = Fraction(alpha).limit_denominator(max_denominator)
    if abs(frac.numerator / frac.denominator - alpha) > ALPHA_RATIONAL_TOL * max(1.0, abs(alpha)):
        raise ParameterError([
            f"AlphaRationalMismatch: alpha={alpha!r} has no p/q form with q <= {max_denominator}"
        ])
    return frac.numerator, frac.denominator


@dataclass(frozen=True)
class SystemParams:
    """
    Full description of one deployment.

    Defaults follow the usual simulation setup: unit noise variance,
    P_B/σ_n² = P_U/σ_n² = 50 dB, β = 1 and λ_UU = 0 dB.
    """
    k_antennas: int = 1
    rho_e: float = 0.001
    radius: float = 50.0
    d_bu: float = 10.0
    alpha: float = 2.0
    beta: float = 1.0
    epsilon: float = 0.0
    pb_over_n0_db: float = 50.0
    pu_over_n0_db: float = 50.0
    lambda_uu_db: float = 0.0
    duplex: Duplex = Duplex.HALF
    ed_model: EdModel = EdModel.INDEPENDENT
    ed_noise: bool = True

    @property
    def scenario(self) -> Scenario:
        return Scenario(Duplex.parse(self.duplex), EdModel.parse(self.ed_model))

    def with_scenario(self, scenario: Scenario) -> 'SystemParams':
        return dataclasses.replace(self, duplex=scenario.duplex, ed_model=scenario.ed_model)

    def replace(self, **changes: Any) -> 'SystemParams':
        """
        Copy with some fields changed, keeping beta and epsilon coupled.

        Changing only ``beta`` recomputes ``epsilon`` and vice versa.
        """
        if 'beta' in changes and 'epsilon' not in changes:
            beta = float(changes['beta'])
            changes['epsilon'] = math.log2(beta) if beta > 0 else float('nan')
        elif 'epsilon' in changes and 'beta' not in changes:
            changes['beta'] = 2.0 ** float(changes['epsilon'])
        if 'k_antennas' in changes:
            changes['k_antennas'] = int(round(changes['k_antennas']))
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data['duplex'] = Duplex.parse(self.duplex).value
        data['ed_model'] = EdModel.parse(self.ed_model).value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SystemParams':
        """
        Build parameters from a mapping whose keys are field names.

        Either of ``beta`` / ``epsilon`` may be omitted; the missing one is
        derived from the other. Unknown keys are rejected.
        """
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError([f"UnknownKey{{{key}}}: not a parameter name" for key in unknown])

        values = dict(data)
        if 'beta' in values and 'epsilon' not in values:
            beta = float(values['beta'])
            values['epsilon'] = math.log2(beta) if beta > 0 else float('nan')
        elif 'epsilon' in values and 'beta' not in values:
            values['beta'] = 2.0 ** float(values['epsilon'])
        if 'duplex' in values:
            values['duplex'] = Duplex.parse(values['duplex'])
        if 'ed_model' in values:
            values['ed_model'] = EdModel.parse(values['ed_model'])
        return cls(**values)


@dataclass(frozen=True)
class ValidatedParams:
    """
    Parameters that passed :func:`validate`, plus derived linear quantities.

    Field access falls through to the wrapped :class:`SystemParams`, so
    ``vp.k_antennas`` works as expected.
    """
    params: SystemParams
    pb: float
    pu: float
    lambda_uu: float
    alpha_rational: Optional[Tuple[int, int]] = None

    def __getattr__(self, name: str) -> Any:
        # Only reached for names not defined on this class
        if name == 'params':
            raise AttributeError(name)
        return getattr(self.params, name)

    @property
    def scenario(self) -> Scenario:
        return self.params.scenario

    def to_dict(self) -> Dict[str, Any]:
        return self.params.to_dict()


def validate(params: SystemParams, rational_alpha: bool = False) -> ValidatedParams:
    """
    Check every constraint on a parameter set.

    Args:
        params: Parameters to check
        rational_alpha: Also require alpha to have a p/q form with q <= 100

    Returns:
        ValidatedParams carrying linear power ratios

    Raises:
        ParameterError: Listing every violated constraint
    """
    if isinstance(params, ValidatedParams):
        params = params.params

    violations: List[str] = []

    k = params.k_antennas
    if isinstance(k, bool) or not isinstance(k, (int, float)) or not float(k).is_integer():
        violations.append(f"NotInteger{{k_antennas}}: got {k!r}")
    elif int(k) < 1:
        violations.append(f"NonPositive{{k_antennas}}: need K >= 1, got {k!r}")

    def finite(name: str) -> Optional[float]:
        value = getattr(params, name)
        try:
            value = float(value)
        except (TypeError, ValueError):
            violations.append(f"NotANumber{{{name}}}: got {value!r}")
            return None
        if not math.isfinite(value):
            violations.append(f"NonFinite{{{name}}}: got {value!r}")
            return None
        return value

    rho_e = finite('rho_e')
    if rho_e is not None and rho_e < 0:
        violations.append(f"NonPositive{{rho_e}}: density must be >= 0, got {rho_e!r}")
    for name in ('radius', 'd_bu', 'alpha'):
        value = finite(name)
        if value is not None and value <= 0:
            violations.append(f"NonPositive{{{name}}}: must be > 0, got {value!r}")

    beta = finite('beta')
    epsilon = finite('epsilon')
    if beta is not None and beta < 1:
        violations.append(f"OutOfRange{{beta}}: need beta >= 1, got {beta!r}")
    if epsilon is not None and epsilon < 0:
        violations.append(f"NonPositive{{epsilon}}: need epsilon >= 0, got {epsilon!r}")
    if beta is not None and epsilon is not None:
        expected = 2.0 ** epsilon
        if abs(beta - expected) > BETA_EPSILON_RTOL * expected:
            violations.append(
                f"InconsistentBetaEpsilon: beta={beta!r} but 2^epsilon={expected!r}")

    for name in ('pb_over_n0_db', 'pu_over_n0_db', 'lambda_uu_db'):
        finite(name)

    radius, d_bu = params.radius, params.d_bu
    try:
        if float(d_bu) > 0 and float(radius) > 0 and float(d_bu) >= float(radius):
            violations.append(
                f"Geometry{{d_bu}}: user must lie inside the disk, d_bu={d_bu!r} >= radius={radius!r}")
    except (TypeError, ValueError):
        pass

    try:
        Duplex.parse(params.duplex)
        EdModel.parse(params.ed_model)
    except ParameterError as e:
        violations.extend(e.violations)

    alpha_pq = None
    if rational_alpha and not any('{alpha}' in v for v in violations):
        try:
            alpha_pq = alpha_as_rational(float(params.alpha))
        except ParameterError as e:
            violations.extend(e.violations)

    if violations:
        raise ParameterError(violations)

    clean = dataclasses.replace(
        params,
        k_antennas=int(params.k_antennas),
        duplex=Duplex.parse(params.duplex),
        ed_model=EdModel.parse(params.ed_model),
        ed_noise=bool(params.ed_noise),
    )
    return ValidatedParams(
        params=clean,
        pb=db_to_linear(clean.pb_over_n0_db),
        pu=db_to_linear(clean.pu_over_n0_db),
        lambda_uu=db_to_linear(clean.lambda_uu_db),
        alpha_rational=alpha_pq,
    )


def as_validated(params) -> ValidatedParams:
    """Return ``params`` unchanged if already validated, else validate it."""
    if isinstance(params, ValidatedParams):
        return params
    return validate(params)


def load_params(path: str, overrides: Optional[Dict[str, Any]] = None) -> SystemParams:
    """
    Load parameters from a JSON config file.

    Args:
        path: Path to a JSON object keyed by field name
        overrides: Values that win over the file (e.g. from CLI flags)

    Returns:
        SystemParams (not yet validated)
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ParameterError([f"InvalidConfig: {path} must hold a JSON object"])
    if overrides:
        # An override of only one of beta/epsilon must not clash with the file
        if 'beta' in overrides and 'epsilon' not in overrides:
            data.pop('epsilon', None)
        if 'epsilon' in overrides and 'beta' not in overrides:
            data.pop('beta', None)
        data.update(overrides)
    logger.debug("Loaded parameters from %s", path)
    return SystemParams.from_dict(data)


def save_params(params: SystemParams, path: str) -> str:
    """Write parameters as a JSON config file and return the path."""
    if isinstance(params, ValidatedParams):
        params = params.params
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(params.to_dict(), f, indent=2)
    return path
