"""
Monte Carlo simulation of the secrecy outage probability.

Trials are simulated in fixed-size blocks. Every block draws from its own
Philox streams keyed by (seed, block index, substream), so the estimate is
the same whatever the number of worker threads and whatever the scenario:
HD and FD, independent and colluding runs with equal seeds see identical
fades and eavesdropper positions.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import stats
from tqdm import tqdm

from .errors import DomainError, EmptyInput
from .params import Duplex, EdModel, Scenario, SystemParams, ValidatedParams, as_validated

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
SEED_MASK = (1 << 64) - 1
CONFIDENCE_LEVEL = 0.95

# Substream ids within a block
STREAM_UE = 0
STREAM_ED_COUNT = 1
STREAM_ED_POSITION = 2
STREAM_ED_BS_FADE = 3
STREAM_ED_UE_FADE = 4
STREAM_SELF_INTERFERENCE = 5


class OutageDefinition(str, Enum):
    """
    Outage test applied to one trial.

    EXACT_CAPACITY: log2(1+γ_BU) - log2(1+γ_E) < ε, i.e. (1+γ_BU) < β(1+γ_E).
    For ε > 0 this is the same as [C_BU - C_E]^+ < ε.
    SNR_RATIO: γ_BU / γ_E < β; no eavesdropper means no outage.
    """
    EXACT_CAPACITY = 'ExactCapacity'
    SNR_RATIO = 'SnrRatio'

    @classmethod
    def parse(cls, value) -> 'OutageDefinition':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('-', '').replace('_', '')
        for member in cls:
            if member.value.lower() == key:
                return member
        aliases = {'exact': cls.EXACT_CAPACITY, 'capacity': cls.EXACT_CAPACITY,
                   'ratio': cls.SNR_RATIO, 'snr': cls.SNR_RATIO}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"Unknown outage definition: {value!r}")


@dataclass(frozen=True)
class EdRealization:
    """Eavesdropper positions in polar coordinates around the BS."""
    r: np.ndarray
    theta: np.ndarray

    @property
    def count(self) -> int:
        return int(self.r.size)

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.r.tolist(), self.theta.tolist()))

    @classmethod
    def from_points(cls, points) -> 'EdRealization':
        arr = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(r=arr[:, 0].copy(), theta=arr[:, 1].copy())


@dataclass(frozen=True)
class TrialDraw:
    """
    Fading gains of one trial.

    Attributes:
        ue_gains: K unit-mean exponential gains |h_{B_k U}|^2
        ed_bs_gains: Per-eavesdropper gains |h_{B_* E_e}|^2
        ed_ue_gains: Per-eavesdropper gains |h_{U E_e}|^2 (FD jamming)
        self_interference: Residual self-interference gain |g_UU|^2, mean λ_UU
    """
    ue_gains: np.ndarray
    ed_bs_gains: np.ndarray
    ed_ue_gains: np.ndarray
    self_interference: float


@dataclass(frozen=True)
class SopEstimate:
    """
    Monte Carlo SOP with a 95% Wilson interval.

    Attributes:
        p_hat: Fraction of trials in outage
        ci_low: Lower end of the Wilson interval
        ci_high: Upper end of the Wilson interval
        n_trials: Number of trials
        seed: 64-bit seed all streams derive from
        outage_def: Outage test used
        n_outages: Number of trials in outage
    """
    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    seed: int
    outage_def: OutageDefinition
    n_outages: int

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.ci_low - slack <= value <= self.ci_high + slack

    def to_dict(self) -> dict:
        return {
            'p_hat': self.p_hat,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'n_trials': self.n_trials,
            'n_outages': self.n_outages,
            'seed': self.seed,
            'outage_def': self.outage_def.value,
        }


def stream(seed: int, block_index: int, substream: int) -> np.random.Generator:
    """
    Counter-based generator for one (seed, block, substream) triple.

    The 128-bit Philox key packs the 64-bit seed above the block index
    shifted left by 8 bits with the substream id in the low byte.
    """
    if not 0 <= substream < 256:
        raise ValueError(f"substream must be in [0, 256), got {substream}")
    key = ((seed & SEED_MASK) << 64) | ((block_index << 8) | substream)
    return np.random.Generator(np.random.Philox(key=key))


def ppp_counts(rho_e: float, R: float, rng: np.random.Generator,
               size: Optional[int] = None):
    """Eavesdropper counts N ~ Poisson(ρ_E π R²), one per trial when ``size`` is given."""
    if not (rho_e >= 0 and math.isfinite(rho_e)):
        raise DomainError(f"rho_e must be a finite real >= 0, got {rho_e!r}")
    if not (R > 0 and math.isfinite(R)):
        raise DomainError(f"R must be a finite real > 0, got {R!r}")
    counts = rng.poisson(rho_e * math.pi * R * R, size=size)
    return int(counts) if size is None else counts


def place_on_disk(n: int, R: float, rng: np.random.Generator) -> EdRealization:
    """Drop ``n`` points uniformly on the disk: r = R sqrt(u), θ = 2π v."""
    uv = rng.random((n, 2))
    return EdRealization(r=R * np.sqrt(uv[:, 0]), theta=2.0 * math.pi * uv[:, 1])


def sample_ppp_disk(rho_e: float, R: float, rng: np.random.Generator) -> EdRealization:
    """Draw a homogeneous PPP of intensity ``rho_e`` on the disk of radius R."""
    return place_on_disk(ppp_counts(rho_e, R, rng), R, rng)


def sample_trial_draw(params, n_eds: int, rng: np.random.Generator) -> TrialDraw:
    """Draw the fading gains of one trial with ``n_eds`` eavesdroppers."""
    vp = as_validated(params)
    return TrialDraw(
        ue_gains=rng.exponential(size=vp.k_antennas),
        ed_bs_gains=rng.exponential(size=n_eds),
        ed_ue_gains=rng.exponential(size=n_eds),
        self_interference=float(vp.lambda_uu * rng.exponential()),
    )


@dataclass(frozen=True)
class BlockDraw:
    """
    Every random quantity of one simulation block.

    Eavesdroppers of all trials are stored back to back; trial i owns
    ``counts[i]`` consecutive entries.
    """
    ue_gains: np.ndarray
    counts: np.ndarray
    eds: EdRealization
    ed_bs_gains: np.ndarray
    ed_ue_gains: np.ndarray
    self_interference: np.ndarray

    @property
    def n_trials(self) -> int:
        return int(self.counts.size)

    @property
    def owner(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_trials), self.counts)

    def trial(self, i: int) -> Tuple[EdRealization, TrialDraw]:
        """Trial ``i`` in the form :func:`trial_outage` takes."""
        start = int(self.counts[:i].sum())
        stop = start + int(self.counts[i])
        realization = EdRealization(r=self.eds.r[start:stop], theta=self.eds.theta[start:stop])
        draw = TrialDraw(
            ue_gains=self.ue_gains[i],
            ed_bs_gains=self.ed_bs_gains[start:stop],
            ed_ue_gains=self.ed_ue_gains[start:stop],
            self_interference=float(self.self_interference[i]),
        )
        return realization, draw


def draw_block(params, seed: int, block_index: int, n: int) -> BlockDraw:
    """
    Draw ``n`` trials of one block.

    Every random quantity is drawn whatever the scenario, so streams line
    up across scenarios for a given seed.
    """
    vp = as_validated(params)
    radius = vp.radius
    counts = ppp_counts(vp.rho_e, radius, stream(seed, block_index, STREAM_ED_COUNT), size=n)
    total = int(counts.sum())
    return BlockDraw(
        ue_gains=stream(seed, block_index, STREAM_UE).exponential(size=(n, vp.k_antennas)),
        counts=counts,
        eds=place_on_disk(total, radius, stream(seed, block_index, STREAM_ED_POSITION)),
        ed_bs_gains=stream(seed, block_index, STREAM_ED_BS_FADE).exponential(size=total),
        ed_ue_gains=stream(seed, block_index, STREAM_ED_UE_FADE).exponential(size=total),
        self_interference=vp.lambda_uu * stream(seed, block_index,
                                                STREAM_SELF_INTERFERENCE).exponential(size=n),
    )


def tas_select(ue_gains) -> Tuple[int, float]:
    """
    Pick the antenna with the strongest user channel.

    Returns:
        (index, gain); ties go to the lowest index

    Raises:
        EmptyInput: If no gains are given
    """
    gains = np.asarray(ue_gains, dtype=float).ravel()
    if gains.size == 0:
        raise EmptyInput("tas_select needs at least one antenna gain")
    index = int(np.argmax(gains))
    return index, float(gains[index])


def _ed_sinr(vp: ValidatedParams, r: np.ndarray, theta: np.ndarray,
             h_bs: np.ndarray, g_ue: np.ndarray) -> np.ndarray:
    """
    Per-eavesdropper SINR; the jamming term only exists for an FD user.

    ``ed_noise`` only switches off the noise of jammed eavesdroppers, the
    interference-limited regime; without jamming the noise always stays.
    """
    alpha = vp.alpha
    signal = vp.pb * h_bs * r ** (-alpha)
    if Duplex.parse(vp.duplex) is Duplex.FULL:
        d_ue2 = np.maximum(r * r + vp.d_bu ** 2 - 2.0 * r * vp.d_bu * np.cos(theta), 0.0)
        interference = vp.pu * g_ue * d_ue2 ** (-0.5 * alpha)
        noise = 1.0 if vp.ed_noise else 0.0
    else:
        interference = 0.0
        noise = 1.0
    return signal / (interference + noise)


def _user_snr(vp: ValidatedParams, max_gain, self_interference):
    si = self_interference if Duplex.parse(vp.duplex) is Duplex.FULL else 0.0
    return vp.pb * max_gain * vp.d_bu ** (-vp.alpha) / (si + 1.0)


def _combine_eds(vp: ValidatedParams, sinr: np.ndarray, owner: np.ndarray, n: int) -> np.ndarray:
    # Colluding eavesdroppers add their SINRs, independent ones count by the best
    gamma_e = np.zeros(n)
    if sinr.size == 0:
        return gamma_e
    if EdModel.parse(vp.ed_model) is EdModel.COLLUDING:
        return np.bincount(owner, weights=sinr, minlength=n)
    np.maximum.at(gamma_e, owner, sinr)
    return gamma_e


def _in_outage(vp: ValidatedParams, gamma_bu, gamma_e, outage_def: OutageDefinition):
    if outage_def is OutageDefinition.SNR_RATIO:
        return gamma_bu < vp.beta * gamma_e
    return 1.0 + gamma_bu < vp.beta * (1.0 + gamma_e)


def trial_outage(params, realization: EdRealization, draw: TrialDraw,
                 outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY) -> bool:
    """
    Decide whether one trial is in secrecy outage.

    Independent eavesdroppers are represented by the strongest SINR,
    colluding ones by the sum of SINRs; with nobody listening γ_E = 0.
    """
    vp = as_validated(params)
    outage_def = OutageDefinition.parse(outage_def)
    if draw.ed_bs_gains.size != realization.count or draw.ed_ue_gains.size != realization.count:
        raise ValueError("draw and realization disagree on the number of eavesdroppers")

    _, max_gain = tas_select(draw.ue_gains)
    gamma_bu = _user_snr(vp, max_gain, draw.self_interference)
    with np.errstate(divide='ignore'):
        sinr = _ed_sinr(vp, realization.r, realization.theta,
                        draw.ed_bs_gains, draw.ed_ue_gains)
    gamma_e = _combine_eds(vp, sinr, np.zeros(realization.count, dtype=int), 1)
    return bool(_in_outage(vp, gamma_bu, gamma_e[0], outage_def))


def block_outages(params, block: BlockDraw,
                  outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY) -> np.ndarray:
    """Vectorised :func:`trial_outage` over every trial of ``block``."""
    vp = as_validated(params)
    outage_def = OutageDefinition.parse(outage_def)
    gamma_bu = _user_snr(vp, block.ue_gains.max(axis=1), block.self_interference)
    with np.errstate(divide='ignore', invalid='ignore'):
        sinr = _ed_sinr(vp, block.eds.r, block.eds.theta, block.ed_bs_gains, block.ed_ue_gains)
    gamma_e = _combine_eds(vp, sinr, block.owner, block.n_trials)
    return _in_outage(vp, gamma_bu, gamma_e, outage_def)


def simulate_block(params, seed: int, block_index: int, n: int,
                   outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY) -> int:
    """Simulate ``n`` trials of one block and count outages."""
    block = draw_block(params, seed, block_index, n)
    return int(np.count_nonzero(block_outages(params, block, outage_def)))


def wilson_interval(n_outages: int, n_trials: int,
                    confidence: float = CONFIDENCE_LEVEL) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    ci = stats.binomtest(n_outages, n_trials).proportion_ci(
        confidence_level=confidence, method='wilson')
    return float(ci.low), float(ci.high)


def estimate_sop(params: Union[SystemParams, ValidatedParams],
                 scenario: Optional[Scenario] = None,
                 n_trials: int = 100000,
                 seed: int = 0,
                 outage_def: OutageDefinition = OutageDefinition.EXACT_CAPACITY,
                 threads: Optional[int] = None,
                 show_progress: bool = False) -> SopEstimate:
    """
    Estimate the SOP by direct simulation.

    Args:
        params: Parameter set
        scenario: Overrides the duplex / ed_model fields when given
        n_trials: Number of trials, >= 1
        seed: 64-bit seed
        outage_def: Outage test
        threads: Worker threads (default: available CPUs); does not
            change the result
        show_progress: Show a tqdm progress bar over blocks

    Returns:
        SopEstimate
    """
    if isinstance(params, ValidatedParams):
        params = params.params
    if scenario is not None:
        params = params.with_scenario(scenario)
    vp = as_validated(params)
    outage_def = OutageDefinition.parse(outage_def)
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    if not 0 <= seed <= SEED_MASK:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")

    n_blocks = (n_trials + BLOCK_SIZE - 1) // BLOCK_SIZE
    sizes = [min(BLOCK_SIZE, n_trials - b * BLOCK_SIZE) for b in range(n_blocks)]
    workers = max(1, threads or os.cpu_count() or 1)
    logger.debug("Simulating %d trials in %d blocks on %d threads (%s, seed=%d)",
                 n_trials, n_blocks, workers, vp.scenario.label, seed)

    outages = 0
    progress = tqdm(total=n_blocks, desc=vp.scenario.label, unit='block') if show_progress else None
    if workers == 1 or n_blocks == 1:
        for b, size in enumerate(sizes):
            outages += simulate_block(vp, seed, b, size, outage_def)
            if progress is not None:
                progress.update(1)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(simulate_block, vp, seed, b, size, outage_def)
                       for b, size in enumerate(sizes)]
            for future in as_completed(futures):
                outages += future.result()
                if progress is not None:
                    progress.update(1)
    if progress is not None:
        progress.close()

    p_hat = outages / n_trials
    low, high = wilson_interval(outages, n_trials)
    return SopEstimate(
        p_hat=p_hat,
        ci_low=min(low, p_hat),
        ci_high=max(high, p_hat),
        n_trials=n_trials,
        seed=seed,
        outage_def=outage_def,
        n_outages=outages,
    )
