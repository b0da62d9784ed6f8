"""Precoder/combiner design, spectral efficiency, and scenario sweeps.

The hybrid architecture splits each side into a constant-modulus analog
stage and a small digital stage.  Full-digital benchmarks are represented
with an identity analog stage so every scheme flows through the same
spectral-efficiency evaluation.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .beam import BeamParams, airy_beam_vector
from .channel import (
    ChannelMatrix,
    apply_calibration,
    calibrate,
    gcm_channel,
    wcm_channel,
)
from .codebook import (
    SamplingPlan,
    build_exhaustive_codebook,
    build_hierarchical_codebooks,
    build_low_complexity_codebooks,
)
from .scenario import BlockageGeometry, ScenarioConfig
from .search import (
    SearchResult,
    TrainingConfig,
    exhaustive_search,
    farfield_steering_search,
    hierarchical_search,
    low_complexity_search,
    nearfield_focusing_search,
)

__all__ = [
    "IllConditionedNoiseWarning",
    "Beamformers",
    "SvdBeamformers",
    "CombinerDecomposition",
    "BeamformingScheme",
    "SweptVariable",
    "SweepSpec",
    "SweepRow",
    "SWEEP_COLUMNS",
    "ChannelSet",
    "calibrated_wave_channels",
    "effective_channel",
    "svd_precoder_combiner",
    "decompose_combiner",
    "spectral_efficiency",
    "full_digital_beamformers",
    "airy_beamformers",
    "build_scheme_beamformers",
    "noise_for_target_se",
    "run_sweep",
]


class IllConditionedNoiseWarning(RuntimeWarning):
    """Combined noise covariance needed a pseudo-inverse."""


def effective_channel(channel: ChannelMatrix, analog_precoder: np.ndarray) -> np.ndarray:
    """Channel seen by the digital precoder: H @ F_analog, [N_r x L_t]."""
    h = channel.entries
    f_a = np.asarray(analog_precoder, dtype=complex)
    if f_a.ndim == 1:
        f_a = f_a[:, None]
    if h.shape[1] != f_a.shape[0]:
        raise ValueError("analog precoder rows must match channel columns")
    return h @ f_a


@dataclass(frozen=True)
class SvdBeamformers:
    """Top-singular-space digital precoder and the matching ideal combiner."""

    digital_precoder: np.ndarray   # [L_t x N_s]
    optimal_combiner: np.ndarray   # [N_r x N_s]
    singular_values: np.ndarray
    rank_deficient: bool


def svd_precoder_combiner(effective: np.ndarray, num_streams: int,
                          analog_precoder: np.ndarray | None = None) -> SvdBeamformers:
    """Digital precoder and ideal combiner from the effective channel's SVD.

    The digital precoder takes the top-`num_streams` right singular vectors,
    rescaled so the composite precoder carries total power `num_streams`
    (computed against `analog_precoder` when given, else assuming
    orthonormal analog columns).  Streams beyond the matrix rank are
    zero-padded and flagged.
    """
    eff = np.asarray(effective, dtype=complex)
    if eff.ndim != 2:
        raise ValueError("effective channel must be a matrix")
    if num_streams < 1 or num_streams > min(eff.shape):
        raise ValueError("num_streams must lie in [1, min(N_r, L_t)]")
    u, s, vh = np.linalg.svd(eff, full_matrices=False)
    tol = max(eff.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    live = min(rank, num_streams)

    f_bb = np.zeros((eff.shape[1], num_streams), dtype=complex)
    w_opt = np.zeros((eff.shape[0], num_streams), dtype=complex)
    f_bb[:, :live] = vh.conj().T[:, :live]
    w_opt[:, :live] = u[:, :live]

    composite = f_bb if analog_precoder is None else np.asarray(analog_precoder) @ f_bb
    norm = np.linalg.norm(composite)
    if norm > 0:
        f_bb = f_bb * (math.sqrt(num_streams) / norm)
    return SvdBeamformers(f_bb, w_opt, s[:num_streams].copy(), live < num_streams)


@dataclass(frozen=True)
class CombinerDecomposition:
    analog_combiner: np.ndarray    # [N_r x L_r], constant modulus
    digital_combiner: np.ndarray   # [L_r x N_s]
    residual: float                # Frobenius gap of the least-squares fit


def decompose_combiner(optimal_combiner: np.ndarray, num_rx: int,
                       num_chains: int) -> CombinerDecomposition:
    """Split an ideal combiner into constant-modulus analog x digital stages.

    Analog columns take the elementwise phases of the ideal combiner
    (optimal for a single column); the digital stage is the least-squares
    fit to the ideal combiner, renormalized afterwards so the composite
    combiner carries total power num_streams.
    """
    w_opt = np.asarray(optimal_combiner, dtype=complex)
    if w_opt.ndim == 1:
        w_opt = w_opt[:, None]
    num_streams = w_opt.shape[1]
    if w_opt.shape[0] != num_rx:
        raise ValueError("combiner rows must equal num_rx")
    if num_chains < num_streams:
        raise ValueError("need at least as many receive chains as streams")

    scale = 1.0 / math.sqrt(num_rx)
    w_rf = np.full((num_rx, num_chains), scale, dtype=complex)
    phases = np.where(np.abs(w_opt) > 0, w_opt / np.where(np.abs(w_opt) > 0, np.abs(w_opt), 1.0), 1.0)
    w_rf[:, :num_streams] = scale * phases

    w_bb, *_ = np.linalg.lstsq(w_rf, w_opt, rcond=None)
    residual = float(np.linalg.norm(w_opt - w_rf @ w_bb))
    norm = np.linalg.norm(w_rf @ w_bb)
    if norm > 0:
        w_bb = w_bb * (math.sqrt(num_streams) / norm)
    return CombinerDecomposition(w_rf, w_bb, residual)


def spectral_efficiency(precoder: np.ndarray, combiner: np.ndarray,
                        channel: ChannelMatrix, transmit_power: float,
                        noise_power: float) -> float:
    """Log-det rate of the combined link in bits/s/Hz.

    precoder [N_t x N_s] and combiner [N_r x N_s] are composite
    (analog x digital) matrices.  The noise covariance after combining is
    noise_power * W^H W; if it is numerically singular a pseudo-inverse is
    used and an IllConditionedNoiseWarning is emitted.
    """
    f = np.atleast_2d(np.asarray(precoder, dtype=complex))
    w = np.atleast_2d(np.asarray(combiner, dtype=complex))
    if f.shape[0] == 1 and channel.entries.shape[1] != 1:
        f = f.T
    if w.shape[0] == 1 and channel.entries.shape[0] != 1:
        w = w.T
    num_streams = f.shape[1]
    if not (transmit_power > 0 and noise_power > 0):
        raise ValueError("powers must be positive")

    g = w.conj().T @ channel.entries @ f
    r_n = noise_power * (w.conj().T @ w)
    rho_term = (transmit_power / num_streams) * (g @ g.conj().T)
    cond = np.linalg.cond(r_n)
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn("noise covariance ill-conditioned; using pseudo-inverse",
                      IllConditionedNoiseWarning)
        core = np.linalg.pinv(r_n) @ rho_term
    else:
        core = np.linalg.solve(r_n, rho_term)
    sign, logdet = np.linalg.slogdet(np.eye(num_streams) + core)
    return float(logdet / math.log(2.0))


@dataclass(frozen=True)
class Beamformers:
    """Hybrid (or identity-analog full-digital) precoder/combiner set."""

    analog_precoder: np.ndarray    # [N_t x L_t]
    digital_precoder: np.ndarray   # [L_t x N_s]
    analog_combiner: np.ndarray    # [N_r x L_r]
    digital_combiner: np.ndarray   # [L_r x N_s]
    hybrid: bool = True
    rank_deficient: bool = False
    combiner_residual: float = 0.0

    def __post_init__(self):
        f = self.composite_precoder
        n_s = self.num_streams
        norm_sq = float(np.linalg.norm(f) ** 2)
        if norm_sq == 0.0:
            if not self.rank_deficient:
                raise ValueError("zero precoder without rank_deficient flag")
        elif not math.isclose(norm_sq, n_s, rel_tol=1e-9):
            raise ValueError("composite precoder power must equal num_streams")
        if self.hybrid:
            for mat in (self.analog_precoder, self.analog_combiner):
                target = 1.0 / math.sqrt(mat.shape[0])
                if np.max(np.abs(np.abs(mat) - target)) > 1e-12:
                    raise ValueError("analog stages must be constant modulus")

    @property
    def num_streams(self) -> int:
        return self.digital_precoder.shape[1]

    @property
    def composite_precoder(self) -> np.ndarray:
        return self.analog_precoder @ self.digital_precoder

    @property
    def composite_combiner(self) -> np.ndarray:
        return self.analog_combiner @ self.digital_combiner

    def evaluate(self, channel: ChannelMatrix, transmit_power: float,
                 noise_power: float) -> float:
        return spectral_efficiency(self.composite_precoder,
                                   self.composite_combiner,
                                   channel, transmit_power, noise_power)


def full_digital_beamformers(design_channel: ChannelMatrix,
                             num_streams: int = 1) -> Beamformers:
    """Unconstrained SVD beamformers (identity analog stages)."""
    n_r, n_t = design_channel.entries.shape
    svd = svd_precoder_combiner(design_channel.entries, num_streams)
    return Beamformers(
        analog_precoder=np.eye(n_t, dtype=complex),
        digital_precoder=svd.digital_precoder,
        analog_combiner=np.eye(n_r, dtype=complex),
        digital_combiner=svd.optimal_combiner,
        hybrid=False,
        rank_deficient=svd.rank_deficient,
    )


def airy_beamformers(search_result: SearchResult,
                     design_channel: ChannelMatrix,
                     num_streams: int = 1,
                     num_rx_chains: int | None = None) -> Beamformers:
    """Hybrid beamformers around a searched analog beam.

    The analog precoder is the searched vector; the digital stages come
    from the SVD of the design channel seen through it, with the combiner
    split into constant-modulus analog x digital via phase extraction.
    """
    f_rf = search_result.selected_vector.weights[:, None]
    if num_streams > f_rf.shape[1]:
        raise ValueError("single searched beam supports one stream")
    chains = num_streams if num_rx_chains is None else num_rx_chains
    eff = effective_channel(design_channel, f_rf)
    svd = svd_precoder_combiner(eff, num_streams, analog_precoder=f_rf)
    dec = decompose_combiner(svd.optimal_combiner, design_channel.entries.shape[0],
                             chains)
    return Beamformers(
        analog_precoder=f_rf,
        digital_precoder=svd.digital_precoder,
        analog_combiner=dec.analog_combiner,
        digital_combiner=dec.digital_combiner,
        hybrid=True,
        rank_deficient=svd.rank_deficient,
        combiner_residual=dec.residual,
    )


class BeamformingScheme(enum.Enum):
    """Schemes reported in sweep output (searched, plus benchmarks)."""

    EXHAUSTIVE = "exhaustive"
    HIERARCHICAL = "hierarchical"
    LOW_COMPLEXITY = "low_complexity"
    FARFIELD_STEERING = "farfield"
    NEARFIELD_FOCUSING = "nearfield"
    PERFECT_CSI = "perfect_csi"
    NON_BLOCKED = "non_blocked"
    NLOS_ONLY = "nlos_only"


_SEARCHED_SCHEMES = (
    BeamformingScheme.EXHAUSTIVE,
    BeamformingScheme.HIERARCHICAL,
    BeamformingScheme.LOW_COMPLEXITY,
    BeamformingScheme.FARFIELD_STEERING,
    BeamformingScheme.NEARFIELD_FOCUSING,
)


def build_scheme_beamformers(scheme: BeamformingScheme,
                             search_result: SearchResult | None = None,
                             design_channel: ChannelMatrix | None = None,
                             non_blocked_channel: ChannelMatrix | None = None,
                             num_streams: int = 1) -> Beamformers:
    """Assemble the beamformers a given scheme would deploy.

    Searched schemes wrap the searched beam with a digital stage designed
    on the non-blocked channel (or `design_channel` when supplied, e.g. to
    study blocked-channel design).  Benchmarks are full-digital SVD:
    perfect CSI on `design_channel`, the non-blocked precoder on
    `non_blocked_channel`.
    """
    if scheme in _SEARCHED_SCHEMES:
        if search_result is None:
            raise ValueError("searched scheme requires a search result")
        ref = design_channel if design_channel is not None else non_blocked_channel
        if ref is None:
            raise ValueError("searched scheme requires a design channel")
        return airy_beamformers(search_result, ref, num_streams)
    if scheme is BeamformingScheme.PERFECT_CSI:
        if design_channel is None:
            raise ValueError("perfect CSI requires the realized channel")
        return full_digital_beamformers(design_channel, num_streams)
    if scheme in (BeamformingScheme.NON_BLOCKED, BeamformingScheme.NLOS_ONLY):
        ref = non_blocked_channel if scheme is BeamformingScheme.NON_BLOCKED else design_channel
        if ref is None:
            raise ValueError(f"{scheme.value} requires its design channel")
        return full_digital_beamformers(ref, num_streams)
    raise ValueError(f"unknown scheme {scheme}")


def noise_for_target_se(channel: ChannelMatrix, transmit_power: float,
                        target_se: float) -> float:
    """Noise power that puts the full-digital single-stream rate at target_se."""
    top = float(np.linalg.svd(channel.entries, compute_uv=False)[0])
    if top == 0.0:
        raise ValueError("channel has no energy")
    return transmit_power * top**2 / (2.0**target_se - 1.0)


class SweptVariable(enum.Enum):
    BLOCKAGE_HEIGHT = "height"
    BLOCKAGE_DISTANCE = "distance"
    OVERHEAD = "overhead"
    TRANSMIT_POWER = "power"


@dataclass(frozen=True)
class SweepSpec:
    swept_variable: SweptVariable
    grid: tuple
    schemes: tuple
    repetitions: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if len(self.grid) == 0:
            raise ValueError("sweep grid must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    sweep_variable: str
    value: float
    scheme: str
    seed: int
    spectral_efficiency_bps_hz: float
    overhead_slots: int
    notes: str = ""


SWEEP_COLUMNS = ("sweep_variable", "value", "scheme", "seed",
                 "spectral_efficiency_bps_hz", "overhead_slots", "notes")


@dataclass(frozen=True)
class ChannelSet:
    """Blocked channel, its unblocked reference, and optional multipath-only part."""

    blocked: ChannelMatrix
    non_blocked: ChannelMatrix
    nlos_only: ChannelMatrix | None = None


def calibrated_wave_channels(scenario: ScenarioConfig) -> ChannelSet:
    """Wave-model blocked/unblocked pair calibrated onto the ray-model scale."""
    gcm_nb = gcm_channel(scenario, use_blockage=False)
    wcm_nb = wcm_channel(scenario, use_blockage=False)
    cal = calibrate(wcm_nb, gcm_nb)
    non_blocked = apply_calibration(wcm_nb, cal)
    if scenario.blockage is None:
        return ChannelSet(non_blocked, non_blocked, None)
    blocked = apply_calibration(wcm_channel(scenario, use_blockage=True), cal)
    return ChannelSet(blocked, non_blocked, None)


def _point_scenario(scenario: ScenarioConfig, variable: SweptVariable,
                    value: float) -> ScenarioConfig:
    if variable is SweptVariable.BLOCKAGE_HEIGHT:
        if scenario.blockage is None:
            raise ValueError("height sweep requires a blockage in the scenario")
        blk = replace(scenario.blockage, extent_above=float(value))
        return replace(scenario, blockage=blk)
    if variable is SweptVariable.BLOCKAGE_DISTANCE:
        if scenario.blockage is None:
            raise ValueError("distance sweep requires a blockage in the scenario")
        blk = replace(scenario.blockage, distance_from_tx=float(value))
        return replace(scenario, blockage=blk)
    return scenario


def _derive_seed(base_seed: int, point_index: int, repetition: int) -> int:
    seq = np.random.SeedSequence([base_seed, point_index, repetition])
    return int(seq.generate_state(1, np.uint64)[0])


def _run_searched_scheme(scheme: BeamformingScheme, channels: ChannelSet,
                         scenario: ScenarioConfig, plan: SamplingPlan,
                         cfg: TrainingConfig) -> SearchResult:
    if scheme is BeamformingScheme.EXHAUSTIVE:
        return exhaustive_search(build_exhaustive_codebook(plan, scenario),
                                 channels.blocked, cfg)
    if scheme is BeamformingScheme.HIERARCHICAL:
        stage1, factory = build_hierarchical_codebooks(plan, scenario)
        return hierarchical_search(stage1, factory, channels.blocked, cfg)
    if scheme is BeamformingScheme.LOW_COMPLEXITY:
        stage1, factory = build_low_complexity_codebooks(scenario, plan)
        return low_complexity_search(stage1, factory, channels.blocked, cfg)
    if scheme is BeamformingScheme.FARFIELD_STEERING:
        return farfield_steering_search(channels.blocked, cfg, scenario, plan)
    if scheme is BeamformingScheme.NEARFIELD_FOCUSING:
        return nearfield_focusing_search(channels.blocked, cfg, scenario)
    raise ValueError(f"{scheme} is not a searched scheme")


def _beam_from_trace_prefix(result: SearchResult, budget: int):
    """(beam params index, slots used) for the best beam within a slot budget."""
    used = min(budget, len(result.trace))
    if used == 0:
        raise ValueError("budget must allow at least one slot")
    best = max(result.trace[:used], key=lambda e: e.power)
    return best, used


def _scheme_row(scheme: BeamformingScheme, channels: ChannelSet,
                scenario: ScenarioConfig, plan: SamplingPlan | None,
                cfg: TrainingConfig, num_streams: int):
    """(spectral efficiency, overhead, notes) for one scheme at one point."""
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IllConditionedNoiseWarning)
        if scheme in _SEARCHED_SCHEMES:
            if plan is None:
                raise ValueError("searched schemes require a sampling plan")
            result = _run_searched_scheme(scheme, channels, scenario, plan, cfg)
            bf = build_scheme_beamformers(
                scheme, search_result=result,
                non_blocked_channel=channels.non_blocked,
                num_streams=num_streams)
            se = bf.evaluate(channels.blocked, cfg.transmit_power, cfg.noise_power)
            overhead = result.overhead
        elif scheme is BeamformingScheme.PERFECT_CSI:
            bf = build_scheme_beamformers(scheme, design_channel=channels.blocked,
                                          num_streams=num_streams)
            se = bf.evaluate(channels.blocked, cfg.transmit_power, cfg.noise_power)
            overhead = 0
        elif scheme is BeamformingScheme.NON_BLOCKED:
            bf = build_scheme_beamformers(scheme,
                                          non_blocked_channel=channels.non_blocked,
                                          num_streams=num_streams)
            se = bf.evaluate(channels.blocked, cfg.transmit_power, cfg.noise_power)
            overhead = 0
        elif scheme is BeamformingScheme.NLOS_ONLY:
            if channels.nlos_only is None:
                raise ValueError("nlos_only scheme needs a multipath component")
            bf = build_scheme_beamformers(scheme, design_channel=channels.nlos_only,
                                          num_streams=num_streams)
            se = bf.evaluate(channels.nlos_only, cfg.transmit_power, cfg.noise_power)
            overhead = 0
        else:
            raise ValueError(f"unknown scheme {scheme}")
    if bf.rank_deficient:
        notes.append("rank_deficient")
    if any(issubclass(w.category, IllConditionedNoiseWarning) for w in caught):
        notes.append("ill_conditioned_noise")
    return se, overhead, ";".join(notes)


def _overhead_rows(spec: SweepSpec, channels: ChannelSet,
                   scenario: ScenarioConfig, plan: SamplingPlan,
                   cfg_base: TrainingConfig, num_streams: int, rep_seed: int):
    """Best-so-far spectral efficiency under a training-slot budget.

    Each scheme's search runs once per repetition; a budget row reports the
    best spectral efficiency achievable by stopping at or before that many
    slots (running maximum, so the envelope is monotone non-decreasing).
    """
    rows = []
    cfg = replace(cfg_base, rng_seed=rep_seed)
    for scheme in spec.schemes:
        if scheme not in _SEARCHED_SCHEMES:
            raise ValueError("overhead sweep applies to searched schemes only")
        result = _run_searched_scheme(scheme, channels, scenario, plan, cfg)
        se_cache: dict = {}
        best_so_far = -math.inf
        for value in spec.grid:
            budget = int(value)
            entry, used = _beam_from_trace_prefix(result, budget)
            key = (entry.curving, entry.focus_distance, entry.focus_angle)
            if key not in se_cache:
                selected = airy_beam_vector(BeamParams(*key), scenario.tx,
                                            scenario.carrier)
                sub = SearchResult(result.scheme, selected.params, selected,
                                   result.trace[:used])
                bf = build_scheme_beamformers(
                    scheme, search_result=sub,
                    non_blocked_channel=channels.non_blocked,
                    num_streams=num_streams)
                se_cache[key] = bf.evaluate(channels.blocked, cfg.transmit_power,
                                            cfg.noise_power)
            best_so_far = max(best_so_far, se_cache[key])
            rows.append(SweepRow(spec.swept_variable.value, float(value),
                                 scheme.value, rep_seed, best_so_far, used))
    return rows


def run_sweep(spec: SweepSpec, scenario: ScenarioConfig,
              plan: SamplingPlan | None, cfg: TrainingConfig,
              channel_builder=None, num_streams: int = 1) -> list:
    """Long-format sweep rows: one per (grid value, scheme, repetition).

    channel_builder maps a per-point ScenarioConfig to a ChannelSet; the
    default builds calibrated wave-model channels.  Seeds derive
    deterministically from (base_seed, point index, repetition).
    """
    if channel_builder is None:
        channel_builder = calibrated_wave_channels
    rows = []
    if spec.swept_variable is SweptVariable.OVERHEAD:
        if plan is None:
            raise ValueError("overhead sweep requires a sampling plan")
        channels = channel_builder(scenario)
        for rep in range(spec.repetitions):
            seed = _derive_seed(spec.base_seed, 0, rep)
            rows.extend(_overhead_rows(spec, channels, scenario, plan, cfg,
                                       num_streams, seed))
        return rows

    for i, value in enumerate(spec.grid):
        point = _point_scenario(scenario, spec.swept_variable, value)
        channels = channel_builder(point)
        for rep in range(spec.repetitions):
            seed = _derive_seed(spec.base_seed, i, rep)
            cfg_run = replace(cfg, rng_seed=seed)
            if spec.swept_variable is SweptVariable.TRANSMIT_POWER:
                cfg_run = replace(cfg_run, transmit_power=float(value))
            for scheme in spec.schemes:
                se, overhead, notes = _scheme_row(scheme, channels, point, plan,
                                                  cfg_run, num_streams)
                rows.append(SweepRow(spec.swept_variable.value, float(value),
                                     scheme.value, seed, se, overhead, notes))
    return rows
