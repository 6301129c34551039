"""Monte Carlo replications of the trajectory experiments.

Four scenarios share one pipeline: two oscillators start in the double
vacuum (two coherent spin states of opposite orientation), an optional
entangling pulse measures ``X1 - X2`` and ``P1 + P2``, the state decoheres
while a resonant drive displaces one oscillator, and a readout pulse records
the trajectory endpoint relative to the conditional prediction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import EprReport, EnsembleStats, ensemble_stats, epr_variance
from .dynamics import (
    DriveConfig,
    OscillatorModel,
    decohere,
    drive_displacement,
    oscillator_propagator,
)
from .errors import ConfigError, InfeasibleTarget, InvalidArgument
from .gaussian import (
    VACUUM_VARIANCE,
    GaussianState,
    QuadratureCombination,
    displace,
    vacuum_state,
)
from .measurement import MeasurementChannel, qnd_pulse, sample_outcome

SCENARIOS = (
    "uncorrelated_trajectory",
    "entangled_trajectory",
    "epr_decay",
    "mass_sign_comparison",
)
KAPPA_MAX = 1e4
KAPPA_XTOL = 1e-14

RELATIVE_POSITION = QuadratureCombination.relative_position()
MOMENTUM_SUM = QuadratureCombination.momentum_sum()
EPR_ROWS = np.array([RELATIVE_POSITION.c, MOMENTUM_SUM.c])


@dataclass(frozen=True)
class PulseConfig:
    """Light pulse settings. ``kappa=None`` means: entangling pulse solved
    from the target EPR variance, readout pulse ideal (noiseless)."""

    kappa: Optional[float] = None
    meter_variance: float = VACUUM_VARIANCE
    efficiency: float = 1.0

    def __post_init__(self):
        if self.kappa is not None and not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise ConfigError(f"pulse kappa must be finite and >= 0, got {self.kappa}")
        if self.meter_variance < VACUUM_VARIANCE:
            raise ConfigError(f"meter_variance must be >= 0.5, got {self.meter_variance}")
        if not 0 < self.efficiency <= 1:
            raise ConfigError(f"efficiency must be in (0, 1], got {self.efficiency}")

    def channels(self, kappa: float) -> list[MeasurementChannel]:
        return [
            MeasurementChannel(c, kappa, self.meter_variance, self.efficiency)
            for c in (RELATIVE_POSITION, MOMENTUM_SUM)
        ]


def _default_grid() -> tuple[float, ...]:
    return tuple(float(t) for t in np.linspace(0.0, 1.0, 50))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    n_runs: int = 10_000
    seed: int = 0
    drive: DriveConfig = field(default_factory=DriveConfig)
    entangle: PulseConfig = field(default_factory=PulseConfig)
    readout: PulseConfig = field(default_factory=PulseConfig)
    gamma: float = 0.0
    bath_variance: float = VACUUM_VARIANCE
    omega: float = 2 * math.pi
    time_grid: tuple[float, ...] = field(default_factory=_default_grid)
    target_delta_epr: Optional[float] = 1.4

    def __post_init__(self):
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if isinstance(self.n_runs, bool) or not isinstance(self.n_runs, int) or self.n_runs < 1:
            raise ConfigError(f"n_runs must be an integer >= 1, got {self.n_runs!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.bath_variance < VACUUM_VARIANCE:
            raise ConfigError(f"bath_variance must be >= 0.5, got {self.bath_variance}")
        if not self.time_grid:
            raise ConfigError("time_grid must not be empty")
        if any(b <= a for a, b in zip(self.time_grid, self.time_grid[1:])):
            raise ConfigError("time_grid must be strictly increasing")
        if self.drive.target_mode > 1:
            raise ConfigError(f"drive target_mode must be 0 or 1, got {self.drive.target_mode}")
        if self.target_delta_epr is not None and not math.isfinite(self.target_delta_epr):
            raise ConfigError("target_delta_epr must be finite")
        if self.entangle.kappa is None and self.target_delta_epr is None:
            if self.scenario != "uncorrelated_trajectory":
                raise ConfigError("set either entangle.kappa or target_delta_epr")

    def mode_models(self) -> list[OscillatorModel]:
        return [OscillatorModel(self.omega, self.gamma, self.bath_variance)] * 2


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    config: ScenarioConfig
    kappa_entangle: Optional[float]
    epr_times: np.ndarray
    epr: list[EprReport]
    stats: Optional[EnsembleStats] = None
    endpoints: Optional[np.ndarray] = None
    series: dict = field(default_factory=dict)

    @property
    def delta_epr(self) -> np.ndarray:
        return np.array([e.delta_epr for e in self.epr])


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Independent substream for one run, fixed by ``(seed, run)`` alone."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run,)))


def entangled_state(
    kappa: float, pulse: PulseConfig, rng: np.random.Generator | int | None = 0
) -> tuple[np.ndarray, GaussianState]:
    """Double vacuum after the entangling pulse; returns (readouts, state)."""
    record, state = qnd_pulse(vacuum_state(2), pulse.channels(kappa), rng)
    return record.values[0], state


def delta_epr_after_pulse(kappa: float, pulse: PulseConfig) -> float:
    # the conditional covariance does not depend on the outcome
    return epr_variance(entangled_state(kappa, pulse, 0)[1]).delta_epr


def solve_entangling_kappa(
    target: float,
    pulse: PulseConfig,
    kappa_max: float = KAPPA_MAX,
    xtol: float = KAPPA_XTOL,
) -> float:
    """Bisection for the coupling whose post-pulse EPR variance equals ``target``.

    The map is monotone decreasing from 2 at ``kappa = 0``.
    """
    top = delta_epr_after_pulse(0.0, pulse)
    if target > top or target <= 0:
        raise InfeasibleTarget(f"target EPR variance {target} outside (0, {top}]")
    if target == top:
        return 0.0
    if delta_epr_after_pulse(kappa_max, pulse) > target:
        raise InfeasibleTarget(
            f"target EPR variance {target} needs kappa > {kappa_max} with "
            f"meter_variance={pulse.meter_variance}, efficiency={pulse.efficiency}"
        )
    lo, hi = 0.0, 1.0
    while delta_epr_after_pulse(hi, pulse) > target:
        lo, hi = hi, min(2 * hi, kappa_max)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, hi) or mid in (lo, hi):
            break
        if delta_epr_after_pulse(mid, pulse) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _entangling_kappa(config: ScenarioConfig) -> float:
    if config.entangle.kappa is not None:
        return config.entangle.kappa
    return solve_entangling_kappa(config.target_delta_epr, config.entangle)


def _readout(state: GaussianState, pulse: PulseConfig, rng: np.random.Generator) -> np.ndarray:
    """Estimates of ``(X1 - X2, P1 + P2)`` from the readout pulse."""
    if pulse.kappa is None:
        return sample_outcome(state, EPR_ROWS, np.zeros((2, 2)), rng)
    channels = pulse.channels(pulse.kappa)
    record, _ = qnd_pulse(state, channels, rng)
    if pulse.kappa == 0:
        return record.values[0]
    return np.array([ch.estimate(v) for ch, v in zip(channels, record.values[0])])


def trajectory_endpoint(config: ScenarioConfig, kappa_entangle: float, run: int) -> np.ndarray:
    """One run: entangle, decohere and drive over the window, read out.

    The endpoint is the readout minus the conditional prediction of
    ``(X1 - X2, P1 + P2)`` available before the drive, so its mean is the
    drive displacement and its spread is the trajectory uncertainty.
    """
    rng = run_rng(config.seed, run)
    state = vacuum_state(2)
    if kappa_entangle > 0:
        _, state = qnd_pulse(state, config.entangle.channels(kappa_entangle), rng)
    state = decohere(state, config.mode_models(), config.drive.duration)
    prediction = EPR_ROWS @ state.mean
    state = displace(state, drive_displacement(config.drive, 2))
    return _readout(state, config.readout, rng) - prediction


def _map_runs(fn, n_runs: int, workers: int) -> np.ndarray:
    if workers <= 1:
        return np.array([fn(i) for i in range(n_runs)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(n_runs), chunksize=256)))


def _trajectory_report(config: ScenarioConfig, kappa: float, workers: int) -> ScenarioReport:
    endpoints = _map_runs(lambda i: trajectory_endpoint(config, kappa, i), config.n_runs, workers)
    tau = config.drive.duration
    start = vacuum_state(2)
    if kappa > 0:
        start = entangled_state(kappa, config.entangle, 0)[1]
    end = decohere(start, config.mode_models(), tau)
    stats = None
    if config.n_runs >= 2:
        paths = np.stack([np.zeros_like(endpoints), endpoints], axis=1)
        stats = ensemble_stats(paths, times=[0.0, tau])
    return ScenarioReport(
        config=config,
        kappa_entangle=kappa,
        epr_times=np.array([0.0, tau]),
        epr=[epr_variance(start), epr_variance(end)],
        stats=stats,
        endpoints=endpoints,
    )


def run_uncorrelated_trajectory(config: ScenarioConfig, workers: int = 1) -> ScenarioReport:
    return _trajectory_report(config, 0.0, workers)


def run_entangled_trajectory(config: ScenarioConfig, workers: int = 1) -> ScenarioReport:
    return _trajectory_report(config, _entangling_kappa(config), workers)


def run_epr_decay(config: ScenarioConfig, workers: int = 1) -> ScenarioReport:
    """EPR variance of the freshly entangled pair relaxing on the time grid."""
    kappa = _entangling_kappa(config)
    _, state = entangled_state(kappa, config.entangle, config.seed)
    models = config.mode_models()
    times = np.array(config.time_grid)
    reports = [epr_variance(decohere(state, models, t - times[0])) for t in times]
    series = {
        "t": times,
        "var_x_minus": np.array([r.var_x_minus for r in reports]),
        "var_p_plus": np.array([r.var_p_plus for r in reports]),
        "delta_epr": np.array([r.delta_epr for r in reports]),
    }
    return ScenarioReport(config, kappa, times, reports, series=series)


def run_mass_sign_comparison(config: ScenarioConfig, workers: int = 1) -> ScenarioReport:
    """Relative-coordinate spread after conditioning, for a reference oscillator
    of positive and of negative frequency.

    The reported variance is that of the canonical relative coordinate
    ``(X1 - X2) / sqrt(2)`` (vacuum value 1/2).
    """
    kappa = _entangling_kappa(config)
    _, state = entangled_state(kappa, config.entangle, config.seed)
    times = np.array(config.time_grid)
    unit = RELATIVE_POSITION.unit()
    series = {"t": times}
    eprs = {}
    for name, sign in (("pos", 1.0), ("neg", -1.0)):
        models = [OscillatorModel(config.omega), OscillatorModel(sign * config.omega)]
        var = np.empty(times.size)
        for i, t in enumerate(times):
            s = oscillator_propagator(t, models).s
            var[i] = unit @ s @ state.cov @ s.T @ unit
        series[f"var_rel_{name}"] = var
    epr = epr_variance(state)
    return ScenarioReport(config, kappa, np.array([0.0]), [epr], series=series)


RUNNERS = {
    "uncorrelated_trajectory": run_uncorrelated_trajectory,
    "entangled_trajectory": run_entangled_trajectory,
    "epr_decay": run_epr_decay,
    "mass_sign_comparison": run_mass_sign_comparison,
}


def run_scenario(config: ScenarioConfig, workers: int = 1) -> ScenarioReport:
    if workers < 1:
        raise InvalidArgument(f"workers must be >= 1, got {workers}")
    return RUNNERS[config.scenario](config, workers=workers)
