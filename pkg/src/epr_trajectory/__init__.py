"""Gaussian simulation of back-action-evading trajectory measurements.

Two oscillators, one of them with negative effective mass, are entangled by
a QND measurement of ``X1 - X2`` and ``P1 + P2``; the relative trajectory is
then known below the standard quantum limit.
"""

__version__ = "0.1.0"

from .analysis import EprReport, EnsembleStats, SqlBenchmark, ensemble_stats, epr_variance, sql_benchmark
from .dynamics import (
    DriveConfig,
    FreeParticleModel,
    OscillatorModel,
    SpinEnsembleModel,
    decohere,
    drive_displacement,
    free_propagator,
    oscillator_drift,
    oscillator_propagator,
    spin_to_canonical,
)
from .errors import (
    ConfigError,
    EprTrajectoryError,
    InfeasibleTarget,
    InvalidArgument,
    NumericalFailure,
    StepSizeError,
)
from .gaussian import (
    GaussianState,
    QuadratureCombination,
    QuadratureIndex,
    SymplecticMatrix,
    apply_symplectic,
    displace,
    functional_stats,
    vacuum_state,
)
from .measurement import (
    ContinuousModel,
    MeasurementChannel,
    MeasurementRecord,
    condition_on_outcome,
    continuous_condition,
    continuous_qnd_model,
    qnd_pulse,
    sample_outcome,
)
from .scenarios import PulseConfig, ScenarioConfig, ScenarioReport, run_scenario
