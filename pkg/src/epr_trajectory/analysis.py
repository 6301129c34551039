"""EPR variance, the standard-quantum-limit benchmark and ensemble statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .gaussian import GaussianState, QuadratureCombination, functional_stats

EPR_THRESHOLD = 2.0
# Var(X1 - X2) of two uncorrelated minimum-uncertainty states
SQL_TRAJECTORY_VARIANCE = 1.0


@dataclass(frozen=True)
class EprReport:
    var_x_minus: float
    var_p_plus: float
    delta_epr: float
    entangled: bool


def epr_variance(state: GaussianState, pair: tuple[int, int] = (0, 1)) -> EprReport:
    """``Var(X_a - X_b) + Var(P_a + P_b)``; entangled iff strictly below 2."""
    a, b = pair
    if a == b:
        raise InvalidArgument(f"EPR variance needs two distinct modes, got {pair}")
    n = state.n_modes
    if not (0 <= a < n and 0 <= b < n):
        raise InvalidArgument(f"modes {pair} out of range for {n} modes")
    _, vx = functional_stats(state, QuadratureCombination.relative_position(a, b, n))
    _, vp = functional_stats(state, QuadratureCombination.momentum_sum(a, b, n))
    delta = vx + vp
    return EprReport(vx, vp, delta, bool(delta < EPR_THRESHOLD))


@dataclass(frozen=True)
class SqlBenchmark:
    """Vacuum-noise budget of a conventional position measurement at the SQL."""

    system_unit: float = 1.0
    meter_unit: float = 0.5
    backaction_unit: float = 0.5
    trajectory_variance: float = SQL_TRAJECTORY_VARIANCE

    @property
    def total(self) -> float:
        return self.system_unit + self.meter_unit + self.backaction_unit

    @staticmethod
    def beats_sql(delta_epr: float) -> bool:
        # for the back-action evading scheme sub-SQL precision <=> entanglement
        return delta_epr < EPR_THRESHOLD


def sql_benchmark() -> SqlBenchmark:
    return SqlBenchmark()


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    n_runs: int
    times: np.ndarray
    mean_path: np.ndarray
    mean_endpoint: np.ndarray
    std: np.ndarray
    std_ratio: np.ndarray
    std_ratio_to_sql: float
    std_error: np.ndarray


def ensemble_stats(
    trajectories,
    times=None,
    sql_variance: float = SQL_TRAJECTORY_VARIANCE,
) -> EnsembleStats:
    """Summarize measured trajectories of ``(X1 - X2, P1 + P2)``.

    ``trajectories`` is ``(n_runs, 2)`` endpoints or ``(n_runs, n_times, 2)``
    paths. Spreads use the unbiased estimator on the final point and are
    reported per quadrature; ``std_ratio_to_sql`` is the RMS of the two
    quadrature spreads over ``sqrt(sql_variance)``.
    """
    data = np.asarray(trajectories, dtype=float)
    if data.ndim == 2:
        data = data[:, None, :]
    if data.ndim != 3 or data.shape[2] != 2:
        raise InvalidArgument(f"expected (n_runs, [n_times,] 2) data, got {np.shape(trajectories)}")
    n = data.shape[0]
    if n < 2:
        raise InvalidArgument(f"need at least 2 runs for a spread, got {n}")
    times = np.arange(data.shape[1], dtype=float) if times is None else np.asarray(times, float)
    if times.shape != (data.shape[1],):
        raise InvalidArgument("one time stamp per path point required")

    end = data[:, -1, :]
    var = end.var(axis=0, ddof=1)
    std = np.sqrt(var)
    root_sql = np.sqrt(sql_variance)
    return EnsembleStats(
        n_runs=n,
        times=times,
        mean_path=data.mean(axis=0),
        mean_endpoint=end.mean(axis=0),
        std=std,
        std_ratio=std / root_sql,
        std_ratio_to_sql=float(np.sqrt(var.mean()) / root_sql),
        std_error=std / np.sqrt(2.0 * (n - 1)),
    )
