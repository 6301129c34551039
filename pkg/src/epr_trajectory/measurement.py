"""QND measurements of joint quadratures and Gaussian conditioning.

A pulse is always simulated as a dilation: every channel gets its own meter
mode, a QND interaction writes the (unit-normalized) system combination onto
the meter position while the meter momentum kicks the conjugate system
combination, the meter passes a beam splitter of transmission ``efficiency``,
and its position is homodyned. Back-action therefore follows from the
symplectic bookkeeping rather than from a separate noise formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import InvalidArgument, NumericalFailure, StepSizeError
from .gaussian import (
    VACUUM_VARIANCE,
    GaussianState,
    QuadratureCombination,
    SymplecticMatrix,
    apply_symplectic,
    is_physical,
    physicality_margin,
    reduce,
    symplectic_form,
    tensor,
)

COND_LIMIT = 1e12
COMMUTE_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementChannel:
    combination: QuadratureCombination
    kappa: float
    meter_variance: float = VACUUM_VARIANCE
    efficiency: float = 1.0

    def __post_init__(self):
        if not self.kappa >= 0 or not np.isfinite(self.kappa):
            raise InvalidArgument(f"coupling must be finite and >= 0, got {self.kappa}")
        if self.meter_variance < VACUUM_VARIANCE:
            raise InvalidArgument(
                f"meter variance must be >= {VACUUM_VARIANCE}, got {self.meter_variance}"
            )
        if not 0 < self.efficiency <= 1:
            raise InvalidArgument(f"efficiency must be in (0, 1], got {self.efficiency}")

    @property
    def effective_meter_variance(self) -> float:
        """Meter noise referred back through the loss, in meter units."""
        eta = self.efficiency
        return self.meter_variance + (1.0 - eta) / eta * VACUUM_VARIANCE

    @property
    def readout_variance(self) -> float:
        """Noise variance of ``estimate()`` in units of ``combination``."""
        if self.kappa == 0:
            return np.inf
        return self.effective_meter_variance * self.combination.norm**2 / self.kappa**2

    def estimate(self, value):
        """Convert a meter readout into an estimate of ``combination . r``."""
        if self.kappa == 0:
            raise InvalidArgument("a channel with zero coupling carries no signal")
        return np.asarray(value) * self.combination.norm / self.kappa


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Readouts, one row per measurement event and one column per channel."""

    values: np.ndarray
    times: np.ndarray
    channels: tuple[int, ...] = ()

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        if values.shape[0] != times.size:
            raise InvalidArgument("one timestamp per measurement event required")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("readouts must be finite")
        if not self.channels:
            object.__setattr__(self, "channels", tuple(range(values.shape[1])))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)

    def __eq__(self, other):
        if not isinstance(other, MeasurementRecord):
            return NotImplemented
        return (
            self.channels == other.channels
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.times, other.times)
        )


@dataclass(frozen=True, eq=False)
class ContinuousModel:
    """Linear Gaussian model for time-continuous monitoring.

    drift ``A`` and diffusion ``D`` per unit time, sensing rows ``C`` and
    readout noise spectral density ``R`` (record ``y dt = C r dt + sqrt(R) dW``).
    """

    drift: np.ndarray
    diffusion: np.ndarray
    sensing: np.ndarray
    readout_noise: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.drift, dtype=float))
        d = np.atleast_2d(np.asarray(self.diffusion, dtype=float))
        c = np.atleast_2d(np.asarray(self.sensing, dtype=float))
        r = np.atleast_2d(np.asarray(self.readout_noise, dtype=float))
        n = a.shape[0]
        if a.shape != (n, n) or d.shape != (n, n) or c.shape[1] != n or n % 2:
            raise InvalidArgument("drift, diffusion and sensing dimensions disagree")
        if r.shape != (c.shape[0],) * 2:
            raise InvalidArgument(f"readout noise must be {c.shape[0]}x{c.shape[0]}")
        if np.abs(d - d.T).max() > 1e-12 or np.linalg.eigvalsh(d)[0] < -1e-12:
            raise InvalidArgument("diffusion must be symmetric positive semidefinite")
        if np.abs(r - r.T).max() > 1e-12 or np.linalg.eigvalsh(r)[0] <= 0:
            raise InvalidArgument("readout noise must be symmetric positive definite")
        omega = symplectic_form(n // 2)
        if not np.any(d) and np.abs(a @ omega + omega @ a.T).max() > 1e-10:
            raise InvalidArgument("diffusion-free drift must generate a symplectic flow")
        for name, v in zip(("drift", "diffusion", "sensing", "readout_noise"), (a, d, c, r)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n_modes(self) -> int:
        return self.drift.shape[0] // 2


def continuous_qnd_model(
    drift: np.ndarray,
    combinations: Sequence[QuadratureCombination],
    rate: float,
    meter_variance: float = VACUUM_VARIANCE,
    efficiency: float = 1.0,
) -> ContinuousModel:
    """Continuous limit of repeated ``qnd_pulse`` calls.

    ``rate`` is the squared coupling per unit time, so a window ``T`` matches a
    single pulse with ``kappa**2 = rate * T``. Sensing rows are the
    unit-normalized combinations; back-action diffusion lands on ``Omega c``.
    """
    if rate <= 0:
        raise InvalidArgument(f"measurement rate must be > 0, got {rate}")
    probe = MeasurementChannel(combinations[0], 0.0, meter_variance, efficiency)
    n = np.asarray(drift).shape[0]
    omega = symplectic_form(n // 2)
    rows = np.array([c.unit() for c in combinations])
    kicks = rows @ omega.T
    diffusion = rate * meter_variance * kicks.T @ kicks
    noise = probe.effective_meter_variance / rate * np.eye(len(combinations))
    return ContinuousModel(drift, diffusion, rows, noise)


def _check_commuting(channels: Sequence[MeasurementChannel], n_modes: int) -> None:
    for i, ch in enumerate(channels):
        if ch.combination.n_modes != n_modes:
            raise InvalidArgument(
                f"channel {i} acts on {ch.combination.n_modes} modes, state has {n_modes}"
            )
        for j in range(i):
            prod = ch.combination.symplectic_product(channels[j].combination)
            if abs(prod) > COMMUTE_TOL * ch.combination.norm * channels[j].combination.norm:
                raise InvalidArgument(
                    f"channels {j} and {i} do not commute (symplectic product {prod:.3g})"
                )


def qnd_interaction(
    channels: Sequence[MeasurementChannel], n_modes: int
) -> SymplecticMatrix:
    """Entangling map on (system, meter_0, meter_1, ...).

    Meter position picks up ``kappa c_hat . r``, system picks up
    ``kappa (Omega c_hat) P_meter``. Channels must commute.
    """
    dim = 2 * (n_modes + len(channels))
    omega = symplectic_form(n_modes)
    s = np.eye(dim)
    for j, ch in enumerate(channels):
        xm, pm = 2 * (n_modes + j), 2 * (n_modes + j) + 1
        unit = ch.combination.unit()
        s[xm, : 2 * n_modes] = ch.kappa * unit
        s[: 2 * n_modes, pm] = ch.kappa * (omega @ unit)
    return SymplecticMatrix(s)


def qnd_pulse(
    state: GaussianState,
    channels: Sequence[MeasurementChannel],
    rng: np.random.Generator | int | None = None,
    time: float = 0.0,
) -> tuple[MeasurementRecord, GaussianState]:
    """Measure commuting combinations with one light pulse.

    Returns the meter readouts (normalized by sqrt(efficiency), in meter
    units; see ``MeasurementChannel.estimate``) and the conditional system
    state.
    """
    channels = list(channels)
    if not channels:
        raise InvalidArgument("at least one channel required")
    n = state.n_modes
    _check_commuting(channels, n)
    rng = np.random.default_rng(rng)

    meters = [
        GaussianState(np.zeros(2), ch.meter_variance * np.eye(2), validate=False)
        for ch in channels
    ]
    joint = apply_symplectic(tensor(state, *meters), qnd_interaction(channels, n))

    # loss on each meter before the homodyne
    k = np.ones(joint.mean.size)
    added = np.zeros(joint.mean.size)
    for j, ch in enumerate(channels):
        sl = slice(2 * (n + j), 2 * (n + j) + 2)
        k[sl] = np.sqrt(ch.efficiency)
        added[sl] = (1.0 - ch.efficiency) * VACUUM_VARIANCE
    cov = k[:, None] * joint.cov * k[None, :] + np.diag(added)
    joint = GaussianState(k * joint.mean, cov, validate=False)

    sel = np.zeros((len(channels), joint.mean.size))
    for j in range(len(channels)):
        sel[j, 2 * (n + j)] = 1.0
    zero = np.zeros((len(channels), len(channels)))
    y = sample_outcome(joint, sel, zero, rng)
    # the homodyned meter itself is left in a singular state; only the
    # conditional state of the remaining modes is meaningful
    posterior = condition_on_outcome(joint, sel, zero, y, require_physical=False)
    system = reduce(posterior, range(n))
    system = GaussianState(system.mean, system.cov)

    eta = np.array([ch.efficiency for ch in channels])
    record = MeasurementRecord(y / np.sqrt(eta), [time])
    return record, system


def _innovation_factor(s: np.ndarray) -> np.ndarray:
    # guard before factorizing so near-singular pulses fail loudly
    eig = np.linalg.eigvalsh(s)
    if eig[0] <= 0 or eig[-1] / eig[0] > COND_LIMIT:
        cond = np.inf if eig[0] <= 0 else eig[-1] / eig[0]
        raise NumericalFailure(f"innovation matrix is singular (condition number {cond:.3e})")
    return np.linalg.cholesky(s)


def _as_rows(c, dim: int) -> np.ndarray:
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape[1] != dim:
        raise InvalidArgument(f"sensing rows have {c.shape[1]} columns, state has {dim}")
    return c


def _as_noise(r, k: int) -> np.ndarray:
    r = np.atleast_2d(np.asarray(r, dtype=float))
    if r.shape != (k, k):
        raise InvalidArgument(f"readout covariance must be {k}x{k}, got {r.shape}")
    if np.abs(r - r.T).max() > 1e-12 * max(1.0, np.abs(r).max()):
        raise InvalidArgument("readout covariance must be symmetric")
    if k and np.linalg.eigvalsh(r)[0] < 0:
        raise InvalidArgument("readout covariance must be positive semidefinite")
    return r


def condition_on_outcome(
    state: GaussianState,
    c,
    r,
    y,
    require_physical: bool = True,
) -> GaussianState:
    """Gaussian (Kalman) update on the readout ``y = C r + noise(R)``.

    ``R`` may be singular (exact homodyne of a meter mode) provided the
    innovation matrix ``C cov C^T + R`` is well conditioned. Conditioning is
    classical inference: the posterior is guaranteed physical only when the
    readout's back-action is already contained in ``state``, as in
    ``qnd_pulse``. Set ``require_physical=False`` to condition on arbitrary
    linear-Gaussian readouts.
    """
    c = _as_rows(c, state.mean.size)
    r = _as_noise(r, c.shape[0])
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (c.shape[0],):
        raise InvalidArgument(f"outcome must have length {c.shape[0]}, got {y.shape}")
    sc = state.cov @ c.T
    factor = _innovation_factor(c @ sc + r)
    # gain = sc @ inv(S), via the Cholesky factor
    gain = np.linalg.solve(factor.T, np.linalg.solve(factor, sc.T)).T
    mean = state.mean + gain @ (y - c @ state.mean)
    cov = state.cov - gain @ sc.T
    cov = 0.5 * (cov + cov.T)
    if require_physical:
        return GaussianState(mean, cov)
    return GaussianState(mean, cov, validate=False)


def sample_outcome(
    state: GaussianState, c, r, rng: np.random.Generator | int | None, size: int | None = None
) -> np.ndarray:
    """Draw ``y ~ N(C mean, C cov C^T + R)``; ``size`` draws give shape ``(size, k)``."""
    c = _as_rows(c, state.mean.size)
    r = _as_noise(r, c.shape[0])
    rng = np.random.default_rng(rng)
    cov = c @ state.cov @ c.T + r
    try:
        root = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        root = v * np.sqrt(np.clip(w, 0.0, None))
    if size is None:
        return c @ state.mean + root @ rng.standard_normal(c.shape[0])
    return c @ state.mean + rng.standard_normal((size, c.shape[0])) @ root.T


def continuous_condition(
    state: GaussianState,
    model: ContinuousModel,
    dt: float,
    n_steps: int,
    rng: np.random.Generator | int | None = None,
    method: Literal["euler", "kalman"] = "euler",
) -> tuple[list[GaussianState], MeasurementRecord]:
    """Integrate the conditional state under continuous monitoring.

    Both methods propagate the drift with the exact flow ``expm(A dt)``.

    ``euler``
        explicit Riccati step ``cov += dt (D - cov C^T R^-1 C cov)`` with the
        innovation gain on the mean. First order; can leave the physical set
        for pure states, in which case ``StepSizeError`` is raised.
    ``kalman``
        add ``D dt`` then condition on a readout with covariance ``R / dt``.
        First order as well, but each step is a physical pulse when the
        model comes from ``continuous_qnd_model``.

    Returns the ``n_steps + 1`` states (initial included) and the record of
    per-step readouts ``y_k`` (``y_k dt`` is the record increment).
    """
    if not dt > 0:
        raise InvalidArgument(f"dt must be > 0, got {dt}")
    if n_steps < 0:
        raise InvalidArgument(f"n_steps must be >= 0, got {n_steps}")
    if model.n_modes != state.n_modes:
        raise InvalidArgument("model and state dimensions disagree")
    if method not in ("euler", "kalman"):
        raise InvalidArgument(f"unknown method {method!r}")
    rng = np.random.default_rng(rng)

    flow = expm(model.drift * dt)
    c, r, d = model.sensing, model.readout_noise, model.diffusion
    r_inv = np.linalg.inv(r)
    r_step = r / dt
    root_step = np.linalg.cholesky(r_step)
    k = c.shape[0]

    states = [state]
    values = np.empty((n_steps, k))
    mean, cov = state.mean.copy(), state.cov.copy()
    for step in range(n_steps):
        if method == "euler":
            y = c @ mean + root_step @ rng.standard_normal(k)
            gain = cov @ c.T @ r_inv
            mean = flow @ mean + gain @ (y - c @ mean) * dt
            cov = flow @ cov @ flow.T + dt * (d - gain @ r @ gain.T)
        else:
            pred = GaussianState(flow @ mean, flow @ cov @ flow.T + dt * d, validate=False)
            y = sample_outcome(pred, c, r_step, rng)
            post = condition_on_outcome(pred, c, r_step, y, require_physical=False)
            mean, cov = post.mean, post.cov
        cov = 0.5 * (cov + cov.T)
        if not is_physical(cov):
            raise StepSizeError(
                f"state left the physical set at step {step + 1} "
                f"(min eigenvalue {physicality_margin(cov):.3e}); reduce dt"
            )
        values[step] = y
        states.append(GaussianState(mean, cov))
    record = MeasurementRecord(values, dt * np.arange(1, n_steps + 1))
    return states, record
