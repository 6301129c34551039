"""Propagators for free particles and oscillators of either mass sign.

Also holds the collective-spin to canonical-oscillator mapping, resonant
classical drives (pure displacements in the rotating frame) and relaxation
toward an uncorrelated bath.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import InvalidArgument
from .gaussian import VACUUM_VARIANCE, GaussianState, SymplecticMatrix


@dataclass(frozen=True)
class FreeParticleModel:
    mass_signs: tuple[int, ...]
    mass_magnitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mass_signs", tuple(int(s) for s in self.mass_signs))
        if not self.mass_signs or any(s not in (1, -1) for s in self.mass_signs):
            raise InvalidArgument(f"mass signs must be +1 or -1, got {self.mass_signs}")
        if not self.mass_magnitude > 0:
            raise InvalidArgument(f"mass magnitude must be > 0, got {self.mass_magnitude}")

    @property
    def n_modes(self) -> int:
        return len(self.mass_signs)


@dataclass(frozen=True)
class OscillatorModel:
    """One oscillator mode. A negative frequency encodes negative effective mass."""

    signed_frequency: float
    decoherence_rate: float = 0.0
    bath_variance: float = VACUUM_VARIANCE

    def __post_init__(self):
        if self.decoherence_rate < 0:
            raise InvalidArgument(f"decoherence rate must be >= 0, got {self.decoherence_rate}")
        if self.bath_variance < VACUUM_VARIANCE:
            raise InvalidArgument(
                f"bath variance must be >= {VACUUM_VARIANCE}, got {self.bath_variance}"
            )


@dataclass(frozen=True)
class SpinEnsembleModel:
    jx: float
    orientation: Literal["along_B", "against_B"] = "along_B"

    def __post_init__(self):
        if not self.jx > 0:
            raise InvalidArgument(f"Jx must be > 0, got {self.jx}")
        if self.orientation not in ("along_B", "against_B"):
            raise InvalidArgument(f"unknown orientation {self.orientation!r}")

    @property
    def sign(self) -> int:
        return 1 if self.orientation == "along_B" else -1


@dataclass(frozen=True)
class DriveConfig:
    """Resonant RF drive; ``amplitude`` is the quadrature displacement per unit time."""

    amplitude: float = 0.0
    phase: float = 0.0
    duration: float = 1.0
    target_mode: int = 0

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidArgument(f"drive duration must be >= 0, got {self.duration}")
        if self.target_mode < 0:
            raise InvalidArgument(f"target mode must be >= 0, got {self.target_mode}")


def free_propagator(t: float, model: FreeParticleModel) -> SymplecticMatrix:
    """``X_i -> X_i + t P_i / (sign_i m)``, momenta conserved."""
    s = np.eye(2 * model.n_modes)
    for i, sign in enumerate(model.mass_signs):
        s[2 * i, 2 * i + 1] = t / (sign * model.mass_magnitude)
    return SymplecticMatrix(s)


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def oscillator_propagator(t: float, models: Sequence[OscillatorModel]) -> SymplecticMatrix:
    """Per-mode phase-space rotation by ``omega_i t``.

    ``X(t) = X cos(wt) + P sin(wt)``, ``P(t) = P cos(wt) - X sin(wt)``.
    """
    n = len(models)
    s = np.zeros((2 * n, 2 * n))
    for i, m in enumerate(models):
        s[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = _rotation(m.signed_frequency * t)
    return SymplecticMatrix(s)


def oscillator_drift(models: Sequence[OscillatorModel]) -> np.ndarray:
    """Generator ``A`` with ``oscillator_propagator(t) = expm(A t)``."""
    n = len(models)
    a = np.zeros((2 * n, 2 * n))
    for i, m in enumerate(models):
        a[2 * i, 2 * i + 1] = m.signed_frequency
        a[2 * i + 1, 2 * i] = -m.signed_frequency
    return a


def spin_to_canonical(jy, jz, ensemble: SpinEnsembleModel):
    """Map transverse spin components to canonical ``(X, P)``.

    ``X = +-Jy / sqrt(Jx)`` (minus for an ensemble polarized against the
    field), ``P = Jz / sqrt(Jx)``. Works elementwise on arrays.
    """
    root = np.sqrt(ensemble.jx)
    return ensemble.sign * np.asarray(jy) / root, np.asarray(jz) / root


def canonical_commutator(ensemble: SpinEnsembleModel) -> float:
    """Coefficient ``k`` in ``[X, P] = i k`` implied by the spin algebra.

    The mean spin along the field axis is ``sign * Jx``, so
    ``[Jy, Jz] = i sign Jx``; the sign flip of ``X`` compensates it.
    """
    spin_commutator = ensemble.sign * ensemble.jx
    x_scale, p_scale = ensemble.sign / np.sqrt(ensemble.jx), 1.0 / np.sqrt(ensemble.jx)
    return float(x_scale * p_scale * spin_commutator)


def drive_displacement(drive: DriveConfig, n_modes: int) -> np.ndarray:
    """Rotating-frame mean displacement accumulated over the drive window."""
    if drive.target_mode >= n_modes:
        raise InvalidArgument(
            f"drive targets mode {drive.target_mode} but only {n_modes} modes exist"
        )
    out = np.zeros(2 * n_modes)
    k = 2 * drive.target_mode
    out[k] = drive.amplitude * drive.duration * np.cos(drive.phase)
    out[k + 1] = drive.amplitude * drive.duration * np.sin(drive.phase)
    return out


def decohere(state: GaussianState, models: Sequence[OscillatorModel], dt: float) -> GaussianState:
    """Relax each mode toward its bath over ``dt``.

    Mode ``i`` is damped by ``exp(-gamma_i dt / 2)`` in amplitude and refilled
    with ``(1 - exp(-gamma_i dt)) * bath_variance``; cross-mode blocks decay
    with the product of the amplitude factors. This is a Gaussian CP map for
    any bath variance >= 1/2.
    """
    if dt < 0:
        raise InvalidArgument(f"dt must be >= 0, got {dt}")
    if len(models) != state.n_modes:
        raise InvalidArgument(
            f"got {len(models)} mode models for a {state.n_modes}-mode state"
        )
    rates = np.repeat([m.decoherence_rate for m in models], 2)
    bath = np.repeat([m.bath_variance for m in models], 2)
    if not np.any(rates) or dt == 0:
        return state
    decay = np.exp(-rates * dt)
    k = np.sqrt(decay)
    cov = k[:, None] * state.cov * k[None, :] + np.diag((1.0 - decay) * bath)
    return GaussianState(k * state.mean, 0.5 * (cov + cov.T))
