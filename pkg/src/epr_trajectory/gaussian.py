"""Phase-space representation of multimode Gaussian states.

Quadratures are ordered ``(X1, P1, X2, P2, ...)`` with ``[X, P] = i`` so the
vacuum has variance 1/2 in every quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .errors import InvalidArgument

SYMMETRY_TOL = 1e-10
PHYSICALITY_TOL = 1e-9
SYMPLECTIC_TOL = 1e-10

VACUUM_VARIANCE = 0.5


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the interleaved ordering (read-only)."""
    return _frozen(np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]])))


def physicality_margin(cov: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian matrix ``cov + (i/2) Omega``.

    A covariance matrix describes a physical state iff this is non-negative.
    """
    n = cov.shape[0] // 2
    return float(np.linalg.eigvalsh(cov + 0.5j * symplectic_form(n))[0])


def _physicality_tol(cov: np.ndarray) -> float:
    # round-off in the eigenvalues scales with the matrix norm
    return PHYSICALITY_TOL * max(1.0, float(np.abs(cov).max()))


def is_physical(cov: np.ndarray) -> bool:
    return physicality_margin(cov) >= -_physicality_tol(cov)


def symplectic_residual(s: np.ndarray) -> float:
    """``||S Omega S^T - Omega||_inf``, elementwise max."""
    omega = symplectic_form(s.shape[0] // 2)
    return float(np.abs(s @ omega @ s.T - omega).max())


@dataclass(frozen=True)
class QuadratureIndex:
    mode: int
    kind: Literal["x", "p"]

    def __post_init__(self):
        if self.mode < 0:
            raise InvalidArgument(f"mode must be >= 0, got {self.mode}")
        if self.kind not in ("x", "p"):
            raise InvalidArgument(f"kind must be 'x' or 'p', got {self.kind!r}")

    @property
    def index(self) -> int:
        return 2 * self.mode + (0 if self.kind == "x" else 1)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an N-mode Gaussian state.

    Construction validates shape, symmetry and the Heisenberg condition;
    pass ``validate=False`` only for intermediate objects known to be valid.
    """

    mean: np.ndarray
    cov: np.ndarray
    validate: bool = True

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if not self.validate:
            return
        if mean.ndim != 1 or mean.size % 2 or mean.size == 0:
            raise InvalidArgument(f"mean must have even length >= 2, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgument(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise InvalidArgument("state contains non-finite entries")
        asym = float(np.abs(cov - cov.T).max())
        if asym > SYMMETRY_TOL * max(1.0, float(np.abs(cov).max())):
            raise InvalidArgument(f"cov is not symmetric (residual {asym:.3e})")
        margin = physicality_margin(cov)
        if margin < -_physicality_tol(cov):
            raise InvalidArgument(
                f"cov violates the uncertainty principle (min eigenvalue {margin:.3e})"
            )

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianState):
            return NotImplemented
        return bool(
            np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)
        )

    def allclose(self, other: "GaussianState", atol: float = 1e-10) -> bool:
        return bool(
            np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    s: np.ndarray

    def __post_init__(self):
        s = _frozen(self.s)
        object.__setattr__(self, "s", s)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise InvalidArgument(f"symplectic matrix must be 2N x 2N, got {s.shape}")
        res = symplectic_residual(s)
        if res > SYMPLECTIC_TOL * max(1.0, float(np.abs(s).max()) ** 2):
            raise InvalidArgument(f"matrix is not symplectic (residual {res:.3e})")

    @property
    def n_modes(self) -> int:
        return self.s.shape[0] // 2

    @property
    def residual(self) -> float:
        return symplectic_residual(self.s)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.s @ other.s)

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticMatrix":
        return cls(np.eye(2 * n_modes))


@dataclass(frozen=True, eq=False)
class QuadratureCombination:
    """Coefficients of a linear functional ``c . r`` of the quadratures."""

    c: np.ndarray

    def __post_init__(self):
        c = _frozen(self.c)
        object.__setattr__(self, "c", c)
        if c.ndim != 1 or c.size % 2:
            raise InvalidArgument(f"coefficients must have even length, got shape {c.shape}")
        if not np.any(c):
            raise InvalidArgument("quadrature combination must be non-zero")

    @property
    def n_modes(self) -> int:
        return self.c.size // 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.c))

    def unit(self) -> np.ndarray:
        return self.c / self.norm

    def symplectic_product(self, other: "QuadratureCombination") -> float:
        """``c1^T Omega c2``; zero iff the two functionals commute."""
        return float(self.c @ symplectic_form(self.n_modes) @ other.c)

    @classmethod
    def single(cls, mode: int, kind: Literal["x", "p"], n_modes: int) -> "QuadratureCombination":
        c = np.zeros(2 * n_modes)
        c[QuadratureIndex(mode, kind).index] = 1.0
        return cls(c)

    @classmethod
    def relative_position(cls, a: int = 0, b: int = 1, n_modes: int = 2) -> "QuadratureCombination":
        """``X_a - X_b``."""
        c = np.zeros(2 * n_modes)
        c[2 * a] = 1.0
        c[2 * b] = -1.0
        return cls(c)

    @classmethod
    def momentum_sum(cls, a: int = 0, b: int = 1, n_modes: int = 2) -> "QuadratureCombination":
        """``P_a + P_b``."""
        c = np.zeros(2 * n_modes)
        c[2 * a + 1] = 1.0
        c[2 * b + 1] = 1.0
        return cls(c)

    @classmethod
    def position_sum(cls, a: int = 0, b: int = 1, n_modes: int = 2) -> "QuadratureCombination":
        c = np.zeros(2 * n_modes)
        c[2 * a] = 1.0
        c[2 * b] = 1.0
        return cls(c)

    @classmethod
    def relative_momentum(cls, a: int = 0, b: int = 1, n_modes: int = 2) -> "QuadratureCombination":
        c = np.zeros(2 * n_modes)
        c[2 * a + 1] = 1.0
        c[2 * b + 1] = -1.0
        return cls(c)


def vacuum_state(n_modes: int) -> GaussianState:
    if n_modes < 1:
        raise InvalidArgument(f"n_modes must be >= 1, got {n_modes}")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def thermal_state(variances: Sequence[float]) -> GaussianState:
    """Uncorrelated modes with the given per-mode quadrature variance (>= 1/2)."""
    v = np.repeat(np.asarray(variances, dtype=float), 2)
    return GaussianState(np.zeros(v.size), np.diag(v))


def displace(state: GaussianState, offset: Sequence[float]) -> GaussianState:
    offset = np.asarray(offset, dtype=float)
    if offset.shape != state.mean.shape:
        raise InvalidArgument(
            f"offset shape {offset.shape} does not match state dimension {state.mean.shape}"
        )
    if not np.all(np.isfinite(offset)):
        raise InvalidArgument("offset must be finite")
    return GaussianState(state.mean + offset, state.cov, validate=False)


def apply_symplectic(state: GaussianState, s: SymplecticMatrix | np.ndarray) -> GaussianState:
    """``mean -> S mean``, ``cov -> S cov S^T``."""
    if not isinstance(s, SymplecticMatrix):
        s = SymplecticMatrix(s)
    if s.n_modes != state.n_modes:
        raise InvalidArgument(
            f"symplectic acts on {s.n_modes} modes, state has {state.n_modes}"
        )
    cov = s.s @ state.cov @ s.s.T
    return GaussianState(s.s @ state.mean, 0.5 * (cov + cov.T))


def functional_stats(
    state: GaussianState, c: QuadratureCombination | Sequence[float]
) -> tuple[float, float]:
    """Mean and variance of the scalar observable ``c . r``."""
    if not isinstance(c, QuadratureCombination):
        c = QuadratureCombination(np.asarray(c, dtype=float))
    if c.n_modes != state.n_modes:
        raise InvalidArgument(
            f"combination has {c.n_modes} modes, state has {state.n_modes}"
        )
    return float(c.c @ state.mean), max(float(c.c @ state.cov @ c.c), 0.0)


def tensor(*states: GaussianState) -> GaussianState:
    """Joint state of independent subsystems, modes in argument order."""
    from scipy.linalg import block_diag

    mean = np.concatenate([s.mean for s in states])
    cov = block_diag(*[s.cov for s in states])
    return GaussianState(mean, cov, validate=False)


def reduce(state: GaussianState, modes: Sequence[int]) -> GaussianState:
    """Marginal state of the listed modes (partial trace over the rest)."""
    modes = list(modes)
    if not modes or any(m < 0 or m >= state.n_modes for m in modes):
        raise InvalidArgument(f"invalid mode selection {modes} for {state.n_modes} modes")
    idx = np.array([[2 * m, 2 * m + 1] for m in modes]).ravel()
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)], validate=False)


def two_mode_squeezer(r: float, a: int = 0, b: int = 1, n_modes: int = 2) -> SymplecticMatrix:
    """Two-mode squeezing that scales ``X_a - X_b`` and ``P_a + P_b`` by ``exp(-r)``."""
    ch, sh = np.cosh(r), np.sinh(r)
    s = np.eye(2 * n_modes)
    xa, pa, xb, pb = 2 * a, 2 * a + 1, 2 * b, 2 * b + 1
    s[xa, xa] = s[xb, xb] = s[pa, pa] = s[pb, pb] = ch
    s[xa, xb] = s[xb, xa] = sh
    s[pa, pb] = s[pb, pa] = -sh
    return SymplecticMatrix(s)
