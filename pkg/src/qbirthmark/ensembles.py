"""Seeded GOE/GUE matrices, Haar-random states and Dirichlet weight vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, InvalidDimensionError, NormalizationError
from .rng import check_seed, make_rng

NORM_TOL = 1e-12


class SymmetryClass(enum.Enum):
    GUE = "GUE"
    GOE = "GOE"

    @property
    def dirichlet_alpha(self) -> Fraction:
        return Fraction(1) if self is SymmetryClass.GUE else Fraction(1, 2)

    @property
    def field_kind(self) -> str:
        return "complex" if self is SymmetryClass.GUE else "real"

    @property
    def dtype(self):
        return np.complex128 if self is SymmetryClass.GUE else np.float64

    @property
    def pairing_factor(self) -> int:
        """C/D, the ratio of E[|c_j|^4] to E[|c_i|^2 |c_j|^2]."""
        return 2 if self is SymmetryClass.GUE else 3

    @classmethod
    def parse(cls, value) -> SymmetryClass:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigurationError(f"unknown symmetry class {value!r}", field="class") from None


@dataclass(frozen=True, eq=False)
class RandomMatrix:
    entries: np.ndarray
    cls: SymmetryClass
    seed: int | None = None
    stream: int = 0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidDimensionError("state amplitudes must be a nonempty vector")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"state squared norm {norm2!r} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class WeightVector:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise InvalidDimensionError("weights must be a nonempty vector")
        if np.any(w < 0):
            raise NormalizationError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > NORM_TOL:
            raise NormalizationError(f"weights sum to {float(w.sum())!r}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size


def _check_dim(n) -> int:
    n = int(n)
    if n < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {n}")
    return n


# Vectorized samplers. These take a Generator and return arrays; the
# seed-taking functions below wrap them for single draws.


def gaussian_matrix(cls: SymmetryClass, n: int, rng: np.random.Generator) -> np.ndarray:
    """(A + A^dagger) / (2 sqrt(n)) with unit-variance Gaussian A."""
    if cls is SymmetryClass.GOE:
        a = rng.standard_normal((n, n))
        h = (a + a.T) / 2
    else:
        a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        h = (a + a.conj().T) / 2
    return h / np.sqrt(n)


def haar_states(cls: SymmetryClass, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-random unit vectors as rows of a (size, n) array."""
    if cls is SymmetryClass.GOE:
        z = rng.standard_normal((size, n))
    else:
        z = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=1, keepdims=True))
    return z / norms


def dirichlet_weights(cls: SymmetryClass, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Rows distributed Dir(alpha, ..., alpha) from normalized Gamma(alpha) draws."""
    if cls is SymmetryClass.GUE:
        g = rng.standard_exponential((size, n))
    else:
        g = rng.standard_normal((size, n)) ** 2 / 2
    return g / g.sum(axis=1, keepdims=True)


def sample_matrix(cls, n, seed, stream=0) -> RandomMatrix:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    seed = check_seed(seed)
    return RandomMatrix(gaussian_matrix(cls, n, make_rng(seed, stream)), cls, seed, stream)


def sample_haar_state(cls, n, seed, stream=0) -> QuantumState:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    return QuantumState(haar_states(cls, n, 1, make_rng(seed, stream))[0])


def sample_dirichlet(cls, n, seed, stream=0) -> WeightVector:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    return WeightVector(dirichlet_weights(cls, n, 1, make_rng(seed, stream))[0])


def weights_from_state(state) -> WeightVector:
    """Entrywise squared moduli ``p_j = |c_j|^2`` of a normalized state."""
    amps = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    p = np.abs(amps) ** 2
    if abs(float(p.sum()) - 1.0) > NORM_TOL:
        raise NormalizationError(f"state squared norm {float(p.sum())!r} differs from 1")
    return WeightVector(p)
