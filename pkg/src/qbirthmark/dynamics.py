"""Finite-time averages of |<b|U(t)|a>|^2 and their convergence to the spectral sum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, ShapeError
from .spectral import HamiltonianSpectrum, eigen_coefficients

SERIES_CUTOFF = 1e-6


def _coefficients(spec, a, b):
    ca = eigen_coefficients(a, spec)
    cb = eigen_coefficients(b, spec)
    if ca.ndim != 1 or cb.ndim != 1:
        raise ShapeError("expected single state vectors")
    return cb.conj() * ca


def kappa(x):
    """Mean of exp(-i x s) over s in [0, 1], i.e. (exp(-ix) - 1) / (-ix)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=np.complex128)
    small = np.abs(x) < SERIES_CUTOFF
    xs = x[small]
    out[small] = 1 - 0.5j * xs - xs * xs / 6
    xl = x[~small]
    out[~small] = np.expm1(-1j * xl) / (-1j * xl)
    return out


def overlap_at_time(spec: HamiltonianSpectrum, a, b, t) -> float:
    """|<b| exp(-iHt) |a>|^2 evaluated in the eigenbasis."""
    if not np.isfinite(t):
        raise DomainError("time must be finite")
    z = _coefficients(spec, a, b)
    amp = np.sum(z * np.exp(-1j * spec.eigenvalues * t))
    return float(abs(amp) ** 2)


def spectral_limit(spec: HamiltonianSpectrum, a, b) -> float:
    """T -> infinity limit of the time average.

    Equals sum_n p_n^a p_n^b for a simple spectrum. Flagged degeneracy
    clusters contribute |<b|P_C|a>|^2 with P_C the cluster projector.
    """
    z = _coefficients(spec, a, b)
    total = 0.0
    start = 0
    for lo, hi in (*spec.degeneracy_clusters, (spec.dim, spec.dim)):
        total += float(np.sum(np.abs(z[start:lo]) ** 2))
        if hi > lo:
            total += float(abs(np.sum(z[lo:hi])) ** 2)
        start = hi
    return total


def finite_time_average(spec: HamiltonianSpectrum, a, b, horizon, method="closed") -> float:
    """(1/T) * integral_0^T |<b|U(t)|a>|^2 dt.

    ``closed`` sums z_n conj(z_m) kappa((E_n - E_m) T) over all level pairs;
    ``quadrature`` integrates the overlap numerically and serves as a check.
    """
    horizon = float(horizon)
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if method == "closed":
        z = _coefficients(spec, a, b)
        e = spec.eigenvalues
        k = kappa((e[:, None] - e[None, :]) * horizon)
        return float(np.real(z @ k @ z.conj()))
    if method == "quadrature":
        z = _coefficients(spec, a, b)
        e = spec.eigenvalues
        f = lambda t: abs(np.sum(z * np.exp(-1j * e * t))) ** 2  # noqa: E731
        nosc = int(spec.spectral_range * horizon / (2 * np.pi)) + 1
        val, _ = integrate.quad(f, 0.0, horizon, limit=max(200, 50 * nosc), epsabs=1e-13, epsrel=1e-11)
        return val / horizon
    raise ConfigurationError(f"unknown method {method!r}", field="method")


def error_envelope(spec: HamiltonianSpectrum, a, b, horizon) -> float:
    """Upper bound on |finite_time_average - spectral_limit| at ``horizon``.

    Uses |kappa(x)| <= min(1, 2/|x|) across clusters and |kappa(x) - 1| <= |x|/2
    inside them; the bound is non-increasing in the horizon for a simple
    spectrum.
    """
    z = np.abs(_coefficients(spec, a, b))
    e = spec.eigenvalues
    x = np.abs(e[:, None] - e[None, :]) * float(horizon)
    same = np.zeros((spec.dim, spec.dim), dtype=bool)
    np.fill_diagonal(same, True)
    for lo, hi in spec.degeneracy_clusters:
        same[lo:hi, lo:hi] = True
    with np.errstate(divide="ignore"):
        bound = np.where(same, np.minimum(2.0, x / 2), np.minimum(1.0, 2.0 / x))
    np.fill_diagonal(bound, 0.0)
    return float(z @ bound @ z)


@dataclass(frozen=True)
class TimeAverageCurve:
    horizons: np.ndarray  # as requested, in ``unit``
    times: np.ndarray  # physical times
    values: np.ndarray
    limit: float
    envelope: np.ndarray
    unit: str = "mean_gap"

    @property
    def abs_errors(self) -> np.ndarray:
        return np.abs(self.values - self.limit)

    @property
    def rel_errors(self) -> np.ndarray:
        return self.abs_errors / self.limit

    def rows(self):
        return [
            {"T": float(h), "value": float(v), "limit": self.limit, "abs_error": float(e)}
            for h, v, e in zip(self.horizons, self.values, self.abs_errors)
        ]


def convergence_curve(spec: HamiltonianSpectrum, a, b, horizons, unit="mean_gap") -> TimeAverageCurve:
    """Finite-time averages over increasing horizons.

    With ``unit="mean_gap"`` each horizon is measured in inverse mean level
    spacings, i.e. the physical time is ``T / mean_level_spacing``.
    """
    h = np.asarray(horizons, dtype=float)
    if h.ndim != 1 or h.size == 0 or np.any(h <= 0) or np.any(np.diff(h) <= 0):
        raise DomainError("horizons must be a nonempty, strictly increasing positive sequence")
    if unit == "mean_gap":
        times = h / spec.mean_level_spacing
    elif unit == "absolute":
        times = h
    else:
        raise ConfigurationError(f"unknown time unit {unit!r}", field="unit")
    values = np.array([finite_time_average(spec, a, b, t) for t in times])
    env = np.array([error_envelope(spec, a, b, t) for t in times])
    return TimeAverageCurve(h, times, values, spectral_limit(spec, a, b), env, unit)

