"""Mergeable Monte Carlo sufficient statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EstimatorResult:
    """Sufficient statistics ``(count, sum, sum_sq)`` of i.i.d. real samples."""

    count: int
    sum: float
    sum_sq: float

    @classmethod
    def from_samples(cls, values) -> EstimatorResult:
        values = np.asarray(values, dtype=float).ravel()
        return cls(int(values.size), float(values.sum()), float(np.dot(values, values)))

    @property
    def mean(self) -> float:
        if self.count == 0:
            return math.nan
        return self.sum / self.count

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.nan
        m = self.mean
        # population variance can come out slightly negative from cancellation
        var = max(self.sum_sq / self.count - m * m, 0.0)
        return math.sqrt(var / (self.count - 1))

    def merge(self, other: EstimatorResult) -> EstimatorResult:
        return EstimatorResult(
            self.count + other.count, self.sum + other.sum, self.sum_sq + other.sum_sq
        )

    def within(self, target: float, nsigma: float = 4.0) -> bool:
        return abs(self.mean - target) <= nsigma * self.stderr

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "sum": self.sum,
            "sum_sq": self.sum_sq,
            "mean": self.mean,
            "stderr": self.stderr,
        }


def merge(partials) -> EstimatorResult:
    """Pool a nonempty sequence of partial results."""
    partials = list(partials)
    if not partials:
        raise DomainError("cannot merge an empty list of estimator results")
    out = partials[0]
    for p in partials[1:]:
        out = out.merge(p)
    return out


def ratio_stderr(num: EstimatorResult, den: EstimatorResult) -> float:
    """First-order standard error of ``num.mean / den.mean``.

    Assumes the two estimators are uncorrelated, which holds for the
    self-overlap / cross-overlap pair because the conditional mean of the
    cross overlap given the first state is constant.
    """
    r = num.mean / den.mean
    return abs(r) * math.hypot(num.stderr / num.mean, den.stderr / den.mean)


def batch_sizes(samples: int, batch_size: int) -> list[int]:
    """Deterministic partition of ``samples`` trials into batches."""
    full, rest = divmod(samples, batch_size)
    return [batch_size] * full + ([rest] if rest else [])
