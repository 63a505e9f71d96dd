"""Long-time averaged overlaps, the dilation, and universal enhancement ratios."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .batching import default_batch_size, run_batches
from .ensembles import (
    SymmetryClass,
    WeightVector,
    _check_dim,
    dirichlet_weights,
    haar_states,
    sample_matrix,
)
from .errors import ConfigurationError, ShapeError
from .rng import GENERATOR_ID, check_seed
from .spectral import decompose, eigen_coefficients, fold_clusters
from .stats import EstimatorResult, ratio_stderr

PATHS = ("dirichlet", "matrix")
INITIAL_STATES = ("haar", "basis")
# matrix path: trial k draws its Hamiltonian from stream MATRIX_STREAM + k
MATRIX_STREAM = 1 << 32


def _weights(w):
    return w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float)


def long_time_overlap(wa, wb) -> float:
    """Infinite-time average of |<b|a(t)>|^2 for a non-degenerate spectrum."""
    pa, pb = _weights(wa), _weights(wb)
    if pa.shape != pb.shape:
        raise ShapeError(f"weight vectors of dimension {pa.size} and {pb.size}")
    return float(np.dot(pa, pb))


def dilation(w) -> float:
    """Inverse participation ratio sum_n p_n^2, the long-time return probability."""
    p = _weights(w)
    return float(np.dot(p, p))


def analytic_self_overlap(cls, n) -> float:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    return 2 / (n + 1) if cls is SymmetryClass.GUE else 3 / (n + 2)


def analytic_cross_overlap(n) -> float:
    return 1 / _check_dim(n)


def analytic_ratio(cls, n) -> float:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    return 2 * n / (n + 1) if cls is SymmetryClass.GUE else 3 * n / (n + 2)


@dataclass(frozen=True)
class EnhancementReport:
    cls: SymmetryClass
    n: int
    p_aa_stats: EstimatorResult
    p_ab_stats: EstimatorResult
    analytic_p_aa: float
    analytic_p_ab: float
    analytic_ratio: float
    path: str = "dirichlet"
    samples: int = 0
    seed: int = 0
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def p_aa(self) -> float:
        return self.p_aa_stats.mean

    @property
    def p_ab(self) -> float:
        return self.p_ab_stats.mean

    @property
    def ratio(self) -> float:
        return self.p_aa / self.p_ab if self.p_ab > 0 else float("nan")

    @property
    def ratio_stderr(self) -> float:
        return ratio_stderr(self.p_aa_stats, self.p_ab_stats)

    def verdicts(self, nsigma=4.0) -> dict:
        return {
            "p_aa": self.p_aa_stats.within(self.analytic_p_aa, nsigma),
            "p_ab": self.p_ab_stats.within(self.analytic_p_ab, nsigma),
            "ratio": abs(self.ratio - self.analytic_ratio) <= nsigma * self.ratio_stderr,
        }

    def passed(self, nsigma=4.0) -> bool:
        return all(self.verdicts(nsigma).values())


def _dirichlet_batch(cls, n):
    def work(_, size, rng):
        wa = dirichlet_weights(cls, n, size, rng)
        wb = dirichlet_weights(cls, n, size, rng)
        return (
            EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wa)),
            EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wb)),
            0,
        )

    return work


def _matrix_batch(cls, n, seed, batch_size, initial, method):
    def work(index, size, rng):
        if initial == "haar":
            a = haar_states(cls, n, size, rng)
        else:
            a = np.zeros((size, n), dtype=cls.dtype)
            a[:, 0] = 1
        b = haar_states(cls, n, size, rng)
        p_aa = np.empty(size)
        p_ab = np.empty(size)
        events = 0
        for k in range(size):
            h = sample_matrix(cls, n, seed, stream=MATRIX_STREAM + index * batch_size + k)
            spec = decompose(h, method=method)
            w = np.abs(eigen_coefficients(np.stack([a[k], b[k]]), spec)) ** 2
            if spec.degeneracy_clusters:
                events += 1
                w = fold_clusters(w, spec.degeneracy_clusters)
            p_aa[k] = w[0] @ w[0]
            p_ab[k] = w[0] @ w[1]
        return EstimatorResult.from_samples(p_aa), EstimatorResult.from_samples(p_ab), events

    return work


def estimate_enhancement(
    cls,
    n,
    samples,
    seed,
    path="dirichlet",
    *,
    initial="haar",
    method="embedding",
    batch_size=None,
    workers=1,
) -> EnhancementReport:
    """Monte Carlo estimate of the self-overlap, cross overlap and their ratio.

    Each trial draws an independent pair (a, b). The ``dirichlet`` path
    samples eigenbasis weights directly; the ``matrix`` path diagonalizes a
    fresh Hamiltonian per trial and projects the states onto its
    eigenvectors. With ``initial="basis"`` the first state is the fixed
    site-basis vector e_1, so its weights are the squared first row of the
    eigenvector matrix.
    """
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    seed = check_seed(seed)
    if path not in PATHS:
        raise ConfigurationError(f"unknown path {path!r}, expected one of {PATHS}", field="path")
    if initial not in INITIAL_STATES:
        raise ConfigurationError(f"unknown initial state {initial!r}", field="initial")
    if samples < 2:
        raise ConfigurationError("at least 2 samples are required", field="samples")

    if path == "dirichlet":
        bs = batch_size or default_batch_size(n)
        work = _dirichlet_batch(cls, n)
    else:
        bs = batch_size or 100
        work = _matrix_batch(cls, n, seed, bs, initial, method)
    p_aa, p_ab, events = run_batches(work, samples, seed, bs, workers)
    return EnhancementReport(
        cls=cls,
        n=n,
        p_aa_stats=p_aa,
        p_ab_stats=p_ab,
        analytic_p_aa=analytic_self_overlap(cls, n),
        analytic_p_ab=analytic_cross_overlap(n),
        analytic_ratio=analytic_ratio(cls, n),
        path=path,
        samples=samples,
        seed=seed,
        metadata={
            "generator": GENERATOR_ID,
            "batch_size": bs,
            "degenerate_events": events,
            "initial": initial,
        },
    )
