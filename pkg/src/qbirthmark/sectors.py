"""Block-diagonal Hamiltonians and states restricted to symmetry sectors.

A symmetry group is represented only through its multiplicity-free block
layout: sector ``alpha`` occupies a contiguous index range of length
``d_alpha`` and the Hamiltonian never couples different sectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batching import default_batch_size, run_batches
from .birthmark import EnhancementReport, analytic_ratio
from .ensembles import (
    QuantumState,
    RandomMatrix,
    SymmetryClass,
    _check_dim,
    dirichlet_weights,
    gaussian_matrix,
    haar_states,
)
from .errors import ConfigurationError, DomainError
from .rng import GENERATOR_ID, check_seed, make_rng
from .spectral import decompose, eigen_coefficients, fold_clusters
from .stats import EstimatorResult

MATRIX_STREAM = 1 << 32


@dataclass(frozen=True)
class SectorLayout:
    sector_dims: tuple
    accessible: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.sector_dims)
        if not dims or any(d < 1 for d in dims):
            raise ConfigurationError("sector dimensions must be positive integers", field="layout")
        acc = tuple(sorted(set(int(a) for a in self.accessible)))
        if not acc:
            raise ConfigurationError("at least one sector must be accessible", field="accessible")
        if acc[0] < 0 or acc[-1] >= len(dims):
            raise ConfigurationError(f"sector indices {acc} out of range", field="accessible")
        object.__setattr__(self, "sector_dims", dims)
        object.__setattr__(self, "accessible", acc)

    @classmethod
    def full(cls, dims):
        return cls(tuple(dims), tuple(range(len(dims))))

    @property
    def total(self) -> int:
        return sum(self.sector_dims)

    @property
    def accessible_dim(self) -> int:
        return sum(self.sector_dims[a] for a in self.accessible)

    @property
    def offsets(self) -> tuple:
        return tuple(np.concatenate([[0], np.cumsum(self.sector_dims)[:-1]]).tolist())

    def sector_slice(self, alpha) -> slice:
        start = self.offsets[alpha]
        return slice(start, start + self.sector_dims[alpha])

    @property
    def accessible_mask(self) -> np.ndarray:
        mask = np.zeros(self.total, dtype=bool)
        for a in self.accessible:
            mask[self.sector_slice(a)] = True
        return mask


def build_block_hamiltonian(layout: SectorLayout, cls, seed) -> RandomMatrix:
    """Block-diagonal matrix with one independent ensemble sample per sector.

    Block ``alpha`` is drawn from stream ``alpha``, so a single-sector layout
    reproduces ``sample_matrix(cls, N, seed)`` exactly.
    """
    cls = SymmetryClass.parse(cls)
    seed = check_seed(seed)
    h = np.zeros((layout.total, layout.total), dtype=cls.dtype)
    for alpha, d in enumerate(layout.sector_dims):
        sl = layout.sector_slice(alpha)
        h[sl, sl] = gaussian_matrix(cls, d, make_rng(seed, alpha))
    return RandomMatrix(h, cls, seed)


def _restricted_rows(layout, cls, size, rng):
    if not layout.accessible:
        raise ConfigurationError("no accessible sector", field="accessible")
    out = np.zeros((size, layout.total), dtype=cls.dtype)
    out[:, layout.accessible_mask] = haar_states(cls, layout.accessible_dim, size, rng)
    return out


def sample_restricted_state(layout: SectorLayout, cls, seed, stream=0) -> QuantumState:
    """Haar-random state on the accessible subspace, exactly zero elsewhere."""
    cls = SymmetryClass.parse(cls)
    return QuantumState(_restricted_rows(layout, cls, 1, make_rng(check_seed(seed), stream))[0])


def analytic_sector_self_overlap(cls, d) -> float:
    cls = SymmetryClass.parse(cls)
    d = _check_dim(d)
    return 2 / (d + 1) if cls is SymmetryClass.GUE else 3 / (d + 2)


def analytic_sector_ratio(cls, n, d) -> float:
    cls = SymmetryClass.parse(cls)
    n, d = _check_dim(n), _check_dim(d)
    if d > n:
        raise DomainError(f"accessible dimension {d} exceeds total dimension {n}")
    return 2 * n / (d + 1) if cls is SymmetryClass.GUE else 3 * n / (d + 2)


def _sector_report(layout, cls, p_aa, p_ab, path, samples, seed, meta):
    n, d = layout.total, layout.accessible_dim
    return EnhancementReport(
        cls=cls,
        n=n,
        p_aa_stats=p_aa,
        p_ab_stats=p_ab,
        analytic_p_aa=analytic_sector_self_overlap(cls, d),
        analytic_p_ab=1 / n,
        analytic_ratio=analytic_sector_ratio(cls, n, d),
        path=path,
        samples=samples,
        seed=seed,
        metadata={
            "generator": GENERATOR_ID,
            "layout": list(layout.sector_dims),
            "accessible": list(layout.accessible),
            "accessible_dim": d,
            **meta,
        },
    )


def estimate_sector_ratio(
    layout: SectorLayout, cls, samples, seed, path="dirichlet", *, batch_size=None, workers=1
) -> EnhancementReport:
    """Self-overlap of sector-restricted states against generic full-space states.

    ``a`` is Haar on the accessible subspace, ``b`` is Haar on all N
    dimensions. The ``matrix`` path diagonalizes a fresh block Hamiltonian
    per trial; the ``dirichlet`` path uses the fact that the eigenbasis
    weights of ``a`` are Dirichlet on the accessible levels.
    """
    cls = SymmetryClass.parse(cls)
    seed = check_seed(seed)
    if samples < 2:
        raise ConfigurationError("at least 2 samples are required", field="samples")
    n, d = layout.total, layout.accessible_dim
    mask = layout.accessible_mask

    if path == "dirichlet":
        bs = batch_size or default_batch_size(n)

        def work(_, size, rng):
            wa = np.zeros((size, n))
            wa[:, mask] = dirichlet_weights(cls, d, size, rng)
            wb = dirichlet_weights(cls, n, size, rng)
            return (
                EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wa)),
                EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wb)),
                0,
            )

    elif path == "matrix":
        bs = batch_size or 100

        def work(index, size, rng):
            a = _restricted_rows(layout, cls, size, rng)
            b = haar_states(cls, n, size, rng)
            p_aa, p_ab = np.empty(size), np.empty(size)
            events = 0
            for k in range(size):
                h = build_block_hamiltonian(layout, cls, _trial_seed(seed, index * bs + k))
                spec = decompose(h)
                w = np.abs(eigen_coefficients(np.stack([a[k], b[k]]), spec)) ** 2
                if spec.degeneracy_clusters:
                    events += 1
                    w = fold_clusters(w, spec.degeneracy_clusters)
                p_aa[k] = w[0] @ w[0]
                p_ab[k] = w[0] @ w[1]
            return EstimatorResult.from_samples(p_aa), EstimatorResult.from_samples(p_ab), events

    else:
        raise ConfigurationError(f"unknown path {path!r}", field="path")

    p_aa, p_ab, events = run_batches(work, samples, seed, bs, workers)
    return _sector_report(
        layout, cls, p_aa, p_ab, path, samples, seed, {"batch_size": bs, "degenerate_events": events}
    )


def _trial_seed(seed, trial):
    # block Hamiltonians use streams 0..len(layout)-1 of their own seed
    return int(make_rng(seed, MATRIX_STREAM + trial).integers(0, 1 << 64, dtype=np.uint64))


def estimate_uneven_overlap(
    layout: SectorLayout, cls, sector_weights, samples, seed, *, batch_size=None, workers=1
) -> EnhancementReport:
    """Monte Carlo self-overlap for a state spread unevenly over sectors.

    The state is ``sum_alpha sqrt(w_alpha) |a_alpha>`` with fixed sector
    weights ``w_alpha`` and independent Haar states ``|a_alpha>`` inside each
    sector. Reported against the unrestricted full-space reference values;
    there is no closed-form analytic ratio for this case.
    """
    cls = SymmetryClass.parse(cls)
    seed = check_seed(seed)
    w = np.asarray(sector_weights, dtype=float)
    if w.shape != (len(layout.sector_dims),) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ConfigurationError("sector weights must be a probability vector", field="sector_weights")
    n = layout.total
    bs = batch_size or default_batch_size(n)

    def work(_, size, rng):
        wa = np.zeros((size, n))
        for alpha, d in enumerate(layout.sector_dims):
            wa[:, layout.sector_slice(alpha)] = w[alpha] * dirichlet_weights(cls, d, size, rng)
        wb = dirichlet_weights(cls, n, size, rng)
        return (
            EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wa)),
            EstimatorResult.from_samples(np.einsum("ij,ij->i", wa, wb)),
        )

    p_aa, p_ab = run_batches(work, samples, seed, bs, workers)
    full = analytic_ratio(cls, n)
    return EnhancementReport(
        cls=cls,
        n=n,
        p_aa_stats=p_aa,
        p_ab_stats=p_ab,
        analytic_p_aa=full / n,
        analytic_p_ab=1 / n,
        analytic_ratio=full,
        path="dirichlet",
        samples=samples,
        seed=seed,
        metadata={
            "generator": GENERATOR_ID,
            "layout": list(layout.sector_dims),
            "sector_weights": w.tolist(),
            "reference": "unrestricted",
        },
    )
