"""Closed-form Dirichlet moments and the empirical fourth-moment tensor.

For a Haar-random state the fourth-moment tensor is a combination of index
pairings: two pairings for complex amplitudes (with conjugation on the
second and fourth index) and three for real amplitudes. The estimators here
recover the pairing coefficients by least squares and check that every
entry outside the pairing patterns vanishes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .batching import default_batch_size, run_batches
from .ensembles import SymmetryClass, _check_dim, dirichlet_weights, haar_states
from .errors import CapacityError, ConfigurationError, DegenerateFitError, InvalidDimensionError
from .rng import GENERATOR_ID, check_seed, make_rng
from .stats import EstimatorResult

DENSE_MAX_N = 12
SLICE_STREAM = 1 << 63


@dataclass(frozen=True)
class MomentTable:
    cls: SymmetryClass
    n: int
    e_pi_sq: Fraction
    e_pi_pj: Fraction | None  # None when n == 1

    def normalization_residual(self) -> float:
        """n C + n(n-1) D - 1, which is zero for a consistent table."""
        total = self.n * self.e_pi_sq
        if self.e_pi_pj is not None:
            total += self.n * (self.n - 1) * self.e_pi_pj
        return float(total - 1)


def analytic_moments(cls, n) -> MomentTable:
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    k = cls.pairing_factor
    # GUE: 1/(n(n+1)), GOE: 1/(n(n+2))
    d = Fraction(1, n * (n + k - 1))
    return MomentTable(cls, n, k * d, d if n > 1 else None)


@dataclass(frozen=True)
class MomentEstimate:
    cls: SymmetryClass
    n: int
    source: str
    e_pi_sq: EstimatorResult
    e_pi_pj: EstimatorResult | None
    seed: int = 0

    @property
    def analytic(self) -> MomentTable:
        return analytic_moments(self.cls, self.n)

    def passed(self, nsigma=4.0) -> bool:
        ref = self.analytic
        ok = self.e_pi_sq.within(float(ref.e_pi_sq), nsigma)
        if self.e_pi_pj is not None:
            ok = ok and self.e_pi_pj.within(float(ref.e_pi_pj), nsigma)
        return ok


def estimate_moments(cls, n, samples, seed, source="dirichlet", *, batch_size=None, workers=1):
    """Sample E[p_i^2] and E[p_i p_j] (i != j), averaged over coordinates.

    ``source`` is ``"dirichlet"`` (normalized Gamma draws) or ``"haar"``
    (squared moduli of Haar-random states).
    """
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    seed = check_seed(seed)
    if source not in ("dirichlet", "haar"):
        raise ConfigurationError(f"unknown source {source!r}", field="source")

    def work(_, size, rng):
        if source == "dirichlet":
            p = dirichlet_weights(cls, n, size, rng)
        else:
            p = np.abs(haar_states(cls, n, size, rng)) ** 2
        s1 = p.sum(axis=1)
        s2 = np.einsum("ij,ij->i", p, p)
        sq = EstimatorResult.from_samples(s2 / n)
        if n == 1:
            return sq, EstimatorResult(0, 0.0, 0.0)
        return sq, EstimatorResult.from_samples((s1 * s1 - s2) / (n * (n - 1)))

    sq, pair = run_batches(work, samples, seed, batch_size or default_batch_size(n), workers)
    return MomentEstimate(cls, n, source, sq, pair if n > 1 else None, seed)


# --- fourth-moment tensor ---------------------------------------------------

# Pairing patterns as index-equality pairs over positions (0, 1, 2, 3).
PATTERNS = {
    SymmetryClass.GUE: {"A": ((0, 1), (2, 3)), "B": ((0, 3), (1, 2))},
    SymmetryClass.GOE: {"X": ((0, 1), (2, 3)), "Y": ((0, 2), (1, 3)), "Z": ((0, 3), (1, 2))},
}


def pattern_masks(cls: SymmetryClass, n: int):
    """Boolean n^4 masks: one per pairing, plus the all-equal diagonal."""
    idx = np.indices((n,) * 4)
    masks = {
        name: (idx[p] == idx[q]) & (idx[r] == idx[s])
        for name, ((p, q), (r, s)) in PATTERNS[cls].items()
    }
    diag = (idx[0] == idx[1]) & (idx[1] == idx[2]) & (idx[2] == idx[3])
    return masks, diag


@dataclass(frozen=True)
class TensorFit:
    cls: SymmetryClass
    n: int
    samples: int
    seed: int
    coefficients: dict  # name -> EstimatorResult
    residual: float  # max |entry| over off-pattern entries
    residual_sigma: float  # max |entry| / stderr over off-pattern entries
    diagonal: EstimatorResult  # C = E|c_j|^4 (complex) or E[c_j^4] (real)
    method: str = "dense"
    tensor: np.ndarray | None = field(default=None, repr=False, compare=False)
    tensor_stderr: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def pair_moment(self) -> float:
        """D, the mean of the fitted pairing coefficients."""
        return float(np.mean([c.mean for c in self.coefficients.values()]))

    def to_json(self) -> dict:
        return {
            "class": self.cls.value,
            "n": self.n,
            "samples": self.samples,
            "coefficients": {k: v.mean for k, v in self.coefficients.items()},
            "coefficient_stderr": {k: v.stderr for k, v in self.coefficients.items()},
            "residual": self.residual,
            "residual_sigma": self.residual_sigma,
            "diagonal": self.diagonal.mean,
            "diagonal_stderr": self.diagonal.stderr,
            "method": self.method,
            "seed": self.seed,
            "generator": GENERATOR_ID,
        }


def pairing_ratio(fit) -> float:
    """Estimated C/D from a TensorFit, or the exact ratio of a MomentTable."""
    if isinstance(fit, MomentTable):
        if fit.e_pi_pj is None or fit.e_pi_pj <= 0:
            raise DegenerateFitError("moment table has no pair moment")
        return float(fit.e_pi_sq / fit.e_pi_pj)
    d = fit.pair_moment
    if not d > 0:
        raise DegenerateFitError(f"pair moment estimate {d!r} is not positive")
    return fit.diagonal.mean / d


def _outer_rows(cls, c):
    second = c.conj() if cls is SymmetryClass.GUE else c
    return (c[:, :, None] * second[:, None, :]).reshape(c.shape[0], -1)


def estimate_fourth_tensor(cls, n, samples, seed, *, batch_size=None, workers=1) -> TensorFit:
    """Dense Monte Carlo estimate of the n^4 fourth-moment tensor.

    The pairing ansatz is fitted by ordinary least squares over the entries
    that are not fully diagonal, leaving the diagonal C as an independent
    check of C = (number of pairings) * D.
    """
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    seed = check_seed(seed)
    if n < 2:
        raise InvalidDimensionError("fourth-moment tensor needs n >= 2")
    if n > DENSE_MAX_N:
        raise CapacityError(
            f"n={n} needs {n**4} dense accumulators (cap n <= {DENSE_MAX_N}); "
            "use estimate_fourth_tensor_sliced"
        )

    masks, diag = pattern_masks(cls, n)
    names = list(masks)
    fit_rows = ~diag.ravel()
    design = np.stack([masks[k].ravel()[fit_rows] for k in names], axis=1).astype(float)
    pinv = np.zeros((len(names), n**4))
    pinv[:, fit_rows] = np.linalg.pinv(design)
    weights = [w.reshape(n * n, n * n) for w in pinv]
    nsq = n * n

    def work(_, size, rng):
        c = haar_states(cls, n, size, rng)
        m = _outer_rows(cls, c)
        m2 = np.abs(m) ** 2
        t_sum = m.T @ m
        t_sq = m2.T @ m2
        coefs = tuple(
            EstimatorResult.from_samples(np.einsum("si,si->s", m @ w, m).real) for w in weights
        )
        diag_s = EstimatorResult.from_samples(np.sum(np.abs(c) ** 4, axis=1) / n)
        return (_Acc(size, t_sum, t_sq), diag_s) + coefs

    out = run_batches(work, samples, seed, batch_size or default_batch_size(nsq, cap=5000), workers)
    acc, diag_est, coef_est = out[0], out[1], out[2:]

    t = (acc.t_sum / acc.count).reshape((n,) * 4)
    var = np.maximum(acc.t_sq.reshape((n,) * 4) / acc.count - np.abs(t) ** 2, 0.0)
    se = np.sqrt(var / (acc.count - 1))
    off = ~np.logical_or.reduce([masks[k] for k in names])
    if cls is SymmetryClass.GOE:
        t = t.real
    residual = float(np.max(np.abs(t[off]))) if off.any() else 0.0
    residual_sigma = float(np.max(np.abs(t[off]) / se[off])) if off.any() else 0.0
    return TensorFit(
        cls, n, samples, seed, dict(zip(names, coef_est)), residual, residual_sigma,
        diag_est, "dense", t, se,
    )


class _Acc:
    """Summed outer-product accumulators; merges by addition."""

    def __init__(self, count, t_sum, t_sq):
        self.count, self.t_sum, self.t_sq = count, t_sum, t_sq

    def merge(self, other):
        return _Acc(self.count + other.count, self.t_sum + other.t_sum, self.t_sq + other.t_sq)


def estimate_fourth_tensor_sliced(cls, n, samples, seed, *, pairs=64, batch_size=None, workers=1):
    """Fourth-moment pairing fit from representative index patterns only.

    Accumulates (iiii), (iijj), (ijij), (ijji) and the unpaired pattern
    (iiij) over a fixed random set of index pairs i != j. Memory is
    independent of n.
    """
    cls = SymmetryClass.parse(cls)
    n = _check_dim(n)
    seed = check_seed(seed)
    if n < 2:
        raise InvalidDimensionError("fourth-moment tensor needs n >= 2")
    all_pairs = n * (n - 1)
    if all_pairs <= pairs:
        ij = np.array([p for p in itertools.permutations(range(n), 2)])
    else:
        rng = make_rng(seed, SLICE_STREAM)
        i = rng.integers(0, n, pairs)
        j = (i + rng.integers(1, n, pairs)) % n
        ij = np.stack([i, j], axis=1)
    i, j = ij[:, 0], ij[:, 1]
    conj = np.conj if cls is SymmetryClass.GUE else (lambda z: z)

    def work(_, size, rng):
        c = haar_states(cls, n, size, rng)
        ci, cj = c[:, i], c[:, j]
        pats = {
            "iiii": np.abs(ci) ** 4,
            "iijj": ci * conj(ci) * cj * conj(cj),
            "ijij": ci * conj(cj) * ci * conj(cj),
            "ijji": ci * conj(cj) * cj * conj(ci),
            "iiij": ci * conj(ci) * ci * conj(cj),
        }
        return tuple(
            EstimatorResult.from_samples(pats[k].real.mean(axis=1))
            for k in ("iiii", "iijj", "ijij", "ijji")
        ) + (
            EstimatorResult.from_samples(pats["iiij"].real.mean(axis=1)),
            EstimatorResult.from_samples(pats["iiij"].imag.mean(axis=1)),
            EstimatorResult.from_samples(pats["ijij"].imag.mean(axis=1)),
        )

    est = run_batches(work, samples, seed, batch_size or default_batch_size(n), workers)
    iiii, iijj, ijij, ijji, off_re, off_im, ijij_im = est
    if cls is SymmetryClass.GUE:
        coefs = {"A": iijj, "B": ijji}
        offs = [off_re, off_im, ijij, ijij_im]
    else:
        coefs = {"X": iijj, "Y": ijij, "Z": ijji}
        offs = [off_re]
    residual = max(abs(o.mean) for o in offs)
    residual_sigma = max(abs(o.mean) / o.stderr for o in offs)
    return TensorFit(cls, n, samples, seed, coefs, residual, residual_sigma, iiii, "sliced")
