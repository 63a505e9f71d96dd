"""Dense eigendecomposition of sampled Hamiltonians and eigenbasis weights."""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from .ensembles import QuantumState, RandomMatrix, SymmetryClass, WeightVector
from .errors import ConfigurationError, EigenSolverError, ShapeError

log = logging.getLogger(__name__)

DEGENERACY_RTOL = 1e-10
PAIR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HamiltonianSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are eigenvectors
    cls: SymmetryClass
    degeneracy_clusters: tuple  # half-open (start, stop) index ranges, len >= 2
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    @property
    def mean_level_spacing(self) -> float:
        if self.dim < 2:
            return float("nan")
        return self.spectral_range / (self.dim - 1)


def degeneracy_clusters(eigenvalues, rtol=DEGENERACY_RTOL) -> tuple:
    """Runs of ascending eigenvalues whose consecutive gaps are below ``rtol * range``."""
    ev = np.asarray(eigenvalues)
    if ev.size < 2:
        return ()
    tol = rtol * float(ev[-1] - ev[0])
    close = np.diff(ev) <= tol
    clusters = []
    start = None
    for i, c in enumerate(close):
        if c and start is None:
            start = i
        elif not c and start is not None:
            clusters.append((start, i + 1))
            start = None
    if start is not None:
        clusters.append((start, ev.size))
    return tuple(clusters)


def _eigh(a, seed):
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}", seed=seed) from exc


def _eigh_embedded(h, seed):
    """Hermitian eigenproblem through the real symmetric 2N x 2N embedding.

    Each eigenvalue of ``H = X + iY`` appears twice in ``[[X, -Y], [Y, X]]``
    and every real vector ``(u, w)`` of that 2D eigenspace maps to a complex
    eigenvector ``u + i w``. Pairs are matched by eigenvalue equality within
    ``PAIR_TOL`` and one complex representative is kept per pair.
    """
    n = h.shape[0]
    x, y = h.real, h.imag
    emb = np.block([[x, -y], [y, x]])
    vals, vecs = _eigh(emb, seed)
    tol = PAIR_TOL * max(1.0, float(vals[-1] - vals[0]))

    gaps = np.diff(vals)
    if np.all(gaps[0::2] <= tol) and np.all(gaps[1::2] > tol):
        # generic case: clean, well-separated pairs
        z = vecs[:n, 0::2] + 1j * vecs[n:, 0::2]
        z /= np.linalg.norm(z, axis=0)
        return (vals[0::2] + vals[1::2]) / 2, z

    out_vals = np.empty(n)
    out_vecs = np.empty((n, n), dtype=np.complex128)
    k = 0
    i = 0
    while i < 2 * n:
        j = i + 1
        while j < 2 * n and vals[j] - vals[j - 1] <= tol:
            j += 1
        size = j - i
        if size % 2:
            raise EigenSolverError(
                f"embedding eigenvalue run of odd length {size} at index {i}", seed=seed
            )
        m = size // 2
        z = vecs[:n, i:j] + 1j * vecs[n:, i:j]
        # z spans an m-dimensional complex space; orthonormalize it
        u, _, _ = np.linalg.svd(z, full_matrices=False)
        basis = u[:, :m]
        rq = np.real(np.einsum("ij,ik,kj->j", basis.conj(), h, basis))
        order = np.argsort(rq, kind="stable")
        out_vals[k : k + m] = rq[order]
        out_vecs[:, k : k + m] = basis[:, order]
        k += m
        i = j
    if k != n:
        raise EigenSolverError(f"pair matching recovered {k} of {n} eigenpairs", seed=seed)
    return out_vals, out_vecs


def decompose(h, method="embedding") -> HamiltonianSpectrum:
    """Full spectrum of a real symmetric or complex Hermitian matrix.

    ``method`` selects the GUE path: ``"embedding"`` (real solver on the
    doubled real matrix) or ``"native"`` (complex Hermitian solver).
    Real matrices always use the real symmetric solver.
    """
    if isinstance(h, RandomMatrix):
        a, cls = h.entries, h.cls
        seed = h.seed if not h.stream else (h.seed, h.stream)
    else:
        a = np.asarray(h)
        cls = SymmetryClass.GUE if np.iscomplexobj(a) else SymmetryClass.GOE
        seed = None
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if method not in ("embedding", "native"):
        raise ConfigurationError(f"unknown eigensolver method {method!r}", field="method")

    if np.iscomplexobj(a):
        if method == "embedding":
            vals, vecs = _eigh_embedded(a, seed)
        else:
            vals, vecs = _eigh(a, seed)
    else:
        vals, vecs = _eigh(a.astype(np.float64), seed)

    clusters = degeneracy_clusters(vals)
    if clusters:
        log.info("degenerate eigenvalue clusters %s (seed=%s)", clusters, seed)
    return HamiltonianSpectrum(vals, vecs, cls, clusters, seed)


def eigen_coefficients(states, spec: HamiltonianSpectrum) -> np.ndarray:
    """Coefficients ``<E_n|a>`` for a state vector or a (size, N) stack of them."""
    a = states.amplitudes if isinstance(states, QuantumState) else np.asarray(states)
    if a.shape[-1] != spec.dim:
        raise ShapeError(f"state dimension {a.shape[-1]} != spectrum dimension {spec.dim}")
    return a @ spec.eigenvectors.conj()


def eigen_weights(state, spec: HamiltonianSpectrum) -> WeightVector:
    return WeightVector(np.abs(eigen_coefficients(state, spec)) ** 2)


def fold_clusters(weights, clusters) -> np.ndarray:
    """Sum weights inside each degeneracy cluster into one effective level.

    Works on a single vector or on the last axis of a stack.
    """
    w = np.asarray(weights)
    if not clusters:
        return w
    keep = np.ones(w.shape[-1], dtype=bool)
    w = w.copy()
    for start, stop in clusters:
        w[..., start] = w[..., start:stop].sum(axis=-1)
        keep[start + 1 : stop] = False
    return w[..., keep]


# Binary dump: magic, <uint32 n, uint8 class, uint8 has_seed, uint64 seed>,
# then little-endian float64 eigenvalues and eigenvectors (real part, then
# imaginary part for GUE), eigenvectors in row-major order.
_MAGIC = b"QBSPEC1\x00"
_HEADER = struct.Struct("<IBBQ")
_CLASS_CODES = {SymmetryClass.GUE: 0, SymmetryClass.GOE: 1}


def dump_spectrum(spec: HamiltonianSpectrum) -> bytes:
    has_seed = spec.seed is not None
    parts = [
        _MAGIC,
        _HEADER.pack(spec.dim, _CLASS_CODES[spec.cls], int(has_seed), spec.seed if has_seed else 0),
        spec.eigenvalues.astype("<f8").tobytes(),
    ]
    vecs = spec.eigenvectors
    parts.append(np.ascontiguousarray(vecs.real, dtype="<f8").tobytes())
    if spec.cls is SymmetryClass.GUE:
        parts.append(np.ascontiguousarray(vecs.imag, dtype="<f8").tobytes())
    return b"".join(parts)


def load_spectrum(data: bytes) -> HamiltonianSpectrum:
    if data[: len(_MAGIC)] != _MAGIC:
        raise ShapeError("not a spectrum dump")
    off = len(_MAGIC)
    n, code, has_seed, seed = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    cls = {v: k for k, v in _CLASS_CODES.items()}[code]
    nblocks = 2 if cls is SymmetryClass.GUE else 1
    expected = off + 8 * (n + nblocks * n * n)
    if len(data) != expected:
        raise ShapeError(f"spectrum dump has {len(data)} bytes, expected {expected}")
    vals = np.frombuffer(data, "<f8", n, off).astype(np.float64)
    off += 8 * n
    vecs = np.frombuffer(data, "<f8", n * n, off).reshape(n, n).astype(np.float64)
    if cls is SymmetryClass.GUE:
        off += 8 * n * n
        vecs = vecs + 1j * np.frombuffer(data, "<f8", n * n, off).reshape(n, n)
    return HamiltonianSpectrum(vals, vecs, cls, degeneracy_clusters(vals), seed if has_seed else None)
