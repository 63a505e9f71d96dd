import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbirthmark.ensembles import QuantumState, SymmetryClass, sample_haar_state, sample_matrix
from qbirthmark.errors import ConfigurationError, EigenSolverError, ShapeError
from qbirthmark.spectral import (
    decompose,
    degeneracy_clusters,
    dump_spectrum,
    eigen_coefficients,
    eigen_weights,
    fold_clusters,
    load_spectrum,
)
from qbirthmark.stats import EstimatorResult

from conftest import sigma_distance


def _check_spectrum(h, spec):
    v, e = spec.eigenvectors, spec.eigenvalues
    assert np.all(np.diff(e) >= 0)
    assert np.max(np.abs(v.conj().T @ v - np.eye(spec.dim))) < 1e-10
    recon = (v * e) @ v.conj().T
    assert np.linalg.norm(recon - h) <= 1e-8 * max(np.linalg.norm(h), 1e-300)


def test_diagonal_matrix():
    spec = decompose(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(spec.eigenvalues, [1, 2, 3])
    assert np.allclose(np.abs(spec.eigenvectors), np.eye(3))
    assert spec.degeneracy_clusters == ()


def test_pauli_x():
    spec = decompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(spec.eigenvalues, [-1, 1], atol=1e-15)


@pytest.mark.parametrize("method", ["embedding", "native"])
@pytest.mark.parametrize("n", [1, 2, 17, 64])
def test_sampled_reconstruction(cls, method, n):
    h = sample_matrix(cls, n, seed=n)
    spec = decompose(h, method=method)
    assert spec.cls is cls
    _check_spectrum(h.entries, spec)


def test_embedding_matches_native_solver():
    h = sample_matrix("GUE", 40, seed=5)
    a, b = decompose(h, "embedding"), decompose(h, "native")
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) < 1e-12
    overlap = np.abs(a.eigenvectors.conj().T @ b.eigenvectors)
    assert np.max(np.abs(overlap - np.eye(40))) < 1e-10


def test_embedding_handles_degenerate_complex_spectrum():
    # exact twofold degeneracy: the embedded problem has a fourfold run
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    e = np.array([-1.0, 0.5, 0.5, 1.0, 2.0])
    h = (q * e) @ q.conj().T
    h = (h + h.conj().T) / 2
    spec = decompose(h, "embedding")
    _check_spectrum(h, spec)
    assert spec.degeneracy_clusters == ((1, 3),)


def test_unknown_method():
    with pytest.raises(ConfigurationError):
        decompose(np.eye(2), method="lanczos")


def test_nonsquare_rejected():
    with pytest.raises(ShapeError):
        decompose(np.zeros((2, 3)))


def test_solver_failure_carries_seed(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(EigenSolverError) as info:
        decompose(sample_matrix("GOE", 3, seed=42))
    assert info.value.seed == 42
    assert "42" in str(info.value)


def test_degeneracy_clusters():
    assert degeneracy_clusters([0.0, 1.0, 1.0, 1.0, 2.0, 3.0, 3.0]) == ((1, 4), (5, 7))
    assert degeneracy_clusters([1.0]) == ()
    assert degeneracy_clusters([0.0, 1.0, 2.0]) == ()
    assert degeneracy_clusters([2.0, 2.0]) == ((0, 2),)


def test_fold_clusters():
    w = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(fold_clusters(w, ((1, 3),)), [0.1, 0.5, 0.4])
    stack = np.stack([w, w[::-1]])
    assert np.allclose(fold_clusters(stack, ((0, 2),)), [[0.3, 0.3, 0.4], [0.7, 0.2, 0.1]])


def test_eigen_weights_of_eigenvector():
    spec = decompose(sample_matrix("GUE", 6, seed=2))
    w = eigen_weights(QuantumState(spec.eigenvectors[:, 3]), spec).weights
    expected = np.zeros(6)
    expected[3] = 1
    assert np.allclose(w, expected, atol=1e-12)


def test_eigen_weights_against_diagonal_spectrum(cls):
    spec = decompose(np.diag([3.0, -1.0, 0.5, 2.0]))
    s = sample_haar_state(cls, 4, 1)
    # eigh orders the eigenvalues: (-1, 0.5, 2, 3) come from entries (1, 2, 3, 0)
    assert np.allclose(eigen_weights(s, spec).weights, np.abs(s.amplitudes[[1, 2, 3, 0]]) ** 2)


def test_dimension_mismatch():
    spec = decompose(np.eye(3))
    with pytest.raises(ShapeError):
        eigen_weights(sample_haar_state("GOE", 4, 0), spec)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(SymmetryClass)), st.integers(1, 40), st.integers(0, 2**32))
def test_eigen_weights_are_valid(cls, n, seed):
    spec = decompose(sample_matrix(cls, n, seed))
    w = eigen_weights(sample_haar_state(cls, n, seed, stream=1), spec).weights
    assert w.min() >= 0 and abs(w.sum() - 1) < 1e-10


def test_haar_state_ipr_against_goe_eigenbasis():
    n, trials = 64, 10_000
    vals = np.empty(trials)
    for k in range(trials):
        spec = decompose(sample_matrix("GOE", n, 1, stream=k))
        p = np.abs(eigen_coefficients(sample_haar_state("GOE", n, 2, stream=k), spec)) ** 2
        vals[k] = p @ p
    assert sigma_distance(EstimatorResult.from_samples(vals), 3 / 66) < 4


@pytest.mark.parametrize("n", [6, 12])
def test_eigenvector_rows_follow_dirichlet_moments(cls, n):
    """Eigenvector components are uniform on the sphere: Dirichlet(alpha) moments."""
    k = cls.pairing_factor
    sq, pair = [], []
    for s in range(10_000):
        v = decompose(sample_matrix(cls, n, 17, stream=s)).eigenvectors
        p = np.abs(v[0]) ** 2  # weights of site state e_1 over the eigenbasis
        sq.append(p[0] ** 2)
        pair.append(p[0] * p[1])
    assert sigma_distance(EstimatorResult.from_samples(sq), k / (n * (n + k - 1))) < 4
    assert sigma_distance(EstimatorResult.from_samples(pair), 1 / (n * (n + k - 1))) < 4


def test_spectrum_dump_roundtrip(cls):
    spec = decompose(sample_matrix(cls, 7, seed=99))
    blob = dump_spectrum(spec)
    back = load_spectrum(blob)
    assert back.cls is cls and back.seed == 99 and back.dim == 7
    assert np.array_equal(back.eigenvalues, spec.eigenvalues)
    assert np.array_equal(back.eigenvectors, spec.eigenvectors)
    with pytest.raises(ShapeError):
        load_spectrum(blob[:-8])
    with pytest.raises(ShapeError):
        load_spectrum(b"garbage" + blob)
