import numpy as np
import pytest
from scipy.linalg import expm

from qbirthmark.birthmark import long_time_overlap
from qbirthmark.dynamics import (
    SERIES_CUTOFF,
    convergence_curve,
    error_envelope,
    finite_time_average,
    kappa,
    overlap_at_time,
    spectral_limit,
)
from qbirthmark.ensembles import QuantumState, sample_haar_state, sample_matrix
from qbirthmark.errors import DomainError, ShapeError
from qbirthmark.spectral import decompose, eigen_weights


@pytest.fixture
def gue16():
    h = sample_matrix("GUE", 16, seed=2024)
    return h, decompose(h), sample_haar_state("GUE", 16, 1), sample_haar_state("GUE", 16, 2)


def _two_level(omega):
    spec = decompose(np.diag([0.0, omega]))
    plus = QuantumState(np.array([1.0, 1.0]) / np.sqrt(2))
    return spec, plus


def test_overlap_at_zero_time(gue16):
    _, spec, a, _ = gue16
    assert overlap_at_time(spec, a, a, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_stationary_state(gue16):
    _, spec, _, b = gue16
    a = QuantumState(spec.eigenvectors[:, 5])
    static = abs(np.vdot(b.amplitudes, a.amplitudes)) ** 2
    for t in (0.0, 0.3, 17.0, 1e4):
        assert overlap_at_time(spec, a, b, t) == pytest.approx(static, abs=1e-13)


def test_two_level_analytic():
    omega = 1.7
    spec, plus = _two_level(omega)
    for t in np.linspace(0, 5, 11):
        assert overlap_at_time(spec, plus, plus, t) == pytest.approx((1 + np.cos(omega * t)) / 2, abs=1e-14)
    assert overlap_at_time(spec, plus, plus, np.pi / omega) < 1e-15


def test_overlap_errors(gue16):
    _, spec, a, _ = gue16
    with pytest.raises(ShapeError):
        overlap_at_time(spec, a, sample_haar_state("GUE", 8, 0), 1.0)
    with pytest.raises(DomainError):
        overlap_at_time(spec, a, a, np.inf)


def test_unitarity(gue16):
    _, spec, a, _ = gue16
    for t in (0.0, 1.3, 250.0):
        total = sum(overlap_at_time(spec, a, QuantumState(e), t) for e in np.eye(16))
        assert abs(total - 1) < 1e-10


def test_matches_matrix_exponential_oracle():
    h = sample_matrix("GOE", 6, seed=8)
    spec = decompose(h)
    a, b = sample_haar_state("GOE", 6, 3), sample_haar_state("GOE", 6, 4)
    for t in (0.5, 3.0, 40.0):
        amp = b.amplitudes.conj() @ expm(-1j * h.entries * t) @ a.amplitudes
        assert overlap_at_time(spec, a, b, t) == pytest.approx(abs(amp) ** 2, abs=1e-12)

    # composite Gauss-Legendre over U(t) = expm(-iHt), fully independent of the spectrum
    horizon = 30.0
    x, w = np.polynomial.legendre.leggauss(40)
    edges = np.linspace(0, horizon, 61)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts = (x + 1) * (hi - lo) / 2 + lo
        vals = [abs(b.amplitudes @ expm(-1j * h.entries * t) @ a.amplitudes) ** 2 for t in ts]
        total += (hi - lo) / 2 * np.dot(w, vals)
    assert finite_time_average(spec, a, b, horizon) == pytest.approx(total / horizon, abs=1e-10)


def test_closed_form_vs_quadrature():
    spec = decompose(sample_matrix("GUE", 8, seed=1))
    a, b = sample_haar_state("GUE", 8, 5), sample_haar_state("GUE", 8, 6)
    for x, y in ((a, b), (a, a)):
        closed = finite_time_average(spec, x, y, 100.0)
        quad = finite_time_average(spec, x, y, 100.0, method="quadrature")
        assert abs(closed - quad) < 1e-6


def test_eigenstate_average_is_one(gue16):
    _, spec, _, _ = gue16
    e = QuantumState(spec.eigenvectors[:, 0])
    for horizon in (1e-3, 1.0, 1e5):
        assert finite_time_average(spec, e, e, horizon) == pytest.approx(1.0, abs=1e-12)


def test_bad_horizon(gue16):
    _, spec, a, b = gue16
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            finite_time_average(spec, a, b, bad)


def test_short_time_limit():
    spec = decompose(sample_matrix("GOE", 8, seed=3))
    a, b = sample_haar_state("GOE", 8, 4), sample_haar_state("GOE", 8, 5)
    horizon = 1e-6 / spec.spectral_range
    assert abs(finite_time_average(spec, a, b, horizon) - abs(a.amplitudes @ b.amplitudes) ** 2) < 1e-6


def test_kappa_series_is_continuous():
    x = np.array([0.0, SERIES_CUTOFF * 0.999, SERIES_CUTOFF * 1.001, 1e-3, 2.0, -7.0])
    k = kappa(x)
    assert k[0] == 1
    direct = np.expm1(-1j * x[1:]) / (-1j * x[1:])
    assert np.max(np.abs(k[1:] - direct)) < 1e-10
    assert np.all(np.abs(k) <= 1 + 1e-15)


def test_limit_equals_eigen_weight_overlap(gue16):
    _, spec, a, b = gue16
    ref = long_time_overlap(eigen_weights(a, spec), eigen_weights(b, spec))
    assert spectral_limit(spec, a, b) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("seed", range(6))
def test_convergence_within_ten_over_horizon(seed):
    h = sample_matrix("GUE" if seed % 2 else "GOE", 12, seed=seed)
    spec = decompose(h)
    a, b = sample_haar_state(h.cls, 12, seed, 1), sample_haar_state(h.cls, 12, seed, 2)
    for x, y in ((a, a), (a, b)):
        for t_units in (1e2, 1e3, 1e4):
            err = abs(finite_time_average(spec, x, y, t_units / spec.mean_level_spacing) - spectral_limit(spec, x, y))
            assert err <= 10 / t_units


def test_envelope_bounds_error_and_is_monotone(gue16):
    _, spec, a, b = gue16
    horizons = np.logspace(-1, 5, 25)
    for x, y in ((a, a), (a, b)):
        curve = convergence_curve(spec, x, y, horizons)
        assert np.all(curve.abs_errors <= curve.envelope + 1e-14)
        assert np.all(np.diff(curve.envelope) <= 0)
        assert np.all((curve.values >= -1e-12) & (curve.values <= 1 + 1e-12))


def test_convergence_curve_gue16(gue16):
    _, spec, a, b = gue16
    for x, y in ((a, a), (a, b)):
        curve = convergence_curve(spec, x, y, [1e2, 1e3, 1e4])
        err = curve.abs_errors
        assert err[-1] == err.min()
        assert curve.rel_errors[-1] < 1e-2
        assert curve.times[-1] == pytest.approx(1e4 / spec.mean_level_spacing)


def test_stationary_curve_is_flat(gue16):
    _, spec, _, _ = gue16
    e = QuantumState(spec.eigenvectors[:, 7])
    curve = convergence_curve(spec, e, e, [1, 10, 100])
    assert np.allclose(curve.values, 1.0, atol=1e-12)
    assert np.allclose(curve.abs_errors, 0.0, atol=1e-12)


def test_curve_rows_and_validation(gue16):
    _, spec, a, b = gue16
    curve = convergence_curve(spec, a, b, [5.0, 50.0], unit="absolute")
    assert np.array_equal(curve.times, [5.0, 50.0])
    assert list(curve.rows()[0]) == ["T", "value", "limit", "abs_error"]
    with pytest.raises(DomainError):
        convergence_curve(spec, a, b, [10.0, 10.0])
    with pytest.raises(DomainError):
        convergence_curve(spec, a, b, [])


def test_degenerate_limit_uses_cluster_projector():
    # doubly degenerate level: the long-time average keeps the in-cluster coherence
    spec = decompose(np.diag([0.0, 1.0, 1.0]))
    a = QuantumState(np.array([0.0, 1.0, 1.0]) / np.sqrt(2))
    b = QuantumState(np.array([0.0, 1.0, 0.0]))
    assert spec.degeneracy_clusters == ((1, 3),)
    assert spectral_limit(spec, a, b) == pytest.approx(0.5)
    assert finite_time_average(spec, a, b, 1e6) == pytest.approx(0.5)
    assert error_envelope(spec, a, b, 1e6) == 0.0
