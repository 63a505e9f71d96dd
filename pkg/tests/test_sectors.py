import numpy as np
import pytest

from qbirthmark.birthmark import analytic_ratio, estimate_enhancement
from qbirthmark.ensembles import sample_haar_state, sample_matrix
from qbirthmark.errors import ConfigurationError, DomainError
from qbirthmark.sectors import (
    SectorLayout,
    analytic_sector_ratio,
    build_block_hamiltonian,
    estimate_sector_ratio,
    estimate_uneven_overlap,
    sample_restricted_state,
)
from qbirthmark.spectral import decompose

from conftest import sigma_distance


def test_layout_invariants():
    lay = SectorLayout((4, 4, 8), (2, 0))
    assert lay.total == 16
    assert lay.accessible == (0, 2)
    assert lay.accessible_dim == 12
    assert lay.offsets == (0, 4, 8)
    assert lay.accessible_mask.sum() == 12
    with pytest.raises(ConfigurationError):
        SectorLayout((4, 0), (0,))
    with pytest.raises(ConfigurationError):
        SectorLayout((4, 4), ())
    with pytest.raises(ConfigurationError):
        SectorLayout((4, 4), (2,))


def test_single_block_equals_sample_matrix(cls):
    h = build_block_hamiltonian(SectorLayout.full([9]), cls, seed=5).entries
    assert np.array_equal(h, sample_matrix(cls, 9, seed=5).entries)


def test_block_zero_pattern(cls):
    h = build_block_hamiltonian(SectorLayout.full([2, 3]), cls, seed=1).entries
    mask = np.zeros((5, 5), dtype=bool)
    mask[:2, :2] = mask[2:, 2:] = True
    assert np.all(h[~mask] == 0)
    assert np.all(h[mask] != 0)


def test_eigenvectors_live_in_one_block():
    spec = decompose(build_block_hamiltonian(SectorLayout.full([4, 4]), "GOE", seed=3))
    v = spec.eigenvectors
    for k in range(8):
        assert min(np.sum(v[:4, k] ** 2), np.sum(v[4:, k] ** 2)) < 1e-20


def test_restricted_state_zeros(cls):
    lay = SectorLayout((3, 2, 4), (1,))
    s = sample_restricted_state(lay, cls, seed=2)
    assert np.all(s.amplitudes[~lay.accessible_mask] == 0)
    assert s.amplitudes.dtype == cls.dtype


def test_all_accessible_is_unrestricted(cls):
    lay = SectorLayout.full([3, 5])
    a = sample_restricted_state(lay, cls, seed=4).amplitudes
    assert np.array_equal(a, sample_haar_state(cls, 8, seed=4).amplitudes)


def test_dim1_sector_is_basis_state(cls):
    s = sample_restricted_state(SectorLayout((3, 1, 2), (1,)), cls, seed=0).amplitudes
    assert abs(abs(s[3]) - 1) < 1e-15
    assert np.count_nonzero(s) == 1


def test_analytic_sector_ratio():
    assert analytic_sector_ratio("GUE", 10, 10) == analytic_ratio("GUE", 10)
    assert analytic_sector_ratio("GOE", 10, 10) == analytic_ratio("GOE", 10)
    assert analytic_sector_ratio("GUE", 8, 4) == pytest.approx(3.2)
    assert analytic_sector_ratio("GOE", 8, 4) == pytest.approx(4.0)
    assert analytic_sector_ratio("GOE", 16, 4) == pytest.approx(3 * 16 / 6)
    with pytest.raises(DomainError):
        analytic_sector_ratio("GUE", 4, 5)


@pytest.mark.parametrize("n", [2, 3, 8, 31, 200])
def test_restriction_always_amplifies(cls, n):
    full = analytic_ratio(cls, n)
    for d in range(1, n):
        assert analytic_sector_ratio(cls, n, d) > full


def test_gue_restricted_mean_dilation():
    r = estimate_sector_ratio(SectorLayout((4, 4), (0,)), "GUE", 100_000, seed=1)
    assert sigma_distance(r.p_aa_stats, 0.4) < 4
    assert abs(r.ratio - 3.2) < 4 * r.ratio_stderr


def test_goe_cross_overlap_stays_one_over_n():
    r = estimate_sector_ratio(SectorLayout((4, 12), (0,)), "GOE", 100_000, seed=2)
    assert sigma_distance(r.p_ab_stats, 1 / 16) < 4
    assert r.analytic_ratio == pytest.approx(8.0)
    assert r.passed()


def test_full_access_reduces_to_unrestricted(cls):
    r = estimate_sector_ratio(SectorLayout.full([8]), cls, 100_000, seed=3)
    assert r.analytic_ratio == analytic_ratio(cls, 8)
    assert r.passed()


def test_matrix_path(cls):
    r = estimate_sector_ratio(SectorLayout((3, 5, 4), (0, 2)), cls, 3000, seed=6, path="matrix")
    assert r.metadata["accessible_dim"] == 7
    assert r.passed()


def test_per_sector_reduction(cls):
    # estimating inside a single sector of dimension d restores the RMT ratio for d
    d = 6
    r = estimate_enhancement(cls, d, 100_000, seed=d)
    assert abs(r.ratio - analytic_ratio(cls, d)) < 4 * r.ratio_stderr


def test_uneven_occupation(cls):
    layout = SectorLayout.full([4, 4, 8])
    w = np.array([0.6, 0.3, 0.1])
    r = estimate_uneven_overlap(layout, cls, w, 100_000, seed=7)
    k = cls.pairing_factor
    # independent Dirichlet blocks: E sum p^2 = sum_alpha w_alpha^2 k / (d_alpha + k - 1)
    expected = sum(wa**2 * k / (d + k - 1) for wa, d in zip(w, layout.sector_dims))
    assert sigma_distance(r.p_aa_stats, expected) < 4
    assert sigma_distance(r.p_ab_stats, 1 / 16) < 4
    assert r.ratio > analytic_ratio(cls, 16)


def test_matched_uniform_occupation_approaches_full_space_law(cls):
    # weights proportional to sector sizes sit slightly below the full-space
    # self overlap at finite N and converge to it as the sectors grow
    k = cls.pairing_factor
    for d in (8, 256):
        layout = SectorLayout.full([d, d])
        r = estimate_uneven_overlap(layout, cls, [0.5, 0.5], 20_000, seed=d)
        expected = 0.5 * k / (d + k - 1)
        assert sigma_distance(r.p_aa_stats, expected) < 4
        assert expected < k / (2 * d + k - 1)
    assert abs(expected / (k / (2 * d + k - 1)) - 1) < 0.01


def test_bad_sector_weights():
    with pytest.raises(ConfigurationError):
        estimate_uneven_overlap(SectorLayout.full([2, 2]), "GUE", [0.7, 0.7], 10, 0)
    with pytest.raises(ConfigurationError):
        estimate_sector_ratio(SectorLayout.full([2, 2]), "GUE", 10, 0, path="nope")
