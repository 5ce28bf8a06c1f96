import math

import numpy as np
import pytest

from diffred import (
    ConfigError,
    DiffRedConfig,
    EmbeddingMatrix,
    NumericError,
    Purpose,
    RandomStream,
    SpectrumProfile,
    auto_config,
    diffred_embed,
    energy_match,
    m1,
    pca_embed,
    rmap_embed,
    select_hyperparameters,
    stress_exact,
    synth_spiked,
    truncated_svd,
)


def _centered(profile, n, D, seed=0):
    return synth_spiked(n, D, SpectrumProfile(tuple(profile)), RandomStream(seed, Purpose.SYNTH_DATA), centered=True)


@pytest.fixture(scope="module")
def spiked30():
    return _centered([10.0] + [1.0] * 30, 150, 80, seed=2)


def test_full_rank_pca_is_isometric():
    A = np.diag([2.0, 1.0])
    with pytest.warns(UserWarning, match="centered"):
        emb = diffred_embed(A, DiffRedConfig(2, 0))
    assert emb.d == 2 and emb.method == "diffred"
    assert abs(stress_exact(A, emb.values)) < 1e-12
    assert m1(A, emb.values) < 1e-14


def test_k1_zero_equals_best_rmap(spiked30):
    emb = diffred_embed(spiked30, DiffRedConfig(0, 6, eta=15, seed=4))
    rm = rmap_embed(spiked30, 6, alpha=15, seed=4)
    best = int(np.argmin(rm.m1))
    np.testing.assert_array_equal(emb.values, rm.embeddings[best].values)
    assert emb.provenance["iteration_of_min"] == best


def test_k2_zero_equals_pca(spiked30):
    emb = diffred_embed(spiked30, DiffRedConfig(4, 0))
    np.testing.assert_array_equal(emb.values, pca_embed(spiked30, 4).values)


def test_decomposition_identity(spiked30):
    cfg, choice, summary = auto_config(spiked30, 10, eta=50, seed=1)
    emb = diffred_embed(spiked30, cfg, summary=summary)
    X = spiked30.values
    Vk = summary.V[:, : cfg.k1]
    A_star = X - (X @ Vk) @ Vk.T
    R = emb.values[:, cfg.k1 :]
    assert abs(m1(X, emb.values) - (1 - choice.p) * m1(A_star, R)) <= 1e-10


@pytest.mark.parametrize("k1,k2", [(0, 5), (1, 4), (2, 8), (5, 3)])
def test_stress_reduction_chain(spiked30, k1, k2):
    X = spiked30.values
    summary = truncated_svd(X, max(k1, 1))
    emb = diffred_embed(spiked30, DiffRedConfig(k1, k2, eta=10, seed=3), summary=summary)
    p = summary.p(k1)
    Vk = summary.V[:, :k1]
    A_star = X - (X @ Vk) @ Vk.T
    lhs = stress_exact(X, emb.values) ** 2
    rhs = (1 - p) * stress_exact(A_star, emb.values[:, k1:]) ** 2
    assert lhs <= rhs + 1e-10


def test_zero_residual_fills_zeros():
    A = _centered([3.0, 2.0], 20, 10)
    with pytest.warns(RuntimeWarning, match="residual is zero"):
        emb = diffred_embed(A, DiffRedConfig(2, 3))
    np.testing.assert_array_equal(emb.values[:, 2:], 0)
    assert emb.provenance["warnings"] == ["zero_residual"]


def test_dimension_checks(spiked30):
    with pytest.raises(ConfigError):
        diffred_embed(spiked30, DiffRedConfig(50, 50))
    with pytest.raises(ConfigError):
        DiffRedConfig(0, 0)
    with pytest.raises(ConfigError):
        DiffRedConfig(1, 1, eta=0)


def test_determinism(spiked30):
    a = diffred_embed(spiked30, DiffRedConfig(2, 8, eta=20, seed=7))
    b = diffred_embed(spiked30, DiffRedConfig(2, 8, eta=20, seed=7), threads=4)
    assert a.values.tobytes() == b.values.tobytes()


def test_pca_examples():
    A = _centered([3, 2, 1], 10, 6)
    assert stress_exact(A, pca_embed(A, 3).values) <= 1e-8
    emb = pca_embed(np.diag([3.0, 2.0, 1.0]), 1)
    np.testing.assert_allclose(emb.values[:, 0], [3, 0, 0], atol=1e-12)
    assert abs(np.sum(emb.values**2) - 9) < 1e-12
    B = _centered([2, 1, 1], 12, 8)
    assert abs(m1(B, pca_embed(B, 2).values) - 1 / 6) < 1e-12


def test_rmap_single_map_ci_undefined(spiked30):
    res = rmap_embed(spiked30, 5, alpha=1)
    assert len(res.embeddings) == 1
    assert res.m1_ci is None and res.stress_ci is None


def test_rmap_zero_energy_rejected():
    with pytest.raises(NumericError):
        rmap_embed(np.zeros((5, 4)), 2, alpha=2)


def test_rmap_bound_consistent_band():
    A = _centered([1.0] * 20, 200, 100, seed=5)
    res = rmap_embed(A, 20, alpha=20, seed=0)
    assert 0 < res.m1_mean < 0.2
    lo, hi = res.stress_ci
    assert lo < res.stress_mean < hi
    # normal-approximation interval, 1.96 standard errors
    half = 1.96 * np.std(res.stress, ddof=1) / math.sqrt(20)
    assert abs((hi - lo) / 2 - half) < 1e-12


def _bound_oracle(sigma, d):
    total = sum(s * s for s in sigma)
    out = []
    for k1 in range(d):
        p = sum(s * s for s in sigma[:k1]) / total
        out.append(math.sqrt((1 - p) / (d - k1)))
    return out


def test_select_flat_spectrum_picks_pure_rmap():
    A = _centered([1.0] * 60, 100, 80)
    choice = select_hyperparameters(truncated_svd(A, 10), 10)
    assert (choice.k1, choice.k2) == (0, 10)


def test_select_spiked_spectrum():
    sigma = [10.0] + [1.0] * 99
    A = _centered(sigma, 200, 120)
    choice = select_hyperparameters(truncated_svd(A, 10), 10)
    oracle = _bound_oracle(sigma, 10)
    assert (choice.k1, choice.k2) == (1, 9)
    assert abs(choice.p - 100 / 199) < 1e-9
    assert abs(choice.bound_value - 0.2351) < 1e-4
    np.testing.assert_allclose([row[3] for row in choice.scan], oracle, rtol=1e-9)
    assert abs(choice.scan[0][3] - math.sqrt(0.1)) < 1e-12


def test_select_scan_is_exhaustive(spiked30):
    summary = truncated_svd(spiked30, 12)
    for d in (1, 5, 12):
        choice = select_hyperparameters(summary, d)
        assert [(r[0], r[1]) for r in choice.scan] == [(k1, d - k1) for k1 in range(d)]
        assert choice.bound_value == min(r[3] for r in choice.scan)
    one = select_hyperparameters(summary, 1)
    assert (one.k1, one.k2, one.bound_value) == (0, 1, 1.0)
    with pytest.raises(ConfigError):
        select_hyperparameters(summary, 13)


def test_select_ties_prefer_small_k1():
    from diffred.spectral import SpectralSummary

    # p(1) = 0.5 makes (k1=0, k2=2) and (k1=1, k2=1) tie at sqrt(0.5)
    summary = SpectralSummary(np.array([1.0, 0.5]), np.eye(3)[:, :2], 2.0, True, 1)
    choice = select_hyperparameters(summary, 2)
    assert choice.scan[0][3] == choice.scan[1][3]
    assert (choice.k1, choice.k2) == (0, 2)


def test_select_zero_residual_cell():
    A = _centered([1.0] * 4, 30, 10)
    choice = select_hyperparameters(truncated_svd(A, 5), 5)
    assert choice.k1 == 4 and choice.bound_value < 1e-7


def test_energy_match(spiked30, rng):
    X = spiked30.values
    emb = pca_embed(spiked30, 3)
    matched = energy_match(emb, spiked30)
    assert m1(X, matched.values) <= 1e-12
    again = energy_match(matched, spiked30)
    assert abs(again.provenance["energy_match_scale"] - 1) < 1e-14
    doubled = energy_match(2 * matched.values, spiked30)
    assert abs(doubled.provenance["energy_match_scale"] - 0.5) < 1e-14
    np.testing.assert_allclose(doubled.values, matched.values, rtol=1e-14)
    ext = energy_match(rng.standard_normal((150, 2)), X)
    assert ext.method == "external" and m1(X, ext.values) <= 1e-12
    with pytest.raises(NumericError):
        energy_match(np.zeros((150, 2)), X)


def test_embedding_matrix_validates():
    with pytest.raises(NumericError):
        EmbeddingMatrix(np.array([[np.nan]]), "external")
