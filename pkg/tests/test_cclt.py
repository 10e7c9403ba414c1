import math

import numpy as np
import pytest

from klbounds.cclt import (
    ConditionalFamily,
    alpha_exponent,
    conditional_d,
    conditional_sum_density,
    expected_d_sweep,
    fisher_subadditivity,
    gaussian_family,
    label_counts,
    mixture_family,
    sample_realization,
    separated_mixture,
    truncation_exponent,
    vj_control,
)
from klbounds.clt import convolve_scaled
from klbounds.density import STANDARD_NORMAL, Grid, discretize, gaussian
from klbounds.errors import AlphaNotLessThanOne, RangeError

G = Grid.symmetric(16.0, 4096)


def _coin(k=16.0, u=8.0):
    conds = {"a": separated_mixture(1.0), "b": gaussian(0.0, 1.0)}
    return ConditionalFamily(("a", "b"), (0.5, 0.5), conds, k, u)


def test_alpha_values_and_limits():
    alpha, rate = alpha_exponent(16, 8)
    assert alpha == 0.75 and rate == pytest.approx(0.052632, abs=1e-6)
    alpha, rate = alpha_exponent(1e12, 1e12)
    assert alpha == pytest.approx(0.0, abs=1e-10) and rate == pytest.approx(0.25, abs=1e-10)
    with pytest.raises(AlphaNotLessThanOne):
        alpha_exponent(8, 4)
    with pytest.raises(RangeError):
        alpha_exponent(6, 8)
    with pytest.raises(RangeError):
        alpha_exponent(16, 3)


@pytest.mark.parametrize("k,u", [(16, 8), (7, 25), (100, 3.5), (12, 12), (7, 20), (8, 4)])
def test_truncation_exponent_range(k, u):
    # s > 1/u is equivalent to u (1 - 6/k) > 3, i.e. to alpha < 1
    s = truncation_exponent(k, u)
    assert s < 1.0
    assert (1.0 / u < s) == (6.0 / k + 3.0 / u < 1.0)


def test_single_label_realization():
    fam = ConditionalFamily(("only",), (1.0,), {"only": STANDARD_NORMAL}, 16, 8)
    assert sample_realization(fam, 50, seed=3) == ["only"] * 50


def test_realization_frequencies_and_pairing():
    fam = _coin()
    y = sample_realization(fam, 10_000, seed=1)
    assert label_counts(fam, y)[0] / 1e4 == pytest.approx(0.5, abs=0.02)
    assert sample_realization(fam, 10_000, seed=1) == y
    assert sample_realization(fam, 100, seed=1) == y[:100]
    assert sample_realization(fam, 100, seed=1, index=1) != y[:100]
    with pytest.raises(RangeError):
        sample_realization(fam, 0, seed=1)


def test_grouped_convolution_matches_any_order():
    a, b = separated_mixture(1.4), gaussian(0.3, 1.3)
    grouped = convolve_scaled([(a, 2), (b, 1)], G, math.sqrt(3))
    alternating = convolve_scaled([(a, 1), (b, 1), (a, 1)], G, math.sqrt(3))
    assert np.max(np.abs(grouped.values - alternating.values)) < 1e-10


def test_single_summand_is_the_conditional():
    fam = mixture_family()
    for y in fam.labels:
        exact = discretize(fam.conditionals[y], G)
        assert np.max(np.abs(conditional_sum_density(fam, [y], G).values - exact.values)) < 1e-7


def test_gaussian_conditionals_give_zero_d():
    fam = gaussian_family()
    for n in (1, 5, 32):
        assert conditional_d(fam, sample_realization(fam, n, seed=2), G) < 1e-6


def test_permutation_invariance():
    fam = mixture_family()
    y = sample_realization(fam, 12, seed=4)
    assert conditional_d(fam, y, G) == conditional_d(fam, y[::-1], G)


@pytest.mark.parametrize("n", [4, 8])
def test_fisher_subadditivity(n):
    fam = mixture_family()
    for j in range(3):
        lhs, rhs = fisher_subadditivity(fam, sample_realization(fam, n, seed=5, index=j), G)
        assert lhs <= rhs + 1e-6


def test_expected_d_decreases_with_n():
    est = expected_d_sweep(mixture_family(), [8, 64], mc_samples=30, seed=0, grid=G)
    assert est[1].mean_d < est[0].mean_d
    for e in est:
        assert e.samples == 30 and len(e.values) == 30
        assert e.std_err >= 0


def test_truncation_diagnostics():
    fam = mixture_family()
    est = expected_d_sweep(fam, [4, 16, 64], mc_samples=30, seed=0, grid=G)
    s = truncation_exponent(fam.moment_order_k, fam.fisher_order_u)
    for e in est:
        t = e.truncation
        assert t.s_exponent == s
        assert t.M == pytest.approx(e.n ** (s * fam.fisher_order_u))
        assert 0 <= t.frac_in_AM <= min(t.frac_in_A1, t.frac_in_A2) <= 1
        assert t.coverage_ok()
        assert set(e.row()) >= {"n", "mean_d", "frac_in_AM"}


def test_sweep_is_deterministic():
    a = expected_d_sweep(mixture_family(), [8], mc_samples=30, seed=9, grid=G)
    b = expected_d_sweep(mixture_family(), [8], mc_samples=30, seed=9, grid=G)
    assert a[0].values == b[0].values


def test_sweep_rejects_few_samples():
    with pytest.raises(RangeError):
        expected_d_sweep(mixture_family(), [8], mc_samples=29)


def test_family_validation():
    conds = {"a": STANDARD_NORMAL, "b": STANDARD_NORMAL}
    with pytest.raises(RangeError):
        ConditionalFamily(("a", "b"), (0.5, 0.6), conds, 16, 8)
    with pytest.raises(RangeError):
        ConditionalFamily(("a", "c"), (0.5, 0.5), conds, 16, 8)
    with pytest.raises(RangeError):
        ConditionalFamily(("a",), (0.5, 0.5), conds, 16, 8)
    with pytest.raises(AlphaNotLessThanOne):
        ConditionalFamily(("a", "b"), (0.5, 0.5), conds, 8, 4)
    with pytest.raises(RangeError):
        separated_mixture(3.0)


def test_family_moments():
    fam = gaussian_family()
    # E J(X|Y) for Gaussian conditionals is sum p / v
    ej = sum(p / fam.conditionals[y].variance for y, p in zip(fam.labels, fam.probs))
    assert fam.fisher_moment_u() == pytest.approx(
        sum(p * (1 / fam.conditionals[y].variance) ** 8 for y, p in zip(fam.labels, fam.probs)))
    assert vj_control(fam, 1.0) > 0
    assert vj_control(fam, 1.0) == pytest.approx(
        (fam_variance(fam) + ej) / (2 * math.e), rel=1e-12)


def fam_variance(fam):
    p = np.array(fam.probs)
    m = np.array([fam.conditionals[y].mean for y in fam.labels])
    v = np.array([fam.conditionals[y].variance for y in fam.labels])
    return float(p @ (v + m**2) - (p @ m) ** 2)
