import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from klbounds import bounds as B
from klbounds.cli import parse_n_list
from klbounds.density import Grid, discretize, gaussian, gaussian_mixture, moments, tail_prob
from klbounds.divergences import d_to_gaussian, kl, kl_generator
from klbounds.norms import lp_diff, positive_part_mass

G = Grid.symmetric(16.0, 4096)
SETTINGS = settings(max_examples=30, deadline=None)

means = st.floats(-2.0, 2.0)
variances = st.floats(0.3, 3.0)


def pmfs(k):
    return st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k).map(lambda v: np.array(v) / sum(v))


@st.composite
def pmf_pairs(draw):
    k = draw(st.integers(2, 6))
    return draw(pmfs(k)), draw(pmfs(k))


@SETTINGS
@given(means, variances, means, variances)
def test_gaussian_kl_closed_form_and_pinsker(m1, v1, m2, v2):
    p, q = discretize(gaussian(m1, v1), G), discretize(gaussian(m2, v2), G)
    exact = 0.5 * (v1 / v2 + (m1 - m2) ** 2 / v2 - 1 + math.log(v2 / v1))
    got = kl(p, q).value
    assert abs(got - exact) <= 1e-6
    assert B.pinsker_lower(min(lp_diff(p, q, 1), 2.0)) <= got + 1e-9


@SETTINGS
@given(pmf_pairs())
def test_pmf_upper_bounds_dominate(pq):
    P, Q = pq
    oracle = B.pmf_kl(P, Q)
    assert B.sason_discrete(P, Q) >= oracle - 1e-12
    lo, hi = B.likelihood_ratio_range(P, Q)
    tv = B.pmf_tv(P, Q)
    assert B.reverse_pinsker_sason(1 / hi, lo, tv) >= oracle - 1e-12
    if lo < 1 < hi:
        assert B.binette_sup(kl_generator, tv / 2, lo, hi) >= oracle - 1e-12


@SETTINGS
@given(st.floats(0.05, 0.95), means, variances, means, variances)
def test_scheffe_identity(w, m1, v1, m2, v2):
    a = discretize(gaussian_mixture([w, 1 - w], [m1, -m1], [v1, v1]), G)
    b = discretize(gaussian(m2, v2), G)
    assert abs(lp_diff(a, b, 1) - 2 * positive_part_mass(a, b)) <= 1e-9


@SETTINGS
@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_m_epsilon_monotone(e1, e2):
    assume(abs(e1 - e2) > 1e-6)
    lo, hi = sorted((e1, e2))
    assert B.m_epsilon(lo) >= B.m_epsilon(hi)
    assert B.m_epsilon(lo) > 1.0


@SETTINGS
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.1, 3.0))
def test_half_log_vj_below_c_of_t(V, J, t):
    assume(V * J >= 1.0)
    ct, half_log = B.d_from_vj(V, J, t)
    assert half_log <= ct + 1e-12


@SETTINGS
@given(st.floats(1e-8, 0.25), st.sampled_from([3.0, 4.0, 6.0]), st.sampled_from([0.05, 0.1, 0.25]),
       st.floats(1.0, 3.0))
def test_linf_value_homogeneity(linf, s, eps, m):
    ratio = B.kl_from_linf_value(2 * linf, m, s, eps) / B.kl_from_linf_value(linf, m, s, eps)
    assert abs(ratio - 2 ** ((1 - 2 / s) * (1 - eps))) <= 1e-9


@SETTINGS
@given(st.floats(0.05, 0.95), st.floats(0.1, 1.5), st.floats(0.3, 2.0))
def test_lyapunov_monotone(w, m, v):
    d = gaussian_mixture([w, 1 - w], [m, -w * m / (1 - w)], [v, v])
    orders = [1.0, 2.0, 3.0, 4.0, 6.0]
    am = moments(d, orders).abs_moments
    norms = [am[s] ** (1 / s) for s in orders]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


@SETTINGS
@given(means, variances, st.floats(0.0, 6.0), st.floats(0.0, 6.0))
def test_tail_monotone(m, v, a1, a2):
    lo, hi = sorted((a1, a2))
    d = gaussian(m, v)
    assert tail_prob(d, hi) <= tail_prob(d, lo) + 1e-15


@SETTINGS
@given(st.integers(1, 20), st.integers(2, 4), st.integers(1, 5))
def test_parse_geometric_lists(a, r, terms):
    seq = tuple(a * r**i for i in range(terms + 2))
    assert parse_n_list(f"{seq[0]},{seq[1]},...,{seq[-1]}") == seq
    assert parse_n_list(",".join(map(str, seq))) == seq


@SETTINGS
@given(st.floats(0.0, 0.9), st.floats(0.5, 4.0), st.sampled_from([3.0, 4.0, 6.0]))
def test_explicit_bound_dominates_d(delta, A, s):
    p = discretize(gaussian_mixture([0.5, 0.5], [-delta, delta], [1 - delta * delta] * 2), G)
    assert B.bound_gaussian_explicit(p, A, s).value >= d_to_gaussian(p) - 1e-9
