"""Monte Carlo check of the conditional CLT rate E D(S_n | Y_n) = O(n^{-(1-alpha)/(4+alpha)}).

Labels Y take finitely many values, so the conditional law of S_n given a
realization depends only on the label counts; each distinct count vector is
convolved exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .bounds import c_of_t
from .clt import RateFit, convolve_scaled, fit_loglog
from .density import AnalyticDensity, Grid, GridDensity, gaussian, gaussian_mixture
from .divergences import d_to_gaussian
from .errors import AlphaNotLessThanOne, RangeError
from .norms import fisher_information

MIN_MC_SAMPLES = 30
DEFAULT_GRID = Grid.symmetric(16.0, 4096)


def alpha_exponent(k: float, u: float) -> tuple[float, float]:
    """(alpha, rate) with alpha = 6/k + 3/u and rate = (1 - alpha)/(4 + alpha)."""
    if not (k > 6 and u > 3):
        raise RangeError(f"need k > 6 and u > 3, got k={k}, u={u}")
    alpha = 6.0 / k + 3.0 / u
    if alpha >= 1.0:
        raise AlphaNotLessThanOne(f"alpha = {alpha} >= 1")
    return alpha, (1.0 - alpha) / (4.0 + alpha)


def truncation_exponent(k: float, u: float) -> float:
    """s = 5 / (3 + 6u/k + 4u), the proof's choice; lies in (1/u, 1) exactly when alpha < 1."""
    return 5.0 / (3.0 + 6.0 * u / k + 4.0 * u)


@dataclass(frozen=True)
class ConditionalFamily:
    labels: tuple[Hashable, ...]
    probs: tuple[float, ...]
    conditionals: Mapping[Hashable, AnalyticDensity]
    moment_order_k: float
    fisher_order_u: float
    name: str = "custom"

    def __post_init__(self) -> None:
        labels, probs = tuple(self.labels), tuple(float(p) for p in self.probs)
        if len(labels) != len(probs) or not labels:
            raise RangeError("labels and probs must be nonempty and of equal length")
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-12:
            raise RangeError("label probabilities must be >= 0 and sum to 1")
        if set(labels) != set(self.conditionals):
            raise RangeError("every label needs exactly one conditional law")
        alpha_exponent(self.moment_order_k, self.fisher_order_u)
        for y in labels:
            d = self.conditionals[y]
            if not (math.isfinite(d.abs_moment(self.moment_order_k)) and math.isfinite(d.fisher())):
                raise RangeError(f"conditional law for label {y!r} lacks a finite moment or Fisher information")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "conditionals", dict(self.conditionals))

    @property
    def alpha(self) -> float:
        return alpha_exponent(self.moment_order_k, self.fisher_order_u)[0]

    @property
    def rate(self) -> float:
        return alpha_exponent(self.moment_order_k, self.fisher_order_u)[1]

    def conditional_moment(self, y) -> float:
        """E(|X|^k | Y = y)."""
        return self.conditionals[y].abs_moment(self.moment_order_k)

    def conditional_fisher(self, y) -> float:
        return self.conditionals[y].fisher()

    def moment_k(self) -> float:
        """E|X|^k = sum_y P(y) E(|X|^k | y)."""
        return sum(p * self.conditional_moment(y) for y, p in zip(self.labels, self.probs))

    def fisher_moment_u(self) -> float:
        """E J^u(X | Y)."""
        return sum(p * self.conditional_fisher(y) ** self.fisher_order_u for y, p in zip(self.labels, self.probs))


# standardized two-component mixtures: weights (0.3, 0.7), means (-0.7 d, 0.3 d),
# common variance 1 - 0.21 d^2, so every conditional has mean 0 and variance 1
MIXTURE_SEPARATIONS = (0.8, 1.4, 2.0)
LABEL_PROBS = (0.3, 0.4, 0.3)
CONTROL_MEANS = (-0.3, 0.0, 0.3)
CONTROL_VARIANCES = (0.8, 1.0, 1.3)


def separated_mixture(delta: float) -> AnalyticDensity:
    var = 1.0 - 0.21 * delta * delta
    if var <= 0:
        raise RangeError("separation too large for a unit-variance mixture")
    return gaussian_mixture([0.3, 0.7], [-0.7 * delta, 0.3 * delta], [var, var])


def mixture_family(k: float = 16.0, u: float = 8.0) -> ConditionalFamily:
    conds = {i: separated_mixture(d) for i, d in enumerate(MIXTURE_SEPARATIONS)}
    return ConditionalFamily(tuple(conds), LABEL_PROBS, conds, k, u, name="mixture")


def gaussian_family(k: float = 16.0, u: float = 8.0) -> ConditionalFamily:
    conds = {i: gaussian(m, v) for i, (m, v) in enumerate(zip(CONTROL_MEANS, CONTROL_VARIANCES))}
    return ConditionalFamily(tuple(conds), LABEL_PROBS, conds, k, u, name="gaussian")


FAMILIES = {"mixture": mixture_family, "gaussian": gaussian_family}


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_realization(fam: ConditionalFamily, n: int, seed: int, index: int = 0) -> list:
    """n i.i.d. labels.  The stream depends on (seed, index) only, so a longer
    realization extends a shorter one drawn with the same pair."""
    if n < 1:
        raise RangeError("n must be >= 1")
    u = _stream(seed, index).random(n)
    cdf = np.cumsum(fam.probs)
    cdf[-1] = 1.0
    picks = np.searchsorted(cdf, u, side="right")
    return [fam.labels[i] for i in picks]


def label_counts(fam: ConditionalFamily, y_vec: Sequence) -> tuple[int, ...]:
    index = {y: i for i, y in enumerate(fam.labels)}
    counts = [0] * len(fam.labels)
    for y in y_vec:
        counts[index[y]] += 1
    return tuple(counts)


def _density_from_counts(fam: ConditionalFamily, counts: Sequence[int], grid: Grid) -> GridDensity:
    n = sum(counts)
    if n < 1:
        raise RangeError("y_vec must be nonempty")
    parts = [(fam.conditionals[y], c) for y, c in zip(fam.labels, counts) if c]
    return convolve_scaled(parts, grid, math.sqrt(n))


def conditional_sum_density(fam: ConditionalFamily, y_vec: Sequence, grid: Grid = DEFAULT_GRID) -> GridDensity:
    """Density of sum_i (X | Y = y_i) / sqrt(n), convolved by label multiplicity."""
    return _density_from_counts(fam, label_counts(fam, y_vec), grid)


def conditional_d(fam: ConditionalFamily, y_vec: Sequence, grid: Grid = DEFAULT_GRID) -> float:
    """D(S_n | Y_n = y_vec), against the Gaussian with the conditional mean and variance."""
    return max(d_to_gaussian(conditional_sum_density(fam, y_vec, grid)), 0.0)


def fisher_subadditivity(fam: ConditionalFamily, y_vec: Sequence, grid: Grid = DEFAULT_GRID) -> tuple[float, float]:
    """(J(S_n | y), (1/n) sum_i J(X | y_i))."""
    lhs = fisher_information(conditional_sum_density(fam, y_vec, grid))
    rhs = float(np.mean([fam.conditional_fisher(y) for y in y_vec]))
    return lhs, rhs


@dataclass(frozen=True)
class TruncationDiag:
    s_exponent: float
    M: float
    frac_in_A1: float
    frac_in_A2: float
    frac_in_AM: float
    chebyshev_lower: float
    std_err_AM: float
    am_bound: float  # bound on A(M) realizations with its unknown constant set to 1; not asserted

    def coverage_ok(self, n_se: float = 3.0) -> bool:
        return self.frac_in_AM >= self.chebyshev_lower - n_se * self.std_err_AM


@dataclass(frozen=True)
class CcltEstimate:
    n: int
    mean_d: float
    std_err: float
    samples: int
    truncation: TruncationDiag
    values: tuple[float, ...] = field(default=(), repr=False)

    def row(self) -> dict:
        t = self.truncation
        return {
            "n": self.n,
            "mean_d": self.mean_d,
            "std_err": self.std_err,
            "samples": self.samples,
            "s_exponent": t.s_exponent,
            "M": t.M,
            "frac_in_A1": t.frac_in_A1,
            "frac_in_A2": t.frac_in_A2,
            "frac_in_AM": t.frac_in_AM,
        }


CSV_COLUMNS = ("n", "mean_d", "std_err", "samples", "s_exponent", "M", "frac_in_A1", "frac_in_A2", "frac_in_AM")


def am_bound(n: int, M: float, s: float, k: float, epsilon: float) -> float:
    """(M^{4/k}/n^{1-2s} + 3)^{1/2} (M^{3/k}/n^{1/2-3s/2})^{1/2-eps}, constant taken as 1."""
    return math.sqrt(M ** (4.0 / k) / n ** (1.0 - 2.0 * s) + 3.0) * (
        M ** (3.0 / k) / n ** (0.5 - 1.5 * s)
    ) ** (0.5 - epsilon)


def expected_d_sweep(
    fam: ConditionalFamily,
    n_list: Sequence[int],
    mc_samples: int = 50,
    seed: int = 0,
    grid: Grid = DEFAULT_GRID,
    epsilon: float = 0.01,
) -> list[CcltEstimate]:
    """Monte Carlo estimate of E D(S_n | Y_n) for each n, with paired label streams."""
    if mc_samples < MIN_MC_SAMPLES:
        raise RangeError(f"mc_samples must be >= {MIN_MC_SAMPLES}")
    k, u = fam.moment_order_k, fam.fisher_order_u
    s = truncation_exponent(k, u)
    cond_mom = np.array([fam.conditional_moment(y) for y in fam.labels])
    cond_fish = np.array([fam.conditional_fisher(y) for y in fam.labels])
    EXk, EJu = fam.moment_k(), fam.fisher_moment_u()
    cache: dict[tuple[int, ...], float] = {}
    out = []
    for n in n_list:
        M = float(n) ** (s * u)
        in_a1 = cond_fish <= float(n) ** s
        in_a2 = cond_mom <= M
        ds, f1, f2, fm = [], 0, 0, 0
        for j in range(mc_samples):
            counts = label_counts(fam, sample_realization(fam, n, seed, j))
            if counts not in cache:
                cache[counts] = max(d_to_gaussian(_density_from_counts(fam, counts, grid)), 0.0)
            ds.append(cache[counts])
            used = np.array(counts) > 0
            a1, a2 = bool(np.all(in_a1[used])), bool(np.all(in_a2[used]))
            f1 += a1
            f2 += a2
            fm += a1 and a2
        frac_am = fm / mc_samples
        diag = TruncationDiag(
            s_exponent=s,
            M=M,
            frac_in_A1=f1 / mc_samples,
            frac_in_A2=f2 / mc_samples,
            frac_in_AM=frac_am,
            chebyshev_lower=1.0 - n * (EXk / M + EJu / float(n) ** (s * u)),
            std_err_AM=math.sqrt(frac_am * (1.0 - frac_am) / mc_samples),
            am_bound=am_bound(n, M, s, k, epsilon),
        )
        arr = np.array(ds)
        out.append(
            CcltEstimate(
                n=int(n),
                mean_d=float(arr.mean()),
                std_err=float(arr.std(ddof=1) / math.sqrt(mc_samples)),
                samples=mc_samples,
                truncation=diag,
                values=tuple(float(v) for v in arr),
            )
        )
    return out


def fit_cclt_rate(estimates: Sequence[CcltEstimate]) -> RateFit:
    return fit_loglog([e.n for e in estimates], [e.mean_d for e in estimates])


def vj_control(fam: ConditionalFamily, t: float) -> float:
    """C(t)(V(X) + E J(X|Y))^t, the proof's bound off the truncation set (before the probability factor)."""
    means = np.array([fam.conditionals[y].mean for y in fam.labels])
    second = np.array([fam.conditionals[y].variance for y in fam.labels]) + means**2
    p = np.array(fam.probs)
    V = float(p @ second - (p @ means) ** 2)
    EJ = float(p @ np.array([fam.conditional_fisher(y) for y in fam.labels]))
    return c_of_t(t) * (V + EJ) ** t
