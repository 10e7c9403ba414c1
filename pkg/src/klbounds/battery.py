"""Seeded battery of random density pairs, with every bound evaluated on each.

Pair kinds:

* ``full``: Y has full support (Gaussian or mixture), X from any family;
* ``near``: X is a small perturbation of a full-support Y;
* ``zero``: Y is a smoothed uniform (numerical zeros), X a narrower one inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import bounds as B
from .density import (
    AnalyticDensity,
    Grid,
    GridDensity,
    default_grid,
    discretize,
    gaussian,
    gaussian_mixture,
    smoothed_uniform,
    standardized_gamma,
)
from .divergences import d_to_gaussian_paths, kl, kl_generator
from .errors import (
    AbsoluteContinuityViolation,
    CrossCheckFailure,
    KLBoundsError,
    L2TooLarge,
    LinfTooLarge,
    NoFeasibleParams,
    RangeError,
    SupportViolation,
    ZeroReferenceMass,
)
from .norms import fisher_information, norm_report, positive_part_mass

DEFAULT_SEED = 7
DEFAULT_PAIRS = 200
KIND_PROBS = {"full": 0.5, "near": 0.25, "zero": 0.25}
VJ_TS = (0.5, 1.0)

# errors that only mean "this bound does not apply here"
INAPPLICABLE = (
    L2TooLarge,
    LinfTooLarge,
    SupportViolation,
    ZeroReferenceMass,
    NoFeasibleParams,
    RangeError,
)


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _draw_gaussian(rng) -> AnalyticDensity:
    return gaussian(rng.uniform(-1, 1), rng.uniform(0.5, 2.0))


def _draw_mixture(rng) -> AnalyticDensity:
    k = int(rng.integers(2, 4))
    w = rng.dirichlet(np.full(k, 2.0))
    return gaussian_mixture(w, rng.uniform(-2, 2, k), rng.uniform(0.25, 1.5, k))


def _draw_uniform(rng) -> AnalyticDensity:
    a = rng.uniform(-2.0, -0.25)
    return smoothed_uniform(a, a + rng.uniform(0.5, 3.0), rng.uniform(0.05, 0.5))


def _draw_gamma(rng) -> AnalyticDensity:
    return standardized_gamma(rng.uniform(4.0, 20.0))


FULL_SUPPORT = (_draw_gaussian, _draw_mixture)
ANY_FAMILY = (_draw_gaussian, _draw_mixture, _draw_uniform, _draw_gamma)


def _perturb(rng, y: AnalyticDensity) -> AnalyticDensity:
    eta = rng.uniform(0.02, 0.3)
    if y.family == "gaussian":
        p = y.params()
        return gaussian(p["mean"] + eta * rng.uniform(-1, 1), p["variance"] * (1 + eta * rng.uniform(-0.5, 0.5)))
    p = y.params()
    means = np.array(p["means"]) + eta * rng.uniform(-1, 1, len(p["means"]))
    w = np.array(p["weights"]) * (1 + eta * rng.uniform(-0.5, 0.5, len(p["weights"])))
    return gaussian_mixture(w / w.sum(), means, p["variances"])


def draw_pair(seed: int, index: int) -> tuple[str, AnalyticDensity, AnalyticDensity]:
    """(kind, X, Y) for battery member ``index``; depends only on (seed, index)."""
    rng = _stream(seed, index)
    kind = str(rng.choice(list(KIND_PROBS), p=list(KIND_PROBS.values())))
    if kind == "full":
        y = FULL_SUPPORT[int(rng.integers(len(FULL_SUPPORT)))](rng)
        x = ANY_FAMILY[int(rng.integers(len(ANY_FAMILY)))](rng)
    elif kind == "near":
        y = FULL_SUPPORT[int(rng.integers(len(FULL_SUPPORT)))](rng)
        x = _perturb(rng, y)
    else:
        y = _draw_uniform(rng)
        p = y.params()
        a, b, h = p["a"], p["b"], p["bandwidth"]
        lo = a + rng.uniform(0.0, 0.3) * (b - a)
        hi = b - rng.uniform(0.0, 0.3) * (b - a)
        x = smoothed_uniform(lo, hi, h * rng.uniform(0.5, 1.0))
    return kind, x, y


@dataclass
class BatteryMember:
    index: int
    kind: str
    x: AnalyticDensity
    y: AnalyticDensity
    grid: Grid
    p_x: GridDensity
    p_y: GridDensity
    std_x: GridDensity  # X standardized, discretized from its analytic form

    @classmethod
    def build(cls, seed: int, index: int, points: int = 4096) -> "BatteryMember":
        kind, x, y = draw_pair(seed, index)
        grid = default_grid(x, y, points=points)
        xs = x.standardized()
        return cls(index, kind, x, y, grid, discretize(x, grid), discretize(y, grid),
                   discretize(xs, default_grid(xs, points=points)))


def iter_members(seed: int = DEFAULT_SEED, pairs: int = DEFAULT_PAIRS, points: int = 4096) -> Iterator[BatteryMember]:
    for i in range(pairs):
        yield BatteryMember.build(seed, i, points)


@dataclass
class BatteryEntry:
    index: int
    kind: str
    x: dict
    y: dict
    grid: dict
    oracle: dict
    checks: dict
    reports: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def failures(self) -> list[dict]:
        out = [
            {"index": self.index, "bound": r.name, "slack": r.slack, "reason": "negative slack" if not r.lower else "lower bound exceeds oracle"}
            for r in self.reports
            if not r.ok
        ]
        out += [{"index": self.index, "bound": e["bound"], "slack": None, "reason": e["error"]} for e in self.errors]
        for name, ok in self.checks.get("passed", {}).items():
            if not ok:
                out.append({"index": self.index, "bound": name, "slack": None, "reason": "invariant check failed"})
        return out

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "x": self.x,
            "y": self.y,
            "grid": self.grid,
            "oracle": self.oracle,
            "checks": self.checks,
            "reports": [r.to_dict() for r in self.reports],
            "errors": self.errors,
        }


def _guard(entry: BatteryEntry, name: str, params: B.BoundParams, fn: Callable[[], B.BoundReport | list]) -> None:
    """Run one evaluation; inapplicable preconditions become a report, other errors a failure."""
    try:
        out = fn()
    except INAPPLICABLE as exc:
        entry.reports.append(B.not_applicable(name, params, f"{type(exc).__name__}: {exc}"))
        return
    except KLBoundsError as exc:
        entry.errors.append({"bound": name, "error": f"{type(exc).__name__}: {exc}"})
        return
    if isinstance(out, list):
        entry.reports.extend(out)
    else:
        entry.reports.append(out)


def _pmf_reports(P: np.ndarray, Q: np.ndarray) -> list[B.BoundReport]:
    oracle = B.pmf_kl(P, Q)
    tv = B.pmf_tv(P, Q)
    lo, hi = B.likelihood_ratio_range(P, Q)
    out = []
    if not math.isfinite(oracle):
        reason = "P is not absolutely continuous w.r.t. Q"
        return [B.not_applicable(n, B.BoundParams(), reason, oracle) for n in ("sason_ratio", "sason_discrete", "binette_kl")]
    out.append(B._report("sason_ratio", B.reverse_pinsker_sason(min(1.0 / hi, 1.0), min(lo, 1.0), min(tv, 2.0)),
                         B.BoundParams(), oracle, {"beta1": 1.0 / hi, "beta2": lo, "tv": tv}))
    keep = Q > 0
    try:
        out.append(B._report("sason_discrete", B.sason_discrete(P[keep], Q[keep]), B.BoundParams(), oracle,
                             {"min_Q": float(Q[keep].min()), "tv": tv}))
    except ZeroReferenceMass as exc:
        out.append(B.not_applicable("sason_discrete", B.BoundParams(), str(exc), oracle))
    if lo < 1.0 < hi:
        # the bound is attained at delta = tv / 2; the [0, 2] convention doubles it
        val = B.binette_sup(kl_generator, tv, lo, hi)
        out.append(B._report("binette_kl", val, B.BoundParams(), oracle, {"m": lo, "M": hi, "delta": tv}))
    else:
        out.append(B.not_applicable("binette_kl", B.BoundParams(), "likelihood ratio range does not straddle 1", oracle))
    return out


def evaluate_member(m: BatteryMember) -> BatteryEntry:
    norms = norm_report(m.p_x, m.p_y)
    try:
        oracle_kl = kl(m.p_x, m.p_y).value
    except AbsoluteContinuityViolation:
        oracle_kl = math.inf
    direct, via_entropy = d_to_gaussian_paths(m.std_x)
    d_x = direct
    scheffe_gap = abs(norms.l1 - 2.0 * positive_part_mass(m.p_x, m.p_y))
    interp_slack = norms.linf * norms.l1 + 1e-9 - norms.l2**2
    J = fisher_information(m.std_x)
    V = m.std_x.variance
    entry = BatteryEntry(
        index=m.index,
        kind=m.kind,
        x=m.x.to_spec(),
        y=m.y.to_spec(),
        grid=m.grid.to_dict(),
        oracle={"kl": oracle_kl, "d_x": d_x, "d_x_entropy_path": via_entropy, "tv": norms.l1,
                "l2": norms.l2, "linf": norms.linf, "fisher_x": J, "variance_x": V},
        checks={
            "d_path_gap": abs(direct - via_entropy),
            "scheffe_gap": scheffe_gap,
            "l2_interp_slack": interp_slack,
            "passed": {
                "d_paths_agree": abs(direct - via_entropy) <= 1e-5,
                "scheffe": scheffe_gap <= 1e-9,
                "l2_interp": interp_slack >= 0.0,
            },
        },
    )
    none = B.BoundParams()

    if math.isfinite(oracle_kl):
        entry.reports.append(B.pinsker_report(m.p_x, m.p_y, oracle_kl))
        entry.reports.extend(_pmf_reports(B.grid_pmf(m.p_x), B.grid_pmf(m.p_y)))
        default = B.DEFAULT_PARAMS["general"]
        _guard(entry, "general", default, lambda: B.bound_general(m.p_x, m.p_y, default, oracle_kl))
        _guard(entry, "general", none, lambda: B.bound_general(
            m.p_x, m.p_y, B.optimize_params("general", m.p_x, m.p_y), oracle_kl))
        zp = B.DEFAULT_PARAMS["zero_point"]
        _guard(entry, "zero_point", zp, lambda: B.bound_zero_point(m.p_x, m.p_y, zp, oracle_kl))
        _guard(entry, "zero_point", none, lambda: B.bound_zero_point(
            m.p_x, m.p_y, B.optimize_params("zero_point", m.p_x, m.p_y), oracle_kl))
    else:
        reason = "X is not absolutely continuous w.r.t. Y on the grid"
        for name in ("pinsker_lower", "sason_ratio", "sason_discrete", "binette_kl", "general", "zero_point"):
            entry.reports.append(B.not_applicable(name, none, reason, oracle_kl))

    p = m.std_x
    ge = B.DEFAULT_PARAMS["gaussian_explicit"]
    _guard(entry, "gaussian_explicit", ge, lambda: B.bound_gaussian_explicit(p, ge.A, ge.s, d_x))
    _guard(entry, "gaussian_explicit", none, lambda: B.evaluate(
        "gaussian_explicit", p, None, B.optimize_params("gaussian_explicit", p), d_x))
    for s in B.S_CHOICES:
        _guard(entry, "gaussian_l1l2", B.BoundParams(s=s), lambda s=s: B.bound_gaussian_l1l2(p, s, d_x))
    for s in (3.0, 4.0):
        for eps in B.EPS_CHOICES:
            _guard(entry, "kl_from_linf", B.BoundParams(s=s, epsilon=eps),
                   lambda s=s, eps=eps: _linf_with_form_check(p, s, eps, d_x))
    entry.reports.append(B._report("half_log_vj", B.d_from_vj(V, J, 1.0)[1], none, d_x, {"V": V, "J": J}))
    for t in VJ_TS:
        entry.reports.append(B._report("c_of_t_vj", B.d_from_vj(V, J, t)[0], B.BoundParams(), d_x, {"t": t, "V": V, "J": J}))
    return entry


def _linf_with_form_check(p, s, eps, d_x) -> B.BoundReport:
    r = B.bound_kl_from_linf(p, s, eps, d_x)
    if r.terms["form_sqrt_log"] > r.terms["form_m_epsilon"] * (1 + 1e-12):
        raise CrossCheckFailure("sqrt-log form exceeds the M(eps) form")
    return r


@dataclass
class BatteryResult:
    seed: int
    pairs: int
    points: int
    entries: list

    def failures(self) -> list[dict]:
        return [f for e in self.entries for f in e.failures()]

    def summary(self) -> dict:
        by_name: dict[str, list[float]] = {}
        skipped: dict[str, int] = {}
        for e in self.entries:
            for r in e.reports:
                if r.preconditions_met:
                    by_name.setdefault(r.name, []).append(r.slack)
                else:
                    skipped[r.name] = skipped.get(r.name, 0) + 1
        rows = {}
        for name in sorted(set(by_name) | set(skipped)):
            sl = np.array(by_name.get(name, []))
            rows[name] = {
                "evaluated": int(sl.size),
                "not_applicable": skipped.get(name, 0),
                "min_slack": float(sl.min()) if sl.size else None,
                "median_slack": float(np.median(sl)) if sl.size else None,
                "max_slack": float(sl.max()) if sl.size else None,
            }
        return {"bounds": rows, "failure_count": len(self.failures())}

    def to_dict(self) -> dict:
        return {
            "metadata": {"command": "battery", "seed": self.seed, "pairs": self.pairs, "grid_points": self.points},
            "entries": [e.to_dict() for e in self.entries],
            "failures": self.failures(),
            "summary": self.summary(),
        }


def run_battery(seed: int = DEFAULT_SEED, pairs: int = DEFAULT_PAIRS, points: int = 4096) -> BatteryResult:
    entries = [evaluate_member(m) for m in iter_members(seed, pairs, points)]
    return BatteryResult(seed, pairs, points, entries)
