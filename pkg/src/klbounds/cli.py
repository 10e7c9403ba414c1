"""Command-line entry point.

    klbounds battery --seed 7 --pairs 200 --out r.json
    klbounds clt --family mixture --n 2,4,...,256 --out c.csv
    klbounds cclt --family mixture --k 16 --u 8 --n 4,8,...,64 --out cc.csv
    klbounds bounds --config pair.yaml --out b.json
    klbounds summarize r.json

Exit status: 0 when the run recorded no invariant failures, 1 when it did,
2 for configuration or report-parsing errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import yaml

from . import __version__
from .battery import DEFAULT_PAIRS, DEFAULT_SEED, BatteryMember, BatteryResult, evaluate_member, run_battery
from .cclt import FAMILIES, expected_d_sweep, fit_cclt_rate
from .cclt import CSV_COLUMNS as CCLT_COLUMNS
from .clt import (
    CSV_COLUMNS as CLT_COLUMNS,
    DEFAULT_N_LIST,
    SumSpec,
    bound_thm35,
    clt_sweep,
    component_by_name,
    empirical_llt_constant,
    fit_rate,
)
from .density import STANDARD_NORMAL, Grid, default_grid, density_from_spec, discretize
from .errors import ConfigError, KLBoundsError, ReportParseError
from .report import CsvReport, render_json, summarize, write_atomic

COMMANDS = ("battery", "bounds", "clt", "cclt")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_CCLT_N = (4, 8, 16, 32, 64)


def parse_n_list(text) -> tuple[int, ...]:
    """'2,4,8' or '2,4,...,256'.  With an ellipsis the first two terms fix the
    progression: geometric when the second is an integer multiple (>= 2) of
    the first, arithmetic otherwise."""
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        if "..." in parts:
            i = parts.index("...")
            if i != 2 or len(parts) != 4:
                raise ConfigError(f"ellipsis form must be 'a,b,...,last', got {text!r}")
            a, b, last = int(parts[0]), int(parts[1]), int(parts[3])
            if b <= a or a < 1:
                raise ConfigError(f"progression must increase from a positive start: {text!r}")
            out = [a]
            if b % a == 0 and b // a >= 2:
                r = b // a
                while out[-1] * r <= last:
                    out.append(out[-1] * r)
            else:
                while out[-1] + (b - a) <= last:
                    out.append(out[-1] + (b - a))
            if out[-1] != last:
                raise ConfigError(f"{last} is not a term of the progression in {text!r}")
            return tuple(out)
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"cannot parse n list {text!r}") from exc


@dataclass
class ExperimentConfig:
    command: str
    output_path: str | None = None
    seed: int = DEFAULT_SEED
    grid: dict = field(default_factory=lambda: {"span": 16.0, "points": 4096})
    distributions: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not self.output_path:
            raise ConfigError("an output path is required (--out or 'output' in the config)")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        pts, span = self.grid.get("points"), self.grid.get("span")
        if not isinstance(pts, int) or pts < 256 or pts & (pts - 1):
            raise ConfigError(f"grid points must be a power of two >= 256, got {pts!r}")
        if not isinstance(span, (int, float)) or not span > 0 or not math.isfinite(span):
            raise ConfigError(f"grid span must be positive, got {span!r}")
        return self

    @property
    def target_grid(self) -> Grid:
        return Grid.symmetric(float(self.grid["span"]), int(self.grid["points"]))


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    unknown = set(data) - {"command", "output", "seed", "grid", "distributions", "params"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    data = load_config(args.config)
    command = args.command or data.get("command")
    grid = {"span": 16.0, "points": 4096}
    if "grid" in data:
        if not isinstance(data["grid"], dict):
            raise ConfigError("grid must be a mapping with span and points")
        grid.update(data["grid"])
    if args.grid_points is not None:
        grid["points"] = args.grid_points
    if args.grid_span is not None:
        grid["span"] = args.grid_span
    params = dict(data.get("params") or {})
    for key in ("pairs", "family", "n", "mc_samples", "k", "u", "epsilon"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    dists = data.get("distributions") or []
    if not isinstance(dists, list):
        raise ConfigError("distributions must be a list of density specs")
    cfg = ExperimentConfig(
        command=command,
        output_path=args.out or data.get("output"),
        seed=args.seed if args.seed is not None else data.get("seed", DEFAULT_SEED),
        grid=grid,
        distributions=dists,
        params=params,
    )
    return cfg.validate()


def _metadata(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"command": cfg.command, "version": __version__, "seed": cfg.seed,
            "grid_span": float(cfg.grid["span"]), "grid_points": int(cfg.grid["points"])}
    meta.update(extra)
    return meta


def _densities(cfg: ExperimentConfig):
    try:
        return [density_from_spec(d) for d in cfg.distributions]
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"bad density spec: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def run_battery_cmd(cfg: ExperimentConfig) -> tuple[str, int]:
    pairs = int(cfg.params.get("pairs", DEFAULT_PAIRS))
    if pairs < 1:
        raise ConfigError("pairs must be >= 1")
    res = run_battery(cfg.seed, pairs, int(cfg.grid["points"]))
    doc = res.to_dict()
    doc["metadata"] = _metadata(cfg, pairs=pairs)
    return render_json(doc), EXIT_OK if not res.failures() else EXIT_FAIL


def run_bounds_cmd(cfg: ExperimentConfig) -> tuple[str, int]:
    dens = _densities(cfg)
    if not 1 <= len(dens) <= 2:
        raise ConfigError("bounds needs one (X) or two (X, Y) distributions")
    x = dens[0]
    y = dens[1] if len(dens) == 2 else STANDARD_NORMAL
    points = int(cfg.grid["points"])
    grid = default_grid(x, y, points=points, min_span=float(cfg.grid["span"]))
    xs = x.standardized()
    member = BatteryMember(0, "config", x, y, grid, discretize(x, grid), discretize(y, grid),
                           discretize(xs, default_grid(xs, points=points, min_span=float(cfg.grid["span"]))))
    res = BatteryResult(cfg.seed, 1, points, [evaluate_member(member)])
    doc = res.to_dict()
    doc["metadata"] = _metadata(cfg)
    return render_json(doc), EXIT_OK if not res.failures() else EXIT_FAIL


def run_clt_cmd(cfg: ExperimentConfig) -> tuple[str, int]:
    dens = _densities(cfg)
    if dens:
        comp = dens[0]
        comp = comp.affine(1.0, -comp.mean)
        family = comp.family
    else:
        family = str(cfg.params.get("family", "mixture"))
        try:
            comp = component_by_name(family)
        except KLBoundsError as exc:
            raise ConfigError(str(exc)) from exc
    ns = parse_n_list(cfg.params.get("n", list(DEFAULT_N_LIST)))
    k = int(cfg.params.get("k", 4))
    eps = float(cfg.params.get("epsilon", 0.1))
    rep = CsvReport(_metadata(cfg, family=family, n_list=" ".join(map(str, ns)), k=k, epsilon=eps), CLT_COLUMNS)
    try:
        spec = SumSpec(comp, ns, cfg.target_grid)
    except KLBoundsError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        pts = clt_sweep(spec)
    except KLBoundsError as exc:
        rep.failures.append(f"sweep: {type(exc).__name__}: {exc}")
        return rep.render(), EXIT_FAIL
    rep.rows = [p.row() for p in pts]
    if len(pts) >= 4:
        for fld in ("linf", "d_sn"):
            try:
                f = fit_rate(pts, fld)
                rep.notes += [(f"{fld}_slope", f.slope), (f"{fld}_r2", f.r_squared)]
            except KLBoundsError as exc:
                rep.notes.append((f"{fld}_slope", f"unavailable ({type(exc).__name__})"))
    C = empirical_llt_constant(pts) if any(p.norms.linf > 0 for p in pts) else 0.0
    rep.notes.append(("llt_constant", C))
    for p in pts:
        if p.norms.linf > 0.5:
            rep.notes.append((f"entropic_bound_n{p.n}", "not applicable (linf > 1/2)"))
            continue
        try:
            b = bound_thm35(p, k, eps, C)
        except KLBoundsError as exc:
            rep.failures.append(f"entropic bound n={p.n}: {type(exc).__name__}: {exc}")
            continue
        rep.notes.append((f"entropic_bound_n{p.n}", b))
        if p.d_sn > b + 1e-6:
            rep.failures.append(f"entropic bound n={p.n}: d_sn {p.d_sn!r} exceeds bound {b!r}")
    return rep.render(), EXIT_OK if rep.passed else EXIT_FAIL


def run_cclt_cmd(cfg: ExperimentConfig) -> tuple[str, int]:
    family = str(cfg.params.get("family", "mixture"))
    if family not in FAMILIES:
        raise ConfigError(f"cclt family must be one of {sorted(FAMILIES)}, got {family!r}")
    k, u = float(cfg.params.get("k", 16)), float(cfg.params.get("u", 8))
    ns = parse_n_list(cfg.params.get("n", list(DEFAULT_CCLT_N)))
    mc = int(cfg.params.get("mc_samples", 50))
    try:
        fam = FAMILIES[family](k, u)
    except KLBoundsError as exc:
        raise ConfigError(str(exc)) from exc
    rep = CsvReport(
        _metadata(cfg, family=family, k=k, u=u, alpha=fam.alpha, rate=fam.rate, mc_samples=mc,
                  n_list=" ".join(map(str, ns))),
        CCLT_COLUMNS,
    )
    try:
        est = expected_d_sweep(fam, ns, mc, cfg.seed, cfg.target_grid)
    except KLBoundsError as exc:
        rep.failures.append(f"sweep: {type(exc).__name__}: {exc}")
        return rep.render(), EXIT_FAIL
    rep.rows = [e.row() for e in est]
    for e in est:
        t = e.truncation
        rep.notes.append((f"chebyshev_lower_n{e.n}", t.chebyshev_lower))
        rep.notes.append((f"am_bound_n{e.n}", t.am_bound))
        if not t.coverage_ok():
            rep.failures.append(f"coverage n={e.n}: frac_in_AM {t.frac_in_AM!r} below Chebyshev bound {t.chebyshev_lower!r}")
    if len(est) >= 4 and all(e.mean_d > 0 for e in est):
        f = fit_cclt_rate(est)
        rep.notes += [("mean_d_slope", f.slope), ("mean_d_r2", f.r_squared)]
    return rep.render(), EXIT_OK if rep.passed else EXIT_FAIL


RUNNERS = {"battery": run_battery_cmd, "bounds": run_bounds_cmd, "clt": run_clt_cmd, "cclt": run_cclt_cmd}


def run(cfg: ExperimentConfig) -> int:
    """Execute ``cfg`` and write its report; returns the exit status."""
    try:
        text, status = RUNNERS[cfg.command](cfg)
    except ConfigError:
        raise
    except KLBoundsError as exc:
        # computational failure outside the per-item guards: still a structured report
        failure = f"{type(exc).__name__}: {exc}"
        if cfg.command in ("battery", "bounds"):
            text = render_json({"metadata": _metadata(cfg), "entries": [], "failures": [{"error": failure}],
                                "summary": {"bounds": {}, "failure_count": 1}})
        else:
            cols = CLT_COLUMNS if cfg.command == "clt" else CCLT_COLUMNS
            text = CsvReport(_metadata(cfg), cols, failures=[failure]).render()
        status = EXIT_FAIL
    write_atomic(cfg.output_path, text)
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config; flags override its keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path (.json for battery/bounds, .csv for clt/cclt)")
    p.add_argument("--pairs", type=int, help="battery size")
    p.add_argument("--family", help="component or conditional family name")
    p.add_argument("--n", help="n values, e.g. 2,4,8 or 2,4,...,256")
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--grid-span", dest="grid_span", type=float)
    p.add_argument("--k", type=float, help="moment order")
    p.add_argument("--u", type=float, help="Fisher-information moment order")
    p.add_argument("--epsilon", type=float)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klbounds", description="KL-divergence bounds and CLT rate experiments")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        _add_run_flags(sub.add_parser(name, help=f"run the {name} experiment"))
    s = sub.add_parser("summarize", help="print a text summary of a report")
    s.add_argument("report")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "summarize":
            sys.stdout.write(summarize(args.report))
            return EXIT_OK
        return run(build_config(args))
    except (ConfigError, ReportParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
