"""Command-line front end: configured experiments with reproducible outputs.

Subcommands
-----------
solve       one regularized solve, alpha fixed or discrepancy-chosen
rate-sweep  error-vs-noise sweep with slope verdict and CSV
dist-fn     distance-function values over a radius grid, CSV
vi-check    randomized inequality sweep, violation replay files
phi-grid    rate-function samples on a log grid, CSV

Problems are described by a TOML config; unknown keys anywhere in the file
are hard errors so a typo cannot silently change an experiment.  All
commands are deterministic functions of (config, seed): CSV outputs are
byte-identical across reruns.  Exit codes: 0 success/pass, 1 check failed,
2 config or feasibility error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter version
    import tomli as tomllib

from .param_choice import (
    DiscrepancyConfig,
    DiscrepancyInfeasibleError,
    alpha_strong_discrepancy,
)
from .rates import RateFunction, distance_report, minimal_subgradient
from .sequence_model import DecaySequence, DiagonalOperator, synthesize, tail_sum
from .solver import solve_diagonal
from .vi_verify import (
    MARGIN_SLACK,
    check_lemma_sums,
    check_vi,
    lemma_suite,
    load_sample,
    rate_bound_check,
    save_sample,
    vi_suite,
)

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "main"]


class ConfigError(ValueError):
    """Config file missing, malformed, or containing unknown/invalid keys."""


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    nu_hat: float
    K: float
    mu_hat: float | None
    K1: float | None
    sparse_support: tuple | None
    delta: float | None
    seed: int


@dataclass(frozen=True)
class SweepSpec:
    delta_min: float
    delta_max: float
    num_points: int
    seeds: tuple


@dataclass(frozen=True)
class OutputSpec:
    dir: str
    emit_phi_grid: bool
    dist_r_grid: tuple | None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    sweep: SweepSpec | None
    param_choice: DiscrepancyConfig
    outputs: OutputSpec


def _reject_unknown(table, allowed, where):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")


def _num(table, key, where, required=False, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing key '{key}' in [{where}]")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key '{key}' in [{where}] must be a number, got {v!r}")
    return float(v)


def _int(table, key, where, required=False, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing key '{key}' in [{where}]")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"key '{key}' in [{where}] must be an integer, got {v!r}")
    return v


def _parse_problem(table) -> ProblemSpec:
    _reject_unknown(
        table, ["N", "delta", "seed", "sigma_model", "tail_model", "sparse_support"], "problem"
    )
    n = _int(table, "N", "problem", required=True)
    if n < 1:
        raise ConfigError(f"problem.N must be >= 1, got {n}")

    if "sigma_model" not in table:
        raise ConfigError("missing [problem.sigma_model] table")
    sm = table["sigma_model"]
    _reject_unknown(sm, ["nu_hat", "K"], "problem.sigma_model")
    nu_hat = _num(sm, "nu_hat", "problem.sigma_model", required=True)
    K = _num(sm, "K", "problem.sigma_model", default=1.0)

    has_tail = "tail_model" in table
    has_sparse = "sparse_support" in table
    if has_tail == has_sparse:
        raise ConfigError("[problem] needs exactly one of tail_model or sparse_support")

    mu_hat = K1 = None
    support = None
    if has_tail:
        tm = table["tail_model"]
        _reject_unknown(tm, ["mu_hat", "K1"], "problem.tail_model")
        mu_hat = _num(tm, "mu_hat", "problem.tail_model", required=True)
        K1 = _num(tm, "K1", "problem.tail_model", default=1.0)
    else:
        raw = table["sparse_support"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("problem.sparse_support must be a nonempty list of [index, value]")
        pairs = []
        for item in raw:
            if not isinstance(item, list) or len(item) != 2:
                raise ConfigError(f"sparse_support entries must be [index, value], got {item!r}")
            idx, val = item
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise ConfigError(f"sparse_support index must be an integer, got {idx!r}")
            if idx < 1 or idx > n:
                raise ConfigError(f"sparse_support index {idx} outside [1, N={n}]")
            pairs.append((idx, float(val)))
        support = tuple(pairs)

    delta = _num(table, "delta", "problem")
    if delta is not None and delta < 0.0:
        raise ConfigError(f"problem.delta must be nonnegative, got {delta}")
    seed = _int(table, "seed", "problem", default=0)
    return ProblemSpec(
        n=n, nu_hat=nu_hat, K=K, mu_hat=mu_hat, K1=K1,
        sparse_support=support, delta=delta, seed=seed,
    )


def _parse_sweep(table) -> SweepSpec:
    _reject_unknown(table, ["delta_min", "delta_max", "num_points", "seeds"], "sweep")
    lo = _num(table, "delta_min", "sweep", required=True)
    hi = _num(table, "delta_max", "sweep", required=True)
    if not 0.0 < lo < hi:
        raise ConfigError(f"need 0 < delta_min < delta_max, got {lo}, {hi}")
    pts = _int(table, "num_points", "sweep", required=True)
    if pts < 2:
        raise ConfigError(f"sweep.num_points must be >= 2, got {pts}")
    seeds = table.get("seeds", [0, 1, 2, 3, 4])
    if not isinstance(seeds, list) or not seeds or not all(
        isinstance(s, int) and not isinstance(s, bool) for s in seeds
    ):
        raise ConfigError("sweep.seeds must be a nonempty list of integers")
    return SweepSpec(delta_min=lo, delta_max=hi, num_points=pts, seeds=tuple(seeds))


def _parse_param_choice(table) -> DiscrepancyConfig:
    _reject_unknown(
        table, ["tau1", "tau2", "tau", "zeta", "alpha0", "max_bisections"], "param_choice"
    )
    kwargs = {}
    for key in ("tau1", "tau2", "tau", "zeta", "alpha0"):
        val = _num(table, key, "param_choice")
        if val is not None:
            kwargs[key] = val
    mb = _int(table, "max_bisections", "param_choice")
    if mb is not None:
        kwargs["max_bisections"] = mb
    try:
        return DiscrepancyConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [param_choice]: {exc}") from None


def _parse_outputs(table) -> OutputSpec:
    _reject_unknown(table, ["dir", "emit_phi_grid", "emit_dist_fn"], "outputs")
    out_dir = table.get("dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError(f"outputs.dir must be a string, got {out_dir!r}")
    emit_phi = table.get("emit_phi_grid", False)
    if not isinstance(emit_phi, bool):
        raise ConfigError("outputs.emit_phi_grid must be a boolean")
    r_grid = None
    if "emit_dist_fn" in table:
        ed = table["emit_dist_fn"]
        _reject_unknown(ed, ["R_grid"], "outputs.emit_dist_fn")
        raw = ed.get("R_grid")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("outputs.emit_dist_fn.R_grid must be a nonempty list of numbers")
        vals = []
        for v in raw:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"R_grid entries must be numbers, got {v!r}")
            vals.append(float(v))
        r_grid = tuple(vals)
    return OutputSpec(dir=out_dir, emit_phi_grid=emit_phi, dist_r_grid=r_grid)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment config; any unknown key is fatal."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None

    _reject_unknown(data, ["problem", "sweep", "param_choice", "outputs"], "top level")
    if "problem" not in data:
        raise ConfigError("missing [problem] section")
    return ExperimentConfig(
        problem=_parse_problem(data["problem"]),
        sweep=_parse_sweep(data["sweep"]) if "sweep" in data else None,
        param_choice=_parse_param_choice(data.get("param_choice", {})),
        outputs=_parse_outputs(data.get("outputs", {})),
    )


def build_operator(spec: ProblemSpec) -> DiagonalOperator:
    return DiagonalOperator.power(spec.nu_hat, spec.K, n=spec.n)


def build_solution(spec: ProblemSpec) -> DecaySequence:
    if spec.sparse_support is not None:
        return DecaySequence.from_support(spec.sparse_support, n=spec.n)
    return DecaySequence.power(spec.mu_hat, spec.K1, n=spec.n)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    """Plain deterministic CSV: fixed column order, repr-formatted floats."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    Path(path).write_text("\n".join(lines) + "\n")


def _out_dir(cfg: ExperimentConfig, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.outputs.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_solve(cfg: ExperimentConfig, args) -> int:
    spec = cfg.problem
    delta = args.delta if args.delta is not None else spec.delta
    if delta is None:
        raise ConfigError("no noise level: set problem.delta or pass --delta")
    seed = args.seed if args.seed is not None else spec.seed
    op = build_operator(spec)
    x_true = build_solution(spec)
    problem = synthesize(op, x_true, float(delta), int(seed))

    if args.alpha is not None:
        if not args.alpha > 0.0:
            raise ConfigError(f"--alpha must be positive, got {args.alpha}")
        alpha = float(args.alpha)
        result = solve_diagonal(problem, alpha)
        rule = "fixed"
    else:
        if not float(delta) > 0.0:
            raise ConfigError("discrepancy-based alpha needs delta > 0; pass --alpha instead")
        alpha, result = alpha_strong_discrepancy(problem, cfg.param_choice)
        rule = "strong_discrepancy"

    err = float(np.sum(np.abs(result.x - problem.x_true_vec()))) + tail_sum(x_true, op.dim)
    print(f"rule={rule}")
    print(f"delta={_fmt(float(delta))}")
    print(f"alpha={_fmt(alpha)}")
    print(f"residual={_fmt(result.residual_norm)}")
    print(f"l1_error={_fmt(err)}")
    print(f"support_size={result.support_size}")
    print(f"certificate={_fmt(result.certificate)}")
    return 0


def _cmd_rate_sweep(cfg: ExperimentConfig, args) -> int:
    if cfg.sweep is None:
        raise ConfigError("rate-sweep needs a [sweep] section")
    spec = cfg.problem
    op = build_operator(spec)
    x_true = build_solution(spec)
    deltas = np.geomspace(cfg.sweep.delta_max, cfg.sweep.delta_min, cfg.sweep.num_points)
    report = rate_bound_check(op, x_true, deltas, seeds=cfg.sweep.seeds, config=cfg.param_choice)

    out = _out_dir(cfg, args)
    header = ["delta", "seed", "alpha", "residual", "l1_error", "phi_delta", "ratio", "status"]
    write_csv(out / "rate_sweep.csv", header, report.rows)
    if cfg.outputs.emit_phi_grid:
        _write_phi_grid(
            out / "phi_grid.csv",
            RateFunction.from_model(x_true, op),
            cfg.sweep.delta_min,
            cfg.sweep.delta_max,
            200,
        )
    print(f"csv={out / 'rate_sweep.csv'}")
    print(
        f"slope={_fmt(report.slope)} predicted={_fmt(report.predicted)} "
        f"pass={str(report.passed).lower()}"
    )
    return 0 if report.passed else 1


def _write_phi_grid(path, rf, t_min, t_max, num_points):
    ts = np.geomspace(t_min, t_max, num_points)
    values = rf.grid(ts)
    rows = [{"t": float(t), "phi": float(v)} for t, v in zip(ts, values)]
    write_csv(path, ["t", "phi"], rows)


def _cmd_phi_grid(cfg: ExperimentConfig, args) -> int:
    spec = cfg.problem
    if not 0.0 < args.t_min < args.t_max:
        raise ConfigError(f"need 0 < t-min < t-max, got {args.t_min}, {args.t_max}")
    if args.num_points < 2:
        raise ConfigError("--num-points must be >= 2")
    rf = RateFunction.from_model(build_solution(spec), build_operator(spec))
    out = _out_dir(cfg, args)
    _write_phi_grid(out / "phi_grid.csv", rf, args.t_min, args.t_max, args.num_points)
    print(f"csv={out / 'phi_grid.csv'}")
    return 0


def _cmd_dist_fn(cfg: ExperimentConfig, args) -> int:
    spec = cfg.problem
    if args.r_grid is not None:
        try:
            r_grid = tuple(float(s) for s in args.r_grid.split(","))
        except ValueError:
            raise ConfigError(f"--r-grid must be comma-separated numbers, got {args.r_grid!r}")
    else:
        r_grid = cfg.outputs.dist_r_grid
    if not r_grid:
        raise ConfigError("no radius grid: set outputs.emit_dist_fn.R_grid or pass --r-grid")
    if any(r <= 0.0 for r in r_grid) or any(
        b <= a for a, b in zip(r_grid, r_grid[1:])
    ):
        raise ConfigError("radius grid must be positive and strictly ascending")

    op = build_operator(spec)
    xi = minimal_subgradient(build_solution(spec), n=op.dim)
    rows = []
    for r in r_grid:
        rep = distance_report(op, xi, r)
        rows.append({"R": rep.R, "d_value": rep.d_value, "N": rep.n_terms})
    out = _out_dir(cfg, args)
    write_csv(out / "dist_fn.csv", ["R", "d_value", "N"], rows)
    print(f"csv={out / 'dist_fn.csv'}")
    print(f"sigma_last={_fmt(float(op.sigma[-1]))} n_terms={op.dim}")
    return 0


def _cmd_vi_check(cfg: ExperimentConfig, args) -> int:
    spec = cfg.problem
    op = build_operator(spec)
    x_true = build_solution(spec)

    if args.replay is not None:
        sample, kind = load_sample(args.replay)
        if kind == "vi":
            problem = synthesize(op, x_true, 0.0, 0)
            redone = check_vi(problem, sample.x).margin
        else:
            lhs, rhs = check_lemma_sums(sample.x, x_true, sample.n_used)
            redone = rhs - lhs
        print(f"margin_stored={_fmt(sample.margin)}")
        print(f"margin_recomputed={_fmt(redone)}")
        return 0 if redone >= MARGIN_SLACK else 1

    if args.num_samples < 1:
        raise ConfigError("--num-samples must be >= 1")
    seed = args.seed if args.seed is not None else spec.seed
    vi_res = vi_suite(op, x_true, args.num_samples, int(seed))
    lemma_dim = min(op.dim, 512)
    lemma_res = lemma_suite(x_true, lemma_dim, args.num_samples, int(seed) + 1)

    print(f"vi_min_margin={_fmt(vi_res.min_margin)}")
    print(f"lemma_min_margin={_fmt(lemma_res.min_margin)}")
    ok = vi_res.passed and lemma_res.passed
    if not ok:
        out = _out_dir(cfg, args)
        if not vi_res.passed:
            path = out / "vi_violation.json"
            save_sample(vi_res.worst, path, kind="vi")
            print(f"violation_file={path}")
        if not lemma_res.passed:
            path = out / "lemma_violation.json"
            save_sample(lemma_res.worst, path, kind="lemma")
            print(f"violation_file={path}")
    print(f"pass={str(ok).lower()}")
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1lab",
        description="Experiments for l1-penalized regularization of diagonal operator equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")

    p = sub.add_parser("solve", help="one regularized solve")
    common(p)
    p.add_argument("--delta", type=float, default=None, help="noise level override")
    p.add_argument("--alpha", type=float, default=None, help="fixed alpha (skips discrepancy)")
    p.add_argument("--seed", type=int, default=None, help="noise seed override")

    p = sub.add_parser("rate-sweep", help="error-vs-noise sweep with slope verdict")
    common(p)

    p = sub.add_parser("dist-fn", help="distance function over a radius grid")
    common(p)
    p.add_argument("--r-grid", default=None, help="comma-separated radii (overrides config)")

    p = sub.add_parser("vi-check", help="randomized inequality sweep")
    common(p)
    p.add_argument("--num-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replay", default=None, help="re-check a serialized violation sample")

    p = sub.add_parser("phi-grid", help="rate function on a log grid")
    common(p)
    p.add_argument("--t-min", type=float, default=1e-8)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--num-points", type=int, default=200)
    return parser


_COMMANDS = {
    "solve": _cmd_solve,
    "rate-sweep": _cmd_rate_sweep,
    "dist-fn": _cmd_dist_fn,
    "vi-check": _cmd_vi_check,
    "phi-grid": _cmd_phi_grid,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DiscrepancyInfeasibleError as exc:
        print(f"infeasible discrepancy window ({exc.bound} bound): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
