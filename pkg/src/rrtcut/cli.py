"""Command-line experiment runner.

Replicate r of a run always draws from stream index r of the master seed,
results are buffered per replicate and emitted in index order, so output
bytes depend on the spec and seed only, never on --workers or scheduling.
Aggregate-style commands (moments, tv, root-degree, gamma-trend,
oracle-smalln) compute on a single stream and ignore --workers.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable

from . import oracles
from .coupling import build_coupled_pair, coupling_diagnostics
from .cutting import record_count, targeted_cut, uniform_edge_cut
from .stats import (
    GAMMA,
    estimate_tail_moments,
    estimate_tv_to_poisson,
    gamma_trend,
    root_degree_distribution_exact,
)
from .trees import RngStream, generate_rrt

COMMANDS = (
    "generate",
    "cut-targeted",
    "cut-uniform",
    "records",
    "coupling",
    "moments",
    "tv",
    "root-degree",
    "gamma-trend",
    "oracle-smalln",
)

GENERATE_HEADER = ("n", "seed", "root_degree", "max_degree", "tree")
CUT_HEADER = ("policy", "n", "seed", "cuts", "z_at_root_degree")
COUPLING_HEADER = (
    "n",
    "epsilon",
    "seed",
    "d",
    "w",
    "sym_diff",
    "differing_degrees",
    "z_d",
    "z_d_cond",
)
STATS_HEADER = (
    "op",
    "n",
    "d",
    "k",
    "estimate",
    "std_error",
    "theory",
    "replicates",
    "seed",
)

# Trees are small enough to embed in generate output up to this size.
TREE_COLUMN_CAP = 1000


class SpecError(ValueError):
    """Configuration problem; message names the offending field."""


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    n: int | None = None
    n_ladder: tuple[int, ...] | None = None
    replicates: int = 1
    seed: int = 0
    epsilon: float | None = None
    d_values: tuple[int, ...] | None = None
    k_values: tuple[int, ...] | None = None
    output_path: str | None = None
    output_format: str = "csv"
    workers: int = 1


@dataclass(frozen=True)
class ReplicateSummary:
    replicate_index: int
    stream_index: int
    payload: dict[str, Any]


_NEEDS_N = {
    "generate",
    "cut-targeted",
    "cut-uniform",
    "records",
    "coupling",
    "moments",
    "tv",
    "root-degree",
    "oracle-smalln",
}


def _parse_int_list(text: str, field_name: str) -> tuple[int, ...]:
    body = text.strip().strip("[]")
    if not body:
        raise SpecError(f"{field_name}: empty list")
    try:
        return tuple(int(tok) for tok in body.split(","))
    except ValueError:
        raise SpecError(f"{field_name}: expected comma-separated integers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrtcut",
        description="Cutting experiments on random recursive trees.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--n", type=int)
    parser.add_argument("--n-ladder", type=str)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--d", type=str)
    parser.add_argument("--k", type=str)
    parser.add_argument("--out", type=str)
    parser.add_argument("--format", type=str)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--config", type=str)
    return parser


_CONFIG_KEYS = {
    "command",
    "n",
    "n_ladder",
    "reps",
    "seed",
    "eps",
    "d",
    "k",
    "out",
    "format",
    "workers",
}


def _read_config(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise SpecError(f"config: cannot read {path!r}: {exc}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SpecError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise SpecError(f"config: unknown key {key!r}")
        values[key] = value.strip()
    return values


def parse_config(argv: list[str] | None = None) -> ExperimentSpec:
    """Build a validated ExperimentSpec from flags, config file, and env.

    Precedence: command-line flag, then config-file value, then (for the
    seed only) the RRTCUT_SEED environment variable, then the default.
    """
    args = _build_parser().parse_args(argv)
    config = _read_config(args.config) if args.config else {}

    def pick(flag_value: Any, key: str) -> Any:
        if flag_value is not None:
            return flag_value
        return config.get(key)

    command = pick(args.command, "command")
    if command is None:
        raise SpecError("command: required (flag or config)")
    if command not in COMMANDS:
        raise SpecError(f"command: unknown command {command!r}")

    def pick_int(flag_value: Any, key: str) -> int | None:
        v = pick(flag_value, key)
        if v is None:
            return None
        try:
            return int(v)
        except (TypeError, ValueError):
            raise SpecError(f"{key}: expected an integer, got {v!r}") from None

    def pick_float(flag_value: Any, key: str) -> float | None:
        v = pick(flag_value, key)
        if v is None:
            return None
        try:
            return float(v)
        except (TypeError, ValueError):
            raise SpecError(f"{key}: expected a number, got {v!r}") from None

    n = pick_int(args.n, "n")
    replicates = pick_int(args.reps, "reps")
    seed = pick_int(args.seed, "seed")
    epsilon = pick_float(args.eps, "eps")
    workers = pick_int(args.workers, "workers")

    ladder_raw = pick(getattr(args, "n_ladder"), "n_ladder")
    n_ladder = _parse_int_list(ladder_raw, "n_ladder") if ladder_raw is not None else None
    d_raw = pick(args.d, "d")
    d_values = _parse_int_list(d_raw, "d") if d_raw is not None else None
    k_raw = pick(args.k, "k")
    k_values = _parse_int_list(k_raw, "k") if k_raw is not None else None

    output_path = pick(args.out, "out")
    output_format = pick(args.format, "format") or "csv"
    if output_format not in ("csv", "json"):
        raise SpecError(f"format: must be csv or json, got {output_format!r}")

    if seed is None:
        env = os.environ.get("RRTCUT_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise SpecError(f"RRTCUT_SEED: expected an integer, got {env!r}") from None
    if seed is None:
        seed = 0

    spec = ExperimentSpec(
        command=command,
        n=n,
        n_ladder=n_ladder,
        replicates=replicates if replicates is not None else 1,
        seed=seed,
        epsilon=epsilon,
        d_values=d_values,
        k_values=k_values,
        output_path=output_path,
        output_format=output_format,
        workers=workers if workers is not None else 1,
    )
    _validate_spec(spec)
    return spec


def _validate_spec(spec: ExperimentSpec) -> None:
    if spec.replicates < 1:
        raise SpecError("reps: must be at least 1")
    if spec.workers < 1:
        raise SpecError("workers: must be at least 1")
    if spec.command in _NEEDS_N:
        if spec.n is None:
            raise SpecError("n: required for this command")
        if spec.n < 1:
            raise SpecError("n: must be at least 1")
    if spec.command == "gamma-trend":
        if spec.n_ladder is None and spec.n is None:
            raise SpecError("n_ladder: required for gamma-trend")
        for m in spec.n_ladder or (spec.n,):
            if m is None or m < 2:
                raise SpecError("n_ladder: sizes must be at least 2")
    if spec.command == "coupling":
        if spec.epsilon is None:
            raise SpecError("eps: required for coupling")
    if spec.epsilon is not None and not 0.0 < spec.epsilon < 1.0:
        raise SpecError(f"eps: must lie in (0, 1), got {spec.epsilon}")
    if spec.command == "moments" and spec.d_values is None:
        raise SpecError("d: required for moments (comma-separated thresholds)")
    if spec.command == "tv":
        if spec.d_values is None:
            raise SpecError("d: required for tv")
        if len(spec.d_values) != 1:
            raise SpecError("d: tv takes exactly one threshold")
    if spec.command == "oracle-smalln":
        assert spec.n is not None
        if not 2 <= spec.n <= 7:
            raise SpecError("n: oracle-smalln supports 2 <= n <= 7")


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(header: tuple[str, ...], rows: list[dict[str, Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def _render_json(
    spec: ExperimentSpec, rows: list[dict[str, Any]], aggregate: dict[str, Any]
) -> str:
    # workers and output_path are scheduling details, not experiment identity;
    # dropping them keeps reruns byte-identical across worker counts.
    spec_doc = asdict(spec)
    del spec_doc["workers"]
    del spec_doc["output_path"]
    doc = {"spec": spec_doc, "rows": rows, "aggregate": aggregate}
    return json.dumps(doc, indent=2) + "\n"


def _replicate_rows(
    spec: ExperimentSpec, fn: Callable[[ExperimentSpec, int], dict[str, Any]]
) -> list[ReplicateSummary]:
    indices = range(spec.replicates)
    if spec.workers == 1:
        payloads = [fn(spec, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            payloads = list(pool.map(lambda i: fn(spec, i), indices))
    return [
        ReplicateSummary(replicate_index=i, stream_index=i, payload=p)
        for i, p in enumerate(payloads)
    ]


def _generate_row(spec: ExperimentSpec, i: int) -> dict[str, Any]:
    gen = RngStream(spec.seed, i).generator()
    tree = generate_rrt(spec.n, gen)
    return {
        "n": spec.n,
        "seed": i,
        "root_degree": tree.root_degree,
        "max_degree": tree.max_degree,
        "tree": tree.to_parent_string() if spec.n <= TREE_COLUMN_CAP else None,
    }


def _cut_row(spec: ExperimentSpec, i: int) -> dict[str, Any]:
    gen = RngStream(spec.seed, i).generator()
    tree = generate_rrt(spec.n, gen)
    if spec.command == "cut-targeted":
        res = targeted_cut(tree, gen)
    elif spec.command == "cut-uniform":
        res = uniform_edge_cut(tree, gen)
    else:
        res = record_count(tree, gen)
    return {
        "policy": res.policy.value,
        "n": spec.n,
        "seed": i,
        "cuts": res.cuts,
        "z_at_root_degree": res.z_at_root_degree,
    }


def _coupling_row(spec: ExperimentSpec, i: int) -> dict[str, Any]:
    gen = RngStream(spec.seed, i).generator()
    sample = build_coupled_pair(spec.n, spec.epsilon, gen)
    d = spec.d_values[0] if spec.d_values else math.ceil(1.1 * math.log(spec.n))
    diag = coupling_diagnostics(sample, d)
    return {
        "n": spec.n,
        "epsilon": spec.epsilon,
        "seed": i,
        "d": diag.d,
        "w": diag.tail_ratio,
        "sym_diff": diag.sym_diff_root_children,
        "differing_degrees": diag.differing_degree_count,
        "z_d": diag.tail_count,
        "z_d_cond": diag.tail_count_cond,
    }


def _stats_row(**kw: Any) -> dict[str, Any]:
    row = {col: None for col in STATS_HEADER}
    row.update(kw)
    return row


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one experiment and write its artifact; returns exit status."""
    aggregate: dict[str, Any] = {}
    if spec.command == "generate":
        summaries = _replicate_rows(spec, _generate_row)
        rows = [s.payload for s in summaries]
        header = GENERATE_HEADER
        aggregate = {
            "rows": len(rows),
            "mean_root_degree": sum(r["root_degree"] for r in rows) / len(rows),
        }
    elif spec.command in ("cut-targeted", "cut-uniform", "records"):
        summaries = _replicate_rows(spec, _cut_row)
        rows = [s.payload for s in summaries]
        header = CUT_HEADER
        cuts = [r["cuts"] for r in rows]
        aggregate = {
            "rows": len(rows),
            "mean_cuts": sum(cuts) / len(cuts),
            "min_cuts": min(cuts),
            "max_cuts": max(cuts),
        }
    elif spec.command == "coupling":
        summaries = _replicate_rows(spec, _coupling_row)
        rows = [s.payload for s in summaries]
        header = COUPLING_HEADER
        aggregate = {
            "rows": len(rows),
            "mean_w": sum(r["w"] for r in rows) / len(rows),
            "max_sym_diff": max(r["sym_diff"] for r in rows),
        }
    elif spec.command == "moments":
        estimates = estimate_tail_moments(
            spec.n,
            spec.d_values,
            spec.k_values or (1, 2),
            spec.replicates,
            RngStream(spec.seed, 0),
        )
        rows = [
            _stats_row(
                op="tail_moment",
                n=e.n,
                d=e.d,
                k=e.k,
                estimate=e.estimate,
                std_error=e.std_error,
                theory=e.theory,
                replicates=spec.replicates,
                seed=spec.seed,
            )
            for e in estimates
        ]
        header = STATS_HEADER
        aggregate = {"rows": len(rows)}
    elif spec.command == "tv":
        est = estimate_tv_to_poisson(
            spec.n, spec.d_values[0], spec.replicates, RngStream(spec.seed, 0)
        )
        rows = [
            _stats_row(
                op="tv_poisson",
                n=est.n,
                d=est.d,
                estimate=est.tv,
                theory=est.mu,
                replicates=est.replicates,
                seed=spec.seed,
            )
        ]
        header = STATS_HEADER
        aggregate = {"rows": 1}
    elif spec.command == "root-degree":
        pmf = root_degree_distribution_exact(spec.n)
        rows = [
            _stats_row(
                op="root_degree_exact",
                n=spec.n,
                d=deg,
                estimate=float(p),
                seed=spec.seed,
            )
            for deg, p in enumerate(pmf, start=1)
            if p > 0.0
        ]
        header = STATS_HEADER
        aggregate = {"rows": len(rows), "mean": float(
            sum(deg * p for deg, p in enumerate(pmf, start=1))
        )}
    elif spec.command == "gamma-trend":
        ladder = spec.n_ladder or (spec.n,)
        k_max = max(spec.k_values) if spec.k_values else 2
        points = gamma_trend(ladder, spec.replicates, k_max, RngStream(spec.seed, 0))
        rows = []
        for pt in points:
            rows.append(
                _stats_row(
                    op="gamma_trend_ratio",
                    n=pt.n,
                    estimate=pt.mean_ratio,
                    std_error=pt.mean_ratio_se,
                    theory=GAMMA,
                    replicates=spec.replicates,
                    seed=spec.seed,
                )
            )
            for k, val in pt.kth_moment.items():
                rows.append(
                    _stats_row(
                        op="gamma_trend_log_moment",
                        n=pt.n,
                        k=k,
                        estimate=val,
                        std_error=pt.std_errors[k],
                        theory=(GAMMA * math.log(pt.n)) ** k,
                        replicates=spec.replicates,
                        seed=spec.seed,
                    )
                )
            for delta, prob in pt.tail_prob.items():
                rows.append(
                    _stats_row(
                        op="gamma_trend_tail",
                        n=pt.n,
                        d=delta,
                        estimate=prob,
                        replicates=spec.replicates,
                        seed=spec.seed,
                    )
                )
        header = STATS_HEADER
        aggregate = {"rows": len(rows)}
    elif spec.command == "oracle-smalln":
        rows, lines = _oracle_rows(spec)
        header = STATS_HEADER
        aggregate = {"rows": len(rows)}
        sys.stdout.write("\n".join(lines) + "\n")
    else:  # pragma: no cover - guarded by parse_config
        raise SpecError(f"command: unknown command {spec.command!r}")

    if spec.output_format == "csv":
        text = _render_csv(header, rows)
    else:
        text = _render_json(spec, rows, aggregate)
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _oracle_rows(spec: ExperimentSpec) -> tuple[list[dict[str, Any]], list[str]]:
    n = spec.n
    t_mean = oracles.exact_targeted_cut_mean(n)
    u_mean = oracles.exact_uniform_cut_mean(n)
    r_mean = oracles.exact_record_mean(n)
    pmf = oracles.exact_root_degree_pmf(n)
    lines = [
        f"exact mean targeted cuts at n={n}: {float(t_mean)!r} ({t_mean})",
        f"exact mean uniform edge cuts at n={n}: {float(u_mean)!r} ({u_mean})",
        f"exact mean records at n={n}: {float(r_mean)!r} ({r_mean})",
    ]
    rows = [
        _stats_row(op="oracle_targeted_mean", n=n, estimate=float(t_mean), seed=spec.seed),
        _stats_row(op="oracle_uniform_mean", n=n, estimate=float(u_mean), seed=spec.seed),
        _stats_row(op="oracle_record_mean", n=n, estimate=float(r_mean), seed=spec.seed),
    ]
    for deg, p in pmf.items():
        lines.append(f"exact P(root degree = {deg}) at n={n}: {float(p)!r} ({p})")
        rows.append(
            _stats_row(op="oracle_root_degree_pmf", n=n, d=deg, estimate=float(p), seed=spec.seed)
        )
    return rows, lines


def main(argv: list[str] | None = None) -> int:
    try:
        spec = parse_config(argv)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run_experiment(spec)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
