"""Command-line experiment runner.

Subcommands: ``generate`` (export an artificial stream as CSV), ``run``
(execute an experiment config over all approach x stream x seed cells),
``rank`` (Friedman/Nemenyi ranking plus the reference-relative difference
table) and ``grid`` (decision-area lattice export).

Exit codes: 0 success, 1 validation error, 2 runtime cell failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from smoclust.approaches import build_strategy
from smoclust.config import ConfigError, ExperimentConfig, load_config
from smoclust.core import make_rng
from smoclust.evaluation import (
    RunRecord,
    difference_table,
    export_decision_grid,
    friedman_nemenyi,
    holdout_run,
    prequential_run,
    write_grid_csv,
)
from smoclust.streams import ArtificialStream, CsvStream, parse_stream_name, write_stream_csv


def _make_stream(name: str, seed: int, cfg: ExperimentConfig):
    if name.endswith(".csv"):
        return CsvStream(name)
    return ArtificialStream(
        name,
        seed,
        cfg.length,
        dim=cfg.dimensions,
        drift_start=cfg.drift_start,
        drift_end=cfg.drift_end,
    )


def run_cell(cfg: ExperimentConfig, approach_name: str, stream_name: str, seed: int) -> RunRecord:
    """One fully self-contained experiment cell."""
    approach = next(a for a in cfg.approaches if a.name == approach_name)
    stream = _make_stream(stream_name, seed, cfg)
    rng = make_rng("strategy", approach.name, stream_name, seed)
    strategy = build_strategy(approach.kind, stream.schema(), rng, approach.params)
    if cfg.evaluation == "holdout":
        return holdout_run(
            strategy,
            stream,
            n_train=cfg.holdout_every,
            m_test=cfg.holdout_size,
            approach=approach.name,
            seed=seed,
        )
    return prequential_run(
        strategy,
        stream,
        sample_every=cfg.sample_every,
        theta_e=cfg.eval_fading,
        approach=approach.name,
        seed=seed,
    )


def _run_cell_star(args):
    cfg, approach, stream, seed = args
    return run_cell(cfg, approach, stream, seed)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> tuple[list[RunRecord], list[str]]:
    """All cells of the config; returns (records, per-cell error messages)."""
    cells = [
        (cfg, a.name, s, seed) for a in cfg.approaches for s in cfg.streams for seed in cfg.seeds
    ]
    records: list[RunRecord] = []
    errors: list[str] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [(cell, pool.submit(_run_cell_star, cell)) for cell in cells]
            for cell, future in futures:
                try:
                    records.append(future.result())
                except Exception as exc:  # noqa: BLE001 - reported per cell
                    errors.append(f"{cell[1]} x {cell[2]} x seed {cell[3]}: {exc}")
    else:
        for cell in cells:
            try:
                records.append(_run_cell_star(cell))
            except Exception as exc:  # noqa: BLE001 - reported per cell
                errors.append(f"{cell[1]} x {cell[2]} x seed {cell[3]}: {exc}")
    records.sort(key=lambda r: (r.approach, r.stream, r.seed))
    return records, errors


def write_results_csv(fh, records: list[RunRecord]) -> None:
    fh.write("approach,stream,seed,step,gmean\n")
    for r in records:
        for step, g in r.samples:
            fh.write(f"{r.approach},{r.stream},{r.seed},{step},{g!r}\n")


def write_summary_csv(fh, records: list[RunRecord]) -> None:
    fh.write("approach,stream,mean_gmean,std\n")
    cells: dict[tuple[str, str], list[float]] = {}
    for r in records:
        cells.setdefault((r.approach, r.stream), []).append(r.average)
    for (approach, stream) in sorted(cells):
        vals = np.array(cells[(approach, stream)])
        fh.write(f"{approach},{stream},{float(vals.mean())!r},{float(vals.std())!r}\n")


def read_results_csv(path: str) -> list[RunRecord]:
    by_run: dict[tuple[str, str, int], RunRecord] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "approach,stream,seed,step,gmean":
            raise ConfigError(f"{path}: unexpected results header {header!r}")
        for line in fh:
            approach, stream, seed_s, step_s, g_s = line.strip().split(",")
            key = (approach, stream, int(seed_s))
            if key not in by_run:
                by_run[key] = RunRecord(approach, stream, int(seed_s))
            by_run[key].samples.append((int(step_s), float(g_s)))
    return sorted(by_run.values(), key=lambda r: (r.approach, r.stream, r.seed))


def _output_dir(cfg_output: str, override: str | None) -> str:
    out = override or os.environ.get("SMOCLUST_OUTPUT_DIR") or cfg_output
    os.makedirs(out, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    try:
        parse_stream_name(args.name)
        stream = ArtificialStream(
            args.name,
            args.seed,
            args.length,
            dim=args.dimensions,
            drift_start=args.drift_start,
            drift_end=args.drift_end,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with open(args.out, "w", encoding="utf-8") as fh:
        n0, n1 = write_stream_csv(fh, stream.schema(), stream)
    print(f"wrote {args.out}: {n0 + n1} examples (class 0: {n0}, class 1: {n1})")
    return 0


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if cfg.evaluation == "holdout" and any(s.endswith(".csv") for s in cfg.streams):
            raise ConfigError("holdout evaluation needs artificial streams with known concepts")
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    records, errors = run_experiment(cfg, jobs=args.jobs)
    out = _output_dir(cfg.output, args.output)
    with open(os.path.join(out, "results.csv"), "w", encoding="utf-8") as fh:
        write_results_csv(fh, records)
    with open(os.path.join(out, "summary.csv"), "w", encoding="utf-8") as fh:
        write_summary_csv(fh, records)
    print(f"completed {len(records)} cells -> {out}")
    for msg in errors:
        print(f"cell failed: {msg}", file=sys.stderr)
    return 2 if errors else 0


def cmd_rank(args) -> int:
    path = os.path.join(args.results, "results.csv")
    try:
        records = read_results_csv(path)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    approaches = sorted({r.approach for r in records})
    if len(approaches) < 2:
        print("error: ranking needs at least two approaches", file=sys.stderr)
        return 1
    observations = sorted({(r.stream, r.seed) for r in records})
    averages = {(r.approach, r.stream, r.seed): r.average for r in records}
    missing = [
        (a, s, seed)
        for a in approaches
        for (s, seed) in observations
        if (a, s, seed) not in averages
    ]
    if missing:
        for a, s, seed in missing:
            print(f"missing cell: {a} x {s} x seed {seed}", file=sys.stderr)
        return 1
    table = np.array(
        [[averages[(a, s, seed)] for a in approaches] for (s, seed) in observations]
    )
    result = friedman_nemenyi(table, alpha=args.alpha)
    order = np.argsort(result.avg_ranks)
    top = approaches[int(order[0])]
    top_rank = float(result.avg_ranks[int(order[0])])
    with open(os.path.join(args.results, "ranks.csv"), "w", encoding="utf-8") as fh:
        fh.write("approach,avg_rank,delta_vs_top,significantly_worse_than_top\n")
        for i in order:
            delta = float(result.avg_ranks[i]) - top_rank
            sig = delta > result.critical_difference
            fh.write(f"{approaches[int(i)]},{float(result.avg_ranks[i])!r},{delta!r},{int(sig)}\n")
    reference = args.reference if args.reference in approaches else approaches[0]
    streams, diff_approaches, matrix, _ = difference_table(records, reference=reference)
    with open(os.path.join(args.results, "difference.csv"), "w", encoding="utf-8") as fh:
        fh.write("stream," + ",".join(diff_approaches) + "\n")
        for si, stream in enumerate(streams):
            row = ",".join("" if np.isnan(v) else repr(float(v)) for v in matrix[si])
            fh.write(f"{stream},{row}\n")
    print(
        f"friedman chi2 = {result.statistic:.4f}, p = {result.p_value:.3e}, "
        f"CD (k={result.n_approaches}, N={result.n_observations}) = {result.critical_difference:.4f}"
    )
    print(f"top-ranked approach: {top} (avg rank {top_rank:.3f})")
    print(f"wrote ranks.csv and difference.csv (reference {reference}) -> {args.results}")
    return 0


def cmd_grid(args) -> int:
    try:
        cfg = load_config(args.config)
        approach = next((a for a in cfg.approaches if a.name == args.approach), None)
        if approach is None:
            raise ConfigError(f"approach {args.approach!r} not found in the config")
        if cfg.dimensions != 2:
            raise ConfigError("decision grids need dimensions = 2")
        stream = _make_stream(args.stream, args.seed, cfg)
    except (OSError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rng = make_rng("strategy", approach.name, args.stream, args.seed)
    strategy = build_strategy(approach.kind, stream.schema(), rng, approach.params)
    steps = min(args.at_step, getattr(stream, "length", args.at_step))
    for _ in range(steps):
        strategy.train(stream.next())
    schema = stream.schema()
    bounds = (
        schema.attributes[0].lo,
        schema.attributes[0].hi,
        schema.attributes[1].lo,
        schema.attributes[1].hi,
    )
    rows = export_decision_grid(strategy, bounds, args.resolution, schema)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_grid_csv(fh, rows)
    print(f"wrote {args.out}: {rows.shape[0]} lattice predictions at step {steps}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoclust",
        description="Experiment runner for imbalanced drifting-stream learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="export an artificial stream as CSV")
    gen.add_argument("name", help="stream name, e.g. StaticIm10_Split5")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--length", type=int, default=200_000)
    gen.add_argument("--dimensions", type=int, default=5)
    gen.add_argument("--drift-start", type=int, default=None)
    gen.add_argument("--drift-end", type=int, default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run all cells of an experiment config")
    run.add_argument("config")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--output", default=None, help="override the output directory")
    run.set_defaults(func=cmd_run)

    rank = sub.add_parser("rank", help="Friedman/Nemenyi ranking of a results directory")
    rank.add_argument("results")
    rank.add_argument("--alpha", type=float, default=0.05)
    rank.add_argument("--reference", default="SMOClust")
    rank.set_defaults(func=cmd_rank)

    grid = sub.add_parser("grid", help="export a decision-area lattice")
    grid.add_argument("config")
    grid.add_argument("--approach", required=True)
    grid.add_argument("--stream", required=True)
    grid.add_argument("--seed", type=int, default=0)
    grid.add_argument("--at-step", type=int, required=True)
    grid.add_argument("--resolution", type=int, default=100)
    grid.add_argument("--out", required=True)
    grid.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
