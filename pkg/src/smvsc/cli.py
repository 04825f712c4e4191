"""Command-line entry point: ``smvsc {cluster,sweep,synth,scaling,export}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, dataio
from .errors import DataError, NumericalError, SMVSCError
from .graph import save_graph
from .pipeline import (
    STAGES,
    PipelineConfig,
    SweepSpec,
    best_row,
    cell_key,
    format_sweep_rows,
    loglog_slope,
    read_sweep_keys,
    run_smvsc,
    scaling_probe,
    smooth_views,
    sweep,
    synth,
)

EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _grid(kind):
    def parse(text: str):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty grid")
        return tuple(kind(t) for t in items)

    return parse


def _add_pipeline_flags(p: argparse.ArgumentParser, grids: bool = False) -> None:
    if not grids:
        p.add_argument("-k", "--filter-order", type=_nonneg_int, default=1,
                       help="number of low-pass filter passes; 0 disables filtering (default 1)")
        p.add_argument("--alpha", type=_positive_float, default=1.0, help="ridge trade-off (default 1)")
        p.add_argument("--anchors", type=_positive_int, default=None,
                       help="anchors per view p (default max(g, min(50, n)))")
    p.add_argument("--clusters", type=_positive_int, default=None, help="override the manifest's cluster count g")
    p.add_argument("--neighbors", type=_positive_int, default=10,
                   help="graph neighbour count s, capped at n-2 (default 10)")
    p.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    p.add_argument("--restarts", type=_positive_int, default=10, help="K-means restarts (default 10)")
    p.add_argument("--max-iters", type=_positive_int, default=300,
                   help="Lloyd iterations per restart of the final K-means (default 300)")
    p.add_argument("--anchor-iters", type=_positive_int, default=20,
                   help="Lloyd iterations per restart when placing anchors (default 20)")
    p.add_argument("--normalize-embedding", action="store_true",
                   help="scale embedding rows to unit length before the final K-means")


def _config(args, **overrides) -> PipelineConfig:
    fields = dict(
        clusters=args.clusters,
        neighbors=args.neighbors,
        seed=args.seed,
        kmeans_restarts=args.restarts,
        kmeans_iters=args.max_iters,
        anchor_iters=args.anchor_iters,
        normalize_embedding=args.normalize_embedding,
    )
    if hasattr(args, "filter_order"):
        fields.update(filter_order=args.filter_order, alpha=args.alpha, anchors=args.anchors)
    fields.update(overrides)
    return PipelineConfig(**fields)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smvsc", description="Smoothed multi-view subspace clustering.")
    parser.add_argument("--version", action="version", version=f"smvsc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster one dataset and report ACC/NMI/PUR")
    p.add_argument("manifest", type=Path, help="dataset manifest (JSON)")
    _add_pipeline_flags(p)
    p.add_argument("--dump-dir", type=Path, default=None,
                   help="write Q.csv, predicted labels, coefficient blocks and graphs here")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="grid search over alpha, p and k")
    p.add_argument("manifest", type=Path, help="dataset manifest (JSON)")
    p.add_argument("--alpha-grid", type=_grid(float), required=True, help="comma-separated alphas")
    p.add_argument("--p-grid", type=_grid(int), required=True, help="comma-separated anchor counts")
    p.add_argument("--k-grid", type=_grid(int), default=(1,), help="comma-separated filter orders (default 1)")
    p.add_argument("--reps", type=_positive_int, default=1, help="repetitions per cell, seeds seed..seed+reps-1")
    p.add_argument("--out", type=Path, required=True, help="output CSV")
    p.add_argument("--timings", action="store_true",
                   help="fill the time_* columns (wall-clock, so the CSV is no longer reproducible)")
    p.add_argument("--resume", action="store_true", help="append to --out, skipping cells already present")
    _add_pipeline_flags(p, grids=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic multi-view Gaussian-blob dataset")
    p.add_argument("--n", type=_positive_int, default=300, help="sample count (default 300)")
    p.add_argument("--g", type=_positive_int, default=3, help="cluster count (default 3)")
    p.add_argument("--views", type=_positive_int, default=3, help="view count (default 3)")
    p.add_argument("--dims", type=_grid(_positive_int), default=(5,),
                   help="per-view dimensions, one value or one per view (default 5)")
    p.add_argument("--separation", type=float, default=20.0, help="closest pair of cluster means (default 20)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("scaling", help="time the pipeline on synthetic data of growing size")
    p.add_argument("--sizes", type=_grid(_positive_int), default=(500, 1000, 2000, 4000),
                   help="comma-separated ascending sample counts (default 500,1000,2000,4000)")
    p.add_argument("--anchors", type=_positive_int, default=50, help="anchors per view (default 50)")
    p.add_argument("--views", type=_positive_int, default=3, help="view count (default 3)")
    p.add_argument("--clusters", type=_positive_int, default=3, help="cluster count (default 3)")
    p.add_argument("--dims", type=_positive_int, default=10, help="dimension of every view (default 10)")
    p.add_argument("-k", "--filter-order", type=_nonneg_int, default=1, help="filter passes (default 1)")
    p.add_argument("--separation", type=float, default=6.0, help="closest pair of cluster means (default 6)")
    p.add_argument("--repeats", type=_positive_int, default=3, help="report the fastest of this many runs")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", type=Path, default=None, help="optional CSV of per-stage times")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("export", help="write intermediate matrices for external inspection")
    p.add_argument("manifest", type=Path, help="dataset manifest (JSON)")
    p.add_argument("--what", choices=("smoothed", "coefficients", "embedding"), required=True,
                   help="smoothed features, coefficient blocks with anchors, or the embedding")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_export)
    return parser


def _report(ds, result) -> None:
    cfg = result.config
    print(f"dataset {ds.name}: n={ds.n} views={len(ds.views)} g={cfg.clusters}")
    print(f"config: k={cfg.filter_order} alpha={cfg.alpha:g} p={cfg.anchors} s={cfg.neighbors} seed={cfg.seed}")
    if result.metrics is not None:
        for key in ("acc", "nmi", "pur"):
            print(f"{key.upper():<4}{100 * result.metrics[key]:8.2f}")
    else:
        print("no ground-truth labels; metrics skipped")
    for stage in STAGES:
        print(f"time_{stage:<7}{result.timings[stage]:10.4f} s")
    print(f"time_total  {result.total_time:10.4f} s")


def cmd_cluster(args) -> int:
    ds = dataio.load_dataset(args.manifest)
    result = run_smvsc(ds, _config(args))
    _report(ds, result)
    if args.dump_dir is not None:
        out = args.dump_dir
        dataio.save_matrix(result.embedding.Q, out / "Q.csv")
        dataio.save_labels(result.labels, out / "labels_pred.txt")
        for i, (block, G) in enumerate(zip(result.blocks, result.graphs)):
            dataio.save_matrix(block.Z, out / f"Z_{i}.csv")
            save_graph(G, out / f"W_{i}.csv")
        print(f"dumped to {out}")
    return 0


def cmd_sweep(args) -> int:
    ds = dataio.load_dataset(args.manifest)
    spec = SweepSpec(alphas=args.alpha_grid, anchors=args.p_grid, orders=args.k_grid, reps=args.reps,
                     seed=args.seed, base=_config(args))
    skip = read_sweep_keys(args.out) if args.resume else set()
    total = sum(1 for c in spec.cells() if cell_key(*c) not in skip)
    done = 0

    def progress(row):
        nonlocal done
        done += 1
        acc = "n/a" if row["acc"] is None else f"{100 * row['acc']:.2f}"
        print(f"[{done}/{total}] alpha={row['alpha']:g} p={row['p']} k={row['k']} seed={row['seed']} ACC={acc}",
              flush=True)

    rows = sweep(ds, spec, skip=skip, progress=progress)
    append = args.resume and args.out.exists()
    text = format_sweep_rows(rows, timings=args.timings, header=not append)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "a" if append else "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {args.out}: {exc}") from None
    best = best_row(rows)
    if best is not None:
        print(f"best: alpha={best['alpha']:g} p={best['p']} k={best['k']} seed={best['seed']} "
              f"ACC={100 * best['acc']:.2f} NMI={100 * best['nmi']:.2f} PUR={100 * best['pur']:.2f}")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_synth(args) -> int:
    dims = args.dims[0] if len(args.dims) == 1 else list(args.dims)
    path = synth(args.n, args.g, args.views, dims, args.separation, args.seed, args.out)
    print(f"wrote {path}")
    return 0


def cmd_scaling(args) -> int:
    rows = scaling_probe(args.sizes, anchors=args.anchors, views=args.views, clusters=args.clusters,
                         filter_order=args.filter_order, dims=args.dims, separation=args.separation,
                         seed=args.seed, repeats=args.repeats)
    cols = ["n"] + [f"time_{s}" for s in STAGES] + ["time_total"]
    lines = [",".join(cols)] + [",".join(str(r["n"]) if c == "n" else f"{r[c]:.6f}" for c in cols) for r in rows]
    print("\n".join(lines))
    if len(rows) > 1:
        slope = loglog_slope([r["n"] for r in rows], [r["time_total"] for r in rows])
        print(f"log-log slope of total time vs n: {slope:.3f}")
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc}") from None
    return 0


def cmd_export(args) -> int:
    ds = dataio.load_dataset(args.manifest)
    cfg = _config(args)
    out = args.out
    if args.what == "smoothed":
        cfg = cfg.resolve(ds.n, ds.g)
        _, smoothed = smooth_views(ds.views, cfg)
        for i, Xbar in enumerate(smoothed):
            dataio.save_matrix(Xbar, out / f"Xbar_{i}.csv")
    else:
        result = run_smvsc(ds, cfg)
        if args.what == "embedding":
            dataio.save_matrix(result.embedding.Q, out / "Q.csv")
        else:
            for block, anchors in zip(result.blocks, result.anchors):
                dataio.save_matrix(block.Z, out / f"Z_{block.view_index}.csv")
                dataio.save_matrix(anchors.A, out / f"A_{anchors.view_index}.csv")
    print(f"exported {args.what} to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"smvsc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SMVSCError as exc:
        print(f"smvsc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
