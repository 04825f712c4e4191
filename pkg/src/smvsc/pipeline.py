"""End-to-end smoothed multi-view subspace clustering, parameter sweeps and timing probes.

Per view: adaptive-neighbour graph on the raw features, k low-pass filter
passes, K-means anchors on the smoothed features, ridge self-expression
against those anchors. The coefficient blocks are stacked, embedded by SVD
and partitioned with K-means.

Anchor K-means runs a fixed Lloyd budget (``anchor_iters``) so its cost stays
linear in n; the final K-means on the g-column embedding runs to convergence.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import dataio
from .dataio import Dataset, DatasetManifest
from .errors import ConfigError, DataError
from .filtering import filter_matrix
from .graph import AffinityGraph, normalized_laplacian, probabilistic_neighbors
from .kmeans import KMeansConfig, kmeans
from .metrics import evaluate
from .subspace import (
    AnchorSet,
    CoefficientBlock,
    Embedding,
    concatenate,
    objective,
    solve_coefficients,
    spectral_embedding,
)

STAGES = ("graph", "filter", "anchor", "solve", "svd", "kmeans")
SWEEP_HEADER = ["alpha", "p", "k", "seed", "acc", "nmi", "pur"] + [f"time_{s}" for s in STAGES]
DEFAULT_ANCHORS = 50


@dataclass(frozen=True)
class PipelineConfig:
    filter_order: int = 1
    alpha: float = 1.0
    anchors: int | None = None
    clusters: int | None = None
    neighbors: int = 10
    kmeans_iters: int = 300
    kmeans_restarts: int = 10
    kmeans_tol: float = 1e-9
    anchor_iters: int = 20
    seed: int = 0
    normalize_embedding: bool = False

    def resolve(self, n: int, g: int | None) -> "PipelineConfig":
        """Fill defaults that depend on the data and validate everything."""
        clusters = self.clusters if self.clusters is not None else g
        if clusters is None:
            raise ConfigError("cluster count is required")
        anchors = self.anchors
        if anchors is None:
            anchors = max(clusters, min(DEFAULT_ANCHORS, n))
        cfg = replace(self, clusters=int(clusters), anchors=int(anchors))
        cfg.validate(n)
        return cfg

    def validate(self, n: int) -> None:
        def positive_int(name, value):
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

        positive_int("anchors", self.anchors)
        positive_int("clusters", self.clusters)
        positive_int("neighbors", self.neighbors)
        positive_int("anchor_iters", self.anchor_iters)
        if isinstance(self.filter_order, bool) or int(self.filter_order) != self.filter_order or self.filter_order < 0:
            raise ConfigError(f"filter order must be a non-negative integer, got {self.filter_order!r}")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha!r}")
        if self.anchors > n:
            raise ConfigError(f"anchor count p={self.anchors} exceeds sample count n={n}")
        if self.clusters > self.anchors:
            raise ConfigError(f"cluster count g={self.clusters} exceeds anchor count p={self.anchors}")
        if n < 3:
            raise ConfigError("need at least 3 samples to build a neighbour graph")


@dataclass
class ClusterResult:
    labels: np.ndarray
    embedding: Embedding
    timings: dict[str, float]
    objectives: list[float]
    metrics: dict[str, float] | None = None
    config: PipelineConfig | None = None
    graphs: list[AffinityGraph] = field(default_factory=list, repr=False)
    smoothed: list[np.ndarray] = field(default_factory=list, repr=False)
    anchors: list[AnchorSet] = field(default_factory=list, repr=False)
    blocks: list[CoefficientBlock] = field(default_factory=list, repr=False)

    @property
    def total_time(self) -> float:
        return sum(self.timings.values())


def stage_seeds(seed: int, n_views: int) -> tuple[list[int], int]:
    """Independent 64-bit seeds for each view's anchor K-means and the final K-means."""
    children = np.random.SeedSequence(seed).spawn(n_views + 1)
    seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
    return seeds[:n_views], seeds[n_views]


def _as_dataset(data) -> Dataset:
    if isinstance(data, Dataset):
        return data
    if isinstance(data, (str, Path)):
        return dataio.load_dataset(data)
    if isinstance(data, DatasetManifest):
        raise DataError("pass the manifest path or a loaded Dataset, not a bare DatasetManifest")
    raise DataError(f"unsupported dataset type {type(data).__name__}")


def smooth_views(views: Sequence[np.ndarray], cfg: PipelineConfig, timings: dict | None = None):
    """Graph construction and filtering for every view; returns (graphs, smoothed)."""
    graphs, smoothed = [], []
    t_graph = t_filter = 0.0
    for X in views:
        t0 = time.perf_counter()
        s = min(cfg.neighbors, X.shape[0] - 2)
        G = probabilistic_neighbors(X, s)
        L = normalized_laplacian(G)
        t1 = time.perf_counter()
        smoothed.append(filter_matrix(X, L, cfg.filter_order))
        t2 = time.perf_counter()
        graphs.append(G)
        t_graph += t1 - t0
        t_filter += t2 - t1
    if timings is not None:
        timings["graph"] = t_graph
        timings["filter"] = t_filter
    return graphs, smoothed


def run_from_smoothed(smoothed: Sequence[np.ndarray], cfg: PipelineConfig, truth=None,
                      timings: dict | None = None) -> ClusterResult:
    """Anchors, self-expression, embedding and final partition on already-smoothed views.

    ``cfg`` must already be resolved (anchors and clusters set).
    """
    timings = {} if timings is None else timings
    timings.setdefault("graph", 0.0)
    timings.setdefault("filter", 0.0)
    anchor_seeds, final_seed = stage_seeds(cfg.seed, len(smoothed))

    t0 = time.perf_counter()
    anchor_sets = []
    for i, (Xbar, seed) in enumerate(zip(smoothed, anchor_seeds)):
        km = kmeans(Xbar, KMeansConfig(clusters=cfg.anchors, max_iters=cfg.anchor_iters,
                                       n_restarts=cfg.kmeans_restarts, tol=cfg.kmeans_tol, seed=seed))
        anchor_sets.append(AnchorSet.from_centers(km.centers, view_index=i))
    t1 = time.perf_counter()
    blocks = [solve_coefficients(Xbar, A, cfg.alpha) for Xbar, A in zip(smoothed, anchor_sets)]
    t2 = time.perf_counter()
    emb = spectral_embedding(concatenate(blocks), cfg.clusters)
    Q = emb.Q
    if cfg.normalize_embedding:
        norms = np.linalg.norm(Q, axis=1, keepdims=True)
        Q = Q / np.where(norms > 0, norms, 1.0)
    t3 = time.perf_counter()
    final = kmeans(Q, KMeansConfig(clusters=cfg.clusters, max_iters=cfg.kmeans_iters,
                                   n_restarts=cfg.kmeans_restarts, tol=cfg.kmeans_tol, seed=final_seed))
    t4 = time.perf_counter()
    timings.update(anchor=t1 - t0, solve=t2 - t1, svd=t3 - t2, kmeans=t4 - t3)

    objectives = [objective(X, A, b.Z, cfg.alpha) for X, A, b in zip(smoothed, anchor_sets, blocks)]
    metrics = evaluate(truth, final.assignment) if truth is not None else None
    return ClusterResult(
        labels=final.assignment,
        embedding=emb,
        timings={s: timings[s] for s in STAGES},
        objectives=objectives,
        metrics=metrics,
        config=cfg,
        smoothed=list(smoothed),
        anchors=anchor_sets,
        blocks=blocks,
    )


def run_smvsc(data, cfg: PipelineConfig = PipelineConfig()) -> ClusterResult:
    """Run the full pipeline; deterministic given ``cfg.seed``."""
    ds = _as_dataset(data)
    cfg = cfg.resolve(ds.n, ds.g)
    timings: dict[str, float] = {}
    graphs, smoothed = smooth_views(ds.views, cfg, timings)
    result = run_from_smoothed(smoothed, cfg, truth=ds.labels, timings=timings)
    result.graphs = graphs
    return result


# --------------------------------------------------------------------------- sweeps


def worker_count() -> int:
    """Worker cap from ``SMVSC_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("SMVSC_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"SMVSC_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ConfigError("SMVSC_THREADS must be >= 0")
    return value or (os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple[float, ...]
    anchors: tuple[int, ...]
    orders: tuple[int, ...] = (1,)
    reps: int = 1
    seed: int = 0
    base: PipelineConfig = PipelineConfig()

    def __post_init__(self):
        if not self.alphas or not self.anchors or not self.orders:
            raise ConfigError("sweep grids must be non-empty")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")

    def cells(self) -> list[tuple[float, int, int, int]]:
        """(alpha, p, k, seed) in output order; repetition r uses seed + r."""
        return [(float(a), int(p), int(k), self.seed + r)
                for a in self.alphas for p in self.anchors for k in self.orders for r in range(self.reps)]


def cell_key(alpha, p, k, seed) -> tuple[str, str, str, str]:
    return (repr(float(alpha)), str(int(p)), str(int(k)), str(int(seed)))


def sweep(data, spec: SweepSpec, skip: Iterable[tuple] = (),
          progress: Callable[[dict], None] | None = None) -> list[dict]:
    """Evaluate every grid cell; one row per (alpha, p, k, seed).

    Cells whose key appears in ``skip`` (as produced by :func:`read_sweep_keys`)
    are not run, which makes interrupted sweeps resumable.
    """
    ds = _as_dataset(data)
    done = set(skip)
    todo = [c for c in spec.cells() if cell_key(*c) not in done]

    def run_cell(cell):
        alpha, p, k, seed = cell
        cfg = replace(spec.base, alpha=alpha, anchors=p, filter_order=k, seed=seed)
        res = run_smvsc(ds, cfg)
        row = {"alpha": alpha, "p": p, "k": k, "seed": seed}
        m = res.metrics or {}
        row.update(acc=m.get("acc"), nmi=m.get("nmi"), pur=m.get("pur"))
        row.update({f"time_{s}": res.timings[s] for s in STAGES})
        return row

    rows = []
    workers = min(worker_count(), max(len(todo), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(run_cell, todo):
                rows.append(row)
                if progress:
                    progress(row)
    else:
        for cell in todo:
            row = run_cell(cell)
            rows.append(row)
            if progress:
                progress(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def format_sweep_rows(rows: Sequence[dict], timings: bool = True, header: bool = True) -> str:
    """CSV text; with ``timings=False`` the time columns are left empty so output is reproducible."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(SWEEP_HEADER)
    for row in rows:
        out = []
        for col in SWEEP_HEADER:
            if col.startswith("time_") and not timings:
                out.append("")
            else:
                out.append(_fmt(row.get(col)))
        writer.writerow(out)
    return buf.getvalue()


def read_sweep_keys(path: str | Path) -> set[tuple[str, str, str, str]]:
    path = Path(path)
    if not path.exists():
        return set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_HEADER:
            raise DataError(f"{path}: not a sweep CSV (unexpected header)")
        return {cell_key(float(r["alpha"]), r["p"], r["k"], r["seed"]) for r in reader}


def best_row(rows: Sequence[dict]) -> dict | None:
    scored = [r for r in rows if r.get("acc") is not None]
    return max(scored, key=lambda r: r["acc"]) if scored else None


# --------------------------------------------------------------------------- synthetic data


def make_blobs(n: int, g: int, v: int, dims: Sequence[int] | int, separation: float,
               seed: int = 0) -> Dataset:
    """Gaussian blobs observed through ``v`` views with a shared cluster identity.

    Per view, g random means are rescaled so their closest pair is exactly
    ``separation`` apart; noise is unit-covariance.
    """
    if isinstance(dims, int):
        dims = [dims] * v
    dims = list(dims)
    if n < 1 or g < 1 or v < 1 or len(dims) != v or min(dims) < 1:
        raise ConfigError("n, g, v and dims must be positive with len(dims) == v")
    if g > n:
        raise ConfigError(f"cannot draw {g} clusters from {n} samples")
    if separation < 0:
        raise ConfigError("separation must be non-negative")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % g)
    views = []
    for m in dims:
        means = rng.standard_normal((g, m))
        if g > 1:
            diff = means[:, None, :] - means[None, :, :]
            dist = np.sqrt((diff ** 2).sum(-1))
            closest = dist[np.triu_indices(g, 1)].min()
            means *= separation / closest
        else:
            means[:] = 0.0
        views.append(means[labels] + rng.standard_normal((n, m)))
    return Dataset(views=views, g=g, labels=labels.astype(np.int64), name="blobs")


def synth(n: int, g: int, v: int, dims, separation: float, seed: int, out_dir: str | Path) -> Path:
    """Generate blobs and write them as a manifest dataset; returns the manifest path."""
    ds = make_blobs(n, g, v, dims, separation, seed)
    return dataio.write_dataset(ds, out_dir, name=f"blobs-n{n}-g{g}-v{v}-sep{separation:g}-seed{seed}")


def scaling_probe(sizes: Sequence[int], anchors: int = 50, views: int = 3, clusters: int = 3,
                  filter_order: int = 1, dims: Sequence[int] | int = 10, separation: float = 6.0,
                  seed: int = 0, repeats: int = 1, base: PipelineConfig = PipelineConfig()) -> list[dict]:
    """Per-stage wall times of the pipeline on blobs of increasing size.

    With ``repeats > 1`` each stage reports its fastest repeat.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ConfigError("sizes must be ascending")
    rows = []
    for n in sizes:
        ds = make_blobs(n, clusters, views, dims, separation, seed)
        cfg = replace(base, anchors=anchors, clusters=clusters, filter_order=filter_order, seed=seed)
        best = None
        for _ in range(max(1, repeats)):
            t = run_smvsc(ds, cfg).timings
            best = dict(t) if best is None else {s: min(best[s], t[s]) for s in STAGES}
        row = {"n": n, **{f"time_{s}": best[s] for s in STAGES}}
        row["time_total"] = sum(best.values())
        rows.append(row)
    return rows


def loglog_slope(ns: Sequence[float], times: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(n)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(times, float)), 1)
    return float(slope)
