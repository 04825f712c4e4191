"""Reading and writing multi-view datasets.

A dataset is described by a JSON manifest::

    {"name": "blobs", "views": ["view0.csv", "view1.csv"], "labels": "labels.txt",
     "n": 300, "dims": [5, 8], "g": 3}

View files are headerless CSV (one sample per row, dot decimal separator).
Labels hold one base-10 integer per line. Relative paths are resolved against
the directory containing the manifest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

MANIFEST_KEYS = ("name", "views", "labels", "n", "dims", "g")


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    views: tuple[Path, ...]
    labels: Path | None
    n: int
    dims: tuple[int, ...]
    g: int

    @property
    def n_views(self) -> int:
        return len(self.views)

    def to_json(self, base: Path | None = None) -> dict:
        def rel(p: Path) -> str:
            if base is not None:
                try:
                    return p.relative_to(base).as_posix()
                except ValueError:
                    pass
            return p.as_posix()

        return {
            "name": self.name,
            "views": [rel(p) for p in self.views],
            "labels": None if self.labels is None else rel(self.labels),
            "n": self.n,
            "dims": list(self.dims),
            "g": self.g,
        }


@dataclass
class Dataset:
    """Views and (optional) ground-truth labels held in memory."""

    views: list[np.ndarray]
    g: int
    labels: np.ndarray | None = None
    name: str = "dataset"
    manifest: DatasetManifest | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.views:
            raise DataError("dataset has no views")
        n = self.views[0].shape[0]
        for i, X in enumerate(self.views):
            if X.ndim != 2:
                raise DataError(f"view {i} is not a matrix")
            if X.shape[0] != n:
                raise DataError(f"row count mismatch: view {i} has {X.shape[0]} rows, expected {n}")
        if self.labels is not None and len(self.labels) != n:
            raise DataError(f"label count mismatch: {len(self.labels)} labels for {n} samples")

    @property
    def n(self) -> int:
        return self.views[0].shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(X.shape[1] for X in self.views)


def _parse_float(token: str, path: Path, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"{path}: non-numeric token {token.strip()!r} at line {lineno}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: non-finite value {token.strip()!r} at line {lineno}")
    return value


def load_view(path: str | Path, expected_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Parse a headerless numeric CSV into a float64 matrix.

    Parsing goes through ``float()`` so it never depends on the locale.
    Blank lines are ignored; rows must all have the same width.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None

    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row = [_parse_float(tok, path, lineno) for tok in line.split(",")]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"{path}: ragged row at line {lineno} ({len(row)} fields, expected {width})")
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty matrix")

    X = np.array(rows, dtype=np.float64)
    if expected_shape is not None:
        n, m = expected_shape
        if X.shape[0] != n:
            raise DataError(f"{path}: row count mismatch ({X.shape[0]} rows, expected {n})")
        if X.shape[1] != m:
            raise DataError(f"{path}: column count mismatch ({X.shape[1]} columns, expected {m})")
    if X.shape[0] < 2:
        raise DataError(f"{path}: a view needs at least 2 samples")
    return X


def save_matrix(matrix, path: str | Path) -> None:
    """Write a finite real matrix as CSV with 17 significant digits."""
    M = np.asarray(matrix, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise DataError("empty matrix")
    if not np.all(np.isfinite(M)):
        raise DataError("refusing to save a matrix with NaN/Inf entries")
    lines = [",".join(f"{v:.17g}" for v in row) for row in M.tolist()]
    _write_text(Path(path), "\n".join(lines) + "\n")


def load_labels(path: str | Path, n: int | None = None) -> np.ndarray:
    """Read integer labels, one per line, and remap them to 0..c-1."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tok = line.strip()
        if not tok:
            continue
        try:
            raw.append(int(tok, 10))
        except ValueError:
            raise DataError(f"{path}: label {tok!r} at line {lineno} is not an integer") from None
    if n is not None and len(raw) != n:
        raise DataError(f"{path}: label count mismatch ({len(raw)} labels, expected {n})")
    if not raw:
        raise DataError(f"{path}: no labels")
    return contiguous_labels(raw)


def contiguous_labels(labels: Sequence[int]) -> np.ndarray:
    _, inverse = np.unique(np.asarray(labels), return_inverse=True)
    return inverse.astype(np.int64).ravel()


def save_labels(labels, path: str | Path) -> None:
    _write_text(Path(path), "".join(f"{int(v)}\n" for v in np.asarray(labels).ravel()))


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def _positive_int(obj: dict, key: str) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise DataError(f"manifest field {key!r} must be a positive integer, got {value!r}")
    return value


def read_manifest(path: str | Path) -> DatasetManifest:
    """Parse the manifest JSON and check field types, without opening the data files."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError("manifest must be a JSON object")
    missing = [k for k in MANIFEST_KEYS if k not in obj]
    if missing:
        raise DataError(f"manifest is missing field(s): {', '.join(missing)}")

    base = path.parent
    views = obj["views"]
    if not isinstance(views, list) or not views or not all(isinstance(v, str) for v in views):
        raise DataError("manifest field 'views' must be a non-empty list of paths")
    dims = obj["dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims):
        raise DataError("manifest field 'dims' must be a list of positive integers")
    if len(dims) != len(views):
        raise DataError(f"manifest lists {len(views)} views but {len(dims)} dims")
    labels = obj["labels"]
    if labels is not None and not isinstance(labels, str):
        raise DataError("manifest field 'labels' must be a path or null")
    if not isinstance(obj["name"], str):
        raise DataError("manifest field 'name' must be a string")

    return DatasetManifest(
        name=obj["name"],
        views=tuple(base / v for v in views),
        labels=None if labels is None else base / labels,
        n=_positive_int(obj, "n"),
        dims=tuple(dims),
        g=_positive_int(obj, "g"),
    )


def load_dataset(path: str | Path) -> Dataset:
    """Read a manifest and every file it references, validating all shapes."""
    manifest = read_manifest(path)
    views = [load_view(p, (manifest.n, m)) for p, m in zip(manifest.views, manifest.dims)]
    labels = None
    if manifest.labels is not None:
        labels = load_labels(manifest.labels, manifest.n)
    return Dataset(views=views, g=manifest.g, labels=labels, name=manifest.name, manifest=manifest)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Validated manifest; all referenced files are parsed eagerly."""
    return load_dataset(path).manifest


def write_dataset(dataset: Dataset, out_dir: str | Path, name: str | None = None) -> Path:
    """Write views, labels and a manifest into ``out_dir``; returns the manifest path."""
    out = Path(out_dir)
    view_paths = []
    for i, X in enumerate(dataset.views):
        p = out / f"view{i}.csv"
        save_matrix(X, p)
        view_paths.append(p)
    label_path = None
    if dataset.labels is not None:
        label_path = out / "labels.txt"
        save_labels(dataset.labels, label_path)
    manifest = DatasetManifest(
        name=name or dataset.name,
        views=tuple(view_paths),
        labels=label_path,
        n=dataset.n,
        dims=dataset.dims,
        g=dataset.g,
    )
    manifest_path = out / "manifest.json"
    _write_text(manifest_path, json.dumps(manifest.to_json(base=out), indent=2) + "\n")
    return manifest_path
