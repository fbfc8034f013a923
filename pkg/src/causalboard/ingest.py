"""CSV loading, validation, and standardization.

Produces clean numeric matrices for structure discovery and SEM: rows with
missing cells are dropped (listwise deletion), continuous columns are
z-scored, and categorical columns are integer-coded 0..k-1.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

MISSING_TOKENS = ("", "NA")

# Inference rule: a column is categorical when it has <= MAX_CATEGORIES
# distinct values and those values are either non-numeric labels or small
# integers (|v| <= SMALL_INT_BOUND).
MAX_CATEGORIES = 10
SMALL_INT_BOUND = 100

Z_TOLERANCE = 1e-9


class IngestError(ValueError):
    """Raised when a CSV cannot be turned into a valid Dataset."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # "continuous" | "categorical"
    categories: Optional[tuple[str, ...]] = None
    mean: float = 0.0  # raw-scale, recorded before standardization
    stddev: float = 1.0


@dataclass(frozen=True)
class LoadReport:
    rows_total: int
    rows_dropped: int
    dropped_row_indices: tuple[int, ...]
    inferred_kinds: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Dataset:
    name: str
    columns: tuple[ColumnSpec, ...]
    rows: np.ndarray  # (n, n_cols) float64
    n: int
    report: LoadReport | None = None

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.index_of(name)]

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(f"no column named {name!r}")

    def spec_of(self, name: str) -> ColumnSpec:
        return self.columns[self.index_of(name)]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        meta = [(c.name, c.kind) for c in self.columns]
        h.update(json.dumps(meta).encode())
        h.update(np.ascontiguousarray(self.rows).tobytes())
        return h.hexdigest()


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _try_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def _infer_kind(values: Sequence[str]) -> str:
    distinct = set(v.strip() for v in values)
    floats = [_try_float(v) for v in distinct]
    if any(f is None for f in floats):
        if len(distinct) <= MAX_CATEGORIES:
            return "categorical"
        raise IngestError(
            f"column has {len(distinct)} distinct non-numeric values; "
            f"cannot treat as continuous"
        )
    if len(distinct) <= MAX_CATEGORIES and all(
        f is not None and float(f).is_integer() and abs(f) <= SMALL_INT_BOUND
        for f in floats
    ):
        return "categorical"
    return "continuous"


def _category_order(labels: set[str]) -> list[str]:
    # Numeric category labels sort numerically so codes preserve monotone
    # relationships (e.g. cylinder counts); otherwise lexicographic.
    floats = {label: _try_float(label) for label in labels}
    if all(f is not None for f in floats.values()):
        return sorted(labels, key=lambda s: floats[s])
    return sorted(labels)


def load_csv(
    path: str,
    schema_hints: Optional[dict[str, str]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Load an RFC-4180 CSV (UTF-8, header row) into a clean Dataset.

    Rows with any missing cell ("" or "NA") are dropped. Continuous columns
    are z-scored; categorical columns are integer-coded against the sorted
    label set. Column kinds are inferred unless overridden by schema_hints.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return _load_csv_text(fh.read(), path, schema_hints, name)
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def load_csv_text(
    text: str,
    source: str = "<memory>",
    schema_hints: Optional[dict[str, str]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Same as load_csv but from an in-memory CSV string."""
    return _load_csv_text(text, source, schema_hints, name)


def _load_csv_text(
    text: str,
    source: str,
    schema_hints: Optional[dict[str, str]],
    name: Optional[str],
) -> Dataset:
    hints = schema_hints or {}
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError(f"{source}: empty file, expected a header row")
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise IngestError(f"{source}: empty column name in header")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise IngestError(f"{source}: duplicate column names {dupes}")
    for hint_name, hint_kind in hints.items():
        if hint_name not in header:
            raise IngestError(f"{source}: schema hint for unknown column {hint_name!r}")
        if hint_kind not in ("continuous", "categorical"):
            raise IngestError(f"{source}: invalid kind {hint_kind!r} in schema hints")

    raw_rows: list[list[str]] = []
    kept: list[list[str]] = []
    dropped: list[int] = []
    for i, row in enumerate(reader):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != len(header):
            raise IngestError(
                f"{source}: row {i + 2} has {len(row)} cells, expected {len(header)}"
            )
        raw_rows.append(row)
        if any(_is_missing(c) for c in row):
            dropped.append(i)
        else:
            kept.append(row)

    if len(kept) < 2:
        raise IngestError(
            f"{source}: only {len(kept)} complete rows survive listwise deletion"
        )

    n = len(kept)
    inferred: dict[str, str] = {}
    columns: list[ColumnSpec] = []
    matrix = np.empty((n, len(header)), dtype=np.float64)

    for j, col_name in enumerate(header):
        values = [row[j] for row in kept]
        kind = hints.get(col_name)
        if kind is None:
            try:
                kind = _infer_kind(values)
            except IngestError as exc:
                raise IngestError(f"{source}: column {col_name!r}: {exc}") from exc
            inferred[col_name] = kind

        if kind == "categorical":
            order = _category_order(set(v.strip() for v in values))
            code = {label: float(k) for k, label in enumerate(order)}
            matrix[:, j] = [code[v.strip()] for v in values]
            coded = matrix[:, j]
            columns.append(
                ColumnSpec(
                    name=col_name,
                    kind="categorical",
                    categories=tuple(order),
                    mean=float(coded.mean()),
                    stddev=float(coded.std()),
                )
            )
        else:
            floats = [_try_float(v) for v in values]
            bad = next((k for k, f in enumerate(floats) if f is None), None)
            if bad is not None:
                raise IngestError(
                    f"{source}: column {col_name!r} is continuous but row "
                    f"{bad + 2} holds non-numeric {values[bad]!r}"
                )
            raw = np.array(floats, dtype=np.float64)
            mean = float(raw.mean())
            std = float(raw.std())
            if std == 0.0:
                raise IngestError(
                    f"{source}: continuous column {col_name!r} has zero variance "
                    f"after cleaning"
                )
            matrix[:, j] = (raw - mean) / std
            columns.append(
                ColumnSpec(name=col_name, kind="continuous", mean=mean, stddev=std)
            )

    report = LoadReport(
        rows_total=len(raw_rows),
        rows_dropped=len(dropped),
        dropped_row_indices=tuple(dropped),
        inferred_kinds=inferred,
    )
    matrix.setflags(write=False)
    return Dataset(
        name=name or source,
        columns=tuple(columns),
        rows=matrix,
        n=n,
        report=report,
    )


def standardize(values: np.ndarray) -> np.ndarray:
    """Z-score a vector (population stddev). Idempotent within Z_TOLERANCE."""
    std = values.std()
    if std == 0.0:
        raise IngestError("zero-variance column cannot be standardized")
    return (values - values.mean()) / std


def raw_values(ds: Dataset, column: str) -> np.ndarray:
    """Undo standardization: raw = z * stddev + mean (continuous columns)."""
    spec = ds.spec_of(column)
    if spec.kind != "continuous":
        raise IngestError(f"column {column!r} is not continuous")
    return ds.column(column) * spec.stddev + spec.mean


def summary(ds: Dataset) -> str:
    """Deterministic per-column text report."""
    lines = [f"dataset: {ds.name}", f"rows retained: {ds.n}"]
    if ds.report is not None:
        lines.append(
            f"rows dropped (missing cells): {ds.report.rows_dropped} "
            f"of {ds.report.rows_total}"
        )
    for spec in ds.columns:
        if spec.kind == "categorical":
            col = ds.column(spec.name)
            counts = ", ".join(
                f"{label}:{int((col == k).sum())}"
                for k, label in enumerate(spec.categories or ())
            )
            lines.append(f"  {spec.name} [categorical] {counts}")
        else:
            lines.append(
                f"  {spec.name} [continuous] mean={spec.mean:.6g} "
                f"stddev={spec.stddev:.6g}"
            )
    return "\n".join(lines)
