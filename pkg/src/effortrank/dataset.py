"""Dataset representation, delimited-file ingestion, preprocessing and manifests."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

TRUTHY = ("true", "yes", "buggy", "defective", "y", "t")
FALSY = ("false", "no", "clean", "n", "f", "")


class SchemaError(ValueError):
    """A required column is missing or the schema is inconsistent with the file."""


class DataParseError(ValueError):
    """A cell could not be parsed; ``row`` is the 1-based data row (header excluded)."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ModuleRecord(NamedTuple):
    id: str
    features: tuple
    effort: float
    defective: bool


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, immutable collection of modules.

    Columnar storage: ``X`` has one row per module, ``effort`` holds the raw
    inspection effort (lines) and ``defective`` the actual binary label. Row
    indices are the join key for every downstream ranking and metric.
    """

    name: str
    feature_names: tuple
    X: np.ndarray
    effort: np.ndarray
    defective: np.ndarray
    ids: tuple = None
    source_tag: str = ""

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        n, d = X.shape
        if n < 2:
            raise ValueError(f"dataset {self.name!r} needs at least 2 records, got {n}")
        if d < 1 or len(self.feature_names) != d:
            raise ValueError(
                f"dataset {self.name!r}: {len(self.feature_names)} feature names for {d} columns"
            )
        ids = self.ids if self.ids is not None else [str(i) for i in range(n)]
        if len(ids) != n or len(self.effort) != n or len(self.defective) != n:
            raise ValueError(f"dataset {self.name!r}: column lengths disagree")
        object.__setattr__(self, "X", _frozen(X, float))
        object.__setattr__(self, "effort", _frozen(self.effort, float))
        object.__setattr__(self, "defective", _frozen(self.defective, bool))
        object.__setattr__(self, "ids", tuple(str(i) for i in ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_defective(self):
        return int(self.defective.sum())

    @property
    def records(self) -> list[ModuleRecord]:
        return list(self)

    def __iter__(self) -> Iterator[ModuleRecord]:
        for i in range(len(self)):
            yield ModuleRecord(
                self.ids[i], tuple(self.X[i].tolist()), float(self.effort[i]), bool(self.defective[i])
            )

    def subset(self, indices, name=None) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            name=name or self.name,
            feature_names=self.feature_names,
            X=self.X[idx],
            effort=self.effort[idx],
            defective=self.defective[idx],
            ids=[self.ids[i] for i in idx],
            source_tag=self.source_tag,
        )

    @classmethod
    def from_records(cls, name, feature_names, records: Sequence[ModuleRecord], source_tag=""):
        records = list(records)
        return cls(
            name=name,
            feature_names=tuple(feature_names),
            X=np.array([r.features for r in records], dtype=float).reshape(len(records), -1),
            effort=[r.effort for r in records],
            defective=[r.defective for r in records],
            ids=[r.id for r in records],
            source_tag=source_tag,
        )


@dataclass(frozen=True)
class ColumnSchema:
    """How to read a delimited dataset file.

    ``effort`` names the effort column, or several columns joined by ``+``
    whose sum is the effort (e.g. ``"la+ld"`` for commit churn). With
    ``effort_as_feature`` the effort column(s) also stay in the feature set,
    which is how metric suites that include LOC are normally used.
    ``exclude`` lists non-feature columns to skip; absent ones are ignored so
    one schema can serve files of the same corpus with slightly different headers.
    """

    effort: str = "loc"
    label: str = "bug"
    id: str | None = None
    exclude: tuple = ()
    effort_as_feature: bool = True
    delimiter: str = ","

    @property
    def effort_columns(self):
        return tuple(c.strip() for c in self.effort.split("+"))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "exclude" in d:
            d["exclude"] = tuple(d["exclude"])
        return cls(**d)


def parse_label(value, row=None) -> bool:
    s = str(value).strip()
    try:
        return float(s) != 0.0
    except ValueError:
        pass
    low = s.lower()
    if low in TRUTHY:
        return True
    if low in FALSY:
        return False
    raise DataParseError(f"row {row}: cannot interpret label {s!r}", row=row)


def _parse_float(value, column, row):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise DataParseError(
            f"row {row}: non-numeric value {value!r} in column {column!r}", row=row
        ) from None
    if not math.isfinite(x):
        raise DataParseError(f"row {row}: non-finite value {value!r} in column {column!r}", row=row)
    return x


def load_dataset(path, schema: ColumnSchema | None = None, name=None, source_tag="") -> Dataset:
    """Read a delimited file with a header row into a :class:`Dataset`.

    Row order is preserved. Every column that is not the label, the id, an
    excluded column or (unless ``effort_as_feature``) an effort column is a
    feature and must be numeric.
    """
    schema = schema or ColumnSchema()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        header = next(reader, None)
        if not header:
            raise DataParseError(f"{path}: empty file")
        header = [h.strip() for h in header]
        rows = [r for r in reader if any(c.strip() for c in r)]
    if not rows:
        raise DataParseError(f"{path}: no data rows")

    col = {h: i for i, h in enumerate(header)}
    required = list(schema.effort_columns) + [schema.label]
    if schema.id:
        required.append(schema.id)
    for c in required:
        if c not in col:
            raise SchemaError(f"{path}: missing column {c!r}")

    skip = {schema.label, *schema.exclude}
    if schema.id:
        skip.add(schema.id)
    if not schema.effort_as_feature:
        skip.update(schema.effort_columns)
    feature_names = [h for h in header if h not in skip]
    if not feature_names:
        raise SchemaError(f"{path}: no feature columns left after applying the schema")

    X = np.empty((len(rows), len(feature_names)))
    effort = np.empty(len(rows))
    labels = np.empty(len(rows), dtype=bool)
    ids = []
    for r, cells in enumerate(rows, start=1):
        if len(cells) != len(header):
            raise DataParseError(
                f"{path}: row {r} has {len(cells)} cells, header has {len(header)}", row=r
            )
        for j, f in enumerate(feature_names):
            X[r - 1, j] = _parse_float(cells[col[f]].strip(), f, r)
        effort[r - 1] = sum(_parse_float(cells[col[c]].strip(), c, r) for c in schema.effort_columns)
        labels[r - 1] = parse_label(cells[col[schema.label]], row=r)
        ids.append(cells[col[schema.id]].strip() if schema.id else str(r - 1))

    return Dataset(
        name=name or path.stem,
        feature_names=tuple(feature_names),
        X=X,
        effort=effort,
        defective=labels,
        ids=ids,
        source_tag=source_tag,
    )


# column names used by write_dataset; chosen to avoid clashing with metric names
SERIALIZED_SCHEMA = ColumnSchema(
    effort="_effort", label="_defective", id="_id", effort_as_feature=False
)


def write_dataset(d: Dataset, path) -> ColumnSchema:
    """Write ``d`` so that ``load_dataset(path, SERIALIZED_SCHEMA)`` reproduces it."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["_id", *d.feature_names, "_effort", "_defective"])
        for i in range(len(d)):
            w.writerow(
                [d.ids[i], *(repr(float(v)) for v in d.X[i]), repr(float(d.effort[i])), int(d.defective[i])]
            )
    return SERIALIZED_SCHEMA


def preprocess(d: Dataset, log_transform=True, drop_zero_effort=True) -> Dataset:
    """Drop zero-effort modules and log-transform features with ln(1 + x).

    Effort itself is never transformed: the effort-aware metrics budget raw
    lines. Returns a new dataset; ``d`` is untouched.
    """
    keep = np.ones(len(d), dtype=bool)
    if drop_zero_effort:
        keep = d.effort > 0
    X = d.X[keep]
    if log_transform:
        if (X < 0).any():
            r, c = np.argwhere(X < 0)[0]
            raise ValueError(
                f"dataset {d.name!r}: negative value in feature {d.feature_names[c]!r};"
                " log transform needs non-negative features"
            )
        X = np.log1p(X)
    return Dataset(
        name=d.name,
        feature_names=d.feature_names,
        X=X,
        effort=d.effort[keep],
        defective=d.defective[keep],
        ids=[i for i, k in zip(d.ids, keep) if k],
        source_tag=d.source_tag,
    )


def skewness(values) -> float:
    """Population skewness: mean of cubed z-scores, sigma with divisor N."""
    x = np.asarray(values, dtype=float)
    if x.size < 3:
        raise ValueError("skewness needs at least 3 values")
    dev = x - x.mean()
    sigma = np.sqrt(np.mean(dev**2))
    if sigma == 0 or sigma <= 1e-15 * max(1.0, np.abs(x).max()):
        raise ValueError("zero variance")
    return float(np.mean(dev**3) / sigma**3)


class ManifestPair(NamedTuple):
    train: str
    test: str
    source: str

    @property
    def tag(self):
        return f"{self.train}->{self.test}"


@dataclass(frozen=True)
class ExperimentManifest:
    pairs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for p in self.pairs:
            if p.train == p.test:
                raise ValueError(f"manifest pair trains and tests on the same dataset {p.train!r}")
            if (p.train, p.test) in seen:
                raise ValueError(f"duplicate manifest pair {p.train!r} -> {p.test!r}")
            seen.add((p.train, p.test))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def dataset_names(self):
        names = {}
        for p in self.pairs:
            names.setdefault(p.train, p.source)
            names.setdefault(p.test, p.source)
        return names


def parse_manifest(text, origin="<manifest>") -> ExperimentManifest:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 3 or not all(cells):
            raise ValueError(f"{origin}:{lineno}: expected 3 columns (source, train, test)")
        source, train, test = cells
        pairs.append(ManifestPair(train, test, source))
    if not pairs:
        raise ValueError(f"{origin}: manifest is empty")
    return ExperimentManifest(tuple(pairs))


def load_manifest(path) -> ExperimentManifest:
    path = Path(path)
    return parse_manifest(path.read_text(encoding="utf-8"), origin=str(path))


def default_manifest() -> ExperimentManifest:
    """The 61 cross-version / cross-project pairs of the published setup."""
    text = resources.files("effortrank.data").joinpath("benchmark_pairs.txt").read_text("utf-8")
    return parse_manifest(text, origin="benchmark_pairs.txt")


def write_manifest(manifest: ExperimentManifest, path):
    lines = ["# source, train, test"]
    lines += [f"{p.source},{p.train},{p.test}" for p in manifest]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
