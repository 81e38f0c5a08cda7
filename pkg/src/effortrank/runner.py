"""Experiment orchestration: the pair x learner x strategy matrix, zeta sweeps,
synthetic benchmark pairs, and the summaries built on top of them."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from . import learners as L
from . import stats as S
from ._seeding import derive_seed
from .dataset import (
    ColumnSchema, Dataset, ExperimentManifest, ManifestPair, default_manifest, load_dataset,
    load_manifest, preprocess, write_manifest,
)
from .metrics import UndefinedMetricError, evaluate
from .strategies import COMPARED, DEFAULT_THRESHOLD, DEFAULT_ZETA, DISPLAY_NAMES, STRATEGIES, rank, score

log = logging.getLogger(__name__)

INDICATORS = ("recall20", "popt", "ifa")
HIGHER_IS_BETTER = {"recall20": True, "popt": True, "ifa": False}
DEFAULT_SWEEP = (0.005, 0.01, 0.02, 0.05, 0.1)
RESULT_COLUMNS = (
    "pair", "learner", "strategy", "zeta", "recall20", "popt", "ifa", "status",
    "repetition", "source", "detail",
)

# Column layouts of the public corpora; override with a JSON schema file.
SOURCE_SCHEMAS = {
    "PROMISE": ColumnSchema(effort="loc", label="bug", exclude=("name", "version", "name.1")),
    "AEEEM": ColumnSchema(effort="numberOfLinesOfCode", label="bug", exclude=("classname", "class")),
    "Kamei": ColumnSchema(effort="la+ld", label="bug",
                          exclude=("commit_id", "transactionid", "commitdate", "author_date")),
    "JavaScript": ColumnSchema(effort="la+ld", label="bug",
                               exclude=("commit_id", "commit_hash", "author_date", "project")),
    "SYNTH": ColumnSchema(effort="loc", label="bug", id="id"),
}


class ConfigError(ValueError):
    """Invalid run configuration (reported as exit status 1 by the CLI)."""


def _floats(value):
    if value is None or value == "":
        return None
    if isinstance(value, str):
        return tuple(float(v) for v in value.split(",") if v.strip())
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


def _strs(value):
    if isinstance(value, str):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    return tuple(value)


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run; two equal configs give identical results."""

    manifest: str | None = None
    data_dir: str = "data"
    schema: str | None = None
    learners: tuple = ("lr",)
    strategies: tuple = COMPARED + ("manual_up",)
    zeta: float = DEFAULT_ZETA
    zeta_grid: tuple | None = None
    threshold: float = DEFAULT_THRESHOLD
    seed: int = 0
    repetitions: int = 1
    out: str | None = None
    log_transform: bool = True
    drop_zero_effort: bool = True
    budget: float = 0.2
    k: int = L.DEFAULT_K
    tree_count: int = L.DEFAULT_TREES
    nested_tree_count: int = L.DEFAULT_NESTED_TREES
    ir: float = L.DEFAULT_IR
    n_members: int = L.DEFAULT_MEMBERS
    external: tuple = ()
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "learners", _strs(self.learners))
        object.__setattr__(self, "strategies", _strs(self.strategies))
        object.__setattr__(self, "zeta_grid", _floats(self.zeta_grid))
        ext = self.external
        if isinstance(ext, str):
            ext = tuple(tuple(item.split("=", 1)) for item in _strs(ext))
        elif isinstance(ext, dict):
            ext = tuple(sorted(ext.items()))
        object.__setattr__(self, "external", tuple(tuple(e) for e in ext))
        self.validate()

    def validate(self):
        if not self.learners:
            raise ConfigError("at least one learner is required")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
        if not 0.0 < self.zeta < 1.0:
            raise ConfigError("zeta must lie in (0, 1)")
        if self.zeta_grid is not None:
            g = self.zeta_grid
            if not g or any(not 0.0 < z < 1.0 for z in g) or any(b <= a for a, b in zip(g, g[1:])):
                raise ConfigError("zeta grid values must lie in (0, 1) and be strictly increasing")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must lie in (0, 1)")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0.0 < self.budget <= 1.0:
            raise ConfigError("budget must lie in (0, 1]")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for e in self.external:
            if len(e) != 2:
                raise ConfigError("external learners are given as tag=path-template")
        for tag in self.learners:
            try:
                self.learner_spec(tag)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def learner_spec(self, tag) -> L.LearnerSpec:
        return L.learner_from_tag(
            tag, k=self.k, tree_count=self.tree_count, nested_tree_count=self.nested_tree_count,
            ir=self.ir, n_members=self.n_members, external=dict(self.external),
        )

    @property
    def zetas(self):
        return self.zeta_grid if self.zeta_grid is not None else (self.zeta,)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = ""
            elif f.name == "external":
                v = ",".join(f"{a}={b}" for a, b in v)
            elif isinstance(v, tuple):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, **overrides):
        """Parse the flat ``key = value`` format written by :meth:`to_text`."""
        known = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
            values[key] = value
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            coerced = {k: _coerce(known[k], v) for k, v in values.items()}
        except ValueError as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**coerced)


def _coerce(f, value):
    if not isinstance(value, str):
        return value
    name = f.name
    if name in ("zeta", "threshold", "budget", "ir"):
        return float(value)
    if name in ("seed", "repetitions", "k", "tree_count", "nested_tree_count", "n_members", "jobs"):
        return int(value)
    if name in ("log_transform", "drop_zero_effort"):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if name in ("manifest", "schema", "out", "zeta_grid") and value == "":
        return None
    return value


@dataclass(frozen=True)
class ResultRow:
    pair: str
    learner: str
    strategy: str
    zeta: float | None
    recall20: float
    popt: float
    ifa: float
    status: str
    repetition: int = 0
    source: str = ""
    detail: str = ""

    @property
    def ok(self):
        return self.status == "ok"

    @property
    def key(self):
        return (self.pair, self.learner, self.strategy, self.repetition, self.zeta)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


class ResultTable:
    """Result rows in deterministic key order; keys are unique."""

    def __init__(self, rows=()):
        self.rows = list(rows)
        seen = set()
        for r in self.rows:
            if r.key in seen:
                raise ValueError(f"duplicate result key {r.key}")
            seen.add(r.key)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def select(self, **conds):
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in conds.items())]

    @property
    def errored(self):
        return [r for r in self.rows if not r.ok]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])
        return buf.getvalue()

    def write(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read(cls, path):
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                rows.append(ResultRow(
                    pair=rec["pair"], learner=rec["learner"], strategy=rec["strategy"],
                    zeta=float(rec["zeta"]) if rec.get("zeta") else None,
                    recall20=float(rec["recall20"]) if rec["recall20"] else math.nan,
                    popt=float(rec["popt"]) if rec["popt"] else math.nan,
                    ifa=float(rec["ifa"]) if rec["ifa"] else math.nan,
                    status=rec["status"], repetition=int(rec.get("repetition") or 0),
                    source=rec.get("source", ""), detail=rec.get("detail", ""),
                ))
        return cls(rows)


# ---------------------------------------------------------------- data access

def load_schemas(path=None):
    schemas = dict(SOURCE_SCHEMAS)
    if path:
        with open(path, encoding="utf-8") as fh:
            for source, spec in json.load(fh).items():
                schemas[source] = ColumnSchema.from_dict(spec)
    return schemas


def dataset_path(data_dir, source, name):
    """``<data_dir>/<source>/<name>.csv``, falling back to ``<data_dir>/<name>.csv``."""
    for candidate in (Path(data_dir) / source / f"{name}.csv", Path(data_dir) / f"{name}.csv"):
        if candidate.is_file():
            return candidate
    return None


def resolve_manifest(cfg) -> ExperimentManifest:
    if isinstance(cfg.manifest, ExperimentManifest):
        return cfg.manifest
    if cfg.manifest is None:
        return default_manifest()
    if not Path(cfg.manifest).is_file():
        raise ConfigError(f"--manifest: file not found: {cfg.manifest}")
    return load_manifest(cfg.manifest)


def load_corpus(manifest, data_dir, schemas=None) -> dict:
    """Load every dataset the manifest names; all files are checked before any is read."""
    schemas = schemas or SOURCE_SCHEMAS
    paths, missing = {}, []
    for name, source in manifest.dataset_names.items():
        p = dataset_path(data_dir, source, name)
        if p is None:
            missing.append(f"{source}/{name}.csv")
        paths[name] = (p, source)
    if missing:
        raise FileNotFoundError(
            f"{len(missing)} dataset file(s) not found under {data_dir}: {', '.join(missing[:5])}"
            + (" ..." if len(missing) > 5 else "")
        )
    out = {}
    for name, (p, source) in paths.items():
        out[name] = load_dataset(p, schemas.get(source, ColumnSchema()), name=name, source_tag=source)
    return out


# ---------------------------------------------------------------- experiment matrix

def cell_seed(master, pair, learner, repetition):
    return derive_seed(master, pair, learner, repetition)


def _error_rows(pair, learner, strategies, zetas, rep, reason):
    rows = []
    for s in strategies:
        for z in (zetas if s == "ea_z" else (None,)):
            rows.append(ResultRow(pair.tag, learner, s, z, math.nan, math.nan, math.nan, "error",
                                  rep, pair.source, reason))
    return rows


def run_cell(cfg, pair, learner, rep, train_d, test_d):
    """Train one learner on one pair and evaluate every configured strategy."""
    strategies, zetas = cfg.strategies, cfg.zetas
    try:
        train_p = preprocess(train_d, cfg.log_transform, cfg.drop_zero_effort)
        test_p = preprocess(test_d, cfg.log_transform, cfg.drop_zero_effort)
        needs_model = any(s != "manual_up" for s in strategies)
        probs = None
        if needs_model:
            model = L.train(cfg.learner_spec(learner), train_p, cell_seed(cfg.seed, pair.tag, learner, rep))
            probs = L.predict_proba(model, test_p)
    except (ValueError, ArithmeticError, OSError) as exc:
        log.warning("cell %s / %s / rep %d failed: %s", pair.tag, learner, rep, exc)
        return _error_rows(pair, learner, strategies, zetas, rep, f"{type(exc).__name__}: {exc}")

    rows = []
    for s in strategies:
        for z in (zetas if s == "ea_z" else (None,)):
            try:
                scored = score(s, probs, test_p.effort, zeta=z or cfg.zeta, threshold=cfg.threshold)
                res = evaluate(rank(scored), test_p.defective, test_p.effort, cfg.budget)
                rows.append(ResultRow(pair.tag, learner, s, z, res.recall20, res.popt, float(res.ifa),
                                      "ok", rep, pair.source))
            except (UndefinedMetricError, ValueError) as exc:
                rows.append(ResultRow(pair.tag, learner, s, z, math.nan, math.nan, math.nan, "error",
                                      rep, pair.source, f"{type(exc).__name__}: {exc}"))
    return rows


def _run_task(args):
    return run_cell(*args)


def run_experiment(cfg: RunConfig, datasets=None) -> ResultTable:
    """Run the full matrix. ``datasets`` (name -> Dataset) bypasses file loading.

    Failures inside a cell become ``status=error`` rows; a dataset that cannot
    be resolved aborts the run before any training.
    """
    manifest = resolve_manifest(cfg)
    if datasets is None:
        datasets = load_corpus(manifest, cfg.data_dir, load_schemas(cfg.schema))
    else:
        missing = [n for n in manifest.dataset_names if n not in datasets]
        if missing:
            raise FileNotFoundError(f"datasets not provided: {', '.join(missing)}")
    tasks = [
        (cfg, pair, learner, rep, datasets[pair.train], datasets[pair.test])
        for pair in manifest for learner in cfg.learners for rep in range(cfg.repetitions)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return ResultTable([row for chunk in chunks for row in chunk])


def sweep_zeta(cfg: RunConfig, grid=None, datasets=None) -> ResultTable:
    """EA-Z once per zeta of the grid; every other strategy once."""
    grid = grid if grid is not None else (cfg.zeta_grid or DEFAULT_SWEEP)
    return run_experiment(replace(cfg, zeta_grid=tuple(grid)), datasets)


# ---------------------------------------------------------------- synthetic data

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic train/test pair.

    ``loc_skew`` is the population skewness of the log-normal effort
    distribution; ``noise`` is the standard deviation of the noise that blurs
    each feature's view of the latent defect-proneness.
    """

    n: int = 300
    defect_rate: float = 0.2
    loc_skew: float = 10.0
    noise: float = 1.0
    seed: int = 0
    n_features: int = 6
    size_effect: float = 0.6
    median_loc: float = 60.0


def lognormal_sigma(skew):
    """Shape parameter of the log-normal distribution with the given skewness."""
    if skew <= 0:
        raise ValueError("loc_skew must be positive")

    def f(s):
        e = math.exp(s * s)
        return (e + 2.0) * math.sqrt(e - 1.0) - skew

    return brentq(f, 1e-6, 10.0)


def _synthetic_dataset(spec, name, rng, sigma):
    n = spec.n
    z_loc = rng.standard_normal(n)
    loc = np.maximum(1.0, np.round(spec.median_loc * np.exp(sigma * z_loc)))
    proneness = rng.standard_normal(n)
    base = spec.size_effect * (np.log(loc) - np.log(spec.median_loc)) / max(sigma, 1e-9) + 1.5 * proneness
    shift = brentq(lambda a: expit(base + a).mean() - spec.defect_rate, -50.0, 50.0)
    bug = rng.random(n) < expit(base + shift)
    if bug.all() or not bug.any():
        bug[np.argsort(base)[-1]] = True
        bug[np.argsort(base)[0]] = False
    cols = [loc]
    names = ["loc"]
    for j in range(1, spec.n_features):
        weight = 1.0 / j
        signal = weight * proneness + spec.noise * rng.standard_normal(n)
        if j % 3 == 0:
            signal = signal + 0.5 * np.log(loc / spec.median_loc)
        cols.append(np.round(np.exp(1.0 + 0.6 * signal), 3))
        names.append(f"m{j}")
    return Dataset(
        name=name, feature_names=tuple(names), X=np.column_stack(cols), effort=loc,
        defective=bug, ids=[f"{name}:{i}" for i in range(n)], source_tag="SYNTH",
    )


def generate_synthetic_pair(spec: SyntheticSpec, name=None):
    """(train, test) datasets drawn independently from one synthetic project model."""
    if spec.n < 20:
        raise ValueError("synthetic datasets need n >= 20")
    if not 0.0 < spec.defect_rate <= 0.5:
        raise ValueError("defect_rate must lie in (0, 0.5]")
    sigma = lognormal_sigma(spec.loc_skew)
    name = name or f"synth-{spec.seed}"
    seq = np.random.SeedSequence(int(spec.seed) & ((1 << 64) - 1))
    train_rng, test_rng = (np.random.default_rng(s) for s in seq.spawn(2))
    return (
        _synthetic_dataset(spec, f"{name}-train", train_rng, sigma),
        _synthetic_dataset(spec, f"{name}-test", test_rng, sigma),
    )


def synthetic_benchmark(n_pairs=30, seed=0, skew_range=(2.0, 50.0), **spec_kwargs):
    """Manifest plus datasets for ``n_pairs`` synthetic pairs with log-spaced skewness."""
    skews = np.geomspace(skew_range[0], skew_range[1], n_pairs) if n_pairs > 1 else [skew_range[0]]
    datasets, pairs = {}, []
    for i, skew in enumerate(skews):
        spec = SyntheticSpec(loc_skew=float(skew), seed=derive_seed(seed, "synthetic", i), **spec_kwargs)
        train, test = generate_synthetic_pair(spec, name=f"synth{i:02d}")
        datasets[train.name] = train
        datasets[test.name] = test
        pairs.append(ManifestPair(train.name, test.name, "SYNTH"))
    return ExperimentManifest(tuple(pairs)), datasets


def write_synthetic_benchmark(out_dir, manifest, datasets):
    out = Path(out_dir)
    (out / "SYNTH").mkdir(parents=True, exist_ok=True)
    for name, d in datasets.items():
        write_synthetic_dataset(d, out / "SYNTH" / f"{name}.csv")
    write_manifest(manifest, out / "manifest.txt")
    return out / "manifest.txt"


def write_synthetic_dataset(d, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *d.feature_names, "bug"])
        for i in range(len(d)):
            w.writerow([d.ids[i], *(_fmt(float(v)) for v in d.X[i]), int(d.defective[i])])


# ---------------------------------------------------------------- summaries

def reference_values():
    text = resources.files("effortrank.data").joinpath("reference_values.json").read_text("utf-8")
    return json.loads(text)


def _cell_values(rt, strategy, indicator, zeta=None, learner=None):
    """{(pair, learner): value averaged over repetitions} for ok rows."""
    acc = {}
    for r in rt:
        if r.strategy != strategy or not r.ok:
            continue
        if strategy == "ea_z" and zeta is not None and r.zeta is not None and abs(r.zeta - zeta) > 1e-15:
            continue
        if learner is not None and r.learner != learner:
            continue
        acc.setdefault((r.pair, r.learner), []).append(getattr(r, indicator))
    return {k: float(np.mean(v)) for k, v in acc.items()}


def _paired(x, y):
    keys = sorted(set(x) & set(y))
    return keys, np.array([x[k] for k in keys]), np.array([y[k] for k in keys])


@dataclass
class Summary:
    strategies: tuple
    learners: tuple
    zeta: float | None
    means: dict = field(default_factory=dict)
    learner_means: dict = field(default_factory=dict)
    zeta_means: dict = field(default_factory=dict)
    comparisons: dict = field(default_factory=dict)
    sk: dict = field(default_factory=dict)
    sk_methods: tuple = ()
    tradeoff: list = field(default_factory=list)
    ifa_at_most_10: dict = field(default_factory=dict)
    n_rows: int = 0
    n_errored: int = 0


def _default_zeta(rt):
    zetas = sorted({r.zeta for r in rt if r.strategy == "ea_z" and r.zeta is not None})
    if not zetas:
        return None
    return DEFAULT_ZETA if any(abs(z - DEFAULT_ZETA) < 1e-15 for z in zetas) else zetas[0]


def _method_values(rt, method, indicator, zeta):
    """Per-pair values for an SK method tag ``strategy`` or ``strategy/learner``."""
    strategy, _, learner = method.partition("/")
    cells = _cell_values(rt, strategy, indicator, zeta, learner or None)
    if not learner:
        # learner-independent baseline: one value per pair
        first = {}
        for (pair, lrn), v in sorted(cells.items()):
            first.setdefault(pair, v)
        return first
    return {pair: v for (pair, _), v in cells.items()}


def summarize(rt: ResultTable, zeta=None, fdr_method="bh", epsilon=0.0,
              alternative="two-sided") -> Summary:
    """Means, EA-Z-vs-rival comparisons, Scott-Knott ESD groups and the trade-off table."""
    if not len(rt):
        raise ValueError("empty result table")
    zeta = zeta if zeta is not None else _default_zeta(rt)
    strategies = tuple(s for s in STRATEGIES if any(r.strategy == s for r in rt))
    learners = tuple(dict.fromkeys(r.learner for r in rt))
    out = Summary(strategies, learners, zeta, n_rows=len(rt), n_errored=len(rt.errored))

    for ind in INDICATORS:
        out.means[ind] = {}
        for s in strategies:
            vals = list(_cell_values(rt, s, ind, zeta).values())
            out.means[ind][s] = float(np.mean(vals)) if vals else math.nan
        out.learner_means[ind] = {
            (lrn, s): float(np.mean(list(v.values())))
            for lrn in learners for s in strategies
            if (v := _cell_values(rt, s, ind, zeta, lrn))
        }
        zetas = sorted({r.zeta for r in rt if r.strategy == "ea_z" and r.zeta is not None})
        out.zeta_means[ind] = {
            z: float(np.mean(list(_cell_values(rt, "ea_z", ind, z).values()))) for z in zetas
            if _cell_values(rt, "ea_z", ind, z)
        }

    if "ea_z" in strategies:
        ea = {ind: _cell_values(rt, "ea_z", ind, zeta) for ind in INDICATORS}
        for ind in INDICATORS:
            records = []
            for rival in strategies:
                if rival in ("ea_z", "manual_up"):
                    continue
                keys, a, b = _paired(ea[ind], _cell_values(rt, rival, ind, zeta))
                if not keys:
                    continue
                records.append(S.compare(a, b, "ea_z", rival, higher_is_better=HIGHER_IS_BETTER[ind],
                                         epsilon=epsilon, alternative=alternative, indicator=ind))
            out.comparisons[ind] = S.adjust_records(records, fdr_method)
        for s in strategies:
            vals = np.array(list(_cell_values(rt, s, "ifa", zeta).values()))
            if vals.size:
                out.ifa_at_most_10[s] = float(np.mean(vals <= 10))

    methods = [f"ea_z/{lrn}" for lrn in learners] if "ea_z" in strategies else []
    if "manual_up" in strategies:
        methods.append("manual_up")
    if "cbs_plus" in strategies:
        methods += [f"cbs_plus/{lrn}" for lrn in ("lr", "rf") if lrn in learners]
    out.sk_methods = tuple(methods)
    if methods:
        for ind in INDICATORS:
            per = {m: _method_values(rt, m, ind, zeta) for m in methods}
            common = sorted(set.intersection(*(set(v) for v in per.values())))
            if common:
                out.sk[ind] = S.scott_knott_esd({m: [per[m][p] for p in common] for m in methods})
        if "manual_up" in methods:
            base_r = _method_values(rt, "manual_up", "recall20", zeta)
            for m in methods:
                rec = _method_values(rt, m, "recall20", zeta)
                ifa_v = _method_values(rt, m, "ifa", zeta)
                keys, a, b = _paired(rec, base_r)
                out.tradeoff.append({
                    "method": m,
                    "recall20": float(np.mean(list(rec.values()))) if rec else math.nan,
                    "wdl_vs_manual_up": S.wdl(a, b, epsilon) if m != "manual_up" else None,
                    "ifa": float(np.mean(list(ifa_v.values()))) if ifa_v else math.nan,
                })
    return out


def _num(v, digits=3):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "n/a"
    return f"{v:.{digits}f}"


def _p(v):
    if v is None or math.isnan(v):
        return "n/a"
    return "<0.001" if v < 0.001 else f"{v:.3f}"


def _table(header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    line = lambda cells: "  ".join(str(c).rjust(w) for c, w in zip(cells, widths))
    return "\n".join([line(header), line(["-" * w for w in widths]), *map(line, rows)])


def format_summary(summary: Summary, show_reference=True) -> str:
    ref = reference_values() if show_reference else None
    titles = {"recall20": "Average Recall@20% and comparison", "popt": "Average Popt and comparison",
              "ifa": "Average IFA and comparison"}
    order = [s for s in ("ea_z", "prob", "label_loc", "cbs_plus", "prob_loc", "manual_up")
             if s in summary.strategies]
    parts = [f"rows: {summary.n_rows}  errored: {summary.n_errored}  "
             f"learners: {', '.join(summary.learners)}"
             + (f"  zeta: {summary.zeta:g}" if summary.zeta is not None else "")]
    for ind in INDICATORS:
        header = ["Method", *(DISPLAY_NAMES[s] for s in order)]
        rows = [["Average", *(_num(summary.means[ind].get(s), 3) for s in order)]]
        if ref:
            published = ref["strategy_averages"][ind]
            rows.append(["Published average", *(_num(published.get(s), 3) if s in published else "-" for s in order)])
        recs = {r.method_b: r for r in summary.comparisons.get(ind, [])}
        if recs:
            rows.append(["W/D/L", *("/".join(map(str, recs[s].wdl)) if s in recs else "-" for s in order)])
            if ref:
                pw = ref["ea_z_wdl"][ind]
                rows.append(["Published W/D/L", *("/".join(map(str, pw[s])) if s in pw else "-" for s in order)])
            rows.append(["P-value (FDR)", *(_p(recs[s].p_adjusted) if s in recs else "-" for s in order)])
            rows.append(["Effect size", *(_num(recs[s].effect_r) if s in recs else "-" for s in order)])
            rows.append(["Interpretation", *((recs[s].interpretation or "n/a") if s in recs else "-"
                                             for s in order)])
        parts.append(f"\n{titles[ind]}\n" + _table(header, rows))
    if summary.ifa_at_most_10:
        parts.append("\nShare of rankings with IFA <= 10: " + ", ".join(
            f"{DISPLAY_NAMES[s]} {summary.ifa_at_most_10[s]:.1%}" for s in order if s in summary.ifa_at_most_10
        ) + (f"  (published, EA-Z: {ref['ea_z_ifa_at_most_10']:.1%})" if ref else ""))
    if len(summary.zeta_means.get("recall20", {})) > 1:
        rows = [[f"{z:g}", *(_num(summary.zeta_means[ind].get(z)) for ind in INDICATORS)]
                for z in summary.zeta_means["recall20"]]
        parts.append("\nEA-Z by zeta\n" + _table(["zeta", "Recall@20%", "Popt", "IFA"], rows))
    for ind in INDICATORS:
        g = summary.sk.get(ind)
        if g is None:
            continue
        rows = [[m, _num(g.means[m]), g.groups[m]] for m in g.order]
        parts.append(f"\nScott-Knott ESD groups ({ind}, sorted by mean, descending)\n"
                     + _table(["method", "mean", "group"], rows))
    if summary.tradeoff:
        rows = [[t["method"], _num(t["recall20"]),
                 "-" if t["wdl_vs_manual_up"] is None else "/".join(map(str, t["wdl_vs_manual_up"])),
                 _num(t["ifa"])] for t in summary.tradeoff]
        parts.append("\nTrade-off between Recall@20% and IFA (W/D/L on Recall@20% vs ManualUp)\n"
                     + _table(["method", "Recall20", "WDL", "IFA"], rows))
    return "\n".join(parts) + "\n"


def write_summary(summary: Summary, rt: ResultTable, out_dir, show_reference=True):
    """Human-readable summary plus machine-readable CSVs and box-plot feeds."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.txt").write_text(format_summary(summary, show_reference), encoding="utf-8")

    def write_csv(name, header, rows):
        with open(out / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([[_fmt(c) for c in r] for r in rows])

    write_csv("means_by_strategy.csv", ["strategy", *INDICATORS],
              [[s, *(summary.means[i][s] for i in INDICATORS)] for s in summary.strategies])
    write_csv("means_by_learner.csv", ["learner", "strategy", *INDICATORS],
              [[lrn, s, *(summary.learner_means[i].get((lrn, s), math.nan) for i in INDICATORS)]
               for lrn in summary.learners for s in summary.strategies])
    comp_rows = []
    for ind in INDICATORS:
        for r in summary.comparisons.get(ind, []):
            comp_rows.append([ind, r.method_a, r.method_b, r.n, *r.wdl, r.w_statistic, r.z_value,
                              r.p_value, r.p_adjusted, r.effect_r, r.interpretation, r.note])
    write_csv("comparisons.csv", ["indicator", "method_a", "method_b", "n", "wins", "draws", "losses",
                                  "w", "z", "p", "p_adjusted", "effect_r", "interpretation", "note"],
              comp_rows)
    write_csv("sk_esd.csv", ["indicator", "method", "mean", "group"],
              [[ind, m, g.means[m], g.groups[m]] for ind, g in summary.sk.items() for m in g.order])
    if summary.tradeoff:
        write_csv("tradeoff.csv", ["method", "recall20", "wins", "draws", "losses", "ifa"],
                  [[t["method"], t["recall20"], *(t["wdl_vs_manual_up"] or ("", "", "")), t["ifa"]]
                   for t in summary.tradeoff])
    box = out / "boxplot"
    box.mkdir(exist_ok=True)
    sources = sorted({r.source for r in rt})
    for ind in INDICATORS:
        for src in sources:
            rows = [[r.pair, r.learner, r.strategy, r.zeta, getattr(r, ind)]
                    for r in rt if r.ok and r.source == src]
            with open(box / f"{ind}_{src or 'all'}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["pair", "learner", "strategy", "zeta", ind])
                w.writerows([[_fmt(c) for c in row] for row in rows])


def write_run(cfg: RunConfig, rt: ResultTable, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    rt.write(out / "results.csv")
    summary = summarize(rt)
    write_summary(summary, rt, out)
    return summary
