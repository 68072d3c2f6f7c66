"""Evaluation layer: datasets, empirical error measurement, method sweeps.

Displacements for the max-error estimate are drawn with direction uniform
on the sphere and radius uniform on [0, M]; the same (direction, fraction)
draws are reused across diameters for a fixed seed, so sample sets are
nested scalings and the estimate is reproducible per seed.  The desk-scale
default is 1e5 samples (the full-scale 1e6 is one flag away).
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, CsvParseError
from .featuremaps import (
    AnovaFeatureMap,
    FeatureMap,
    grid_feature_map,
    qmc_halton,
    rff,
    subsampled_feature_map,
)
from .grids import dense_grid, sparse_grid, subsample_dense_grid
from .kernels import AnovaKernel, GaussianKernel, kernel_values
from .solvers import bisect_lambda, construct_poly_exact, reweight

REPORT_HEADER = "method,d,D,gamma,M,max_err,rms_err,n_eval,seed,build_ms,embed_ms"

CLI_METHODS = ("rff", "qmc", "dense", "sparse", "subsampled", "poly-exact",
               "reweighted")


@dataclass(frozen=True)
class ErrorReport:
    """One (method, D, M) measurement cell."""

    method: str
    d: int
    D: int
    gamma: float
    M: float
    max_err: float
    rms_err: float
    n_eval: int
    seed: int
    build_ms: int
    embed_ms: int

    def __post_init__(self):
        if self.max_err < 0 or self.rms_err < 0:
            raise ValueError("error measures must be non-negative")

    def csv_row(self) -> str:
        return ",".join([
            self.method, str(self.d), str(self.D), repr(self.gamma),
            repr(self.M), repr(self.max_err), repr(self.rms_err),
            str(self.n_eval), str(self.seed), str(self.build_ms),
            str(self.embed_ms),
        ])


@dataclass(frozen=True)
class Dataset:
    rows: np.ndarray
    source: str = ""
    normalization: Optional[dict] = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("dataset must be a non-empty (n, d) array")
        if not np.isfinite(rows).all():
            raise ValueError("dataset entries must be finite")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def load_csv(path: str) -> Dataset:
    """Comma-separated reals, one row per line; a non-numeric first row is
    treated as a header.  Ragged or non-numeric data raises CsvParseError
    with the offending 1-based line number."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise CsvParseError(
                    f"{path}: non-numeric cell at line {lineno}", line=lineno)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CsvParseError(
                    f"{path}: expected {width} columns at line {lineno}, "
                    f"got {len(values)}", line=lineno)
            rows.append(values)
    if not rows:
        raise CsvParseError(f"{path}: no data rows", line=1)
    return Dataset(np.array(rows), source=path)


def sample_pairs(ds: Dataset, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """n uniform-with-replacement row pairs with distinct row indices."""
    if ds.n < 2:
        raise ValueError("need at least 2 rows to sample pairs")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    i = rng.integers(0, ds.n, size=n)
    j = rng.integers(0, ds.n - 1, size=n)
    j = j + (j >= i)  # skip the diagonal, still uniform over the rest
    return ds.rows[i], ds.rows[j]


def displacement_sample(d: int, M: float, n: int, seed: int) -> np.ndarray:
    """n vectors with |u| <= M: uniform direction, radius fraction uniform."""
    if n < 1:
        raise ValueError("n must be positive")
    if M < 0:
        raise ValueError("M must be non-negative")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n, d))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    fractions = rng.uniform(size=(n, 1))
    return dirs / norms * fractions * M


def error_stats(fm, kernel, M: float, n: int, seed: int) -> tuple[float, float]:
    """(max, rms) of |k - k~| over one displacement sample set."""
    U = displacement_sample(fm.d, M, n, seed)
    diff = kernel_values(kernel, U) - fm.approx(U)
    return float(np.abs(diff).max()), float(np.sqrt(np.mean(diff**2)))


def max_error_empirical(fm, kernel, M: float, n: int, seed: int) -> float:
    """Empirical sup of |k - k~| over n displacements in the M-ball."""
    return error_stats(fm, kernel, M, n, seed)[0]


def rms_error(fm, kernel, pairs) -> float:
    """Root mean squared error of k~ against k over explicit pairs."""
    X = np.asarray(pairs[0], dtype=float)
    Y = np.asarray(pairs[1], dtype=float)
    if X.shape != Y.shape or X.shape[0] < 1:
        raise ValueError("pairs must be matching non-empty arrays")
    U = X - Y
    diff = kernel_values(kernel, U) - fm.approx(U)
    return float(np.sqrt(np.mean(diff**2)))


def synthetic_mixture(n: int, seed: int, d: int = 40, components: int = 4,
                      side: float = 2.0) -> Dataset:
    """Gaussian mixture with unit covariance and means on a simplex of the
    given side length (stand-in for licensed speech data at d = 40)."""
    if components > d:
        raise ValueError("need d >= components for the simplex embedding")
    rng = np.random.default_rng(seed)
    means = np.zeros((components, d))
    for i in range(components):
        means[i, i] = side / math.sqrt(2.0)
    labels = rng.integers(0, components, size=n)
    rows = means[labels] + rng.standard_normal((n, d))
    return Dataset(rows, source=f"synthetic_mixture(n={n}, seed={seed})")


@dataclass
class SweepConfig:
    """Validated sweep grid.  Cell order is methods x D x M x seeds."""

    methods: list[str]
    d: int
    gamma: float
    D: list[int]
    M: list[float]
    seeds: list[int]
    n_eval: int = 100_000
    L: int = 8
    level: int = 2
    degree: int = 2
    data: Optional[str] = None
    pairs: int = 500
    lam: Optional[float] = None
    target_D: Optional[int] = None

    _KEYS = ("methods", "d", "gamma", "D", "M", "seeds", "n_eval", "L",
             "level", "degree", "data", "pairs", "lam", "target_D")

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        for key in raw:
            if key not in cls._KEYS:
                raise ConfigError(f"unknown sweep config key {key!r}", key=key)
        for key in ("methods", "d", "gamma", "D", "M", "seeds"):
            if key not in raw:
                raise ConfigError(f"missing sweep config key {key!r}", key=key)
        cfg = cls(
            methods=[str(m) for m in raw["methods"]],
            d=int(raw["d"]),
            gamma=float(raw["gamma"]),
            D=[int(v) for v in raw["D"]],
            M=[float(v) for v in raw["M"]],
            seeds=[int(v) for v in raw["seeds"]],
        )
        for key in ("n_eval", "L", "level", "degree", "pairs"):
            if key in raw:
                setattr(cfg, key, int(raw[key]))
        if raw.get("data") is not None:
            cfg.data = str(raw["data"])
        if raw.get("lam") is not None:
            cfg.lam = float(raw["lam"])
        if raw.get("target_D") is not None:
            cfg.target_D = int(raw["target_D"])
        for m in cfg.methods:
            if m not in CLI_METHODS:
                raise ConfigError(f"unknown method {m!r}", key="methods")
        return cfg


def build_method_map(method: str, d: int, D: int, gamma: float, seed: int,
                     L: int = 8, level: int = 2, degree: int = 2,
                     data: Optional[Dataset] = None, pairs: int = 500,
                     lam: Optional[float] = None,
                     target_D: Optional[int] = None) -> FeatureMap:
    """Construct one feature map by CLI method name."""
    if method == "rff":
        return rff(d, D, gamma, seed)
    if method == "qmc":
        return qmc_halton(d, D, gamma)
    if method == "dense":
        return grid_feature_map(dense_grid(L, d), "dense", gamma)
    if method == "sparse":
        return grid_feature_map(sparse_grid(level, d), "sparse", gamma)
    if method == "subsampled":
        return subsampled_feature_map(L, d, D, gamma, seed)
    if method == "poly-exact":
        return grid_feature_map(construct_poly_exact(d, degree, D, seed),
                                "poly_exact", gamma)
    if method == "reweighted":
        if data is None:
            raise ConfigError("reweighted method needs a dataset", key="data")
        target = target_D if target_D is not None else D
        pool = subsample_dense_grid(L, d, 4 * target, seed)
        train = sample_pairs(data, pairs, seed)
        kernel = GaussianKernel(gamma)
        if lam is not None:
            grid = reweight(pool, train, kernel, lam)
        else:
            grid = bisect_lambda(pool, train, kernel, target).grid
        return grid_feature_map(grid, "reweighted", gamma)
    raise ConfigError(f"unknown method {method!r}", key="methods")


def build_anova_map(kernel: AnovaKernel, method: str, D_S: int, seed: int,
                    L: int = 8, level: int = 2, degree: int = 2,
                    data: Optional[Dataset] = None,
                    pairs: int = 500) -> AnovaFeatureMap:
    """Per-subset feature maps for an ANOVA kernel, one seed stream each.

    ``D_S`` is the per-subset feature count; the composite has
    sum over S of D_S quadrature points.  The reweighted method fits each
    sub-kernel on its own coordinates, reusing one shared draw of training
    pairs across subsets.
    """
    gamma = kernel.base.gamma
    base = GaussianKernel(gamma)
    train = sample_pairs(data, pairs, seed) if data is not None else None
    sub_maps = []
    for si, S in enumerate(kernel.subsets):
        sub_seed = seed * 100_003 + si
        dim = len(S)
        if method == "reweighted":
            if train is None:
                raise ConfigError("reweighted method needs a dataset", key="data")
            idx = np.array(S) - 1
            pool = subsample_dense_grid(L, dim, 4 * D_S, sub_seed)
            res = bisect_lambda(pool, (train[0][:, idx], train[1][:, idx]),
                                base, D_S)
            fm = grid_feature_map(res.grid, "reweighted", gamma)
        else:
            fm = build_method_map(method, dim, D_S, gamma, sub_seed,
                                  L=L, level=level, degree=degree)
        sub_maps.append((S, fm))
    return AnovaFeatureMap(tuple(sub_maps), kernel.d)


def sweep(config: SweepConfig | dict) -> list[ErrorReport]:
    """One ErrorReport per (method, D, M, seed) cell, in config order."""
    if isinstance(config, dict):
        config = SweepConfig.from_dict(config)
    data = load_csv(config.data) if config.data else None
    kernel = GaussianKernel(config.gamma)
    reports = []
    built: dict[tuple, tuple[FeatureMap, int]] = {}
    for method in config.methods:
        for D in config.D:
            for M in config.M:
                for seed in config.seeds:
                    key = (method, D, seed)
                    if key not in built:
                        t0 = time.perf_counter()
                        fm = build_method_map(
                            method, config.d, D, config.gamma, seed,
                            L=config.L, level=config.level,
                            degree=config.degree, data=data,
                            pairs=config.pairs, lam=config.lam,
                            target_D=config.target_D)
                        built[key] = (fm, round_ms(t0))
                    fm, build_ms = built[key]
                    t1 = time.perf_counter()
                    max_err, rms = error_stats(fm, kernel, M,
                                               config.n_eval, seed)
                    embed_ms = round_ms(t1)
                    reports.append(ErrorReport(
                        method=method, d=config.d, D=fm.count,
                        gamma=config.gamma, M=M, max_err=max_err,
                        rms_err=rms, n_eval=config.n_eval, seed=seed,
                        build_ms=build_ms, embed_ms=embed_ms))
    return reports


def round_ms(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000))


def reports_to_csv(reports: Sequence[ErrorReport]) -> str:
    lines = [REPORT_HEADER]
    lines.extend(r.csv_row() for r in reports)
    return "\n".join(lines) + "\n"


def write_reports(reports: Sequence[ErrorReport], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(reports_to_csv(reports))


def strip_timing_columns(csv_text: str) -> str:
    """Drop build_ms/embed_ms so determinism can be compared byte-for-byte."""
    out = io.StringIO()
    for row in csv.reader(io.StringIO(csv_text)):
        if row:
            print(",".join(row[:-2]), file=out)
    return out.getvalue()
