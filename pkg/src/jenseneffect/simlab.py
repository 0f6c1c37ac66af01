"""Simulation scenarios and the replication harness.

Each catalog entry fixes a family and a composite mean curve m(s) for the
index s = X beta. Generators draw X uniformly on the configured range and
produce responses from the family's noise model; the harness runs full
fit-path + test pipelines over seeded replicates and tabulates rejection
rates next to the true Jensen effect of the curve.
"""

from __future__ import annotations

import csv
import io
import math
import warnings as _warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InfeasibleScenarioError, NumericalError
from .jensen import (
    alternative_null_test,
    default_direction,
    jensen_test,
    linear_logistic_reference,
)
from .model import Dataset, ModelSpec, fit_path

__all__ = [
    "ScenarioConfig",
    "PowerRow",
    "PowerTable",
    "CATALOG",
    "catalog_names",
    "gen_dataset",
    "true_delta",
    "power_study",
    "POWER_CSV_HEADER",
]

POWER_CSV_HEADER = "scenario,n,param,rejection_rate,true_delta,replicates"


def _logistic_plateau(s, a):
    return 30.0 / (1.0 + np.exp(-s / a)) - 15.0


def _shifted_exp_decay(s, a):
    # probability curve decreasing from 1 at s=0 to 1/2; constant 1/2 at a=inf
    s = np.asarray(s, dtype=float)
    if math.isinf(a):
        return np.full(s.shape, 0.5)
    return (np.exp(-a * s) - np.exp(-a)) / (2.0 * (1.0 - np.exp(-a))) + 0.5


@dataclass(frozen=True)
class _CatalogEntry:
    family: str
    curve: callable
    default_range: tuple[float, float]
    param_name: str
    default_param: float
    default_direction: str


CATALOG = {
    "gauss-exp": _CatalogEntry(
        "gaussian_log", lambda s, p: np.exp(s), (0.0, 0.5), "sigma", 0.01, "test_negative"
    ),
    "gauss-sqrt": _CatalogEntry(
        "gaussian_log", lambda s, p: np.sqrt(s), (0.0, 0.5), "sigma", 0.01, "test_negative"
    ),
    "gauss-sin": _CatalogEntry(
        "gaussian_log", lambda s, p: np.sin(s), (0.0, 0.5), "sigma", 0.01, "test_negative"
    ),
    "gauss-linear": _CatalogEntry(
        "gaussian_log", lambda s, p: np.asarray(s, dtype=float), (0.0, 0.5), "sigma", 0.01,
        "test_negative",
    ),
    "pois-exp": _CatalogEntry(
        "poisson", lambda s, a: np.exp(s / a), (0.0, 20.0), "a", 8.0, "test_negative"
    ),
    "pois-logistic": _CatalogEntry(
        "poisson", _logistic_plateau, (0.0, 20.0), "a", 8.0, "test_negative"
    ),
    "pois-linear": _CatalogEntry(
        "poisson", lambda s, a: a * np.asarray(s, dtype=float), (0.0, 20.0), "a", 1.0,
        "test_negative",
    ),
    "logit-convex": _CatalogEntry(
        "bernoulli_logit", _shifted_exp_decay, (0.0, 0.5), "a", 8.0, "test_positive"
    ),
    "logit-linear": _CatalogEntry(
        "bernoulli_logit", lambda s, a: expit(-1.0 + a * np.asarray(s, dtype=float)),
        (0.0, 0.5), "a", 2.0, "test_vs_linear_logistic",
    ),
}


def catalog_names() -> tuple[str, ...]:
    return tuple(sorted(CATALOG))


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation cell: a catalog member plus its free knobs."""

    scenario: str
    n: int
    param: float | None = None
    n_replicates: int = 50
    seed: int = 0
    p: int = 5
    covariate_range: tuple[float, float] | None = None
    beta_true: np.ndarray | None = None
    direction: str | None = None

    def __post_init__(self) -> None:
        if self.scenario not in CATALOG:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; catalog: {', '.join(catalog_names())}"
            )
        if self.n <= 0:
            raise ValueError("n must be positive")
        if self.n_replicates <= 0:
            raise ValueError("n_replicates must be positive")
        if self.p <= 0:
            raise ValueError("p must be positive")
        entry = CATALOG[self.scenario]
        if self.param is not None:
            if not self.param > 0:
                raise ValueError(f"{entry.param_name} must be positive")
            if math.isinf(self.param) and self.scenario != "logit-convex":
                raise ValueError(f"{entry.param_name} must be finite")
        lo, hi = self.range_
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("covariate_range must be a finite increasing interval")
        if entry.family == "gaussian_log" and lo < 0:
            raise ValueError("gaussian_log covariates must be nonnegative")
        beta = self.beta_
        if beta.shape != (self.p,):
            raise ValueError("beta_true must have length p")
        if abs(np.linalg.norm(beta) - 1.0) > 1e-8:
            raise ValueError("beta_true must have unit norm")

    @property
    def family(self) -> str:
        return CATALOG[self.scenario].family

    @property
    def param_(self) -> float:
        entry = CATALOG[self.scenario]
        return entry.default_param if self.param is None else float(self.param)

    @property
    def range_(self) -> tuple[float, float]:
        if self.covariate_range is not None:
            return (float(self.covariate_range[0]), float(self.covariate_range[1]))
        return CATALOG[self.scenario].default_range

    @property
    def beta_(self) -> np.ndarray:
        if self.beta_true is not None:
            return np.asarray(self.beta_true, dtype=float)
        return np.full(self.p, 1.0 / math.sqrt(self.p))

    @property
    def direction_(self) -> str:
        return self.direction or CATALOG[self.scenario].default_direction


@dataclass(frozen=True)
class PowerRow:
    scenario: str
    n: int
    param: float
    rejection_rate: float
    true_delta: float
    replicates: int
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class PowerTable:
    rows: tuple[PowerRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(POWER_CSV_HEADER + "\n")
        for r in self.rows:
            # repr() is the shortest exact round-trip form, so 0.03 stays "0.03"
            buf.write(
                f"{r.scenario},{r.n},{r.param!r},{r.rejection_rate!r},"
                f"{r.true_delta!r},{r.replicates}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PowerTable":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != POWER_CSV_HEADER.split(","):
            raise ValueError("unexpected power-table header")
        rows = tuple(
            PowerRow(
                scenario=rec["scenario"],
                n=int(rec["n"]),
                param=float(rec["param"]),
                rejection_rate=float(rec["rejection_rate"]),
                true_delta=float(rec["true_delta"]),
                replicates=int(rec["replicates"]),
            )
            for rec in reader
        )
        return cls(rows=rows)


def _curve_values(config: ScenarioConfig, s: np.ndarray) -> np.ndarray:
    entry = CATALOG[config.scenario]
    means = np.asarray(entry.curve(s, config.param_), dtype=float)
    if entry.family in ("gaussian_log", "poisson"):
        bad = ~(means > 0.0)
    else:
        bad = ~((means > 0.0) & (means < 1.0))
    if np.any(bad):
        k = int(np.argmax(bad))
        raise InfeasibleScenarioError(
            f"scenario {config.scenario!r}: mean {means[k]:.6g} at index s={s[k]:.6g} "
            "is outside the family's mean space"
        )
    return means


def gen_dataset(config: ScenarioConfig, replicate: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw one replicate. Deterministic in (config.seed, replicate)."""
    rng = np.random.default_rng([config.seed, int(replicate)])
    lo, hi = config.range_
    X = rng.uniform(lo, hi, size=(config.n, config.p))
    s = X @ config.beta_
    means = _curve_values(config, s)
    family = config.family
    if family == "gaussian_log":
        y = means * np.exp(config.param_ * rng.standard_normal(config.n))
    elif family == "poisson":
        y = rng.poisson(means).astype(float)
    else:
        y = rng.binomial(1, means).astype(float)
    return X, y


def true_delta(config: ScenarioConfig, n_draw: int = 200_000) -> float:
    """Jensen effect of the composite curve under a fresh covariate draw."""
    rng = np.random.default_rng([config.seed, 340282366])
    lo, hi = config.range_
    X = rng.uniform(lo, hi, size=(n_draw, config.p))
    s = X @ config.beta_
    means = _curve_values(config, s)
    center = _curve_values(config, np.array([np.mean(s)]))[0]
    return float(np.mean(means) - center)


def _test_seed(config: ScenarioConfig, replicate: int) -> int:
    ss = np.random.SeedSequence([config.seed, int(replicate), 1])
    return int(ss.generate_state(1)[0])


def _run_replicate(config: ScenarioConfig, replicate: int, alpha: float, n_sims: int) -> bool:
    X, y = gen_dataset(config, replicate)
    spec = ModelSpec(family=config.family, p=config.p)
    data = Dataset(y=y, X=X)
    path = fit_path(spec, data)
    seed = _test_seed(config, replicate)
    direction = config.direction_
    if direction == "test_vs_linear_logistic":
        ref = linear_logistic_reference(data, path)
        res = alternative_null_test(path, ref, alpha=alpha, seed=seed, n_sims=n_sims)
    else:
        res = jensen_test(path, direction=direction, alpha=alpha, seed=seed, n_sims=n_sims)
    return bool(res.reject)


def power_study(
    configs: list[ScenarioConfig],
    alpha: float = 0.05,
    n_sims: int = 5000,
    threads: int = 1,
) -> PowerTable:
    """Run every configured cell and tabulate rejection frequencies.

    Replicates are independent and seeded individually, so the table does not
    depend on thread count or completion order. Failed replicates are recorded
    on the row (and warned about), never silently dropped.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 0.5]")
    if threads < 1:
        raise ValueError("threads must be positive")
    rows = []
    for config in configs:
        outcomes: list[bool | None] = [None] * config.n_replicates
        failures: list[str] = []

        def run_one(r: int, config=config):
            return r, _run_replicate(config, r, alpha, n_sims)

        results = []
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(run_one, r) for r in range(config.n_replicates)]
                for fut in futures:
                    try:
                        results.append(fut.result())
                    except (NumericalError, ValueError) as exc:
                        results.append(exc)
        else:
            for r in range(config.n_replicates):
                try:
                    results.append(run_one(r))
                except (NumericalError, ValueError) as exc:
                    results.append(exc)
        for item in results:
            if isinstance(item, tuple):
                r, rejected = item
                outcomes[r] = rejected
            else:
                failures.append(str(item))
        successes = [o for o in outcomes if o is not None]
        if failures:
            _warnings.warn(
                f"scenario {config.scenario!r}: {len(failures)} of "
                f"{config.n_replicates} replicates failed",
                RuntimeWarning,
                stacklevel=2,
            )
        if not successes:
            raise NumericalError(
                f"scenario {config.scenario!r}: every replicate failed"
            )
        rows.append(
            PowerRow(
                scenario=config.scenario,
                n=config.n,
                param=config.param_,
                rejection_rate=float(np.mean(successes)),
                true_delta=true_delta(config),
                replicates=len(successes),
                failures=tuple(failures),
            )
        )
    return PowerTable(rows=tuple(rows))
