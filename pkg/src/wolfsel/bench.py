"""Pluggable optimizer harness for comparing feature selectors.

PSO and GA baselines share the grey wolf optimizer's contract: one seeded
stream per run, elitist best-so-far tracking, positions clamped to the
bounds, minimization, and a non-increasing best-fitness history. The
comparison harness runs each optimizer over several seeds on the same
train/val/test triple and tabulates accuracy, mask size, fitness, and
wall time.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import gwo as gwo_mod
from .classify import fit_classifier, predict
from .dataspace import LabeledFeatureSet, merge_rows
from .errors import DataError

OPTIMIZER_KINDS = ("gwo", "pso", "ga")
COMPARISON_COLUMNS = ("optimizer", "seed", "accuracy", "n_features",
                      "fitness", "wall_time_s")


@dataclass(frozen=True)
class PsoParams:
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5

    def __post_init__(self):
        if not (0.0 < self.inertia < 1.0):
            raise ValueError(f"inertia must lie in (0, 1), got {self.inertia}")
        if self.cognitive < 0.0 or self.social < 0.0:
            raise ValueError("acceleration coefficients must be non-negative")


@dataclass(frozen=True)
class GaParams:
    crossover_rate: float = 0.9
    mutation_rate: float | None = None   # None means 1/dim at run time
    tournament_size: int = 3

    def __post_init__(self):
        if not (0.0 <= self.crossover_rate <= 1.0):
            raise ValueError(f"crossover_rate must lie in [0, 1], got {self.crossover_rate}")
        if self.mutation_rate is not None and not (0.0 <= self.mutation_rate <= 1.0):
            raise ValueError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if self.tournament_size < 2:
            raise ValueError(f"tournament_size must be at least 2, got {self.tournament_size}")


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str
    n_agents: int = 30
    max_iter: int = 100
    seed: int = 0
    pso: PsoParams = field(default_factory=PsoParams)
    ga: GaParams = field(default_factory=GaParams)

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer {self.kind!r}, expected one of {OPTIMIZER_KINDS}")
        if self.n_agents < 3:
            raise ValueError(f"n_agents must be at least 3, got {self.n_agents}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def _run_pso(spec: OptimizerSpec, fitness_fn, dim: int,
             bounds: tuple[float, float], parallel: bool
             ) -> tuple[np.ndarray, float, list[float]]:
    low, high = bounds
    p = spec.pso
    rng = np.random.default_rng(spec.seed)
    n = spec.n_agents
    positions = low + (high - low) * rng.random((n, dim))
    velocities = np.zeros((n, dim))
    fitness = gwo_mod._evaluate(positions, fitness_fn, parallel)
    pbest = positions.copy()
    pbest_fit = fitness.copy()
    g = int(np.argmin(fitness))
    gbest = positions[g].copy()
    gbest_fit = float(fitness[g])
    history = []
    for _ in range(spec.max_iter):
        draws = rng.random((n, 2, dim))
        velocities = (p.inertia * velocities
                      + p.cognitive * draws[:, 0, :] * (pbest - positions)
                      + p.social * draws[:, 1, :] * (gbest[None, :] - positions))
        positions = np.clip(positions + velocities, low, high)
        fitness = gwo_mod._evaluate(positions, fitness_fn, parallel)
        improved = fitness < pbest_fit
        pbest[improved] = positions[improved]
        pbest_fit[improved] = fitness[improved]
        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest_fit = float(pbest_fit[g])
            gbest = pbest[g].copy()
        history.append(gbest_fit)
    return gbest, gbest_fit, history


def _run_ga(spec: OptimizerSpec, fitness_fn, dim: int,
            bounds: tuple[float, float], parallel: bool
            ) -> tuple[np.ndarray, float, list[float]]:
    low, high = bounds
    p = spec.ga
    mutation = p.mutation_rate if p.mutation_rate is not None else 1.0 / dim
    rng = np.random.default_rng(spec.seed)
    n = spec.n_agents
    population = low + (high - low) * rng.random((n, dim))
    fitness = gwo_mod._evaluate(population, fitness_fn, parallel)
    b = int(np.argmin(fitness))
    best = population[b].copy()
    best_fit = float(fitness[b])
    history = []
    for _ in range(spec.max_iter):
        entrants = rng.integers(0, n, size=(n, 2, p.tournament_size))
        cross_coin = rng.random(n)
        gene_coin = rng.random((n, dim))
        mut_coin = rng.random((n, dim))
        mut_value = low + (high - low) * rng.random((n, dim))
        parent_a = entrants[:, 0, :][np.arange(n), np.argmin(fitness[entrants[:, 0, :]], axis=1)]
        parent_b = entrants[:, 1, :][np.arange(n), np.argmin(fitness[entrants[:, 1, :]], axis=1)]
        offspring = population[parent_a].copy()
        cross = cross_coin < p.crossover_rate
        take_b = cross[:, None] & (gene_coin < 0.5)
        offspring[take_b] = population[parent_b][take_b]
        mutate = mut_coin < mutation
        offspring[mutate] = mut_value[mutate]
        offspring[0] = best  # elitist reinjection keeps the incumbent alive
        population = offspring
        fitness = gwo_mod._evaluate(population, fitness_fn, parallel)
        b = int(np.argmin(fitness))
        if fitness[b] < best_fit:
            best_fit = float(fitness[b])
            best = population[b].copy()
        history.append(best_fit)
    return best, best_fit, history


def run_optimizer(spec: OptimizerSpec, fitness_fn, dim: int,
                  bounds: tuple[float, float], parallel: bool = False
                  ) -> tuple[np.ndarray, float, list[float]]:
    """Dispatch to the named optimizer under the shared run contract."""
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if not (bounds[0] < bounds[1]):
        raise ValueError(f"bounds must satisfy low < high, got {bounds}")
    if spec.kind == "gwo":
        config = gwo_mod.GwoConfig(n_agents=spec.n_agents, max_iter=spec.max_iter,
                                   dim=dim, bounds=bounds, seed=spec.seed)
        return gwo_mod.optimize(config, fitness_fn, parallel=parallel)
    if spec.kind == "pso":
        return _run_pso(spec, fitness_fn, dim, bounds, parallel)
    return _run_ga(spec, fitness_fn, dim, bounds, parallel)


def select_with(spec: OptimizerSpec, train: LabeledFeatureSet,
                val: LabeledFeatureSet, clf,
                threshold: float = gwo_mod.DEFAULT_THRESHOLD,
                penalty: float = gwo_mod.DEFAULT_PENALTY,
                parallel: bool = False
                ) -> tuple[gwo_mod.FeatureMask, float, list[float]]:
    """Feature selection through any bench optimizer on the unit box."""
    if spec.kind == "gwo":
        config = gwo_mod.GwoConfig(n_agents=spec.n_agents, max_iter=spec.max_iter,
                                   dim=train.n_dims, seed=spec.seed)
        return gwo_mod.select_features(train, val, config, clf,
                                       threshold=threshold, penalty=penalty,
                                       parallel=parallel)
    cache: dict[tuple[int, ...], float] = {}

    def fn(position):
        mask = gwo_mod.binarize(position, threshold)
        value = cache.get(mask.selected)
        if value is None:
            value = gwo_mod.selection_fitness(mask, train, val, clf, penalty)
            cache[mask.selected] = value
        return value

    best_position, best_fitness, history = run_optimizer(
        spec, fn, train.n_dims, (0.0, 1.0), parallel=parallel)
    return gwo_mod.binarize(best_position, threshold), best_fitness, history


@dataclass
class ComparisonRow:
    optimizer: str
    seed: int
    accuracy: float
    n_features: int
    fitness: float
    wall_time_s: float
    error: str | None = None


@dataclass
class ComparisonAggregate:
    optimizer: str
    accuracy_mean: float
    accuracy_std: float
    n_features_mean: float
    n_features_std: float
    fitness_mean: float
    fitness_std: float
    wall_time_mean: float
    wall_time_std: float
    n_runs: int


def compare_selectors(specs: list[OptimizerSpec],
                      data: tuple[LabeledFeatureSet, LabeledFeatureSet, LabeledFeatureSet],
                      clf, n_seeds: int,
                      threshold: float = gwo_mod.DEFAULT_THRESHOLD,
                      penalty: float = gwo_mod.DEFAULT_PENALTY
                      ) -> tuple[list[ComparisonRow], list[ComparisonAggregate]]:
    """Run every optimizer for n_seeds seeds on the same split.

    Each run selects features on train/val, refits the classifier on
    train+val restricted to the mask, and reports test accuracy. A failed
    run keeps its row (with the error message) without stopping the rest.
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be positive, got {n_seeds}")
    train, val, test = data
    if len({train.n_dims, val.n_dims, test.n_dims}) != 1:
        raise DataError("train/val/test disagree on columns")
    rows = []
    for spec in specs:
        for offset in range(n_seeds):
            run_spec = replace(spec, seed=spec.seed + offset)
            start = time.perf_counter()
            try:
                mask, fitness, _ = select_with(run_spec, train, val, clf,
                                               threshold=threshold, penalty=penalty)
                cols = list(mask.selected)
                fitted = fit_classifier(clf, merge_rows([train, val]).select_columns(cols))
                pred, _ = predict(fitted, test.features[:, cols])
                accuracy = float(np.mean(pred == test.labels))
                rows.append(ComparisonRow(spec.kind, run_spec.seed, accuracy,
                                          mask.size, fitness,
                                          time.perf_counter() - start))
            except Exception as e:  # a broken run must not sink the table
                rows.append(ComparisonRow(spec.kind, run_spec.seed, float("nan"),
                                          0, float("nan"),
                                          time.perf_counter() - start,
                                          error=f"{type(e).__name__}: {e}"))
    rows.sort(key=lambda r: (r.optimizer, r.seed))
    aggregates = []
    for kind in sorted({r.optimizer for r in rows}):
        ok = [r for r in rows if r.optimizer == kind and r.error is None]
        if not ok:
            aggregates.append(ComparisonAggregate(kind, *([float("nan")] * 8), 0))
            continue
        acc = np.array([r.accuracy for r in ok])
        nf = np.array([r.n_features for r in ok], dtype=np.float64)
        fit = np.array([r.fitness for r in ok])
        wall = np.array([r.wall_time_s for r in ok])
        aggregates.append(ComparisonAggregate(
            kind,
            float(acc.mean()), float(acc.std()),
            float(nf.mean()), float(nf.std()),
            float(fit.mean()), float(fit.std()),
            float(wall.mean()), float(wall.std()),
            len(ok)))
    return rows, aggregates


def _pm(mean: float, std: float) -> str:
    return f"{mean:.6g}±{std:.6g}"


def comparison_table(rows: list[ComparisonRow],
                     aggregates: list[ComparisonAggregate]) -> list[dict]:
    """Rows plus one aggregate row per optimizer, under the fixed columns."""
    out = []
    for r in rows:
        out.append({"optimizer": r.optimizer, "seed": r.seed,
                    "accuracy": r.accuracy, "n_features": r.n_features,
                    "fitness": r.fitness, "wall_time_s": r.wall_time_s})
    for a in aggregates:
        out.append({"optimizer": a.optimizer, "seed": "aggregate",
                    "accuracy": _pm(a.accuracy_mean, a.accuracy_std),
                    "n_features": _pm(a.n_features_mean, a.n_features_std),
                    "fitness": _pm(a.fitness_mean, a.fitness_std),
                    "wall_time_s": _pm(a.wall_time_mean, a.wall_time_std)})
    return out


def comparison_csv(rows: list[ComparisonRow],
                   aggregates: list[ComparisonAggregate]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(COMPARISON_COLUMNS),
                            lineterminator="\n")
    writer.writeheader()
    for record in comparison_table(rows, aggregates):
        writer.writerow(record)
    return buf.getvalue()


def comparison_json(rows: list[ComparisonRow],
                    aggregates: list[ComparisonAggregate]) -> str:
    return json.dumps(comparison_table(rows, aggregates), indent=1) + "\n"


@dataclass(frozen=True)
class TestFunction:
    name: str
    fn: object
    optimum_value: float

    def optimum_position(self, dim: int) -> np.ndarray:
        if self.name == "rosenbrock":
            return np.ones(dim)
        return np.zeros(dim)


def _sphere(x: np.ndarray) -> float:
    return float(np.sum(x * x))


def _rastrigin(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def _rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


_TEST_FUNCTIONS = {
    "sphere": TestFunction("sphere", _sphere, 0.0),
    "rastrigin": TestFunction("rastrigin", _rastrigin, 0.0),
    "rosenbrock": TestFunction("rosenbrock", _rosenbrock, 0.0),
}


def test_functions(name: str) -> TestFunction:
    """Benchmark objective by name: sphere, rastrigin, or rosenbrock."""
    try:
        return _TEST_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}, "
                         f"expected one of {sorted(_TEST_FUNCTIONS)}") from None
