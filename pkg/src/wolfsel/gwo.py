"""Grey wolf optimization and its thresholded feature-selection wrapper.

The continuous search follows Mirjalili, Mirjalili & Lewis (2014): the
three best solutions found so far (alpha, beta, delta) pull every agent,
with coefficient vectors A = 2*a*r1 - a and C = 2*r2 drawn fresh per agent
per leader, and the control scalar a decaying linearly from 2 to 0. All
randomness comes from one seeded generator consumed in a fixed order
(agent-major, leader-major, dimension-major), so runs are reproducible
even when fitness evaluation is parallelized.

Feature selection binarizes positions on a (0, 1) box at a threshold and
scores masks with a classifier trained on the candidate columns plus a
cardinality penalty; minimization throughout.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .classify import fit_classifier, predict
from .dataspace import LabeledFeatureSet
from .errors import DataError, NumericalError

DEFAULT_THRESHOLD = 0.5
DEFAULT_PENALTY = 0.01


@dataclass(frozen=True)
class GwoConfig:
    n_agents: int
    max_iter: int
    dim: int
    bounds: tuple[float, float] = (0.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 3:
            raise ValueError(f"need at least 3 agents for 3 leaders, got {self.n_agents}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        low, high = self.bounds
        if not (low < high):
            raise ValueError(f"bounds must satisfy low < high, got {self.bounds}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class _Champion:
    position: np.ndarray
    fitness: float
    key: float | None = None


@dataclass
class WolfPack:
    """Mutable optimizer state; leaders are best-so-far copies (elitist)."""

    positions: np.ndarray
    fitness: np.ndarray
    alpha: _Champion | None
    beta: _Champion | None
    delta: _Champion | None
    a: float
    t: int
    max_iter: int
    bounds: tuple[float, float]
    rng: np.random.Generator


def init_pack(config: GwoConfig) -> WolfPack:
    """Uniform positions inside the bounds; fitness left unevaluated."""
    rng = np.random.default_rng(config.seed)
    low, high = config.bounds
    positions = low + (high - low) * rng.random((config.n_agents, config.dim))
    return WolfPack(positions=positions,
                    fitness=np.full(config.n_agents, np.nan),
                    alpha=None, beta=None, delta=None,
                    a=2.0, t=0, max_iter=config.max_iter,
                    bounds=config.bounds, rng=rng)


def _evaluate(positions: np.ndarray, fitness_fn, parallel: bool) -> np.ndarray:
    if parallel:
        with ThreadPoolExecutor() as pool:
            values = list(pool.map(fitness_fn, positions))
    else:
        values = [fitness_fn(p) for p in positions]
    out = np.asarray(values, dtype=np.float64)
    bad = ~np.isfinite(out)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalError(f"fitness {out[i]} at position {positions[i].tolist()}")
    return out


def _beats(fitness: float, key, champ: _Champion) -> bool:
    if fitness < champ.fitness:
        return True
    return key is not None and fitness == champ.fitness and key < champ.key


def _install_leaders(pack: WolfPack, tie_key) -> None:
    keys = [tie_key(p) if tie_key else None for p in pack.positions]
    order = sorted(range(pack.positions.shape[0]),
                   key=lambda i: (pack.fitness[i],
                                  keys[i] if tie_key else 0, i))
    champs = [_Champion(pack.positions[i].copy(), float(pack.fitness[i]), keys[i])
              for i in order[:3]]
    pack.alpha, pack.beta, pack.delta = champs


def _update_leaders(pack: WolfPack, tie_key) -> None:
    # agents in index order, so equal candidates resolve to the lower index
    for i in range(pack.positions.shape[0]):
        f = float(pack.fitness[i])
        key = tie_key(pack.positions[i]) if tie_key else None
        if _beats(f, key, pack.alpha):
            pack.delta = pack.beta
            pack.beta = pack.alpha
            pack.alpha = _Champion(pack.positions[i].copy(), f, key)
        elif _beats(f, key, pack.beta):
            pack.delta = pack.beta
            pack.beta = _Champion(pack.positions[i].copy(), f, key)
        elif _beats(f, key, pack.delta):
            pack.delta = _Champion(pack.positions[i].copy(), f, key)


def coefficient_draws(rng: np.random.Generator, a: float, n_agents: int,
                      dim: int) -> tuple[np.ndarray, np.ndarray]:
    """A and C vectors for every (agent, leader) pair, in canonical draw order."""
    draws = rng.random((n_agents, 3, 2, dim))
    A = 2.0 * a * draws[:, :, 0, :] - a
    C = 2.0 * draws[:, :, 1, :]
    return A, C


def gwo_step(pack: WolfPack, fitness_fn, tie_key=None, parallel: bool = False) -> WolfPack:
    """One pack iteration: encircle the three leaders, average, clamp, score.

    The first call on a fresh pack evaluates the initial positions to seat
    the leaders before any movement.
    """
    if pack.t >= pack.max_iter:
        raise ValueError("pack already ran max_iter steps")
    if pack.alpha is None:
        pack.fitness = _evaluate(pack.positions, fitness_fn, parallel)
        _install_leaders(pack, tie_key)
    A, C = coefficient_draws(pack.rng, pack.a, pack.positions.shape[0],
                             pack.positions.shape[1])
    leaders = np.stack([pack.alpha.position, pack.beta.position,
                        pack.delta.position])
    D = np.abs(C * leaders[None, :, :] - pack.positions[:, None, :])
    pulled = leaders[None, :, :] - A * D
    new_positions = pulled.mean(axis=1)
    np.clip(new_positions, pack.bounds[0], pack.bounds[1], out=new_positions)
    pack.positions = new_positions
    pack.fitness = _evaluate(pack.positions, fitness_fn, parallel)
    _update_leaders(pack, tie_key)
    pack.t += 1
    pack.a = 2.0 * (1.0 - pack.t / pack.max_iter)
    return pack


def optimize(config: GwoConfig, fitness_fn, tie_key=None, parallel: bool = False
             ) -> tuple[np.ndarray, float, list[float]]:
    """Run a full pack search; returns alpha position, fitness, and the
    per-iteration alpha fitness history (non-increasing by elitism)."""
    pack = init_pack(config)
    history = []
    for _ in range(config.max_iter):
        gwo_step(pack, fitness_fn, tie_key=tie_key, parallel=parallel)
        history.append(pack.alpha.fitness)
    return pack.alpha.position.copy(), pack.alpha.fitness, history


@dataclass(frozen=True)
class FeatureMask:
    """Sorted, duplicate-free column indices into a dim-wide matrix."""

    selected: tuple[int, ...]
    dim: int

    def __post_init__(self):
        if len(self.selected) == 0:
            raise ValueError("mask cannot be empty")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        prev = -1
        for idx in self.selected:
            if idx <= prev:
                raise ValueError(f"indices must be strictly increasing, got {self.selected}")
            prev = idx
        if self.selected[-1] >= self.dim:
            raise ValueError(f"index {self.selected[-1]} out of range for dim {self.dim}")

    @property
    def size(self) -> int:
        return len(self.selected)


def binarize(position: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> FeatureMask:
    """Positions above the threshold select their column; an empty result
    is repaired to the argmax component (ties to the lowest index)."""
    position = np.asarray(position, dtype=np.float64)
    selected = np.flatnonzero(position > threshold)
    if selected.size == 0:
        selected = np.array([np.argmax(position)])
    return FeatureMask(tuple(int(i) for i in selected), position.size)


def selection_fitness(mask: FeatureMask, train: LabeledFeatureSet,
                      val: LabeledFeatureSet, clf,
                      penalty: float = DEFAULT_PENALTY) -> float:
    """(1 - validation accuracy) + penalty * |mask| / dim, to minimize."""
    if train.n_dims != mask.dim or val.n_dims != mask.dim:
        raise DataError(f"mask dim {mask.dim} does not match data "
                        f"({train.n_dims}, {val.n_dims})")
    if train.n_classes != val.n_classes:
        raise DataError("train and val disagree on n_classes")
    cols = list(mask.selected)
    try:
        model = fit_classifier(clf, train.select_columns(cols))
    except NumericalError as e:
        raise NumericalError(f"{e} (mask {mask.selected})") from None
    pred, _ = predict(model, val.features[:, cols])
    accuracy = float(np.mean(pred == val.labels))
    return (1.0 - accuracy) + penalty * mask.size / mask.dim


def select_features(train: LabeledFeatureSet, val: LabeledFeatureSet,
                    config: GwoConfig, clf,
                    threshold: float = DEFAULT_THRESHOLD,
                    penalty: float = DEFAULT_PENALTY,
                    parallel: bool = False
                    ) -> tuple[FeatureMask, float, list[float]]:
    """Wrapper feature selection on the unit box.

    Fitness ties during leader updates break toward fewer selected
    features, then the lower agent index. Mask evaluations are cached, so
    revisiting a mask costs nothing.
    """
    if config.dim != train.n_dims:
        raise DataError(f"config.dim {config.dim} does not match data {train.n_dims}")
    cfg = replace(config, bounds=(0.0, 1.0))
    cache: dict[tuple[int, ...], float] = {}

    def fn(position):
        mask = binarize(position, threshold)
        value = cache.get(mask.selected)
        if value is None:
            value = selection_fitness(mask, train, val, clf, penalty)
            cache[mask.selected] = value
        return value

    def key(position):
        return binarize(position, threshold).size

    best_position, best_fitness, history = optimize(cfg, fn, tie_key=key,
                                                    parallel=parallel)
    return binarize(best_position, threshold), best_fitness, history
