"""Alternative optimizers, the comparison harness, and test functions."""

import csv
import io
import json
import math

import numpy as np
import pytest

from wolfsel.bench import (COMPARISON_COLUMNS, ComparisonRow, GaParams,
                           OptimizerSpec, PsoParams, compare_selectors,
                           comparison_csv, comparison_json, run_optimizer,
                           select_with)
from wolfsel.bench import test_functions as lookup_function
from wolfsel.classify import KnnConfig
from wolfsel.dataspace import synth_dataset
from wolfsel.errors import DataError
from wolfsel.gwo import selection_fitness


def test_function_hand_oracles():
    sphere = lookup_function("sphere")
    assert sphere.fn(np.array([1.0, 2.0, 3.0])) == 14.0
    assert sphere.fn(sphere.optimum_position(4)) == sphere.optimum_value

    rastrigin = lookup_function("rastrigin")
    assert rastrigin.fn(np.zeros(6)) == 0.0
    # 10 + 0.25 - 10*cos(pi) at the half-integer
    assert rastrigin.fn(np.array([0.5])) == pytest.approx(20.25)

    rosenbrock = lookup_function("rosenbrock")
    assert rosenbrock.fn(np.ones(5)) == 0.0
    assert rosenbrock.fn(np.array([0.0, 0.0])) == 1.0
    np.testing.assert_array_equal(rosenbrock.optimum_position(3), np.ones(3))

    with pytest.raises(ValueError, match="unknown test function"):
        lookup_function("ackley")


def test_param_validation():
    with pytest.raises(ValueError, match="inertia"):
        PsoParams(inertia=1.0)
    with pytest.raises(ValueError, match="non-negative"):
        PsoParams(cognitive=-0.1)
    with pytest.raises(ValueError, match="crossover_rate"):
        GaParams(crossover_rate=1.5)
    with pytest.raises(ValueError, match="mutation_rate"):
        GaParams(mutation_rate=-0.2)
    with pytest.raises(ValueError, match="tournament_size"):
        GaParams(tournament_size=1)
    with pytest.raises(ValueError, match="unknown optimizer"):
        OptimizerSpec("sa")
    with pytest.raises(ValueError, match="n_agents"):
        OptimizerSpec("pso", n_agents=2)
    with pytest.raises(ValueError, match="max_iter"):
        OptimizerSpec("ga", max_iter=0)


@pytest.mark.parametrize("kind", ["gwo", "pso", "ga"])
def test_optimizers_descend_on_sphere(kind):
    sphere = lookup_function("sphere").fn
    spec = OptimizerSpec(kind, n_agents=20, max_iter=60, seed=0)
    position, fitness, history = run_optimizer(spec, sphere, 4, (-5.0, 5.0))
    assert fitness == sphere(position)
    assert len(history) == 60
    assert all(b <= a for a, b in zip(history, history[1:]))
    # all three must cut the initial best substantially
    assert fitness < 0.1 * history[0]
    if kind in ("gwo", "pso"):
        assert fitness < 1e-2


@pytest.mark.parametrize("kind", ["gwo", "pso", "ga"])
def test_optimizers_deterministic(kind):
    sphere = lookup_function("sphere").fn
    spec = OptimizerSpec(kind, n_agents=10, max_iter=20, seed=3)
    a = run_optimizer(spec, sphere, 3, (-1.0, 1.0))
    b = run_optimizer(spec, sphere, 3, (-1.0, 1.0))
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1] and a[2] == b[2]


def test_run_optimizer_validation():
    spec = OptimizerSpec("gwo")
    with pytest.raises(ValueError, match="dim"):
        run_optimizer(spec, lambda x: 0.0, 0, (0.0, 1.0))
    with pytest.raises(ValueError, match="bounds"):
        run_optimizer(spec, lambda x: 0.0, 2, (1.0, 0.0))


@pytest.mark.parametrize("kind", ["gwo", "pso", "ga"])
def test_select_with_reports_consistent_fitness(kind):
    train = synth_dataset(40, 2, 4, 2, 6.0, 1)
    val = synth_dataset(20, 2, 4, 2, 6.0, 2)
    clf = KnnConfig(k=3)
    spec = OptimizerSpec(kind, n_agents=8, max_iter=20, seed=1)
    mask, fitness, history = select_with(spec, train, val, clf)
    assert 1 <= mask.size <= 6 and mask.dim == 6
    assert fitness == pytest.approx(selection_fitness(mask, train, val, clf))
    assert history[-1] == fitness


def test_compare_selectors_table():
    train = synth_dataset(40, 2, 3, 2, 6.0, 3)
    val = synth_dataset(20, 2, 3, 2, 6.0, 4)
    test = synth_dataset(20, 2, 3, 2, 6.0, 5)
    specs = [OptimizerSpec(k, n_agents=6, max_iter=10, seed=2)
             for k in ("gwo", "pso")]
    rows, aggregates = compare_selectors(specs, (train, val, test),
                                         KnnConfig(k=3), n_seeds=3)
    assert len(rows) == 6
    assert [(r.optimizer, r.seed) for r in rows] == [
        ("gwo", 2), ("gwo", 3), ("gwo", 4),
        ("pso", 2), ("pso", 3), ("pso", 4)]
    for r in rows:
        assert r.error is None
        assert 0.0 <= r.accuracy <= 1.0
        assert r.n_features >= 1
        assert math.isfinite(r.fitness)
    assert [a.optimizer for a in aggregates] == ["gwo", "pso"]
    gwo_rows = rows[:3]
    agg = aggregates[0]
    assert agg.n_runs == 3
    accs = np.array([r.accuracy for r in gwo_rows])
    assert agg.accuracy_mean == pytest.approx(accs.mean())
    assert agg.accuracy_std == pytest.approx(accs.std())


def test_compare_selectors_keeps_failed_runs():
    train = synth_dataset(40, 2, 3, 2, 6.0, 3)
    val = synth_dataset(20, 2, 3, 3, 6.0, 4)  # class space mismatch
    test = synth_dataset(20, 2, 3, 2, 6.0, 5)
    specs = [OptimizerSpec("gwo", n_agents=4, max_iter=3, seed=0)]
    rows, aggregates = compare_selectors(specs, (train, val, test),
                                         KnnConfig(k=3), n_seeds=2)
    assert len(rows) == 2
    for r in rows:
        assert r.error is not None and "DataError" in r.error
        assert math.isnan(r.accuracy) and math.isnan(r.fitness)
    assert aggregates[0].n_runs == 0
    assert math.isnan(aggregates[0].accuracy_mean)


def test_compare_selectors_validation():
    ds = synth_dataset(30, 2, 3, 2, 6.0, 6)
    wide = synth_dataset(30, 2, 4, 2, 6.0, 6)
    with pytest.raises(ValueError, match="n_seeds"):
        compare_selectors([OptimizerSpec("gwo")], (ds, ds, ds), KnnConfig(), 0)
    with pytest.raises(DataError, match="disagree on columns"):
        compare_selectors([OptimizerSpec("gwo")], (ds, wide, ds), KnnConfig(), 1)


def _tiny_comparison():
    train = synth_dataset(30, 2, 2, 2, 6.0, 7)
    val = synth_dataset(15, 2, 2, 2, 6.0, 8)
    test = synth_dataset(15, 2, 2, 2, 6.0, 9)
    specs = [OptimizerSpec("ga", n_agents=5, max_iter=5, seed=1)]
    return compare_selectors(specs, (train, val, test), KnnConfig(k=3), 2)


def test_comparison_csv_shape():
    rows, aggregates = _tiny_comparison()
    text = comparison_csv(rows, aggregates)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == list(COMPARISON_COLUMNS)
    assert len(parsed) == 1 + len(rows) + len(aggregates)
    # per-run rows carry the numeric seed, the aggregate row a marker
    assert parsed[1][1] == "1" and parsed[2][1] == "2"
    assert parsed[3][1] == "aggregate"
    assert "±" in parsed[3][2]


def test_comparison_json_matches_csv_rows():
    rows, aggregates = _tiny_comparison()
    doc = json.loads(comparison_json(rows, aggregates))
    assert len(doc) == len(rows) + len(aggregates)
    assert doc[0]["optimizer"] == "ga"
    assert doc[0]["seed"] == 1
    assert doc[-1]["seed"] == "aggregate"
    assert set(doc[0]) == set(COMPARISON_COLUMNS)
