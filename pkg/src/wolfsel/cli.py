"""Command line interface and end-to-end pipeline.

The pipeline loads one or more feature files, concatenates them column
wise, splits stratified, fits PCA on the training split only, selects a
feature subset with the grey wolf wrapper on train/val, refits the final
classifier on train+val restricted to the mask, and evaluates on the held
out test split. Reports are byte-stable for a fixed config and seed:
wall-clock timings go to a sibling timings.json, never into report.json.

Exit codes: 0 success, 2 usage, 3 data errors, 4 numerical failures.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .bench import (OPTIMIZER_KINDS, OptimizerSpec, compare_selectors,
                    comparison_csv, comparison_json)
from .classify import (KnnConfig, Metrics, SvmConfig, confusion,
                       fit_classifier, mcnemar, metrics, predict, roc_ova)
from .dataspace import (LabeledFeatureSet, SplitSpec, concat_features,
                        load_feature_set, merge_rows, save_feature_set, split,
                        synth_dataset)
from .errors import DataError, NumericalError
from .gwo import GwoConfig, select_features
from .pca import (PcaModel, fit_pca, load_pca_model, save_pca_model,
                  standardize, transform)

DEFAULT_PCA_THRESHOLD = 0.99
DEFAULT_AGENTS = 30
DEFAULT_ITERS = 100


def _detect_format(path: str, format: str = "auto") -> str:
    if format != "auto":
        return format
    return "csv" if path.lower().endswith(".csv") else "binary"


def _classifier_from_dict(doc: dict):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError(f"classifier config needs a 'kind' key, got {doc!r}")
    kind = doc["kind"]
    if kind == "svm":
        return SvmConfig(C=float(doc.get("C", 1.0)), gamma=doc.get("gamma", "scale"))
    if kind == "knn":
        return KnnConfig(k=int(doc.get("k", 5)))
    raise ValueError(f"unknown classifier kind {kind!r}")


def _classifier_to_dict(cfg) -> dict:
    if isinstance(cfg, SvmConfig):
        return {"kind": "svm", "C": cfg.C, "gamma": cfg.gamma}
    return {"kind": "knn", "k": cfg.k}


@dataclass(frozen=True)
class ComparisonSettings:
    optimizers: tuple[str, ...]
    n_seeds: int

    def __post_init__(self):
        if not self.optimizers:
            raise ValueError("comparison needs at least one optimizer")
        for kind in self.optimizers:
            if kind not in OPTIMIZER_KINDS:
                raise ValueError(f"unknown optimizer {kind!r}")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be positive")


@dataclass
class PipelineConfig:
    inputs: list[str]
    out_dir: str = "out"
    format: str = "auto"
    seed: int = 0
    split_spec: SplitSpec | None = None
    pca_threshold: float = DEFAULT_PCA_THRESHOLD
    gwo_agents: int = DEFAULT_AGENTS
    gwo_iters: int = DEFAULT_ITERS
    gwo_seed: int | None = None
    binarize_threshold: float = 0.5
    penalty: float = 0.01
    fitness_classifier: object = None
    final_classifier: object = None
    comparison: ComparisonSettings | None = None
    parallel_fitness: bool = False

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input file is required")
        if self.format not in ("auto", "csv", "binary"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.split_spec is None:
            self.split_spec = SplitSpec(seed=self.seed)
        if self.fitness_classifier is None:
            self.fitness_classifier = KnnConfig(k=5)
        if self.final_classifier is None:
            self.final_classifier = SvmConfig()

    @property
    def resolved_gwo_seed(self) -> int:
        return self.seed if self.gwo_seed is None else self.gwo_seed


_CONFIG_KEYS = {"inputs", "out_dir", "format", "seed", "split", "pca_threshold",
                "gwo", "binarize_threshold", "penalty", "fitness_classifier",
                "final_classifier", "comparison", "parallel_fitness"}


def pipeline_config_from_dict(doc: dict) -> PipelineConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    seed = int(doc.get("seed", 0))
    split_doc = doc.get("split", {})
    if not isinstance(split_doc, dict):
        raise ValueError("'split' must be an object")
    spec = SplitSpec(
        train_fraction=float(split_doc.get("train_fraction", 0.7)),
        val_fraction=float(split_doc.get("val_fraction", 0.15)),
        test_fraction=float(split_doc.get("test_fraction", 0.15)),
        seed=int(split_doc.get("seed", seed)),
        stratified=bool(split_doc.get("stratified", True)))
    gwo_doc = doc.get("gwo", {})
    if not isinstance(gwo_doc, dict):
        raise ValueError("'gwo' must be an object")
    comparison = None
    if doc.get("comparison") is not None:
        cmp_doc = doc["comparison"]
        comparison = ComparisonSettings(
            optimizers=tuple(cmp_doc.get("optimizers", OPTIMIZER_KINDS)),
            n_seeds=int(cmp_doc.get("n_seeds", 3)))
    fitness = doc.get("fitness_classifier")
    final = doc.get("final_classifier")
    return PipelineConfig(
        inputs=list(doc.get("inputs", [])),
        out_dir=str(doc.get("out_dir", "out")),
        format=str(doc.get("format", "auto")),
        seed=seed,
        split_spec=spec,
        pca_threshold=float(doc.get("pca_threshold", DEFAULT_PCA_THRESHOLD)),
        gwo_agents=int(gwo_doc.get("n_agents", DEFAULT_AGENTS)),
        gwo_iters=int(gwo_doc.get("max_iter", DEFAULT_ITERS)),
        gwo_seed=None if gwo_doc.get("seed") is None else int(gwo_doc["seed"]),
        binarize_threshold=float(doc.get("binarize_threshold", 0.5)),
        penalty=float(doc.get("penalty", 0.01)),
        fitness_classifier=None if fitness is None else _classifier_from_dict(fitness),
        final_classifier=None if final is None else _classifier_from_dict(final),
        comparison=comparison,
        parallel_fitness=bool(doc.get("parallel_fitness", False)))


def _config_echo(config: PipelineConfig) -> dict:
    # out_dir and parallel_fitness are execution details, not experiment
    # parameters; they stay out so reruns stay byte-identical
    return {
        "inputs": list(config.inputs),
        "format": config.format,
        "seed": config.seed,
        "split": {
            "train_fraction": config.split_spec.train_fraction,
            "val_fraction": config.split_spec.val_fraction,
            "test_fraction": config.split_spec.test_fraction,
            "seed": config.split_spec.seed,
            "stratified": config.split_spec.stratified,
        },
        "pca_threshold": config.pca_threshold,
        "gwo": {"n_agents": config.gwo_agents, "max_iter": config.gwo_iters,
                "seed": config.resolved_gwo_seed},
        "binarize_threshold": config.binarize_threshold,
        "penalty": config.penalty,
        "fitness_classifier": _classifier_to_dict(config.fitness_classifier),
        "final_classifier": _classifier_to_dict(config.final_classifier),
        "comparison": None if config.comparison is None else {
            "optimizers": list(config.comparison.optimizers),
            "n_seeds": config.comparison.n_seeds,
        },
    }


@dataclass
class EvalReport:
    config_echo: dict
    splits: dict
    pca_input_dim: int
    pca_m: int
    pca_threshold: float
    explained_variance_ratio: float
    mask_selected: list[int]
    mask_dim: int
    selection_fitness: float
    history: list[float]
    accuracy: dict
    loss: dict
    confusion_counts: list[list[int]]
    test_metrics: Metrics
    auc: list[float]
    timings: dict
    roc_curves: list = None
    comparison: tuple | None = None

    def to_report_dict(self) -> dict:
        m = self.test_metrics
        doc = {
            "accuracy": self.accuracy,
            "auc": self.auc,
            "config": self.config_echo,
            "confusion": self.confusion_counts,
            "history_file": "history.csv",
            "loss": self.loss,
            "mask": {"dim": self.mask_dim, "selected": self.mask_selected,
                     "size": len(self.mask_selected)},
            "metrics": {
                "accuracy": m.accuracy,
                "macro_precision": m.macro_precision,
                "macro_recall": m.macro_recall,
                "macro_f1": m.macro_f1,
                "weighted_precision": m.weighted_precision,
                "weighted_recall": m.weighted_recall,
                "weighted_f1": m.weighted_f1,
                "per_class": {
                    "precision": m.precision.tolist(),
                    "recall": m.recall.tolist(),
                    "f1": m.f1.tolist(),
                    "precision_defined": m.precision_defined.tolist(),
                    "recall_defined": m.recall_defined.tolist(),
                    "f1_defined": m.f1_defined.tolist(),
                },
            },
            "pca": {"input_dim": self.pca_input_dim, "m": self.pca_m,
                    "threshold": self.pca_threshold,
                    "explained_variance_ratio": self.explained_variance_ratio},
            "selection_fitness": self.selection_fitness,
            "splits": self.splits,
        }
        if self.comparison is not None:
            doc["comparison_file"] = "comparison.csv"
        return doc


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["accuracy", "auc", "config", "confusion", "history_file",
                 "loss", "mask", "metrics", "pca", "selection_fitness",
                 "splits"],
    "properties": {
        "accuracy": {
            "type": "object",
            "required": ["train", "val", "test"],
            "properties": {k: {"type": "number", "minimum": 0, "maximum": 1}
                           for k in ("train", "val", "test")},
        },
        "auc": {"type": "array",
                "items": {"type": "number", "minimum": 0, "maximum": 1},
                "minItems": 2},
        "config": {"type": "object"},
        "confusion": {"type": "array",
                      "items": {"type": "array",
                                "items": {"type": "integer", "minimum": 0}}},
        "history_file": {"type": "string"},
        "comparison_file": {"type": "string"},
        "loss": {
            "type": "object",
            "required": ["train", "val", "test"],
            "properties": {k: {"type": "number", "minimum": 0, "maximum": 1}
                           for k in ("train", "val", "test")},
        },
        "mask": {
            "type": "object",
            "required": ["dim", "selected", "size"],
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "selected": {"type": "array", "minItems": 1,
                             "items": {"type": "integer", "minimum": 0}},
                "size": {"type": "integer", "minimum": 1},
            },
        },
        "metrics": {
            "type": "object",
            "required": ["accuracy", "macro_precision", "macro_recall",
                         "macro_f1", "weighted_precision", "weighted_recall",
                         "weighted_f1", "per_class"],
            "properties": {
                "per_class": {
                    "type": "object",
                    "required": ["precision", "recall", "f1",
                                 "precision_defined", "recall_defined",
                                 "f1_defined"],
                },
            },
        },
        "pca": {
            "type": "object",
            "required": ["input_dim", "m", "threshold",
                         "explained_variance_ratio"],
            "properties": {
                "input_dim": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number"},
                "explained_variance_ratio": {"type": "number"},
            },
        },
        "selection_fitness": {"type": "number"},
        "splits": {
            "type": "object",
            "required": ["train", "val", "test"],
            "properties": {k: {"type": "integer", "minimum": 1}
                           for k in ("train", "val", "test")},
        },
    },
}


@contextlib.contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except (DataError, NumericalError) as e:
        raise type(e)(f"stage {name!r}: {e}") from e
    finally:
        timings[name] = time.perf_counter() - start


def run_pipeline(config: PipelineConfig) -> EvalReport:
    """Execute the full reduce/select/classify/evaluate pipeline in memory."""
    timings: dict[str, float] = {}
    with _stage("load", timings):
        sets = [load_feature_set(p, _detect_format(p, config.format))
                for p in config.inputs]
        data = sets[0] if len(sets) == 1 else concat_features(sets)
    with _stage("split", timings):
        train, val, test = split(data, config.split_spec)
    with _stage("pca", timings):
        x_std, params = standardize(train.features)
        model = fit_pca(x_std, config.pca_threshold, standardization=params)
        reduced = [LabeledFeatureSet(transform(model, s.features), s.labels,
                                     s.n_classes) for s in (train, val, test)]
        train_r, val_r, test_r = reduced
    with _stage("select", timings):
        gwo_config = GwoConfig(n_agents=config.gwo_agents,
                               max_iter=config.gwo_iters,
                               dim=model.m, seed=config.resolved_gwo_seed)
        mask, sel_fitness, history = select_features(
            train_r, val_r, gwo_config, config.fitness_classifier,
            threshold=config.binarize_threshold, penalty=config.penalty,
            parallel=config.parallel_fitness)
    with _stage("final", timings):
        cols = list(mask.selected)
        fit_set = merge_rows([train_r, val_r]).select_columns(cols)
        final_model = fit_classifier(config.final_classifier, fit_set)
        accuracy = {}
        for name, subset in (("train", train_r), ("val", val_r), ("test", test_r)):
            pred, scores = predict(final_model, subset.features[:, cols])
            accuracy[name] = float(np.mean(pred == subset.labels))
            if name == "test":
                cm = confusion(subset.labels, pred, subset.n_classes)
                test_metrics = metrics(cm)
                roc = roc_ova(scores, subset.labels)
        loss = {k: 1.0 - v for k, v in accuracy.items()}
    comparison = None
    if config.comparison is not None:
        with _stage("comparison", timings):
            specs = [OptimizerSpec(kind, n_agents=config.gwo_agents,
                                   max_iter=config.gwo_iters, seed=config.seed)
                     for kind in config.comparison.optimizers]
            comparison = compare_selectors(
                specs, (train_r, val_r, test_r), config.fitness_classifier,
                config.comparison.n_seeds,
                threshold=config.binarize_threshold, penalty=config.penalty)
    return EvalReport(
        config_echo=_config_echo(config),
        splits={"train": train.n_samples, "val": val.n_samples,
                "test": test.n_samples},
        pca_input_dim=model.n_dims,
        pca_m=model.m,
        pca_threshold=config.pca_threshold,
        explained_variance_ratio=model.retained_variance,
        mask_selected=list(mask.selected),
        mask_dim=mask.dim,
        selection_fitness=sel_fitness,
        history=history,
        accuracy=accuracy,
        loss=loss,
        confusion_counts=cm.counts.tolist(),
        test_metrics=test_metrics,
        auc=[float(a) for a in roc.auc],
        timings=timings,
        roc_curves=roc.curves,
        comparison=comparison,
    )


def _render_report_json(report: EvalReport) -> str:
    return json.dumps(report.to_report_dict(), indent=1, sort_keys=True) + "\n"


def _render_history_csv(history: list[float]) -> str:
    lines = ["iteration,alpha_fitness"]
    for i, value in enumerate(history, start=1):
        lines.append(f"{i},{value!r}")
    return "\n".join(lines) + "\n"


def _render_roc_csv(curves) -> str:
    lines = ["class,threshold,fpr,tpr"]
    for curve in curves:
        for thr, fpr, tpr in zip(curve.thresholds, curve.fpr, curve.tpr):
            lines.append(f"{curve.class_index},{float(thr)!r},{float(fpr)!r},{float(tpr)!r}")
    return "\n".join(lines) + "\n"


def write_outputs(report: EvalReport, out_dir: str) -> list[str]:
    """Write report.json, roc.csv, history.csv, timings.json, and friends.

    All content is rendered before anything touches disk; a failed write
    removes whatever was already created so no partial output survives.
    """
    files = {
        "report.json": _render_report_json(report),
        "history.csv": _render_history_csv(report.history),
        "timings.json": json.dumps(report.timings, indent=1, sort_keys=True) + "\n",
    }
    if report.roc_curves is not None:
        files["roc.csv"] = _render_roc_csv(report.roc_curves)
    if report.comparison is not None:
        rows, aggregates = report.comparison
        files["comparison.csv"] = comparison_csv(rows, aggregates)
        files["comparison.json"] = comparison_json(rows, aggregates)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        for name, content in files.items():
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(content)
            written.append(path)
    except OSError:
        for path in written:
            with contextlib.suppress(OSError):
                os.remove(path)
        raise
    return written


def _load_config(args) -> PipelineConfig:
    doc = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as e:
            raise DataError(f"cannot read {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise ValueError(f"{args.config}: invalid JSON: {e}") from e
    if getattr(args, "inputs", None):
        doc["inputs"] = list(args.inputs)
    if args.seed is not None:
        doc["seed"] = args.seed
        doc.setdefault("split", {})
        doc.setdefault("gwo", {})
    if args.threshold is not None:
        doc["pca_threshold"] = args.threshold
    if args.agents is not None:
        doc.setdefault("gwo", {})["n_agents"] = args.agents
    if args.iters is not None:
        doc.setdefault("gwo", {})["max_iter"] = args.iters
    if args.out is not None:
        doc["out_dir"] = args.out
    return pipeline_config_from_dict(doc)


def _cmd_run(args) -> int:
    config = _load_config(args)
    report = run_pipeline(config)
    written = write_outputs(report, config.out_dir)
    for path in written:
        print(path)
    print(f"test accuracy {report.accuracy['test']:.4f} "
          f"with {len(report.mask_selected)}/{report.mask_dim} components")
    return 0


def run_and_write(config: PipelineConfig) -> tuple[EvalReport, list[str]]:
    """run_pipeline plus output files, returning the report and paths."""
    report = run_pipeline(config)
    written = write_outputs(report, config.out_dir)
    return report, written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wolfsel",
        description="PCA reduction plus grey-wolf wrapper feature selection")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="full pipeline: reduce, select, classify, report")
    run_p.add_argument("--config", default=None, help="JSON config file")
    run_p.add_argument("--in", dest="inputs", action="append", default=None,
                       metavar="PATH", help="input feature file (repeatable)")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--threshold", type=float, default=None,
                       help="cumulative explained variance target")
    run_p.add_argument("--agents", type=int, default=None)
    run_p.add_argument("--iters", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.set_defaults(func=_cmd_run)

    fit_p = sub.add_parser("pca-fit", help="fit a PCA model on a feature file")
    fit_p.add_argument("--in", dest="input", required=True, metavar="PATH")
    fit_p.add_argument("--format", default="auto", choices=("auto", "csv", "binary"))
    fit_p.add_argument("--threshold", type=float, default=DEFAULT_PCA_THRESHOLD)
    fit_p.add_argument("--out", required=True, help="model JSON path")
    fit_p.set_defaults(func=_cmd_pca_fit)

    tr_p = sub.add_parser("pca-transform", help="project a feature file with a fitted model")
    tr_p.add_argument("--model", required=True)
    tr_p.add_argument("--in", dest="input", required=True, metavar="PATH")
    tr_p.add_argument("--format", default="auto", choices=("auto", "csv", "binary"))
    tr_p.add_argument("--out", required=True, help="output CSV path")
    tr_p.set_defaults(func=_cmd_pca_transform)

    sel_p = sub.add_parser("select", help="wrapper feature selection on train/val files")
    sel_p.add_argument("--train", required=True)
    sel_p.add_argument("--val", required=True)
    sel_p.add_argument("--format", default="auto", choices=("auto", "csv", "binary"))
    sel_p.add_argument("--agents", type=int, default=DEFAULT_AGENTS)
    sel_p.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    sel_p.add_argument("--seed", type=int, default=0)
    sel_p.add_argument("--clf", default="knn", choices=("knn", "svm"))
    sel_p.add_argument("--k", type=int, default=5, help="k for the knn fitness")
    sel_p.add_argument("--C", type=float, default=1.0, help="C for the svm fitness")
    sel_p.add_argument("--tau", type=float, default=0.5, help="binarization threshold")
    sel_p.add_argument("--penalty", type=float, default=0.01)
    sel_p.add_argument("--out", required=True, help="mask JSON path")
    sel_p.add_argument("--history", default=None, help="optional history CSV path")
    sel_p.set_defaults(func=_cmd_select)

    bc_p = sub.add_parser("bench-compare", help="compare optimizers as feature selectors")
    bc_p.add_argument("--in", dest="inputs", action="append", required=True,
                      metavar="PATH", help="input feature file (repeatable)")
    bc_p.add_argument("--format", default="auto", choices=("auto", "csv", "binary"))
    bc_p.add_argument("--optimizers", default="gwo,pso,ga",
                      help="comma separated subset of gwo,pso,ga")
    bc_p.add_argument("--seeds", type=int, default=3)
    bc_p.add_argument("--seed", type=int, default=0, help="base seed")
    bc_p.add_argument("--agents", type=int, default=10)
    bc_p.add_argument("--iters", type=int, default=30)
    bc_p.add_argument("--clf", default="knn", choices=("knn", "svm"))
    bc_p.add_argument("--k", type=int, default=5)
    bc_p.add_argument("--C", type=float, default=1.0)
    bc_p.add_argument("--threshold", type=float, default=DEFAULT_PCA_THRESHOLD)
    bc_p.add_argument("--no-pca", action="store_true",
                      help="skip the PCA stage (ablation)")
    bc_p.add_argument("--out", required=True, help="output directory")
    bc_p.set_defaults(func=_cmd_bench_compare)

    mc_p = sub.add_parser("eval-mcnemar", help="paired McNemar test on two prediction files")
    mc_p.add_argument("--a", required=True, help="predictions of classifier A, one label per line")
    mc_p.add_argument("--b", required=True, help="predictions of classifier B")
    mc_p.add_argument("--truth", required=True, help="ground-truth labels")
    mc_p.add_argument("--out", default=None, help="optional JSON output path")
    mc_p.set_defaults(func=_cmd_mcnemar)

    synth_p = sub.add_parser("synth", help="generate a synthetic blob dataset")
    synth_p.add_argument("--samples", type=int, required=True)
    synth_p.add_argument("--informative", type=int, required=True)
    synth_p.add_argument("--noise", type=int, required=True)
    synth_p.add_argument("--classes", type=int, default=2)
    synth_p.add_argument("--sep", type=float, default=3.0)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--format", default="csv", choices=("csv", "binary"))
    synth_p.add_argument("--out", required=True)
    synth_p.set_defaults(func=_cmd_synth)
    return parser


def _cmd_pca_fit(args) -> int:
    data = load_feature_set(args.input, _detect_format(args.input, args.format))
    x_std, params = standardize(data.features)
    model = fit_pca(x_std, args.threshold, standardization=params)
    save_pca_model(model, args.out)
    print(f"{args.out}: retained {model.m} of {model.n_dims} components "
          f"(cev {model.retained_variance:.6f})")
    return 0


def _cmd_pca_transform(args) -> int:
    model = load_pca_model(args.model)
    data = load_feature_set(args.input, _detect_format(args.input, args.format))
    scores = transform(model, data.features)
    save_feature_set(LabeledFeatureSet(scores, data.labels, data.n_classes),
                     args.out, "csv")
    print(f"{args.out}: {scores.shape[0]} rows x {scores.shape[1]} components")
    return 0


def _cmd_select(args) -> int:
    fmt = args.format
    train = load_feature_set(args.train, _detect_format(args.train, fmt))
    val = load_feature_set(args.val, _detect_format(args.val, fmt))
    clf = KnnConfig(k=args.k) if args.clf == "knn" else SvmConfig(C=args.C)
    config = GwoConfig(n_agents=args.agents, max_iter=args.iters,
                       dim=train.n_dims, seed=args.seed)
    mask, fitness, history = select_features(train, val, config, clf,
                                             threshold=args.tau,
                                             penalty=args.penalty)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({"dim": mask.dim, "selected": list(mask.selected),
                   "size": mask.size, "fitness": fitness}, fh, indent=1,
                  sort_keys=True)
        fh.write("\n")
    if args.history is not None:
        with open(args.history, "w", encoding="utf-8") as fh:
            fh.write(_render_history_csv(history))
    print(f"{args.out}: {mask.size}/{mask.dim} features, fitness {fitness:.6f}")
    return 0


def _cmd_bench_compare(args) -> int:
    kinds = tuple(k.strip() for k in args.optimizers.split(",") if k.strip())
    settings = ComparisonSettings(optimizers=kinds, n_seeds=args.seeds)
    sets = [load_feature_set(p, _detect_format(p, args.format)) for p in args.inputs]
    data = sets[0] if len(sets) == 1 else concat_features(sets)
    train, val, test = split(data, SplitSpec(seed=args.seed))
    if not args.no_pca:
        x_std, params = standardize(train.features)
        model = fit_pca(x_std, args.threshold, standardization=params)
        train, val, test = [LabeledFeatureSet(transform(model, s.features),
                                              s.labels, s.n_classes)
                            for s in (train, val, test)]
    clf = KnnConfig(k=args.k) if args.clf == "knn" else SvmConfig(C=args.C)
    specs = [OptimizerSpec(kind, n_agents=args.agents, max_iter=args.iters,
                           seed=args.seed) for kind in settings.optimizers]
    rows, aggregates = compare_selectors(specs, (train, val, test), clf,
                                         settings.n_seeds)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "comparison.csv")
    json_path = os.path.join(args.out, "comparison.json")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(comparison_csv(rows, aggregates))
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(comparison_json(rows, aggregates))
    print(csv_path)
    print(json_path)
    return 0


def _read_label_file(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh.read().splitlines()]
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DataError(f"{path}: empty label file")
    values = []
    for i, ln in enumerate(lines):
        try:
            values.append(int(ln))
        except ValueError:
            raise DataError(f"{path}: malformed label at line {i}: {ln!r}") from None
    return np.array(values, dtype=np.int64)


def _cmd_mcnemar(args) -> int:
    pred_a = _read_label_file(args.a)
    pred_b = _read_label_file(args.b)
    truth = _read_label_file(args.truth)
    result = mcnemar(pred_a, pred_b, truth)
    doc = json.dumps({"b": result.b, "c": result.c,
                      "statistic": result.statistic,
                      "p_value": result.p_value}, indent=1, sort_keys=True)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    print(doc)
    return 0


def _cmd_synth(args) -> int:
    data = synth_dataset(args.samples, args.informative, args.noise,
                         args.classes, args.sep, args.seed)
    save_feature_set(data, args.out, args.format)
    print(f"{args.out}: {data.n_samples} rows x {data.n_dims} dims, "
          f"{data.n_classes} classes")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 4
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
