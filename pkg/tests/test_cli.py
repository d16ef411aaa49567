"""Command line behavior: config parsing, subcommands, and exit codes."""

import json

import jsonschema
import numpy as np
import pytest

from wolfsel import cli
from wolfsel.classify import KnnConfig, SvmConfig
from wolfsel.dataspace import load_feature_set, save_feature_set, synth_dataset
from wolfsel.errors import DataError, NumericalError


def _write_dataset(tmp_path, name="data.csv", **kw):
    args = dict(n_samples=80, n_informative=3, n_noise=5, n_classes=2,
                class_sep=6.0, seed=0)
    args.update(kw)
    ds = synth_dataset(**args)
    path = tmp_path / name
    fmt = "csv" if name.endswith(".csv") else "binary"
    save_feature_set(ds, str(path), fmt)
    return str(path)


def test_config_from_dict_defaults():
    config = cli.pipeline_config_from_dict({"inputs": ["x.csv"]})
    assert config.out_dir == "out"
    assert config.pca_threshold == 0.99
    assert config.gwo_agents == 30 and config.gwo_iters == 100
    assert config.split_spec.fractions == (0.7, 0.15, 0.15)
    assert isinstance(config.fitness_classifier, KnnConfig)
    assert isinstance(config.final_classifier, SvmConfig)
    assert config.resolved_gwo_seed == 0


def test_config_from_dict_nested():
    doc = {
        "inputs": ["a.csv", "b.csv"],
        "seed": 9,
        "split": {"train_fraction": 0.6, "val_fraction": 0.2,
                  "test_fraction": 0.2},
        "gwo": {"n_agents": 12, "max_iter": 40, "seed": 4},
        "fitness_classifier": {"kind": "svm", "C": 3.0},
        "final_classifier": {"kind": "knn", "k": 7},
        "comparison": {"optimizers": ["gwo", "ga"], "n_seeds": 2},
    }
    config = cli.pipeline_config_from_dict(doc)
    # the top-level seed flows into the split seed unless overridden
    assert config.split_spec.seed == 9
    assert config.resolved_gwo_seed == 4
    assert config.fitness_classifier == SvmConfig(C=3.0)
    assert config.final_classifier == KnnConfig(k=7)
    assert config.comparison.optimizers == ("gwo", "ga")
    assert config.comparison.n_seeds == 2


def test_config_from_dict_rejects_unknown():
    with pytest.raises(ValueError, match="unknown config keys.*typo"):
        cli.pipeline_config_from_dict({"inputs": ["x.csv"], "typo": 1})
    with pytest.raises(ValueError, match="at least one input"):
        cli.pipeline_config_from_dict({})
    with pytest.raises(ValueError, match="classifier config"):
        cli.pipeline_config_from_dict({"inputs": ["x.csv"],
                                       "fitness_classifier": {"k": 5}})
    with pytest.raises(ValueError, match="unknown classifier kind"):
        cli.pipeline_config_from_dict({"inputs": ["x.csv"],
                                       "final_classifier": {"kind": "tree"}})


def test_detect_format():
    assert cli._detect_format("x.csv") == "csv"
    assert cli._detect_format("X.CSV") == "csv"
    assert cli._detect_format("x.bin") == "binary"
    assert cli._detect_format("x.bin", "csv") == "csv"


def test_synth_command(tmp_path, capsys):
    out = tmp_path / "blobs.csv"
    code = cli.main(["synth", "--samples", "30", "--informative", "2",
                     "--noise", "3", "--classes", "2", "--sep", "4.0",
                     "--seed", "1", "--out", str(out)])
    assert code == 0
    assert "30 rows x 5 dims" in capsys.readouterr().out
    ds = load_feature_set(str(out), "csv")
    assert ds.features.shape == (30, 5)
    assert ds.n_classes == 2


def test_pca_fit_then_transform(tmp_path, capsys):
    data = _write_dataset(tmp_path)
    model_path = tmp_path / "model.json"
    code = cli.main(["pca-fit", "--in", data, "--threshold", "0.95",
                     "--out", str(model_path)])
    assert code == 0
    doc = json.loads(model_path.read_text())
    m = doc["m"]
    assert 1 <= m <= 8

    out_csv = tmp_path / "scores.csv"
    code = cli.main(["pca-transform", "--model", str(model_path),
                     "--in", data, "--out", str(out_csv)])
    assert code == 0
    scores = load_feature_set(str(out_csv), "csv")
    assert scores.features.shape == (80, m)
    np.testing.assert_array_equal(scores.labels,
                                  load_feature_set(data, "csv").labels)


def test_select_command(tmp_path):
    train = _write_dataset(tmp_path, "train.csv", seed=1)
    val = _write_dataset(tmp_path, "val.csv", n_samples=30, seed=2)
    mask_path = tmp_path / "mask.json"
    hist_path = tmp_path / "hist.csv"
    code = cli.main(["select", "--train", train, "--val", val,
                     "--agents", "6", "--iters", "8", "--seed", "3",
                     "--out", str(mask_path), "--history", str(hist_path)])
    assert code == 0
    doc = json.loads(mask_path.read_text())
    assert set(doc) == {"dim", "selected", "size", "fitness"}
    assert doc["dim"] == 8
    assert doc["size"] == len(doc["selected"]) >= 1
    lines = hist_path.read_text().splitlines()
    assert lines[0] == "iteration,alpha_fitness"
    assert len(lines) == 1 + 8


def test_mcnemar_command(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("\n".join(["0", "0"] + ["1"] * 10) + "\n")
    (tmp_path / "b.txt").write_text("\n".join(["1", "1"] + ["0"] * 10) + "\n")
    (tmp_path / "t.txt").write_text("\n".join(["0"] * 12) + "\n")
    out = tmp_path / "mcnemar.json"
    code = cli.main(["eval-mcnemar", "--a", str(tmp_path / "a.txt"),
                     "--b", str(tmp_path / "b.txt"),
                     "--truth", str(tmp_path / "t.txt"),
                     "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert (doc["b"], doc["c"]) == (2, 10)
    assert doc["statistic"] == pytest.approx(49.0 / 12.0)
    assert doc["p_value"] == pytest.approx(0.0433, abs=1e-3)
    printed = json.loads(capsys.readouterr().out)
    assert printed == doc


def test_mcnemar_command_bad_file(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("0\nnope\n")
    (tmp_path / "b.txt").write_text("0\n1\n")
    (tmp_path / "t.txt").write_text("0\n1\n")
    code = cli.main(["eval-mcnemar", "--a", str(tmp_path / "a.txt"),
                     "--b", str(tmp_path / "b.txt"),
                     "--truth", str(tmp_path / "t.txt")])
    assert code == 3
    assert "malformed label" in capsys.readouterr().err


def _run_args(data, out_dir, seed="0"):
    return ["run", "--in", data, "--seed", seed, "--threshold", "0.95",
            "--agents", "5", "--iters", "6", "--out", out_dir]


def test_run_pipeline_outputs(tmp_path, capsys):
    data = _write_dataset(tmp_path)
    out_dir = tmp_path / "out"
    code = cli.main(_run_args(data, str(out_dir)))
    assert code == 0
    printed = capsys.readouterr().out
    assert "test accuracy" in printed
    for name in ("report.json", "history.csv", "roc.csv", "timings.json"):
        assert (out_dir / name).exists()
        assert str(out_dir / name) in printed

    report = json.loads((out_dir / "report.json").read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMA)
    assert report["pca"]["input_dim"] == 8
    assert report["mask"]["size"] == len(report["mask"]["selected"])
    assert report["mask"]["size"] <= report["pca"]["m"]
    assert report["splits"] == {"train": 56, "val": 12, "test": 12}
    # execution details stay out of the config echo
    assert "out_dir" not in report["config"]
    assert "parallel_fitness" not in report["config"]
    # timings live in their own file, keyed by pipeline stage
    timings = json.loads((out_dir / "timings.json").read_text())
    assert set(timings) >= {"load", "split", "pca", "select", "final"}
    history = (out_dir / "history.csv").read_text().splitlines()
    assert history[0] == "iteration,alpha_fitness"
    assert len(history) == 1 + 6


def test_run_report_is_reproducible(tmp_path):
    data = _write_dataset(tmp_path)
    cli.main(_run_args(data, str(tmp_path / "o1")))
    cli.main(_run_args(data, str(tmp_path / "o2")))
    cli.main(_run_args(data, str(tmp_path / "o3"), seed="1"))
    first = (tmp_path / "o1" / "report.json").read_bytes()
    second = (tmp_path / "o2" / "report.json").read_bytes()
    third = (tmp_path / "o3" / "report.json").read_bytes()
    assert first == second
    assert first != third


def test_run_with_config_file(tmp_path):
    data = _write_dataset(tmp_path)
    config = {"inputs": [data], "seed": 2, "pca_threshold": 0.9,
              "gwo": {"n_agents": 5, "max_iter": 4},
              "out_dir": str(tmp_path / "from_config")}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    code = cli.main(["run", "--config", str(cfg_path)])
    assert code == 0
    report = json.loads((tmp_path / "from_config" / "report.json").read_text())
    assert report["config"]["seed"] == 2
    assert report["config"]["pca_threshold"] == 0.9

    # CLI flags override file values
    code = cli.main(["run", "--config", str(cfg_path),
                     "--out", str(tmp_path / "override"), "--iters", "3"])
    assert code == 0
    report = json.loads((tmp_path / "override" / "report.json").read_text())
    assert report["config"]["gwo"]["max_iter"] == 3


def test_bench_compare_command(tmp_path):
    data = _write_dataset(tmp_path, n_samples=60)
    out_dir = tmp_path / "bench"
    code = cli.main(["bench-compare", "--in", data, "--optimizers", "gwo,pso",
                     "--seeds", "1", "--agents", "4", "--iters", "3",
                     "--threshold", "0.95", "--out", str(out_dir)])
    assert code == 0
    rows = json.loads((out_dir / "comparison.json").read_text())
    kinds = {r["optimizer"] for r in rows}
    assert kinds == {"gwo", "pso"}
    text = (out_dir / "comparison.csv").read_text()
    assert text.startswith("optimizer,seed,accuracy")


def test_exit_codes(tmp_path, capsys, monkeypatch):
    # argparse usage failures
    assert cli.main([]) == 2
    assert cli.main(["run"]) == 2  # no inputs: ValueError from the config
    capsys.readouterr()

    # missing file: data error
    assert cli.main(["run", "--in", str(tmp_path / "nope.csv")]) == 3
    assert "data error" in capsys.readouterr().err

    # bad numeric parameter: usage error
    data = _write_dataset(tmp_path)
    assert cli.main(_run_args(data, str(tmp_path / "x"))[:-2]
                    + ["--threshold", "7.0"]) == 2
    assert "usage error" in capsys.readouterr().err

    # numerical failures map to their own exit code; build_parser binds the
    # handler by module attribute, so patching it is enough
    def boom(args):
        raise NumericalError("synthetic failure")

    monkeypatch.setattr(cli, "_cmd_run", boom)
    assert cli.main(["run", "--in", data]) == 4
    assert "numerical error" in capsys.readouterr().err
