import json

import numpy as np
import pytest

from tabmem.cli import argv_from_run_config, main
from tabmem.table import FeatureKind, Schema, Table, load_csv, save_schema, write_csv

from conftest import random_mixed_table

NUM = FeatureKind.NUMERICAL
CAT = FeatureKind.CATEGORICAL


@pytest.fixture
def workspace(tmp_path):
    rng = np.random.default_rng(0)
    train = random_mixed_table(rng, 40, with_target=True)
    synthetic = Table(train.schema, [train.row(int(i)) for i in rng.integers(40, size=30)])
    holdout = random_mixed_table(rng, 25, with_target=True)
    paths = {
        "schema": tmp_path / "schema.json",
        "train": tmp_path / "train.csv",
        "synthetic": tmp_path / "synthetic.csv",
        "holdout": tmp_path / "holdout.csv",
        "dir": tmp_path,
    }
    save_schema(train.schema, paths["schema"])
    write_csv(train, paths["train"])
    write_csv(synthetic, paths["synthetic"])
    write_csv(holdout, paths["holdout"])
    return paths, train


class TestAudit:
    def test_copy_reports_full_memorization(self, workspace, capsys):
        paths, train = workspace
        out = paths["dir"] / "report.json"
        synthetic_copy = paths["dir"] / "copy.csv"
        write_csv(train, synthetic_copy)
        code = main(
            [
                "audit",
                "--train", str(paths["train"]),
                "--synthetic", str(synthetic_copy),
                "--schema", str(paths["schema"]),
                "--out", str(out),
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "mem_ratio 100.00%" in printed
        report = json.loads(out.read_text())
        assert report["mem_ratio"] == 1.0
        assert report["mem_auc"] == 1.0
        assert report["run_config"]["command"] == "audit"

    def test_threshold_plumbed_through(self, workspace):
        paths, _ = workspace
        out = paths["dir"] / "report.json"
        code = main(
            [
                "audit",
                "--train", str(paths["train"]),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["schema"]),
                "--threshold", "0.5",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert json.loads(out.read_text())["threshold"] == 0.5

    def test_missing_schema_is_usage_error(self, workspace):
        paths, _ = workspace
        code = main(
            [
                "audit",
                "--train", str(paths["train"]),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["dir"] / "nope.json"),
                "--out", str(paths["dir"] / "r.json"),
            ]
        )
        assert code == 2

    def test_bad_data_is_data_error(self, workspace):
        paths, _ = workspace
        bad = paths["dir"] / "bad.csv"
        header = load_csv(paths["train"], load_schema_for(paths)).schema.column_names
        bad.write_text(",".join(header) + "\nnot_a_number," + ",".join(["x"] * (len(header) - 1)) + "\n")
        code = main(
            [
                "audit",
                "--train", str(bad),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["schema"]),
                "--out", str(paths["dir"] / "r.json"),
            ]
        )
        assert code == 1

    def test_histogram_csv_export(self, workspace):
        paths, _ = workspace
        out = paths["dir"] / "report.json"
        hist = paths["dir"] / "hist.csv"
        main(
            [
                "audit",
                "--train", str(paths["train"]),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["schema"]),
                "--bins", "10",
                "--out", str(out),
                "--histogram-csv", str(hist),
            ]
        )
        lines = hist.read_text().strip().splitlines()
        assert lines[0] == "bin_left,count"
        assert len(lines) == 11


def load_schema_for(paths):
    from tabmem.table import load_schema

    return load_schema(paths["schema"])


class TestAugmentCommand:
    def test_ratio_zero_identity_rows(self, workspace, capsys):
        paths, train = workspace
        out = paths["dir"] / "aug.csv"
        code = main(
            [
                "augment",
                "--train", str(paths["train"]),
                "--schema", str(paths["schema"]),
                "--mode", "cutmix",
                "--ratio", "0",
                "--seed", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert load_csv(out, train.schema) == load_csv(paths["train"], train.schema)

    def test_replay_from_embedded_config(self, workspace):
        paths, train = workspace
        out = paths["dir"] / "aug.csv"
        argv = [
            "augment",
            "--train", str(paths["train"]),
            "--schema", str(paths["schema"]),
            "--mode", "cutmixplus",
            "--ratio", "0.5",
            "--seed", "9",
            "--out", str(out),
        ]
        assert main(argv) == 0
        first = out.read_bytes()
        run_config = json.loads((paths["dir"] / "aug.csv.json").read_text())["run_config"]
        assert main(argv_from_run_config(run_config)) == 0
        assert out.read_bytes() == first


class TestFidelityCommand:
    def test_report_fields(self, workspace):
        paths, _ = workspace
        out = paths["dir"] / "fid.json"
        code = main(
            [
                "fidelity",
                "--real", str(paths["train"]),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["schema"]),
                "--holdout", str(paths["holdout"]),
                "--seed", "3",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        for key in ("shape_score", "trend_score", "c2st_score", "alpha_precision", "beta_recall", "dcr_probability"):
            assert 0.0 <= report[key] <= 1.0

    def test_dcr_omitted_without_holdout(self, workspace):
        paths, _ = workspace
        out = paths["dir"] / "fid.json"
        main(
            [
                "fidelity",
                "--real", str(paths["train"]),
                "--synthetic", str(paths["synthetic"]),
                "--schema", str(paths["schema"]),
                "--out", str(out),
            ]
        )
        assert "dcr_probability" not in json.loads(out.read_text())


class TestClusterCommand:
    def test_linked_pair_grouped(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        schema = Schema(features=(("f1", CAT), ("f2", CAT), ("f3", NUM)))
        rows = []
        for _ in range(80):
            f1 = "a" if rng.random() < 0.5 else "b"
            rows.append((f1, f1.upper(), float(rng.normal())))
        table = Table(schema, rows)
        schema_path = tmp_path / "s.json"
        train_path = tmp_path / "t.csv"
        save_schema(schema, schema_path)
        write_csv(table, train_path)
        code = main(
            ["cluster", "--train", str(train_path), "--schema", str(schema_path), "--threshold", "0.5"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["threshold"] == 0.5
        assert sorted(map(sorted, payload["clusters"])) == [["f1", "f2"], ["f3"]]


class TestClusterEtaMapping:
    def test_squared_mapping_weakens_mixed_association(self, tmp_path, capsys):
        # eta^2 < sqrt(eta^2) for partial association, so the squared mapping
        # can leave a num-cat pair unmerged where the sqrt mapping merges it.
        rng = np.random.default_rng(7)
        schema = Schema(features=(("n", NUM), ("c", CAT)))
        rows = [
            (float(i % 3) + 0.4 * float(rng.normal()), f"g{i % 3}")
            for i in range(120)
        ]
        save_schema(schema, tmp_path / "s.json")
        write_csv(Table(schema, rows), tmp_path / "t.csv")
        merged = {}
        for mapping in ("sqrt", "squared"):
            assert main(
                [
                    "cluster",
                    "--train", str(tmp_path / "t.csv"),
                    "--schema", str(tmp_path / "s.json"),
                    "--threshold", "0.1",
                    "--eta-mapping", mapping,
                ]
            ) == 0
            merged[mapping] = len(json.loads(capsys.readouterr().out)["clusters"])
        assert merged["sqrt"] == 1
        assert merged["squared"] == 2


class TestSimulateCommand:
    def test_emits_replication_stats(self, tmp_path, capsys):
        out = tmp_path / "sim.json"
        traj = tmp_path / "traj.csv"
        code = main(
            [
                "simulate",
                "--n-latents", "4",
                "--dim", "2",
                "--steps", "200",
                "--trajectories", "6",
                "--seed", "1",
                "--out", str(out),
                "--emit-trajectories", str(traj),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["replication_fraction"] >= 0.99
        lines = traj.read_text().strip().splitlines()
        assert lines[0] == "trajectory,step,t,x0,x1"
        assert len(lines) == 1 + 6 * 201


class TestReplayHelper:
    def test_round_trips_all_commands(self, workspace, capsys):
        paths, _ = workspace
        out = paths["dir"] / "report.json"
        argv = [
            "--threads", "2",
            "audit",
            "--train", str(paths["train"]),
            "--synthetic", str(paths["synthetic"]),
            "--schema", str(paths["schema"]),
            "--out", str(out),
        ]
        assert main(argv) == 0
        first = out.read_bytes()
        cfg = json.loads(out.read_text())["run_config"]
        replay = argv_from_run_config(cfg)
        assert replay[:2] == ["--threads", "2"]
        assert main(replay) == 0
        assert out.read_bytes() == first
