"""Tests for the command-line interface."""
import csv
import json

import pytest
import yaml

from stereogan.main import create_parser, main

TINY = {
    "generator": {"residual_blocks": 1, "base_filters": 4},
    "discriminator": {"base_filters": 4},
    "training": {"log_every": 1},
}


def files_under(root) -> dict:
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Generate a small dataset and train one tiny model on it."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    code = main(
        ["gen-data", "--out", str(data), "--n", "2", "--size", "64x128", "--max-disparity", "4"]
    )
    assert code == 0
    config = root / "tiny.yaml"
    config.write_text(yaml.safe_dump(TINY), encoding="utf-8")
    code = main(
        [
            "train",
            "--config", str(config),
            "--data", str(data),
            "--out", str(root / "run"),
            "--crop", "64x128",
            "--epochs-mono", "1",
            "--epochs-stereo", "1",
        ]
    )
    assert code == 0
    return root


class TestParser:
    """Test argument parsing."""

    def test_subcommands(self):
        """Test every subcommand is registered."""
        parser = create_parser()
        assert parser.parse_args(["gen-data"]).command == "gen-data"
        assert parser.parse_args(["train"]).command == "train"
        assert parser.parse_args(["infer", "--checkpoint", "c", "--input", "i"]).command == "infer"
        assert parser.parse_args(["eval", "--checkpoint", "c"]).command == "eval"

    def test_bad_size(self):
        """Test a malformed size exits with the invalid-input code."""
        with pytest.raises(SystemExit) as excinfo:
            create_parser().parse_args(["gen-data", "--size", "64by128"])
        assert excinfo.value.code == 1
        assert main(["gen-data", "--size", "64by128"]) == 1

    def test_usage_errors_are_invalid_input(self):
        """Test unknown choices and flags return 1, not the failure code."""
        assert main(["train", "--mode", "stero"]) == 1
        assert main(["eval", "--checkpoint", "c", "--no-such-flag"]) == 1
        assert main([]) == 1

    def test_version_exits_cleanly(self, capsys):
        """Test --version returns 0."""
        assert main(["--version"]) == 0
        assert "stereogan" in capsys.readouterr().out


class TestGenData:
    """Test synthetic dataset generation."""

    def test_layout(self, workspace):
        """Test splits, counts and the manifest."""
        data = workspace / "data"
        for split in ("trainX", "trainY", "testX", "testY"):
            assert len(list((data / split / "left").glob("*.png"))) == 2
            assert len(list((data / split / "right").glob("*.png"))) == 2
        manifest = json.loads((data / "manifest.json").read_text())
        assert manifest["seed"] == 0
        assert manifest["max_disparity"] == 4
        assert set(manifest["splits"]) == {"trainX", "trainY", "testX", "testY"}
        assert (data / "config.yaml").exists()

    def test_rerun_is_byte_identical(self, workspace, tmp_path):
        """Test the same seed writes the same bytes."""
        args = ["gen-data", "--n", "2", "--size", "64x128", "--max-disparity", "4"]
        assert main(args + ["--out", str(tmp_path / "again")]) == 0
        assert files_under(tmp_path / "again") == files_under(workspace / "data")

    def test_mono_split(self, tmp_path):
        """Test --mono-count writes flat mono directories."""
        args = ["gen-data", "--out", str(tmp_path), "--n", "1", "--mono-count", "2"]
        assert main(args + ["--size", "64x128", "--max-disparity", "4"]) == 0
        assert len(list((tmp_path / "mono" / "trainX").glob("*.png"))) == 2

    def test_invalid_disparity_writes_nothing(self, tmp_path):
        """Test max_disparity >= width/8 exits 1 without output."""
        out = tmp_path / "bad"
        args = ["gen-data", "--out", str(out), "--size", "64x128", "--max-disparity", "16"]
        assert main(args) == 1
        assert not out.exists()


class TestTrain:
    """Test the training command."""

    def test_outputs(self, workspace):
        """Test the config echo, metrics log and checkpoints."""
        run = workspace / "run"
        echo = yaml.safe_load((run / "config.yaml").read_text())
        assert echo["training"]["lambda_cycle"] == 20.0
        assert echo["augment"]["crop_width"] == 128
        lines = (run / "metrics.jsonl").read_text().splitlines()
        assert len(lines) == 1 + 4
        assert json.loads(lines[-1])["kind"] == "stereo"
        assert (run / "final.pt").exists()

    def test_missing_data(self, tmp_path):
        """Test a missing dataset exits 1."""
        args = ["train", "--data", str(tmp_path / "none"), "--out", str(tmp_path / "run")]
        assert main(args) == 1


class TestInfer:
    """Test the inference command."""

    def run_infer(self, workspace, out, *extra) -> int:
        return main(
            [
                "infer",
                "--checkpoint", str(workspace / "run" / "final.pt"),
                "--input", str(workspace / "data" / "testX"),
                "--condition-dir", str(workspace / "data" / "testY"),
                "--out", str(out),
                *extra,
            ]
        )

    def test_stereo_outputs(self, workspace, tmp_path):
        """Test one left and one right output per input pair, reproducibly."""
        assert self.run_infer(workspace, tmp_path / "a") == 0
        assert self.run_infer(workspace, tmp_path / "b") == 0
        assert len(list((tmp_path / "a" / "left").glob("*.png"))) == 2
        assert len(list((tmp_path / "a" / "right").glob("*.png"))) == 2
        assert files_under(tmp_path / "a") == files_under(tmp_path / "b")

    def test_mode_mismatch(self, workspace, tmp_path):
        """Test asking for a different mode than the checkpoint's fails."""
        assert self.run_infer(workspace, tmp_path / "c", "--mode", "baseline") == 2

    def test_missing_right_directory(self, workspace, tmp_path):
        """Test a stereo input without right/ exits 1."""
        broken = tmp_path / "broken"
        (broken / "left").mkdir(parents=True)
        for image in (workspace / "data" / "testX" / "left").glob("*.png"):
            (broken / "left" / image.name).write_bytes(image.read_bytes())
        code = main(
            [
                "infer",
                "--checkpoint", str(workspace / "run" / "final.pt"),
                "--input", str(broken),
                "--condition-dir", str(workspace / "data" / "testY"),
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 1


class TestEval:
    """Test the evaluation command."""

    def test_self_comparison(self, workspace, tmp_path):
        """Test a model compared with itself ties on every row."""
        code = main(
            [
                "eval",
                "--checkpoint", str(workspace / "run" / "final.pt"),
                "--checkpoint-b", str(workspace / "run" / "final.pt"),
                "--data", str(workspace / "data"),
                "--seeds", "0", "1",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        with (tmp_path / "comparison.tsv").open(newline="") as handle:
            rows = list(csv.DictReader(handle, delimiter="\t"))
        assert len(rows) == 2 * 2
        assert {row["outcome"] for row in rows} <= {"tie", "unreliable"}
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["wins"] == summary["losses"] == 0

    def test_single_model_report(self, workspace, tmp_path):
        """Test one checkpoint writes a consistency report per seed."""
        code = main(
            [
                "eval",
                "--checkpoint", str(workspace / "run" / "final.pt"),
                "--data", str(workspace / "data"),
                "--seeds", "3",
                "--grids",
                "--out", str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "seed_3" / "consistency.tsv").exists()
        assert len(list((tmp_path / "seed_3" / "grids").glob("*.png"))) == 2
