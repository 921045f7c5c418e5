import json
import subprocess
import sys

import pytest

from parsegait.cli import main


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "parsegait.cli", *argv], capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "ds"
    code = main(["synth", str(root), "--identities", "2", "--clips", "2",
                 "--conditions", "nm", "--frames", "5"])
    assert code == 0
    return root


class TestExitCodes:
    def test_validation_error_is_one(self, tmp_path):
        # no manifest in an empty directory
        assert main(["render", str(tmp_path)]) == 1

    def test_io_error_is_two(self, tmp_path, capsys):
        blocked = tmp_path / "blocked"
        blocked.write_text("a file where the dataset root should go")
        assert main(["synth", str(blocked), "--identities", "1", "--clips", "1",
                     "--conditions", "nm", "--frames", "2"]) == 2
        assert "i/o error" in capsys.readouterr().err

    def test_usage_error_is_one(self):
        assert run_cli("no-such-command").returncode == 1

    def test_bad_override_is_one(self, dataset, capsys):
        assert main(["render", str(dataset), "--radius", "wide"]) == 1
        err = capsys.readouterr().err
        assert "error:" in err and "radius" in err

    def test_bad_flag_choice_is_one(self):
        assert run_cli("bench", "--backend", "gpu", "--frames", "2").returncode == 1


class TestSynth:
    def test_reports_sequence_count(self, dataset, capsys):
        # fixture already ran synth; run again into a sibling dir for the message
        root = dataset.parent / "ds2"
        assert main(["synth", str(root), "--identities", "1", "--clips", "1",
                     "--conditions", "nm", "--frames", "3"]) == 0
        out = capsys.readouterr().out
        assert "wrote 1 sequences (3 frames)" in out

    def test_bad_condition_is_one(self, tmp_path, capsys):
        assert main(["synth", str(tmp_path / "x"), "--conditions", "zz"]) == 1
        assert "error:" in capsys.readouterr().err


class TestStages:
    def test_render_fuse_eval_flow(self, dataset, capsys):
        assert main(["render", str(dataset)]) == 0
        assert "rendered 20 frames" in capsys.readouterr().out
        assert main(["fuse", str(dataset)]) == 0
        assert "fused 20 frames" in capsys.readouterr().out
        assert main(["eval", str(dataset)]) == 0
        out = capsys.readouterr().out
        assert "fused rank1" in out
        assert (dataset / "out" / "eval_report.json").is_file()

    def test_fuse_before_render_is_one(self, tmp_path, capsys):
        assert main(["synth", str(tmp_path / "d"), "--identities", "1", "--clips", "1",
                     "--conditions", "nm", "--frames", "3"]) == 0
        capsys.readouterr()
        assert main(["fuse", str(tmp_path / "d")]) == 1
        assert "render command" in capsys.readouterr().err

    def test_config_mismatch_refused_then_forced(self, dataset, capsys):
        main(["render", str(dataset)])
        capsys.readouterr()
        assert main(["render", str(dataset), "--radius", "4"]) == 1
        assert "force" in capsys.readouterr().err
        assert main(["render", str(dataset), "--radius", "4", "--force"]) == 0
        capsys.readouterr()
        # restore the default geometry for later tests
        assert main(["render", str(dataset), "--force"]) == 0
        capsys.readouterr()

    def test_entropy_over_both_strategies(self, dataset, capsys):
        main(["render", str(dataset)])
        main(["fuse", str(dataset)])
        main(["fuse", str(dataset), "--strategy", "dcf", "--force"])
        capsys.readouterr()
        assert main(["entropy", str(dataset), "--strategies", "crf,dcf"]) == 0
        out = capsys.readouterr().out
        assert "sil:" in out and "crf:" in out and "dcf:" in out
        assert "delta crf - sil: +" in out
        blob = json.loads((dataset / "out" / "entropy_report.json").read_text())
        assert blob["rows"]["crf"]["entropy_bits"] > blob["rows"]["sil"]["entropy_bits"]

    def test_sweep_pairs_flag(self, dataset, capsys):
        assert main(["sweep", str(dataset), "--pairs", "3x3,10x12"]) == 0
        out = capsys.readouterr().out
        assert "radius 3.0" in out and "radius 10.0 width 12.0" in out
        assert "(default)" in out

    def test_sweep_bad_pair_is_one(self, dataset, capsys):
        assert main(["sweep", str(dataset), "--pairs", "3-3"]) == 1
        assert "RADIUSxWIDTH" in capsys.readouterr().err


class TestBench:
    def test_python_backend_reports_rate(self, capsys):
        assert main(["bench", "--backend", "python", "--frames", "20",
                     "--repeats", "1"]) == 0
        out = capsys.readouterr().out
        assert "python:" in out and "ms/frame" in out

    def test_all_backends(self, capsys):
        assert main(["bench", "--frames", "10", "--repeats", "1"]) == 0
        out = capsys.readouterr().out
        assert "python:" in out


class TestConfigPlumbing:
    def test_config_file_plus_flag_override(self, dataset, tmp_path, capsys):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("radius = 4.0\n")
        # flag wins over file: radius back to default
        assert main(["render", str(dataset), "--config", str(cfg_file),
                     "--radius", "10.0"]) == 0
        capsys.readouterr()

    def test_missing_config_file_is_two(self, dataset, capsys):
        assert main(["render", str(dataset), "--config", "/nonexistent.cfg"]) == 2
        assert "i/o error" in capsys.readouterr().err
