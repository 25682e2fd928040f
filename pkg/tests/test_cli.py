import json
import math

import cmvspec as cs
from cmvspec.cli import main

GOLDEN = cs.GOLDEN_MEAN


def qp_config(**spectrum):
    return {
        "model": {"kind": "QuasiPeriodic", "lambda": 0.5, "delta": 0.0,
                  "omega": [GOLDEN], "x0": [0.0],
                  "h": {"coeffs": [{"k": [1], "re": 0.5, "im": 0.0},
                                   {"k": [-1], "re": 0.5, "im": 0.0}]}},
        "spectrum": {"points": 96, "n_iter": 30_000, "refine_n_iter": 60_000,
                     **spectrum},
    }


def write(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestSpectrumCommand:
    def test_zero_coupling_single_gap(self, tmp_path):
        cfg = write(tmp_path, qp_config())
        assert main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 0
        gaps = json.loads((tmp_path / "gaps.json").read_text())["gaps"]
        assert len(gaps) == 1
        assert gaps[0]["label"] == [0]
        assert abs(gaps[0]["theta_plus"] - math.pi / 3) < 1e-3

    def test_gaps_alias(self, tmp_path):
        cfg = write(tmp_path, qp_config())
        assert main(["gaps", "--config", cfg, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "spectrum.csv").exists()

    def test_malformed_json_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"model": \n  broken')
        assert main(["spectrum", "--config", str(bad), "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err

    def test_empty_grid_exit_2(self, tmp_path, capsys):
        cfg = write(tmp_path, qp_config(points=0))
        assert main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "empty grid" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "none.json"),
                     "--out", str(tmp_path)]) == 2

    def test_deterministic_bytes(self, tmp_path):
        cfg = write(tmp_path, qp_config())
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["spectrum", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["spectrum", "--config", cfg, "--out", str(out2)]) == 0
        for name in ("spectrum.csv", "gaps.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_metadata_header(self, tmp_path):
        cfg = write(tmp_path, qp_config())
        main(["spectrum", "--config", cfg, "--out", str(tmp_path)])
        head = (tmp_path / "spectrum.csv").read_text().splitlines()[0]
        meta = json.loads(head[2:])
        assert meta["version"] == cs.__version__
        assert "config_hash" in meta and "conventions" in meta

    def test_grid_override(self, tmp_path):
        cfg = write(tmp_path, qp_config())
        main(["spectrum", "--config", cfg, "--out", str(tmp_path),
              "--grid", "48"])
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert len(lines) == 2 + 48


class TestTongueCommand:
    def test_baseline_ratio_near_one(self, tmp_path):
        cfg = qp_config()
        cfg["tongue"] = {"k": [1], "delta_max": 0.08, "steps": 5,
                         "n_iter": 60_000, "fit_fraction": 1.0}
        path = write(tmp_path, cfg)
        assert main(["tongue", "--config", path, "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "slopes.json").read_text())["results"]
        assert doc["failures"] == []
        assert 0.9 < doc["measured_over_predicted"] < 1.1

    def test_k_zero_warns_but_produces(self, tmp_path, capsys):
        cfg = qp_config()
        cfg["tongue"] = {"k": [0], "delta_max": 0.02, "steps": 5,
                         "n_iter": 20_000}
        path = write(tmp_path, cfg)
        code = main(["tongue", "--config", path, "--out", str(tmp_path)])
        assert code == 0
        assert "k=0" in capsys.readouterr().err
        assert (tmp_path / "tongue_0.csv").exists()

    def test_large_delta_warns(self, tmp_path, capsys):
        cfg = qp_config()
        cfg["tongue"] = {"k": [1], "delta_max": 0.9, "steps": 5,
                         "n_iter": 5_000}
        path = write(tmp_path, cfg)
        main(["tongue", "--config", path, "--out", str(tmp_path)])
        assert "perturbative" in capsys.readouterr().err


class TestQwalkCommand:
    def test_constant_coin_residual(self, tmp_path):
        cfg = {"qwalk": {"lambda": 0.5, "delta": 0.0, "omega": [GOLDEN],
                         "h": {"coeffs": []}, "sites": 32, "steps": 8}}
        path = write(tmp_path, cfg)
        assert main(["qwalk", "--config", path, "--out", str(tmp_path),
                     "--seed", "1"]) == 0
        doc = json.loads((tmp_path / "qwalk.json").read_text())
        assert doc["cgmv_residual"] < 1e-12
        assert doc["action_deviation"] < 1e-12
        assert doc["norm_drift"] < 1e-10
        lines = (tmp_path / "walk_final.csv").read_text().splitlines()
        assert lines[1] == "site,re_up,im_up,re_down,im_down"

    def test_structure_violation_exit_3(self, tmp_path):
        hadamard = [[[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
                    [[0.7071067811865476, 0.0], [-0.7071067811865476, 0.0]]]
        cfg = {"qwalk": {"coins": [hadamard] * 12, "sites": 12}}
        path = write(tmp_path, cfg)
        assert main(["qwalk", "--config", path, "--out", str(tmp_path)]) == 3

    def test_spectrum_subrun_matches_spectrum_command(self, tmp_path):
        cfg = {"qwalk": {"lambda": 0.5, "delta": 0.0, "omega": [GOLDEN],
                         "h": {"coeffs": []}, "sites": 24, "steps": 4,
                         "spectrum": True, "points": 96, "n_iter": 30_000}}
        path = write(tmp_path, cfg)
        assert main(["qwalk", "--config", path, "--out", str(tmp_path)]) == 0
        walk_gaps = json.loads((tmp_path / "walk_gaps.json").read_text())["gaps"]
        # same gaps as running the spectrum command on the mapped model
        cfg2 = {"model": {"kind": "PeriodTwo", "lambda1": 0.5, "lambda2": 0.0,
                          "delta": 0.0, "omega": [GOLDEN / 2], "x0": [0.0],
                          "h": {"coeffs": []}},
                "spectrum": {"points": 96, "n_iter": 30_000}}
        path2 = write(tmp_path, cfg2, "config2.json")
        out2 = tmp_path / "direct"
        assert main(["spectrum", "--config", path2, "--out", str(out2)]) == 0
        direct = json.loads((out2 / "gaps.json").read_text())["gaps"]
        assert len(walk_gaps) == len(direct)
        for a, b in zip(walk_gaps, direct):
            assert abs(a["theta_minus"] - b["theta_minus"]) < 1e-6
            assert a["half_shift"] == b["half_shift"]


class TestOracleCommand:
    def test_zero_coupling_no_violations(self, tmp_path):
        cfg = qp_config()
        cfg["oracle"] = {"size": 128, "margin": 0.02}
        path = write(tmp_path, cfg)
        assert main(["spectrum", "--config", path, "--out", str(tmp_path)]) == 0
        assert main(["oracle", "--config", path, "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "oracle.json").read_text())
        assert doc["report"]["ok"]

    def test_missing_gaps_exit_2(self, tmp_path):
        cfg = qp_config()
        path = write(tmp_path, cfg)
        assert main(["oracle", "--config", path, "--out", str(tmp_path)]) == 2

    def test_odd_size_exit_2(self, tmp_path):
        cfg = qp_config()
        cfg["oracle"] = {"size": 127}
        path = write(tmp_path, cfg)
        main(["spectrum", "--config", path, "--out", str(tmp_path)])
        assert main(["oracle", "--config", path, "--out", str(tmp_path)]) == 2

    def test_corrupted_gaps_reported(self, tmp_path):
        cfg = qp_config()
        cfg["oracle"] = {"size": 128, "margin": 0.02}
        path = write(tmp_path, cfg)
        main(["spectrum", "--config", path, "--out", str(tmp_path)])
        doc = json.loads((tmp_path / "gaps.json").read_text())
        doc["gaps"][0]["theta_minus"] = 2.8
        doc["gaps"][0]["theta_plus"] = 3.4
        (tmp_path / "gaps.json").write_text(json.dumps(doc))
        assert main(["oracle", "--config", path, "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "oracle.json").read_text())["report"]
        assert not report["ok"] and report["violations"]
