"""CLI: config validation, dataset schema, determinism, exit codes."""

import json
import math

import numpy as np
import pytest

from pecwedge.cli import ConfigError, main, run, validate_config

DECAY_CFG = {
    "mode": "decay",
    "wedge": {"interior_angle": math.pi / 2},
    "orientation": [0.0, 1.0, 0.0],
    "grid": {"x": [-0.5, 0.5], "y": [-0.5, 0.5], "n": [5, 5]},
    "truncation": [8, 8],
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


class TestValidation:
    def test_unknown_key_rejected_with_path(self):
        cfg = dict(DECAY_CFG)
        cfg["speling"] = 1
        with pytest.raises(ConfigError, match=r"config\.speling: unknown key"):
            validate_config(cfg)

    def test_nested_unknown_key(self):
        cfg = json.loads(json.dumps(DECAY_CFG))
        cfg["grid"]["nx"] = 7
        with pytest.raises(ConfigError, match=r"config\.grid\.nx"):
            validate_config(cfg)

    def test_missing_required(self):
        cfg = {k: v for k, v in DECAY_CFG.items() if k != "grid"}
        with pytest.raises(ConfigError, match=r"config\.grid"):
            validate_config(cfg)

    def test_bad_mode(self):
        with pytest.raises(ConfigError, match=r"config\.mode"):
            validate_config({"mode": "heatmap"})

    def test_grid_resolution_minimum(self):
        cfg = json.loads(json.dumps(DECAY_CFG))
        cfg["grid"]["n"] = [1, 5]
        with pytest.raises(ConfigError, match=r"config\.grid\.n\[0\]"):
            validate_config(cfg)

    def test_convergence_requires_half_space(self):
        cfg = {
            "mode": "convergence",
            "wedge": {"interior_angle": math.pi / 2},
            "heights": {"min": 0.1, "max": 1.0, "count": 3},
            "truncations": [[10, 10]],
        }
        with pytest.raises(ConfigError, match="interior angle pi"):
            validate_config(cfg)


class TestRun:
    def test_degenerate_grid_schema(self, tmp_path):
        cfg = json.loads(json.dumps(DECAY_CFG))
        cfg["grid"] = {"x": [0.1, 0.2], "y": [0.3, 0.4], "n": [2, 2]}
        out = tmp_path / "mini.csv"
        code = run(cfg, out_path=str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x_lambda,y_lambda,z_lambda,value,tail,in_vacuum"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert len(first) == 6
        assert first[-1] in ("0", "1")

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run(json.loads(json.dumps(DECAY_CFG)), out_path=str(out1))
        run(json.loads(json.dumps(DECAY_CFG)), out_path=str(out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_conductor_cells_masked(self, tmp_path):
        out = tmp_path / "mask.csv"
        run(json.loads(json.dumps(DECAY_CFG)), out_path=str(out))
        rows = [l.split(",") for l in out.read_text().splitlines()[1:]]
        masked = [r for r in rows if r[-1] == "0"]
        assert masked and all(r[3] == "nan" for r in masked)
        lit = [r for r in rows if r[-1] == "1"]
        assert lit and all(r[3] != "nan" for r in lit)

    def test_manifest_written(self, tmp_path):
        out = tmp_path / "m.csv"
        run(json.loads(json.dumps(DECAY_CFG)), out_path=str(out))
        manifest = json.loads((tmp_path / "m.csv.manifest.json").read_text())
        assert manifest["truncation"] == [8, 8]
        assert manifest["rows"] == 25
        assert "config_sha256" in manifest and "wall_time_s" in manifest

    def test_json_format(self, tmp_path):
        out = tmp_path / "d.json"
        run(json.loads(json.dumps(DECAY_CFG)), out_path=str(out), fmt="json")
        doc = json.loads(out.read_text())
        assert doc["columns"][0] == "x_lambda"
        assert len(doc["rows"]) == 25

    def test_tail_tolerance_exit_code(self, tmp_path):
        cfg = json.loads(json.dumps(DECAY_CFG))
        cfg["grid"] = {"x": [1.5, 2.5], "y": [1.5, 2.5], "n": [2, 2]}
        cfg["truncation"] = [3, 3]
        cfg["tail_tolerance"] = 1e-12
        assert run(cfg, out_path=str(tmp_path / "t.csv")) == 3

    def test_green_point(self, tmp_path):
        cfg = {
            "mode": "green",
            "wedge": {"interior_angle": math.pi},
            "points": {"r": [0.0, 0.3, 0.0], "r_prime": [0.0, 0.3, 0.0]},
            "truncation": [10, 10],
        }
        out = tmp_path / "g.csv"
        assert run(cfg, out_path=str(out)) == 0
        rows = [l.split(",") for l in out.read_text().splitlines()[1:]]
        assert len(rows) == 9
        vals = {(r[0], r[1]): float(r[2]) for r in rows}
        # normal to the mirror at height 0.3: the yy entry is the normal rate
        from pecwedge.oracles import halfspace_rate

        assert vals[("1", "1")] == pytest.approx(halfspace_rate([0, 1, 0], 0.3, 2 * math.pi), rel=1e-3)

    def test_sted_mode(self, tmp_path):
        cfg = {
            "mode": "sted",
            "sted": {"radii": [0.1], "samples": 51},
        }
        out = tmp_path / "s.csv"
        assert run(cfg, out_path=str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "r_lambda,R_lambda,h,eta,P"
        assert len(lines) == 52
        manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
        assert "spots" in manifest and "0.1" in manifest["spots"]


class TestMain:
    def test_cli_roundtrip(self, tmp_path):
        cfgp = write_cfg(tmp_path, DECAY_CFG)
        out = tmp_path / "cli.csv"
        assert main(["decay-map", "--config", str(cfgp), "--out", str(out)]) == 0
        assert out.exists()

    def test_mode_subcommand_mismatch(self, tmp_path):
        cfgp = write_cfg(tmp_path, DECAY_CFG)
        assert main(["cdr-map", "--config", str(cfgp), "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_config_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["decay-map", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_trunc_flag(self, tmp_path):
        cfgp = write_cfg(tmp_path, DECAY_CFG)
        assert main(["decay-map", "--config", str(cfgp), "--out", str(tmp_path / "x.csv"), "--trunc", "a,b"]) == 2

    def test_trunc_override_recorded(self, tmp_path):
        cfgp = write_cfg(tmp_path, DECAY_CFG)
        out = tmp_path / "o.csv"
        assert main(["decay-map", "--config", str(cfgp), "--out", str(out), "--trunc", "6,7"]) == 0
        manifest = json.loads((tmp_path / "o.csv.manifest.json").read_text())
        assert manifest["truncation"] == [6, 7]

    def test_convergence_subcommand(self, tmp_path):
        cfg = {
            "mode": "convergence",
            "wedge": {"interior_angle": math.pi},
            "heights": {"min": 0.1, "max": 0.5, "count": 3},
            "truncations": [[8, 8], [14, 14]],
        }
        cfgp = write_cfg(tmp_path, cfg)
        out = tmp_path / "conv.csv"
        assert main(["convergence", "--config", str(cfgp), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "height_lambda,m_max,p_max,relative_error"
        assert len(lines) == 7
        errs = np.array([float(l.split(",")[-1]) for l in lines[1:]]).reshape(3, 2)
        assert np.all(errs[:, 1] <= errs[:, 0] + 1e-12)  # monotone in truncation
