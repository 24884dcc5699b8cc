import json
import math

import pytest

from liprint.cli import main
from liprint.terrain import Heightmap


def read(path):
    return path.read_text().splitlines()


class TestSimulate:
    def test_row_count_and_exit(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["simulate", "--vx", "1.0", "--duration", "10", "--out", str(out)])
        assert rc == 0
        lines = read(out)
        assert len(lines) == 1001  # header + 1000 ticks
        assert lines[0].startswith("time,com_x,com_y,vel_x")
        assert lines[0].split(",")[-1] == "outcome_flag"
        assert (tmp_path / "t.events.json").exists()
        assert (tmp_path / "t.manifest.json").exists()

    def test_missing_vx_usage_error(self, tmp_path):
        rc = main(["simulate", "--duration", "10",
                   "--out", str(tmp_path / "t.csv")])
        assert rc == 1

    def test_impassable_gap_fails_with_manifest_reason(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["simulate", "--vx", "1.0", "--terrain", "gap:2.0:0.1",
                   "--duration", "2", "--out", str(out)])
        assert rc == 2
        manifest = json.loads((tmp_path / "t.manifest.json").read_text())
        assert manifest["outcome"]["status"] == "failed"
        assert "steppable" in manifest["outcome"]["reason"]

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--vx", "1.2", "--terrain", "rough:0.04:0.5:9",
                "--duration", "4", "--seed", "3"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        ea = (tmp_path / "a.events.json").read_bytes()
        eb = (tmp_path / "b.events.json").read_bytes()
        assert ea == eb

    def test_turn_flag(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["simulate", "--vx", "1.0", "--duration", "6", "--turn", "90",
                   "--turn-time", "2.0", "--replan", "every-tick",
                   "--out", str(out)])
        assert rc == 0

    def test_config_file_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("vx = 1.0\nduration = 2\n")
        out = tmp_path / "t.csv"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert len(read(out)) == 201
        # explicit flags still win over config values
        rc = main(["simulate", "--config", str(cfg), "--duration", "1",
                   "--out", str(out)])
        assert rc == 0
        assert len(read(out)) == 101


class TestSweep:
    def test_flat_grid(self, tmp_path):
        out = tmp_path / "s.csv"
        rc = main(["sweep", "--vx-list", "0.5,1.0,1.5,2.0", "--trials", "2",
                   "--duration", "6", "--reach-limit", "0.9", "--out", str(out)])
        assert rc == 0
        lines = read(out)
        assert lines[0] == "vx,terrain,replan,trials,successes,success_rate"
        assert len(lines) == 5
        for line in lines[1:]:
            assert line.endswith(",2,2,1")

    def test_zero_trials_empty_table(self, tmp_path):
        out = tmp_path / "s.csv"
        rc = main(["sweep", "--vx-list", "1.0", "--trials", "0", "--out", str(out)])
        assert rc == 0
        lines = read(out)
        assert len(lines) == 2
        assert lines[1].split(",")[3:] == ["0", "0", ""]

    def test_seeded_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--vx-list", "1.0", "--terrain", "rough:0.05:0.5:0",
                "--trials", "4", "--duration", "6", "--seed", "7"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestPlan:
    def test_defaults_match_offset_table(self, tmp_path, capsys):
        rc = main(["plan", "--vx", "1.0"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        w = math.sqrt(9.81 / 0.62)
        e = math.exp(w * 0.35)
        assert out["offset"][0] == pytest.approx(0.35 / (e - 1.0), abs=1e-12)
        assert out["offset"][1] == pytest.approx(0.3 / (e + 1.0), abs=1e-12)
        assert out["offset"][0] == pytest.approx(0.115752, abs=5e-6)
        assert out["offset"][1] == pytest.approx(0.059718, abs=5e-6)
        assert out["step"]["parity"] == 0

    def test_zero_velocity_zero_bx(self, tmp_path, capsys):
        rc = main(["plan", "--vx", "0.0"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["offset"][0] == 0.0

    def test_state_json(self, capsys):
        rc = main(["plan", "--vx", "1.0", "--state",
                   '{"com": [0.1, 0.0], "vel": [0.5, 0.0], '
                   '"stance": [0.0, -0.15], "parity": 1}'])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["step"]["parity"] == 1
        assert out["xi0"][0] == pytest.approx(0.1 + 0.5 / math.sqrt(9.81 / 0.62),
                                              rel=1e-12)

    def test_malformed_state_json(self):
        assert main(["plan", "--vx", "1.0", "--state", "{not json"]) == 1
        assert main(["plan", "--vx", "1.0", "--state", '{"com": [1]}']) == 1


class TestScore:
    def test_round_trip_row_counts(self, tmp_path):
        traj = tmp_path / "t.csv"
        rewards = tmp_path / "r.csv"
        assert main(["simulate", "--vx", "1.0", "--duration", "5",
                     "--out", str(traj)]) == 0
        rc = main(["score", "--traj", str(traj), "--vx", "1.0",
                   "--out", str(rewards)])
        assert rc == 0
        assert len(read(rewards)) == len(read(traj))

    def test_empty_file(self, tmp_path):
        traj = tmp_path / "empty.csv"
        traj.write_text("")
        out = tmp_path / "r.csv"
        assert main(["score", "--traj", str(traj), "--out", str(out)]) == 0
        assert len(read(out)) == 1  # header only

    def test_column_mismatch(self, tmp_path):
        traj = tmp_path / "bad.csv"
        traj.write_text("a,b,c\n1,2,3\n")
        assert main(["score", "--traj", str(traj),
                     "--out", str(tmp_path / "r.csv")]) == 1

    def test_ideal_synthetic_trajectory_hits_maxima(self, tmp_path):
        # synthetic rows: exact tracking, stance at target, C = 1
        from liprint.sim import CSV_COLUMNS
        traj = tmp_path / "ideal.csv"
        rows = [",".join(CSV_COLUMNS)]
        for i in range(5):
            v = {c: 0.0 for c in CSV_COLUMNS}
            v.update(time=i * 0.01, vel_x=1.0, icp_x=0.1, stance_y=-0.15,
                     target_x=0.9, target_y=0.15, contact_schedule=1.0,
                     phase_cos=1.0)
            rows.append(",".join(str(v[c]) for c in CSV_COLUMNS))
        traj.write_text("\n".join(rows) + "\n")
        out = tmp_path / "r.csv"
        assert main(["score", "--traj", str(traj), "--vx", "1.0",
                     "--out", str(out)]) == 0
        lines = read(out)
        header = lines[0].split(",")
        first = dict(zip(header, lines[1].split(",")))
        assert float(first["base_height"]) == 1.0
        assert float(first["base_orientation"]) == 2.0
        assert float(first["velocity_tracking"]) == 4.0
        assert float(first["contact_schedule"]) == 9.0
        assert float(first["reg_hip_regularization"]) == 1.25
        assert float(first["reg_base_tilting"]) == 1.0
        assert float(first["total"]) == pytest.approx(18.25, abs=1e-12)

    def test_joint_log(self, tmp_path):
        traj = tmp_path / "t.csv"
        assert main(["simulate", "--vx", "1.0", "--duration", "1",
                     "--out", str(traj)]) == 0
        n = len(read(traj)) - 1
        joints = tmp_path / "j.csv"
        header = "q0,q1,dq0,dq1,tau0,tau1,a0,a1,v_z"
        body = "\n".join("0.1,0.0,1.0,0.0,3.0,4.0,0.0,0.0,0.5" for _ in range(n))
        joints.write_text(header + "\n" + body + "\n")
        out = tmp_path / "r.csv"
        assert main(["score", "--traj", str(traj), "--joints", str(joints),
                     "--vx", "1.0", "--out", str(out)]) == 0
        lines = read(out)
        first = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert float(first["reg_joint_torques"]) == pytest.approx(-1e-4 * 25.0)
        assert float(first["reg_joint_velocity"]) == pytest.approx(-1e-3)
        assert float(first["reg_base_z_velocity"]) == pytest.approx(-1e-1 * 0.25)

    def test_joint_log_length_mismatch(self, tmp_path):
        traj = tmp_path / "t.csv"
        assert main(["simulate", "--vx", "1.0", "--duration", "1",
                     "--out", str(traj)]) == 0
        joints = tmp_path / "j.csv"
        joints.write_text("q0\n0.0\n")
        assert main(["score", "--traj", str(traj), "--joints", str(joints),
                     "--out", str(tmp_path / "r.csv")]) == 1


class TestTerrainGen:
    def test_generates_loadable_map(self, tmp_path):
        out = tmp_path / "m.json"
        rc = main(["terrain", "gen", "--spec", "gap:0.15:0.8:0.4",
                   "--extent=-1:-1:3:1", "--resolution", "0.05",
                   "--out", str(out)])
        assert rc == 0
        hmap = Heightmap.load(out)
        assert hmap.mask.any()
        assert not hmap.heights.any()

    def test_generated_map_usable_by_simulate(self, tmp_path):
        m = tmp_path / "m.json"
        assert main(["terrain", "gen", "--spec", "rough:0.03:0.5:2",
                     "--extent=-2:-2:8:2", "--resolution", "0.05",
                     "--out", str(m)]) == 0
        rc = main(["simulate", "--vx", "1.0", "--duration", "3",
                   "--terrain", f"file:{m}", "--out", str(tmp_path / "t.csv")])
        assert rc == 0

    def test_bad_extent(self, tmp_path):
        rc = main(["terrain", "gen", "--spec", "flat", "--extent", "1:2:3",
                   "--out", str(tmp_path / "m.json")])
        assert rc == 1


class TestUsage:
    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_bad_terrain_spec(self, tmp_path):
        rc = main(["simulate", "--vx", "1.0", "--terrain", "lava:9",
                   "--out", str(tmp_path / "t.csv")])
        assert rc == 1

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0
