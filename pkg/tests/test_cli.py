"""Command-line surface: outputs, exit codes, schema validation."""

import csv
import io
import json

import numpy as np

from rank1stab.cli import main
from rank1stab.config import load_config, parse_config

WORKED5 = {
    "delta": [5, 4, 3, 4, 5],
    "x": [-3, 1, -1, -3, 2],
    "y": [1, 1, 1, 1, 1],
    "e_matrix": [
        [2, -1, 0, -1, -1],
        [-1, 0, -1, 1, -1],
        [0, 1, -1, 0, 0],
        [0, 1, -1, 1, 0],
        [1, 2, 2, -1, 0],
    ],
}


def small_config(**overrides):
    doc = {
        "areas": [
            {
                "name": "east",
                "load_dev": 0.1,
                "agc_tc": 50.0,
                "generators": [
                    {"droop_r": 0.1, "participation": 0.6},
                    {"droop_r": 0.1, "participation": 0.4},
                ],
            },
            {
                "name": "west",
                "agc_tc": 50.0,
                "generators": [
                    {"droop_r": 0.1, "participation": 0.6},
                    {"droop_r": 0.1, "participation": 0.4},
                ],
            },
        ],
        "ties": [{"from_area": "east", "to_area": "west"}],
        "sim": {"dt": 0.02, "horizon": 600.0, "record_stride": 100},
    }
    doc.update(overrides)
    return doc


def write_json(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestCheck:
    def test_worked_example_file(self, tmp_path, capsys):
        path = write_json(tmp_path, "sys.json", WORKED5)
        code = main(["check", "--file", path])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["stable"] is True
        assert out["margin_mu"] == 0.35
        assert np.allclose(out["certificate_d"], [1 / 3, 1, 1, 1 / 3, 0.5])
        assert out["slack"] <= 1e-9

    def test_unstable_flags(self, capsys):
        code = main(["check", "--delta", "1,1", "--x", "1.5,-1.5", "--y", "1,1"])
        out = json.loads(capsys.readouterr().out)
        assert code == 1
        assert out["stable"] is False

    def test_verdict_only_when_certificate_inapplicable(self, capsys):
        code = main(["check", "--delta", "1,1", "--x", "0,0.5", "--y", "1,1"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["stable"] is True and out["certificate_d"] is None
        assert "certificate_note" in out

    def test_malformed_input(self, capsys):
        assert main(["check", "--delta", "1,1", "--x", "", "--y", "1,1"]) == 2
        assert main(["check", "--delta", "1,1", "--x", "1,abc", "--y", "1,1"]) == 2


class TestPerturb:
    def test_bound_and_scan(self, tmp_path, capsys):
        path = write_json(tmp_path, "sys.json", WORKED5)
        out_csv = tmp_path / "scan.csv"
        code = main(["perturb", "--file", path, "--out", str(out_csv)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert abs(summary["sigma_max"] - 0.1278) < 1e-3
        rows = list(csv.DictReader(out_csv.open()))
        by_sigma = {float(r["sigma"]): r for r in rows}
        zero = by_sigma[min(by_sigma, key=abs)]
        assert float(zero["lam_max_certified"]) < 0
        # inside the bound every scanned point is certified
        for s, r in by_sigma.items():
            if abs(s) < summary["sigma_max"]:
                assert r["negative_definite"] == "True"

    def test_hypothesis_violation_exit_code(self, tmp_path):
        doc = dict(WORKED5)
        doc["x"] = [0, 1, -1, -3, 2]
        path = write_json(tmp_path, "sys.json", doc)
        assert main(["perturb", "--file", path]) == 2


class TestSvdCond:
    def test_satisfied(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(4)
        v = np.abs(rng.standard_normal(4)) + 0.3
        s = 2.0 * np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))
        s += 0.02 * rng.standard_normal((4, 4))
        path = write_json(tmp_path, "svd.json",
                          {"delta": [6.0] * 4, "s_matrix": s.tolist()})
        code = main(["svd-cond", "--file", path])
        out = json.loads(capsys.readouterr().out)
        assert out["applicable"] and out["satisfied"]
        assert code == 0

    def test_not_satisfied_exit(self, tmp_path, capsys):
        path = write_json(tmp_path, "svd.json",
                          {"delta": [0.1] * 2,
                           "s_matrix": [[5.0, 0.1], [0.2, 3.0]]})
        assert main(["svd-cond", "--file", path]) == 1


class TestSimulate:
    def test_both_modes_summary(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "net.json", small_config())
        code = main(["simulate", "--config", cfg, "--mode", "both",
                     "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        for area in ("east", "west"):
            assert summary["full"][area]["final_abs_ace"] < 1e-4
        assert "eta_gaps" in summary
        assert (tmp_path / "trace_full.csv").exists()
        assert (tmp_path / "trace_reduced.csv").exists()
        header = (tmp_path / "trace_full.csv").open().readline().strip().split(",")
        assert header[0] == "t" and "ace:east" in header

    def test_jobs_flag_parallel_matches_serial(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "net.json", small_config())
        main(["simulate", "--config", cfg, "--mode", "both", "--out",
              str(tmp_path / "a")])
        serial = capsys.readouterr().out
        main(["simulate", "--config", cfg, "--mode", "both", "--out",
              str(tmp_path / "b"), "--jobs", "2"])
        parallel = capsys.readouterr().out
        a = json.loads(serial)
        b = json.loads(parallel)
        assert a["full"] == b["full"]
        assert (tmp_path / "a" / "trace_full.csv").read_text() == \
               (tmp_path / "b" / "trace_full.csv").read_text()

    def test_zero_disturbance(self, tmp_path, capsys):
        doc = small_config()
        doc["areas"][0]["load_dev"] = 0.0
        doc["sim"]["horizon"] = 50.0
        cfg = write_json(tmp_path, "net.json", doc)
        code = main(["simulate", "--config", cfg, "--mode", "full",
                     "--out", str(tmp_path)])
        summary = json.loads(capsys.readouterr().out)
        assert code == 0
        assert summary["full"]["east"]["final_abs_ace"] == 0.0

    def test_infeasible_proceeds_with_warning(self, tmp_path, capsys, caplog):
        doc = small_config()
        doc["areas"][0]["load_dev"] = 1.5
        doc["sim"]["horizon"] = 50.0
        cfg = write_json(tmp_path, "net.json", doc)
        with caplog.at_level("WARNING", logger="rank1stab.sim"):
            code = main(["simulate", "--config", cfg, "--mode", "full",
                         "--out", str(tmp_path)])
        assert code == 0
        assert any("capacity" in rec.message for rec in caplog.records)


class TestBodeAndStudies:
    def test_bode_ideal_bias_peak_one(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "net.json", small_config())
        out_csv = tmp_path / "bode.csv"
        code = main(["bode", "--config", cfg, "--area", "east",
                     "--out", str(out_csv)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert abs(summary["peak_analytic"] - 1.0) < 1e-12
        rows = list(csv.DictReader(out_csv.open()))
        mags = [float(r["magnitude"]) for r in rows]
        assert abs(max(mags) - 1.0) < 1e-4

    def test_bode_overbias_lifts_peak(self, tmp_path, capsys):
        doc = small_config()
        doc["areas"][0]["bias_b"] = 42.0  # 2x the frequency characteristic
        cfg = write_json(tmp_path, "net.json", doc)
        code = main(["bode", "--config", cfg, "--area", "1"])
        out = capsys.readouterr().out.splitlines()
        summary = json.loads(out[0])
        assert code == 0
        assert summary["peak_analytic"] > 1.0
        assert abs(summary["peak_sweep"] - summary["peak_analytic"]) \
            <= 0.01 * summary["peak_analytic"]

    def test_bode_requires_uniform_tau(self, tmp_path):
        doc = small_config()
        doc["areas"][0]["agc_tc"] = 80.0
        cfg = write_json(tmp_path, "net.json", doc)
        assert main(["bode", "--config", cfg, "--area", "east"]) == 2

    def test_margin_study_csv(self, tmp_path, capsys):
        doc = small_config()
        doc["areas"][0]["generators"][0]["droop_r"] = 0.05  # heterogeneous beta
        cfg = write_json(tmp_path, "net.json", doc)
        code = main(["margin-study", "--config", cfg,
                     "--kappas", "0.25,0.5,1,2,4"])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        lam = [float(r["q_min_eig"]) for r in rows]
        assert all(lam[i + 1] >= lam[i] - 1e-9 for i in range(len(lam) - 1))
        assert rows[0]["bound_holds"] == "False"  # heterogeneous underbias

    def test_feasibility_exit_codes(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "net.json", small_config())
        assert main(["feasibility", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {"east": True, "west": True}
        doc = small_config()
        doc["areas"][0]["load_dev"] = 2.0
        cfg = write_json(tmp_path, "net2.json", doc)
        assert main(["feasibility", "--config", cfg]) == 1


class TestSchema:
    def test_unknown_key_rejected(self, tmp_path):
        doc = small_config()
        doc["unexpected"] = 1
        cfg = write_json(tmp_path, "net.json", doc)
        assert main(["feasibility", "--config", cfg]) == 2
        doc = small_config()
        doc["areas"][0]["typo_field"] = 2
        cfg = write_json(tmp_path, "net2.json", doc)
        assert main(["feasibility", "--config", cfg]) == 2

    def test_missing_file(self):
        assert main(["feasibility", "--config", "/nonexistent.json"]) == 2

    def test_parallel_ties_are_merged(self, tmp_path):
        doc = small_config()
        doc["ties"] = [
            {"from_area": "east", "to_area": "west", "stiffness_t": 2.0},
            {"from_area": "west", "to_area": "east", "stiffness_t": 3.0},
        ]
        cfg = write_json(tmp_path, "net.json", doc)
        net = load_config(cfg).network()
        assert len(net.ties) == 1
        assert net.ties[0].stiffness_t == 5.0

    def test_roundtrip_identical_model(self, tmp_path):
        cfg = write_json(tmp_path, "net.json", small_config())
        doc1 = load_config(cfg)
        doc2 = parse_config(json.loads(doc1.to_json()))
        assert doc1.doc == doc2.doc
        n1, n2 = doc1.network(), doc2.network()
        assert n1.areas == n2.areas
        assert n1.ties == n2.ties
        assert np.array_equal(n1.sched_ni, n2.sched_ni)
