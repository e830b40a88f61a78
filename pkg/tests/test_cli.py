"""Command-line surface: subcommands, file contracts, exit codes, determinism."""

import json
from pathlib import Path

import pytest

from axelrod_lab.cli import main, parse_grid, parse_q


def read_bytes_tree(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}


class TestParsing:
    def test_parse_q(self):
        assert parse_q("2,4") == (2, 4)
        assert parse_q("2, 4") == (2, 4)
        assert parse_q("3") == (3,)

    def test_parse_grid_range(self):
        assert parse_grid("2..3") == [(2, 2), (2, 3), (3, 2), (3, 3)]

    def test_parse_grid_pairs(self):
        assert parse_grid("2,2;2,4;3,3") == [(2, 2), (2, 4), (3, 3)]


class TestTheory:
    def test_stdout_contains_exact_values(self, capsys):
        assert main(["theory", "--q", "2,4"]) == 0
        out = capsys.readouterr().out
        assert "1/512" in out

    def test_h1_2_5(self, capsys):
        assert main(["theory", "--q", "2,5"]) == 0
        assert "1/10" in capsys.readouterr().out

    def test_grid_file(self, tmp_path):
        out = tmp_path / "theory.csv"
        assert main(["theory", "--grid", "2..6", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config:")
        assert lines[1] == "q1,q2,p0,p1,p2,p11,p12,h1,h2,regime"
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 25
        # symmetric pairs carry identical margins
        by_pair = {(r[0], r[1]): r for r in rows}
        for a in range(2, 7):
            for b in range(2, 7):
                assert by_pair[(str(a), str(b))][7] == by_pair[(str(b), str(a))][7]

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["theory", "--grid", "2..4", "--out", str(a)])
        main(["theory", "--grid", "2..4", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_needs_q_or_grid(self):
        assert main(["theory"]) == 1


class TestSimulate:
    def test_files_and_determinism(self, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        args = ["simulate", "--q", "2,4", "--length", "80", "--t-max", "8",
                "--replicates", "2", "--seed", "7"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        t1, t2 = read_bytes_tree(out1), read_bytes_tree(out2)
        assert set(t1) == set(t2)
        assert "regime.csv" in t1 and "densities_r000.csv" in t1
        for name in t1:
            assert t1[name] == t2[name], name

    def test_density_header(self, tmp_path):
        out = tmp_path / "o"
        main(["simulate", "--q", "2,3", "--length", "60", "--t-max", "4",
              "--seed", "1", "--out", str(out)])
        lines = (out / "densities_r000.csv").read_text().splitlines()
        assert lines[1] == "t,ubar1,ubar2,u1,u2,blockades"
        first = lines[2].split(",")
        assert float(first[0]) == 0.0  # initial snapshot included

    def test_jsonl_format(self, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "--q", "2,3", "--length", "50", "--t-max", "3",
                     "--seed", "2", "--format", "jsonl", "--out", str(out)]) == 0
        lines = (out / "regime.jsonl").read_text().splitlines()
        assert "config" in json.loads(lines[0])
        row = json.loads(lines[1])
        assert set(row) == {"q1", "q2", "replicate", "absorbed", "t_abs",
                            "surviving_blockade_density"}

    def test_event_log_full_engine(self, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate", "--q", "2,3", "--length", "40", "--t-max", "2",
                     "--seed", "3", "--event-log", "--out", str(out)]) == 0
        lines = (out / "events_r000.jsonl").read_text().splitlines()
        assert len(lines) > 2
        rec = json.loads(lines[1])
        assert set(rec) == {"t", "x", "i", "B", "U", "active"}
        assert rec["i"] in (1, 2) and rec["B"] in (-1, 1)
        times = [json.loads(ln)["t"] for ln in lines[1:]]
        assert times == sorted(times)

    def test_single_feature_is_usage_error(self, capsys):
        assert main(["simulate", "--q", "2", "--length", "100"]) == 1
        err = capsys.readouterr().err
        assert "two-feature" in err

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"q": "2,3", "length": 60, "t_max": 3.0}))
        out = tmp_path / "o"
        assert main(["simulate", "--config", str(cfg), "--length", "80",
                     "--seed", "4", "--out", str(out)]) == 0
        header = (out / "regime.csv").read_text().splitlines()[0]
        resolved = json.loads(header.removeprefix("# config: "))
        assert resolved["length"] == 80  # flag wins
        assert resolved["q"] == [2, 3]  # config supplies the rest


class TestVerify:
    def test_coupling_pass(self, capsys):
        code = main(["verify", "coupling", "--q", "3,3", "--length", "150",
                     "--max-events", "3000", "--seed", "5"])
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_lemma4_insufficient_data_fails(self, capsys):
        code = main(["verify", "lemma4", "--q", "2,5", "--length", "300",
                     "--t-max", "0.2", "--seed", "6"])
        assert code == 2
        assert "FAIL" in capsys.readouterr().out

    def test_unknown_target_usage_error(self):
        assert main(["verify", "lemma99"]) == 1

    def test_lemma7_pass(self, capsys):
        code = main(["verify", "lemma7-window", "--q", "2,5",
                     "--length", "100000", "--seed", "7"])
        assert code == 0
        out = capsys.readouterr().out
        assert "target=0.1" in out and "PASS" in out

    def test_lemma7_window_csv(self, tmp_path):
        out = tmp_path / "window.csv"
        code = main(["verify", "lemma7-window", "--q", "2,5",
                     "--length", "30000", "--seed", "8", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "q1,q2,L,value"
        q1, q2, L, value = lines[2].split(",")
        assert (q1, q2, L) == ("2", "5", "30000")
        assert abs(float(value) - 0.1) < 0.05


class TestSweep:
    def test_small_grid(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = main(["sweep", "--grid", "2,2;2,4", "--length", "100",
                     "--replicates", "3", "--t-max", "1000000", "--seed", "8",
                     "--out", str(out), "--threads", "2"])
        assert code == 0
        rows = (out / "regime.csv").read_text().splitlines()
        assert rows[1] == "q1,q2,replicate,absorbed,t_abs,surviving_blockade_density"
        assert len(rows) == 2 + 6
        agg = (out / "aggregate.csv").read_text().splitlines()
        assert len(agg) == 2 + 2
        assert agg[1].endswith("predicted_regime")
        assert "fixates_strong" in agg[3]

    def test_empty_grid_usage_error(self):
        assert main(["sweep", "--grid", " ", "--length", "50"]) == 1

    def test_missing_grid_usage_error(self):
        assert main(["sweep", "--length", "50"]) == 1


def test_bad_subcommand_exit_code():
    assert main(["frobnicate"]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0
