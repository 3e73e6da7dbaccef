import datetime as dt
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from newsflow import io
from newsflow.cli import main
from newsflow.core import EventRecord
from newsflow.errors import ConfigError, IngestionError

from conftest import dirichlet_corpus

SRC = str(Path(__file__).resolve().parent.parent / "src")


def write_theta(path, rows, dates=None):
    k = len(rows[0])
    lines = ["date," + ",".join(f"topic_{i}" for i in range(k))]
    dates = dates or [
        str(dt.date(1960, 1, 1) + dt.timedelta(days=i)) for i in range(len(rows))
    ]
    for d, row in zip(dates, rows):
        lines.append(d + "," + ",".join(repr(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


class TestIngestTheta:
    def test_well_formed(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(path, [[0.5, 0.5], [0.25, 0.75], [1.0, 0.0]])
        m = io.ingest_theta(path)
        assert len(m) == 3
        assert m.n_topics == 2
        assert m.source_id == "theta_x"

    def test_renormalizes_tiny_sum_error(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(path, [[0.5, 0.5 + 1e-7]])
        m = io.ingest_theta(path)
        assert abs(m.rows[0].sum() - 1.0) < 1e-12

    def test_large_sum_error_rejected_with_line(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(path, [[0.5, 0.5], [0.5, 0.6]])
        with pytest.raises(IngestionError, match="line 3"):
            io.ingest_theta(path)

    def test_duplicate_date_rejected_naming_it(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(path, [[0.5, 0.5], [0.5, 0.5]], dates=["1960-01-01", "1960-01-01"])
        with pytest.raises(IngestionError, match="1960-01-01"):
            io.ingest_theta(path)

    def test_negative_rejected(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(path, [[-0.1, 1.1]])
        with pytest.raises(IngestionError):
            io.ingest_theta(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        path.write_text("day,t0,t1\n1960-01-01,0.5,0.5\n")
        with pytest.raises(IngestionError, match="header"):
            io.ingest_theta(path)

    def test_unsorted_input_sorted(self, tmp_path):
        path = tmp_path / "theta_x.csv"
        write_theta(
            path, [[0.5, 0.5], [0.25, 0.75]], dates=["1960-01-02", "1960-01-01"]
        )
        m = io.ingest_theta(path)
        assert m.rows[0][0] == 0.25

    def test_round_trip_within_1e12(self, tmp_path, rng):
        m = dirichlet_corpus(40, 7, seed=3)
        path = tmp_path / "theta_iid.csv"
        io.emit_theta(m, path)
        back = io.ingest_theta(path, "iid")
        np.testing.assert_allclose(back.rows, m.rows, atol=1e-12)
        np.testing.assert_array_equal(back.dates, m.dates)


class TestIngestEvents:
    def test_bundled_catalog(self):
        events = io.load_bundled_events()
        # the published appendix table holds 59 rows
        assert len(events) == 59
        assert events[0] == EventRecord("Eisenhower President", dt.date(1953, 1, 20))
        assert EventRecord("Moon Landing", dt.date(1969, 7, 21)) in events

    def test_single_row(self, tmp_path):
        path = tmp_path / "ev.csv"
        path.write_text("name,date\nMoon Landing,1969-07-21\n")
        events = io.ingest_events(path)
        assert events == [EventRecord("Moon Landing", dt.date(1969, 7, 21))]

    def test_empty_file_warns(self, tmp_path):
        path = tmp_path / "ev.csv"
        path.write_text("")
        with pytest.warns(UserWarning):
            assert io.ingest_events(path) == []

    def test_bad_date_reports_line(self, tmp_path):
        path = tmp_path / "ev.csv"
        path.write_text("name,date\nMoon Landing,July 21 1969\n")
        with pytest.raises(IngestionError, match="line 2"):
            io.ingest_events(path)


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--preset", "small", "--out", str(out), "--seed", "2"]) == 0
    return out


CLUSTER_FLAGS = ["--window", "5", "--smoothing", "5", "--k-range", "2:6"]


class TestCli:
    def test_simulate_outputs(self, sim_dir):
        assert (sim_dir / "manifest.json").exists()
        assert len(list(sim_dir.glob("theta_*.csv"))) == 3
        assert (sim_dir / "events.csv").exists()

    def test_entropy_on_constant_corpus_all_zero(self, tmp_path):
        indir = tmp_path / "in"
        indir.mkdir()
        write_theta(indir / "theta_const.csv", [[0.5, 0.5]] * 200)
        (tmp_path / "ev.csv").write_text("name,date\nmid,1960-04-01\n")
        out = tmp_path / "out"
        rc = main(
            [
                "entropy",
                "--input-dir",
                str(indir),
                "--events",
                str(tmp_path / "ev.csv"),
                "--out",
                str(out),
                "--jump-min",
                "-40",
                "--jump-max",
                "40",
                "--jump-step",
                "10",
                "--window",
                "3",
            ]
        )
        assert rc == 0
        curve = out / "curve_const__mid.csv"
        offsets, values = io.ingest_series(curve)
        assert np.all(values <= 1e-12)

    def test_cluster_and_manifest_rerun_identical(self, sim_dir, tmp_path):
        out1 = tmp_path / "c1"
        out2 = tmp_path / "c2"
        base = [
            "cluster",
            "--input-dir",
            str(sim_dir),
            "--events",
            str(sim_dir / "events.csv"),
        ]
        assert main(base + ["--out", str(out1)] + CLUSTER_FLAGS) == 0
        assert main(["cluster", "--config", str(out1 / "manifest.json"), "--out", str(out2)]) == 0
        for name in ("distance_matrix.csv", "model.json", "archetype_1.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_cluster_recovers_planted_k4(self, sim_dir, tmp_path):
        out = tmp_path / "c"
        assert (
            main(
                [
                    "cluster",
                    "--input-dir",
                    str(sim_dir),
                    "--events",
                    str(sim_dir / "events.csv"),
                    "--out",
                    str(out),
                ]
                + CLUSTER_FLAGS
            )
            == 0
        )
        model = json.loads((out / "model.json").read_text())
        assert model["k"] == 4

    def test_flows_then_query_round_trip(self, sim_dir, tmp_path):
        fdir = tmp_path / "flows"
        args = [
            "flows",
            "--input-dir",
            str(sim_dir),
            "--events",
            str(sim_dir / "events.csv"),
            "--out",
            str(fdir),
            "--window",
            "5",
            "--smoothing",
            "5",
        ]
        assert main(args) == 0
        flow_files = sorted(fdir.glob("flow_*__*.csv"))
        assert len(flow_files) == 36
        qdir = tmp_path / "query"
        rc = main(
            [
                "query",
                "--input-dir",
                str(sim_dir),
                "--template",
                str(flow_files[0]),
                "--out",
                str(qdir),
                "--stride",
                "2",
                "--window",
                "5",
                "--smoothing",
                "5",
            ]
        )
        assert rc == 0
        lines = (qdir / "matches.csv").read_text().splitlines()
        assert lines[0] == "rank,source,start,cost"
        assert len(lines) > 3

    def test_baseline_outputs(self, sim_dir, tmp_path):
        out = tmp_path / "b"
        rc = main(
            [
                "baseline",
                "--input-dir",
                str(sim_dir),
                "--out",
                str(out),
                "--n-dates",
                "6",
                "--window",
                "3",
                "--baseline-window",
                "20",
                "--seed",
                "9",
            ]
        )
        assert rc == 0
        assert (out / "deviations.csv").exists()
        assert (out / "decades.csv").exists()

    def test_plot_renders(self, sim_dir, tmp_path):
        fdir = tmp_path / "flows"
        main(
            [
                "flows",
                "--input-dir",
                str(sim_dir),
                "--events",
                str(sim_dir / "events.csv"),
                "--out",
                str(fdir),
                "--window",
                "5",
            ]
        )
        assert main(["plot", "--out", str(fdir)]) == 0
        svg = (fdir / "flows.svg").read_bytes()
        assert svg.startswith(b"<?xml")

    def test_exclude_source(self, sim_dir, tmp_path):
        fdir = tmp_path / "flows-excl"
        rc = main(
            [
                "flows",
                "--input-dir",
                str(sim_dir),
                "--events",
                str(sim_dir / "events.csv"),
                "--out",
                str(fdir),
                "--window",
                "5",
                "--exclude-source",
                "src01",
            ]
        )
        assert rc == 0
        assert not list(fdir.glob("flow_src01__*.csv"))

    def test_env_override(self, sim_dir, tmp_path, monkeypatch):
        out = tmp_path / "env-out"
        monkeypatch.setenv("NEWSFLOW_OUT", str(out))
        rc = main(
            [
                "flows",
                "--input-dir",
                str(sim_dir),
                "--events",
                str(sim_dir / "events.csv"),
                "--window",
                "5",
            ]
        )
        assert rc == 0
        assert out.is_dir()

    def test_flag_beats_env(self, sim_dir, tmp_path, monkeypatch):
        env_out = tmp_path / "env-out"
        flag_out = tmp_path / "flag-out"
        monkeypatch.setenv("NEWSFLOW_OUT", str(env_out))
        rc = main(
            [
                "flows",
                "--input-dir",
                str(sim_dir),
                "--events",
                str(sim_dir / "events.csv"),
                "--out",
                str(flag_out),
                "--window",
                "5",
            ]
        )
        assert rc == 0
        assert flag_out.is_dir() and not env_out.exists()


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path):
        assert main(["flows", "--input-dir", str(tmp_path / "nope")]) == 2

    def test_data_error_is_3(self, tmp_path):
        indir = tmp_path / "in"
        indir.mkdir()
        (indir / "theta_bad.csv").write_text("date,topic_0,topic_1\n1960-01-01,0.9,0.9\n")
        rc = main(
            ["flows", "--input-dir", str(indir), "--events", str(tmp_path / "e.csv")]
        )
        assert rc == 3

    def test_numeric_error_is_4(self, tmp_path):
        indir = tmp_path / "in"
        indir.mkdir()
        write_theta(indir / "theta_x.csv", [[0.5, 0.5]] * 50)
        (tmp_path / "ev.csv").write_text("name,date\nmid,1960-01-25\n")
        rc = main(
            [
                "entropy",
                "--input-dir",
                str(indir),
                "--events",
                str(tmp_path / "ev.csv"),
                "--out",
                str(tmp_path / "out"),
                "--jump-min",
                "-2000",
                "--jump-max",
                "-1900",
                "--jump-step",
                "50",
                "--window",
                "0",
            ]
        )
        assert rc == 3 or rc == 4

    def test_error_record_is_machine_readable(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "newsflow", "flows", "--input-dir", str(tmp_path / "nope")],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "PYTHONPATH": SRC},
        )
        assert proc.returncode == 2
        record = json.loads(proc.stderr.strip().splitlines()[-1])
        assert record["error"] == "ConfigError"
        assert record["exit_code"] == 2

    def test_bad_k_range_flag(self, sim_dir):
        assert (
            main(
                [
                    "cluster",
                    "--input-dir",
                    str(sim_dir),
                    "--events",
                    str(sim_dir / "events.csv"),
                    "--k-range",
                    "four:five",
                ]
            )
            == 2
        )

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"bogus_key": 1}')
        assert main(["flows", "--config", str(cfg)]) == 2
