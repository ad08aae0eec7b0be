"""Ingestion, manifests, run configuration, report writers, and the CLI."""

import json
import math

import numpy as np
import pytest

from condcorr import (
    DataError,
    PriceSeries,
    RunConfig,
    SimConfig,
    ValidationError,
    ingest_csv,
    load_manifest,
    load_panel,
    load_run_config,
    run_condcorr,
    run_invstats,
    run_simulate,
    simulate_market,
    to_aligned_panel,
)
from condcorr.cli import main
from condcorr.io import fmt, write_price_csv

from conftest import calendar

CSV_HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def csv_file(tmp_path, name, rows, header=CSV_HEADER):
    path = tmp_path / name
    path.write_text(header + "".join(rows))
    return path


def quote(date, price):
    return f"{date},{price},{price},{price},{price},{price},0\n"


def small_config(**kw):
    base = dict(dt1=3, dt2=6, rho_grid=(-0.02, -0.01, 0.01, 0.02),
                chi_levels=(0.01,), ct_level=0.01, min_samples=2)
    base.update(kw)
    return RunConfig(**base)


def simulated_dataset(tmp_path, n_stocks=5, n_steps=400, p=0.1, seed=6):
    out = tmp_path / "dataset"
    run_simulate(SimConfig(n_stocks=n_stocks, n_steps=n_steps,
                           fear_probability=p, step_size=0.01, seed=seed), out)
    return out


class TestFmt:
    def test_twelve_significant_digits(self):
        assert fmt(1.0 / 3.0) == "0.333333333333"
        assert fmt(1.5) == "1.5"
        assert fmt(-0.05) == "-0.05"
        assert fmt(None) == "nan"
        assert fmt(123456789012345.0) == "1.23456789012e+14"


class TestIngest:
    def test_three_row_file(self, tmp_path):
        path = csv_file(tmp_path, "ACME.csv", [
            quote("2000-01-03", "100.0"),
            quote("2000-01-04", "101.5"),
            quote("2000-01-05", "99.25"),
        ])
        s = ingest_csv(path)
        assert s.ticker == "ACME"
        assert len(s) == 3
        np.testing.assert_array_equal(
            s.dates, np.array(["2000-01-03", "2000-01-04", "2000-01-05"],
                              dtype="datetime64[D]"))
        np.testing.assert_allclose(s.closes, [100.0, 101.5, 99.25])

    def test_rows_sorted_by_date(self, tmp_path):
        ordered = csv_file(tmp_path, "A.csv", [
            quote("2000-01-03", "100.0"),
            quote("2000-01-04", "101.5"),
            quote("2000-01-05", "99.25"),
        ])
        shuffled = csv_file(tmp_path, "B.csv", [
            quote("2000-01-05", "99.25"),
            quote("2000-01-03", "100.0"),
            quote("2000-01-04", "101.5"),
        ])
        a, b = ingest_csv(ordered), ingest_csv(shuffled)
        np.testing.assert_array_equal(a.dates, b.dates)
        np.testing.assert_array_equal(a.closes, b.closes)

    def test_ticker_override_and_price_column(self, tmp_path):
        path = tmp_path / "X.csv"
        path.write_text("Date,Close,Adj Close\n2000-01-03,10.0,9.5\n2000-01-04,11.0,10.5\n")
        adj = ingest_csv(path, ticker="NAMED")
        assert adj.ticker == "NAMED"
        np.testing.assert_allclose(adj.closes, [9.5, 10.5])
        raw = ingest_csv(path, price_column="Close")
        np.testing.assert_allclose(raw.closes, [10.0, 11.0])

    def test_zero_price_names_line(self, tmp_path):
        path = csv_file(tmp_path, "Z.csv", [
            quote("2000-01-03", "100.0"),
            quote("2000-01-04", "0.00"),
        ])
        with pytest.raises(DataError, match=r"Z\.csv:3.*non-positive"):
            ingest_csv(path)

    def test_bad_date_names_line(self, tmp_path):
        path = csv_file(tmp_path, "Z.csv", [quote("03/01/2000", "100.0")])
        with pytest.raises(DataError, match=r"Z\.csv:2.*bad date"):
            ingest_csv(path)

    def test_missing_price_names_line(self, tmp_path):
        path = csv_file(tmp_path, "Z.csv", [
            quote("2000-01-03", "100.0"),
            "2000-01-04,1,1,1,1,,0\n",
        ])
        with pytest.raises(DataError, match=r"Z\.csv:3.*missing"):
            ingest_csv(path)

    def test_unparseable_price_names_line(self, tmp_path):
        path = csv_file(tmp_path, "Z.csv", [quote("2000-01-03", "ten")])
        with pytest.raises(DataError, match=r"Z\.csv:2.*'ten'"):
            ingest_csv(path)

    def test_duplicate_date_names_both_lines(self, tmp_path):
        path = csv_file(tmp_path, "Z.csv", [
            quote("2000-01-03", "100.0"),
            quote("2000-01-04", "101.0"),
            quote("2000-01-03", "102.0"),
        ])
        with pytest.raises(DataError, match=r"duplicate date.*lines 2 and 4"):
            ingest_csv(path)

    def test_structural_errors(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            ingest_csv(tmp_path / "absent.csv")
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(DataError, match="empty file"):
            ingest_csv(empty)
        headers_only = csv_file(tmp_path, "H.csv", [])
        with pytest.raises(DataError, match="no data rows"):
            ingest_csv(headers_only)
        wrong = tmp_path / "W.csv"
        wrong.write_text("Date,Price\n2000-01-03,1.0\n")
        with pytest.raises(DataError, match="lacks column"):
            ingest_csv(wrong)


class TestManifest:
    def manifest_file(self, tmp_path, payload):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(payload))
        return path

    def base_payload(self):
        return {
            "index_file": "INDEX.csv",
            "stock_files": [["A", "A.csv"], ["B", "B.csv"]],
        }

    def test_load_and_resolve(self, tmp_path):
        m = load_manifest(self.manifest_file(tmp_path, self.base_payload()))
        assert m.index_file == "INDEX.csv"
        assert m.stock_files == (("A", "A.csv"), ("B", "B.csv"))
        assert m.price_column == "Adj Close"
        assert m.resolve("A.csv") == tmp_path / "A.csv"

    def test_unknown_keys_rejected(self, tmp_path):
        payload = self.base_payload() | {"frequency": "daily"}
        with pytest.raises(ValidationError, match="frequency"):
            load_manifest(self.manifest_file(tmp_path, payload))

    def test_required_keys(self, tmp_path):
        with pytest.raises(ValidationError, match="index_file"):
            load_manifest(self.manifest_file(tmp_path, {"stock_files": []}))

    def test_too_few_stocks(self, tmp_path):
        payload = self.base_payload() | {"stock_files": [["A", "A.csv"]]}
        with pytest.raises(ValidationError, match="at least 2"):
            load_manifest(self.manifest_file(tmp_path, payload))

    def test_duplicate_tickers(self, tmp_path):
        payload = self.base_payload() | {"stock_files": [["A", "1.csv"], ["A", "2.csv"]]}
        with pytest.raises(ValidationError, match="duplicate"):
            load_manifest(self.manifest_file(tmp_path, payload))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{nope")
        with pytest.raises(DataError, match="not valid JSON"):
            load_manifest(path)
        with pytest.raises(DataError, match="no such manifest"):
            load_manifest(tmp_path / "absent.json")

    def test_load_panel_aligns_and_clips(self, tmp_path):
        dates = ["2000-01-03", "2000-01-04", "2000-01-05", "2000-01-06"]
        for name, prices in (("A", [10, 11, 12, 13]), ("B", [20, 19, 21, 22]),
                             ("INDEX", [15, 15, 16, 17])):
            csv_file(tmp_path, f"{name}.csv",
                     [quote(d, str(p)) for d, p in zip(dates, prices)])
        payload = self.base_payload() | {"date_range": ["2000-01-04", "2000-01-06"]}
        m = load_manifest(self.manifest_file(tmp_path, payload))
        panel = load_panel(m)
        assert panel.n_days == 3
        assert panel.calendar[0] == np.datetime64("2000-01-04")
        np.testing.assert_allclose(panel.stocks[0].closes, [11, 12, 13])
        assert panel.index_series.ticker == "INDEX"

        empty_range = self.base_payload() | {"date_range": ["1990-01-01", "1990-12-31"]}
        m2 = load_manifest(self.manifest_file(tmp_path, empty_range))
        with pytest.raises(DataError, match="no rows within"):
            load_panel(m2)


class TestRunConfig:
    def test_defaults(self):
        c = RunConfig()
        assert c.window_range == (10, 35)
        assert c.delta_t == 1
        assert c.detrend_window == 251
        assert c.rho_grid[0] == -0.15 and c.rho_grid[-1] == 0.15

    def test_validation(self):
        with pytest.raises(ValidationError):
            RunConfig(dt1=35, dt2=10)
        with pytest.raises(ValidationError):
            RunConfig(dt1=10, dt2=10)
        with pytest.raises(ValidationError):
            RunConfig(delta_t=0)
        with pytest.raises(ValidationError):
            RunConfig(rho_grid=())
        with pytest.raises(ValidationError):
            RunConfig(detrend_window=-1)
        with pytest.raises(ValidationError):
            RunConfig(min_samples=0)

    def test_precedence_defaults_file_overrides(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"dt1": 3, "dt2": 6, "seed": 5}))
        c = load_run_config(cfg_file, {"dt2": 8, "seed": None})
        assert c.dt1 == 3       # from file
        assert c.dt2 == 8       # flag beats file
        assert c.seed == 5      # None override is "not given"
        assert c.delta_t == 1   # untouched default

    def test_sequences_coerced_to_float_tuples(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"rho_grid": [-1, 1], "chi_levels": [1]}))
        c = load_run_config(cfg_file)
        assert c.rho_grid == (-1.0, 1.0)
        assert c.chi_levels == (1.0,)

    def test_unknown_keys_rejected(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"dt_one": 3}))
        with pytest.raises(ValidationError, match="dt_one"):
            load_run_config(cfg_file)

    def test_missing_or_broken_file(self, tmp_path):
        with pytest.raises(DataError):
            load_run_config(tmp_path / "absent.json")
        broken = tmp_path / "broken.json"
        broken.write_text("[1,")
        with pytest.raises(DataError):
            load_run_config(broken)


class TestSimulateRoundTrip:
    def test_output_inventory(self, tmp_path):
        out = simulated_dataset(tmp_path, n_stocks=3, n_steps=50)
        names = sorted(p.name for p in out.iterdir())
        assert names == ["INDEX.csv", "S00.csv", "S01.csv", "S02.csv",
                         "manifest.json", "summary.json"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["command"] == "simulate"
        assert summary["config"]["seed"] == 6

    def test_round_trip_preserves_log_prices(self, tmp_path):
        cfg = SimConfig(n_stocks=3, n_steps=80, fear_probability=0.1,
                        step_size=0.01, seed=12)
        out = tmp_path / "rt"
        run_simulate(cfg, out)
        panel = load_panel(load_manifest(out / "manifest.json"))
        sim = to_aligned_panel(simulate_market(cfg))
        assert panel.tickers == sim.tickers
        np.testing.assert_allclose(panel.log_close_matrix, sim.log_close_matrix,
                                   atol=1e-10)
        np.testing.assert_allclose(panel.index_log_closes, sim.index_log_closes,
                                   atol=1e-10)

    def test_same_seed_byte_identical(self, tmp_path):
        a = simulated_dataset(tmp_path / "a")
        b = simulated_dataset(tmp_path / "b")
        for pa, pb in zip(sorted(a.iterdir()), sorted(b.iterdir())):
            assert pa.name == pb.name
            assert pa.read_bytes() == pb.read_bytes()

    def test_rejects_degenerate_fear_probability(self, tmp_path):
        with pytest.raises(ValidationError):
            SimConfig(n_stocks=2, n_steps=10, fear_probability=0.6,
                      step_size=0.01, seed=0)

    def test_written_csv_is_ingestible(self, tmp_path):
        s = PriceSeries("T", calendar(3), np.array([1.0, 2.0, 3.0]))
        path = tmp_path / "T.csv"
        write_price_csv(path, s)
        back = ingest_csv(path)
        np.testing.assert_array_equal(back.dates, s.dates)
        np.testing.assert_allclose(back.closes, s.closes, rtol=1e-11)


class TestRunCondcorr:
    def test_reports_and_summary(self, tmp_path):
        data = simulated_dataset(tmp_path)
        out = tmp_path / "reports"
        manifest = load_manifest(data / "manifest.json")
        summary = run_condcorr(manifest, small_config(), out)

        for name in ("curve.tsv", "chi_0.01.tsv", "pairs_0.01.tsv",
                     "wilcoxon_pairs.tsv", "ct_plus_0.01.tsv",
                     "ct_minus_0.01.tsv", "wilcoxon_time.tsv", "summary.json"):
            assert (out / name).is_file(), name

        curve_lines = (out / "curve.tsv").read_text().splitlines()
        assert curve_lines[0] == "rho\tC\tn_samples\tn_excluded"
        assert len(curve_lines) == 1 + len(summary["curve"])
        for line in curve_lines[1:]:
            rho, c, n, excl = line.split("\t")
            assert rho in summary["curve"]
            assert float(c) == pytest.approx(summary["curve"][rho]["C"], rel=1e-11)

        pairs_lines = (out / "pairs_0.01.tsv").read_text().splitlines()
        assert pairs_lines[0] == "x\ty\tC_minus\tC_plus\tn_minus\tn_plus"
        assert len(pairs_lines) == 1 + 10  # 5 stocks -> 10 unordered pairs

        assert summary["command"] == "condcorr"
        assert summary["panel"] == {
            "n_stocks": 5, "n_days": 401,
            "first_date": "2000-01-03", "last_date": "2001-02-06",
        }
        assert set(summary["inputs"]) == {"INDEX", "S00", "S01", "S02", "S03", "S04"}
        assert all(len(h) == 64 for h in summary["inputs"].values())
        assert "0.01" in summary["wilcoxon_pairs"]
        assert summary["wilcoxon_pairs"]["0.01"]["n"] <= 10
        assert "0.01" in summary["wilcoxon_time"]

    def test_deterministic_outputs(self, tmp_path):
        data = simulated_dataset(tmp_path)
        manifest = load_manifest(data / "manifest.json")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        run_condcorr(manifest, small_config(), out1)
        run_condcorr(manifest, small_config(), out2)
        for pa, pb in zip(sorted(out1.iterdir()), sorted(out2.iterdir())):
            assert pa.read_bytes() == pb.read_bytes(), pa.name

    def test_prebuilt_panel_source(self, tmp_path):
        sim = to_aligned_panel(simulate_market(
            SimConfig(n_stocks=4, n_steps=200, fear_probability=0.1,
                      step_size=0.01, seed=8)))
        summary = run_condcorr(None, small_config(), tmp_path / "p", panel=sim)
        assert summary["inputs"] == {}
        assert summary["panel"]["n_stocks"] == 4

    def test_requires_some_source(self, tmp_path):
        with pytest.raises(ValidationError):
            run_condcorr(None, small_config(), tmp_path / "x")

    def test_tiny_panel_skips_pair_test(self, tmp_path):
        # 2 stocks -> a single pair: not enough for a rank-sum comparison
        sim = to_aligned_panel(simulate_market(
            SimConfig(n_stocks=2, n_steps=150, fear_probability=0.1,
                      step_size=0.01, seed=8)))
        summary = run_condcorr(None, small_config(), tmp_path / "t", panel=sim)
        assert summary["wilcoxon_pairs"] == {}
        assert summary["wilcoxon_pairs_skipped"] == ["0.01"]


class TestRunInvstats:
    def test_manifest_source(self, tmp_path):
        data = simulated_dataset(tmp_path, n_stocks=3, n_steps=3000)
        out = tmp_path / "inv"
        config = small_config(detrend_window=251)
        summary = run_invstats(load_manifest(data / "manifest.json"), config, out)
        levels = sorted({abs(r) for r in config.rho_grid})
        for lv in levels:
            assert (out / f"hist_plus_{fmt(lv)}.tsv").is_file()
            assert (out / f"hist_minus_{fmt(lv)}.tsv").is_file()
            entry = summary["levels"][fmt(lv)]
            assert entry["asymmetry"] == pytest.approx(
                entry["mode_plus"] - entry["mode_minus"], abs=1e-12)
            assert entry["n_plus"] > 0 and entry["n_minus"] > 0
        assert summary["series"]["ticker"] == "INDEX"
        assert summary["series"]["detrended"] is True
        hist_lines = (out / f"hist_plus_{fmt(levels[0])}.tsv").read_text().splitlines()
        assert hist_lines[0] == "tau_center\tdensity"

    def test_csv_source_without_detrending(self, tmp_path):
        data = simulated_dataset(tmp_path, n_stocks=2, n_steps=2000)
        out = tmp_path / "inv"
        summary = run_invstats(data / "S00.csv", small_config(detrend_window=0),
                               out)
        assert summary["series"] == {"ticker": "S00", "n_days": 2001,
                                     "detrended": False}
        assert "S00" in summary["inputs"]

    def test_price_series_source(self, tmp_path):
        sim = simulate_market(SimConfig(n_stocks=1, n_steps=2000,
                                        fear_probability=0.0, step_size=0.01,
                                        seed=4))
        series = PriceSeries("W", calendar(2001), np.exp(sim.log_prices[0]))
        summary = run_invstats(series, small_config(detrend_window=0),
                               tmp_path / "inv")
        assert summary["series"]["ticker"] == "W"

    def test_zero_level_rejected(self, tmp_path):
        series = PriceSeries("W", calendar(100),
                             np.exp(np.linspace(0, 0.5, 100)))
        config = small_config(rho_grid=(-0.01, 0.0, 0.01), detrend_window=0)
        with pytest.raises(ValidationError, match="must not contain 0"):
            run_invstats(series, config, tmp_path / "inv")


class TestCli:
    def test_simulate_condcorr_invstats_walkthrough(self, tmp_path, capsys):
        data = tmp_path / "market"
        assert main([
            "simulate", "--n-stocks", "5", "--n-steps", "400",
            "--fear-probability", "0.1", "--seed", "6", "--out", str(data),
        ]) == 0
        assert "manifest.json" in capsys.readouterr().out

        reports = tmp_path / "reports"
        assert main([
            "condcorr", "--manifest", str(data / "manifest.json"),
            "--out", str(reports), "--dt1", "3", "--dt2", "6",
            "--rho-grid=-0.02,-0.01,0.01,0.02", "--chi-levels", "0.01",
            "--ct-level", "0.01", "--min-samples", "2",
        ]) == 0
        out = capsys.readouterr().out
        assert "pairs |rho|=0.01" in out
        assert (reports / "curve.tsv").is_file()

        inv = tmp_path / "inv"
        assert main([
            "invstats", "--manifest", str(data / "manifest.json"),
            "--out", str(inv), "--rho-grid=-0.02,0.02",
            "--detrend-window", "0",
        ]) == 0
        assert "|rho|=0.02" in capsys.readouterr().out
        assert (inv / "hist_plus_0.02.tsv").is_file()

    def test_cli_matches_library_run(self, tmp_path):
        data = simulated_dataset(tmp_path)
        via_lib = tmp_path / "lib"
        run_condcorr(load_manifest(data / "manifest.json"), small_config(),
                     via_lib)
        via_cli = tmp_path / "cli"
        assert main([
            "condcorr", "--manifest", str(data / "manifest.json"),
            "--out", str(via_cli), "--dt1", "3", "--dt2", "6",
            "--rho-grid=-0.02,-0.01,0.01,0.02", "--chi-levels", "0.01",
            "--ct-level", "0.01", "--min-samples", "2",
        ]) == 0
        assert ((via_cli / "curve.tsv").read_bytes()
                == (via_lib / "curve.tsv").read_bytes())

    def test_config_file_and_flag_precedence(self, tmp_path):
        data = simulated_dataset(tmp_path)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "dt1": 3, "dt2": 6, "rho_grid": [-0.02, -0.01, 0.01, 0.02],
            "chi_levels": [0.01], "ct_level": 0.01, "min_samples": 2,
        }))
        out = tmp_path / "out"
        assert main([
            "condcorr", "--manifest", str(data / "manifest.json"),
            "--out", str(out), "--config", str(cfg), "--dt2", "7",
        ]) == 0
        written = json.loads((out / "summary.json").read_text())["config"]
        assert written["dt1"] == 3 and written["dt2"] == 7

    def test_validation_error_exit_code(self, tmp_path, capsys):
        data = simulated_dataset(tmp_path)
        code = main([
            "condcorr", "--manifest", str(data / "manifest.json"),
            "--out", str(tmp_path / "x"), "--dt1", "20", "--dt2", "10",
        ])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_data_error_exit_code(self, tmp_path, capsys):
        code = main([
            "condcorr", "--manifest", str(tmp_path / "absent.json"),
            "--out", str(tmp_path / "x"),
        ])
        assert code == 3
        assert "no such manifest" in capsys.readouterr().err

    def test_chi_subcommand(self, capsys):
        assert main(["chi", "0.55", "0.5"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {"chi": pytest.approx(0.1), "excluded": False}

        assert main(["chi", "0.3", "0.0"]) == 4
        out = json.loads(capsys.readouterr().out)
        assert out["excluded"] is True and out["chi"] is None

    def test_wilcoxon_subcommand(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        a.write_text("1.0\n\n# midway comment\n2.0\n3.0\n")
        b = tmp_path / "b.txt"
        b.write_text("4\n5\n6\n")
        assert main(["wilcoxon", str(a), str(b)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["z"] == pytest.approx(-1.9640, abs=1e-4)
        assert out["n_a"] == 3 and out["n_b"] == 3

    def test_wilcoxon_equalize_is_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        a.write_text("".join(f"{v}\n" for v in range(30)))
        b = tmp_path / "b.txt"
        b.write_text("".join(f"{v + 0.5}\n" for v in range(10)))
        assert main(["wilcoxon", str(a), str(b), "--equalize", "--seed", "5"]) == 0
        first = capsys.readouterr().out
        assert main(["wilcoxon", str(a), str(b), "--equalize", "--seed", "5"]) == 0
        assert capsys.readouterr().out == first
        assert json.loads(first)["n_a"] == 10

    def test_wilcoxon_bad_value_names_line(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        a.write_text("1.0\nfoo\n")
        b = tmp_path / "b.txt"
        b.write_text("1\n2\n3\n")
        assert main(["wilcoxon", str(a), str(b)]) == 3
        assert ":2:" in capsys.readouterr().err

    def test_ingest_check_csv_and_manifest(self, tmp_path, capsys):
        data = simulated_dataset(tmp_path, n_stocks=2, n_steps=30)
        assert main(["ingest-check", str(data / "S00.csv")]) == 0
        report = json.loads(capsys.readouterr().out)
        entry = report[str(data / "S00.csv")]
        assert entry["kind"] == "csv" and entry["rows"] == 31

        assert main(["ingest-check", str(data / "manifest.json")]) == 0
        report = json.loads(capsys.readouterr().out)
        entry = report[str(data / "manifest.json")]
        assert entry["kind"] == "manifest"
        assert entry["tickers"] == ["S00", "S01"]
        assert entry["common_days"] == 31

    def test_ingest_check_bad_file(self, tmp_path, capsys):
        bad = csv_file(tmp_path, "BAD.csv", [quote("2000-01-03", "-5")])
        assert main(["ingest-check", str(bad)]) == 3
        assert "non-positive" in capsys.readouterr().err

    def test_invstats_requires_exactly_one_source(self, tmp_path, capsys):
        data = simulated_dataset(tmp_path, n_stocks=2, n_steps=30)
        assert main(["invstats", "--out", str(tmp_path / "o")]) == 2
        capsys.readouterr()
        assert main([
            "invstats", "--manifest", str(data / "manifest.json"),
            "--csv", str(data / "S00.csv"), "--out", str(tmp_path / "o"),
        ]) == 2
        assert "exactly one" in capsys.readouterr().err
