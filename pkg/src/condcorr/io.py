"""Data ingestion, run configuration, and result persistence.

Input CSVs follow the daily-quote schema ``Date,Open,High,Low,Close,Adj
Close,Volume`` with ISO dates.  All numeric output uses 12 significant
digits; p-values are written as log10(p) because the z scores of interest
live far beyond double-precision tail printing.  Every run writes a
``summary.json`` recording the exact config, seed, and input hashes needed
to reproduce it; summaries carry no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import conditional, inverse_stats
from .errors import DataError, InsufficientDataError, ValidationError
from .fearsim import SimConfig, simulate_market, to_aligned_panel
from .ranktests import RankSumResult, equal_size_subsample, wilcoxon_rank_sum
from .timeseries import AlignedPanel, PriceSeries, align_panel, detrend_log_price

__all__ = [
    "CSV_HEADER",
    "DatasetManifest",
    "RunConfig",
    "ingest_csv",
    "load_manifest",
    "load_panel",
    "load_run_config",
    "run_simulate",
    "run_condcorr",
    "run_invstats",
    "fmt",
]

CSV_HEADER = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]


def fmt(x) -> str:
    """12-significant-digit decimal rendering used in every output file."""
    if x is None:
        return "nan"
    return f"{float(x):.12g}"


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# ingestion


def ingest_csv(path, price_column: str = "Adj Close",
               ticker: str | None = None) -> PriceSeries:
    """Parse one daily-quote CSV into a PriceSeries.

    Rows may arrive in any order (they are sorted by date); duplicate dates,
    unparseable fields, and non-positive prices are rejected with the
    offending line number.  The ticker defaults to the file stem.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    name = ticker if ticker is not None else path.stem
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, no header row")
        missing = [c for c in ("Date", price_column) if c not in reader.fieldnames]
        if missing:
            raise DataError(
                f"{path}: header {reader.fieldnames} lacks column(s) {missing}"
            )
        for lineno, row in enumerate(reader, start=2):
            raw_date = (row.get("Date") or "").strip()
            raw_price = (row.get(price_column) or "").strip()
            try:
                date = np.datetime64(datetime.date.fromisoformat(raw_date), "D")
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad date {raw_date!r}") from None
            if raw_price in ("", "null", "NA", "N/A"):
                raise DataError(f"{path}:{lineno}: missing {price_column!r} value")
            try:
                price = float(raw_price)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: bad {price_column!r} value {raw_price!r}"
                ) from None
            if not np.isfinite(price) or price <= 0.0:
                raise DataError(
                    f"{path}:{lineno}: non-positive price {raw_price!r}"
                )
            rows.append((date, price, lineno))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _, l1), (d2, _, l2) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: duplicate date {d1} (lines {l1} and {l2})")
    dates = np.array([r[0] for r in rows])
    closes = np.array([r[1] for r in rows])
    return PriceSeries(name, dates, closes)


@dataclass(frozen=True)
class DatasetManifest:
    """Which files make up a panel.  Paths are relative to ``base_dir``."""

    index_file: str
    stock_files: tuple[tuple[str, str], ...]
    date_range: tuple[str, str] | None = None
    price_column: str = "Adj Close"
    base_dir: Path = Path(".")

    def __post_init__(self):
        if len(self.stock_files) < 2:
            raise ValidationError("manifest needs at least 2 stock files")
        tickers = [t for t, _ in self.stock_files]
        if len(set(tickers)) != len(tickers):
            raise ValidationError(f"duplicate tickers in manifest: {sorted(tickers)}")

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else Path(self.base_dir) / p


def load_manifest(path) -> DatasetManifest:
    """Read a manifest JSON: index_file, stock_files, date_range, price_column."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such manifest")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    known = {"index_file", "stock_files", "date_range", "price_column"}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown manifest keys {sorted(unknown)}")
    if "index_file" not in raw or "stock_files" not in raw:
        raise ValidationError(f"{path}: manifest needs index_file and stock_files")
    stock_files = tuple((str(t), str(p)) for t, p in raw["stock_files"])
    date_range = tuple(raw["date_range"]) if raw.get("date_range") else None
    return DatasetManifest(
        index_file=str(raw["index_file"]),
        stock_files=stock_files,
        date_range=date_range,
        price_column=raw.get("price_column", "Adj Close"),
        base_dir=path.parent,
    )


def _clip_dates(series: PriceSeries, date_range) -> PriceSeries:
    if date_range is None:
        return series
    start, end = np.datetime64(date_range[0], "D"), np.datetime64(date_range[1], "D")
    mask = (series.dates >= start) & (series.dates <= end)
    if not np.any(mask):
        raise DataError(f"{series.ticker}: no rows within {date_range}")
    return PriceSeries(series.ticker, series.dates[mask], series.closes[mask])


def load_panel(manifest: DatasetManifest, min_days: int = 2) -> AlignedPanel:
    """Ingest every file in the manifest and align onto the common calendar."""
    index = _clip_dates(
        ingest_csv(manifest.resolve(manifest.index_file), manifest.price_column,
                   ticker="INDEX"),
        manifest.date_range,
    )
    stocks = [
        _clip_dates(
            ingest_csv(manifest.resolve(p), manifest.price_column, ticker=t),
            manifest.date_range,
        )
        for t, p in manifest.stock_files
    ]
    return align_panel(stocks, index, min_days=min_days)


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    """Analysis parameters, all overridable from the command line.

    rho_grid holds signed levels; chi_levels and ct_level are magnitudes
    (each expands to a ± pair).  detrend_window = 0 turns detrending off
    for the inverse-statistics path.
    """

    delta_t: int = 1
    dt1: int = 10
    dt2: int = 35
    rho_grid: tuple[float, ...] = (
        -0.15, -0.10, -0.08, -0.05, -0.04, -0.03, -0.02, -0.01,
        0.01, 0.02, 0.03, 0.04, 0.05, 0.08, 0.10, 0.15,
    )
    chi_levels: tuple[float, ...] = (0.03, 0.05, 0.10)
    ct_level: float = 0.05
    detrend_window: int = 251
    detrend_mode: str = "centered"
    binning: str = "log"
    bin_ratio: float = 1.25
    seed: int = 0
    min_samples: int = 10
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.delta_t < 1:
            raise ValidationError("delta_t must be >= 1")
        if not 1 <= self.dt1 < self.dt2:
            raise ValidationError(
                f"need 1 <= dt1 < dt2, got dt1={self.dt1}, dt2={self.dt2}"
            )
        if len(self.rho_grid) == 0:
            raise ValidationError("rho_grid must not be empty")
        if self.detrend_window < 0:
            raise ValidationError("detrend_window must be >= 0 (0 disables)")
        if self.min_samples < 1:
            raise ValidationError("min_samples must be >= 1")

    @property
    def window_range(self) -> tuple[int, int]:
        return (self.dt1, self.dt2)


def load_run_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional flat JSON file plus overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise DataError(f"{path}: no such config file")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from None
        names = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - names
        if unknown:
            raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
        values.update(raw)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("rho_grid", "chi_levels"):
        if key in values:
            values[key] = tuple(float(v) for v in values[key])
    return RunConfig(**values)


def _config_dict(config) -> dict:
    out = asdict(config)
    for k, v in out.items():
        if isinstance(v, tuple):
            out[k] = list(v)
        elif isinstance(v, Path):
            out[k] = str(v)
    return out


# ---------------------------------------------------------------------------
# writers


def _write_tsv(path: Path, header: list[str], rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def write_curve_tsv(path, curve: conditional.CorrelationCurve):
    _write_tsv(Path(path), ["rho", "C", "n_samples", "n_excluded"], (
        [fmt(p.rho), fmt(p.value), str(p.sample_count), str(p.excluded_windows)]
        for p in curve.points
    ))


def write_chi_tsv(path, report: conditional.ChiReport):
    rows = (
        [s.pair[0], s.pair[1], fmt(s.chi)]
        for s in report.samples
    )
    _write_tsv(Path(path), ["x", "y", "chi"], rows)


def write_pair_conditionals_tsv(path, report: conditional.ChiReport):
    rows = (
        [p.pair[0], p.pair[1], fmt(p.c_minus), fmt(p.c_plus),
         str(p.count_minus), str(p.count_plus)]
        for p in report.pairs
    )
    _write_tsv(Path(path), ["x", "y", "C_minus", "C_plus", "n_minus", "n_plus"], rows)


def write_time_resolved_tsv(path, tr: conditional.TimeResolvedCorrelation,
                            calendar: np.ndarray):
    rows = (
        [str(calendar[t]), fmt(v)]
        for t, v in zip(tr.times, tr.values)
    )
    _write_tsv(Path(path), ["date", "C_t"], rows)


def write_wilcoxon_tsv(path, rows: list[tuple[float, RankSumResult]]):
    _write_tsv(Path(path), ["rho", "z", "log10_p", "n"], (
        [fmt(rho), fmt(r.z), fmt(r.log10_p), str(min(r.n_a, r.n_b))]
        for rho, r in rows
    ))


def write_histogram_tsv(path, hist: inverse_stats.WaitingTimeHistogram):
    rows = (
        [fmt(c), fmt(d)]
        for c, d in zip(hist.bin_centers, hist.densities)
    )
    _write_tsv(Path(path), ["tau_center", "density"], rows)


def _write_summary(out_dir: Path, payload: dict):
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# run orchestrators


def write_price_csv(path, series: PriceSeries):
    """Write a PriceSeries in the ingestion schema (flat OHLC, zero volume)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for date, close in zip(series.dates, series.closes):
            value = fmt(close)
            writer.writerow([str(date), value, value, value, value, value, "0"])


def run_simulate(sim_config: SimConfig, output_dir) -> dict:
    """Simulate a market and persist it as an ingestible CSV panel + manifest."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel = to_aligned_panel(simulate_market(sim_config))
    stock_files = []
    for stock in panel.stocks:
        rel = f"{stock.ticker}.csv"
        write_price_csv(out / rel, stock)
        stock_files.append([stock.ticker, rel])
    write_price_csv(out / "INDEX.csv", panel.index_series)
    manifest = {
        "index_file": "INDEX.csv",
        "stock_files": stock_files,
        "date_range": None,
        "price_column": "Adj Close",
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary = {
        "command": "simulate",
        "config": _config_dict(sim_config),
        "outputs": {
            "manifest": "manifest.json",
            "files": [f for _, f in stock_files] + ["INDEX.csv"],
        },
        "version": _package_version(),
    }
    _write_summary(out, summary)
    return summary


def _package_version() -> str:
    from . import __version__
    return __version__


def _input_hashes(manifest: DatasetManifest) -> dict:
    files = {"INDEX": manifest.resolve(manifest.index_file)}
    files.update({t: manifest.resolve(p) for t, p in manifest.stock_files})
    return {t: _sha256(p) for t, p in sorted(files.items())}


def _equalized(plus: np.ndarray, minus: np.ndarray, seed: int):
    """Trim the larger sample to the smaller one's size, reproducibly."""
    if len(plus) > len(minus):
        plus = equal_size_subsample(plus, len(minus), seed)
    elif len(minus) > len(plus):
        minus = equal_size_subsample(minus, len(plus), seed)
    return plus, minus


def run_condcorr(manifest: DatasetManifest | None, config: RunConfig, output_dir,
                 panel: AlignedPanel | None = None) -> dict:
    """Full conditional-correlation pipeline -> TSV reports + summary.json.

    Emits the ρ-curve, per-pair χ distributions and conditional values, the
    ±ct_level time-resolved C_t series, and two Wilcoxon tables: one over
    per-pair conditional correlations, one over the C_t samples (the larger
    side subsampled to equal size first).
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if panel is None:
        if manifest is None:
            raise ValidationError("need a manifest or a pre-built panel")
        panel = load_panel(manifest)
    ct_levels = (config.ct_level, -config.ct_level)
    analysis = conditional.analyze_panel(
        panel,
        rho_grid=config.rho_grid,
        window_range=config.window_range,
        horizon=config.delta_t,
        chi_levels=config.chi_levels,
        ct_levels=ct_levels,
        min_samples=config.min_samples,
        epsilon=config.epsilon,
    )
    write_curve_tsv(out / "curve.tsv", analysis.curve)

    pair_tests: list[tuple[float, RankSumResult]] = []
    skipped_pair_tests = []
    for level in config.chi_levels:
        report = analysis.chi[level]
        tag = fmt(level)
        write_chi_tsv(out / f"chi_{tag}.tsv", report)
        write_pair_conditionals_tsv(out / f"pairs_{tag}.tsv", report)
        plus = np.array([p.c_plus for p in report.pairs if p.c_plus is not None])
        minus = np.array([p.c_minus for p in report.pairs if p.c_minus is not None])
        plus, minus = _equalized(plus, minus, config.seed)
        if len(plus) >= 2 and len(plus) + len(minus) >= 4:
            pair_tests.append((level, wilcoxon_rank_sum(plus, minus)))
        else:
            skipped_pair_tests.append(level)
    write_wilcoxon_tsv(out / "wilcoxon_pairs.tsv", pair_tests)

    ct_plus = analysis.time_resolved[ct_levels[0]]
    ct_minus = analysis.time_resolved[ct_levels[1]]
    write_time_resolved_tsv(out / f"ct_plus_{fmt(config.ct_level)}.tsv",
                            ct_plus, panel.calendar)
    write_time_resolved_tsv(out / f"ct_minus_{fmt(config.ct_level)}.tsv",
                            ct_minus, panel.calendar)
    ct_tests: list[tuple[float, RankSumResult]] = []
    plus, minus = _equalized(ct_plus.values, ct_minus.values, config.seed)
    if len(plus) >= 2 and len(plus) + len(minus) >= 4:
        ct_tests.append((config.ct_level, wilcoxon_rank_sum(plus, minus)))
    write_wilcoxon_tsv(out / "wilcoxon_time.tsv", ct_tests)

    summary = {
        "command": "condcorr",
        "config": _config_dict(config),
        "inputs": _input_hashes(manifest) if manifest is not None else {},
        "panel": {
            "n_stocks": panel.n_stocks,
            "n_days": panel.n_days,
            "first_date": str(panel.calendar[0]),
            "last_date": str(panel.calendar[-1]),
        },
        "curve": {
            fmt(p.rho): {
                "C": p.value,
                "n_samples": p.sample_count,
                "n_excluded_windows": p.excluded_windows,
                "stderr": p.stderr,
                "flagged_low_statistics": p.flagged,
            }
            for p in analysis.curve.points
        },
        "chi": {
            fmt(level): {
                "n_samples": len(analysis.chi[level].samples),
                "excluded_small_denominator": analysis.chi[level].excluded_denominator,
                "excluded_missing_data": analysis.chi[level].excluded_missing,
            }
            for level in config.chi_levels
        },
        "wilcoxon_pairs": {
            fmt(level): {"z": r.z, "log10_p": r.log10_p, "n": min(r.n_a, r.n_b)}
            for level, r in pair_tests
        },
        "wilcoxon_pairs_skipped": [fmt(l) for l in skipped_pair_tests],
        "wilcoxon_time": {
            fmt(level): {"z": r.z, "log10_p": r.log10_p, "n": min(r.n_a, r.n_b)}
            for level, r in ct_tests
        },
        "version": _package_version(),
    }
    _write_summary(out, summary)
    return summary


def run_invstats(source, config: RunConfig, output_dir) -> dict:
    """Inverse-statistics pipeline on one series -> histogram TSVs + summary.

    ``source`` is a DatasetManifest (its index series is analyzed), a CSV
    path, or a PriceSeries.  The series is detrended in log-price space
    first unless detrend_window is 0.  Levels come from the magnitudes in
    rho_grid; a grid containing 0 is rejected.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if any(rho == 0.0 for rho in config.rho_grid):
        raise ValidationError("rho_grid for inverse statistics must not contain 0")

    inputs = {}
    if isinstance(source, DatasetManifest):
        series = _clip_dates(
            ingest_csv(source.resolve(source.index_file), source.price_column,
                       ticker="INDEX"),
            source.date_range,
        )
        inputs["INDEX"] = _sha256(source.resolve(source.index_file))
    elif isinstance(source, PriceSeries):
        series = source
    else:
        series = ingest_csv(source, "Adj Close")
        inputs[series.ticker] = _sha256(Path(source))

    if config.detrend_window:
        analyzed = detrend_log_price(series, config.detrend_window,
                                     config.detrend_mode)
    else:
        analyzed = series

    levels = sorted({abs(r) for r in config.rho_grid})
    report = inverse_stats.gain_loss_report(analyzed, levels,
                                            binning=config.binning,
                                            ratio=config.bin_ratio)
    level_summaries = {}
    for entry in report.entries:
        tag = fmt(entry.level_abs)
        write_histogram_tsv(out / f"hist_plus_{tag}.tsv", entry.plus)
        write_histogram_tsv(out / f"hist_minus_{tag}.tsv", entry.minus)
        fits = {}
        for side, hist in (("plus", entry.plus), ("minus", entry.minus)):
            try:
                fit = inverse_stats.fit_tail_exponent(hist)
                fits[side] = {"exponent": fit.exponent, "stderr": fit.stderr,
                              "fit_range": list(fit.fit_range), "n_bins": fit.n_bins}
            except InsufficientDataError as exc:
                fits[side] = {"error": str(exc)}
        level_summaries[tag] = {
            "mode_plus": entry.mode_plus,
            "mode_minus": entry.mode_minus,
            "asymmetry": entry.asymmetry,
            "n_plus": entry.plus.total_samples,
            "n_minus": entry.minus.total_samples,
            "censored_plus": entry.plus.censored_count,
            "censored_minus": entry.minus.censored_count,
            "tail_fit": fits,
        }

    summary = {
        "command": "invstats",
        "config": _config_dict(config),
        "inputs": inputs,
        "series": {
            "ticker": series.ticker,
            "n_days": len(series),
            "detrended": bool(config.detrend_window),
        },
        "levels": level_summaries,
        "version": _package_version(),
    }
    _write_summary(out, summary)
    return summary
