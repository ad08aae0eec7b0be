"""First-passage waiting times, their histograms, and tail-exponent fits.

Inverse statistics fix a return level ρ and ask how long a log-price path
takes to move by ρ from each start: τ = min{k ≥ 1 : s(t0+k) − s(t0) ≥ ρ}
for ρ > 0, with ≤ for ρ < 0.  Every index is a start (overlapping starts),
and starts whose level is never reached before the series ends are censored:
counted, but excluded from the histogram so they cannot fake a tail cutoff.

Crossing comparisons are evaluated as s(t0+k) ≥ s(t0) + ρ — the threshold is
rounded once per start, which keeps the search monotone; on adversarial
inputs this can differ from the subtract-first form by one ulp.

The waiting times for all starts are found in O(n log n) total: a doubling
table of block maxima over the series, then a simultaneous binary descent
that skips every block whose maximum stays below each start's threshold.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np
from scipy.stats import linregress

from .errors import DataError, InsufficientDataError, ValidationError
from .timeseries import DetrendedLogPrice, PriceSeries

__all__ = [
    "WaitingTimeSample",
    "FirstPassageResult",
    "WaitingTimeHistogram",
    "TailFit",
    "GainLossEntry",
    "GainLossReport",
    "first_passage_times",
    "waiting_time_histogram",
    "default_fit_range",
    "fit_tail_exponent",
    "gain_loss_report",
]

DEFAULT_LOG_BIN_RATIO = 1.25


def _log_price_values(series) -> np.ndarray:
    if isinstance(series, PriceSeries):
        return series.log_closes
    if isinstance(series, DetrendedLogPrice):
        return series.values
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("log-price series must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DataError("log-price series contains non-finite values")
    return arr


@dataclass(frozen=True)
class WaitingTimeSample:
    """One start's first-passage time to the level."""

    start_index: int
    waiting_time: int
    level: float


class FirstPassageResult(Sequence):
    """All non-censored first passages of one series at one level.

    Sequence of WaitingTimeSample; the underlying integer arrays are exposed
    as attributes for bulk work.  ``censored_count`` is the number of starts
    whose level was never reached; ``n_starts`` counts every start tried.
    """

    def __init__(self, level: float, start_indices: np.ndarray,
                 waiting_times: np.ndarray, censored_count: int, n_starts: int):
        self.level = float(level)
        self.start_indices = start_indices
        self.waiting_times = waiting_times
        self.censored_count = int(censored_count)
        self.n_starts = int(n_starts)
        start_indices.flags.writeable = False
        waiting_times.flags.writeable = False

    def __len__(self) -> int:
        return len(self.waiting_times)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return WaitingTimeSample(int(self.start_indices[i]),
                                 int(self.waiting_times[i]), self.level)

    def __iter__(self) -> Iterator[WaitingTimeSample]:
        for t0, tau in zip(self.start_indices, self.waiting_times):
            yield WaitingTimeSample(int(t0), int(tau), self.level)

    def __repr__(self) -> str:
        return (f"FirstPassageResult(level={self.level}, crossed={len(self)}, "
                f"censored={self.censored_count})")


def _doubling_max_tables(s: np.ndarray) -> list[np.ndarray]:
    # tables[k][i] = max of s[i : i + 2**k]
    tables = [s]
    k = 1
    while (1 << k) <= len(s):
        h = 1 << (k - 1)
        prev = tables[-1]
        tables.append(np.maximum(prev[:-h], prev[h:]))
        k += 1
    return tables


def _first_passage_up(s: np.ndarray, rho: float) -> np.ndarray:
    """Positions of the first s[j] >= s[t0] + rho with j > t0, or n if none."""
    n = len(s)
    tables = _doubling_max_tables(s)
    pos = np.arange(1, n, dtype=np.int64)
    thresholds = s[:-1] + rho
    for k in range(len(tables) - 1, -1, -1):
        step = 1 << k
        table = tables[k]
        can = pos + step <= n
        block_max = table[np.where(can, pos, 0)]
        pos += np.where(can & (block_max < thresholds), step, 0)
    return pos


def first_passage_times(series, level: float) -> FirstPassageResult:
    """First-passage waiting times from every start of a log-price series.

    ``series`` may be a PriceSeries (log closes are used), a
    DetrendedLogPrice, or a bare array of log-price values.
    """
    if level == 0.0 or not np.isfinite(level):
        raise ValidationError("level must be nonzero and finite")
    s = _log_price_values(series)
    n = len(s)
    if n < 2:
        raise ValidationError(f"series of length {n} has no starts")
    if level > 0:
        pos = _first_passage_up(s, level)
    else:
        # a drop of |rho| in s is a rise of |rho| in -s
        pos = _first_passage_up(-s, -level)
    starts = np.arange(n - 1, dtype=np.int64)
    crossed = pos < n
    return FirstPassageResult(
        level,
        starts[crossed],
        (pos - starts)[crossed],
        censored_count=int(np.sum(~crossed)),
        n_starts=n - 1,
    )


def _log_edges(tau_max: float, ratio: float) -> np.ndarray:
    # multiplicative edges, but never narrower than 1 so every bin of the
    # integer-valued waiting times contains at least one attainable value
    edges = [0.5]
    while edges[-1] <= tau_max:
        edges.append(max(edges[-1] * ratio, edges[-1] + 1.0))
    return np.asarray(edges)


@dataclass(frozen=True)
class WaitingTimeHistogram:
    """Normalized waiting-time density at one level (censored starts excluded)."""

    level: float
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    total_samples: int
    censored_count: int
    binning: str

    @cached_property
    def bin_centers(self) -> np.ndarray:
        lo, hi = self.bin_edges[:-1], self.bin_edges[1:]
        if self.binning == "log":
            return np.sqrt(lo * hi)
        return (lo + hi) / 2.0

    @property
    def mode(self) -> float:
        """Center of the maximal-density bin."""
        return float(self.bin_centers[int(np.argmax(self.densities))])


def waiting_time_histogram(samples, binning: str = "log",
                           ratio: float = DEFAULT_LOG_BIN_RATIO,
                           width: float = 1.0) -> WaitingTimeHistogram:
    """Bin first-passage times into a normalized density histogram.

    ``binning="log"`` uses multiplicative edges (ratio ``ratio``, floored at
    unit width); ``binning="linear"`` uses fixed-width bins aligned so
    integer waiting times sit at bin centers when width = 1.
    """
    if isinstance(samples, FirstPassageResult):
        taus = samples.waiting_times
        level = samples.level
        censored = samples.censored_count
    else:
        listed = list(samples)
        taus = np.asarray([s.waiting_time for s in listed], dtype=np.int64)
        levels = {s.level for s in listed}
        if len(levels) > 1:
            raise ValidationError(f"mixed levels in one histogram: {sorted(levels)}")
        level = levels.pop() if levels else float("nan")
        censored = 0
    if len(taus) == 0:
        raise InsufficientDataError("no crossings to histogram (all starts censored)")

    tau_max = float(np.max(taus))
    if binning == "log":
        if ratio <= 1.0:
            raise ValidationError("log bin ratio must exceed 1")
        edges = _log_edges(tau_max, ratio)
    elif binning == "linear":
        if width <= 0.0:
            raise ValidationError("linear bin width must be positive")
        edges = np.arange(0.5, tau_max + 0.5 + width, width)
    else:
        raise ValidationError(f"unknown binning {binning!r}")

    counts, _ = np.histogram(taus, bins=edges)
    widths = np.diff(edges)
    densities = counts / (len(taus) * widths)
    return WaitingTimeHistogram(level, edges, densities, counts,
                                total_samples=int(len(taus)),
                                censored_count=int(censored), binning=binning)


@dataclass(frozen=True)
class TailFit:
    """Power-law tail p(τ) ~ τ^(−exponent) fitted on the log-log histogram."""

    exponent: float
    fit_range: tuple[float, float]
    stderr: float
    n_bins: int


def default_fit_range(hist: WaitingTimeHistogram,
                      min_count: int = 5) -> tuple[float, float]:
    """Fit window from 3x the mode (past the pre-peak rise) to the last bin
    still holding ``min_count`` samples (before counting noise takes over)."""
    well_filled = np.nonzero(hist.counts >= min_count)[0]
    if len(well_filled) == 0:
        raise InsufficientDataError(f"no bin holds {min_count} samples")
    return 3.0 * hist.mode, float(hist.bin_centers[well_filled[-1]])


def fit_tail_exponent(hist: WaitingTimeHistogram,
                      fit_range: tuple[float, float] | None = None) -> TailFit:
    """Least-squares slope of (ln τ, ln density) over the tail bins.

    The exponent is the negated slope.  Needs at least 4 nonzero bins inside
    the range; the default range is ``default_fit_range(hist)``.
    """
    if fit_range is None:
        fit_range = default_fit_range(hist)
    tau_min, tau_max = float(fit_range[0]), float(fit_range[1])
    if not tau_min < tau_max:
        raise ValidationError(f"empty fit range [{tau_min}, {tau_max}]")
    centers = hist.bin_centers
    use = (centers >= tau_min) & (centers <= tau_max) & (hist.densities > 0.0)
    if int(np.sum(use)) < 4:
        raise InsufficientDataError(
            f"only {int(np.sum(use))} nonzero bins in [{tau_min:g}, {tau_max:g}]; "
            "need 4 for a tail fit"
        )
    fit = linregress(np.log(centers[use]), np.log(hist.densities[use]))
    return TailFit(exponent=float(-fit.slope), fit_range=(tau_min, tau_max),
                   stderr=float(fit.stderr), n_bins=int(np.sum(use)))


@dataclass(frozen=True)
class GainLossEntry:
    """Paired ±|ρ| histograms and their peak positions."""

    level_abs: float
    plus: WaitingTimeHistogram
    minus: WaitingTimeHistogram
    mode_plus: float
    mode_minus: float
    asymmetry: float  # mode(+) − mode(−); positive when losses come sooner


@dataclass(frozen=True)
class GainLossReport:
    entries: tuple[GainLossEntry, ...]

    def entry(self, level_abs: float) -> GainLossEntry:
        for e in self.entries:
            if e.level_abs == level_abs:
                return e
        raise ValidationError(f"no entry for level {level_abs}")


def gain_loss_report(series, levels, binning: str = "log",
                     ratio: float = DEFAULT_LOG_BIN_RATIO) -> GainLossReport:
    """Waiting-time histograms at ±|ρ| for each magnitude in ``levels``.

    A positive asymmetry (mode(+) above mode(−)) means the series reaches
    losses sooner than equal-sized gains.
    """
    values = _log_price_values(series)
    entries = []
    for level in levels:
        magnitude = abs(float(level))
        if magnitude == 0.0:
            raise ValidationError("levels must be nonzero")
        hists = {}
        for sign in (1.0, -1.0):
            passages = first_passage_times(values, sign * magnitude)
            hists[sign] = waiting_time_histogram(passages, binning, ratio)
        entries.append(GainLossEntry(
            level_abs=magnitude,
            plus=hists[1.0],
            minus=hists[-1.0],
            mode_plus=hists[1.0].mode,
            mode_minus=hists[-1.0].mode,
            asymmetry=hists[1.0].mode - hists[-1.0].mode,
        ))
    return GainLossReport(tuple(entries))
