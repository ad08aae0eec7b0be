"""Direction-conditioned correlation and gain-loss asymmetry toolkit.

Measures two related asymmetries in daily price panels:

* whether stock-stock correlations strengthen when the market index moves
  down versus up by the same amount (conditional market component
  correlation, the C(ρ) curve, per-pair χ distributions, and rank-sum
  significance tests), and
* whether an index reaches a loss level −|ρ| sooner than the gain +|ρ|
  (inverse statistics: first-passage waiting-time histograms and their
  power-law tails).

A seeded market simulator with a tunable synchronized-crash probability
provides positive and null controls for both analyses end to end.
"""

__version__ = "0.1.0"

from .conditional import (
    ChiReport,
    ChiSample,
    ConditionalSet,
    CorrelationCurve,
    CurvePoint,
    MarketCorrelationSeries,
    PairConditional,
    PairCorrelationSeries,
    PanelAnalysis,
    TimeResolvedCorrelation,
    analyze_panel,
    average_over_windows,
    chi_distribution,
    conditional_market_correlation,
    conditional_select,
    correlation_curve,
    index_condition_returns,
    market_component_correlation,
    market_correlation_series,
    pair_conditional_correlation,
    pair_correlation,
    pair_correlation_series,
    relative_difference_chi,
    time_resolved_correlation,
)
from .errors import CondCorrError, DataError, InsufficientDataError, ValidationError
from .fearsim import (
    SimConfig,
    SimPanel,
    build_index,
    derive_up_probability,
    simulate_market,
    to_aligned_panel,
)
from .inverse_stats import (
    FirstPassageResult,
    GainLossEntry,
    GainLossReport,
    TailFit,
    WaitingTimeHistogram,
    WaitingTimeSample,
    default_fit_range,
    first_passage_times,
    fit_tail_exponent,
    gain_loss_report,
    waiting_time_histogram,
)
from .io import (
    DatasetManifest,
    RunConfig,
    ingest_csv,
    load_manifest,
    load_panel,
    load_run_config,
    run_condcorr,
    run_invstats,
    run_simulate,
)
from .ranktests import (
    DistributionHistogram,
    RankSumResult,
    distribution_histogram,
    equal_size_subsample,
    wilcoxon_rank_sum,
)
from .timeseries import (
    AlignedPanel,
    DetrendedLogPrice,
    LogReturnSeries,
    PriceSeries,
    WindowStats,
    align_panel,
    detrend_log_price,
    log_returns,
    window_stats,
)

__all__ = [name for name in dir() if not name.startswith("_")]
