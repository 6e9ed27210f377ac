"""Plotting companion for lofi-sched sweep results.

Reads the simulator's results CSV and renders report figures. The two
packages share only that file format, so this one can run anywhere the
CSV can be copied to.
"""

from .figures import (
    PlotDataError,
    SeriesCurve,
    TradeoffPoint,
    interp_snr_at_target,
    make_ber_figure,
    make_tradeoff_figure,
    save_figure,
    series_label,
)
from .results_io import (
    EXPECTED_HEADER,
    ResultRow,
    ResultsFormatError,
    load_results,
    series_keys,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "PlotDataError",
    "ResultRow",
    "ResultsFormatError",
    "SeriesCurve",
    "TradeoffPoint",
    "__version__",
    "interp_snr_at_target",
    "load_results",
    "make_ber_figure",
    "make_tradeoff_figure",
    "save_figure",
    "series_keys",
    "series_label",
]
