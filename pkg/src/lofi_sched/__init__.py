"""Low-fidelity user scheduling for the two-slot multiuser MIMO uplink.

The package splits U single-antenna UEs into two equal uplink slots served by
a B-antenna base station with LMMSE detection, and compares cheap randomized
schedulers (lofi, lofi-pp) against baselines (random, greedy-mse, exhaustive,
no scheduling) on uncoded 16-QAM BER and objective-evaluation counts via a
seeded, worker-count-invariant Monte Carlo sweep.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelFormatError,
    ChannelMatrix,
    EstimationErrorModel,
    SynthChannelConfig,
    apply_power_control,
    estimate_channel,
    load_channel,
    normalize_median_power,
    save_channel,
    synth_channel,
    ula_steering,
)
from .detection import (
    Constellation,
    LinkParams,
    TransmissionBatch,
    demodulate,
    lmmse_matrix,
    make_qam16,
    make_qpsk,
    modulate,
    post_eq_sinr,
    simulate_slot,
)
from .scheduling import (
    ALGORITHMS,
    DEFAULT_ENUMERATION_CAP,
    OBJECTIVES,
    EnumerationCapError,
    Schedule,
    SchedulerConfig,
    SchedulerReport,
    evaluate_schedule,
    exhaustive,
    greedy_mse,
    lofi,
    lofi_pp,
    no_scheduling_reference,
    random_baseline,
    random_schedule,
    run_scheduler,
    worst_ue_swap,
)
from .simulator import (
    CSV_HEADER,
    CellStats,
    RealizationRecord,
    SweepConfig,
    SweepResult,
    TargetCrossing,
    export_results,
    interp_snr_at_target,
    load_results,
    run_sweep,
    snr_at_target,
)

__all__ = [
    "__version__",
    "ChannelFormatError",
    "ChannelMatrix",
    "EstimationErrorModel",
    "SynthChannelConfig",
    "apply_power_control",
    "estimate_channel",
    "load_channel",
    "normalize_median_power",
    "save_channel",
    "synth_channel",
    "ula_steering",
    "Constellation",
    "LinkParams",
    "TransmissionBatch",
    "demodulate",
    "lmmse_matrix",
    "make_qam16",
    "make_qpsk",
    "modulate",
    "post_eq_sinr",
    "simulate_slot",
    "ALGORITHMS",
    "DEFAULT_ENUMERATION_CAP",
    "OBJECTIVES",
    "EnumerationCapError",
    "Schedule",
    "SchedulerConfig",
    "SchedulerReport",
    "evaluate_schedule",
    "exhaustive",
    "greedy_mse",
    "lofi",
    "lofi_pp",
    "no_scheduling_reference",
    "random_baseline",
    "random_schedule",
    "run_scheduler",
    "worst_ue_swap",
    "CSV_HEADER",
    "CellStats",
    "RealizationRecord",
    "SweepConfig",
    "SweepResult",
    "TargetCrossing",
    "export_results",
    "interp_snr_at_target",
    "load_results",
    "run_sweep",
    "snr_at_target",
]
