"""Shaped-QAM fiber transmission toolbox.

End-to-end simulation of probabilistic amplitude shaping with short
constant-composition matcher blocks over a multi-span WDM fiber link,
including the interleaving variants that decide whether the temporal
block structure survives to the channel.
"""

from pasfiber.channel import (
    LinkSpec,
    OpticalField,
    WdmSpec,
    awgn_channel,
    rrc_shape,
    ssfm_propagate,
    wdm_mux,
)
from pasfiber.distmatch import (
    AmplitudeAlphabet,
    CodewordError,
    Composition,
    ccdm_decode,
    ccdm_encode,
    draw_emulated,
    input_length,
    quantize_composition,
    rate_loss,
    run_length_stats,
)
from pasfiber.experiment import (
    ExperimentSpec,
    run_calibration,
    run_cell,
    run_experiment,
)
from pasfiber.labeling import GrayLabeling
from pasfiber.metrics import (
    MetricReport,
    air_4d,
    bmd_rate_2d,
    combine_snr_db,
    effective_snr_db,
    metric_report,
)
from pasfiber.pascodec import (
    DecodedPayload,
    PasConfig,
    SeedSet,
    ShapedFrame,
    compute_llrs,
    pas_decode,
    pas_encode,
    random_payload,
    transmitted_bits,
)
from pasfiber.rxdsp import align_to_reference, estimate_phase_scale, receive

__all__ = [
    "AmplitudeAlphabet",
    "CodewordError",
    "Composition",
    "DecodedPayload",
    "ExperimentSpec",
    "GrayLabeling",
    "LinkSpec",
    "MetricReport",
    "OpticalField",
    "PasConfig",
    "SeedSet",
    "ShapedFrame",
    "WdmSpec",
    "air_4d",
    "align_to_reference",
    "awgn_channel",
    "bmd_rate_2d",
    "ccdm_decode",
    "ccdm_encode",
    "combine_snr_db",
    "compute_llrs",
    "draw_emulated",
    "effective_snr_db",
    "estimate_phase_scale",
    "input_length",
    "metric_report",
    "pas_decode",
    "pas_encode",
    "quantize_composition",
    "random_payload",
    "rate_loss",
    "receive",
    "rrc_shape",
    "run_calibration",
    "run_cell",
    "run_experiment",
    "run_length_stats",
    "ssfm_propagate",
    "transmitted_bits",
    "wdm_mux",
]
