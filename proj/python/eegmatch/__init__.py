"""EEG / speech match-mismatch toolkit."""

from ._core import (
    EegmatchError,
    band_gain,
    bandpass,
    eeg_encoder_parameter_count,
    generate_synthetic,
    infonce_loss,
    infonce_lower_bound,
    multiband,
    pca_fit,
    pearson,
    read_mmts,
    read_words,
    resample,
    run_cli,
    write_mmts,
)

__all__ = [
    "EegmatchError",
    "band_gain",
    "bandpass",
    "eeg_encoder_parameter_count",
    "generate_synthetic",
    "infonce_loss",
    "infonce_lower_bound",
    "multiband",
    "pca_fit",
    "pearson",
    "read_mmts",
    "read_words",
    "resample",
    "run_cli",
    "write_mmts",
]
