"""Translation breakdown detection from MT quality metrics."""

from ._core import (
    BLEU_SIGNATURE,
    CHRF_SIGNATURE,
    BreakdownInstance,
    BreakdownLabel,
    ConfusionMatrix,
    MtbreakError,
    Prediction,
    Segment,
    Task,
    ThresholdModel,
    TranslationInstance,
    build_benchmark,
    chrf,
    classify,
    confusion,
    ensemble_vote,
    fit_threshold,
    load_instances,
    macro_f1,
    mcc,
    parse_instances,
    random_baseline,
    run_pipeline,
    sentence_bleu,
    tokenize_13a,
)

__version__ = "0.1.0"
