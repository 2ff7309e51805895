"""HRV feature extraction, overlap-weighted feature selection and exercise-state classification."""

from .classifiers import (
    DecisionTree,
    GaussianNB,
    KNNClassifier,
    LinearSVM,
    NeuralNetwork,
    load_model,
    save_model,
)
from .core import (
    FEATURE_NAMES,
    ExerciseState,
    LabeledDataset,
    RRSeries,
    Window,
    Zone,
    intensity_zone,
    segment_windows,
    synthesize_dataset,
    synthesize_feature_dataset,
)
from .errors import HRVError, ParseError
from .experiment import run_experiment, stratified_folds
from .features import ExtractionConfig, extract_dataset, extract_features
from .frequency import band_powers, rr_spectrum
from .nonlinear import apen, dfa, sampen
from .selection import overlap_area, rank_features
from .time_domain import time_domain
from .trend import eval_trend, fit_trend

__all__ = [
    "DecisionTree", "GaussianNB", "KNNClassifier", "LinearSVM", "NeuralNetwork",
    "load_model", "save_model",
    "FEATURE_NAMES", "ExerciseState", "LabeledDataset", "RRSeries", "Window", "Zone",
    "intensity_zone", "segment_windows", "synthesize_dataset", "synthesize_feature_dataset",
    "HRVError", "ParseError", "run_experiment", "stratified_folds",
    "ExtractionConfig", "extract_dataset", "extract_features",
    "band_powers", "rr_spectrum", "apen", "dfa", "sampen",
    "overlap_area", "rank_features", "time_domain", "eval_trend", "fit_trend",
]
