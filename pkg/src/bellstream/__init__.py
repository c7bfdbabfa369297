"""Crowd-sourced bit streaming with simulated Bell-test consumers.

The package splits into a next-bit predictor (the game's Oracle), a
pure statistics kernel over count tables, quantum/classical trial
simulators, a streaming hub with health checks and a replayable monitor
log, and a CLI tying them together.
"""

from .predictor import PredictorState, Prediction, SessionScore, score_session
from .tables import (
    BellResult, CountTable, NoDataError, ShapeError, TimeBinCounts, TriCountTable,
)
from .inequalities import (
    bias_stats, bilocality, chsh, chsh_value, correlator, k_statistic,
    mdl_i0, mdl_inequality, mdl_threshold_from_chsh, sigma,
    steering_s16, steering_s16_from_table,
)
from .seqtest import HypothesisReport, RelevantEvent, binom_sf, hypothesis_test
from .quantum import BlochPairModel, PolarizationPairModel, singlet_agree_prob, singlet_model
from .lhv import LhvStrategy, enumerate_deterministic_chsh
from .labs import LabSpec, TrialRecord, run_lab, sample_trial, simulate_timebin_trial
from .sources import FairCoinSource, MarkovBitSource, calibrated_human_source
from .hub import ArchiveReservoir, HubCore, MonitorLog, audit

__version__ = "0.1.0"

__all__ = [
    "ArchiveReservoir", "BellResult", "BlochPairModel", "CountTable",
    "FairCoinSource", "HubCore", "HypothesisReport", "LabSpec", "LhvStrategy",
    "MarkovBitSource", "MonitorLog", "NoDataError", "PolarizationPairModel",
    "Prediction", "PredictorState", "RelevantEvent", "SessionScore",
    "ShapeError", "TimeBinCounts", "TriCountTable", "TrialRecord", "audit",
    "bias_stats", "bilocality", "binom_sf", "calibrated_human_source", "chsh",
    "chsh_value", "correlator", "enumerate_deterministic_chsh",
    "hypothesis_test", "k_statistic", "mdl_i0", "mdl_inequality",
    "mdl_threshold_from_chsh", "run_lab", "sample_trial", "score_session",
    "sigma", "simulate_timebin_trial", "singlet_agree_prob", "singlet_model",
    "steering_s16", "steering_s16_from_table",
]
