"""Experiment drivers and reporting for the verification suite."""

from .params import ExperimentParams
from .report import ExperimentReport, growth_bounded, stable_within
from .runners import EXPERIMENTS, run_experiment

__all__ = ["ExperimentParams", "ExperimentReport", "EXPERIMENTS",
           "run_experiment", "growth_bounded", "stable_within"]
