"""pLogP performance models for intra-cluster collective communication."""

from .contention import (
    ContentionModel,
    MeasurementSet,
    fit_gamma,
    linear_contention_time,
    predict_alltoall,
)
from .models import ModelError, Prediction, Strategy, evaluate, tree_feasible
from .params import ParamFileError, ParamTable, SegmentSpec, load_table, read_table
from .segment import hill_climb, optimize_segment, sweep_powers_of_two
from .selector import SelectionReport, select
from .simulator import simulate_alltoall, simulate_broadcast, simulate_scatter

__all__ = [
    "ContentionModel", "MeasurementSet", "ModelError", "ParamFileError", "ParamTable",
    "Prediction", "SegmentSpec", "SelectionReport", "Strategy", "evaluate", "fit_gamma",
    "hill_climb", "linear_contention_time", "load_table", "optimize_segment",
    "predict_alltoall", "read_table", "select", "simulate_alltoall", "simulate_broadcast",
    "simulate_scatter", "sweep_powers_of_two", "tree_feasible",
]
