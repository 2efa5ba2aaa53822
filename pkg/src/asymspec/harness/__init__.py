from .checks import SUITES, CheckResult, run_suite
from .experiments import (
    ExperimentSummary,
    TrialRecord,
    paper_config,
    reproduce_figure,
    run_dyson_check,
    run_eigvec_projection,
    run_first_order,
    run_heavy_tail_comparison,
    run_iid_outlier,
    run_null_calibration,
    run_qf_scaling,
    run_second_order,
    run_trace_moments,
)
from .pool import map_trials
