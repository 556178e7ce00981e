"""Stochastic polynomial chaos emulators with active-learning reliability estimation."""

from ._core import (
    AlConfig,
    AlIterationRecord,
    AlState,
    CoefficientEnsemble,
    InputModel,
    Marginal,
    PfEstimate,
    SpceModel,
    StochasticSimulator,
    TrainConfig,
    beta_from_pf,
    build_index_set,
    damped_sigma_grid,
    fisher_information,
    fit,
    learning_scores,
    log_likelihood,
    make_dataset_simulator,
    make_testbed,
    mcs_indicator,
    moving_window_stats,
    pf_from_model,
    pf_from_s,
    read_dataset_csv,
    rs_analytic_beta,
    rs_analytic_pf,
    rs_conditional_s,
    run_active_loop,
    sample_coefficients,
    select_batch,
    sir_simulate,
    smooth_pf,
    testbed_input_model,
    toy_conditional_s,
    write_dataset_csv,
)

__all__ = [
    "AlConfig",
    "AlIterationRecord",
    "AlState",
    "CoefficientEnsemble",
    "InputModel",
    "Marginal",
    "PfEstimate",
    "SpceModel",
    "StochasticSimulator",
    "TrainConfig",
    "beta_from_pf",
    "build_index_set",
    "damped_sigma_grid",
    "fisher_information",
    "fit",
    "learning_scores",
    "log_likelihood",
    "make_dataset_simulator",
    "make_testbed",
    "mcs_indicator",
    "moving_window_stats",
    "pf_from_model",
    "pf_from_s",
    "read_dataset_csv",
    "rs_analytic_beta",
    "rs_analytic_pf",
    "rs_conditional_s",
    "run_active_loop",
    "sample_coefficients",
    "select_batch",
    "sir_simulate",
    "smooth_pf",
    "testbed_input_model",
    "toy_conditional_s",
    "write_dataset_csv",
]

__version__ = "0.1.0"
