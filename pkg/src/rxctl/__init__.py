"""Desk-scale simulation and tuning toolkit for fuzzy fractional-order
PID control of a 500 MW PWR point-kinetics model, with long-range
dependent sensor noise, self-similar network delay and GA-based tuning.
"""

from .controller import FuzzyFOPIDConfig, preset, small_signal_gains
from .fracops import (
    OustaloupFilter,
    frac_derivative_stream,
    frac_integral_stream,
    generate_fgn,
    oustaloup_design,
    theoretical_fgn_acf,
)
from .fuzzy import MembershipFamily, RuleBase, fuzzify, infer
from .reactor import (
    LinearStateSpace,
    RationalTF,
    ReactorParams,
    ReactorState,
    dc_gain,
    derivatives,
    integrate,
    linearize,
    params_for_power,
    steady_state,
    to_transfer_function,
    total_reactivity,
)
from .sim import Scenario, SimResult, load_scenario, reproduce_grid, run_scenario
from .stochastic import (
    DelaySpec,
    HurstEstimate,
    NoiseSpec,
    delay_line,
    generate_delay_series,
    rs_hurst,
    running_variance,
    sample_acf,
)
from .tuner import (
    GAConfig,
    ObjectiveSpec,
    evaluate_objective,
    expected_objective,
    ga_optimize,
    tune_scenario,
)

__version__ = "0.1.0"
