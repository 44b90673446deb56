"""Quantum Fisher information of temperature-encoded qubit probes.

Thermal, purified and thermal-marginal initial states, two-qubit unitary
families, CPTP and non-CP encodings, QFI evaluation, a box-constrained
Nelder-Mead optimizer and temperature sweeps.
"""

from .channels import EncodingScenario, encode_cptp, encode_ncptp1, encode_ncptp2, joint_evolved_state
from .fisher import (
    SpectrumDerivative,
    StencilConfig,
    cramer_rao_bound,
    qfi,
    qfi_pure_state,
    qfi_thermal_closed_form,
    state_derivative_stencil,
)
from .linalg import eig_hermitian, exp_minus_i_hermitian, partial_trace_env, tensor
from .optimize import OptimizationProblem, OptimizationResult, optimize, scenario_problem
from .states import (
    BlochVector,
    TwoQubitStateParams,
    bloch_state,
    constrained_two_qubit_state,
    purification,
    r_coefficient,
    dr_dT,
    sample_constrained_state,
    thermal_state,
)
from .sweep import SweepConfig, SweepRecord, emit_results, run_sweep
from .unitaries import (
    EnergyConservingParams,
    KrausCiracParams,
    LocalU1Params,
    Su2Params,
    XyModelParams,
    energy_conserving,
    kraus_cirac,
    local_u1,
    su2,
    swap_like,
    xy_unitary,
)
from .verify import verify_suite

__version__ = "0.1.0"
