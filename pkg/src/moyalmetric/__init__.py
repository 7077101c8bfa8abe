"""Metric structure of the Moyal quantum plane on a truncated Fock space.

Submodules:
    fock        coordinate operators, canonical states, translations
    starprod    star product with integral-formula and Fourier oracles
    lengthop    length operator, quantum (square-)length, modified length
    spectral    Dirac calculus, spectral distances, optimal elements
    doubling    two-sheet triple, Pythagoras theorem, identification sweeps
    config      layered run configuration (file, environment, flags)
    stateexpr   textual grammar for states used by the command line
    acceptance  ten-point verification battery over the certified results
    cli         batch commands with reproducible CSV/JSON output
"""

from .fock import (
    ContextMismatchError,
    FockContext,
    LeakageError,
    Operator,
    QState,
    annihilation,
    coherent_state,
    creation,
    displace,
    displacement_operator,
    eigenstate,
    evaluate,
    hamiltonian,
    identity,
    leakage,
    make_context,
    mixed_state,
    quadratures,
    superposition_state,
    uncertainty_product,
    vacuum_projector,
)
from .lengthop import (
    CounterexampleResult,
    LengthOperator,
    build_length,
    counterexample_L2prime,
    d_L,
    d_L2,
    modified_length,
)
from .doubling import (
    DoubledDirac,
    PythagorasResult,
    SheetState,
    SweepTable,
    doubled_distance,
    identification_sweep,
    make_doubled,
    pythagoras_check,
    reference_lambda,
)
from .spectral import (
    DiracCalculus,
    DiscrepancyResult,
    DistanceReport,
    SolverConfig,
    closed_form_for,
    distance_closed_form,
    distance_diagonal_lp,
    distance_solver,
    length_vs_optimal_discrepancy,
    lipschitz_seminorm,
    optimal_element_eigenstates,
    optimal_element_translation,
    scaled_distance,
)
from .starprod import (
    SampledSymbol,
    star_fourier,
    star_integral,
    star_integral_report,
    star_matrix,
    twisted_convolution,
    vacuum_symbol,
    window_profile,
)
from .config import ConfigError, RunConfig, load_config_file, resolve_config
from .stateexpr import (
    StateExprError,
    build_state,
    format_state_expr,
    parse_state_expr,
)
from .acceptance import CriterionResult, run_all, run_one

__version__ = "0.1.0"
