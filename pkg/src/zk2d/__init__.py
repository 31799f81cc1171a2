"""zk2d: spectral-Galerkin simulation of u_t + u^2 u_x + u_xxx + u_xyy = 0
on a rectangle (0,L) x (0,B), with an energy-method verification harness.

The solution vanishes on the whole boundary and additionally u_x(L,y,t) = 0.
The solver expands u in Dirichlet sine modes in y and integrates the coupled
modal KdV-type system in (x,t) with an IMEX scheme.  Diagnostics track the
L2 budget, the (1+x)-weighted energy law, decay envelopes at the rate chi,
and the functional inequalities the analysis rests on.
"""

from .config import (
    DomainSpec,
    GridSpec,
    InitialData,
    CanonicalData,
    TabulatedData,
    CallableData,
    RunConfig,
    ConfigError,
    make_canonical_u0,
    validate_compatibility,
    parse_config,
    write_config,
)
from .basis import SineBasis, eigenvalue
from .operators import build_x_operators, fd_weights
from .solver import (
    ModalState,
    LinearOperatorPlan,
    GalerkinSolver,
    ManufacturedSolution,
    BlowUpError,
    RunResult,
    initialize,
    run,
)
from .functionals import EnergyRecord, Diagnostics, identity_residuals, CSV_COLUMNS
from .inequalities import (
    TestFunctionFamily,
    SinePoly,
    ThresholdReport,
    compute_chi,
    compute_threshold_m,
    check_ladyzhenskaya,
    check_steklov,
    check_sup_bound,
)
from .decay import DecayFit, RunReport, fit_rate, check_envelope, decay_report

__version__ = "0.1.0"
