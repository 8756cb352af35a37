"""Numerical verification toolkit for tt*-geometry (CV-structures) in local frames."""

from .connection import (
    FiberConnection,
    LineConnection,
    Monodromy,
    assemble,
    direct_sum,
    line_decomposition,
    monodromy_closed,
    monodromy_numeric,
)
from .errors import *  # noqa: F401,F403
from .hodge import VHSData, exchange_kappa, polarization_signs, roundtrip_check, ttstar_to_vhs, vhs_to_ttstar
from .jets import (
    ConnectionData,
    Jet,
    JetPoly,
    MatrixField,
    chern_connection,
    covariant_d,
    curvature_residual,
    d_anti,
    d_holo,
    field_mul,
)
from .linalg import (
    change_frame,
    g_adjoint,
    h_adjoint,
    hermitian_eigen,
    matrix_exp,
    orthonormal_frame,
    solve_dense,
)
from .model import CheckReport, CVBundleData, check_harmonic, check_integrable, check_real, dump, full_report, load
from .spectrum import (
    SpectrumReport,
    flat_diagonalize,
    graded_normal_vanishing,
    grading_shift_check,
    pairing_spectrum,
)
from .sylvester import ISReport, is_condition, recover_higgs, solve_sylvester, theorem_u0_verify

__version__ = "0.1.0"
