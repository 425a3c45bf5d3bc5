"""Optimal anisotropy functions for planar curves.

Given a closed planar curve, find the truncated-Fourier anisotropy that
minimizes the anisoperimetric ratio, by lifting the underlying indefinite
quadratic program to an augmented semidefinite relaxation and solving it
with the built-in interior-point method.
"""

from .curve import (
    CurveError,
    GeometryError,
    LengthSpectrum,
    PlanarCurve,
    builtin_curve,
    discrete_tangents,
    enclosed_area,
    length_spectrum,
    polyline_length,
    read_curve_file,
    series_estimate_gap,
    toeplitz_min_eigenvalue,
)
from .anisotropy import (
    AnisotropyFn,
    ConeCertificate,
    ConeMembership,
    OutOfConeError,
    anisoperimetric_ratio,
    anisotropy_strength,
    bochner_toeplitz,
    cone_membership,
    evaluate,
    evaluate_stiffness,
    frank_boundary,
    interface_energy,
    sobolev_norm,
    wulff_area,
    wulff_boundary,
)
from .sdp import IpmOptions, SdpSolution, SdpStandardForm, SolverFailureError, residuals, solve
from .relaxation import (
    AffineLmi,
    ExtractionError,
    QcqpProblem,
    QuadConstraint,
    RelaxedSdp,
    SumCoupledPsd,
    WulffSolveResult,
    assemble_wulff_qcqp,
    check_assumption_A,
    complex_to_real,
    enhance,
    extract_solution,
    solve_inverse_wulff,
)
from .analysis import (
    SweepRow,
    convergence_sweep,
    damped_projection,
    experimental_order,
    sobolev_growth_report,
)

__version__ = "0.1.0"
