"""Enhanced semidefinite relaxation of indefinite quadratic programs.

The generic problem handled here is

    minimize    x' P0 x + 2 q0' x + r0
    subject to  x' P_l x + 2 q_l' x + r_l <= 0    (P_l PSD),  l = 1..d
                A x = b
                H_0 + sum_j x_j H_j >= 0          (complex Hermitian LMI)
                optional PSD matrix variables coupled to x through
                subdiagonal sums (the admissibility-cone systems)

Its relaxation lifts x to a block T = [[X, x], [x', 1]] >= 0 and augments
the equalities with either the full coupling A X = b x' or its single
trace form tr(A'A X) = b'A x.  Without the augmentation the relaxation of
the area-maximization instance is unbounded below; with it, the relaxed
optimum equals the original one whenever some V makes
P0 + (V'A + A'V)/2 positive semidefinite (with V = rho A in trace mode).

The area-maximization instance itself is assembled by `assemble_wulff_qcqp`
from a curve's length spectrum: n = 2N real unknowns (real and imaginary
coefficient parts), an indefinite diagonal quadratic form, one energy
equality, one reality pin, and two coupled PSD systems enforcing cone
membership of the recovered anisotropy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import sdp as _sdp
from .anisotropy import (
    AnisotropyFn,
    ConeCertificate,
    anisoperimetric_ratio,
    cone_membership,
    interface_energy,
    scale as scale_anisotropy,
    wulff_area,
)
from .curve import LengthSpectrum, PlanarCurve, length_spectrum
from .sdp import IpmOptions, SdpSolution, SolverFailureError

__all__ = [
    "QuadConstraint",
    "AffineLmi",
    "SumCoupledPsd",
    "QcqpProblem",
    "RelaxedSdp",
    "WulffSolveResult",
    "SolveDiagnostics",
    "ExtractionError",
    "assemble_wulff_qcqp",
    "complex_to_real",
    "enhance",
    "check_assumption_A",
    "extract_solution",
    "solve_inverse_wulff",
]

AUGMENTATION_MODES = ("full", "trace")


class ExtractionError(RuntimeError):
    """The recovered point violates the admissibility cone beyond tolerance."""


def complex_to_real(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a complex Hermitian matrix.

    PSD iff the input is; every eigenvalue appears twice and the trace
    doubles.  Rejects non-Hermitian input.
    """
    return _sdp.embed_hermitian(h)


@dataclass(frozen=True)
class QuadConstraint:
    """x' P x + 2 q' x + r <= 0 with P positive semidefinite."""

    P: np.ndarray
    q: np.ndarray
    r: float

    def __post_init__(self):
        p = 0.5 * (np.asarray(self.P, dtype=float) + np.asarray(self.P, dtype=float).T)
        q = np.asarray(self.q, dtype=float)
        if p.shape[0] != p.shape[1] or len(q) != p.shape[0]:
            raise ValueError("inconsistent quadratic constraint dimensions")
        if np.linalg.eigvalsh(p)[0] < -1e-10 * max(1.0, float(np.abs(p).max())):
            raise ValueError("quadratic constraint matrix must be PSD")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class AffineLmi:
    """H_0 + sum_j x_j H_j >= 0 with complex Hermitian H_j."""

    matrices: tuple  # H_0, H_1, ..., H_n

    def __post_init__(self):
        mats = tuple(np.asarray(h, dtype=complex) for h in self.matrices)
        if not mats:
            raise ValueError("need at least H_0")
        k = mats[0].shape[0]
        for h in mats:
            if h.shape != (k, k):
                raise ValueError("all LMI matrices must share one square shape")
            _sdp.embed_hermitian(h)  # validates Hermitian symmetry
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]


@dataclass(frozen=True)
class SumCoupledPsd:
    """Hermitian PSD matrix variable with pinned subdiagonal sums.

    The k-th subdiagonal sum of the variable must equal ``weights[k] @ x``
    (a complex-linear functional of the real unknowns).
    """

    dim: int
    weights: np.ndarray  # (dim, n) complex
    label: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.shape[0] != self.dim:
            raise ValueError("need one weight row per subdiagonal")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class QcqpProblem:
    """Data of the generic nonconvex quadratic problem."""

    P0: np.ndarray
    q0: np.ndarray
    r0: float
    A: np.ndarray
    b: np.ndarray
    quad_constraints: tuple = ()
    lmi: AffineLmi | None = None
    sum_coupled: tuple = ()

    def __post_init__(self):
        p0 = 0.5 * (np.asarray(self.P0, dtype=float) + np.asarray(self.P0, dtype=float).T)
        q0 = np.asarray(self.q0, dtype=float)
        a = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        n = p0.shape[0]
        if p0.shape != (n, n) or len(q0) != n:
            raise ValueError("objective dimensions are inconsistent")
        if a.size:
            if a.ndim != 2 or a.shape[1] != n or a.shape[0] != len(b):
                raise ValueError("equality constraint dimensions are inconsistent")
        elif len(b):
            raise ValueError("b given without A")
        for qc in self.quad_constraints:
            if qc.P.shape[0] != n:
                raise ValueError("quadratic constraint has wrong dimension")
        if self.lmi is not None and len(self.lmi.matrices) != n + 1:
            raise ValueError("LMI family must have exactly n + 1 matrices")
        for sc in self.sum_coupled:
            if sc.weights.shape[1] != n:
                raise ValueError("coupled system weights have wrong width")
        for name, arr in (("P0", p0), ("q0", q0), ("A", a), ("b", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "quad_constraints", tuple(self.quad_constraints))
        object.__setattr__(self, "sum_coupled", tuple(self.sum_coupled))

    @property
    def dim(self) -> int:
        return self.P0.shape[0]

    @property
    def num_equalities(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class RelaxedSdp:
    """Standard-form lift of a `QcqpProblem` plus index bookkeeping."""

    form: _sdp.SdpStandardForm
    problem: QcqpProblem
    augmentation_mode: str
    t_block: int
    slack_blocks: tuple
    lmi_block: int | None
    coupled_blocks: tuple

    @property
    def n(self) -> int:
        return self.problem.dim

    def lifted_parts(self, solution: SdpSolution):
        """(x, X) read from the border and interior of the lifted block."""
        t = solution.primal_blocks[self.t_block]
        n = self.n
        return t[:n, n].copy(), t[:n, :n].copy()

    def coupled_matrix(self, solution: SdpSolution, index: int) -> np.ndarray:
        """De-embedded Hermitian value of the index-th coupled PSD system."""
        return _sdp.extract_hermitian(
            solution.primal_blocks[self.coupled_blocks[index]])

    def export_json(self, stream) -> None:
        """Dump the standard-form data for cross-checks with other solvers."""
        json.dump(self.form.to_json_dict(), stream, indent=1)


# ---------------------------------------------------------------------------
# Wulff instance assembly
# ---------------------------------------------------------------------------

def assemble_wulff_qcqp(spectrum: LengthSpectrum, modes: int) -> QcqpProblem:
    """Area-maximization instance for a curve spectrum with N Fourier modes.

    Unknowns x = [real parts; imaginary parts] of sigma_0..sigma_{N-1}.
    The quadratic form is diag(p_0..p_{N-1}, p_0..p_{N-1}) with p_0 = -pi,
    p_1 = 0 and p_k = 2 pi (k^2 - 1); its negative value at a feasible x is
    the Wulff area.  The two equality rows fix the interface energy to the
    curve length and pin the imaginary part of sigma_0 to zero.  Two coupled
    PSD systems tie the admissibility certificate to x.
    """
    if modes < 2:
        raise ValueError("need at least 2 modes")
    if spectrum.modes < modes:
        raise ValueError(
            f"spectrum stores {spectrum.modes} coefficients, need {modes}")
    n = 2 * modes
    k = np.arange(modes)
    diag = np.where(k == 0, -np.pi, 2.0 * np.pi * (k * k - 1.0))
    p0 = np.diag(np.concatenate([diag, diag]))

    c = spectrum.coeffs[:modes]
    alpha = np.where(k == 0, c.real, 2.0 * c.real)
    beta = np.where(k == 0, 0.0, 2.0 * c.imag)
    a = np.zeros((2, n))
    a[0, :modes] = alpha
    a[0, modes:] = beta
    a[1, modes] = 1.0
    b = np.array([spectrum.length, 0.0])

    weights_f = np.zeros((modes, n), dtype=complex)
    weights_g = np.zeros((modes, n), dtype=complex)
    for kk in range(modes):
        weights_f[kk, kk] = 1.0
        weights_f[kk, modes + kk] = 1j
        factor = 1.0 - kk * kk
        weights_g[kk, kk] = factor
        weights_g[kk, modes + kk] = 1j * factor

    return QcqpProblem(
        P0=p0,
        q0=np.zeros(n),
        r0=0.0,
        A=a,
        b=b,
        sum_coupled=(
            SumCoupledPsd(dim=modes, weights=weights_f, label="F"),
            SumCoupledPsd(dim=modes, weights=weights_g, label="G"),
        ),
    )


# ---------------------------------------------------------------------------
# Lifting
# ---------------------------------------------------------------------------

def _border_entries(t_block, n, coeffs):
    """Entries realizing sum_j coeffs[j] * x_j on the lifted block border."""
    return [(t_block, j, n, 0.5 * cj) for j, cj in enumerate(coeffs) if cj != 0.0]


def enhance(problem: QcqpProblem, mode: str = "trace") -> RelaxedSdp:
    """Lift ``problem`` to standard form with the augmented coupling.

    ``mode="full"`` adds the m*n equalities A X = b x'; ``mode="trace"``
    adds the single equality tr(A'A X) = b'A x.  Both keep the corner of
    the lifted block pinned to one.  Diagnostic ``mode="none"`` omits the
    augmentation entirely (the plain relaxation, unbounded for the
    area-maximization instance).
    """
    if mode not in AUGMENTATION_MODES + ("none",):
        raise ValueError(f"mode must be one of {AUGMENTATION_MODES}")
    n = problem.dim
    m = problem.num_equalities

    dims = [n + 1]
    slack_blocks = []
    for _ in problem.quad_constraints:
        slack_blocks.append(len(dims))
        dims.append(1)
    lmi_block = None
    if problem.lmi is not None:
        lmi_block = len(dims)
        dims.append(2 * problem.lmi.dim)
    coupled_blocks = []
    for sc in problem.sum_coupled:
        coupled_blocks.append(len(dims))
        dims.append(2 * sc.dim)

    form = _sdp.SdpStandardForm(dims)
    tb = 0

    # objective: tr(P0 X) + 2 q0' x + r0, with r0 carried by the pinned corner
    for i in range(n):
        for j in range(i, n):
            v = problem.P0[i, j]
            if v != 0.0:
                form.add_objective_entry(tb, i, j, v)
    for j, qj in enumerate(problem.q0):
        if qj != 0.0:
            form.add_objective_entry(tb, j, n, qj)
    if problem.r0 != 0.0:
        form.add_objective_entry(tb, n, n, problem.r0)

    # corner pin
    form.add_constraint([(tb, n, n, 1.0)], 1.0)

    # Ax = b
    for row in range(m):
        form.add_constraint(_border_entries(tb, n, problem.A[row]), problem.b[row])

    # augmentation
    if m and mode == "trace":
        ata = problem.A.T @ problem.A
        bta = problem.b @ problem.A
        entries = []
        for i in range(n):
            for j in range(i, n):
                if ata[i, j] != 0.0:
                    entries.append((tb, i, j, ata[i, j]))
        entries += _border_entries(tb, n, -bta)
        form.add_constraint(entries, 0.0)
    elif m and mode == "full":
        for row in range(m):
            for col in range(n):
                entries = []
                for s in range(n):
                    v = problem.A[row, s]
                    if v == 0.0:
                        continue
                    if s == col:
                        entries.append((tb, s, col, v))
                    else:
                        entries.append((tb, min(s, col), max(s, col), 0.5 * v))
                bj = problem.b[row]
                if bj != 0.0:
                    entries.append((tb, col, n, -0.5 * bj))
                form.add_constraint(entries, 0.0)

    # quadratic inequalities through scalar slacks
    for idx, qc in enumerate(problem.quad_constraints):
        entries = []
        for i in range(n):
            for j in range(i, n):
                if qc.P[i, j] != 0.0:
                    entries.append((tb, i, j, qc.P[i, j]))
        entries += _border_entries(tb, n, qc.q)
        entries.append((slack_blocks[idx], 0, 0, 1.0))
        form.add_constraint(entries, -qc.r)

    # affine LMI: embedded block equals H_0 + sum_j x_j H_j entrywise
    if problem.lmi is not None:
        kdim = problem.lmi.dim
        h0 = problem.lmi.matrices[0]
        hx = problem.lmi.matrices[1:]
        for rr in range(kdim):
            for cc in range(rr, kdim):
                for part in ("re", "im"):
                    if part == "im" and rr == cc:
                        continue
                    entries = list(_sdp.hermitian_entry_coefficients(
                        lmi_block, kdim, cc, rr, 1.0, part))
                    coeffs = np.array([
                        (h.real[cc, rr] if part == "re" else h.imag[cc, rr])
                        for h in hx
                    ])
                    entries += _border_entries(tb, n, -coeffs)
                    rhs = h0.real[cc, rr] if part == "re" else h0.imag[cc, rr]
                    form.add_constraint(entries, rhs)

    # coupled PSD systems: subdiagonal sums pinned to functionals of x
    for sc_idx, sc in enumerate(problem.sum_coupled):
        block = coupled_blocks[sc_idx]
        d = sc.dim
        for kk in range(d):
            re_entries, im_entries = [], []
            for p in range(kk, d):
                re_entries += _sdp.hermitian_entry_coefficients(block, d, p, p - kk, 1.0, "re")
                im_entries += _sdp.hermitian_entry_coefficients(block, d, p, p - kk, 1.0, "im")
            w = sc.weights[kk]
            form.add_constraint(re_entries + _border_entries(tb, n, -w.real), 0.0)
            im_border = _border_entries(tb, n, -w.imag)
            if kk > 0 or im_border:
                form.add_constraint(im_entries + im_border, 0.0)

    return RelaxedSdp(
        form=form,
        problem=problem,
        augmentation_mode=mode,
        t_block=tb,
        slack_blocks=tuple(slack_blocks),
        lmi_block=lmi_block,
        coupled_blocks=tuple(coupled_blocks),
    )


def check_assumption_A(problem: QcqpProblem, rho: float) -> float:
    """Minimum eigenvalue of P0 + rho A'A.

    A value >= -1e-9 certifies the exactness condition with V = rho A.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not problem.A.size:
        return float(np.linalg.eigvalsh(problem.P0)[0])
    return float(np.linalg.eigvalsh(problem.P0 + rho * (problem.A.T @ problem.A))[0])


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveDiagnostics:
    """Relaxation-tightness and residual report for one solve."""

    tightness_gap: float        # tr(P0 X) - x' P0 x
    min_eig_lift: float         # smallest eigenvalue of X - x x'
    equality_residual: float    # ||A x - b||
    augmentation_residual: float
    cone_margin: float          # grid margin of the recovered sigma
    renormalization: float      # factor applied to match the target energy
    solver_status: str
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float
    constraint_count: int
    variable_count: int


@dataclass(frozen=True)
class WulffSolveResult:
    """Optimal anisotropy for one curve spectrum at fixed mode count."""

    sigma: AnisotropyFn
    certificate: ConeCertificate
    ratio: float
    wulff_area: float
    objective: float
    modes: int
    spectrum: LengthSpectrum
    diagnostics: SolveDiagnostics


def _variable_count(form: _sdp.SdpStandardForm) -> int:
    return sum(d * (d + 1) // 2 for d in form.block_dims)


def extract_solution(solution: SdpSolution, spectrum: LengthSpectrum, modes: int,
                     relaxed: RelaxedSdp | None = None) -> WulffSolveResult:
    """Recover the anisotropy and quality report from a solved relaxation.

    The coefficient vector is read from the lifted block border (never from
    a factorization of X, which is rank-deficient in degenerate cases), then
    rescaled so the interface energy matches the curve length exactly; the
    scaling leaves the ratio invariant and is recorded in the diagnostics.
    """
    if relaxed is None:
        relaxed = enhance(assemble_wulff_qcqp(spectrum, modes), "trace")
    if solution.status != _sdp.OPTIMAL:
        raise SolverFailureError(
            f"cannot extract from solver status {solution.status}", solution)

    problem = relaxed.problem
    n = problem.dim
    x, big_x = relaxed.lifted_parts(solution)

    coeffs = x[:modes] + 1j * x[modes:]
    coeffs[0] = coeffs[0].real  # pinned by the second equality row
    sigma_raw = AnisotropyFn(coeffs)

    energy_raw = interface_energy(sigma_raw, spectrum)
    if energy_raw <= 0:
        raise ExtractionError("recovered anisotropy has nonpositive interface energy")
    factor = spectrum.length / energy_raw
    sigma = scale_anisotropy(sigma_raw, factor)

    f_mat = relaxed.coupled_matrix(solution, 0) * factor
    g_mat = relaxed.coupled_matrix(solution, 1) * factor
    certificate = ConeCertificate(F=f_mat, G=g_mat)

    membership = cone_membership(sigma, method="grid")
    if membership.margin < -1e-6 * membership.scale:
        raise ExtractionError(
            f"recovered anisotropy leaves the cone: grid margin "
            f"{membership.margin:.3e} (scale {membership.scale:.3e})")

    tightness = float(np.vdot(problem.P0, big_x).real - x @ problem.P0 @ x)
    lift_eig = float(np.linalg.eigvalsh(big_x - np.outer(x, x))[0])
    eq_res = float(np.linalg.norm(problem.A @ x - problem.b)) if problem.A.size else 0.0
    if not problem.A.size:
        aug_res = 0.0
    elif relaxed.augmentation_mode == "full":
        aug_res = float(np.linalg.norm(problem.A @ big_x - np.outer(problem.b, x)))
    else:
        ata = problem.A.T @ problem.A
        aug_res = abs(float(np.vdot(ata, big_x).real - problem.b @ problem.A @ x))

    diagnostics = SolveDiagnostics(
        tightness_gap=tightness,
        min_eig_lift=lift_eig,
        equality_residual=eq_res,
        augmentation_residual=aug_res,
        cone_margin=membership.margin,
        renormalization=factor,
        solver_status=solution.status,
        iterations=solution.iterations,
        gap=solution.gap,
        primal_residual=solution.primal_residual,
        dual_residual=solution.dual_residual,
        constraint_count=relaxed.form.num_constraints,
        variable_count=_variable_count(relaxed.form),
    )
    return WulffSolveResult(
        sigma=sigma,
        certificate=certificate,
        ratio=anisoperimetric_ratio(sigma, spectrum),
        wulff_area=wulff_area(sigma),
        objective=solution.objective,
        modes=modes,
        spectrum=spectrum,
        diagnostics=diagnostics,
    )


def solve_inverse_wulff(curve: PlanarCurve, modes: int,
                        options: IpmOptions | None = None,
                        augmentation: str = "trace",
                        log=None) -> WulffSolveResult:
    """Spectrum -> assembly -> lifting -> interior point -> extraction.

    Deterministic for identical inputs and options.
    """
    if augmentation not in AUGMENTATION_MODES:
        raise ValueError(f"augmentation must be one of {AUGMENTATION_MODES}")
    spectrum = length_spectrum(curve, modes)
    problem = assemble_wulff_qcqp(spectrum, modes)
    relaxed = enhance(problem, augmentation)
    opts = options or IpmOptions()
    if augmentation == "full" and opts.regularization == 0.0:
        # the full coupling removes the relative interior; a small Schur
        # regularization keeps the normal equations factorizable
        opts = IpmOptions(
            max_iterations=opts.max_iterations,
            gap_tolerance=opts.gap_tolerance,
            residual_tolerance=opts.residual_tolerance,
            step_fraction=opts.step_fraction,
            regularization=1e-9,
        )
    solution = _sdp.solve(relaxed.form, opts, log=log)
    return extract_solution(solution, spectrum, modes, relaxed=relaxed)
