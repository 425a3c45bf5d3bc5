"""Primal-dual interior-point solver for block-diagonal semidefinite programs.

The standard form handled here is

    minimize    sum_b <C_b, Z_b>
    subject to  sum_b <A_ib, Z_b> = b_i     for i = 0..m-1
                Z_b >= 0 (positive semidefinite) for every block b

with all data real symmetric.  Matrices are stored as sparse entry triplets
``(block, i, j, value)``; an off-diagonal triplet sets both ``(i, j)`` and
``(j, i)`` to ``value``, so it contributes ``2 * value * Z[i, j]`` to an
inner product.

The solver is an infeasible-start path-following method with Nesterov-Todd
scaling and a Mehrotra predictor-corrector step.  It is deterministic: the
initial iterate is fixed and no randomness is used anywhere.

Complex Hermitian blocks are supported through the standard real embedding
(`embed_hermitian`); `hermitian_entry_coefficients` produces constraint
entries that address the real or imaginary part of a single complex entry
inside an embedded block in a way that is invariant under the embedding
symmetry, so the relaxation over the embedded block is exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack as _lapack
from scipy.linalg import qr as _qr
from scipy.linalg import solve_triangular

__all__ = [
    "SdpStandardForm",
    "IpmOptions",
    "SdpSolution",
    "SolverFailureError",
    "solve",
    "residuals",
    "embed_hermitian",
    "extract_hermitian",
    "hermitian_entry_coefficients",
]

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_FAILURE = "numerical_failure"


class SolverFailureError(RuntimeError):
    """The interior-point iteration broke down before reaching the target
    tolerances (singular Schur system beyond regularization, or collapsed
    step lengths)."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


# ---------------------------------------------------------------------------
# Hermitian embedding utilities
# ---------------------------------------------------------------------------

def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of Hermitian H.

    The embedding is positive semidefinite exactly when ``h`` is, and every
    eigenvalue of ``h`` appears twice.  Raises ``ValueError`` when ``h``
    deviates from Hermitian symmetry by more than 1e-12 (relative).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    scale = 1.0 + float(np.abs(h).max(initial=0.0))
    if float(np.abs(h - h.conj().T).max(initial=0.0)) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian within 1e-12")
    re, im = h.real, h.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    out = np.vstack([top, bot])
    return 0.5 * (out + out.T)


def extract_hermitian(y: np.ndarray) -> np.ndarray:
    """Inverse of `embed_hermitian` up to symmetry projection.

    For a general symmetric ``y`` of even dimension 2k this returns the
    Hermitian matrix given by the structured average, which is PSD whenever
    ``y`` is.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1] or y.shape[0] % 2:
        raise ValueError("expected a square matrix of even dimension")
    k = y.shape[0] // 2
    re = 0.5 * (y[:k, :k] + y[k:, k:])
    im = 0.5 * (y[k:, :k] - y[:k, k:])
    re = 0.5 * (re + re.T)
    im = 0.5 * (im - im.T)
    return re + 1j * im


def hermitian_entry_coefficients(block, dim, row, col, coeff, part):
    """Constraint entries addressing Re/Im of complex entry (row, col).

    Returns a list of ``(block, i, j, value)`` triplets acting on the real
    embedded block of a ``dim`` x ``dim`` Hermitian variable such that, for
    any symmetric iterate Y, the linear functional equals ``coeff`` times
    the real (``part='re'``) or imaginary (``part='im'``) part of the
    structured complex entry.  The coefficients are invariant under the
    embedding symmetry J Y J^T, which keeps the relaxation over the block
    exact.
    """
    if part == "re":
        positions = [(row, col, 0.5 * coeff), (dim + row, dim + col, 0.5 * coeff)]
    elif part == "im":
        if row == col:
            return []
        positions = [(dim + row, col, 0.5 * coeff), (row, dim + col, -0.5 * coeff)]
    else:
        raise ValueError("part must be 're' or 'im'")
    out = []
    for i, j, c in positions:
        # off-diagonal triplets count twice in the inner product
        out.append((block, i, j, c if i == j else 0.5 * c))
    return out


# ---------------------------------------------------------------------------
# Problem container
# ---------------------------------------------------------------------------

class SdpStandardForm:
    """Block-diagonal SDP data: objective and sparse constraint rows.

    Entries are accumulated; storage is symmetrized (an entry with i != j
    represents both (i, j) and (j, i)).
    """

    def __init__(self, block_dims):
        dims = tuple(int(d) for d in block_dims)
        if not dims or any(d <= 0 for d in dims):
            raise ValueError("block dimensions must be positive")
        self._dims = dims
        self._obj = [dict() for _ in dims]
        self._rows = []
        self._rhs = []

    @property
    def block_dims(self):
        return self._dims

    @property
    def num_constraints(self):
        return len(self._rows)

    @property
    def total_dim(self):
        return sum(self._dims)

    def _check_index(self, block, i, j):
        if not 0 <= block < len(self._dims):
            raise ValueError(f"block index {block} out of range")
        d = self._dims[block]
        if not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"entry ({i}, {j}) out of range for block of dim {d}")

    def add_objective_entry(self, block, i, j, value):
        self._check_index(block, i, j)
        key = (min(i, j), max(i, j))
        tbl = self._obj[block]
        tbl[key] = tbl.get(key, 0.0) + float(value)

    def add_constraint(self, entries, rhs):
        """Append a constraint row; returns its index."""
        row = {}
        for block, i, j, value in entries:
            self._check_index(block, i, j)
            key = (block, min(i, j), max(i, j))
            row[key] = row.get(key, 0.0) + float(value)
        row = {k: v for k, v in row.items() if v != 0.0}
        self._rows.append(row)
        self._rhs.append(float(rhs))
        return len(self._rows) - 1

    def rhs_vector(self):
        return np.array(self._rhs, dtype=float)

    def objective_blocks(self):
        return [self._dense(self._obj[b], b) for b in range(len(self._dims))]

    def constraint_blocks(self, i):
        """Dense per-block matrices of constraint row i (mostly for checks)."""
        out = [np.zeros((d, d)) for d in self._dims]
        for (b, r, c), v in self._rows[i].items():
            out[b][r, c] += v
            if r != c:
                out[b][c, r] += v
        return out

    def constraint_entries(self, i):
        return sorted((b, r, c, v) for (b, r, c), v in self._rows[i].items())

    def _dense(self, table, block):
        d = self._dims[block]
        m = np.zeros((d, d))
        for (r, c), v in table.items():
            m[r, c] += v
            if r != c:
                m[c, r] += v
        return m

    def to_json_dict(self):
        """Plain-data dump (blocks, objective, sparse rows, rhs)."""
        return {
            "blocks": list(self._dims),
            "objective": [
                [[r, c, v] for (r, c), v in sorted(tbl.items())]
                for tbl in self._obj
            ],
            "constraints": [
                {
                    "entries": [[b, r, c, v] for b, r, c, v in self.constraint_entries(i)],
                    "rhs": self._rhs[i],
                }
                for i in range(len(self._rows))
            ],
        }


@dataclass(frozen=True)
class IpmOptions:
    """Tunable knobs of the interior-point iteration."""

    max_iterations: int = 100
    gap_tolerance: float = 1e-8
    residual_tolerance: float = 1e-8
    step_fraction: float = 0.98
    regularization: float = 0.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gap_tolerance <= 0 or self.residual_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.regularization < 0:
            raise ValueError("regularization must be nonnegative")


@dataclass(frozen=True)
class SdpSolution:
    """Terminal iterate of `solve` plus convergence bookkeeping."""

    primal_blocks: tuple
    dual_vector: np.ndarray
    dual_slack: tuple
    objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str
    mu_history: tuple = field(default=())


# ---------------------------------------------------------------------------
# Presolve
# ---------------------------------------------------------------------------

def _row_signature(row):
    items = sorted(row.items())
    lead = items[0][1]
    sign = 1.0 if lead > 0 else -1.0
    return sign, tuple((k, sign * v) for k, v in items)


def _presolve(problem, options):
    """Drop zero/duplicate rows, normalize, and enforce row independence.

    Returns (rows, rhs, scales, kept_indices, extra_regularization).
    """
    rows, rhs, kept = [], [], []
    seen = {}
    for i, (row, b_i) in enumerate(zip(problem._rows, problem._rhs)):
        if not row:
            if abs(b_i) > 1e-12:
                raise ValueError(f"constraint {i} is zero with nonzero rhs {b_i}")
            continue
        sign, sig = _row_signature(row)
        if sig in seen:
            b_prev = seen[sig]
            if abs(sign * b_i - b_prev) > 1e-12 * (1.0 + abs(b_prev)):
                raise ValueError(f"constraint {i} duplicates an earlier row with a different rhs")
            continue
        seen[sig] = sign * b_i
        rows.append(row)
        rhs.append(b_i)
        kept.append(i)

    if not rows:
        raise ValueError("problem has no effective constraints")

    scales = np.empty(len(rows))
    for r, row in enumerate(rows):
        fro2 = sum(v * v if i == j else 2.0 * v * v for (b, i, j), v in row.items())
        scales[r] = math.sqrt(fro2)
    rows = [
        {k: v / s for k, v in row.items()}
        for row, s in zip(rows, scales)
    ]
    rhs = np.array(rhs) / scales

    # Gram-based independence check on the normalized rows.
    m = len(rows)
    gram = np.zeros((m, m))
    by_key = {}
    for r, row in enumerate(rows):
        for key, v in row.items():
            by_key.setdefault(key, []).append((r, v))
    for (b, i, j), hits in by_key.items():
        wgt = 1.0 if i == j else 2.0
        for a in range(len(hits)):
            ra, va = hits[a]
            for bb in range(a, len(hits)):
                rb, vb = hits[bb]
                gram[ra, rb] += wgt * va * vb
                if ra != rb:
                    gram[rb, ra] += wgt * va * vb

    extra_reg = 0.0
    c, piv, rank, info = _lapack.dpstrf(gram, tol=1e-12, lower=1)
    if rank < m:
        drop_local = sorted(int(p) - 1 for p in piv[rank:])
        warnings.warn(
            f"dropping {m - rank} linearly dependent constraint row(s): "
            f"{[kept[d] for d in drop_local]}",
            RuntimeWarning,
            stacklevel=3,
        )
        keep_mask = np.ones(m, dtype=bool)
        keep_mask[drop_local] = False
        rows = [row for r, row in enumerate(rows) if keep_mask[r]]
        rhs = rhs[keep_mask]
        scales = scales[keep_mask]
        kept = [k for r, k in enumerate(kept) if keep_mask[r]]
    else:
        eigs = np.linalg.eigvalsh(gram)
        if eigs[0] <= 0 or eigs[-1] / eigs[0] > 1e12:
            extra_reg = 1e-10

    return rows, np.asarray(rhs), scales, kept, extra_reg


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

def _stack_constraints(rows, dims):
    """Per block: (constraint indices touching it, dense stacked pieces)."""
    per_block = []
    for b, d in enumerate(dims):
        idx = [r for r, row in enumerate(rows) if any(k[0] == b for k in row)]
        stack = np.zeros((len(idx), d, d))
        for local, r in enumerate(idx):
            for (bb, i, j), v in rows[r].items():
                if bb != b:
                    continue
                stack[local, i, j] += v
                if i != j:
                    stack[local, j, i] += v
        per_block.append((np.array(idx, dtype=int), stack))
    return per_block


def _apply_A(per_block, Z, m):
    out = np.zeros(m)
    for (idx, stack), z in zip(per_block, Z):
        if len(idx):
            out[idx] += stack.reshape(len(idx), -1) @ z.ravel()
    return out


def _adjoint_A(per_block, y, dims):
    out = []
    for (idx, stack), d in zip(per_block, dims):
        if len(idx):
            out.append(np.tensordot(y[idx], stack, axes=(0, 0)))
        else:
            out.append(np.zeros((d, d)))
    return out


def _min_step(L, delta):
    """Largest alpha with  block + alpha*delta >= 0,  via the scaled
    minimum eigenvalue computed from the Cholesky factor ``L``."""
    w = solve_triangular(L, delta, lower=True)
    w = solve_triangular(L, w.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (w + w.T))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _chol_with_jitter(M, base_reg):
    scale = max(np.abs(np.diag(M)).max(), 1.0)
    for jitter in (base_reg, 1e-14 * scale, 1e-12 * scale, 1e-10 * scale, 1e-8 * scale):
        try:
            return np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            continue
    return None


def solve(problem: SdpStandardForm, options: IpmOptions | None = None, log=None) -> SdpSolution:
    """Run the interior-point iteration on ``problem``.

    Parameters
    ----------
    problem : SdpStandardForm
    options : IpmOptions, optional
    log : writable text stream, optional
        One line per iteration: objective, gap, residuals, step lengths.

    Returns
    -------
    SdpSolution
        Status ``"optimal"`` certifies gap <= gap_tolerance * (1 + |obj|)
        and both residuals <= residual_tolerance * (1 + ||b||).
    """
    opts = options or IpmOptions()
    dims = problem.block_dims
    nu = float(sum(dims))

    rows, b, scales, kept, extra_reg = _presolve(problem, opts)
    m = len(rows)
    per_block = _stack_constraints(rows, dims)
    C = problem.objective_blocks()

    b_orig = problem.rhs_vector()
    bnorm_orig = float(np.linalg.norm(b_orig))

    # Normalize objective and right-hand side; this is a pure change of
    # units (primal scales by s_b, duals by s_c) undone on exit, and it
    # keeps the cold start balanced when the objective entries are large.
    s_c = max(1.0, float(np.sqrt(sum(np.sum(c * c) for c in C))))
    s_b = max(1.0, float(np.abs(b).max(initial=0.0)))
    C = [c / s_c for c in C]
    b = b / s_b

    lam0 = max(1.0, float(np.abs(b).max(initial=0.0)),
               float(np.sqrt(sum(np.sum(c * c) for c in C))))
    Z = [lam0 * np.eye(d) for d in dims]
    S = [lam0 * np.eye(d) for d in dims]
    y = np.zeros(m)

    reg = opts.regularization + extra_reg
    mu_history = []
    status = MAX_ITERATIONS
    iters_done = 0
    failure_msg = None
    use_qr_schur = False

    def current_metrics():
        """Internal residual data plus convergence metrics in original units."""
        obj = float(sum(np.vdot(c, z).real for c, z in zip(C, Z)))
        az = _apply_A(per_block, Z, m)
        r_p = b - az
        Aty = _adjoint_A(per_block, y, dims)
        R_d = [c - s - a for c, s, a in zip(C, S, Aty)]
        gap = float(sum(np.vdot(z, s).real for z, s in zip(Z, S)))
        obj_orig = s_c * s_b * obj
        gap_orig = s_c * s_b * gap
        pres_orig = s_b * float(np.linalg.norm(r_p * scales))
        dres_orig = s_c * float(np.sqrt(sum(np.sum(r * r) for r in R_d)))
        return obj_orig, r_p, R_d, gap, gap_orig, pres_orig, dres_orig

    for it in range(opts.max_iterations):
        obj, r_p, R_d, gap_int, gap, pres, dres = current_metrics()
        mu = gap_int / nu
        mu_history.append(s_c * s_b * mu)

        if log is not None:
            log.write(
                f"{it:3d} obj={obj:+.9e} gap={gap:.3e} pres={pres:.3e} "
                f"dres={dres:.3e}\n"
            )

        if (gap <= opts.gap_tolerance * (1.0 + abs(obj))
                and pres <= opts.residual_tolerance * (1.0 + bnorm_orig)
                and dres <= opts.residual_tolerance * (1.0 + bnorm_orig)):
            status = OPTIMAL
            iters_done = it
            break
        iters_done = it + 1

        # Nesterov-Todd scaling per block: W = E E^T with W S W = Z.
        try:
            E, Einv, dvec = [], [], []
            Lz_list, Ls_list = [], []
            for z, s in zip(Z, S):
                Lz = np.linalg.cholesky(z)
                Ls = np.linalg.cholesky(s)
                U, dd, Vt = np.linalg.svd(Ls.T @ Lz)
                if dd[-1] <= 0:
                    raise np.linalg.LinAlgError("degenerate scaling point")
                e = Lz @ (Vt.T / np.sqrt(dd))
                einv = (np.sqrt(dd)[:, None] * Vt) @ solve_triangular(
                    Lz, np.eye(z.shape[0]), lower=True)
                E.append(e)
                Einv.append(einv)
                dvec.append(dd)
                Lz_list.append(Lz)
                Ls_list.append(Ls)
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            failure_msg = "iterate left the cone during scaling"
            break

        # Scaled constraint stacks and Schur complement.
        M = np.zeros((m, m))
        scaled = []
        for (idx, stack), e in zip(per_block, E):
            if not len(idx):
                scaled.append(None)
                continue
            tmp = np.matmul(stack, e)
            At = np.matmul(e.T, tmp)
            scaled.append(At)
            flat = At.reshape(len(idx), -1)
            M[np.ix_(idx, idx)] += flat @ flat.T
        if reg:
            M[np.diag_indices_from(M)] += reg

        Lm = _chol_with_jitter(M, reg)
        if Lm is None:
            use_qr_schur = True
        schur_r = None

        def build_qr_factor():
            # The Gram form squares the conditioning of the scaled
            # constraints; a QR factorization of their stack reaches the
            # same triangular factor at the square root of that condition
            # number, which is what the endgame of degenerate instances
            # needs.
            total_cols = int(sum(d * d for d in dims))
            F = np.zeros((total_cols + m, m))
            col = 0
            for (idx, _), at, d in zip(per_block, scaled, dims):
                if at is not None:
                    F[col:col + d * d, idx] = at.reshape(len(idx), -1).T
                col += d * d
            rdiag_scale = float(np.sqrt(np.abs(np.diag(M)).max()))
            tau = math.sqrt(reg) if reg else 1e-13 * rdiag_scale
            F[total_cols:, :] = tau * np.eye(m)
            r_fact = _qr(F, mode="r", check_finite=False)[0][:m, :]
            if not np.all(np.isfinite(r_fact)) or np.abs(np.diag(r_fact)).min() == 0.0:
                return None
            return r_fact

        def chol_solve(rhs):
            return solve_triangular(
                Lm.T, solve_triangular(Lm, rhs, lower=True), lower=False)

        def qr_solve(rhs):
            return solve_triangular(
                schur_r, solve_triangular(schur_r.T, rhs, lower=True),
                lower=False)

        Rd_scaled = [e.T @ r @ e for e, r in zip(E, R_d)]

        def direction_with(factor_solve, Rtilde):
            """Newton direction through one factorization, with monotone
            refinement of the primal equation A(dZ) = r_p.  The refinement
            update (dy += u, dS -= A*(u), dZ += W A*(u) W) keeps the dual
            and complementarity equations exactly satisfied."""
            rhs = r_p.copy()
            for (idx, _), at, rt, rd in zip(per_block, scaled, Rtilde, Rd_scaled):
                if at is None:
                    continue
                flat = at.reshape(len(idx), -1)
                rhs[idx] += flat @ (rd - rt).ravel()
            dy = factor_solve(rhs)
            dS = [r - a for r, a in zip(R_d, _adjoint_A(per_block, dy, dims))]
            dZ = []
            for e, rt, ds in zip(E, Rtilde, dS):
                dsh = e.T @ ds @ e
                dz = e @ (rt - dsh) @ e.T
                dZ.append(0.5 * (dz + dz.T))
            rp_scale = 1.0 + float(np.linalg.norm(r_p))
            best = (dy, dS, dZ)
            best_err = float(np.linalg.norm(r_p - _apply_A(per_block, dZ, m)))
            for _ in range(3):
                if best_err <= 1e-13 * rp_scale:
                    break
                dy, dS, dZ = best
                e_p = r_p - _apply_A(per_block, dZ, m)
                u = factor_solve(e_p)
                if not np.all(np.isfinite(u)) or \
                        np.linalg.norm(u) > 1e12 * (1.0 + np.linalg.norm(e_p)):
                    break
                au = _adjoint_A(per_block, u, dims)
                dy2 = dy + u
                dS2 = [s - a for s, a in zip(dS, au)]
                dZ2 = []
                for e, z2, a in zip(E, dZ, au):
                    corr = e @ (e.T @ a @ e) @ e.T
                    dZ2.append(z2 + 0.5 * (corr + corr.T))
                err2 = float(np.linalg.norm(r_p - _apply_A(per_block, dZ2, m)))
                if err2 >= best_err:
                    break
                best = (dy2, dS2, dZ2)
                best_err = err2
            return best[0], best[1], best[2], best_err / rp_scale

        def solve_direction(Rtilde):
            """Pick whichever factorization currently yields the cleaner
            direction; switching to the QR factor is sticky."""
            nonlocal use_qr_schur, schur_r
            if use_qr_schur and schur_r is None:
                schur_r = build_qr_factor()
                if schur_r is None and Lm is None:
                    return None
            candidates = []
            if use_qr_schur and schur_r is not None:
                candidates.append(direction_with(qr_solve, Rtilde))
                if candidates[-1][3] <= 1e-11:
                    return candidates[-1]
            if Lm is not None:
                candidates.append(direction_with(chol_solve, Rtilde))
                if not use_qr_schur and candidates[-1][3] > 1e-11:
                    use_qr_schur = True
                    schur_r = build_qr_factor()
                    if schur_r is not None:
                        candidates.append(direction_with(qr_solve, Rtilde))
            return min(candidates, key=lambda c: c[3])

        def boundary_steps(dZ, dS):
            ap = ad = np.inf
            for Lz, Ls, dz, ds in zip(Lz_list, Ls_list, dZ, dS):
                ap = min(ap, _min_step(Lz, dz))
                ad = min(ad, _min_step(Ls, ds))
            return ap, ad

        # Predictor (affine scaling) direction.
        Rt_aff = [np.diag(-dd) for dd in dvec]
        predictor = solve_direction(Rt_aff)
        if predictor is None:
            status = NUMERICAL_FAILURE
            failure_msg = "Schur system not factorizable in either form"
            break
        dy_a, dS_a, dZ_a, err_a = predictor
        ap_a, ad_a = boundary_steps(dZ_a, dS_a)
        ap_a = min(1.0, opts.step_fraction * ap_a)
        ad_a = min(1.0, opts.step_fraction * ad_a)
        gap_aff = sum(
            np.vdot(z + ap_a * dz, s + ad_a * ds).real
            for z, s, dz, ds in zip(Z, S, dZ_a, dS_a)
        )
        mu_aff = max(gap_aff / nu, 0.0)
        sigma = min(1.0, max((mu_aff / mu) ** 3 if mu > 0 else 0.0, 1e-8))

        dZhat_a = [einv @ dz @ einv.T for einv, dz in zip(Einv, dZ_a)]
        dShat_a = [e.T @ ds @ e for e, ds in zip(E, dS_a)]

        def corrector(sig):
            Rt = []
            for dd, dzh, dsh in zip(dvec, dZhat_a, dShat_a):
                cross = dzh @ dsh
                rc = sig * mu * np.eye(len(dd)) - np.diag(dd * dd) - 0.5 * (cross + cross.T)
                denom = dd[:, None] + dd[None, :]
                Rt.append(2.0 * rc / denom)
            return solve_direction(Rt)

        # Accept a step; retry with more centering if the complementarity
        # measure does not drop by the required factor.
        target = mu * (1.0 - 0.1 * opts.step_fraction)
        best = None
        for attempt in range(4):
            dy_c, dS_c, dZ_c, _ = corrector(sigma)
            ap, ad = boundary_steps(dZ_c, dS_c)
            ap = min(1.0, opts.step_fraction * ap)
            ad = min(1.0, opts.step_fraction * ad)
            gap_new = sum(
                np.vdot(z + ap * dz, s + ad * ds).real
                for z, s, dz, ds in zip(Z, S, dZ_c, dS_c)
            )
            mu_new = gap_new / nu
            cand = (mu_new, ap, ad, dy_c, dS_c, dZ_c)
            if best is None or mu_new < best[0]:
                best = cand
            if mu_new <= target:
                break
            sigma = min(1.0, max(3.0 * sigma, 0.3))

        mu_new, ap, ad, dy_c, dS_c, dZ_c = best
        if min(ap, ad) < 1e-12:
            status = NUMERICAL_FAILURE
            failure_msg = "step length collapsed below 1e-12"
            break

        Z = [0.5 * ((z + ap * dz) + (z + ap * dz).T) for z, dz in zip(Z, dZ_c)]
        S = [0.5 * ((s + ad * ds) + (s + ad * ds).T) for s, ds in zip(S, dS_c)]
        y = y + ad * dy_c

        if log is not None:
            log.write(f"    step alpha_p={ap:.4f} alpha_d={ad:.4f} sigma={sigma:.3f}\n")

    obj, r_p, R_d, gap_int, gap, pres, dres = current_metrics()
    if status not in (OPTIMAL, NUMERICAL_FAILURE):
        if (gap <= opts.gap_tolerance * (1.0 + abs(obj))
                and pres <= opts.residual_tolerance * (1.0 + bnorm_orig)
                and dres <= opts.residual_tolerance * (1.0 + bnorm_orig)):
            status = OPTIMAL

    # Undo the data normalization and the row scaling (zeros for dropped rows).
    y_full = np.zeros(problem.num_constraints)
    y_full[np.asarray(kept, dtype=int)] = s_c * y / scales

    solution = SdpSolution(
        primal_blocks=tuple(s_b * z for z in Z),
        dual_vector=y_full,
        dual_slack=tuple(s_c * s for s in S),
        objective=obj,
        gap=gap,
        primal_residual=pres,
        dual_residual=dres,
        iterations=iters_done,
        status=status,
        mu_history=tuple(mu_history),
    )
    if status == NUMERICAL_FAILURE:
        raise SolverFailureError(failure_msg or "interior-point iteration failed", solution)
    return solution


def residuals(problem: SdpStandardForm, solution: SdpSolution):
    """Recompute (primal residual, dual residual, gap) from scratch.

    Independent of the solver's internal bookkeeping: uses the original
    (unscaled, un-presolved) constraint rows.
    """
    dims = problem.block_dims
    Z = solution.primal_blocks
    S = solution.dual_slack
    y = solution.dual_vector
    if len(Z) != len(dims) or any(z.shape[0] != d for z, d in zip(Z, dims)):
        raise ValueError("solution blocks do not match problem dimensions")
    if len(y) != problem.num_constraints:
        raise ValueError("multiplier count does not match constraint count")

    b = problem.rhs_vector()
    prim = np.empty(problem.num_constraints)
    for i in range(problem.num_constraints):
        val = 0.0
        for bb, r, c, v in problem.constraint_entries(i):
            val += v * Z[bb][r, c] * (1.0 if r == c else 2.0)
        prim[i] = val - b[i]
    primal_residual = float(np.linalg.norm(prim))

    C = problem.objective_blocks()
    adj = [np.zeros((d, d)) for d in dims]
    for i in range(problem.num_constraints):
        if y[i] == 0.0:
            continue
        for bb, r, c, v in problem.constraint_entries(i):
            adj[bb][r, c] += y[i] * v
            if r != c:
                adj[bb][c, r] += y[i] * v
    dual_residual = float(np.sqrt(sum(
        np.sum((C[bb] - S[bb] - adj[bb]) ** 2) for bb in range(len(dims))
    )))
    gap = float(sum(np.vdot(z, s).real for z, s in zip(Z, S)))
    return primal_residual, dual_residual, gap
