"""Anisotropy functions as truncated complex Fourier series.

An anisotropy function sigma(nu) = sigma_0 + 2 Re sum_{k>=1} sigma_k e^{ik nu}
is stored through its coefficients sigma_0..sigma_{N-1} (sigma_0 real).
This module evaluates sigma and its stiffness sigma + sigma'', computes the
area of the associated Wulff shape and interface energies against curve
spectra, traces Wulff/Frank boundaries, and certifies membership in the
admissibility cone

    K_N = { sigma : sigma >= 0  and  sigma + sigma'' >= 0 }

either by dense sampling or by a semidefinite feasibility certificate
(a pair of PSD Hermitian matrices whose subdiagonal sums reproduce the
coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp as _sdp
from .curve import LengthSpectrum, hermitian_toeplitz

__all__ = [
    "AnisotropyFn",
    "ConeCertificate",
    "ConeMembership",
    "OutOfConeError",
    "evaluate",
    "evaluate_stiffness",
    "evaluate_derivative",
    "wulff_area",
    "interface_energy",
    "anisoperimetric_ratio",
    "cone_membership",
    "bochner_toeplitz",
    "wulff_boundary",
    "frank_boundary",
    "anisotropy_strength",
    "sobolev_norm",
    "scale",
]

MEMBERSHIP_GRID = 4096
QUADRATURE_GRID = 8192

_MEMBER_TOL = 1e-9
_BOUNDARY_BAND = 1e-4


class OutOfConeError(RuntimeError):
    """The anisotropy leaves the admissibility cone where positivity is needed."""


@dataclass(frozen=True)
class AnisotropyFn:
    """Fourier coefficients sigma_0..sigma_{N-1}; sigma_0 is real."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) < 1:
            raise ValueError("need a 1D coefficient array with at least sigma_0")
        scale0 = max(1.0, abs(c[0]))
        if abs(c[0].imag) > 1e-9 * scale0:
            raise ValueError("sigma_0 must be real")
        c = c.copy()
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> int:
        return len(self.coeffs)

    @classmethod
    def constant(cls, value: float = 1.0, modes: int = 1) -> "AnisotropyFn":
        c = np.zeros(modes, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def from_cosine(cls, amplitude: float, fold: int, base: float = 1.0,
                    modes: int | None = None) -> "AnisotropyFn":
        """base + amplitude * cos(fold * nu), stored as sigma_fold = amplitude/2."""
        if fold < 1:
            raise ValueError("fold must be >= 1")
        n = modes if modes is not None else fold + 1
        if n < fold + 1:
            raise ValueError("modes too small for the requested fold")
        c = np.zeros(n, dtype=complex)
        c[0] = base
        c[fold] = 0.5 * amplitude
        return cls(c)

    def to_json_dict(self) -> dict:
        return {
            "modes": self.modes,
            "re": [float(v) for v in self.coeffs.real],
            "im": [float(v) for v in self.coeffs.imag],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "AnisotropyFn":
        try:
            modes = int(data["modes"])
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed anisotropy data: {exc}") from None
        if len(re) != modes or len(im) != modes:
            raise ValueError("coefficient arrays do not match the mode count")
        if modes < 1 or im[0] != 0.0:
            raise ValueError("im[0] must be exactly 0")
        return cls(re + 1j * im)


def _eval_series(coeffs: np.ndarray, nu) -> np.ndarray | float:
    """sigma_0-style evaluation c_0 + 2 Re sum_{k>=1} c_k e^{ik nu}."""
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    k = np.arange(1, len(coeffs))
    if len(k):
        phases = np.exp(1j * np.outer(nu_arr, k))
        vals = coeffs[0].real + 2.0 * (phases @ coeffs[1:]).real
    else:
        vals = np.full(len(nu_arr), coeffs[0].real)
    return vals if np.ndim(nu) else float(vals[0])


def evaluate(sigma: AnisotropyFn, nu):
    """sigma(nu); accepts scalars or arrays, 2*pi-periodic."""
    return _eval_series(sigma.coeffs, nu)


def evaluate_stiffness(sigma: AnisotropyFn, nu):
    """sigma(nu) + sigma''(nu), via coefficients (1 - k^2) sigma_k."""
    k = np.arange(len(sigma.coeffs))
    return _eval_series(sigma.coeffs * (1.0 - k * k), nu)


def evaluate_derivative(sigma: AnisotropyFn, nu):
    """sigma'(nu), via coefficients i*k*sigma_k."""
    k = np.arange(len(sigma.coeffs))
    return _eval_series(sigma.coeffs * (1j * k), nu)


def wulff_area(sigma: AnisotropyFn) -> float:
    """pi sigma_0^2 + 2 pi sum_{k>=1} (1 - k^2) |sigma_k|^2.

    May be negative outside the admissibility cone.
    """
    c = sigma.coeffs
    k = np.arange(1, len(c))
    tail = np.sum((1.0 - k * k) * np.abs(c[1:]) ** 2)
    return float(np.pi * c[0].real ** 2 + 2.0 * np.pi * tail)


def interface_energy(sigma: AnisotropyFn, spectrum: LengthSpectrum) -> float:
    """c_0 sigma_0 + 2 Re sum_{k>=1} conj(c_k) sigma_k."""
    if sigma.modes > spectrum.modes:
        raise ValueError(
            f"anisotropy has {sigma.modes} modes but the spectrum stores only "
            f"{spectrum.modes}")
    c = spectrum.coeffs[:sigma.modes]
    s = sigma.coeffs
    return float(c[0].real * s[0].real
                 + 2.0 * np.sum(np.conj(c[1:]) * s[1:]).real)


def anisoperimetric_ratio(sigma: AnisotropyFn, spectrum: LengthSpectrum) -> float:
    """Interface energy squared over 4 * (Wulff area) * (enclosed area).

    At least 1 for admissible sigma; raises `OutOfConeError` when the Wulff
    area is not positive.
    """
    w = wulff_area(sigma)
    if w <= 0:
        raise OutOfConeError(f"Wulff area {w} is not positive")
    energy = interface_energy(sigma, spectrum)
    return energy * energy / (4.0 * w * spectrum.enclosed_area)


def bochner_toeplitz(sigma: AnisotropyFn, modes: int):
    """Toeplitz matrix of sigma_0..sigma_{modes-1} and its minimum eigenvalue."""
    if modes > sigma.modes:
        raise ValueError("modes exceeds the coefficient count")
    mat = hermitian_toeplitz(sigma.coeffs[:modes])
    return mat, float(np.linalg.eigvalsh(mat)[0])


# ---------------------------------------------------------------------------
# Cone membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeCertificate:
    """PSD Hermitian pair (F, G) reproducing sigma_k and (1-k^2) sigma_k
    through subdiagonal sums."""

    F: np.ndarray
    G: np.ndarray

    def sum_residual(self, sigma: AnisotropyFn) -> float:
        """Largest deviation of the subdiagonal sums from the coefficients."""
        n = self.F.shape[0]
        worst = 0.0
        for k in range(n):
            f_sum = sum(self.F[p, p - k] for p in range(k, n))
            g_sum = sum(self.G[p, p - k] for p in range(k, n))
            target = sigma.coeffs[k] if k < sigma.modes else 0.0
            worst = max(worst,
                        abs(f_sum - target),
                        abs(g_sum - (1.0 - k * k) * target))
        return float(worst)

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(self.F)[0],
                         np.linalg.eigvalsh(self.G)[0]))


@dataclass(frozen=True)
class ConeMembership:
    member: bool
    verdict: str            # "member" | "non_member" | "boundary"
    margin: float           # min over the grid of sigma and sigma + sigma''
    scale: float
    certificate: ConeCertificate | None = None


def _grid_margin(sigma: AnisotropyFn, samples: int = MEMBERSHIP_GRID) -> float:
    nu = 2.0 * np.pi * np.arange(samples) / samples
    return float(min(np.min(evaluate(sigma, nu)),
                     np.min(evaluate_stiffness(sigma, nu))))


def _membership_sdp(sigma: AnisotropyFn):
    """Feasibility margin for the certificate system.

    Solves  min t  s.t.  F + t I >= 0, G + t I >= 0 with the subdiagonal
    sums of F + tI equal to sigma_k + t N [k=0] (same for G with weights
    1 - k^2).  The optimal t equals -min(sigma, sigma + sigma'')/N, so the
    function-value margin is recovered as -t*N.
    """
    n = sigma.modes
    shift = sigma.coeffs[0].real / n
    form = _sdp.SdpStandardForm([2 * n, 2 * n, 1])
    form.add_objective_entry(2, 0, 0, 1.0)  # minimize u = t + shift

    for block, weight in ((0, lambda k: 1.0), (1, lambda k: 1.0 - k * k)):
        for k in range(n):
            re_entries, im_entries = [], []
            for p in range(k, n):
                re_entries += _sdp.hermitian_entry_coefficients(block, n, p, p - k, 1.0, "re")
                im_entries += _sdp.hermitian_entry_coefficients(block, n, p, p - k, 1.0, "im")
            target = weight(k) * sigma.coeffs[k]
            if k == 0:
                # trace row couples to the margin variable: tr = sigma_0 + t*n
                form.add_constraint(re_entries + [(2, 0, 0, -float(n))], 0.0)
            else:
                form.add_constraint(re_entries, target.real)
                form.add_constraint(im_entries, target.imag)

    solution = _sdp.solve(form, _sdp.IpmOptions())
    if solution.status != _sdp.OPTIMAL:
        raise _sdp.SolverFailureError(
            f"membership feasibility solve ended with status {solution.status}",
            solution)
    t_star = solution.objective - shift
    f = _sdp.extract_hermitian(solution.primal_blocks[0]) - t_star * np.eye(n)
    g = _sdp.extract_hermitian(solution.primal_blocks[1]) - t_star * np.eye(n)
    return t_star, ConeCertificate(F=f, G=g)


def cone_membership(sigma: AnisotropyFn, method: str = "grid") -> ConeMembership:
    """Decide sigma in K_N by dense sampling or by certificate.

    The grid method samples sigma and sigma + sigma'' at 4096 points; the
    sdp method solves the certificate feasibility problem and returns the
    certificate on membership.  Margins within (-1e-4, 1e-4) * scale are
    reported as "boundary"; the sdp certificate is authoritative there.
    Solver breakdown raises `SolverFailureError` and is therefore distinct
    from a clean non-membership verdict.
    """
    scale0 = max(1.0, sigma.coeffs[0].real)
    if method == "grid":
        margin = _grid_margin(sigma)
        certificate = None
    elif method == "sdp":
        t_star, certificate = _membership_sdp(sigma)
        margin = -t_star * sigma.modes
        if margin > _MEMBER_TOL * scale0 * sigma.modes and certificate.min_eigenvalue() < -1e-8:
            certificate = None
    else:
        raise ValueError("method must be 'grid' or 'sdp'")

    member = margin >= -_MEMBER_TOL * scale0
    if abs(margin) < _BOUNDARY_BAND * scale0:
        verdict = "boundary"
    else:
        verdict = "member" if member else "non_member"
    if not member:
        certificate = None
    return ConeMembership(member=member, verdict=verdict, margin=margin,
                          scale=scale0, certificate=certificate)


# ---------------------------------------------------------------------------
# Geometry and norms
# ---------------------------------------------------------------------------

def wulff_boundary(sigma: AnisotropyFn, samples: int) -> np.ndarray:
    """Boundary points -sigma(nu) n(nu) + sigma'(nu) t(nu) at uniform nu.

    Self-intersecting output is returned verbatim when sigma leaves the
    cone (the stiffness changes sign and the trace develops tails).
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    nu = 2.0 * np.pi * np.arange(samples) / samples
    sig = evaluate(sigma, nu)
    dsig = evaluate_derivative(sigma, nu)
    t = np.column_stack([np.cos(nu), np.sin(nu)])
    n = np.column_stack([-np.sin(nu), np.cos(nu)])
    return -sig[:, None] * n + dsig[:, None] * t


def frank_boundary(sigma: AnisotropyFn, samples: int) -> np.ndarray:
    """Boundary points -n(nu)/sigma(nu); requires sigma > 0 at the samples."""
    if samples < 8:
        raise ValueError("need at least 8 samples")
    nu = 2.0 * np.pi * np.arange(samples) / samples
    sig = evaluate(sigma, nu)
    if np.any(sig <= 0):
        raise OutOfConeError("sigma is not positive at all samples")
    n = np.column_stack([-np.sin(nu), np.cos(nu)])
    return -n / sig[:, None]


def anisotropy_strength(sigma: AnisotropyFn) -> float:
    """(sigma_max - sigma_min) / (2 sigma_0), extrema over 4096 samples."""
    if sigma.coeffs[0].real <= 0:
        raise ValueError("sigma_0 must be positive")
    nu = 2.0 * np.pi * np.arange(MEMBERSHIP_GRID) / MEMBERSHIP_GRID
    vals = evaluate(sigma, nu)
    return float((vals.max() - vals.min()) / (2.0 * sigma.coeffs[0].real))


def sobolev_norm(sigma: AnisotropyFn, order: int) -> float:
    """Weighted coefficient norm sqrt(sum_k (1 + k^(2r)) |sigma_k|^2).

    The k = 0 weight follows the literal formula: 2 for order 0 and 1 for
    order 1 or 2.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    k = np.arange(len(sigma.coeffs))
    if order == 0:
        weights = np.full(len(k), 2.0)
    else:
        weights = 1.0 + k.astype(float) ** (2 * order)
    return float(np.sqrt(np.sum(weights * np.abs(sigma.coeffs) ** 2)))


def scale(sigma: AnisotropyFn, factor: float) -> AnisotropyFn:
    """Scale every coefficient; energies scale linearly, Wulff area
    quadratically, and the anisoperimetric ratio is unchanged."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return AnisotropyFn(sigma.coeffs * factor)
