"""Closed planar polygonal curves and their direction-moment sequences.

A curve is an ordered list of vertices of a closed counterclockwise polygon.
From it we compute length, enclosed area, discrete unit tangents with
arclength weights (central differences), and the complex moment sequence

    c_p = sum_k (t1_k - i t2_k)^p * w_k,     p = 0..N-1,

whose Toeplitz matrices are positive semidefinite for any closed curve.
Indices wrap cyclically, which makes c_1 vanish identically for closed
polygons and keeps the Toeplitz positivity exact in floating point up to
eigensolver rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CurveError",
    "GeometryError",
    "PlanarCurve",
    "LengthSpectrum",
    "builtin_curve",
    "read_curve_file",
    "polyline_length",
    "enclosed_area",
    "discrete_tangents",
    "length_spectrum",
    "toeplitz_min_eigenvalue",
    "series_estimate_gap",
    "hermitian_toeplitz",
]

BUILTIN_NAMES = ("circle", "capsule", "testcurve", "polygon")

_MERGE_REL_TOL = 1e-12


class CurveError(ValueError):
    """Invalid curve input (bad parameters, too few vertices, parse errors)."""


class GeometryError(RuntimeError):
    """Degenerate geometry: collapsed chords or nonpositive signed area."""


def _shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class PlanarCurve:
    """Counterclockwise closed polygon in the plane.

    Ingestion canonicalizes the vertex list: a repeated final vertex equal
    to the first is dropped, consecutive vertices closer than
    1e-12 * (bounding-box diagonal) are merged, and clockwise input is
    reversed (`orientation_corrected` records the flip).  Self-intersection
    is not checked; callers are responsible for supplying Jordan curves.

    Instances are immutable after construction.
    """

    __slots__ = ("vertices", "orientation_corrected")

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise CurveError("expected an array of 2D points")
        if not np.all(np.isfinite(pts)):
            raise CurveError("vertices must be finite")
        if len(pts) >= 2 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 3:
            raise CurveError("a closed curve needs at least 3 distinct vertices")

        bbox = pts.max(axis=0) - pts.min(axis=0)
        tol = _MERGE_REL_TOL * float(np.hypot(bbox[0], bbox[1]))
        seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        if tol > 0 and np.any(seg <= tol):
            pts = pts[seg > tol]
        if len(pts) < 3:
            raise CurveError("fewer than 3 distinct vertices after merging duplicates")
        seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        if np.any(seg == 0.0):
            raise CurveError("consecutive vertices coincide")

        corrected = False
        signed = _shoelace(pts)
        if signed < 0:
            pts = pts[::-1].copy()
            corrected = True
        elif signed == 0:
            raise GeometryError("vertex list encloses zero signed area")

        pts.setflags(write=False)
        object.__setattr__(self, "vertices", pts)
        object.__setattr__(self, "orientation_corrected", corrected)

    def __setattr__(self, name, value):
        raise AttributeError("PlanarCurve is immutable")

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"PlanarCurve({len(self.vertices)} vertices)"


@dataclass(frozen=True)
class LengthSpectrum:
    """Moment coefficients c_0..c_{N-1} of a closed curve.

    ``length`` equals c_0 (the total central-difference weight).
    ``enclosed_area`` is the area of the midpoint polygon, the closed
    polygon whose edge vectors are exactly the weighted tangents entering
    the moments; using it keeps the triple (c_p, length, area) the exact
    data of one Jordan polygon, so the anisoperimetric ratio computed from
    a spectrum is >= 1 for every admissible anisotropy.
    """

    coeffs: np.ndarray
    length: float
    enclosed_area: float
    sample_count: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 1 or abs(c[0].imag) > 1e-12 * abs(c[0].real):
            raise ValueError("c_0 must be real")
        if c[0].real <= 0:
            raise ValueError("c_0 must be positive")
        if self.enclosed_area <= 0:
            raise ValueError("enclosed area must be positive")

    @property
    def modes(self) -> int:
        return len(self.coeffs)


# ---------------------------------------------------------------------------
# Built-in curve families
# ---------------------------------------------------------------------------

def _capsule_points(length: float, radius: float, samples: int) -> np.ndarray:
    total = 2.0 * length + 2.0 * np.pi * radius
    s = np.arange(samples) * (total / samples)
    pts = np.empty((samples, 2))
    half = 0.5 * length
    arc = np.pi * radius

    seg1 = s < length
    pts[seg1, 0] = -half + s[seg1]
    pts[seg1, 1] = -radius

    m = (~seg1) & (s < length + arc)
    ang = -0.5 * np.pi + (s[m] - length) / radius
    pts[m, 0] = half + radius * np.cos(ang)
    pts[m, 1] = radius * np.sin(ang)

    m2 = (s >= length + arc) & (s < 2.0 * length + arc)
    pts[m2, 0] = half - (s[m2] - length - arc)
    pts[m2, 1] = radius

    m3 = s >= 2.0 * length + arc
    ang = 0.5 * np.pi + (s[m3] - 2.0 * length - arc) / radius
    pts[m3, 0] = -half + radius * np.cos(ang)
    pts[m3, 1] = radius * np.sin(ang)
    return pts


def _resample_polygon(corners: np.ndarray, samples: int) -> np.ndarray:
    edges = np.roll(corners, -1, axis=0) - corners
    seg = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(seg == 0):
        raise CurveError("polygon has coincident consecutive corners")
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    s = np.arange(samples) * (total / samples)
    idx = np.searchsorted(cum, s, side="right") - 1
    idx = np.clip(idx, 0, len(corners) - 1)
    frac = (s - cum[idx]) / seg[idx]
    return corners[idx] + frac[:, None] * edges[idx]


def builtin_curve(name: str, params=(), samples: int = 1000) -> PlanarCurve:
    """Sample one of the built-in curve families with ``samples`` vertices.

    Families: ``circle`` (params: radius), ``capsule`` (params: segment
    length, cap radius), ``testcurve`` (no params; the nonconvex benchmark
    curve), ``polygon`` (params: flattened corner coordinates, resampled
    uniformly by arclength).
    """
    if samples < 8:
        raise CurveError("need at least 8 samples")
    params = tuple(float(p) for p in params)

    if name == "circle":
        if len(params) != 1:
            raise CurveError("circle takes one parameter: radius")
        (r,) = params
        if r <= 0:
            raise CurveError("radius must be positive")
        th = 2.0 * np.pi * np.arange(samples) / samples
        return PlanarCurve(np.column_stack([r * np.cos(th), r * np.sin(th)]))

    if name == "capsule":
        if len(params) != 2:
            raise CurveError("capsule takes two parameters: length, radius")
        l, r = params
        if l <= 0 or r <= 0:
            raise CurveError("capsule dimensions must be positive")
        return PlanarCurve(_capsule_points(l, r, samples))

    if name == "testcurve":
        if params:
            raise CurveError("testcurve takes no parameters")
        u = np.arange(samples) / samples
        x1 = np.cos(2 * np.pi * u)
        x2 = (0.7 * np.sin(2 * np.pi * u)
              + np.sin(np.cos(2 * np.pi * u))
              + (np.sin(6 * np.pi * u) * np.sin(2 * np.pi * u)) ** 2)
        return PlanarCurve(np.column_stack([x1, x2]))

    if name == "polygon":
        if len(params) < 6 or len(params) % 2:
            raise CurveError("polygon needs an even list of >= 6 coordinates")
        corners = np.asarray(params, dtype=float).reshape(-1, 2)
        return PlanarCurve(_resample_polygon(corners, samples))

    raise CurveError(f"unknown builtin curve {name!r}; choices: {BUILTIN_NAMES}")


def read_curve_file(path) -> PlanarCurve:
    """Read a curve from a text file: "x y" per line, or a JSON [[x,y],...] array."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if not stripped:
        raise CurveError(f"curve file {path} is empty")
    if stripped[0] == "[":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CurveError(f"curve file {path}: invalid JSON ({exc})") from None
        try:
            return PlanarCurve(np.asarray(data, dtype=float))
        except (TypeError, ValueError) as exc:
            raise CurveError(f"curve file {path}: {exc}") from None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise CurveError(f"curve file {path}, line {lineno}: expected 'x y'")
        try:
            rows.append((float(fields[0]), float(fields[1])))
        except ValueError:
            raise CurveError(f"curve file {path}, line {lineno}: bad number") from None
    if not rows:
        raise CurveError(f"curve file {path} contains no vertices")
    return PlanarCurve(np.asarray(rows))


# ---------------------------------------------------------------------------
# Geometric quantities
# ---------------------------------------------------------------------------

def polyline_length(curve: PlanarCurve) -> float:
    """Total edge length of the closed polygon (closing edge included)."""
    v = curve.vertices
    seg = np.roll(v, -1, axis=0) - v
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def enclosed_area(curve: PlanarCurve) -> float:
    """Shoelace area of the vertex polygon; positive by the CCW invariant."""
    area = _shoelace(curve.vertices)
    if area <= 0:
        raise GeometryError("signed area is not positive; orientation violated")
    return area


def discrete_tangents(curve: PlanarCurve):
    """Unit tangents and arclength weights by cyclic central differences.

    Returns ``(tangents, weights)`` where ``tangents[k]`` is the normalized
    chord x_{k+1} - x_{k-1} (indices mod K) and ``weights[k]`` is half that
    chord's length.
    """
    v = curve.vertices
    chord = np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)
    norms = np.hypot(chord[:, 0], chord[:, 1])
    bbox = v.max(axis=0) - v.min(axis=0)
    if np.any(norms <= 1e-14 * float(np.hypot(bbox[0], bbox[1]))):
        raise GeometryError("central chord collapsed: coincident second neighbors")
    return chord / norms[:, None], 0.5 * norms


def length_spectrum(curve: PlanarCurve, modes: int) -> LengthSpectrum:
    """Moments c_p = sum_k (t1 - i t2)^p w_k for p = 0..modes-1.

    Powers are taken by iterated complex multiplication of the unit tangent,
    never through angle extraction.  The enclosed area is the shoelace area
    of the midpoint polygon (see `LengthSpectrum`).
    """
    if modes < 2:
        raise CurveError("need at least 2 modes")
    tangents, weights = discrete_tangents(curve)
    z = tangents[:, 0] - 1j * tangents[:, 1]
    coeffs = np.empty(modes, dtype=complex)
    coeffs[0] = weights.sum()
    acc = np.ones(len(z), dtype=complex)
    for p in range(1, modes):
        acc = acc * z
        coeffs[p] = np.dot(weights, acc)

    v = curve.vertices
    midpoints = 0.5 * (v + np.roll(v, 1, axis=0))
    area = _shoelace(midpoints)
    if area <= 0:
        raise GeometryError("midpoint polygon has nonpositive area")
    return LengthSpectrum(
        coeffs=coeffs,
        length=float(coeffs[0].real),
        enclosed_area=area,
        sample_count=len(v),
    )


def hermitian_toeplitz(coeffs) -> np.ndarray:
    """Toeplitz matrix T[p, q] = c_{p-q} with c_{-k} = conj(c_k).

    Raises if the materialized matrix fails Hermitian symmetry (it cannot,
    by construction, unless c_0 has an imaginary part).
    """
    c = np.asarray(coeffs, dtype=complex)
    n = len(c)
    idx = np.subtract.outer(np.arange(n), np.arange(n))
    mat = np.where(idx >= 0, c[np.abs(idx)], np.conj(c[np.abs(idx)]))
    if np.abs(mat - mat.conj().T).max() > 1e-12 * (1.0 + np.abs(c).max()):
        raise ValueError("Toeplitz matrix is not Hermitian; c_0 must be real")
    return mat


def toeplitz_min_eigenvalue(spectrum: LengthSpectrum, modes: int) -> float:
    """Minimum eigenvalue of Toep(c_0..c_{modes-1}); >= 0 for genuine curves."""
    if modes > spectrum.modes:
        raise ValueError("modes exceeds the stored spectrum size")
    return float(np.linalg.eigvalsh(hermitian_toeplitz(spectrum.coeffs[:modes]))[0])


def series_estimate_gap(spectrum: LengthSpectrum, modes: int) -> float:
    """Slack (c_0^2/2)(1 - 1/N) - sum_{p=2}^{N-1} |c_p|^2 / (p^2 - 1).

    Nonnegative for the spectrum of any closed curve (c_1 = 0).
    """
    if modes < 3:
        raise ValueError("need modes >= 3")
    if modes > spectrum.modes:
        raise ValueError("modes exceeds the stored spectrum size")
    c = spectrum.coeffs
    c0 = c[0].real
    p = np.arange(2, modes)
    series = float(np.sum(np.abs(c[2:modes]) ** 2 / (p * p - 1.0)))
    return 0.5 * c0 * c0 * (1.0 - 1.0 / modes) - series
