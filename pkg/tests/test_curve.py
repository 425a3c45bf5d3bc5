import json

import numpy as np
import pytest

from wulffinv.curve import (
    CurveError,
    GeometryError,
    LengthSpectrum,
    PlanarCurve,
    builtin_curve,
    discrete_tangents,
    enclosed_area,
    hermitian_toeplitz,
    length_spectrum,
    polyline_length,
    read_curve_file,
    series_estimate_gap,
    toeplitz_min_eigenvalue,
)

from conftest import capsule_exact_spectrum_coeffs


def unit_square():
    return PlanarCurve([[0, 0], [1, 0], [1, 1], [0, 1]])


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def test_repeated_final_vertex_dropped():
    c = PlanarCurve([[0, 0], [1, 0], [1, 1], [0, 0]])
    assert len(c) == 3


def test_clockwise_input_is_reversed():
    c = PlanarCurve([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert c.orientation_corrected
    assert enclosed_area(c) == pytest.approx(1.0)


def test_near_duplicate_vertices_merged():
    eps = 1e-15
    c = PlanarCurve([[0, 0], [eps, 0], [1, 0], [1, 1], [0, 1]])
    assert len(c) == 4


def test_too_few_vertices_rejected():
    with pytest.raises(CurveError):
        PlanarCurve([[0, 0], [1, 1]])


def test_degenerate_flat_curve_rejected():
    with pytest.raises(GeometryError):
        PlanarCurve([[0, 0], [1, 0], [2, 0]])


def test_curve_is_immutable():
    c = unit_square()
    with pytest.raises(AttributeError):
        c.vertices = None
    with pytest.raises(ValueError):
        c.vertices[0, 0] = 5.0


# ---------------------------------------------------------------------------
# builtin families
# ---------------------------------------------------------------------------

def test_builtin_circle_small_k_is_inscribed_square():
    c = builtin_curve("circle", (1.0,), 8)
    # take every other vertex: angles 0, pi/2, pi, 3pi/2
    v = c.vertices[::2]
    expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    assert np.allclose(v, expected, atol=1e-12)


def test_builtin_testcurve_length_matches_reported_value():
    c = builtin_curve("testcurve", (), 1000)
    assert polyline_length(c) == pytest.approx(9.167, abs=1e-3)


def test_builtin_capsule_length_approaches_analytic_perimeter():
    c = builtin_curve("capsule", (4.0, 1.0), 2000)
    assert polyline_length(c) == pytest.approx(2 * 4.0 + 2 * np.pi, abs=1e-3)


def test_builtin_polygon_resamples_by_arclength():
    c = builtin_curve("polygon", (0, 0, 2, 0, 2, 2, 0, 2), 80)
    assert len(c) == 80
    assert polyline_length(c) == pytest.approx(8.0, rel=1e-12)


def test_builtin_validation():
    with pytest.raises(CurveError):
        builtin_curve("unknown", (), 100)
    with pytest.raises(CurveError):
        builtin_curve("circle", (-1.0,), 100)
    with pytest.raises(CurveError):
        builtin_curve("circle", (1.0,), 4)
    with pytest.raises(CurveError):
        builtin_curve("capsule", (1.0,), 100)


# ---------------------------------------------------------------------------
# length and area
# ---------------------------------------------------------------------------

def test_polyline_length_unit_square():
    assert polyline_length(unit_square()) == pytest.approx(4.0)


def test_polyline_length_circle_matches_chord_formula():
    K = 1000
    c = builtin_curve("circle", (1.0,), K)
    exact_chords = K * 2.0 * np.sin(np.pi / K)
    assert polyline_length(c) == pytest.approx(exact_chords, rel=1e-12)
    assert polyline_length(c) == pytest.approx(2 * np.pi, abs=1e-4)


def test_enclosed_area_unit_square():
    assert enclosed_area(unit_square()) == pytest.approx(1.0)


def test_enclosed_area_circle_matches_inscribed_polygon():
    K = 1000
    c = builtin_curve("circle", (1.0,), K)
    exact = 0.5 * K * np.sin(2 * np.pi / K)
    assert enclosed_area(c) == pytest.approx(exact, rel=1e-12)
    assert enclosed_area(c) == pytest.approx(np.pi, abs=1e-4)


def test_enclosed_area_capsule():
    c = builtin_curve("capsule", (4.0, 1.0), 2000)
    assert enclosed_area(c) == pytest.approx(8.0 + np.pi, abs=1e-2)


def test_rigid_motion_invariance():
    c = builtin_curve("testcurve", (), 400)
    ang = 0.7
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    moved = PlanarCurve(c.vertices @ rot.T + np.array([5.0, -3.0]))
    assert polyline_length(moved) == pytest.approx(polyline_length(c), rel=1e-12)
    assert enclosed_area(moved) == pytest.approx(enclosed_area(c), rel=1e-12)


# ---------------------------------------------------------------------------
# tangents
# ---------------------------------------------------------------------------

def test_discrete_tangents_regular_hexagon():
    ang = 2 * np.pi * np.arange(6) / 6
    c = PlanarCurve(np.column_stack([np.cos(ang), np.sin(ang)]))
    t, w = discrete_tangents(c)
    assert np.allclose(w, w[0])
    # consecutive tangents rotate by pi/3
    z = t[:, 0] + 1j * t[:, 1]
    steps = np.angle(np.roll(z, -1) / z)
    assert np.allclose(steps, np.pi / 3, atol=1e-12)


def test_discrete_tangents_weights_match_chord_sum():
    K = 1000
    c = builtin_curve("circle", (1.0,), K)
    _, w = discrete_tangents(c)
    assert w.sum() == pytest.approx(K * np.sin(2 * np.pi / K), rel=1e-6)


def test_discrete_tangents_square_sides_axis_aligned():
    per_side = 40
    s = np.linspace(0.0, 1.0, per_side, endpoint=False)
    pts = np.concatenate([
        np.column_stack([s, np.zeros(per_side)]),
        np.column_stack([np.ones(per_side), s]),
        np.column_stack([1.0 - s, np.ones(per_side)]),
        np.column_stack([np.zeros(per_side), 1.0 - s]),
    ])
    t, _ = discrete_tangents(PlanarCurve(pts))
    aligned = np.sum(np.isclose(np.abs(t), [1, 0], atol=1e-12).all(axis=1)
                     | np.isclose(np.abs(t), [0, 1], atol=1e-12).all(axis=1))
    assert aligned == 4 * per_side - 4  # all but the 4 corner vertices


def test_degenerate_central_chord_raises():
    # second neighbors coincide around the spike
    pts = [[0, 0], [1, 0], [2, 0.5], [1, 1], [2, 1.5], [0, 1.5]]
    pts[4] = pts[2]
    with pytest.raises((GeometryError, CurveError)):
        discrete_tangents(PlanarCurve(pts))


# ---------------------------------------------------------------------------
# moment spectrum
# ---------------------------------------------------------------------------

def test_spectrum_circle():
    spec = length_spectrum(builtin_curve("circle", (1.0,), 1000), 8)
    assert spec.coeffs[0].real == pytest.approx(2 * np.pi, abs=1e-3)
    assert np.abs(spec.coeffs[1:]).max() <= 1e-3


def test_spectrum_capsule_matches_closed_form():
    spec = length_spectrum(builtin_curve("capsule", (4.0, 1.0), 4000), 6)
    exact = capsule_exact_spectrum_coeffs(4.0, 1.0, 6)
    assert np.abs(spec.coeffs - exact).max() <= 1e-2


def test_spectrum_testcurve_length():
    spec = length_spectrum(builtin_curve("testcurve", (), 1000), 50)
    assert spec.length == pytest.approx(9.167, abs=1e-3)
    assert spec.enclosed_area > 0


def test_spectrum_c1_vanishes_exactly_for_closed_curves():
    for name, params, k in (("circle", (1.0,), 500), ("testcurve", (), 700)):
        spec = length_spectrum(builtin_curve(name, params, k), 8)
        assert abs(spec.coeffs[1]) <= 1e-13 * spec.length


def test_spectrum_coefficients_bounded_by_length():
    spec = length_spectrum(builtin_curve("testcurve", (), 1000), 40)
    assert np.all(np.abs(spec.coeffs) <= spec.length * (1 + 1e-12))


def test_spectrum_requires_two_modes():
    with pytest.raises(CurveError):
        length_spectrum(unit_square(), 1)


# ---------------------------------------------------------------------------
# Toeplitz positivity and the series estimate
# ---------------------------------------------------------------------------

def test_toeplitz_min_eig_circle_spectrum_is_length():
    spec = LengthSpectrum(
        coeffs=np.array([2 * np.pi, 0, 0, 0], dtype=complex),
        length=2 * np.pi, enclosed_area=np.pi, sample_count=100)
    assert toeplitz_min_eigenvalue(spec, 4) == pytest.approx(2 * np.pi)


def test_toeplitz_min_eig_capsule_exact_nonnegative():
    c = capsule_exact_spectrum_coeffs(4.0, 1.0, 5)
    spec = LengthSpectrum(coeffs=c, length=float(c[0].real),
                          enclosed_area=8 + np.pi, sample_count=1)
    val = toeplitz_min_eigenvalue(spec, 5)
    # independent eigendecomposition of the explicitly assembled matrix
    n = 5
    mat = np.empty((n, n), dtype=complex)
    for p in range(n):
        for q in range(n):
            mat[p, q] = c[p - q] if p >= q else np.conj(c[q - p])
    assert val == pytest.approx(float(np.linalg.eigvalsh(mat)[0]), abs=1e-10)
    assert val >= -1e-10


def test_toeplitz_min_eig_synthetic_closed_form():
    # Toep(1, 0.9, 0.9) = 0.1 I + 0.9 * ones -> eigenvalues {0.1, 0.1, 2.8}
    spec = LengthSpectrum(coeffs=np.array([1.0, 0.9, 0.9], dtype=complex),
                          length=1.0, enclosed_area=1.0, sample_count=1)
    assert toeplitz_min_eigenvalue(spec, 3) == pytest.approx(0.1, abs=1e-12)


def test_hermitian_toeplitz_rejects_complex_diagonal():
    with pytest.raises(ValueError):
        hermitian_toeplitz(np.array([1.0 + 0.5j, 0.2]))


def test_series_gap_circle_spectrum_exact():
    spec = LengthSpectrum(
        coeffs=np.array([2 * np.pi, 0, 0, 0, 0, 0], dtype=complex),
        length=2 * np.pi, enclosed_area=np.pi, sample_count=100)
    for n in (3, 4, 6):
        expected = 0.5 * (2 * np.pi) ** 2 * (1 - 1 / n)
        assert series_estimate_gap(spec, n) == pytest.approx(expected)


def test_series_gap_capsule_closed_form_even_modes():
    l, r = 4.0, 1.0
    for n in (6, 10, 20):
        c = capsule_exact_spectrum_coeffs(l, r, n)
        spec = LengthSpectrum(coeffs=c, length=float(c[0].real),
                              enclosed_area=2 * l * r + np.pi * r * r,
                              sample_count=1)
        c0 = float(c[0].real)
        expected = 0.5 * c0 * c0 * (1 - 1 / n) - 2 * l * l * (1 - 1 / (n - 1))
        assert series_estimate_gap(spec, n) == pytest.approx(expected, rel=1e-12)


def test_series_gap_thin_capsule_stays_positive():
    # the estimate becomes tight as the cap radius shrinks
    l, r, n = 4.0, 0.01, 200
    c = capsule_exact_spectrum_coeffs(l, r, n)
    spec = LengthSpectrum(coeffs=c, length=float(c[0].real),
                          enclosed_area=2 * l * r + np.pi * r * r,
                          sample_count=1)
    gap = series_estimate_gap(spec, n)
    c0 = float(c[0].real)
    assert 0 < gap < 0.05 * 0.5 * c0 * c0


# ---------------------------------------------------------------------------
# file input
# ---------------------------------------------------------------------------

def test_read_curve_text_file(tmp_path):
    path = tmp_path / "square.txt"
    path.write_text("0 0\n1 0\n1 1\n0 1\n0 0\n")
    c = read_curve_file(path)
    assert len(c) == 4
    assert enclosed_area(c) == pytest.approx(1.0)


def test_read_curve_json_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert polyline_length(read_curve_file(path)) == pytest.approx(4.0)


def test_read_curve_empty_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    with pytest.raises(CurveError, match="empty"):
        read_curve_file(path)


def test_read_curve_bad_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0\n1\n")
    with pytest.raises(CurveError, match="line 2"):
        read_curve_file(path)
