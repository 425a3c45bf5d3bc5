"""Shared fixtures: the curve corpus, cached solves, and admissible-function
generators used across the suite."""

import numpy as np
import pytest

from wulffinv import builtin_curve, solve_inverse_wulff
from wulffinv.anisotropy import AnisotropyFn
from wulffinv.curve import PlanarCurve


def star_polygon(seed: int, samples: int = 800) -> PlanarCurve:
    """Star-shaped curve r(theta) = 1 + small random harmonics."""
    rng = np.random.default_rng(seed)
    folds = rng.integers(2, 9, size=3)
    amps = rng.uniform(0.03, 0.11, size=3)
    phases = rng.uniform(0, 2 * np.pi, size=3)
    theta = 2 * np.pi * np.arange(samples) / samples
    r = 1.0 + sum(a * np.cos(m * theta + p) for a, m, p in zip(amps, folds, phases))
    return PlanarCurve(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def regular_polygon(sides: int, samples: int = 600) -> PlanarCurve:
    ang = np.pi / 2 + 2 * np.pi * np.arange(sides) / sides
    corners = np.column_stack([np.cos(ang), np.sin(ang)]).ravel()
    return builtin_curve("polygon", corners, samples)


def build_corpus() -> dict:
    """The ten-curve corpus: three benchmarks, four random stars, three
    regular polygons."""
    corpus = {
        "circle": builtin_curve("circle", (1.0,), 1000),
        "capsule": builtin_curve("capsule", (4.0, 1.0), 2000),
        "testcurve": builtin_curve("testcurve", (), 1000),
    }
    for i, seed in enumerate((101, 202, 303, 404)):
        corpus[f"star{i}"] = star_polygon(seed)
    for sides in (3, 4, 6):
        corpus[f"regular{sides}"] = regular_polygon(sides)
    return corpus


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def solve_cached():
    """Memoized inverse solves so acceptance criteria can share results."""
    cache = {}

    def run(name, curve, modes, augmentation="trace"):
        key = (name, modes, augmentation)
        if key not in cache:
            cache[key] = solve_inverse_wulff(curve, modes,
                                             augmentation=augmentation)
        return cache[key]

    return run


def random_cone_member(rng, max_modes: int = 12, slack: float = 0.9) -> AnisotropyFn:
    """Mixture of admissible single-fold profiles, strictly inside the cone.

    Each term eps * cos(m nu + phase) is admissible when eps <= 1/(m^2 - 1);
    budgeting the amplitudes keeps both sigma and its stiffness bounded away
    from zero.
    """
    n_terms = int(rng.integers(1, 4))
    folds = rng.choice(np.arange(2, max_modes), size=n_terms, replace=False)
    coeffs = np.zeros(max_modes, dtype=complex)
    coeffs[0] = 1.0
    budget = slack
    for m in folds:
        cap = budget / n_terms / (m * m - 1.0)
        eps = float(rng.uniform(0.1, 1.0)) * cap
        phase = float(rng.uniform(0, 2 * np.pi))
        coeffs[m] = 0.5 * eps * np.exp(1j * phase)
    return AnisotropyFn(coeffs)


def capsule_exact_spectrum_coeffs(length: float, radius: float, modes: int) -> np.ndarray:
    """Closed-form moments of the stadium curve: c_0 = 2l + 2 pi r,
    c_{2k} = 2l, odd coefficients zero."""
    c = np.zeros(modes, dtype=complex)
    c[0] = 2.0 * length + 2.0 * np.pi * radius
    for k in range(2, modes, 2):
        c[k] = 2.0 * length
    return c
