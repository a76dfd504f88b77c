"""Soundness of the flow-comparison and splitting bounds on random fields.

The measured flow deviations must never exceed the closed-form bounds
t |X - Y| e^(Lt) and (t^2/2) C e^(Lt) evaluated with estimated constants.
"""

import math

import numpy as np

from shearcase.torus_dynamics import (
    FourierField,
    FourierTerm,
    TimeField,
    estimate_lipschitz,
    grid_points,
)
from shearcase.torus_dynamics.approx import (
    composition_defect_constant,
    gronwall_flow_bound,
    splitting_bound,
)
from oracles import rk4_flow, torus_dist

TWO_PI = 2 * math.pi


def random_divfree_field(rng, n_terms=3, kmax=2, scale=0.6):
    terms = []
    seen = set()
    while len(terms) < n_terms:
        k1 = int(rng.integers(0, kmax + 1))
        k2 = int(rng.integers(-kmax, kmax + 1)) if k1 > 0 else int(rng.integers(1, kmax + 1))
        if (k1, k2) in seen or (k1, k2) == (0, 0):
            continue
        seen.add((k1, k2))
        kbar = np.array([-k2, k1], dtype=float)
        c = rng.normal(scale=scale) / max(1.0, np.linalg.norm(kbar))
        terms.append(FourierTerm((k1, k2), tuple(c * kbar), (0.0, 0.0)))
    return FourierField(tuple(terms), equivariant=True)


def test_flow_comparison_bound_holds():
    rng = np.random.default_rng(42)
    grid = grid_points(24).reshape(-1, 2)
    for trial in range(8):
        fx = random_divfree_field(rng)
        fy = random_divfree_field(rng)
        tf_x = TimeField.from_fourier(fx, grid_n=48, check=False)
        tf_y = TimeField.from_fourier(fy, grid_n=48, check=False)
        lip = min(estimate_lipschitz(tf_x), estimate_lipschitz(tf_y))
        dist_grid = grid_points(64)
        field_distance = 1.1 * float(np.max(np.linalg.norm(
            fx.evaluate(dist_grid) - fy.evaluate(dist_grid), axis=-1)))
        times = [0.25, 0.5, 1.0]
        flow_x = rk4_flow(lambda t, y: fx.evaluate(y), times, grid, steps=512)
        flow_y = rk4_flow(lambda t, y: fy.evaluate(y), times, grid, steps=512)
        for i, t in enumerate(times):
            measured = float(np.max(torus_dist(flow_x[i], flow_y[i])))
            assert measured <= gronwall_flow_bound(t, field_distance, lip) + 1e-9


def test_splitting_bound_holds_for_two_terms():
    rng = np.random.default_rng(43)
    grid = grid_points(24).reshape(-1, 2)
    check_grid = grid_points(48)
    for trial in range(50):
        field = random_divfree_field(rng, n_terms=2)
        if len(field.terms) < 2:
            continue
        maps = [t.as_shearing_map() for t in field.terms]
        tf = TimeField.from_fourier(field, grid_n=48, check=False)
        lip = estimate_lipschitz(tf)
        defect_c = composition_defect_constant(maps, 1.0, check_grid)
        times = [0.25, 0.5, 1.0]
        flow_z = rk4_flow(lambda t, y: field.evaluate(y), times, grid, steps=512)
        for i, t in enumerate(times):
            # iterate the exact shear flows: first term first
            pts = grid.copy()
            for m in maps:
                pts = pts + t * m.displacement(pts)
            measured = float(np.max(torus_dist(flow_z[i], pts)))
            assert measured <= splitting_bound(t, defect_c, lip) + 1e-9
