"""Recovering generating fields from isotopies."""

import math

import numpy as np
import pytest

from shearcase.torus_dynamics import derive_time_field, grid_points

TWO_PI = 2 * math.pi


def test_constant_isotopy_gives_zero_field():
    tf = derive_time_field(lambda t, pts: np.asarray(pts, dtype=float), grid_n=16,
                           check=False)
    vals = tf(0.5, grid_points(8))
    assert float(np.max(np.abs(vals))) < 1e-9


def test_translation_recovered():
    def iso(t, pts):
        pts = np.asarray(pts, dtype=float)
        return np.stack([pts[..., 0] + t, pts[..., 1]], axis=-1)

    tf = derive_time_field(iso, grid_n=16, check=False)
    for t in (0.0, 0.4, 1.0):
        vals = tf(t, grid_points(8))
        assert float(np.max(np.abs(vals - np.array([1.0, 0.0])))) < 1e-6


def test_shear_flow_recovered():
    # flow of (sin y, 0) is exactly (x + t sin y, y)
    def iso(t, pts):
        pts = np.asarray(pts, dtype=float)
        return np.stack([pts[..., 0] + t * np.sin(pts[..., 1]), pts[..., 1]], axis=-1)

    tf = derive_time_field(iso, grid_n=32, check=False)
    grid = grid_points(16)
    expected = np.stack([np.sin(grid[..., 1]), np.zeros(grid.shape[:-1])], axis=-1)
    for t in (0.0, 0.5, 1.0):
        vals = tf(t, grid)
        assert float(np.max(np.abs(vals - expected))) < 1e-4


def test_nonidentity_start_rejected():
    def iso(t, pts):
        pts = np.asarray(pts, dtype=float)
        return pts + 0.1

    with pytest.raises(ValueError):
        derive_time_field(iso, grid_n=16, check=False)
