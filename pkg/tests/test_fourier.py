"""Fourier splitting of divergence-free fields and Lipschitz estimation."""

import math

import numpy as np
import pytest

from shearcase.errors import DivergenceTooLarge
from shearcase.torus_dynamics import (
    FourierField,
    FourierTerm,
    TimeField,
    estimate_lipschitz,
    fourier_decompose,
    grid_points,
)
from oracles import trapezoid_fourier_coefficient

TWO_PI = 2 * math.pi


def field_sin_y(pts):
    return np.stack([np.sin(pts[..., 1]), np.zeros(pts.shape[:-1])], axis=-1)


def field_swirl(pts):
    return np.stack([np.sin(pts[..., 1]), np.sin(pts[..., 0])], axis=-1)


class TestDecompose:
    def test_zero_field(self):
        zero = lambda pts: np.zeros(pts.shape)
        field, info = fourier_decompose(zero, 2)
        assert field.terms == ()
        assert info["projection_residual"] == 0.0

    def test_single_term_coefficients(self):
        field, info = fourier_decompose(field_sin_y, 2)
        assert len(field.terms) == 1
        term = field.terms[0]
        assert term.k == (0, 1)
        assert np.allclose(term.u_sin, (1.0, 0.0), atol=1e-12)
        assert term.u_sin[0] * term.k[0] + term.u_sin[1] * term.k[1] == 0.0
        # the coefficient integral evaluated directly must agree
        samples = field_sin_y(grid_points(32))
        direct = trapezoid_fourier_coefficient(samples[..., 0], (0, 1), "sin")
        assert abs(direct - term.u_sin[0]) < 1e-12

    def test_round_trip_recovers_coefficients(self):
        terms = (
            FourierTerm((0, 1), (0.7, 0.0), (0.0, 0.0)),
            FourierTerm((1, 0), (0.0, -0.3), (0.0, 0.0)),
            FourierTerm((1, 2), (-0.4, 0.2), (0.2, -0.1)),
            FourierTerm((2, -1), (0.1, 0.2), (0.0, 0.0)),
        )
        synth = FourierField(terms)
        samples = synth.evaluate(grid_points(128))
        recovered, info = fourier_decompose(samples, 3)
        got = {t.k: t for t in recovered.terms}
        for t in terms:
            r = got[t.k]
            assert np.allclose(r.u_sin, t.u_sin, atol=1e-10)
            assert np.allclose(r.u_cos, t.u_cos, atol=1e-10)
        for t in recovered.terms:
            assert t.u_sin[0] * t.k[0] + t.u_sin[1] * t.k[1] == 0.0
            assert t.u_cos[0] * t.k[0] + t.u_cos[1] * t.k[1] == 0.0
        assert info["truncation_residual"] < 1e-10

    def test_sawtooth_seam_reports_large_residual(self):
        # (y, 0) with y the sawtooth coordinate: divergence vanishes pointwise
        # but the seam jump leaves a large reconstruction residual (Gibbs)
        def sawtooth(pts):
            return np.stack([np.mod(pts[..., 1], TWO_PI),
                             np.zeros(pts.shape[:-1])], axis=-1)

        field, info = fourier_decompose(sawtooth, 8)
        assert info["truncation_residual"] > 0.1

    def test_divergent_field_raises(self):
        def radial(pts):
            return np.stack([np.sin(pts[..., 0]), np.sin(pts[..., 1])], axis=-1)

        with pytest.raises(DivergenceTooLarge):
            fourier_decompose(radial, 2)

    def test_grid_too_coarse_rejected(self):
        samples = field_sin_y(grid_points(16))
        with pytest.raises(ValueError):
            fourier_decompose(samples, 8)


class TestTimeField:
    def test_divergence_validation(self):
        with pytest.raises(DivergenceTooLarge):
            TimeField(lambda t, pts: np.stack(
                [np.sin(pts[..., 0]), np.zeros(pts.shape[:-1])], axis=-1), grid_n=32)

    def test_equivariance_validation(self):
        TimeField(lambda t, pts: field_swirl(pts), grid_n=32, equivariant=True)
        with pytest.raises(ValueError):
            TimeField(lambda t, pts: np.stack(
                [np.cos(pts[..., 1]), np.zeros(pts.shape[:-1])], axis=-1),
                grid_n=32, equivariant=True)


class TestLipschitz:
    def test_constant_field(self):
        const = TimeField(lambda t, pts: np.full(pts.shape, 0.7), grid_n=32)
        assert estimate_lipschitz(const) <= 1e-8 * 1.1

    def test_shear_field(self):
        tf = TimeField(lambda t, pts: field_sin_y(pts), grid_n=64)
        assert 0.95 <= estimate_lipschitz(tf) <= 1.15

    def test_swirl_field(self):
        tf = TimeField(lambda t, pts: field_swirl(pts), grid_n=64, equivariant=True)
        assert 0.95 <= estimate_lipschitz(tf) <= 1.15
