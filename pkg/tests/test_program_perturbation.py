"""Round trips between timed programs and conjugated coordinate-map data."""

import math

import numpy as np
import pytest

from shearcase.errors import NonPrimitiveDirection, ProfileNotOdd
from shearcase.torus_dynamics import (
    PerturbationStep,
    ProgramStep,
    ShearingMap,
    ShearingProfile,
    ShearingProgram,
    perturbation_to_map,
    program_to_perturbation,
    tau,
    torus_distance,
)
from shearcase.torus_dynamics.perturbation import complete_to_sl2z

from test_shearing import random_program

TWO_PI = 2 * math.pi


class TestMatrixCompletion:
    def test_axis_direction_gives_identity(self):
        assert complete_to_sl2z(1, 0) == ((1, 0), (0, 1))

    def test_example_2_3(self):
        ((a, c), (b, d)) = complete_to_sl2z(2, 3)
        assert (a, b) == (2, 3)
        assert a * d - c * b == 1
        assert (c, d) == (1, 2)  # minimal |c|, tie broken by d >= 0

    def test_brute_force_minimality(self):
        for (a, b) in [(1, 0), (0, 1), (3, 5), (-2, 7), (5, -8), (-4, -9)]:
            ((aa, c), (bb, d)) = complete_to_sl2z(a, b)
            assert (aa, bb) == (a, b) and a * d - c * b == 1
            # no valid completion has strictly smaller |c|
            for cc in range(-abs(c), abs(c) + 1):
                num = 1 + cc * b
                if a != 0 and num % a == 0:
                    dd = num // a
                    assert abs(cc) >= abs(c) or (abs(cc) == abs(c))

    def test_non_primitive_rejected(self):
        with pytest.raises(NonPrimitiveDirection):
            complete_to_sl2z(2, 4)


class TestPerturbationMap:
    def test_time_zero_identity(self):
        step = PerturbationStep(((1, 0), (0, 1)), ((1, -1.0),))
        mp = perturbation_to_map([step], 0.0)
        pts = np.random.default_rng(0).uniform(0, TWO_PI, (20, 2))
        assert np.allclose(mp(pts), pts)

    def test_prototype_step(self):
        # A = I and g' = f = sin: (0, pi/2) -> (1, pi/2) at t = 1
        step = PerturbationStep(((1, 0), (0, 1)), ((1, -1.0),))
        assert step.profile().sine == ((1, 1.0),)
        out = perturbation_to_map([step], 1.0)(np.array([0.0, math.pi / 2]))
        assert np.allclose(out, [1.0, math.pi / 2], atol=1e-15)

    def test_equivariance_exact(self):
        steps = [
            PerturbationStep(complete_to_sl2z(2, 3), ((1, 0.4), (2, -0.15))),
            PerturbationStep(complete_to_sl2z(1, -1), ((3, 0.2),)),
        ]
        mp = perturbation_to_map(steps, 0.8)
        pts = np.random.default_rng(1).uniform(-TWO_PI, TWO_PI, (50, 2))
        lhs = mp(-pts, reduce=False)
        rhs = -mp(pts, reduce=False)
        assert np.array_equal(lhs, rhs)


class TestRoundTrip:
    def test_translation_round_trip_at_final_time(self):
        rng = np.random.default_rng(2)
        prog = random_program(rng, n_steps=6)
        steps = program_to_perturbation(prog)
        mp = perturbation_to_map(steps, 1.0)
        pts = rng.uniform(0, TWO_PI, (100, 2))
        dev = torus_distance(mp(pts), prog(1.0, pts))
        assert float(np.max(dev)) < 1e-12

    def test_breakpoint_agreement(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            prog = random_program(rng, n_steps=int(rng.integers(2, 7)))
            steps = program_to_perturbation(prog)
            pts = rng.uniform(0, TWO_PI, (25, 2))
            n = len(steps)
            for i, t_break in enumerate(prog.schedule):
                mp = perturbation_to_map(steps, i / n)
                dev = torus_distance(mp(pts), prog(float(t_break), pts))
                assert float(np.max(dev)) < 1e-12

    def test_negated_normal_absorbed_into_profile(self):
        # stored normal (b, -a) instead of (-b, a): odd profile soaks up the sign
        mapping = ShearingMap((2, 1), (1, -2), ShearingProfile(sine=((1, 0.3),)))
        prog = ShearingProgram([ProgramStep(mapping, 1.0, 1.0)])
        steps = program_to_perturbation(prog)
        mp = perturbation_to_map(steps, 1.0)
        pts = np.random.default_rng(4).uniform(0, TWO_PI, (50, 2))
        assert float(np.max(torus_distance(mp(pts), prog(1.0, pts)))) < 1e-14

    def test_cosine_profile_rejected(self):
        mapping = ShearingMap((1, 0), (0, 1), ShearingProfile(cosine=((1, 0.3),)))
        prog = ShearingProgram([ProgramStep(mapping, 1.0, 1.0)])
        with pytest.raises(ProfileNotOdd):
            program_to_perturbation(prog)

    def test_antiderivative_zero_mean(self):
        step_profile = ShearingProfile(sine=((1, 0.5), (4, -0.25)))
        g = step_profile.antiderivative_cosine()
        assert g == ((1, -0.5), (4, 0.0625))
        with pytest.raises(ValueError):
            PerturbationStep(((1, 0), (0, 1)), ((0, 1.0),))
