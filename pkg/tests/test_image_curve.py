"""Sampled pillowcase images of torus-knot representation varieties."""

import math

import numpy as np
import pytest

from shearcase import su2
from shearcase.knot_reps import (
    KnotSpec,
    canonicalize_gauge,
    knot_group,
    sample_image_curve,
)
from shearcase.pillowcase import CylinderCurve, PillowcasePoint, separates, winding_number
from oracles import torus_knot_pillowcase_sweep

TWO_PI = 2 * math.pi


def closed_arc_with_return(arc):
    """Close an arc whose endpoints lie on the reducible line along that line."""
    v = arc.vertices
    back = np.linspace(v[-1, 0], v[0, 0], 80)[1:-1]
    loop = np.concatenate([v, np.stack([back, np.zeros_like(back)], axis=-1)])
    return CylinderCurve(loop, closed=True)


class TestUnknot:
    def test_only_reducible_line(self):
        image = sample_image_curve(KnotSpec.unknot())
        assert image.empty_irreducible
        assert image.arcs == ()
        line = image.reducible_line
        assert np.allclose(line.vertices[:, 1], 0.0)


class TestTrefoil:
    def test_single_arc_with_alexander_endpoints(self, trefoil_image):
        assert len(trefoil_image.arcs) == 1
        v = trefoil_image.arcs[0].vertices
        assert abs(float(v[:, 0].min()) - math.pi / 6) < 1e-6
        assert abs(float(v[:, 0].max()) - 5 * math.pi / 6) < 1e-6

    def test_witness_quality(self, trefoil_image):
        for arc, wits in zip(trefoil_image.arcs, trefoil_image.witnesses):
            group = knot_group(KnotSpec.torus(2, 3))
            for vertex, w in zip(arc.vertices, wits):
                assert w.residual <= 1e-9
                assert abs(w.alpha - vertex[0]) < 1e-8
                assert abs((w.beta - vertex[1] + math.pi) % TWO_PI - math.pi) < 1e-8
                m = w.eval(group.meridian)
                l = w.eval(group.longitude)
                assert su2.qdist(su2.commutator(m, l), su2.IDENTITY) <= 1e-9

    def test_linear_slope_relation(self, trefoil_image):
        # beta + pq*alpha is constant mod 2pi along the arc: regression check
        v = trefoil_image.arcs[0].vertices
        values = np.mod(v[:, 1] + 6 * v[:, 0], TWO_PI)
        # center around the circular mean before measuring the spread
        mean = math.atan2(float(np.mean(np.sin(values))), float(np.mean(np.cos(values))))
        spread = np.abs(np.mod(values - mean + math.pi, TWO_PI) - math.pi)
        assert float(spread.max()) < 1e-6
        assert abs(mean - math.pi) < 1e-6  # the constant is pi for T(2,3)

    def test_nonzero_winding_of_closure(self, trefoil_image):
        closed = closed_arc_with_return(trefoil_image.arcs[0])
        w = winding_number(closed)
        assert w != 0
        assert abs(w) == 2  # slope -6 over an alpha-range of 2pi/3

    def test_separates_singular_points(self, trefoil_image):
        graph = trefoil_image.graph()
        p = PillowcasePoint(0.0, math.pi)
        q = PillowcasePoint(math.pi, math.pi)
        assert separates(graph, p, q, 512) is True
        assert separates(graph, p, q, 1024) is True

    def test_corner_exclusion(self, trefoil_image):
        for wits in trefoil_image.witnesses:
            for w in wits:
                assert 1e-2 <= w.alpha <= math.pi - 1e-2

    def test_tau_consistency(self, trefoil_image):
        # (alpha, beta) and (-alpha, -beta) describe conjugate assignments:
        # conjugating by j realises the involution image
        group = knot_group(KnotSpec.torus(2, 3))
        w = trefoil_image.witnesses[0][len(trefoil_image.witnesses[0]) // 2]
        flip = (0.0, 0.0, 1.0, 0.0)
        mirrored = tuple(su2.conjugate_by(flip, q) for q in w.images)
        m = su2.eval_word(mirrored, group.meridian)
        l = su2.eval_word(mirrored, group.longitude)
        assert abs((su2.diagonal_angle(m) + w.alpha) % TWO_PI) < 1e-8
        assert abs((su2.diagonal_angle(l) + w.beta) % TWO_PI) < 1e-8

    def test_matches_brute_force_sweep(self, trefoil_image):
        # closed-form representation family as an independent oracle
        group = knot_group(KnotSpec.torus(2, 3))
        oracle = torus_knot_pillowcase_sweep(2, 3, (group.meridian, group.longitude),
                                             n=256)
        arc = trefoil_image.arcs[0]
        for alpha, beta, _ in oracle[:: 16]:
            # find the nearest sampled vertex in alpha
            idx = int(np.argmin(np.abs(arc.vertices[:, 0] - alpha)))
            vert = arc.vertices[idx]
            if abs(vert[0] - alpha) > 2e-2:
                continue
            d = abs((vert[1] - beta + math.pi) % TWO_PI - math.pi)
            d_conj = abs((vert[1] + beta + math.pi) % TWO_PI - math.pi)
            slope_slack = 6.5 * abs(vert[0] - alpha)
            assert min(d, d_conj) <= slope_slack + 1e-6


class TestT25:
    def test_two_arcs_with_alexander_endpoints(self, t25_image):
        assert len(t25_image.arcs) == 2
        endpoints = sorted(
            [float(a.vertices[:, 0].min()) for a in t25_image.arcs]
            + [float(a.vertices[:, 0].max()) for a in t25_image.arcs]
        )
        expected = [math.pi / 10, 3 * math.pi / 10, 7 * math.pi / 10, 9 * math.pi / 10]
        assert np.allclose(endpoints, expected, atol=1e-5)

    def test_slope_relation(self, t25_image):
        for arc in t25_image.arcs:
            v = arc.vertices
            values = np.mod(v[:, 1] + 10 * v[:, 0], TWO_PI)
            mean = math.atan2(float(np.mean(np.sin(values))),
                              float(np.mean(np.cos(values))))
            spread = np.abs(np.mod(values - mean + math.pi, TWO_PI) - math.pi)
            assert float(spread.max()) < 1e-6


class TestGauge:
    def test_canonicalization_idempotent(self, trefoil_image):
        w = trefoil_image.witnesses[0][10]
        group = knot_group(KnotSpec.torus(2, 3))
        once = canonicalize_gauge(w.images, group.meridian)
        twice = canonicalize_gauge(once, group.meridian)
        for a, b in zip(once, twice):
            assert su2.qdist(a, b) < 1e-12
