"""Splice presentations and constructive irreducible representations."""

import math

import numpy as np
import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from shearcase import su2
from shearcase.knot_reps import (
    KnotSpec,
    assignment_residual,
    find_splice_rep,
    splice_presentation,
    _exponent_sum,
)

TWO_PI = 2 * math.pi


class TestSplicePresentation:
    def test_unknot_unknot_is_trivial(self):
        pres = splice_presentation(KnotSpec.unknot(), KnotSpec.unknot())
        assert pres.generators == 2
        rows = sympy.Matrix([_exponent_sum(r, 2) for r in pres.relators])
        d = sympy_snf(rows)
        assert [int(d[i, i]) for i in range(2)] == [1, 1]

    @pytest.mark.parametrize("specs", [
        (KnotSpec.torus(2, 3), KnotSpec.torus(2, 3)),
        (KnotSpec.torus(2, 3), KnotSpec.torus(2, 5)),
        (KnotSpec.torus(3, 4), KnotSpec.torus(2, 3)),
    ])
    def test_torus_splices_are_homology_spheres(self, specs):
        pres = splice_presentation(*specs)
        assert pres.generators == 4
        assert len(pres.relators) == 4
        # independent Smith-form oracle: trivial abelianization
        rows = sympy.Matrix([_exponent_sum(r, pres.generators) for r in pres.relators])
        d = sympy_snf(rows)
        divisors = [abs(int(d[i, i])) for i in range(pres.generators)]
        assert divisors == [1, 1, 1, 1]


class TestFindSpliceRep:
    @pytest.mark.parametrize("specs,seed", [
        ((KnotSpec.torus(2, 3), KnotSpec.torus(2, 3)), 11),
        ((KnotSpec.torus(2, 3), KnotSpec.torus(2, 5)), 13),
    ])
    def test_constructive_representation(self, specs, seed):
        assignment, pres = find_splice_rep(*specs, rng=np.random.default_rng(seed))
        assert assignment.residual <= 1e-9
        assert assignment.is_irreducible()
        # restriction to each factor is an irreducible representation of it
        for which, (lo, hi) in enumerate(pres.factor_slices):
            sub = assignment.images[lo:hi]
            fg = pres.factor_groups[which]
            assert assignment_residual(sub, fg.relators) <= 1e-9
            comm = su2.qdist(su2.commutator(sub[0], sub[1]), su2.IDENTITY)
            assert comm >= 1e-3

    def test_gluing_relations_hold(self):
        assignment, pres = find_splice_rep(KnotSpec.torus(2, 3), KnotSpec.torus(2, 3),
                                           rng=np.random.default_rng(5))
        m_a = su2.eval_word(assignment.images, pres.meridians[0])
        l_a = su2.eval_word(assignment.images, pres.longitudes[0])
        m_b = su2.eval_word(assignment.images, pres.meridians[1])
        l_b = su2.eval_word(assignment.images, pres.longitudes[1])
        assert su2.qdist(m_a, l_b) <= 1e-9
        assert su2.qdist(l_a, m_b) <= 1e-9
        # boundary value is interior: genuinely irreducible on the torus
        assert 1e-2 < assignment.alpha % TWO_PI < TWO_PI - 1e-2
