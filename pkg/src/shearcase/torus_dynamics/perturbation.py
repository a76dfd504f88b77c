"""Bridge between shearing programs and SL(2,Z)-conjugated coordinate maps.

A shear in a primitive integer direction (a, b) with an odd profile f is the
coordinate map

    (alpha, beta) |-> (alpha, beta) + f(-b alpha + a beta) * (a, b),

which factors as A o chi_f o A^{-1} for any A in SL(2,Z) whose first column
is (a, b), where chi_f(x, y) = (x + f(y), y).  This module completes shear
directions to such matrices, records the zero-mean antiderivative of the
profile, and composes the resulting coordinate maps with the same uniform
time interpolation used by the timed programs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonPrimitiveDirection, ProfileNotOdd
from .shearing import ShearingMap, ShearingProfile, ShearingProgram, canonicalize


def complete_to_sl2z(a, b):
    """Complete a primitive column (a, b) to [[a, c], [b, d]] with ad - cb = 1.

    Among the solution family (c, d) = (c0 + t a, d0 + t b) the representative
    with minimal |c| is chosen, ties broken by nonnegative d.
    """
    a, b = int(a), int(b)
    if math.gcd(a, b) != 1:
        raise NonPrimitiveDirection(f"direction ({a}, {b}) has gcd {math.gcd(a, b)}")
    # extended Euclid: x a + y b = 1  ->  d0 = x, c0 = -y
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_x, old_y = -old_x, -old_y
    d0, c0 = old_x, -old_y

    candidates = []
    for t in range(-abs(d0) - abs(c0) - 2, abs(d0) + abs(c0) + 3):
        c, d = c0 + t * a, d0 + t * b
        candidates.append((abs(c), 0 if d >= 0 else 1, c, d))
    candidates.sort()
    _, _, c, d = candidates[0]
    assert a * d - c * b == 1
    return ((a, c), (b, d))


@dataclass(frozen=True)
class PerturbationStep:
    """One conjugated-shear step: matrix A = ((a, c), (b, d)) and profile data.

    ``g_cosine`` is the zero-mean antiderivative of the odd profile f as a
    cosine series (harmonic, coefficient); the induced coordinate map uses
    f = g'.  The first column (a, b) of A is the shear direction.
    """

    matrix: tuple
    g_cosine: tuple

    def __post_init__(self):
        ((a, c), (b, d)) = self.matrix
        if a * d - c * b != 1:
            raise ValueError(f"matrix {self.matrix} does not have determinant 1")
        object.__setattr__(self, "matrix", ((int(a), int(c)), (int(b), int(d))))
        object.__setattr__(self, "g_cosine", tuple((int(m), float(v)) for m, v in self.g_cosine))
        if any(m == 0 for m, _ in self.g_cosine):
            raise ValueError("antiderivative must have zero constant term")

    @property
    def direction(self):
        return (self.matrix[0][0], self.matrix[1][0])

    def profile(self):
        """f = g' as an odd sine profile."""
        return ShearingProfile(sine=tuple((m, -v * m) for m, v in self.g_cosine))

    def apply(self, pts, scale=1.0, reduce=True):
        """(alpha, beta) + scale * f(-b alpha + a beta) * (a, b)."""
        pts = np.asarray(pts, dtype=float)
        a, b = self.direction
        s = -b * pts[..., 0] + a * pts[..., 1]
        f = self.profile()(s) * scale
        out = pts + np.stack([f * a, f * b], axis=-1)
        return canonicalize(out) if reduce else out


def program_to_perturbation(program: ShearingProgram):
    """Translate every program step into matrix-plus-antiderivative data.

    Requires odd profiles (the equivariant construction only emits those) and
    primitive integer directions.  The stored normal is either (-b, a) or its
    negative; in the latter case the odd profile absorbs the sign flip.
    """
    steps = []
    for step in program.steps:
        mapping = step.mapping.scaled(step.duration * step.speed)
        a, b = mapping.v
        if math.gcd(a, b) != 1:
            raise NonPrimitiveDirection(f"step direction ({a}, {b}) is not primitive")
        profile = mapping.profile
        if not profile.is_odd:
            raise ProfileNotOdd(
                "profiles with cosine terms do not arise from even class functions"
            )
        if mapping.w == (-b, a):
            pass
        elif mapping.w == (b, -a):
            # f(<p, (b, -a)>) = f(-s) = -f(s) for odd f
            profile = profile.negated()
        else:  # pragma: no cover - excluded by ShearingMap invariants
            raise ValueError(f"normal {mapping.w} is not +/- the rotated direction")
        matrix = complete_to_sl2z(a, b)
        g = ShearingProfile(sine=profile.sine).antiderivative_cosine()
        steps.append(PerturbationStep(matrix, g))
    return steps


def perturbation_to_map(steps, t):
    """The composed coordinate map at time t under the uniform schedule.

    Steps 0..k-1 act fully and step k acts at fraction n(t - k/n), where n is
    the number of steps; at t = 0 this is the identity.
    Returns a callable acting on points of shape (..., 2).
    """
    steps = list(steps)
    t = float(t)
    if not (0.0 <= t <= 1.0 + 1e-12):
        raise ValueError(f"time {t} outside [0, 1]")
    n = len(steps)

    def mapping(pts, reduce=True):
        out = np.asarray(pts, dtype=float)
        if n == 0:
            return canonicalize(out) if reduce else out
        full = min(int(math.floor(t * n)), n)
        frac = t * n - full
        for step in steps[:full]:
            out = step.apply(out, 1.0, reduce=False)
        if full < n and frac > 0.0:
            out = steps[full].apply(out, frac, reduce=False)
        return canonicalize(out) if reduce else out

    return mapping
