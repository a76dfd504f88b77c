"""Exact shearing maps of the torus R^2 / 2*pi*Z^2 and timed compositions.

A shearing map displaces every point along a fixed integer direction v by an
amount depending only on the value of an integral linear form l that kills v:

    p  |->  p + f(l(p)) * v,        l(u) = <u, w>,  <v, w> = 0.

Because the displacement keeps l constant, such maps are bijections with
Jacobian determinant identically 1, their inverses are shears with the
negated profile, and flows of shearing vector fields are linear in time.
Everything in this module is closed-form; no integration is performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


def canonicalize(pts):
    """Reduce coordinates to the fundamental domain [0, 2*pi) x [0, 2*pi)."""
    return np.mod(np.asarray(pts, dtype=float), TWO_PI)


def tau(pts):
    """Hyperelliptic involution (x, y) -> (-x, -y), canonically reduced."""
    return canonicalize(-np.asarray(pts, dtype=float))


def torus_distance(p, q):
    """Quotient Euclidean metric: minimum over lattice shifts of the planar distance.

    The metric is component-separable, so the minimum is attained by reducing
    each coordinate difference into (-pi, pi].
    """
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    d = np.mod(d + np.pi, TWO_PI) - np.pi
    return np.linalg.norm(d, axis=-1)


def _as_int_vec(v, name):
    a = np.asarray(v)
    out = (int(a[0]), int(a[1]))
    if not np.array_equal(a.astype(float), np.asarray(out, dtype=float)):
        raise ValueError(f"{name} must have integer entries, got {v!r}")
    return out


@dataclass(frozen=True, slots=True)
class ShearingProfile:
    """Finite trigonometric profile f(s) = sum c_m sin(m s) + sum d_m cos(m s).

    ``sine`` and ``cosine`` are tuples of (harmonic, coefficient) pairs.  A
    profile without cosine terms is odd, which is what makes the associated
    shearing map commute with the hyperelliptic involution.  Harmonic 0 is
    only meaningful for cosine terms (a constant offset).
    """

    sine: tuple = ()
    cosine: tuple = ()

    def __post_init__(self):
        sine = tuple((int(m), float(c)) for m, c in self.sine)
        cosine = tuple((int(m), float(c)) for m, c in self.cosine)
        for m, _ in sine:
            if m <= 0:
                raise ValueError("sine harmonics must be positive integers")
        for m, _ in cosine:
            if m < 0:
                raise ValueError("cosine harmonics must be nonnegative integers")
        object.__setattr__(self, "sine", sine)
        object.__setattr__(self, "cosine", cosine)

    @property
    def is_odd(self):
        return all(c == 0.0 for _, c in self.cosine)

    @property
    def is_zero(self):
        return all(c == 0.0 for _, c in self.sine) and self.is_odd

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for m, c in self.sine:
            if c != 0.0:
                out += c * np.sin(m * s)
        for m, c in self.cosine:
            if c != 0.0:
                out += c * np.cos(m * s)
        return out

    def derivative_values(self, s):
        """f'(s), used for exact Jacobians of shearing maps."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for m, c in self.sine:
            if c != 0.0:
                out += c * m * np.cos(m * s)
        for m, c in self.cosine:
            if c != 0.0:
                out -= c * m * np.sin(m * s)
        return out

    def scaled(self, factor):
        factor = float(factor)
        return ShearingProfile(
            sine=tuple((m, c * factor) for m, c in self.sine),
            cosine=tuple((m, c * factor) for m, c in self.cosine),
        )

    def negated(self):
        return self.scaled(-1.0)

    def antiderivative_cosine(self):
        """Coefficients of the zero-mean antiderivative g with g' = f.

        Only defined for odd profiles: integrating c_m sin(m s) gives
        -(c_m / m) cos(m s), a cosine series with zero mean.
        """
        if not self.is_odd:
            raise ValueError("antiderivative in cosine form requires an odd profile")
        return tuple((m, -c / m) for m, c in self.sine if c != 0.0)

    def sup_bound(self):
        """Cheap upper bound sum |c_m| + |d_m| for |f|."""
        return sum(abs(c) for _, c in self.sine) + sum(abs(c) for _, c in self.cosine)


@dataclass(frozen=True, slots=True)
class ShearingMap:
    """The torus self-map p |-> p + profile(<p, w>) * v.

    ``v`` must be a primitive integer vector, ``w`` an integer vector
    orthogonal to ``v`` with coprime entries, so that the linear form
    l(u) = <u, w> maps the lattice 2*pi*Z^2 into 2*pi*Z and the formula
    descends to the torus.
    """

    v: tuple
    w: tuple
    profile: ShearingProfile

    def __post_init__(self):
        v = _as_int_vec(self.v, "v")
        w = _as_int_vec(self.w, "w")
        if v == (0, 0) or math.gcd(v[0], v[1]) != 1:
            raise ValueError(f"direction v={v} must be a primitive integer vector")
        if w == (0, 0) or math.gcd(w[0], w[1]) != 1:
            raise ValueError(f"normal w={w} must be a primitive integer vector")
        if v[0] * w[0] + v[1] * w[1] != 0:
            raise ValueError(f"w={w} must be orthogonal to v={v}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    def linear_form(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts[..., 0] * self.w[0] + pts[..., 1] * self.w[1]

    def displacement(self, pts):
        f = self.profile(self.linear_form(pts))
        return np.stack([f * self.v[0], f * self.v[1]], axis=-1)

    def __call__(self, pts, reduce=True):
        pts = np.asarray(pts, dtype=float)
        out = pts + self.displacement(pts)
        return canonicalize(out) if reduce else out

    def inverse(self):
        """Exact inverse: the displacement leaves l unchanged, so negating
        the profile undoes the shear."""
        return ShearingMap(self.v, self.w, self.profile.negated())

    def jacobian(self, pts):
        """Exact Jacobian I + f'(l(p)) * v w^T, shape (..., 2, 2); det == 1."""
        pts = np.asarray(pts, dtype=float)
        fp = self.profile.derivative_values(self.linear_form(pts))
        jac = np.zeros(pts.shape[:-1] + (2, 2))
        jac[..., 0, 0] = 1.0 + fp * self.v[0] * self.w[0]
        jac[..., 0, 1] = fp * self.v[0] * self.w[1]
        jac[..., 1, 0] = fp * self.v[1] * self.w[0]
        jac[..., 1, 1] = 1.0 + fp * self.v[1] * self.w[1]
        return jac

    def scaled(self, factor):
        return ShearingMap(self.v, self.w, self.profile.scaled(factor))

    @property
    def is_equivariant(self):
        return self.profile.is_odd


def apply_shearing(mapping: ShearingMap, p, reduce=True):
    """Apply a shearing map to one point or an array of points."""
    return mapping(p, reduce=reduce)


@dataclass(frozen=True, slots=True)
class ProgramStep:
    """One timed shearing segment: flow along ``mapping``'s field at ``speed``.

    Over its time slot of length ``duration`` the segment realises the exact
    flow p + (t - t_start) * speed * profile(l(p)) * v, so the completed step
    is the shear with profile scaled by duration * speed.
    """

    mapping: ShearingMap
    duration: float
    speed: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.duration <= 1.0):
            raise ValueError(f"duration must lie in (0, 1], got {self.duration}")
        if self.speed <= 0.0:
            raise ValueError(f"speed must be positive, got {self.speed}")

    def full_map(self):
        return self.mapping.scaled(self.duration * self.speed)

    def partial_map(self, elapsed):
        return self.mapping.scaled(elapsed * self.speed)


class ShearingProgram:
    """An ordered list of timed shearing steps covering [0, 1].

    Evaluation at time t composes all completed steps and applies the active
    step linearly in (t - t_start); evaluation at 0 is the identity and every
    evaluation is a finite composition of shears, hence exactly
    area-preserving.
    """

    def __init__(self, steps, schedule=None):
        self.steps = list(steps)
        if schedule is None:
            bounds = np.concatenate([[0.0], np.cumsum([s.duration for s in self.steps])])
        else:
            bounds = np.asarray(schedule, dtype=float)
        if len(bounds) != len(self.steps) + 1:
            raise ValueError("schedule must have len(steps) + 1 breakpoints")
        if abs(bounds[0]) > 1e-12 or abs(bounds[-1] - 1.0) > 1e-9:
            raise ValueError("schedule must start at 0 and end at 1")
        if np.any(np.diff(bounds) <= 0):
            raise ValueError("schedule breakpoints must be strictly increasing")
        for i, step in enumerate(self.steps):
            if abs((bounds[i + 1] - bounds[i]) - step.duration) > 1e-9:
                raise ValueError(f"step {i} duration disagrees with the schedule")
        bounds[0], bounds[-1] = 0.0, 1.0
        self.schedule = bounds

    def __len__(self):
        return len(self.steps)

    def _locate(self, t):
        if not (0.0 <= t <= 1.0 + 1e-12):
            raise ValueError(f"time {t} outside [0, 1]")
        t = min(t, 1.0)
        i = int(np.searchsorted(self.schedule, t, side="right") - 1)
        return min(i, len(self.steps) - 1), t

    def __call__(self, t, pts, reduce=True):
        """Evaluate the program map at time t on points of shape (..., 2)."""
        if not self.steps:
            return canonicalize(pts) if reduce else np.asarray(pts, dtype=float)
        i, t = self._locate(float(t))
        out = np.asarray(pts, dtype=float)
        for step in self.steps[:i]:
            out = step.full_map()(out, reduce=False)
        elapsed = t - self.schedule[i]
        if elapsed > 0.0:
            out = self.steps[i].partial_map(elapsed)(out, reduce=False)
        return canonicalize(out) if reduce else out

    def evaluate_at_times(self, times, pts, reduce=True):
        """Evaluate at a sorted array of times, sharing the composed prefix.

        Returns an array of shape (len(times),) + pts.shape.
        """
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0):
            raise ValueError("times must be sorted ascending")
        pts = np.asarray(pts, dtype=float)
        out = np.empty((len(times),) + pts.shape)
        state = pts
        step_idx = 0
        for j, t in enumerate(times):
            i, t = self._locate(float(t))
            while step_idx < i:
                state = self.steps[step_idx].full_map()(state, reduce=False)
                step_idx += 1
            elapsed = t - self.schedule[i]
            snap = state
            if elapsed > 0.0:
                snap = self.steps[i].partial_map(elapsed)(state, reduce=False)
            out[j] = canonicalize(snap) if reduce else snap
        return out

    def inverse_at(self, t, pts, reduce=True):
        """Exact inverse of the time-t map (reversed shears, negated profiles)."""
        i, t = self._locate(float(t))
        out = np.asarray(pts, dtype=float)
        elapsed = t - self.schedule[i]
        if elapsed > 0.0:
            out = self.steps[i].partial_map(elapsed).inverse()(out, reduce=False)
        for step in reversed(self.steps[:i]):
            out = step.full_map().inverse()(out, reduce=False)
        return canonicalize(out) if reduce else out

    @property
    def is_equivariant(self):
        return all(s.mapping.is_equivariant for s in self.steps)


def eval_program(program: ShearingProgram, t, pts, reduce=True):
    """Functional alias for ``program(t, pts)``."""
    return program(t, pts, reduce=reduce)
