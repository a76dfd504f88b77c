"""Divergence-free vector fields on the torus as finite Fourier data.

A divergence-free field has sine/cosine coefficient vectors orthogonal to
their wavevector k, hence parallel to kbar = (-k2, k1): every Fourier term is
a shearing vector field with integer direction.  The decomposition here uses
the uniform periodic trapezoid rule (the plain DFT), which is spectrally
accurate for smooth periodic fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceTooLarge, InverseFailed
from .shearing import (
    TWO_PI,
    ShearingMap,
    ShearingProfile,
    canonicalize,
    tau,
    torus_distance,
)

DIV_TOL = 1e-8


def grid_points(n):
    """Uniform n x n grid on [0, 2*pi)^2, shape (n, n, 2); axis 0 is x."""
    xs = np.arange(n) * (TWO_PI / n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    return np.stack([gx, gy], axis=-1)


def _canonical_wavevector(k):
    """Representative of the pair {k, -k}: first nonzero entry positive."""
    k1, k2 = int(k[0]), int(k[1])
    if k1 < 0 or (k1 == 0 and k2 < 0):
        return (-k1, -k2), -1.0
    return (k1, k2), 1.0


@dataclass(frozen=True)
class FourierTerm:
    """One +/-k pair: u_sin * sin(k.p) + u_cos * cos(k.p), with u _|_ k."""

    k: tuple
    u_sin: tuple
    u_cos: tuple

    def direction_data(self):
        """Primitive shear direction, primitive normal, and harmonic.

        For k with gcd g the term is a shear in direction v = kbar/g with
        linear form <., k/g> and profile harmonic g.
        """
        k1, k2 = self.k
        g = math.gcd(abs(k1), abs(k2))
        v = (-k2 // g, k1 // g)
        w = (k1 // g, k2 // g)
        return v, w, g

    def as_shearing_map(self, scale=1.0):
        """The exact time-``scale`` flow of this term as a shearing map."""
        v, w, g = self.direction_data()
        # u = c * kbar = (c * g) * v and k . p = g * <p, w>, so the shear
        # profile is (c * g) * sin(g s) in the variable s = <p, w>.
        vv = float(v[0] * v[0] + v[1] * v[1])
        c_sin = float(np.dot(self.u_sin, v) / vv)
        c_cos = float(np.dot(self.u_cos, v) / vv)
        profile = ShearingProfile(
            sine=((g, scale * c_sin),) if c_sin else (),
            cosine=((g, scale * c_cos),) if c_cos else (),
        )
        return ShearingMap(v, w, profile)

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        phase = pts[..., 0] * self.k[0] + pts[..., 1] * self.k[1]
        out = np.zeros(pts.shape)
        s, c = np.sin(phase), np.cos(phase)
        for i in range(2):
            out[..., i] = s * self.u_sin[i] + c * self.u_cos[i]
        return out

    def jacobian(self, pts):
        pts = np.asarray(pts, dtype=float)
        phase = pts[..., 0] * self.k[0] + pts[..., 1] * self.k[1]
        s, c = np.sin(phase), np.cos(phase)
        jac = np.empty(pts.shape[:-1] + (2, 2))
        for i in range(2):
            for j in range(2):
                jac[..., i, j] = (c * self.u_sin[i] - s * self.u_cos[i]) * self.k[j]
        return jac

    def sup_norm(self):
        """Exact sup of |W| = sqrt(|u_sin|^2 + |u_cos|^2) scaled by the phase.

        sin and cos parts share the phase, so |W(p)|^2 =
        sin^2 |u_sin|^2 + 2 sin cos (u_sin.u_cos) + cos^2 |u_cos|^2; the
        maximum over the phase circle is the largest eigenvalue of the
        corresponding 2x2 quadratic form.
        """
        a = float(np.dot(self.u_sin, self.u_sin))
        b = float(np.dot(self.u_sin, self.u_cos))
        d = float(np.dot(self.u_cos, self.u_cos))
        lam = 0.5 * (a + d) + 0.5 * math.hypot(a - d, 2.0 * b)
        return math.sqrt(max(lam, 0.0))


@dataclass(frozen=True)
class FourierField:
    """A finite sum of divergence-free Fourier terms plus a constant part."""

    terms: tuple
    constant: tuple = (0.0, 0.0)
    equivariant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "constant", tuple(float(c) for c in self.constant))
        if self.equivariant:
            if any(c != 0.0 for c in self.constant):
                raise ValueError("equivariant fields cannot carry a constant term")
            for t in self.terms:
                if any(c != 0.0 for c in t.u_cos):
                    raise ValueError("equivariant fields cannot carry cosine terms")
        for t in self.terms:
            dot_s = t.u_sin[0] * t.k[0] + t.u_sin[1] * t.k[1]
            dot_c = t.u_cos[0] * t.k[0] + t.u_cos[1] * t.k[1]
            if abs(dot_s) > 1e-12 or abs(dot_c) > 1e-12:
                raise ValueError(f"term k={t.k} is not orthogonal to its wavevector")

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape)
        out[..., 0] += self.constant[0]
        out[..., 1] += self.constant[1]
        for t in self.terms:
            out += t.evaluate(pts)
        return out

    __call__ = evaluate

    def jacobian(self, pts):
        pts = np.asarray(pts, dtype=float)
        jac = np.zeros(pts.shape[:-1] + (2, 2))
        for t in self.terms:
            jac += t.jacobian(pts)
        return jac

    def lipschitz_bound(self, n=128):
        """Max operator norm of the analytic Jacobian over an n x n grid."""
        if not self.terms:
            return 0.0
        jac = self.jacobian(grid_points(n))
        return float(np.max(_opnorm2x2(jac)))

    def sup_norm(self, n=128):
        vals = self.evaluate(grid_points(n))
        return float(np.max(np.linalg.norm(vals, axis=-1)))

    def split_into_shear_terms(self):
        """Terms as single shearing fields; a generic constant part becomes
        two axis-aligned constant shears."""
        parts = [FourierTerm(t.k, t.u_sin, t.u_cos) for t in self.terms]
        cx, cy = self.constant
        consts = []
        if cx != 0.0:
            consts.append(((1, 0), (0, 1), cx))
        if cy != 0.0:
            consts.append(((0, 1), (1, 0), cy))
        return parts, consts


def _dyadic_truncate(value, bits=40):
    """Round to a float with at most bits+1 significant mantissa bits.

    Products of such a value with integers up to 2^(52-bits) are exact, which
    makes the stored coefficient vectors exactly orthogonal to their
    wavevectors: both dot-product terms cancel bitwise.
    """
    if value == 0.0:
        return 0.0
    _, e = math.frexp(value)
    scaled = math.ldexp(value, bits - e)
    return math.ldexp(float(round(scaled)), e - bits)


def _opnorm2x2(jac):
    """Largest singular value of a (..., 2, 2) array, closed form."""
    a, b = jac[..., 0, 0], jac[..., 0, 1]
    c, d = jac[..., 1, 0], jac[..., 1, 1]
    q = a * a + b * b + c * c + d * d
    det = a * d - b * c
    root = np.sqrt(np.maximum(q * q - 4.0 * det * det, 0.0))
    return np.sqrt(np.maximum((q + root) / 2.0, 0.0))


def fourier_decompose(samples_or_field, truncation, div_tol=DIV_TOL, equivariant=None):
    """Split a sampled field into Fourier terms with |k1|, |k2| <= truncation.

    ``samples_or_field`` is either an (n, n, 2) array of grid samples or an
    object with an ``evaluate`` method (a frozen-time field).  Coefficients
    are the periodic-trapezoid values of the integral formulas
    u_k = (1/(2 pi^2)) * integral of X * sin(k.p); each term is projected onto
    the admissible direction kbar and the discarded component is reported.

    Raises DivergenceTooLarge when the projection residual exceeds div_tol.
    Returns (FourierField, info dict with 'projection_residual' and
    'truncation_residual').
    """
    if hasattr(samples_or_field, "evaluate") or callable(samples_or_field):
        n = 4 * truncation
        n = max(n, 32)
        fn = getattr(samples_or_field, "evaluate", samples_or_field)
        samples = np.asarray(fn(grid_points(n)), dtype=float)
    else:
        samples = np.asarray(samples_or_field, dtype=float)
    n = samples.shape[0]
    if samples.shape != (n, n, 2):
        raise ValueError("samples must have shape (n, n, 2)")
    if n < 4 * truncation:
        raise ValueError(f"grid resolution {n} must be at least 4*K = {4 * truncation}")

    # The DFT of grid samples *is* the trapezoid rule for the coefficient
    # integrals: u_k = -2 Im H[k] / n^2, v_k = 2 Re H[k] / n^2.
    spec = [np.fft.fft2(samples[..., i]) for i in range(2)]
    constant = tuple(float(spec[i][0, 0].real) / n**2 for i in range(2))

    terms = []
    proj_residual = 0.0
    for k1 in range(0, truncation + 1):
        k2_range = range(1, truncation + 1) if k1 == 0 else range(-truncation, truncation + 1)
        for k2 in k2_range:
            k = (k1, k2)
            h = [spec[i][k1 % n, k2 % n] for i in range(2)]
            u_sin = np.array([-2.0 * h[i].imag / n**2 for i in range(2)])
            u_cos = np.array([2.0 * h[i].real / n**2 for i in range(2)])
            if np.all(np.abs(u_sin) < 1e-15) and np.all(np.abs(u_cos) < 1e-15):
                continue
            kv = np.array(k, dtype=float)
            khat = kv / np.linalg.norm(kv)
            res = max(abs(float(u_sin @ khat)), abs(float(u_cos @ khat)))
            proj_residual = max(proj_residual, res)
            # snap onto the kbar direction with a dyadic scalar so the stored
            # vectors are exactly orthogonal to k in float arithmetic
            kbar = (-k[1], k[0])
            kk = float(k[0] * k[0] + k[1] * k[1])
            c_sin = _dyadic_truncate(float(u_sin[0] * kbar[0] + u_sin[1] * kbar[1]) / kk)
            c_cos = _dyadic_truncate(float(u_cos[0] * kbar[0] + u_cos[1] * kbar[1]) / kk)
            if c_sin == 0.0 and c_cos == 0.0:
                continue
            terms.append(FourierTerm(
                k, (c_sin * kbar[0], c_sin * kbar[1]),
                (c_cos * kbar[0], c_cos * kbar[1])))

    if proj_residual > div_tol:
        raise DivergenceTooLarge(proj_residual, div_tol)

    if equivariant is None:
        equivariant = all(np.allclose(t.u_cos, 0.0) for t in terms) and np.allclose(
            constant, 0.0
        )
    if equivariant:
        terms = [
            FourierTerm(t.k, t.u_sin, (0.0, 0.0))
            for t in terms
            if any(c != 0.0 for c in t.u_sin)
        ]
        constant = (0.0, 0.0)
    field = FourierField(tuple(terms), constant, equivariant)

    recon = field.evaluate(grid_points(n))
    trunc_residual = float(np.max(np.linalg.norm(recon - samples, axis=-1)))
    info = {"projection_residual": proj_residual, "truncation_residual": trunc_residual}
    return field, info


class TimeField:
    """A time-dependent vector field X_t(p) on [0, 1] x T^2.

    ``evaluator(t, pts)`` must accept points of shape (..., 2).  The declared
    grid resolution fixes where invariants (vanishing divergence,
    equivariance) are checked and where norms are measured.
    """

    def __init__(self, evaluator, grid_n=64, equivariant=False, div_tol=DIV_TOL,
                 check=True, time_samples=9):
        self.evaluator = evaluator
        self.grid_n = int(grid_n)
        self.equivariant = bool(equivariant)
        self.div_tol = float(div_tol)
        self._grid = grid_points(self.grid_n)
        if check:
            self.validate(time_samples)

    def __call__(self, t, pts):
        return np.asarray(self.evaluator(float(t), np.asarray(pts, dtype=float)), dtype=float)

    def sample_grid(self, t):
        return self(t, self._grid)

    def validate(self, time_samples=9):
        """Spectral divergence and (optionally) equivariance on the grid."""
        n = self.grid_n
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        kx = freqs[:, None]
        ky = freqs[None, :]
        for t in np.linspace(0.0, 1.0, time_samples):
            vals = self.sample_grid(t)
            divergence = np.fft.ifft2(
                1j * kx * np.fft.fft2(vals[..., 0]) + 1j * ky * np.fft.fft2(vals[..., 1])
            ).real
            div_max = float(np.max(np.abs(divergence)))
            if div_max > self.div_tol:
                raise DivergenceTooLarge(div_max, self.div_tol)
            if self.equivariant:
                mirrored = self(t, tau(self._grid))
                err = float(np.max(np.abs(mirrored + vals)))
                if err > 1e-8:
                    raise ValueError(f"field is not equivariant on the grid (residual {err:.2e})")

    @classmethod
    def from_fourier(cls, field: FourierField, grid_n=64, **kw):
        return cls(lambda t, pts: field.evaluate(pts), grid_n=grid_n,
                   equivariant=field.equivariant, **kw)

    @classmethod
    def blend(cls, start: FourierField, end: FourierField, grid_n=64, **kw):
        """Linear-in-time blend (1 - t) * start + t * end."""
        eq = start.equivariant and end.equivariant

        def evaluator(t, pts):
            return (1.0 - t) * start.evaluate(pts) + t * end.evaluate(pts)

        return cls(evaluator, grid_n=grid_n, equivariant=eq, **kw)


def estimate_lipschitz(field: TimeField, time_samples=9, inflation=1.1, h=1e-5):
    """Grid estimate of a Lipschitz constant for X_t, safety-inflated.

    Max over grid points and times of the operator norm of the
    central-difference Jacobian, multiplied by ``inflation``.
    """
    grid = field._grid
    best = 0.0
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    for t in np.linspace(0.0, 1.0, time_samples):
        dx = (field(t, grid + ex) - field(t, grid - ex)) / (2.0 * h)
        dy = (field(t, grid + ey) - field(t, grid - ey)) / (2.0 * h)
        jac = np.stack([np.stack([dx[..., 0], dy[..., 0]], axis=-1),
                        np.stack([dx[..., 1], dy[..., 1]], axis=-1)], axis=-2)
        best = max(best, float(np.max(_opnorm2x2(jac))))
    return inflation * best


def _newton_invert_map(forward, target, start, max_iter=50, tol=1e-12, fd_h=1e-6):
    """Solve forward(q) = target on the torus by damped Newton.

    ``forward`` acts on arrays (..., 2); comparison is in the quotient metric
    (residuals reduced into (-pi, pi]).  Raises InverseFailed on
    non-convergence at any point.
    """
    q = np.array(start, dtype=float)
    target = np.asarray(target, dtype=float)
    for _ in range(max_iter):
        res = forward(q) - target
        res = np.mod(res + np.pi, TWO_PI) - np.pi
        err = np.linalg.norm(res, axis=-1)
        if np.all(err < tol):
            return canonicalize(q)
        ex = np.array([fd_h, 0.0])
        ey = np.array([0.0, fd_h])
        j00j10 = (forward(q + ex) - forward(q - ex)) / (2 * fd_h)
        j01j11 = (forward(q + ey) - forward(q - ey)) / (2 * fd_h)
        det = j00j10[..., 0] * j01j11[..., 1] - j01j11[..., 0] * j00j10[..., 1]
        if np.any(np.abs(det) < 1e-14):
            raise InverseFailed("singular Jacobian during Newton inversion")
        step0 = (j01j11[..., 1] * res[..., 0] - j01j11[..., 0] * res[..., 1]) / det
        step1 = (-j00j10[..., 1] * res[..., 0] + j00j10[..., 0] * res[..., 1]) / det
        step = np.stack([step0, step1], axis=-1)
        # damped update: halve until the residual does not grow
        scale = np.ones(err.shape)
        for _ in range(20):
            trial = q - scale[..., None] * step
            res_t = forward(trial) - target
            res_t = np.mod(res_t + np.pi, TWO_PI) - np.pi
            err_t = np.linalg.norm(res_t, axis=-1)
            worse = err_t > err
            if not np.any(worse):
                break
            scale = np.where(worse, scale / 2.0, scale)
        q = q - scale[..., None] * step
    res = forward(q) - target
    res = np.mod(res + np.pi, TWO_PI) - np.pi
    if np.all(np.linalg.norm(res, axis=-1) < tol):
        return canonicalize(q)
    raise InverseFailed(
        f"Newton inversion did not converge within {max_iter} iterations "
        f"(max residual {float(np.max(np.linalg.norm(res, axis=-1))):.3e})"
    )


def derive_time_field(isotopy, grid_n=64, time_samples=33, dt=1e-3, equivariant=False,
                      check=True):
    """Recover the generating field X_t of an isotopy psi(t, p).

    X_t(q) is the time derivative of psi at the preimage psi^{-1}(t, q); the
    preimage is found by damped Newton started at the grid point itself.
    Requires psi(0, .) = id on the declared grid to 1e-9.
    """
    grid = grid_points(grid_n)
    id_err = float(np.max(torus_distance(np.asarray(isotopy(0.0, grid)), grid)))
    if id_err > 1e-9:
        raise ValueError(f"isotopy(0, .) differs from the identity by {id_err:.2e}")

    def evaluator(t, pts):
        t = float(t)
        pts = np.asarray(pts, dtype=float)
        p = _newton_invert_map(lambda q: np.asarray(isotopy(t, q)), pts, pts)
        if dt <= t <= 1.0 - dt:
            hi = np.asarray(isotopy(t + dt, p), dtype=float)
            lo = np.asarray(isotopy(t - dt, p), dtype=float)
            disp = np.mod(hi - lo + np.pi, TWO_PI) - np.pi
            return disp / (2 * dt)
        # second-order one-sided difference at the interval ends, with
        # displacements reduced through the quotient before differencing
        sign = 1.0 if t < dt else -1.0
        a = np.asarray(isotopy(t, p), dtype=float)
        b = np.asarray(isotopy(t + sign * dt, p), dtype=float)
        c = np.asarray(isotopy(t + 2 * sign * dt, p), dtype=float)
        d1 = np.mod(b - a + np.pi, TWO_PI) - np.pi
        d2 = np.mod(c - a + np.pi, TWO_PI) - np.pi
        return sign * (4.0 * d1 - d2) / (2 * dt)

    return TimeField(evaluator, grid_n=grid_n, equivariant=equivariant, check=check)
