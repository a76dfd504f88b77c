"""Independent oracles used by the tests.

Everything here is deliberately written against the problem statement, not
against the package internals: plain RK4, direct quadrature, brute-force
sweeps.  Expected values asserted in the tests were computed with these.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def rk4_flow(field_fn, times, pts, steps=4096):
    """Reference non-autonomous flow of dy/dt = field_fn(t, y), snapshotting
    at the sorted times.  Independent of the package's own integrator."""
    times = np.asarray(times, dtype=float)
    y = np.asarray(pts, dtype=float).copy()
    out = np.empty((len(times),) + y.shape)
    t = 0.0
    h_target = 1.0 / steps
    for j, t_next in enumerate(times):
        span = t_next - t
        if span > 0:
            m = max(1, int(math.ceil(span / h_target)))
            h = span / m
            for _ in range(m):
                k1 = field_fn(t, y)
                k2 = field_fn(t + h / 2, y + h / 2 * k1)
                k3 = field_fn(t + h / 2, y + h / 2 * k2)
                k4 = field_fn(t + h, y + h * k3)
                y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
            t = t_next
        out[j] = y
    return out


def torus_dist(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi
    return np.linalg.norm(d, axis=-1)


def trapezoid_fourier_coefficient(samples, k, kind):
    """Direct periodic-trapezoid value of the coefficient integrals
    (1/(2 pi^2)) * integral h(x, y) * sin/cos(k . (x, y))."""
    n = samples.shape[0]
    xs = np.arange(n) * (TWO_PI / n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    phase = k[0] * gx + k[1] * gy
    weight = np.sin(phase) if kind == "sin" else np.cos(phase)
    cell = (TWO_PI / n) ** 2
    return float(np.sum(samples * weight) * cell / (2.0 * math.pi**2))


def fd_jacobian_det(mapping, pts, h=1e-5):
    """Central-difference Jacobian determinant with seam-safe differences."""
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    dx = np.mod(mapping(pts + ex) - mapping(pts - ex) + np.pi, TWO_PI) - np.pi
    dy = np.mod(mapping(pts + ey) - mapping(pts - ey) + np.pi, TWO_PI) - np.pi
    dx /= 2 * h
    dy /= 2 * h
    return dx[..., 0] * dy[..., 1] - dx[..., 1] * dy[..., 0]


def torus_knot_rep(p, q, a, b, axis_angle):
    """Closed-form SU(2) representation of <u, v | u^p = v^q>.

    u has angle pi*a/p about e_z, v has angle pi*b/q about an axis tilted by
    ``axis_angle`` from e_z in the xz-plane; a = b mod 2 makes u^p = v^q.
    Returns quaternions (w, x, y, z).
    """
    tu = math.pi * a / p
    tv = math.pi * b / q
    u = (math.cos(tu), 0.0, 0.0, math.sin(tu))
    v = (math.cos(tv), math.sin(tv) * math.sin(axis_angle), 0.0,
         math.sin(tv) * math.cos(axis_angle))
    return u, v


def qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def qpow(a, n):
    out = (1.0, 0.0, 0.0, 0.0)
    base = a if n >= 0 else (a[0], -a[1], -a[2], -a[3])
    for _ in range(abs(n)):
        out = qmul(out, base)
    return out


def qword(images, word):
    out = (1.0, 0.0, 0.0, 0.0)
    for g in word:
        q = images[abs(g) - 1]
        if g < 0:
            q = (q[0], -q[1], -q[2], -q[3])
        out = qmul(out, q)
    return out


def conj_angle(q):
    return math.atan2(math.hypot(q[1], math.hypot(q[2], q[3])), q[0])


def torus_knot_pillowcase_sweep(p, q, group_words, n=720):
    """Brute-force sweep of (alpha, beta) pairs realised by the closed-form
    representation family, via the given meridian/longitude words."""
    meridian, longitude = group_words
    pairs = []
    parities = [(a, b) for a in range(1, p) for b in range(1, q) if (a - b) % 2 == 0]
    for a, b in parities:
        for phi in np.linspace(1e-3, math.pi - 1e-3, n):
            u, v = torus_knot_rep(p, q, a, b, float(phi))
            m = qword((u, v), meridian)
            l = qword((u, v), longitude)
            alpha = math.atan2(math.sqrt(m[1] ** 2 + m[2] ** 2 + m[3] ** 2), m[0])
            # rotate so m is diagonal with positive z, then l shares the axis
            nm = math.sqrt(m[1] ** 2 + m[2] ** 2 + m[3] ** 2)
            if nm < 1e-12:
                continue
            axis = (m[1] / nm, m[2] / nm, m[3] / nm)
            lv = l[1] * axis[0] + l[2] * axis[1] + l[3] * axis[2]
            beta = math.atan2(lv, l[0]) % TWO_PI
            pairs.append((alpha, beta, (a, b)))
    return pairs


def segments_intersect(p1, p2, p3, p4, eps=1e-12):
    """Plain 2D segment intersection predicate (no wrapping)."""
    d1 = np.asarray(p2) - np.asarray(p1)
    d2 = np.asarray(p4) - np.asarray(p3)
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(den) < eps:
        return None
    r = np.asarray(p3) - np.asarray(p1)
    t = (r[0] * d2[1] - r[1] * d2[0]) / den
    u = (r[0] * d1[1] - r[1] * d1[0]) / den
    if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
        return np.asarray(p1) + t * d1
    return None
