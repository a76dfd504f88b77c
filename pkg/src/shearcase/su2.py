"""Unit-quaternion model of SU(2).

Quaternions are plain tuples (w, x, y, z); the matrix model is
w*I + x*i*sigma1 + y*i*sigma2 + z*i*sigma3, under which diag(e^{i b}, e^{-i b})
is (cos b, 0, 0, sin b).  Since q -> M(q) is a linear isometry onto 2x2
matrices with |q| * unitary image, the operator-norm distance between two
SU(2) elements equals the Euclidean 4-distance of their quaternions, which
is what all residuals below use.
"""

from __future__ import annotations

import math

IDENTITY = (1.0, 0.0, 0.0, 0.0)


def qmul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def qconj(a):
    return (a[0], -a[1], -a[2], -a[3])


def qnorm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3])


def qnormalize(a):
    n = qnorm(a)
    if n == 0.0:
        raise ZeroDivisionError("cannot normalize the zero quaternion")
    return (a[0] / n, a[1] / n, a[2] / n, a[3] / n)


def qdist(a, b):
    """Operator-norm distance of the corresponding SU(2) matrices."""
    return math.sqrt(
        (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2 + (a[3] - b[3]) ** 2
    )


def from_axis_angle(axis, theta):
    nx, ny, nz = axis
    n = math.sqrt(nx * nx + ny * ny + nz * nz)
    if n == 0.0:
        raise ValueError("axis must be nonzero")
    s = math.sin(theta) / n
    return (math.cos(theta), nx * s, ny * s, nz * s)


def angle_of(q):
    """Conjugation-invariant angle in [0, pi]: q ~ (cos t, 0, 0, sin t)."""
    return math.atan2(math.sqrt(q[1] ** 2 + q[2] ** 2 + q[3] ** 2), q[0])


def diagonal_angle(q):
    """Signed angle b with q = (cos b, 0, 0, sin b), for near-diagonal q."""
    return math.atan2(q[3], q[0])


def diagonal(beta):
    return (math.cos(beta), 0.0, 0.0, math.sin(beta))


def conjugate_by(r, q):
    """r q r^-1 for unit r."""
    return qmul(qmul(r, q), qconj(r))


def eval_word(images, word):
    """Left-to-right product of signed 1-based generator indices."""
    out = IDENTITY
    for idx in word:
        if idx == 0 or abs(idx) > len(images):
            raise IndexError(f"word index {idx} out of range for {len(images)} generators")
        q = images[abs(idx) - 1]
        out = qmul(out, q if idx > 0 else qconj(q))
    return out


def commutator(a, b):
    return qmul(qmul(a, b), qmul(qconj(a), qconj(b)))


def rotation_aligning(axis_from, axis_to=(0.0, 0.0, 1.0)):
    """A unit quaternion whose conjugation rotates axis_from onto axis_to."""
    fx, fy, fz = axis_from
    tx, ty, tz = axis_to
    nf = math.sqrt(fx * fx + fy * fy + fz * fz)
    nt = math.sqrt(tx * tx + ty * ty + tz * tz)
    fx, fy, fz = fx / nf, fy / nf, fz / nf
    tx, ty, tz = tx / nt, ty / nt, tz / nt
    cx = fy * tz - fz * ty
    cy = fz * tx - fx * tz
    cz = fx * ty - fy * tx
    dot = fx * tx + fy * ty + fz * tz
    if dot < -1.0 + 1e-14:
        # opposite axes: rotate by pi about any orthogonal direction
        if abs(fx) < 0.9:
            ox, oy, oz = 1.0, 0.0, 0.0
        else:
            ox, oy, oz = 0.0, 1.0, 0.0
        cx = fy * oz - fz * oy
        cy = fz * ox - fx * oz
        cz = fx * oy - fy * ox
        n = math.sqrt(cx * cx + cy * cy + cz * cz)
        return (0.0, cx / n, cy / n, cz / n)
    w = math.sqrt((1.0 + dot) / 2.0)
    s = 1.0 / (2.0 * w)
    return qnormalize((w, cx * s, cy * s, cz * s))
