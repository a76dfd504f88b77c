"""Knot group presentations, numeric SU(2) representation varieties, and
constructive representations of spliced homology spheres.

Torus knots T(p, q) use the two-generator presentation <u, v | u^p = v^q>
with meridian u^{-s} v^r, where r p - s q = 1, and longitude u^p m^{-pq}.
Representations are solved numerically: the meridian image is pinned to a
diagonal of prescribed angle, conjugation gauge is fixed by forcing the
second generator's axis into the xz-plane, and a damped Gauss-Newton
iteration drives all relator residuals to machine precision.  Sweeping the
meridian angle with predictor-corrector continuation traces the image arcs
in the cut-open pillowcase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import su2
from .errors import (
    AbelianizationNontrivial,
    InvalidPeripheral,
    NoConvergence,
    NoIntersection,
)
from .pillowcase import CylinderCurve, EmbeddedGraph
from .torus_dynamics.shearing import TWO_PI

REP_TOL = 1e-9
IRREDUCIBLE_MARGIN = 1e-3
CORNER_MARGIN = 1e-2


# ---------------------------------------------------------------------------
# presentations

def _inverse_word(word):
    return [-g for g in reversed(word)]


def _exponent_sum(word, generators):
    out = [0] * generators
    for g in word:
        out[abs(g) - 1] += 1 if g > 0 else -1
    return out


def smith_normal_form(rows, cols):
    """Integer Smith form of the matrix with the given rows.

    Returns (divisors, V) where V is the unimodular column transform: the
    class of an exponent vector x in Z^cols / rowspace is read off from x V
    against the divisor list (zero divisor = free coordinate).
    """
    mat = [list(r) for r in rows]
    r = len(mat)
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        mat[i], mat[j] = mat[j], mat[i]

    def swap_cols(i, j):
        for row in mat:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):
        for t in range(cols):
            mat[dst][t] += k * mat[src][t]

    def add_col(src, dst, k):
        for row in mat:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    divisors = []
    top = 0
    for col in range(cols):
        if top >= r:
            break
        # find a pivot with minimal absolute value
        while True:
            pivot = None
            best = None
            for i in range(top, r):
                for j in range(col, cols):
                    val = abs(mat[i][j])
                    if val and (best is None or val < best):
                        best, pivot = val, (i, j)
            if pivot is None:
                break
            pi, pj = pivot
            swap_rows(top, pi)
            swap_cols(col, pj)
            done = True
            for i in range(top + 1, r):
                k = mat[i][col] // mat[top][col]
                if k:
                    add_row(top, i, -k)
                if mat[i][col]:
                    done = False
            for j in range(col + 1, cols):
                k = mat[top][j] // mat[top][col]
                if k:
                    add_col(col, j, -k)
                if mat[top][j]:
                    done = False
            if done:
                # divisibility normalization: fold in any remaining entry the
                # pivot does not divide, so divisors form a chain d1 | d2 | ...
                d = mat[top][col]
                offender = None
                for i in range(top + 1, r):
                    if any(mat[i][j] % d for j in range(col + 1, cols)):
                        offender = i
                        break
                if offender is None:
                    break
                add_row(offender, top, 1)
        if top < r and mat[top][col]:
            d = mat[top][col]
            if d < 0:
                for t in range(cols):
                    mat[top][t] = -mat[top][t]
                d = -d
            divisors.append(d)
            top += 1
    return divisors, v


def _quotient_class(vector, divisors, v):
    """Coordinates of a vector's class in Z^g / rowspace, via the V transform.

    Returns (torsion_residues, free_coordinates)."""
    cols = len(vector)
    transformed = [sum(vector[i] * v[i][j] for i in range(cols)) for j in range(cols)]
    k = len(divisors)
    torsion = [transformed[i] % divisors[i] for i in range(k)]
    free = transformed[k:]
    return torsion, free


@dataclass(frozen=True)
class KnotSpec:
    """Unknot, a torus knot T(p, q), or a custom presentation."""

    kind: str
    p: int = 0
    q: int = 0
    generators: int = 0
    relators: tuple = ()
    meridian: tuple = ()
    longitude: tuple = ()

    def __post_init__(self):
        if self.kind == "torus":
            p, q = self.p, self.q
            if abs(p) < 2 or abs(q) < 2 or math.gcd(p, q) != 1:
                raise ValueError("torus knot parameters must be coprime with |p|, |q| >= 2")
        elif self.kind == "custom":
            if self.generators < 1:
                raise ValueError("custom presentation needs at least one generator")
        elif self.kind != "unknot":
            raise ValueError(f"unknown knot kind {self.kind!r}")

    @classmethod
    def unknot(cls):
        return cls("unknot")

    @classmethod
    def torus(cls, p, q):
        return cls("torus", p=int(p), q=int(q))

    @classmethod
    def custom(cls, generators, relators, meridian, longitude):
        return cls("custom", generators=int(generators),
                   relators=tuple(tuple(r) for r in relators),
                   meridian=tuple(meridian), longitude=tuple(longitude))

    def name(self):
        if self.kind == "torus":
            return f"T({self.p},{self.q})"
        return self.kind


@dataclass(frozen=True)
class KnotGroup:
    """Finitely presented knot group with peripheral words.

    Words are tuples of signed 1-based generator indices.  Validation checks
    by exponent sums that the abelianization is Z, generated by the meridian
    class, and that the longitude is null-homologous.
    """

    generators: int
    relators: tuple
    meridian: tuple
    longitude: tuple

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(tuple(r) for r in self.relators))
        object.__setattr__(self, "meridian", tuple(self.meridian))
        object.__setattr__(self, "longitude", tuple(self.longitude))
        rows = [_exponent_sum(r, self.generators) for r in self.relators]
        divisors, v = smith_normal_form(rows, self.generators)
        if any(d != 1 for d in divisors) or self.generators - len(divisors) != 1:
            raise InvalidPeripheral("abelianization of the presentation is not Z")
        tor, free = _quotient_class(_exponent_sum(self.meridian, self.generators),
                                    divisors, v)
        if any(tor) or abs(free[0]) != 1:
            raise InvalidPeripheral("meridian does not generate the abelianization")
        tor, free = _quotient_class(_exponent_sum(self.longitude, self.generators),
                                    divisors, v)
        if any(tor) or free[0] != 0:
            raise InvalidPeripheral("longitude is not null-homologous")


def knot_group(spec: KnotSpec) -> KnotGroup:
    """Standard presentation with meridian and longitude words."""
    if spec.kind == "unknot":
        return KnotGroup(1, (), (1,), ())
    if spec.kind == "custom":
        return KnotGroup(spec.generators, spec.relators, spec.meridian, spec.longitude)
    p, q = spec.p, spec.q
    r, s = _peripheral_coefficients(p, q)
    relator = tuple([1] * p + [-2] * q)
    meridian = tuple(_power_word(1, -s) + _power_word(2, r))
    longitude = tuple([1] * p + list(_inverse_word(list(meridian))) * (p * q))
    return KnotGroup(2, (relator,), meridian, longitude)


def _power_word(gen, exponent):
    return [gen] * exponent if exponent >= 0 else [-gen] * (-exponent)


def _peripheral_coefficients(p, q):
    """Minimal-|s| solution of r p - s q = 1, ties to nonnegative s."""
    best = None
    # any solution: r0 p - s0 q = 1 by extended Euclid, then shift by (q, p)
    g, x, y = _extended_gcd(p, -q)
    assert g in (1, -1)
    r0, s0 = x * g, y * g
    for t in range(-abs(p) - abs(q) - 2, abs(p) + abs(q) + 3):
        r, s = r0 + t * q, s0 + t * p
        key = (abs(s), 0 if s >= 0 else 1)
        if best is None or key < best[0]:
            best = (key, (r, s))
    r, s = best[1]
    assert r * p - s * q == 1
    return r, s


def _extended_gcd(a, b):
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_x, x = x, old_x - qq * x
        old_y, y = y, old_y - qq * y
    return old_r, old_x, old_y


# ---------------------------------------------------------------------------
# numeric representations

@dataclass(frozen=True)
class RepAssignment:
    """Generator images with the measured relator residual."""

    images: tuple
    residual: float
    alpha: float = float("nan")
    beta: float = float("nan")

    def eval(self, word):
        return su2.eval_word(self.images, word)

    def is_irreducible(self, margin=IRREDUCIBLE_MARGIN):
        imgs = self.images
        for i in range(len(imgs)):
            for j in range(i + 1, len(imgs)):
                if su2.qdist(su2.commutator(imgs[i], imgs[j]), su2.IDENTITY) >= margin:
                    return True
        return False


def assignment_residual(images, relators):
    if not relators:
        return 0.0
    return max(su2.qdist(su2.eval_word(images, r), su2.IDENTITY) for r in relators)


def peripheral_commutation(images, meridian, longitude):
    m = su2.eval_word(images, meridian)
    l = su2.eval_word(images, longitude)
    return su2.qdist(su2.commutator(m, l), su2.IDENTITY)


def canonicalize_gauge(images, meridian):
    """Conjugate so the meridian image is diag with angle in [0, pi] and the
    second generator's axis lies in the xz-plane with nonnegative x.

    Idempotent up to floating point.  Requires a non-central meridian image.
    """
    images = list(images)
    m = su2.eval_word(images, meridian)
    axis = (m[1], m[2], m[3])
    norm = math.sqrt(sum(a * a for a in axis))
    if norm < 1e-13:
        return tuple(images)
    r = su2.rotation_aligning(axis)
    images = [su2.conjugate_by(r, q) for q in images]
    m = su2.eval_word(images, meridian)
    if m[3] < 0:  # prefer angle in (0, pi): conjugate by j to flip the torus
        flip = (0.0, 0.0, 1.0, 0.0)
        images = [su2.conjugate_by(flip, q) for q in images]
    if len(images) >= 2:
        v = images[1]
        phi = math.atan2(v[2], v[1]) if (abs(v[1]) + abs(v[2])) > 1e-13 else 0.0
        rot = (math.cos(phi / 2), 0.0, 0.0, -math.sin(phi / 2))
        images = [su2.conjugate_by(rot, q) for q in images]
        if images[1][1] < 0:
            half_turn = (0.0, 0.0, 0.0, 1.0)
            images = [su2.conjugate_by(half_turn, q) for q in images]
    return tuple(su2.qnormalize(q) for q in images)


def _pack(images):
    return np.array([c for q in images for c in q])


def _unpack(vec):
    return tuple(tuple(vec[4 * i:4 * i + 4]) for i in range(len(vec) // 4))


def _gauss_newton(residual_fn, vec0, tol=1e-12, max_iter=60, fd_h=1e-7):
    """Damped Gauss-Newton least squares with numerical Jacobian.

    Returns the solution vector or None when stalled above tolerance.
    """
    vec = np.asarray(vec0, dtype=float).copy()
    res = residual_fn(vec)
    err = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if err <= tol:
            return vec
        jac = np.empty((len(res), len(vec)))
        for j in range(len(vec)):
            bumped = vec.copy()
            bumped[j] += fd_h
            hi = residual_fn(bumped)
            bumped[j] -= 2 * fd_h
            lo = residual_fn(bumped)
            jac[:, j] = (hi - lo) / (2 * fd_h)
        step, *_ = np.linalg.lstsq(jac, res, rcond=None)
        scale = 1.0
        for _ in range(25):
            cand = vec - scale * step
            res_c = residual_fn(cand)
            err_c = float(np.max(np.abs(res_c)))
            if err_c < err:
                vec, res, err = cand, res_c, err_c
                break
            scale *= 0.5
        else:
            return vec if err <= tol else None
    return vec if err <= tol else None


def _rep_residual_factory(group: KnotGroup, alpha):
    """Residual vector: relators, pinned diagonal meridian, unit norms, gauge."""
    target = (math.cos(alpha), 0.0, 0.0, math.sin(alpha))

    def residual(vec):
        images = _unpack(vec)
        out = []
        for rel in group.relators:
            q = su2.eval_word(images, rel)
            out.extend((q[0] - 1.0, q[1], q[2], q[3]))
        m = su2.eval_word(images, group.meridian)
        out.extend((m[0] - target[0], m[1], m[2], m[3] - target[3]))
        for q in images:
            out.append(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3] - 1.0)
        if len(images) >= 2:
            out.append(images[1][2])  # second generator axis in the xz-plane
        return np.array(out)

    return residual


def solve_rep_at_angle(group: KnotGroup, alpha, seed_images, rep_tol=REP_TOL):
    """Solve the gauge-fixed relator system at a pinned meridian angle.

    Raises NoConvergence when Gauss-Newton stalls.  The returned assignment
    is gauge-canonical with its (alpha, beta) coordinates recorded.
    """
    residual = _rep_residual_factory(group, alpha)
    vec = _gauss_newton(residual, _pack(seed_images))
    if vec is None:
        raise NoConvergence(f"no representation found at alpha={alpha:.6f}")
    images = tuple(su2.qnormalize(q) for q in _unpack(vec))
    if len(images) >= 2 and images[1][1] < 0:
        half_turn = (0.0, 0.0, 0.0, 1.0)
        images = tuple(su2.conjugate_by(half_turn, q) for q in images)
    resid = assignment_residual(images, group.relators)
    if resid > rep_tol:
        raise NoConvergence(f"residual {resid:.2e} above tolerance at alpha={alpha:.6f}")
    l = su2.eval_word(images, group.longitude)
    if math.hypot(l[1], l[2]) > 1e-7:
        raise NoConvergence("longitude image is not diagonal in the meridian gauge")
    beta = math.atan2(l[3], l[0]) % TWO_PI
    return RepAssignment(images=images, residual=resid, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class ImageCurve:
    """Sampled image of the representation variety in the cut-open cylinder."""

    arcs: tuple                 # CylinderCurve per continuation chain
    witnesses: tuple            # tuple of RepAssignment tuples, parallel to arcs
    reducible_line: CylinderCurve
    gaps: tuple = ()            # alpha values where the solver failed

    def __post_init__(self):
        for arc, wits in zip(self.arcs, self.witnesses):
            if len(arc.vertices) != len(wits):
                raise ValueError("each arc vertex needs its witness")

    @property
    def empty_irreducible(self):
        return not self.arcs

    def graph(self) -> EmbeddedGraph:
        edges = tuple(self.arcs) + (self.reducible_line,)
        labels = tuple("irreducible-arc" for _ in self.arcs) + ("reducible-line",)
        return EmbeddedGraph(edges, labels)


def _random_seed_images(rng, count):
    vecs = rng.normal(size=(count, 4))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return [tuple(v) for v in vecs]


class _Chain:
    """One continuation chain: witnesses with an unwrapped beta track."""

    def __init__(self, witness):
        self.alphas = [witness.alpha]
        self.betas_unwrapped = [witness.beta]
        self.witnesses = [witness]

    def predict(self, alpha):
        if len(self.alphas) == 1:
            return self.witnesses[-1].images
        # linear extrapolation of the packed coordinates
        v1 = _pack(self.witnesses[-1].images)
        v0 = _pack(self.witnesses[-2].images)
        a1, a0 = self.alphas[-1], self.alphas[-2]
        if a1 == a0:
            return self.witnesses[-1].images
        t = (alpha - a1) / (a1 - a0)
        return _unpack(v1 + t * (v1 - v0))

    def extend(self, witness):
        prev = self.betas_unwrapped[-1]
        lift = prev + (np.mod(witness.beta - prev + np.pi, TWO_PI) - np.pi)
        self.alphas.append(witness.alpha)
        self.betas_unwrapped.append(float(lift))
        self.witnesses.append(witness)

    def matches(self, witness, beta_tol, image_tol=0.5):
        """Same branch: close in beta AND in the gauge-fixed generator images.

        Distinct branches can share the whole (alpha, beta) line (for torus
        knots the longitude is a central element times a meridian power on
        every branch), so the images must be compared too.
        """
        prev = self.betas_unwrapped[-1]
        d = abs(np.mod(witness.beta - prev + np.pi, TWO_PI) - np.pi)
        if d > beta_tol:
            return False
        last = self.witnesses[-1].images
        img_d = max(su2.qdist(a, b) for a, b in zip(witness.images, last))
        return img_d <= image_tol


def sample_image_curve(spec: KnotSpec, n_samples=None, rng=None, rep_tol=REP_TOL,
                       random_restarts=4, broken_restarts=32,
                       refine_endpoints=True):
    """Trace the pillowcase image of the SU(2) representation variety.

    Sweeps the meridian angle, continues solutions into arcs by
    predictor-corrector, discovers new arcs from random seeds, and always
    includes the reducible line {beta = 0}.  The unknot yields only the
    reducible line (its group is abelian, so the longitude maps to the
    identity).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    reducible = CylinderCurve(
        np.stack([np.linspace(0.0, math.pi, 128), np.zeros(128)], axis=-1))
    if spec.kind == "unknot":
        return ImageCurve((), (), reducible)

    group = knot_group(spec)
    if n_samples is None:
        slope = abs(spec.p * spec.q) if spec.kind == "torus" else 8
        n_samples = max(192, int(math.ceil(math.pi * math.hypot(1.0, slope) / 0.09)))
    alphas = np.linspace(CORNER_MARGIN, math.pi - CORNER_MARGIN, n_samples)
    beta_tol = 3.0 * (alphas[1] - alphas[0]) * (abs(spec.p * spec.q) + 2.0) \
        if spec.kind == "torus" else 0.3

    chains, done_chains, gaps = [], [], []
    for alpha in alphas:
        found = []

        def try_solve(seed):
            try:
                w = solve_rep_at_angle(group, float(alpha), seed, rep_tol)
            except NoConvergence:
                return None
            if not w.is_irreducible():
                return None
            for other in found:
                if su2.qdist(other.images[0], w.images[0]) < 1e-6 and \
                   su2.qdist(other.images[-1], w.images[-1]) < 1e-6:
                    return None
            found.append(w)
            return w

        still_active = []
        for chain in chains:
            w = try_solve(chain.predict(float(alpha)))
            matched = False
            if w is not None and chain.matches(w, beta_tol):
                chain.extend(w)
                still_active.append(chain)
                matched = True
            if not matched:
                for _ in range(broken_restarts):
                    seeds = _random_seed_images(rng, group.generators)
                    w = try_solve(tuple(seeds))
                    if w is not None and chain.matches(w, beta_tol):
                        chain.extend(w)
                        still_active.append(chain)
                        matched = True
                        break
            if not matched:
                gaps.append(float(alpha))
                done_chains.append(chain)
        chains = still_active

        for _ in range(random_restarts):
            seeds = _random_seed_images(rng, group.generators)
            w = try_solve(tuple(seeds))
            if w is not None and not any(c.witnesses[-1] is w for c in chains):
                if not any(c.matches(w, beta_tol) and abs(c.alphas[-1] - alpha) < 1e-12
                           for c in chains):
                    chains.append(_Chain(w))
    done_chains.extend(chains)

    arcs, witnesses = [], []
    for chain in done_chains:
        if len(chain.witnesses) < 3:
            continue
        if refine_endpoints:
            _refine_chain_endpoints(group, chain, rep_tol)
        verts = np.stack([np.array(chain.alphas),
                          np.mod(np.array(chain.betas_unwrapped), TWO_PI)], axis=-1)
        arcs.append(CylinderCurve(verts, max_edge=float("inf")))
        witnesses.append(tuple(chain.witnesses))
    return ImageCurve(tuple(arcs), tuple(witnesses), reducible, tuple(gaps))


def _refine_chain_endpoints(group, chain, rep_tol):
    """Secant-refine each chain end to the reducible line (beta = 0 mod 2pi)."""
    for end in (0, -1):
        alphas = chain.alphas
        betas = chain.betas_unwrapped
        if len(alphas) < 2:
            return
        if end == 0:
            a1, a0 = alphas[0], alphas[1]
            b1, b0 = betas[0], betas[1]
        else:
            a1, a0 = alphas[-1], alphas[-2]
            b1, b0 = betas[-1], betas[-2]
        target = TWO_PI * round(b1 / TWO_PI)
        slope = (b1 - b0) / (a1 - a0)
        if abs(slope) < 1e-9:
            continue
        alpha_star = a1 + (target - b1) / slope
        if not (0.0 < alpha_star < math.pi):
            continue
        witness = None
        seed = chain.witnesses[end].images
        for _ in range(12):
            try:
                witness = solve_rep_at_angle(group, float(alpha_star), seed, rep_tol)
            except NoConvergence:
                witness = None
                break
            resid = np.mod(witness.beta - target + np.pi, TWO_PI) - np.pi
            if abs(resid) < 1e-9:
                break
            alpha_star -= resid / slope
            seed = witness.images
        if witness is None:
            continue
        if end == 0:
            chain.alphas.insert(0, float(alpha_star))
            chain.betas_unwrapped.insert(0, float(target))
            chain.witnesses.insert(0, witness)
        else:
            chain.alphas.append(float(alpha_star))
            chain.betas_unwrapped.append(float(target))
            chain.witnesses.append(witness)


def alexander_endpoint_angles(spec: KnotSpec):
    """Meridian angles where irreducible arcs can limit onto the reducibles.

    Evaluates the torus-knot Alexander polynomial through the product
    formula (t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1)), locates its
    unit-circle roots, and returns the angles a in (0, pi) with root e^{2ia}.
    """
    if spec.kind == "unknot":
        return []
    if spec.kind != "torus":
        raise ValueError("endpoint angles implemented for the torus knot family")
    p, q = abs(spec.p), abs(spec.q)
    num = _poly_mul(_cyclic_poly(p * q), [(-1.0, 0), (1.0, 1)])
    den = _poly_mul(_cyclic_poly(p), _cyclic_poly(q))
    coeffs = _poly_divide(num, den)
    roots = np.roots(coeffs[::-1])
    angles = []
    for root in roots:
        if abs(abs(root) - 1.0) > 1e-8:
            continue
        theta = float(np.angle(root)) % TWO_PI
        alpha = theta / 2.0
        if 1e-9 < alpha < math.pi - 1e-9:
            angles.append(alpha)
    return sorted(set(round(a, 12) for a in angles))


def _cyclic_poly(n):
    """Coefficient list of t^n - 1 as (coefficient, power) pairs."""
    return [(-1.0, 0), (1.0, n)]


def _poly_mul(a, b):
    deg = max(p for _, p in a) + max(p for _, p in b)
    out = np.zeros(deg + 1)
    for ca, pa in a:
        for cb, pb in b:
            out[pa + pb] += ca * cb
    return out


def _poly_divide(num, den):
    """Exact polynomial long division (num given as pairs, den as array)."""
    if isinstance(num, list):
        deg = max(p for _, p in num)
        arr = np.zeros(deg + 1)
        for c, p in num:
            arr[p] += c
        num = arr
    quotient, remainder = np.polydiv(num[::-1], den[::-1])
    if np.max(np.abs(remainder)) > 1e-9:
        raise ArithmeticError("polynomial division left a remainder")
    return quotient[::-1]


# ---------------------------------------------------------------------------
# boundary-condition slices

def solve_rep_on_slice(spec: KnotSpec, slice_curve: CylinderCurve, image=None,
                       rep_tol=REP_TOL, rng=None):
    """All intersections of the image curve with a slice, Newton-refined.

    Returns witnesses whose (alpha, beta) lies on the slice within 1e-8; the
    empty list is a legitimate outcome (the slice misses the image).
    """
    if image is None:
        image = sample_image_curve(spec, rng=rng, rep_tol=rep_tol)
    if spec.kind == "unknot":
        return []
    group = knot_group(spec)
    hits = []
    s_start, s_disp = slice_curve.edges()
    for arc, wits in zip(image.arcs, image.witnesses):
        verts = arc.vertices
        betas_unwrapped = _unwrap_betas(verts)
        for i in range(len(verts) - 1):
            a0, a1 = verts[i], verts[i + 1]
            seg_a = np.array([a1[0] - a0[0],
                              betas_unwrapped[i + 1] - betas_unwrapped[i]])
            for s0, sd in zip(s_start, s_disp):
                hit = _segment_intersection(a0[0], betas_unwrapped[i], seg_a, s0, sd)
                if hit is None:
                    continue
                t_arc, _ = hit
                alpha_guess = a0[0] + t_arc * seg_a[0]
                seed = wits[i].images
                witness = _refine_onto_slice(group, alpha_guess, seed, s0, sd, rep_tol)
                if witness is not None:
                    if not any(abs(witness.alpha - h.alpha) < 1e-7 and
                               su2.qdist(witness.images[0], h.images[0]) < 1e-6
                               for h in hits):
                        hits.append(witness)
    return hits


def _unwrap_betas(verts):
    betas = [float(verts[0, 1])]
    for i in range(1, len(verts)):
        d = np.mod(verts[i, 1] - verts[i - 1, 1] + np.pi, TWO_PI) - np.pi
        betas.append(betas[-1] + float(d))
    return betas


def _segment_intersection(ax, ay, ad, b0, bd):
    """Parameters (t, u) in [0,1]^2 with a + t ad = b + u bd, matching beta
    up to a 2*pi shift; None if the segments miss each other.

    The shift range is derived from the beta extents of both segments, so
    arcs living in an unwrapped lift can still be intersected.
    """
    det = ad[0] * bd[1] - ad[1] * bd[0]
    if abs(det) < 1e-14:
        return None
    lo = min(ay, ay + ad[1]) - max(b0[1], b0[1] + bd[1]) - 1.0
    hi = max(ay, ay + ad[1]) - min(b0[1], b0[1] + bd[1]) + 1.0
    for k in range(int(math.floor(lo / TWO_PI)), int(math.ceil(hi / TWO_PI)) + 1):
        shift = k * TWO_PI
        rx = b0[0] - ax
        ry = (b0[1] + shift) - ay
        t = (rx * bd[1] - ry * bd[0]) / det
        u = (rx * ad[1] - ry * ad[0]) / det
        if -1e-9 <= t <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
            return float(np.clip(t, 0, 1)), float(np.clip(u, 0, 1))
    return None


def _refine_onto_slice(group, alpha, seed, s0, sd, rep_tol):
    """Secant iteration along the arc until the witness lands on the slice line."""
    normal = np.array([-sd[1], sd[0]])
    nn = np.linalg.norm(normal)
    if nn < 1e-14:
        return None
    normal /= nn

    def signed_distance(w):
        d = np.array([w.alpha - s0[0],
                      np.mod(w.beta - s0[1] + np.pi, TWO_PI) - np.pi])
        return float(d @ normal)

    try:
        w = solve_rep_at_angle(group, float(alpha), seed, rep_tol)
    except NoConvergence:
        return None
    h = 1e-4
    for _ in range(40):
        dist = signed_distance(w)
        if abs(dist) < 1e-9:
            return w
        try:
            w_h = solve_rep_at_angle(group, w.alpha + h, w.images, rep_tol)
        except NoConvergence:
            return None
        slope = (signed_distance(w_h) - dist) / h
        if abs(slope) < 1e-12:
            return None
        alpha_next = w.alpha - dist / slope
        if not (0.0 < alpha_next < math.pi):
            return None
        try:
            w = solve_rep_at_angle(group, float(alpha_next), w.images, rep_tol)
        except NoConvergence:
            return None
    return None


# ---------------------------------------------------------------------------
# splicing

@dataclass(frozen=True)
class SplicePresentation:
    """Presentation of the union of two knot exteriors glued by the swap map."""

    generators: int
    relators: tuple
    factor_slices: tuple        # index ranges of the two factor generator blocks
    factor_groups: tuple
    meridians: tuple            # meridian words of both factors, reindexed
    longitudes: tuple

    def factor_words(self, which):
        return self.meridians[which], self.longitudes[which]


def _shift_word(word, offset):
    return tuple(g + offset if g > 0 else g - offset for g in word)


def splice_presentation(spec_a: KnotSpec, spec_b: KnotSpec) -> SplicePresentation:
    """Disjoint union of the two knot groups plus the swap gluing relators
    m_a = l_b and l_a = m_b; verifies the result has trivial abelianization."""
    ga, gb = knot_group(spec_a), knot_group(spec_b)
    off = ga.generators
    relators = list(ga.relators)
    relators += [_shift_word(r, off) for r in gb.relators]
    mb = _shift_word(gb.meridian, off)
    lb = _shift_word(gb.longitude, off)
    relators.append(tuple(ga.meridian) + tuple(-g for g in reversed(lb)))
    relators.append(tuple(ga.longitude) + tuple(-g for g in reversed(mb)))
    total = ga.generators + gb.generators
    rows = [_exponent_sum(r, total) for r in relators]
    divisors, _ = smith_normal_form(rows, total)
    if any(d != 1 for d in divisors) or len(divisors) != total:
        raise AbelianizationNontrivial(
            f"splice presentation has nontrivial first homology (divisors {divisors})"
        )
    return SplicePresentation(
        generators=total,
        relators=tuple(relators),
        factor_slices=((0, ga.generators), (ga.generators, total)),
        factor_groups=(ga, gb),
        meridians=(ga.meridian, mb),
        longitudes=(ga.longitude, lb),
    )


def _corner_margin(image: ImageCurve):
    lo = math.pi
    for arc in image.arcs:
        lo = min(lo, float(np.min(arc.vertices[:, 0])))
    step = math.pi / 256
    return max(lo - step, CORNER_MARGIN)


def find_splice_rep(spec_a: KnotSpec, spec_b: KnotSpec, rng=None, rep_tol=REP_TOL):
    """Construct an irreducible representation of the spliced homology sphere.

    Intersects the image curve of the first knot with the coordinate swap of
    the second knot's curve (both lifted to the torus with their involution
    images), solves both factor representations at the common boundary value,
    aligns the maximal-torus gauges (resolving the +/- lift by residual), and
    polishes the assembled assignment on the full splice presentation.
    """
    pres = splice_presentation(spec_a, spec_b)
    image_a = sample_image_curve(spec_a, rng=rng, rep_tol=rep_tol)
    image_b = sample_image_curve(spec_b, rng=rng, rep_tol=rep_tol)
    if image_a.empty_irreducible or image_b.empty_irreducible:
        raise NoIntersection("a factor has no irreducible arcs (is it the unknot?)")
    delta_a = _corner_margin(image_a)
    delta_b = _corner_margin(image_b)

    segs_a = _torus_lift_segments(image_a)
    segs_b = _torus_lift_segments(image_b, swap=True)
    candidates = []
    for (a0, ad, wit_a, sa) in segs_a:
        for (b0, bd, wit_b, sb) in segs_b:
            hit = _segment_intersection(a0[0], a0[1], ad, b0, bd)
            if hit is None:
                continue
            t, u = hit
            pt = np.array([a0[0] + t * ad[0], a0[1] + t * ad[1]])
            alpha_a = min(pt[0] % TWO_PI, TWO_PI - pt[0] % TWO_PI)
            alpha_b = min(pt[1] % TWO_PI, TWO_PI - pt[1] % TWO_PI)
            if not (delta_a <= alpha_a <= math.pi - delta_a):
                continue
            if not (delta_b <= alpha_b <= math.pi - delta_b):
                continue
            candidates.append((pt, wit_a, wit_b))
    if not candidates:
        raise NoIntersection(
            "no crossing of the two image curves found",
            diagnostics={"arcs_a": len(image_a.arcs), "arcs_b": len(image_b.arcs),
                         "delta_a": delta_a, "delta_b": delta_b},
        )
    candidates.sort(key=lambda c: (abs(c[0][0] - math.pi / 2), c[0][0], c[0][1]))
    pt, wit_a, wit_b = candidates[0]

    images = _assemble_splice_images(pres, pt, wit_a, wit_b, rep_tol)
    residual = assignment_residual(images, pres.relators)
    m_img = su2.eval_word(images, pres.meridians[0])
    l_img = su2.eval_word(images, pres.longitudes[0])
    assignment = RepAssignment(images=images, residual=residual,
                               alpha=su2.diagonal_angle(m_img) % TWO_PI,
                               beta=su2.diagonal_angle(l_img) % TWO_PI)
    if residual > rep_tol:
        raise NoIntersection(
            f"assembled splice representation has residual {residual:.2e}",
            diagnostics={"point": tuple(pt)},
        )
    return assignment, pres


def _torus_lift_segments(image: ImageCurve, swap=False):
    """Arc segments lifted to the torus, including the involution images.

    Yields (start, displacement, witness_at_start, sign) with sign = +1 for
    the canonical lift and -1 for its involution image; ``swap`` exchanges
    the two coordinates (the splice gluing on the boundary pillowcase)."""
    out = []
    for arc, wits in zip(image.arcs, image.witnesses):
        verts = arc.vertices
        betas = _unwrap_betas(verts)
        for i in range(len(verts) - 1):
            for sign in (1.0, -1.0):
                a = np.array([verts[i][0], betas[i]])
                b = np.array([verts[i + 1][0], betas[i + 1]])
                pa, pb = sign * a, sign * b
                if swap:
                    pa, pb = pa[::-1], pb[::-1]
                out.append((np.mod(pa, TWO_PI), pb - pa, wits[i], sign))
    return out


def _assemble_splice_images(pres: SplicePresentation, pt, wit_a, wit_b, rep_tol):
    """Solve both factors at the crossing point, align gauges, polish jointly."""
    ga, gb = pres.factor_groups
    alpha_t, beta_t = float(pt[0]), float(pt[1])

    img_a = _solve_factor_at(ga, alpha_t, beta_t, wit_a.images, rep_tol)
    # the second factor sees the swapped coordinates: meridian angle beta_t,
    # longitude angle alpha_t
    img_b = _solve_factor_at(gb, beta_t, alpha_t, wit_b.images, rep_tol)

    images = tuple(img_a) + tuple(img_b)
    vec = _pack(images)

    def residual(v):
        imgs = _unpack(v)
        out = []
        for rel in pres.relators:
            q = su2.eval_word(imgs, rel)
            out.extend((q[0] - 1.0, q[1], q[2], q[3]))
        m = su2.eval_word(imgs, pres.meridians[0])
        out.extend((m[1], m[2]))
        for q in imgs:
            out.append(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2 - 1.0)
        if len(imgs) >= 2:
            out.append(imgs[1][2])
        return np.array(out)

    polished = _gauss_newton(residual, vec, tol=1e-13, max_iter=80)
    if polished is None:
        return images
    return tuple(su2.qnormalize(q) for q in _unpack(polished))


def _solve_factor_at(group, alpha_target, beta_target, seed, rep_tol):
    """Factor representation with peripheral pair at prescribed diagonal angles.

    The meridian angle is pinned modulo the involution; of the two lifts the
    one whose longitude angle matches ``beta_target`` (mod 2*pi) is kept.
    """
    alpha_canonical = alpha_target % TWO_PI
    flip_needed = alpha_canonical > math.pi
    if flip_needed:
        alpha_canonical = TWO_PI - alpha_canonical
    w = solve_rep_at_angle(group, alpha_canonical, seed, rep_tol)
    images = w.images
    beta = w.beta
    if flip_needed:
        flip = (0.0, 0.0, 1.0, 0.0)  # conjugation by j negates both angles
        images = tuple(su2.conjugate_by(flip, q) for q in images)
        beta = (-beta) % TWO_PI
    # residual +/- ambiguity: if the longitude angle is off by a sign, flip both
    err_direct = abs(np.mod(beta - beta_target + np.pi, TWO_PI) - np.pi)
    err_flipped = abs(np.mod(-beta - beta_target + np.pi, TWO_PI) - np.pi)
    if err_flipped < err_direct:
        flip = (0.0, 0.0, 1.0, 0.0)
        images = tuple(su2.conjugate_by(flip, q) for q in images)
    return images
