"""Exact SL(2, Z/p) word evaluation and non-abelian representation certificates.

A certificate for a finitely presented group is a prime p together with one
matrix per generator such that every relator evaluates to the identity and
some pair of generator images fails to commute.  Verification is a handful
of exact modular matrix products, linear in the total relator length;
searching is either exhaustive (two generators, first image restricted to
conjugacy-class representatives) or randomized with a trial cap.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import IndexOutOfRange, SearchSpaceTooLarge

MAX_PRIME_BITS = 64
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin for moduli below 2^64."""
    if n < 2 or n >= 1 << MAX_PRIME_BITS:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == small:
            return True
        if n % small == 0:
            return False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class ModMatrix:
    """2x2 matrix over Z/p with determinant 1."""

    a: int
    b: int
    c: int
    d: int
    p: int

    def __post_init__(self):
        p = self.p
        object.__setattr__(self, "a", self.a % p)
        object.__setattr__(self, "b", self.b % p)
        object.__setattr__(self, "c", self.c % p)
        object.__setattr__(self, "d", self.d % p)
        if (self.a * self.d - self.b * self.c) % p != 1:
            raise ValueError(f"matrix {self.entries()} has determinant != 1 mod {p}")

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, other):
        p = self.p
        return ModMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            p,
        )

    def inverse(self):
        """Adjugate inverse; valid exactly because the determinant is 1."""
        return ModMatrix(self.d, -self.b, -self.c, self.a, self.p)

    def is_identity(self):
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1

    def is_central(self):
        return self.b == 0 and self.c == 0 and self.a == self.d

    def commutes_with(self, other):
        return (self * other).entries() == (other * self).entries()

    @classmethod
    def identity(cls, p):
        return cls(1, 0, 0, 1, p)


def eval_word(images, word):
    """Left-to-right product over signed 1-based generator indices."""
    if not images:
        raise IndexOutOfRange("no generator images supplied")
    out = ModMatrix.identity(images[0].p)
    n = len(images)
    for idx in word:
        if idx == 0 or abs(idx) > n:
            raise IndexOutOfRange(f"index {idx} out of range for {n} generators")
        m = images[abs(idx) - 1]
        out = out * (m if idx > 0 else m.inverse())
    return out


@dataclass(frozen=True)
class GroupPresentation:
    """Bare presentation: generator count and relator words (signed indices)."""

    generators: int
    relators: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(tuple(r) for r in self.relators))
        for rel in self.relators:
            for g in rel:
                if g == 0 or abs(g) > self.generators:
                    raise IndexOutOfRange(f"relator index {g} out of range")

    def total_length(self):
        return sum(len(r) for r in self.relators)


@dataclass(frozen=True)
class Certificate:
    presentation_id: str
    p: int
    images: tuple  # one (a, b, c, d) tuple per generator

    def matrices(self):
        return [ModMatrix(*e, self.p) for e in self.images]


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    reason: str
    runtime_seconds: float
    relator_length: int

    def __bool__(self):
        return self.accepted


def verify_certificate(pres: GroupPresentation, cert: Certificate) -> VerifyResult:
    """Accept iff p is prime, all images have determinant 1, every relator
    evaluates to the identity, and some pair of generator images does not
    commute.  Total function: every failure mode is a Reject reason."""
    start = time.perf_counter()

    def reject(reason):
        return VerifyResult(False, reason, time.perf_counter() - start,
                            pres.total_length())

    if not is_prime(cert.p):
        return reject(f"modulus {cert.p} is not a prime below 2^{MAX_PRIME_BITS}")
    if len(cert.images) != pres.generators:
        return reject("wrong number of generator images")
    p = cert.p
    images = []
    for i, entries in enumerate(cert.images):
        a, b, c, d = (int(x) % p for x in entries)
        if (a * d - b * c) % p != 1:
            return reject(f"image of generator {i + 1} has determinant != 1")
        images.append(ModMatrix(a, b, c, d, p))
    for k, rel in enumerate(pres.relators):
        try:
            value = eval_word(images, rel)
        except IndexOutOfRange as exc:
            return reject(str(exc))
        if not value.is_identity():
            return reject(f"relation {k + 1} fails")
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            if not images[i].commutes_with(images[j]):
                return VerifyResult(True, "", time.perf_counter() - start,
                                    pres.total_length())
    return reject("no non-commuting pair of generator images")


def _smallest_nonresidue(p):
    squares = {(x * x) % p for x in range(1, p)}
    for v in range(2, p):
        if v not in squares:
            return v
    raise ArithmeticError(f"no quadratic non-residue mod {p}")


def _all_sl2(p):
    for a in range(p):
        for b in range(p):
            for c in range(p):
                rest = (1 + b * c) % p
                if a == 0:
                    if rest != 0:
                        continue
                    for d in range(p):
                        yield ModMatrix(0, b, c, d, p)
                    continue
                d = (rest * pow(a, p - 2, p)) % p
                yield ModMatrix(a, b, c, d, p)


def conjugacy_class_representatives(p):
    """One representative per non-central SL(2, Z/p) conjugacy class.

    Companion matrices cover every class of trace != +/-2 (their centralizers
    contain all determinants, so GL-classes do not split in SL); the
    trace +/-2 non-central classes split into two, distinguished by whether
    the off-diagonal entry is a square.  For p < 5 the class bookkeeping is
    not worth it and all non-central elements are returned.
    """
    if p < 5:
        return [m for m in _all_sl2(p) if not m.is_central()]
    reps = []
    for t in range(p):
        if t == 2 % p or t == (p - 2) % p:
            continue
        reps.append(ModMatrix(0, p - 1, 1, t, p))
    nu = _smallest_nonresidue(p)
    reps.append(ModMatrix(1, 1, 0, 1, p))
    reps.append(ModMatrix(1, nu, 0, 1, p))
    reps.append(ModMatrix(p - 1, 1, 0, p - 1, p))
    reps.append(ModMatrix(p - 1, nu, 0, p - 1, p))
    return reps


def _random_sl2(rng, p):
    """Uniform over SL(2, Z/p): sample a nonzero first row, then the p-element
    coset of valid second rows."""
    while True:
        a = int(rng.integers(0, p))
        b = int(rng.integers(0, p))
        if a or b:
            break
    if b != 0:
        d = int(rng.integers(0, p))
        c = ((a * d - 1) * pow(b, p - 2, p)) % p
    else:
        d = pow(a, p - 2, p)
        c = int(rng.integers(0, p))
    return ModMatrix(a, b, c, d, p)


@dataclass(frozen=True)
class SearchReport:
    certificate: Certificate | None
    mode: str
    assignments_tried: int
    primes_tried: tuple


def search_certificate(pres: GroupPresentation, primes, mode="auto", rng=None,
                       exhaustive_cap=10**7, randomized_cap=10**7):
    """Search the given primes for an accepting certificate.

    Exhaustive mode (two generators at most) enumerates conjugacy-reduced
    assignments: the first image runs over class representatives only, which
    is sound because acceptance is conjugation-invariant.  Randomized mode
    draws uniform assignments up to a trial cap.  Returns a SearchReport
    whose certificate is None when nothing was found.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    primes = [int(p) for p in primes]
    tried = 0
    for p in primes:
        if not is_prime(p):
            continue
        use_exhaustive = mode == "exhaustive" or (mode == "auto" and pres.generators <= 2)
        if use_exhaustive and pres.generators <= 2:
            order = p * (p * p - 1)
            reps = conjugacy_class_representatives(p)
            space = len(reps) * (order if pres.generators == 2 else 1)
            if space > exhaustive_cap:
                raise SearchSpaceTooLarge(
                    f"exhaustive search at p={p} needs {space} assignments "
                    f"(cap {exhaustive_cap})"
                )
            found, count = _exhaustive_search(pres, p, reps)
            tried += count
            if found is not None:
                return SearchReport(found, "exhaustive", tried, tuple(primes))
        else:
            found, count = _randomized_search(pres, p, rng, randomized_cap)
            tried += count
            if found is not None:
                return SearchReport(found, "randomized", tried, tuple(primes))
    return SearchReport(None, mode, tried, tuple(primes))


def _accepts(pres, images):
    for rel in pres.relators:
        if not eval_word(images, rel).is_identity():
            return False
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            if not images[i].commutes_with(images[j]):
                return True
    return False


def _exhaustive_search(pres, p, reps):
    count = 0
    if pres.generators == 1:
        # a single generator always has abelian image
        return None, 0
    for first in reps:
        for second in _all_sl2(p):
            count += 1
            images = [first, second]
            if _accepts(pres, images):
                cert = Certificate(pres.name or "presentation", p,
                                   tuple(m.entries() for m in images))
                return cert, count
    return None, count


def _randomized_search(pres, p, rng, cap):
    if pres.generators == 1:
        return None, 0
    for count in range(1, cap + 1):
        images = [_random_sl2(rng, p) for _ in range(pres.generators)]
        if _accepts(pres, images):
            cert = Certificate(pres.name or "presentation", p,
                               tuple(m.entries() for m in images))
            return cert, count
    return None, cap
