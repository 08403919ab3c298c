"""Characteristic-p formal calculus on finitely supported Laurent polynomials.

Coefficients live in any space implementing ``CoefficientSpace`` (scalars via
``PrimeField``, Fock vectors, matrices). Identities involving genuinely
infinite series, such as the formal delta function, are checked on finite
exponent windows with binomials expanded in nonnegative powers of the second
summand.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Generic, Protocol, TypeVar

from modvoa_core.field import PrimeField, binom_any, binom_mod_p, sign

logger = logging.getLogger(__name__)

V = TypeVar("V")


class CoefficientSpace(Protocol[V]):
    """A GF(p)-linear space usable as Laurent coefficients."""

    @property
    def p(self) -> int: ...

    def zero(self) -> V: ...

    def add(self, a: V, b: V) -> V: ...

    def scale(self, c: int, v: V) -> V: ...

    def is_zero(self, v: V) -> bool: ...


@dataclass(frozen=True)
class Window:
    """Inclusive integer range ``lo..hi``."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @classmethod
    def symmetric(cls, radius: int) -> Window:
        return cls(-radius, radius)

    def __contains__(self, e: object) -> bool:
        return isinstance(e, int) and self.lo <= e <= self.hi

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def shift(self, k: int) -> Window:
        return Window(self.lo + k, self.hi + k)


@dataclass(frozen=True)
class LaurentPoly(Generic[V]):
    """A finitely supported Laurent polynomial sum_e c_e x^e.

    ``terms`` never stores a zero coefficient; build instances through
    ``from_terms`` or the arithmetic methods to keep that form.
    """

    space: CoefficientSpace[V]
    terms: Mapping[int, V] = field(default_factory=dict)

    @classmethod
    def from_terms(cls, space: CoefficientSpace[V], terms: Mapping[int, V]) -> LaurentPoly[V]:
        return cls(space, {e: c for e, c in sorted(terms.items()) if not space.is_zero(c)})

    @classmethod
    def monomial(cls, space: CoefficientSpace[V], e: int, c: V) -> LaurentPoly[V]:
        return cls.from_terms(space, {e: c})

    @property
    def p(self) -> int:
        return self.space.p

    def coeff(self, e: int) -> V:
        return self.terms.get(e, self.space.zero())

    def support(self) -> list[int]:
        return sorted(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: LaurentPoly[V]) -> LaurentPoly[V]:
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = self.space.add(merged[e], c) if e in merged else c
        return LaurentPoly.from_terms(self.space, merged)

    def __sub__(self, other: LaurentPoly[V]) -> LaurentPoly[V]:
        return self + other.scale(-1)

    def scale(self, c: int) -> LaurentPoly[V]:
        return LaurentPoly.from_terms(
            self.space, {e: self.space.scale(c, v) for e, v in self.terms.items()}
        )

    def truncate(self, window: Window) -> LaurentPoly[V]:
        return LaurentPoly(self.space, {e: c for e, c in self.terms.items() if e in window})

    def items(self) -> list[tuple[int, V]]:
        return sorted(self.terms.items())


def hasse_derive(k: int, f: LaurentPoly[V]) -> LaurentPoly[V]:
    """The k-th Hasse derivative: x^m -> C(m, k) x^(m-k), termwise."""
    if k < 0:
        raise ValueError(f"Hasse derivative order must be nonnegative, got {k}")
    if k == 0:
        return f
    out: dict[int, V] = {}
    for m, c in f.terms.items():
        b = binom_any(m, k, f.p)
        if b:
            out[m - k] = f.space.scale(b, c)
    return LaurentPoly.from_terms(f.space, out)


def multiply(f: LaurentPoly[int], g: LaurentPoly[int]) -> LaurentPoly[int]:
    """Product of two scalar Laurent polynomials."""
    p = f.p
    out: dict[int, int] = {}
    for a, c in f.terms.items():
        for b, d in g.terms.items():
            out[a + b] = (out.get(a + b, 0) + c * d) % p
    return LaurentPoly.from_terms(f.space, out)


Bivariate = dict[tuple[int, int], V]


def taylor_shift(f: LaurentPoly[V], depth: int, window: Window | None = None) -> Bivariate[V]:
    """Coefficients of x^a z^b in f(x + z) = sum_k z^k d^(k) f, for 0 <= b <= depth.

    Negative powers are expanded in nonnegative powers of z. Only ``a`` in
    ``window`` is kept when a window is given.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    out: Bivariate[V] = {}
    for b in range(depth + 1):
        for a, c in hasse_derive(b, f).terms.items():
            if window is None or a in window:
                out[(a, b)] = c
    return out


def verify_hasse_composition(m: int, n: int, window: Window, p: int) -> bool:
    """Check d^(m) d^(n) = C(m+n, m) d^(m+n) on every x^e with e in ``window``."""
    scalars = PrimeField(p)
    factor = binom_mod_p(m + n, m, p)
    for e in window:
        x_e = LaurentPoly.monomial(scalars, e, 1)
        lhs = hasse_derive(m, hasse_derive(n, x_e))
        rhs = hasse_derive(m + n, x_e).scale(factor)
        if lhs.terms != rhs.terms:
            logger.debug("Hasse composition fails for m=%d n=%d on x^%d", m, n, e)
            return False
    return True


def verify_shift_composition(f: LaurentPoly[int], depth: int) -> bool:
    """Shifting by z1 and then by z2 agrees with one shift by z1 + z2.

    Compared on all coefficients x^a z1^i z2^j with i + j <= depth.
    """
    scalars = PrimeField(f.p)
    stepwise: dict[tuple[int, int, int], int] = {}
    for (a1, i), c1 in taylor_shift(f, depth).items():
        inner = LaurentPoly.monomial(scalars, a1, c1)
        for (a, j), c in taylor_shift(inner, depth - i).items():
            stepwise[(a, i, j)] = (stepwise.get((a, i, j), 0) + c) % f.p
    combined: dict[tuple[int, int, int], int] = {}
    for (a, k), c in taylor_shift(f, depth).items():
        for i in range(k + 1):
            value = (c * binom_mod_p(k, i, f.p)) % f.p
            combined[(a, i, k - i)] = (combined.get((a, i, k - i), 0) + value) % f.p
    return {k: v for k, v in stepwise.items() if v} == {k: v for k, v in combined.items() if v}


def binomial_expansion(
    e: int, first_sign: int, second_sign: int, depth: int, p: int
) -> dict[tuple[int, int], int]:
    """(s1*x + s2*y)^e expanded in nonnegative powers of y, up to y^depth.

    Keys are (exponent of x, exponent of y); signs are +1 or -1.
    """
    out: dict[tuple[int, int], int] = {}
    for j in range(depth + 1):
        c = binom_any(e, j, p)
        if first_sign < 0:
            c *= sign(e - j)
        if second_sign < 0:
            c *= sign(j)
        if c % p:
            out[(e - j, j)] = c % p
    return out


def verify_delta_identity(n: int, window: Window | int, p: int) -> bool:
    """Check the three expressions of d^(n)_{x2} x2^-1 delta(x1/x2) agree on a window.

    Compares, coefficient by coefficient on x1^a x2^b with a and b in the window,
    the x2-derivative of the delta function, the difference of the two binomial
    expansions of the (-n-1)-th power of x1 - x2, and (-1)^n times the
    x1-derivative.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    win = Window.symmetric(window) if isinstance(window, int) else window
    depth = 2 * max(abs(win.lo), abs(win.hi)) + n + 2

    def in_window(key: tuple[int, int]) -> bool:
        return key[0] in win and key[1] in win

    # x2^-1 delta(x1/x2) = sum_k x1^k x2^(-k-1)
    lhs: dict[tuple[int, int], int] = {}
    rhs: dict[tuple[int, int], int] = {}
    for a in win:
        b = -a - 1 - n
        if b not in win:
            continue
        left = binom_any(-a - 1, n, p)
        if left:
            lhs[(a, b)] = left
        right = (sign(n) * binom_any(a + n, n, p)) % p
        if right:
            rhs[(a, b)] = right

    middle: dict[tuple[int, int], int] = {}
    for key, c in binomial_expansion(-n - 1, 1, -1, depth, p).items():
        if in_window(key):
            middle[key] = c
    for (b, a), c in binomial_expansion(-n - 1, -1, 1, depth, p).items():
        if in_window((a, b)):
            middle[(a, b)] = (middle.get((a, b), 0) - c) % p
    middle = {k: v for k, v in middle.items() if v}

    agree = lhs == middle == rhs
    if not agree:
        logger.debug("delta identity fails for n=%d", n)
    return agree
