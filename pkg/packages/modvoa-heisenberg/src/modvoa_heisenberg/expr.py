"""Parser for the monomial grammar used on the command line.

    vector  := term ("+" term)*
    term    := [coeff "*"] monomial | coeff
    monomial:= "1" | factor (whitespace factor)*
    factor  := "u" gen "(-" depth ")" ["^" exponent]

``str(FockVector)`` prints in the same grammar, so parse(str(v)) == v.
"""

from __future__ import annotations

import re

from modvoa_heisenberg.fock import FockContext, FockMonomial, FockVector

_FACTOR = re.compile(r"u(\d+)\(-(\d+)\)(?:\^(\d+))?")
_COEFF = re.compile(r"(\d+)\s*\*")
_INT = re.compile(r"\d+")


class ExpressionSyntaxError(ValueError):
    """Raised for malformed expressions; ``position`` is the 0-based offset."""

    def __init__(self, message: str, text: str, position: int) -> None:
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


def _skip_spaces(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_term(ctx: FockContext, text: str, pos: int) -> tuple[FockMonomial, int, int]:
    coeff = 1
    match = _COEFF.match(text, pos)
    if match:
        coeff = int(match.group(1))
        pos = _skip_spaces(text, match.end())
    elif (bare := _INT.match(text, pos)) and not _FACTOR.match(text, pos):
        # a bare integer is a multiple of the vacuum
        return FockMonomial.vacuum(), int(bare.group(0)), bare.end()

    if text.startswith("1", pos) and not _INT.match(text, pos + 1):
        return FockMonomial.vacuum(), coeff, pos + 1

    exponents: dict[tuple[int, int], int] = {}
    while True:
        factor = _FACTOR.match(text, pos)
        if factor is None:
            break
        gen, depth = int(factor.group(1)), int(factor.group(2))
        e = int(factor.group(3)) if factor.group(3) else 1
        if not 1 <= gen <= ctx.d:
            raise ExpressionSyntaxError(f"generator u{gen} outside 1..{ctx.d}", text, pos)
        if depth < 1:
            raise ExpressionSyntaxError("modes must have depth >= 1", text, pos)
        exponents[(gen, depth)] = exponents.get((gen, depth), 0) + e
        pos = _skip_spaces(text, factor.end())
    if not exponents:
        raise ExpressionSyntaxError("expected a factor u<i>(-<n>) or 1", text, pos)
    return FockMonomial.from_exponents(exponents), coeff, pos


def parse_vector(ctx: FockContext, text: str) -> FockVector:
    """Parse ``text`` into a vector of V(l, 0) for the generators of ``ctx``."""
    terms: dict[FockMonomial, int] = {}
    pos = _skip_spaces(text, 0)
    if pos == len(text):
        raise ExpressionSyntaxError("empty expression", text, pos)
    if text[pos:].strip() == "0":
        return FockVector.zero(ctx.p)
    while True:
        monomial, coeff, pos = _parse_term(ctx, text, pos)
        terms[monomial] = terms.get(monomial, 0) + coeff
        pos = _skip_spaces(text, pos)
        if pos == len(text):
            break
        if text[pos] != "+":
            raise ExpressionSyntaxError(f"unexpected {text[pos]!r}", text, pos)
        pos = _skip_spaces(text, pos + 1)
        if pos == len(text):
            raise ExpressionSyntaxError("dangling '+'", text, pos)
    return FockVector.from_terms(ctx.p, terms)


def parse_monomial(ctx: FockContext, text: str) -> FockMonomial:
    """Parse a single monomial with coefficient 1."""
    vector = parse_vector(ctx, text)
    if len(vector.terms) != 1 or next(iter(vector.terms.values())) != 1:
        raise ExpressionSyntaxError("expected a single monomial", text, 0)
    return next(iter(vector.terms))
