"""The ideal J(l, lambda) of V(l, 0) and the simple quotients L(l, 0, lambda).

J is generated by (u_i(-m)^p - lambda_(i,m)^p) vacuum for all m >= 1 and by
(u_i(-n) - lambda_(i,n)) vacuum for p | n. Positive modes kill both families,
so J is the ideal of the polynomial ring S(h_+) they generate and membership
is decided by reducing x^p -> lambda^p and x -> lambda (for p | n).
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from modvoa_core.field import FpMatrix, binom_mod_p, sign, span_closure
from modvoa_core.formal import Window
from modvoa_heisenberg.fock import (
    FockAction,
    FockContext,
    FockMonomial,
    FockVector,
    Mode,
    act_D,
    act_mode,
    basis,
    product_nth,
    virasoro_mode,
)
from modvoa_heisenberg.report import CheckResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LambdaSpec:
    """The characters (lambda0, lambda) of a Heisenberg module or quotient.

    ``entries`` holds (gen, depth, value) with nonzero value, sorted; any
    (gen, depth) not listed has lambda = 0.
    """

    d: int
    entries: tuple[tuple[int, int, int], ...] = ()
    lambda0: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(g < 1 or g > self.d or n < 1 for g, n, _ in self.entries):
            raise ValueError(f"lambda entries must have 1 <= gen <= {self.d} and depth >= 1")
        keys = [(g, n) for g, n, _ in self.entries]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate lambda entries")
        object.__setattr__(
            self, "entries", tuple(sorted((g, n, v) for g, n, v in self.entries if v))
        )
        if not self.lambda0:
            object.__setattr__(self, "lambda0", (0,) * self.d)
        elif len(self.lambda0) != self.d:
            raise ValueError(f"lambda0 needs {self.d} entries")

    @classmethod
    def zero(cls, d: int) -> LambdaSpec:
        return cls(d)

    @classmethod
    def from_entries(
        cls,
        d: int,
        values: Mapping[tuple[int, int], int],
        p: int,
        lambda0: Sequence[int] | None = None,
    ) -> LambdaSpec:
        """Build from {(gen, depth): value}, reducing mod p."""
        return cls(
            d,
            tuple((g, n, v % p) for (g, n), v in values.items()),
            tuple(x % p for x in lambda0) if lambda0 else (),
        )

    def value(self, gen: int, depth: int) -> int:
        for g, n, v in self.entries:
            if g == gen and n == depth:
                return v
        return 0

    def zero_mode(self, gen: int) -> int:
        return self.lambda0[gen - 1]

    @property
    def in_Lambda(self) -> bool:  # noqa: N802
        """True iff lambda vanishes at every depth >= 2."""
        return all(n == 1 for _, n, _ in self.entries)

    @property
    def max_depth(self) -> int:
        return max((n for _, n, _ in self.entries), default=1)

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(g, n): v for g, n, v in self.entries}


# ---------------------------------------------------------------------------
# Generators and normal form
# ---------------------------------------------------------------------------


def ideal_generators(ctx: FockContext, lam: LambdaSpec, max_depth: int) -> list[FockVector]:
    """Generators of J(l, lambda) with depth <= max_depth, generator by generator."""
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    p = ctx.p
    vac = FockVector.vacuum(p)
    out: list[FockVector] = []
    for i in ctx.generators():
        for m in range(1, max_depth + 1):
            power = FockVector.monomial(p, FockMonomial(((m, i, p),)))
            out.append(power - vac.scale(pow(lam.value(i, m), p, p)))
        for n in range(p, max_depth + 1, p):
            out.append(FockVector.generator(p, i, n) - vac.scale(lam.value(i, n)))
    return out


def _normal_monomial(p: int, lam: LambdaSpec, m: FockMonomial) -> tuple[FockMonomial, int]:
    coeff = 1
    kept: list[tuple[int, int, int]] = []
    for n, g, e in m.factors:
        value = lam.value(g, n)
        if n % p == 0:
            coeff = coeff * pow(value, e, p) % p
            continue
        q, r = divmod(e, p)
        coeff = coeff * pow(value, p * q, p) % p
        if r:
            kept.append((n, g, r))
    return FockMonomial(tuple(kept)), coeff


def normal_form(ctx: FockContext, lam: LambdaSpec, v: FockVector) -> FockVector:
    """The representative of v + J on monomials with p-free depths and exponents < p."""
    acc: dict[FockMonomial, int] = defaultdict(int)
    for m, c in v.terms.items():
        reduced, coeff = _normal_monomial(ctx.p, lam, m)
        if coeff:
            acc[reduced] += c * coeff
    return FockVector.from_terms(ctx.p, acc)


def in_ideal(ctx: FockContext, lam: LambdaSpec, v: FockVector) -> bool:
    return normal_form(ctx, lam, v).is_zero()


def is_quotient_monomial(p: int, m: FockMonomial) -> bool:
    return all(n % p and e <= p - 1 for n, _, e in m.factors)


def quotient_basis(ctx: FockContext, max_weight: int) -> list[FockMonomial]:
    """Quotient-basis monomials of weight <= max_weight."""
    return [m for m in basis(ctx, max_weight) if is_quotient_monomial(ctx.p, m)]


def quotient_basis_for_modes(p: int, pairs: Sequence[tuple[int, int]]) -> list[FockMonomial]:
    """prod x_(i,n)^k over ``pairs`` with 0 <= k < p, in lexicographic exponent order."""
    out = []
    for exps in itertools.product(range(p), repeat=len(pairs)):
        out.append(FockMonomial.from_exponents(dict(zip(pairs, exps, strict=True))))
    return out


# ---------------------------------------------------------------------------
# D-stability
# ---------------------------------------------------------------------------


def d_power_closed_form(ctx: FockContext, gen: int, n: int, k: int) -> FockVector:
    """D^(k) u(-n)^p vacuum: zero unless p | k, and C(n+r-1, r) u(-n-r)^p for k = rp."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    p = ctx.p
    if k % p:
        return FockVector.zero(p)
    r = k // p
    return FockVector.monomial(p, FockMonomial(((n + r, gen, p),)), binom_mod_p(n + r - 1, r, p))


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the D-stability search for J(l, lambda)."""

    stable: bool
    witness: FockVector | None = None
    generator: FockVector | None = None
    k: int | None = None

    def to_dict(self) -> dict[str, Any]:
        if self.stable:
            return {"stable": True}
        return {
            "stable": False,
            "generator": str(self.generator),
            "k": self.k,
            "witness": str(self.witness),
        }


def check_D_stability(  # noqa: N802
    ctx: FockContext,
    lam: LambdaSpec,
    max_k: int | None = None,
    max_depth: int | None = None,
) -> StabilityReport:
    """Search for D^(k) g outside J over generators g and 1 <= k <= max_k.

    The defaults reach the obstruction D^((n-1)p)(u(-1)^p - lambda_1^p) vacuum
    = u(-n)^p vacuum, whose normal form lambda_n^p is nonzero exactly when
    lambda is supported at depth n >= 2.
    """
    p = ctx.p
    depth = lam.max_depth
    max_k = max_k if max_k is not None else max(p, (depth - 1) * p)
    max_depth = max_depth if max_depth is not None else max(depth, p)
    for g in ideal_generators(ctx, lam, max_depth):
        for k in range(1, max_k + 1):
            image = act_D(ctx, k, g)
            if not in_ideal(ctx, lam, image):
                logger.debug("J not D-stable: D^(%d)(%s) = %s", k, g, image)
                return StabilityReport(False, image, g, k)
    return StabilityReport(True)


# ---------------------------------------------------------------------------
# The quotient as a module
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientAction:
    """V(l, 0) acting on L(l, 0, lambda) = V / J through normal forms.

    Only meaningful when J is an ideal, i.e. lambda lies in Lambda.
    """

    ctx: FockContext
    lam: LambdaSpec

    def reduce(self, w: FockVector) -> FockVector:
        return normal_form(self.ctx, self.lam, w)

    def mode(self, mode: Mode, w: FockVector) -> FockVector:
        return self.reduce(act_mode(self.ctx, mode, w))

    def derivation(self, k: int, w: FockVector) -> FockVector:
        return self.reduce(act_D(self.ctx, k, w))

    def vertex(self, u: FockVector, n: int, w: FockVector) -> FockVector:
        return self.reduce(product_nth(self.ctx, u, n, w))


def quotient_module_matrices(
    ctx: FockContext, lam: LambdaSpec, pairs: Sequence[tuple[int, int]]
) -> tuple[list[FockMonomial], dict[Mode, FpMatrix]]:
    """Matrices of u_i(+-n), (i, n) in ``pairs``, on the span of quotient monomials over pairs."""
    p = ctx.p
    monomials = quotient_basis_for_modes(p, pairs)
    index = {m: idx for idx, m in enumerate(monomials)}
    action = QuotientAction(ctx, lam)
    matrices: dict[Mode, FpMatrix] = {}
    for g, n in pairs:
        for mode in (Mode(g, -n), Mode(g, n)):
            entries = np.zeros((len(monomials), len(monomials)), dtype=np.int64)
            for col, m in enumerate(monomials):
                for image, c in action.mode(mode, FockVector.monomial(p, m)).terms.items():
                    entries[index[image], col] = c
            matrices[mode] = FpMatrix(entries, p)
    return monomials, matrices


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _vector_coordinates(v: FockVector, index: Mapping[FockMonomial, int]) -> list[int]:
    row = [0] * len(index)
    for m, c in v.terms.items():
        row[index[m]] = c
    return row


def ideal_span_oracle(ctx: FockContext, lam: LambdaSpec, max_weight: int) -> CheckResult:
    """J cut to weight <= N equals the kernel of normal_form there.

    J_N is spanned by m * g for monomials m and generators g whose top weight
    satisfies wt(m) + wt(g) <= N; the comparison is a rank computation over
    the full PBW basis of weight <= N.
    """
    p = ctx.p
    monomials = basis(ctx, max_weight)
    index = {m: i for i, m in enumerate(monomials)}
    spanning: list[list[int]] = []
    for g in ideal_generators(ctx, lam, max_weight):
        for m in monomials:
            if m.weight + g.weight > max_weight:
                continue
            product = FockVector.from_terms(
                p,
                {FockMonomial.from_exponents(_merge(m, gm)): c for gm, c in g.terms.items()},
            )
            if not in_ideal(ctx, lam, product):
                return CheckResult.failed(
                    "ideal_span", {"vector": str(product), "reason": "multiple not in kernel"}
                )
            spanning.append(_vector_coordinates(product, index))
    span_rank = FpMatrix.from_rows(spanning, p, cols=len(monomials)).rank() if spanning else 0

    targets = quotient_basis(ctx, max_weight)
    target_index = {m: i for i, m in enumerate(targets)}
    columns = [
        _vector_coordinates(normal_form(ctx, lam, FockVector.monomial(p, m)), target_index)
        for m in monomials
    ]
    kernel_dim = len(monomials) - FpMatrix.from_rows(columns, p).rank()
    if span_rank != kernel_dim:
        return CheckResult.failed(
            "ideal_span",
            {"max_weight": max_weight, "span_rank": span_rank, "kernel_dim": kernel_dim},
            len(spanning),
        )
    return CheckResult.ok("ideal_span", len(spanning), f"dim J_N = {kernel_dim}")


def _merge(a: FockMonomial, b: FockMonomial) -> dict[tuple[int, int], int]:
    merged = a.exponents()
    for key, e in b.exponents().items():
        merged[key] = merged.get(key, 0) + e
    return merged


def check_normal_form(
    ctx: FockContext, lam: LambdaSpec, vectors: Iterable[FockVector]
) -> CheckResult:
    """normal_form is idempotent, lands on quotient monomials and fixes generators' images at 0."""
    count = 0
    for v in vectors:
        once = normal_form(ctx, lam, v)
        count += 1
        if normal_form(ctx, lam, once) != once or not all(
            is_quotient_monomial(ctx.p, m) for m in once.terms
        ):
            return CheckResult.failed("normal_form", {"v": str(v), "normal_form": str(once)}, count)
    for g in ideal_generators(ctx, lam, 2 * ctx.p):
        count += 1
        if not in_ideal(ctx, lam, g):
            return CheckResult.failed("normal_form", {"generator": str(g)}, count)
    return CheckResult.ok("normal_form", count)


def check_d_power_closed_form(ctx: FockContext, max_n: int, max_k: int) -> CheckResult:
    """act_D on u(-n)^p vacuum agrees with the closed form."""
    count = 0
    for i in ctx.generators():
        for n in range(1, max_n + 1):
            power = FockVector.monomial(ctx.p, FockMonomial(((n, i, ctx.p),)))
            for k in range(max_k + 1):
                lhs = act_D(ctx, k, power)
                rhs = d_power_closed_form(ctx, i, n, k)
                count += 1
                if lhs != rhs:
                    return CheckResult.failed(
                        "d_power_closed_form",
                        {"gen": i, "n": n, "k": k, "lhs": str(lhs), "rhs": str(rhs)},
                        count,
                    )
    return CheckResult.ok("d_power_closed_form", count)


def check_stability_iff(ctx: FockContext, lam: LambdaSpec) -> CheckResult:
    """J(l, lambda) is D-stable exactly when lambda lies in Lambda."""
    report = check_D_stability(ctx, lam)
    detail = (
        "D-stable"
        if report.stable
        else f"not D-stable: D^({report.k})({report.generator}) = {report.witness}"
    )
    if report.stable != lam.in_Lambda:
        payload = {"in_Lambda": lam.in_Lambda, **report.to_dict()}
        return CheckResult.failed("d_stability", payload, 1, detail)
    return CheckResult.ok("d_stability", 1, detail)


def pth_power_closed_form(
    action: FockAction | QuotientAction, gen: int, n: int, w: FockVector, e: int
) -> FockVector:
    """Coefficient of x^e in the closed form of a(-n, x)^p on w.

    The series is sum_j C(n+j-1, j) (a(-n-j)^p x^(jp) + (-1)^(n-1) a(j)^p x^(-p(n+j))).
    """
    p = action.ctx.p
    zero = FockVector.zero(p)
    if e % p:
        return zero
    if e >= 0:
        j, mode = e // p, Mode(gen, -n - e // p)
        c = binom_mod_p(n + j - 1, j, p)
    else:
        j = -e // p - n
        if j < 0:
            return zero
        mode = Mode(gen, j)
        c = (sign(n - 1) * binom_mod_p(n + j - 1, j, p)) % p
    if not c:
        return zero
    out = w
    for _ in range(p):
        out = action.mode(mode, out)
    return out.scale(c)


def expand_ab_power(
    action: FockAction | QuotientAction, gen: int, n: int, w: FockVector, window: Window
) -> dict[int, FockVector]:
    """A^p w + B^p w as series in x, with A = sum C(n+j-1, j) a(-n-j) x^j and
    B = sum (-1)^(n-1) C(n+j-1, j) a(j) x^(-n-j), applied one factor at a time."""
    p = action.ctx.p

    def apply(series: dict[int, FockVector], creation: bool) -> dict[int, FockVector]:
        out: dict[int, FockVector] = {}
        for e, v in series.items():
            top = (window.hi - e) if creation else v.weight
            for j in range(max(top, -1) + 1):
                c = binom_mod_p(n + j - 1, j, p)
                if not creation:
                    c = (c * sign(n - 1)) % p
                if not c:
                    continue
                image = action.mode(Mode(gen, -n - j) if creation else Mode(gen, j), v)
                if image.is_zero():
                    continue
                target = e + j if creation else e - n - j
                out[target] = out.get(target, FockVector.zero(p)) + image.scale(c)
        return {e: v for e, v in out.items() if not v.is_zero()}

    a_series: dict[int, FockVector] = {0: w}
    b_series: dict[int, FockVector] = {0: w}
    for _ in range(p):
        a_series = apply(a_series, creation=True)
        b_series = apply(b_series, creation=False)
    total: dict[int, FockVector] = {}
    for series in (a_series, b_series):
        for e, v in series.items():
            if e in window:
                total[e] = total.get(e, FockVector.zero(p)) + v
    return {e: v for e, v in total.items() if not v.is_zero()}


def check_pth_power_series(
    action: FockAction | QuotientAction,
    gen: int,
    n: int,
    window: Window,
    vectors: Sequence[FockVector],
) -> CheckResult:
    """Y(u(-n)^p vacuum, x) w equals the closed form and the direct A^p + B^p expansion."""
    p = action.ctx.p
    u = FockVector.monomial(p, FockMonomial(((n, gen, p),)))
    check_id = f"pth_power_n{n}"
    count = 0
    for w in vectors:
        direct = expand_ab_power(action, gen, n, w, window)
        for e in window:
            via_vertex = action.vertex(u, -e - 1, w)
            closed = pth_power_closed_form(action, gen, n, w, e)
            expanded = direct.get(e, FockVector.zero(p))
            count += 1
            if not via_vertex == closed == expanded:
                return CheckResult.failed(
                    check_id,
                    {
                        "gen": gen,
                        "n": n,
                        "w": str(w),
                        "exponent": e,
                        "vertex": str(via_vertex),
                        "closed_form": str(closed),
                        "expansion": str(expanded),
                    },
                    count,
                )
    return CheckResult.ok(check_id, count)


def check_quotient_module_property(
    ctx: FockContext, lam: LambdaSpec, window: Window, max_weight: int
) -> CheckResult:
    """On L(l, 0, lambda): u(n) = 0 for p | n, u(n)^p = 0 for n != -1, u(-1)^p = lambda^p."""
    if not lam.in_Lambda:
        return CheckResult.precondition("quotient_module", "lambda is not in Lambda")
    action = QuotientAction(ctx.algebra(), lam)
    p = ctx.p
    vectors = [FockVector.monomial(p, m) for m in quotient_basis(ctx, max_weight)]
    count = 0
    for i in ctx.generators():
        for n in window:
            for v in vectors:
                if n % p == 0:
                    image = action.mode(Mode(i, n), v)
                    expected = FockVector.zero(p)
                    label = f"u{i}({n})"
                else:
                    image = v
                    for _ in range(p):
                        image = action.mode(Mode(i, n), image)
                    expected = (
                        v.scale(pow(lam.value(i, 1), p, p)) if n == -1 else FockVector.zero(p)
                    )
                    label = f"u{i}({n})^{p}"
                count += 1
                if image != expected:
                    return CheckResult.failed(
                        "quotient_module",
                        {"operator": label, "v": str(v), "image": str(image)},
                        count,
                    )
    return CheckResult.ok("quotient_module", count)


def check_maximality(
    ctx: FockContext,
    lam: LambdaSpec,
    pairs: Sequence[tuple[int, int]],
    samples: int,
    rng: np.random.Generator,
) -> CheckResult:
    """Every nonzero vector of the truncated quotient generates the vacuum.

    Works in the span of quotient monomials over ``pairs``; the vacuum is the
    first basis vector.
    """
    p = ctx.p
    if any(n % p == 0 for _, n in pairs):
        raise ValueError("maximality works on modes with p not dividing the depth")
    monomials, matrices = quotient_module_matrices(ctx.algebra(), lam, pairs)
    ops = list(matrices.values())
    size = len(monomials)
    vacuum = [1] + [0] * (size - 1)
    count = 0
    for _ in range(samples):
        vec = rng.integers(0, p, size=size, dtype=np.int64)
        if not vec.any():
            vec[int(rng.integers(0, size))] = 1
        closure = span_closure(FpMatrix(vec.reshape(1, -1), p), ops)
        count += 1
        if not closure.contains_row(vacuum):
            return CheckResult.failed(
                "maximality", {"pairs": [list(x) for x in pairs], "vector": vec.tolist()}, count
            )
    return CheckResult.ok("maximality", count)


def check_generators_l0_stable(ctx: FockContext, lam: LambdaSpec, max_depth: int) -> CheckResult:
    """L(0) annihilates every generator of J(l, lambda) (weights are multiples of p)."""
    count = 0
    for g in ideal_generators(ctx.algebra(), lam, max_depth):
        image = virasoro_mode(ctx.algebra(), 0, g)
        count += 1
        if not image.is_zero():
            return CheckResult.failed(
                "l0_generators", {"generator": str(g), "image": str(image)}, count
            )
    return CheckResult.ok("l0_generators", count)
