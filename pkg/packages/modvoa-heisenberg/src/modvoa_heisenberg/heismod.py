"""Finite-dimensional modules for the Heisenberg algebra on a finite mode set.

A module is given by explicit matrices for u_i(+-n), (i, n) in a mode set T
with p not dividing n, together with the p-multiple modes u_i(kp) for
|kp| <= mode_window. Undeclared modes act by zero. The irreducible model is
the truncated polynomial algebra P[T, lambda] with

    u_i(-n) = multiplication by x_(i,n),  x_(i,n)^p = lambda_(i,n)^p
    u_i(n)  = l n g_i d/dx_(i,n)

and the structure theory (vacuum spaces, condition C0, complete
reducibility) is carried out with exact row reduction over GF(p).
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from modvoa_core.field import (
    FpMatrix,
    IntArray,
    PrimeField,
    block_diag,
    hstack,
    span_closure,
    vstack,
)
from modvoa_heisenberg.fock import FockContext, Mode
from modvoa_heisenberg.quotient import LambdaSpec
from modvoa_heisenberg.report import CheckResult

logger = logging.getLogger(__name__)

Pair = tuple[int, int]  # (gen, depth)
Exps = tuple[int, ...]


class IncompatibleFamilyError(ValueError):
    """Raised when n d_(i,n) f_(j,m) != m d_(j,m) f_(i,n) for some pair of the family."""

    def __init__(self, first: Pair, second: Pair) -> None:
        super().__init__(f"family is incompatible at {first} and {second}")
        self.first = first
        self.second = second


class NonIntegrableError(ValueError):
    """Raised when a family member has an x^(p-1) term in its own variable."""

    def __init__(self, pair: Pair) -> None:
        super().__init__(f"f_{pair} is not in the image of d/dx_{pair}")
        self.pair = pair


class VacuumPreconditionError(ValueError):
    """Raised when u(n) v leaves the span of the given cyclic summands."""


class ConditionC0Error(ValueError):
    """Raised when a module violates condition C0."""


class DecompositionError(ValueError):
    """Raised when the cyclic summands of the vacuum space do not exhaust a block."""


class ModuleInvariantError(ValueError):
    """Raised when action matrices are malformed or break the level relation."""


# ---------------------------------------------------------------------------
# Mode sets and truncated polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeSet:
    """A finite set of coordinates (gen, depth) with p not dividing depth."""

    pairs: tuple[Pair, ...]
    p: int

    def __post_init__(self) -> None:
        PrimeField(self.p)
        pairs = tuple(sorted(set(self.pairs)))
        if len(pairs) != len(self.pairs):
            raise ValueError("mode set has duplicate pairs")
        for gen, depth in pairs:
            if gen < 1 or depth < 1 or depth % self.p == 0:
                raise ValueError(f"({gen}, {depth}) is not a coordinate for p={self.p}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, p: int, pairs: Sequence[Pair]) -> ModeSet:
        return cls(tuple((int(g), int(n)) for g, n in pairs), p)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def position(self, pair: Pair) -> int:
        return self.pairs.index(pair)

    @property
    def size(self) -> int:
        """Dimension p^|T| of the truncated polynomial algebra."""
        return self.p ** len(self.pairs)

    def exponent_vectors(self) -> list[Exps]:
        """All exponent vectors in basis order (first variable most significant)."""
        return list(itertools.product(range(self.p), repeat=len(self.pairs)))

    def index(self, exps: Exps) -> int:
        idx = 0
        for e in exps:
            idx = idx * self.p + e
        return idx


@dataclass(frozen=True)
class PolyElement:
    """An element of the polynomial algebra on x_(i,n), (i, n) in ``modes``, exponents < p."""

    modes: ModeSet
    terms: Mapping[Exps, int]

    @classmethod
    def from_terms(cls, modes: ModeSet, terms: Mapping[Exps, int]) -> PolyElement:
        p = modes.p
        for exps in terms:
            if len(exps) != len(modes) or any(e < 0 or e >= p for e in exps):
                raise ValueError(f"exponent vector {exps} does not fit {len(modes)} variables")
        return cls(modes, {e: c % p for e, c in sorted(terms.items()) if c % p})

    @classmethod
    def zero(cls, modes: ModeSet) -> PolyElement:
        return cls(modes, {})

    @classmethod
    def one(cls, modes: ModeSet) -> PolyElement:
        return cls(modes, {(0,) * len(modes): 1})

    @classmethod
    def variable(cls, modes: ModeSet, pair: Pair) -> PolyElement:
        exps = [0] * len(modes)
        exps[modes.position(pair)] = 1
        return cls.from_terms(modes, {tuple(exps): 1})

    @classmethod
    def from_vector(cls, modes: ModeSet, vector: Sequence[int] | IntArray) -> PolyElement:
        values = [int(x) for x in vector]
        if len(values) != modes.size:
            raise ValueError(f"vector of length {len(values)} for {modes.size} monomials")
        return cls.from_terms(modes, dict(zip(modes.exponent_vectors(), values, strict=True)))

    @classmethod
    def random(
        cls, modes: ModeSet, rng: np.random.Generator, constant_term: bool = True
    ) -> PolyElement:
        values = rng.integers(0, modes.p, size=modes.size, dtype=np.int64)
        if not constant_term:
            values[0] = 0
        return cls.from_vector(modes, values)

    @property
    def p(self) -> int:
        return self.modes.p

    def __add__(self, other: PolyElement) -> PolyElement:
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, 0) + c
        return PolyElement.from_terms(self.modes, merged)

    def __sub__(self, other: PolyElement) -> PolyElement:
        return self + other.scale(-1)

    def scale(self, c: int) -> PolyElement:
        return PolyElement.from_terms(self.modes, {e: c * v for e, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def constant_term(self) -> int:
        return self.terms.get((0,) * len(self.modes), 0)

    def partial(self, pair: Pair) -> PolyElement:
        """The ordinary derivative d/dx_pair."""
        k = self.modes.position(pair)
        out: dict[Exps, int] = {}
        for exps, c in self.terms.items():
            e = exps[k]
            if e:
                lowered = exps[:k] + (e - 1,) + exps[k + 1 :]
                out[lowered] = out.get(lowered, 0) + c * e
        return PolyElement.from_terms(self.modes, out)

    def multiply_x(self, pair: Pair, lam: int = 0) -> PolyElement:
        """x_pair * f with x_pair^p = lam^p."""
        k = self.modes.position(pair)
        top = pow(lam, self.p, self.p)
        out: dict[Exps, int] = {}
        for exps, c in self.terms.items():
            e = exps[k] + 1
            if e == self.p:
                e, c = 0, c * top
            raised = exps[:k] + (e,) + exps[k + 1 :]
            out[raised] = out.get(raised, 0) + c
        return PolyElement.from_terms(self.modes, out)

    def g_operator(self, pair: Pair) -> PolyElement:
        """x^k -> x^(k+1) / (n (k+1)) for k <= p-2 and x^(p-1) -> 0, n the depth of ``pair``."""
        k = self.modes.position(pair)
        f = PrimeField(self.p)
        depth = pair[1]
        out: dict[Exps, int] = {}
        for exps, c in self.terms.items():
            e = exps[k]
            if e == self.p - 1:
                continue
            raised = exps[:k] + (e + 1,) + exps[k + 1 :]
            out[raised] = f.div(c, depth * (e + 1))
        return PolyElement.from_terms(self.modes, out)

    def is_integrable(self, pair: Pair) -> bool:
        """True iff no term carries x_pair^(p-1), i.e. f lies in the image of d/dx_pair."""
        k = self.modes.position(pair)
        return all(exps[k] != self.p - 1 for exps in self.terms)

    def to_vector(self) -> IntArray:
        out = np.zeros(self.modes.size, dtype=np.int64)
        for exps, c in self.terms.items():
            out[self.modes.index(exps)] = c
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.terms.items():
            factors = [
                f"x{g}_{n}" + (f"^{e}" if e > 1 else "")
                for (g, n), e in zip(self.modes.pairs, exps, strict=True)
                if e
            ]
            body = "*".join(factors) or "1"
            parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeisModule:
    """Explicit action matrices of a level-l module on GF(p)^dim.

    ``gram`` is the diagonal of the form. ``central`` records the characters
    the module was built with and is None when the module mixes characters.
    """

    p: int
    d: int
    level: int
    gram: tuple[int, ...]
    dim: int
    actions: Mapping[Mode, FpMatrix]
    mode_window: int = 0
    central: LambdaSpec | None = None

    def __post_init__(self) -> None:
        PrimeField(self.p)
        if len(self.gram) != self.d:
            raise ModuleInvariantError(f"gram needs {self.d} diagonal entries")
        for mode, matrix in self.actions.items():
            if not 1 <= mode.gen <= self.d:
                raise ModuleInvariantError(f"{mode} refers to a missing generator")
            if matrix.p != self.p or matrix.shape != (self.dim, self.dim):
                raise ModuleInvariantError(
                    f"{mode} acts by a {matrix.shape} matrix over GF({matrix.p}),"
                    f" expected {self.dim}x{self.dim} over GF({self.p})"
                )
        object.__setattr__(self, "level", self.level % self.p)
        object.__setattr__(self, "gram", tuple(g % self.p for g in self.gram))
        object.__setattr__(self, "actions", dict(sorted(self.actions.items())))

    @cached_property
    def modes(self) -> ModeSet:
        pairs = {(m.gen, abs(m.deg)) for m in self.actions if m.deg % self.p}
        return ModeSet(tuple(sorted(pairs)), self.p)

    def action(self, mode: Mode) -> FpMatrix:
        matrix = self.actions.get(mode)
        return matrix if matrix is not None else FpMatrix.zeros(self.dim, self.dim, self.p)

    def operators(self) -> list[FpMatrix]:
        return list(self.actions.values())

    def positive_modes(self) -> list[Mode]:
        return [m for m in self.actions if m.deg > 0]

    def context(self) -> FockContext:
        return FockContext.create(self.p, self.d, self.level, list(self.gram))

    def central_family(self) -> list[tuple[str, Mode, FpMatrix]]:
        """The central operators u_i(0), u_i(-kp) and u_i(-n)^p with their labels."""
        family: list[tuple[str, Mode, FpMatrix]] = []
        for mode, matrix in self.actions.items():
            if mode.deg == 0:
                family.append(("zero", mode, matrix))
            elif mode.deg < 0 and mode.deg % self.p == 0:
                family.append(("multiple", mode, matrix))
            elif mode.deg < 0:
                family.append(("power", mode, matrix.power(self.p)))
        return family

    def with_actions(self, actions: Mapping[Mode, FpMatrix], dim: int) -> HeisModule:
        return HeisModule(
            self.p, self.d, self.level, self.gram, dim, actions, self.mode_window, self.central
        )


def check_level_relation(module: HeisModule) -> CheckResult:
    """[u_i(m), u_j(n)] = m g_ij l delta_(m+n, 0) for all declared modes."""
    count = 0
    p = module.p
    modes = list(module.actions)
    for a, b in itertools.combinations(modes, 2):
        lhs = module.action(a).commutator(module.action(b))
        expected = 0
        if a.gen == b.gen and a.deg + b.deg == 0:
            expected = a.deg * module.gram[a.gen - 1] * module.level % p
        count += 1
        if lhs != FpMatrix.scalar(module.dim, expected, p):
            return CheckResult.failed(
                "level_relation",
                {"first": str(a), "second": str(b), "expected_scalar": expected},
                count,
                f"[{a}, {b}] is not {expected} times the identity",
            )
    return CheckResult.ok("level_relation", count)


def validate(module: HeisModule) -> HeisModule:
    """Return ``module`` or raise ModuleInvariantError naming the broken identity."""
    result = check_level_relation(module)
    if not result.passed:
        raise ModuleInvariantError(result.detail)
    return module


def build_irreducible(
    ctx: FockContext, modes: ModeSet, lam: LambdaSpec, mode_window: int | None = None
) -> HeisModule:
    """The irreducible module P[T, lambda] of dimension p^|T|.

    p-multiple modes are declared for |kp| <= mode_window (default p): the
    positive ones act by 0, u_i(-kp) by lambda_(i,kp) and u_i(0) by lambda0_i.
    """
    p = ctx.p
    if ctx.level == 0:
        raise ValueError("irreducible Heisenberg modules need a nonzero level")
    if not ctx.is_diagonal:
        raise ValueError("irreducible Heisenberg modules need a diagonal gram matrix")
    if modes.p != p or lam.d != ctx.d:
        raise ValueError("mode set, lambda and context disagree on p or d")
    window = p if mode_window is None else mode_window
    size = modes.size
    basis = [PolyElement.from_terms(modes, {e: 1}) for e in modes.exponent_vectors()]

    def matrix_of(op: list[PolyElement]) -> FpMatrix:
        columns = np.stack([f.to_vector() for f in op], axis=1)
        return FpMatrix(columns, p)

    actions: dict[Mode, FpMatrix] = {}
    for gen, depth in modes:
        if gen > ctx.d:
            raise ValueError(f"mode set refers to generator {gen} but d={ctx.d}")
        scale = ctx.level * depth * ctx.g(gen, gen)
        actions[Mode(gen, depth)] = matrix_of(
            [f.partial((gen, depth)).scale(scale) for f in basis]
        )
        value = lam.value(gen, depth)
        actions[Mode(gen, -depth)] = matrix_of([f.multiply_x((gen, depth), value) for f in basis])
    for gen in ctx.generators():
        actions[Mode(gen, 0)] = FpMatrix.scalar(size, lam.zero_mode(gen), p)
        for kp in range(p, window + 1, p):
            actions[Mode(gen, kp)] = FpMatrix.zeros(size, size, p)
            actions[Mode(gen, -kp)] = FpMatrix.scalar(size, lam.value(gen, kp), p)
    gram = tuple(ctx.g(i, i) for i in ctx.generators())
    logger.debug("built irreducible module of dimension %d on %s", size, modes.pairs)
    return HeisModule(p, ctx.d, ctx.level, gram, size, actions, window, lam)


def direct_sum(first: HeisModule, second: HeisModule) -> HeisModule:
    if (first.p, first.d, first.level, first.gram) != (
        second.p,
        second.d,
        second.level,
        second.gram,
    ):
        raise ModuleInvariantError("direct sums need equal p, d, level and gram")
    modes = sorted(set(first.actions) | set(second.actions))
    actions = {m: block_diag([first.action(m), second.action(m)]) for m in modes}
    central = first.central if first.central == second.central else None
    return HeisModule(
        first.p,
        first.d,
        first.level,
        first.gram,
        first.dim + second.dim,
        actions,
        max(first.mode_window, second.mode_window),
        central,
    )


def conjugate(module: HeisModule, g: FpMatrix) -> HeisModule:
    """The module with every action replaced by g A g^-1."""
    g_inv = g.inverse()
    return module.with_actions({m: g @ a @ g_inv for m, a in module.actions.items()}, module.dim)


def restrict(module: HeisModule, basis: FpMatrix) -> HeisModule:
    """The submodule spanned by the rows of ``basis``, in those coordinates."""
    columns = basis.T
    actions: dict[Mode, FpMatrix] = {}
    for mode, matrix in module.actions.items():
        solution = columns.solve(matrix @ columns)
        if solution is None:
            raise DecompositionError(f"span is not stable under {mode}")
        actions[mode] = solution
    return module.with_actions(actions, basis.rows)


# ---------------------------------------------------------------------------
# Vacuum space, condition C0 and central characters
# ---------------------------------------------------------------------------


def vacuum_space(module: HeisModule) -> FpMatrix:
    """A basis (as rows) of the joint kernel of the positive modes."""
    positive = [module.action(m) for m in module.positive_modes()]
    if not positive:
        return FpMatrix.identity(module.dim, module.p)
    return vstack(positive).kernel()


@dataclass(frozen=True)
class CentralBlock:
    """A joint eigenspace of the central operators and its characters."""

    basis: FpMatrix
    tag: LambdaSpec

    @property
    def dim(self) -> int:
        return self.basis.rows


def _eigenspace(space: FpMatrix, operator: FpMatrix, c: int) -> FpMatrix:
    shifted = operator - FpMatrix.scalar(operator.rows, c, operator.p)
    coefficients = (shifted @ space.T).kernel()
    if coefficients.rows == 0:
        return coefficients
    return coefficients @ space


def central_blocks(module: HeisModule) -> list[CentralBlock]:
    """Split GF(p)^dim into joint eigenspaces of the central operators.

    Raises ConditionC0Error when some central operator is not diagonalizable
    over GF(p).
    """
    p = module.p
    blocks: list[tuple[FpMatrix, dict[tuple[int, int], int], list[int]]] = [
        (FpMatrix.identity(module.dim, p), {}, [0] * module.d)
    ]
    for label, mode, operator in module.central_family():
        refined = []
        for space, values, zero in blocks:
            found = 0
            for c in range(p):
                piece = _eigenspace(space, operator, c)
                if piece.rows == 0:
                    continue
                found += piece.rows
                if label == "zero":
                    refined.append((piece, values, [*zero[: mode.gen - 1], c, *zero[mode.gen :]]))
                else:
                    refined.append((piece, {**values, (mode.gen, -mode.deg): c}, zero))
            if found != space.rows:
                what = f"{mode}^{p}" if label == "power" else str(mode)
                raise ConditionC0Error(f"{what} is not semisimple over GF({p})")
        blocks = refined
    out = [
        CentralBlock(space, LambdaSpec.from_entries(module.d, values, p, zero))
        for space, values, zero in blocks
    ]
    logger.debug("central blocks of dimensions %s", [b.dim for b in out])
    return out


def check_C0(module: HeisModule) -> CheckResult:  # noqa: N802
    """u(kp) and u(n)^p vanish for positive degrees; the negative ones are semisimple."""
    count = 0
    for mode in module.positive_modes():
        matrix = module.action(mode)
        power = matrix if mode.deg % module.p == 0 else matrix.power(module.p)
        count += 1
        if not power.is_zero():
            label = str(mode) if mode.deg % module.p == 0 else f"{mode}^{module.p}"
            return CheckResult.failed("c0", {"operator": label}, count, f"{label} is nonzero")
    try:
        blocks = central_blocks(module)
    except ConditionC0Error as exc:
        return CheckResult.failed("c0", {"reason": str(exc)}, count + 1, str(exc))
    return CheckResult.ok("c0", count + 1, f"{len(blocks)} central block(s)")


# ---------------------------------------------------------------------------
# Cyclic summands and irreducibility
# ---------------------------------------------------------------------------


def monomial_images(module: HeisModule, w: Sequence[int] | IntArray) -> FpMatrix:
    """Rows x^e w = prod u_i(-n)^(e_(i,n)) w over all exponent vectors e < p."""
    modes = module.modes
    vector = np.asarray(w, dtype=np.int64).reshape(-1) % module.p
    lowering = [module.action(Mode(g, -n)) for g, n in modes]
    rows = []
    for exps in modes.exponent_vectors():
        image = vector
        for matrix, e in zip(lowering, exps, strict=True):
            for _ in range(e):
                image = matrix.apply(image)
        rows.append(image)
    return FpMatrix(np.stack(rows), module.p)


def cyclic_summand(module: HeisModule, w: Sequence[int] | IntArray) -> FpMatrix:
    """A basis of U(h) w for a vacuum vector w, as the images of the monomials."""
    return monomial_images(module, w).row_space()


def _nonzero_vectors(basis: FpMatrix) -> Iterator[IntArray]:
    """Every nonzero vector of the row span, up to scalars."""
    k, p = basis.rows, basis.p
    for coeffs in itertools.product(range(p), repeat=k):
        nonzero = [c for c in coeffs if c]
        if not nonzero or nonzero[0] != 1:
            continue
        yield (np.asarray(coeffs, dtype=np.int64) @ basis.entries) % p


def is_irreducible(
    module: HeisModule,
    samples: int = 20,
    rng: np.random.Generator | None = None,
    enumeration_limit: int = 729,
) -> bool:
    """Whether every nonzero vector generates the whole module.

    Basis vectors and random vectors are tested directly. When the positive
    modes are nilpotent every nonzero submodule meets the vacuum space, so
    enumerating the vacuum space makes the answer exact.

    That enumeration runs only while p^dim(Omega) <= enumeration_limit. Past
    the limit the result rests on the sampled vectors alone and a True may be
    wrong; the skip is logged at debug level.
    """
    if module.dim < 1:
        raise ValueError("irreducibility needs a nonzero module")
    p, n = module.p, module.dim
    rng = rng or np.random.default_rng(0)
    ops = module.operators()

    def generates(vector: IntArray) -> bool:
        return span_closure(FpMatrix(vector.reshape(1, -1), p), ops).rows == n

    candidates = list(np.eye(n, dtype=np.int64))
    for _ in range(samples):
        vec = rng.integers(0, p, size=n, dtype=np.int64)
        if vec.any():
            candidates.append(vec)
    if not all(generates(v) for v in candidates):
        return False
    if all(module.action(m).is_nilpotent() for m in module.positive_modes()):
        omega = vacuum_space(module)
        if p**omega.rows <= enumeration_limit:
            return all(generates(v) for v in _nonzero_vectors(omega))
        logger.debug(
            "vacuum space of dimension %d exceeds enumeration limit %d, sampled only",
            omega.rows,
            enumeration_limit,
        )
    return True


def find_intertwiner(
    first: HeisModule, second: HeisModule, rng: np.random.Generator | None = None
) -> FpMatrix | None:
    """An invertible X with A_second X = X A_first for every mode, or None.

    Solves the Kronecker-product system directly, so only for small modules.
    """
    if first.dim != second.dim or first.p != second.p:
        return None
    p, n = first.p, first.dim
    rng = rng or np.random.default_rng(0)
    identity = np.eye(n, dtype=np.int64)
    blocks = []
    for mode in sorted(set(first.actions) | set(second.actions)):
        a1, a2 = first.action(mode).entries, second.action(mode).entries
        blocks.append(FpMatrix(np.kron(a2, identity) - np.kron(identity, a1.T), p))
    solutions = vstack(blocks).kernel()
    if solutions.rows == 0:
        return None
    candidates = [solutions.entries[r] for r in range(solutions.rows)]
    candidates += [
        (rng.integers(0, p, size=solutions.rows) @ solutions.entries) % p for _ in range(20)
    ]
    for vec in candidates:
        x = FpMatrix(np.asarray(vec).reshape(n, n), p)
        if x.rank() == n:
            return x
    return None


# ---------------------------------------------------------------------------
# Integration and vacuum repair
# ---------------------------------------------------------------------------


def integrate_family(
    modes: ModeSet, family: Mapping[Pair, PolyElement], order: Sequence[Pair] | None = None
) -> PolyElement:
    """f with n d/dx_(i,n) f = f_(i,n) for every (i, n) in the family, zero constant term.

    Built one variable at a time by f <- f + g_(j,m)(f_(j,m) - m d_(j,m) f).
    """
    pairs = list(order) if order is not None else sorted(family)
    for pair in pairs:
        if pair not in modes:
            raise ValueError(f"{pair} is not in the mode set")
        if not family[pair].is_integrable(pair):
            raise NonIntegrableError(pair)
    for a, b in itertools.combinations(pairs, 2):
        lhs = family[b].partial(a).scale(a[1])
        rhs = family[a].partial(b).scale(b[1])
        if lhs != rhs:
            raise IncompatibleFamilyError(a, b)
    f = PolyElement.zero(modes)
    for pair in pairs:
        defect = family[pair] - f.partial(pair).scale(pair[1])
        f = f + defect.g_operator(pair)
    return f


def repair_vacuum(
    module: HeisModule, generators: FpMatrix, v: Sequence[int] | IntArray
) -> IntArray:
    """h in W0 = sum U(h) w_gamma with u(n) h = u(n) v for every positive mode.

    ``generators`` holds vacuum vectors w_gamma as rows whose cyclic
    summands form a direct sum. Then v - h is again a vacuum vector.
    """
    p = module.p
    modes = module.modes
    vector = np.asarray(v, dtype=np.int64).reshape(-1) % p
    images = [monomial_images(module, generators.entries[g]) for g in range(generators.rows)]
    phi = hstack([m.T for m in images]) if images else FpMatrix.zeros(module.dim, 0, p)
    if phi.rank() != phi.cols:
        raise VacuumPreconditionError("the cyclic summands of the generators are not direct")
    for mode in module.positive_modes():
        if mode.deg % p == 0 and np.any(module.action(mode).apply(vector)):
            raise VacuumPreconditionError(f"{mode} v is nonzero")

    scalars = PrimeField(p)
    families: list[dict[Pair, PolyElement]] = [{} for _ in images]
    for gen, depth in modes:
        target = module.action(Mode(gen, depth)).apply(vector)
        s = phi.solve_vector(target)
        if s is None:
            raise VacuumPreconditionError(f"u{gen}({depth}) v leaves W0")
        factor = scalars.inv(module.level * module.gram[gen - 1])
        for gamma in range(len(images)):
            chunk = s[gamma * modes.size : (gamma + 1) * modes.size]
            families[gamma][(gen, depth)] = PolyElement.from_vector(modes, chunk).scale(factor)

    coefficients = []
    for family in families:
        try:
            coefficients.append(integrate_family(modes, family).to_vector())
        except NonIntegrableError as exc:
            raise ConditionC0Error(
                f"u{exc.pair[0]}({exc.pair[1]})^{p} is nonzero on the module"
            ) from exc
    if not coefficients:
        return np.zeros(module.dim, dtype=np.int64)
    return phi.apply(np.concatenate(coefficients))


# ---------------------------------------------------------------------------
# Complete reducibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Summand:
    """An irreducible summand: basis rows in the ambient coordinates and characters."""

    basis: FpMatrix
    tag: LambdaSpec
    module: HeisModule = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.rows


def decompose(
    module: HeisModule, samples: int = 10, rng: np.random.Generator | None = None
) -> list[Summand]:
    """Split a module satisfying C0 into irreducible summands.

    Blocks by central characters, then takes the cyclic summands of a basis
    of the vacuum space in each block and checks they exhaust the block.
    """
    if module.level == 0:
        raise ValueError("complete reducibility needs a nonzero level")
    c0 = check_C0(module)
    if not c0.passed:
        raise ConditionC0Error(c0.detail)
    rng = rng or np.random.default_rng(0)
    expected = module.modes.size
    summands: list[Summand] = []
    for block in central_blocks(module):
        local = restrict(module, block.basis)
        omega = vacuum_space(local)
        pieces = [cyclic_summand(local, omega.entries[g]) for g in range(omega.rows)]
        if not pieces:
            raise DecompositionError(f"block {block.tag.as_dict()} has no vacuum vector")
        stacked = vstack(pieces)
        if stacked.rank() != stacked.rows or stacked.rows != local.dim:
            raise DecompositionError(
                f"cyclic summands span {stacked.rank()} of {local.dim} dimensions"
                f" in block {block.tag.as_dict()}"
            )
        for piece in pieces:
            if piece.rows != expected:
                raise DecompositionError(f"summand of dimension {piece.rows}, expected {expected}")
            sub = restrict(local, piece)
            if not is_irreducible(sub, samples, rng):
                raise DecompositionError("a cyclic summand is reducible")
            summands.append(Summand(piece @ block.basis, block.tag, sub))
    logger.debug("decomposed module of dimension %d into %d summands", module.dim, len(summands))
    return summands
