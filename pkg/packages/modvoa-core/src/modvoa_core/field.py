"""Exact arithmetic over GF(p): residues, Lucas binomials and row reduction.

Scalars are plain ``int`` residues in ``[0, p)``; the prime travels with a
``PrimeField`` context instead of with every element. Matrices are numpy
``int64`` arrays wrapped in ``FpMatrix``; entries are kept reduced so products
of two entries never leave the exact int64 range.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from sympy import isprime

logger = logging.getLogger(__name__)

# int64 matrix products stay exact while entries are below 2**20
MAX_PRIME = 1 << 20

FpScalar = int
IntArray = npt.NDArray[np.int64]


class NotPrimeError(ValueError):
    """Raised when a characteristic is not a supported prime."""


class DimensionMismatchError(ValueError):
    """Raised when matrix or vector shapes do not line up."""


@lru_cache(maxsize=256)
def check_prime(p: int) -> int:
    """Validate ``p`` as a supported prime and return it."""
    if isinstance(p, bool) or not isinstance(p, int) or p < 2 or not isprime(p):
        raise NotPrimeError(f"{p!r} is not a prime")
    if p >= MAX_PRIME:
        raise NotPrimeError(f"primes must be below {MAX_PRIME}, got {p}")
    return p


@dataclass(frozen=True)
class PrimeField:
    """The prime field GF(p).

    Also serves as the coefficient space of scalar Laurent polynomials.
    """

    p: int

    def __post_init__(self) -> None:
        check_prime(self.p)

    def reduce(self, a: int) -> FpScalar:
        return a % self.p

    def add(self, a: int, b: int) -> FpScalar:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> FpScalar:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> FpScalar:
        return (a * b) % self.p

    def neg(self, a: int) -> FpScalar:
        return (-a) % self.p

    def inv(self, a: int) -> FpScalar:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int) -> FpScalar:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def div(self, a: int, b: int) -> FpScalar:
        return self.mul(a, self.inv(b))

    def half(self) -> FpScalar:
        """The inverse of 2; only exists for odd p."""
        return self.inv(2)

    def random_element(self, rng: np.random.Generator, nonzero: bool = False) -> FpScalar:
        if nonzero:
            return int(rng.integers(1, self.p))
        return int(rng.integers(0, self.p))

    # coefficient-space protocol
    def zero(self) -> FpScalar:
        return 0

    def scale(self, c: int, v: int) -> FpScalar:
        return (c * v) % self.p

    def is_zero(self, v: int) -> bool:
        return v % self.p == 0


@lru_cache(maxsize=65536)
def binom_mod_p(m: int, n: int, p: int) -> FpScalar:
    """C(m, n) mod p via Lucas' theorem, digit by digit in base p."""
    check_prime(p)
    if m < 0 or n < 0:
        raise ValueError(f"binom_mod_p needs nonnegative arguments, got ({m}, {n})")
    result = 1
    while n:
        m_digit, n_digit = m % p, n % p
        if n_digit > m_digit:
            return 0
        result = (result * math.comb(m_digit, n_digit)) % p
        m //= p
        n //= p
    return result


def signed_binom(n: int, k: int, p: int) -> FpScalar:
    """C(-n, k) mod p, using C(-n, k) = (-1)^k C(n+k-1, k)."""
    if n < 1 or k < 0:
        raise ValueError(f"signed_binom needs n >= 1 and k >= 0, got ({n}, {k})")
    value = binom_mod_p(n + k - 1, k, p)
    return value if k % 2 == 0 else (-value) % p


def binom_any(m: int, k: int, p: int) -> FpScalar:
    """Generalized C(m, k) mod p for any integer m; zero for k < 0."""
    if k < 0:
        check_prime(p)
        return 0
    if m >= 0:
        return binom_mod_p(m, k, p)
    return signed_binom(-m, k, p)


def sign(e: int) -> int:
    """(-1)^e as an integer."""
    return -1 if e % 2 else 1


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def _rref(entries: IntArray, p: int) -> tuple[IntArray, list[int]]:
    """Reduced row echelon form over GF(p); returns (rref, pivot columns)."""
    a = np.array(entries, dtype=np.int64, copy=True) % p
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nonzero = np.nonzero(a[r:, c])[0]
        if nonzero.size == 0:
            continue
        piv = r + int(nonzero[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        factors = a[:, c].copy()
        factors[r] = 0
        a = (a - np.outer(factors, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


@dataclass(frozen=True, eq=False)
class FpMatrix:
    """An immutable rows x cols matrix over GF(p).

    Column vectors are the convention for actions: ``A @ B`` composes and
    ``A.apply(v)`` maps a vector. Bases of subspaces are returned as matrices
    whose rows are the basis vectors.
    """

    entries: IntArray
    p: int

    def __post_init__(self) -> None:
        check_prime(self.p)
        arr = np.array(self.entries, dtype=np.int64)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-d array, got shape {arr.shape}")
        arr %= self.p
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> FpMatrix:
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n: int, p: int) -> FpMatrix:
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def scalar(cls, n: int, c: int, p: int) -> FpMatrix:
        return cls(np.eye(n, dtype=np.int64) * (c % p), p)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], p: int, cols: int | None = None) -> FpMatrix:
        if not rows:
            return cls.zeros(0, cols or 0, p)
        return cls(np.array([list(r) for r in rows], dtype=np.int64), p)

    @classmethod
    def random(cls, rows: int, cols: int, p: int, rng: np.random.Generator) -> FpMatrix:
        return cls(rng.integers(0, p, size=(rows, cols), dtype=np.int64), p)

    @classmethod
    def random_invertible(cls, n: int, p: int, rng: np.random.Generator) -> FpMatrix:
        while True:
            candidate = cls.random(n, n, p, rng)
            if candidate.rank() == n:
                return candidate

    # -- shape --------------------------------------------------------------

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.p, self.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.p}, rows={self.to_rows()})"

    # -- arithmetic ---------------------------------------------------------

    def _check_same(self, other: FpMatrix) -> None:
        if self.p != other.p:
            raise DimensionMismatchError(f"characteristics differ: {self.p} vs {other.p}")
        if self.shape != other.shape:
            raise DimensionMismatchError(f"shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: FpMatrix) -> FpMatrix:
        self._check_same(other)
        return FpMatrix(self.entries + other.entries, self.p)

    def __sub__(self, other: FpMatrix) -> FpMatrix:
        self._check_same(other)
        return FpMatrix(self.entries - other.entries, self.p)

    def __neg__(self) -> FpMatrix:
        return FpMatrix(-self.entries, self.p)

    def __matmul__(self, other: FpMatrix) -> FpMatrix:
        if self.p != other.p:
            raise DimensionMismatchError(f"characteristics differ: {self.p} vs {other.p}")
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        return FpMatrix(_matmul_mod(self.entries, other.entries, self.p), self.p)

    def scale(self, c: int) -> FpMatrix:
        return FpMatrix(self.entries * (c % self.p), self.p)

    def power(self, k: int) -> FpMatrix:
        if self.rows != self.cols:
            raise DimensionMismatchError("power needs a square matrix")
        result = FpMatrix.identity(self.rows, self.p)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def transpose(self) -> FpMatrix:
        return FpMatrix(self.entries.T, self.p)

    @property
    def T(self) -> FpMatrix:  # noqa: N802
        return self.transpose()

    def commutator(self, other: FpMatrix) -> FpMatrix:
        return self @ other - other @ self

    def apply(self, vector: Sequence[int] | IntArray) -> IntArray:
        """Matrix times column vector."""
        v = np.asarray(vector, dtype=np.int64).reshape(-1)
        if v.shape[0] != self.cols:
            raise DimensionMismatchError(
                f"vector of length {v.shape[0]} does not fit {self.shape}"
            )
        return _matmul_mod(self.entries, v.reshape(-1, 1), self.p).reshape(-1)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not bool(np.any(self.entries))

    def scalar_value(self) -> FpScalar | None:
        """The scalar c if this is c times the identity, else None."""
        if self.rows != self.cols:
            return None
        if self.rows == 0:
            return 0
        c = int(self.entries[0, 0])
        if np.array_equal(self.entries, np.eye(self.rows, dtype=np.int64) * c):
            return c
        return None

    def is_scalar(self) -> bool:
        return self.scalar_value() is not None

    def is_nilpotent(self) -> bool:
        return self.power(max(self.rows, 1)).is_zero()

    # -- elimination --------------------------------------------------------

    def rref(self) -> tuple[FpMatrix, list[int]]:
        reduced, pivots = _rref(self.entries, self.p)
        return FpMatrix(reduced, self.p), pivots

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return len(_rref(self.entries, self.p)[1])

    def row_space(self) -> FpMatrix:
        """A basis (as rows) of the span of the rows."""
        if self.rows == 0:
            return self
        reduced, pivots = _rref(self.entries, self.p)
        return FpMatrix(reduced[: len(pivots)], self.p)

    def kernel(self) -> FpMatrix:
        """A basis (as rows) of {v : M v = 0}."""
        n = self.cols
        if self.rows == 0:
            return FpMatrix.identity(n, self.p)
        reduced, pivots = _rref(self.entries, self.p)
        pivot_set = set(pivots)
        free = [j for j in range(n) if j not in pivot_set]
        basis = np.zeros((len(free), n), dtype=np.int64)
        for row, f in enumerate(free):
            basis[row, f] = 1
            for pivot_row, pc in enumerate(pivots):
                basis[row, pc] = (-reduced[pivot_row, f]) % self.p
        return FpMatrix(basis, self.p)

    def solve(self, rhs: FpMatrix) -> FpMatrix | None:
        """A particular X with M X = rhs (free variables zero), or None."""
        if rhs.rows != self.rows:
            raise DimensionMismatchError(
                f"right-hand side has {rhs.rows} rows, matrix has {self.rows}"
            )
        n = self.cols
        aug = np.concatenate([self.entries, rhs.entries], axis=1)
        reduced, pivots = _rref(aug, self.p)
        if any(pc >= n for pc in pivots):
            return None
        x = np.zeros((n, rhs.cols), dtype=np.int64)
        for pivot_row, pc in enumerate(pivots):
            x[pc] = reduced[pivot_row, n:]
        return FpMatrix(x, self.p)

    def solve_vector(self, rhs: Sequence[int] | IntArray) -> IntArray | None:
        column = FpMatrix(np.asarray(rhs, dtype=np.int64).reshape(-1, 1), self.p)
        solution = self.solve(column)
        return None if solution is None else solution.entries.reshape(-1).copy()

    def inverse(self) -> FpMatrix:
        if self.rows != self.cols:
            raise DimensionMismatchError("only square matrices can be inverted")
        solution = self.solve(FpMatrix.identity(self.rows, self.p))
        if solution is None or self.rank() != self.rows:
            raise ZeroDivisionError("matrix is singular over GF(p)")
        return solution

    def contains_row(self, vector: Sequence[int] | IntArray) -> bool:
        """Whether ``vector`` lies in the row space."""
        v = np.asarray(vector, dtype=np.int64).reshape(1, -1)
        if self.rows == 0:
            return not bool(np.any(v % self.p))
        return vstack([self, FpMatrix(v, self.p)]).rank() == self.rank()

    def to_rows(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.entries]


def _matmul_mod(a: IntArray, b: IntArray, p: int) -> IntArray:
    inner = a.shape[1]
    # each product is below p**2 < 2**40; sum at most 2**23 of them per block
    block = max(1, (1 << 62) // max((p - 1) ** 2, 1))
    if inner <= block:
        return (a @ b) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for start in range(0, inner, block):
        out = (out + a[:, start : start + block] @ b[start : start + block]) % p
    return out


def vstack(matrices: Sequence[FpMatrix]) -> FpMatrix:
    if not matrices:
        raise DimensionMismatchError("vstack needs at least one matrix")
    p = matrices[0].p
    cols = {m.cols for m in matrices}
    if len(cols) != 1:
        raise DimensionMismatchError(f"column counts differ: {sorted(cols)}")
    return FpMatrix(np.concatenate([m.entries for m in matrices], axis=0), p)


def hstack(matrices: Sequence[FpMatrix]) -> FpMatrix:
    if not matrices:
        raise DimensionMismatchError("hstack needs at least one matrix")
    p = matrices[0].p
    rows = {m.rows for m in matrices}
    if len(rows) != 1:
        raise DimensionMismatchError(f"row counts differ: {sorted(rows)}")
    return FpMatrix(np.concatenate([m.entries for m in matrices], axis=1), p)


def block_diag(matrices: Sequence[FpMatrix]) -> FpMatrix:
    if not matrices:
        raise DimensionMismatchError("block_diag needs at least one matrix")
    p = matrices[0].p
    out = np.zeros(
        (sum(m.rows for m in matrices), sum(m.cols for m in matrices)), dtype=np.int64
    )
    r = c = 0
    for m in matrices:
        out[r : r + m.rows, c : c + m.cols] = m.entries
        r += m.rows
        c += m.cols
    return FpMatrix(out, p)


# ---------------------------------------------------------------------------
# Kernel and span closure
# ---------------------------------------------------------------------------


class SolveMode(str, Enum):
    """What ``solve_linear`` computes."""

    KERNEL = "kernel"
    SPAN_CLOSURE = "span_closure"


def kernel(matrix: FpMatrix) -> FpMatrix:
    return matrix.kernel()


def span_closure(generators: FpMatrix, operators: Iterable[FpMatrix]) -> FpMatrix:
    """Smallest subspace containing the rows of ``generators`` and stable under ``operators``.

    Iterates row reduction until the dimension stops growing, which happens
    after at most ``generators.cols`` rounds.
    """
    ops = list(operators)
    n = generators.cols
    for op in ops:
        if op.shape != (n, n):
            raise DimensionMismatchError(
                f"operator of shape {op.shape} does not act on dimension {n}"
            )
    basis = generators.row_space()
    for _ in range(n + 1):
        if basis.rows in (0, n) or not ops:
            return basis
        images = [
            FpMatrix(_matmul_mod(basis.entries, op.entries.T, basis.p), basis.p) for op in ops
        ]
        grown = vstack([basis, *images]).row_space()
        if grown.rows == basis.rows:
            return basis
        basis = grown
    return basis


def solve_linear(
    matrix: FpMatrix,
    mode: SolveMode = SolveMode.KERNEL,
    operators: Iterable[FpMatrix] = (),
) -> FpMatrix:
    """Kernel basis of ``matrix`` or span closure of its rows, as basis rows."""
    if mode is SolveMode.KERNEL:
        return matrix.kernel()
    closure = span_closure(matrix, operators)
    logger.debug("span closure reached dimension %d of %d", closure.rows, matrix.cols)
    return closure
