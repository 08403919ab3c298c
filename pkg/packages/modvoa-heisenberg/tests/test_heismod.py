"""Tests for finite-dimensional Heisenberg modules and their decomposition."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modvoa_core.field import FpMatrix, vstack
from modvoa_heisenberg.fock import FockContext, Mode
from modvoa_heisenberg.heismod import (
    ConditionC0Error,
    DecompositionError,
    HeisModule,
    IncompatibleFamilyError,
    ModeSet,
    ModuleInvariantError,
    NonIntegrableError,
    PolyElement,
    VacuumPreconditionError,
    build_irreducible,
    central_blocks,
    check_C0,
    check_level_relation,
    conjugate,
    cyclic_summand,
    decompose,
    direct_sum,
    find_intertwiner,
    integrate_family,
    is_irreducible,
    monomial_images,
    repair_vacuum,
    restrict,
    validate,
    vacuum_space,
)
from modvoa_heisenberg.quotient import LambdaSpec, quotient_module_matrices


def irreducible(
    p: int, pairs: list[tuple[int, int]], values: dict[tuple[int, int], int] | None = None
) -> HeisModule:
    ctx = FockContext.create(p)
    lam = LambdaSpec.from_entries(1, values or {}, p)
    return build_irreducible(ctx, ModeSet.of(p, pairs), lam)


class TestModeSet:
    """Tests for ModeSet."""

    def test_sorted(self) -> None:
        """Pairs are kept sorted."""
        modes = ModeSet.of(3, [(1, 2), (1, 1)])
        assert modes.pairs == ((1, 1), (1, 2))
        assert modes.size == 9
        assert (1, 2) in modes

    def test_rejects_p_multiple(self) -> None:
        """Depths divisible by p are central, not coordinates."""
        with pytest.raises(ValueError):
            ModeSet.of(3, [(1, 3)])

    def test_rejects_duplicates(self) -> None:
        """Every pair appears once."""
        with pytest.raises(ValueError):
            ModeSet.of(5, [(1, 1), (1, 1)])

    def test_index_matches_order(self) -> None:
        """index() numbers exponent vectors in enumeration order."""
        modes = ModeSet.of(3, [(1, 1), (1, 2)])
        assert [modes.index(e) for e in modes.exponent_vectors()] == list(range(9))


class TestPolyElement:
    """Tests for truncated polynomials."""

    def test_multiply_x_wraps(self) -> None:
        """x^p = lambda^p."""
        modes = ModeSet.of(3, [(1, 1)])
        f = PolyElement.one(modes)
        for _ in range(3):
            f = f.multiply_x((1, 1), 2)
        assert f == PolyElement.one(modes).scale(8)

    def test_partial(self) -> None:
        """d/dx x^2 = 2x."""
        modes = ModeSet.of(5, [(1, 1)])
        x = PolyElement.variable(modes, (1, 1))
        square = x.multiply_x((1, 1))
        assert square.partial((1, 1)) == x.scale(2)
        assert PolyElement.one(modes).partial((1, 1)).is_zero()

    def test_g_operator_inverts(self) -> None:
        """n d g f = f for f free of x^(p-1)."""
        modes = ModeSet.of(5, [(1, 2)])
        f = PolyElement.from_terms(modes, {(0,): 3, (2,): 1})
        assert f.is_integrable((1, 2))
        assert f.g_operator((1, 2)).partial((1, 2)).scale(2) == f

    def test_g_operator_drops_top(self) -> None:
        """x^(p-1) is not in the image of d/dx."""
        modes = ModeSet.of(3, [(1, 1)])
        top = PolyElement.from_terms(modes, {(2,): 1})
        assert not top.is_integrable((1, 1))
        assert top.g_operator((1, 1)).is_zero()

    def test_vector_round_trip(self) -> None:
        """to_vector and from_vector agree on coordinates."""
        modes = ModeSet.of(3, [(1, 1), (1, 2)])
        f = PolyElement.random(modes, np.random.default_rng(3))
        assert PolyElement.from_vector(modes, f.to_vector()) == f

    def test_random_without_constant(self) -> None:
        """constant_term=False zeroes the constant."""
        modes = ModeSet.of(5, [(1, 1)])
        f = PolyElement.random(modes, np.random.default_rng(0), constant_term=False)
        assert f.constant_term == 0

    def test_printing(self) -> None:
        """Variables print as x<gen>_<depth>."""
        modes = ModeSet.of(3, [(1, 1), (1, 2)])
        f = PolyElement.from_terms(modes, {(0, 0): 1, (2, 1): 2})
        assert str(f) == "1 + 2*x1_1^2*x1_2"

    def test_rejects_bad_exponents(self) -> None:
        """Exponents stay below p."""
        with pytest.raises(ValueError):
            PolyElement.from_terms(ModeSet.of(3, [(1, 1)]), {(3,): 1})


class TestBuildIrreducible:
    """Tests for the irreducible model P[T, lambda]."""

    @pytest.mark.parametrize("p, pairs", [(3, [(1, 1)]), (3, [(1, 1), (1, 2)]), (5, [(1, 1)])])
    def test_level_relation(self, p: int, pairs: list[tuple[int, int]]) -> None:
        """[u(m), u(n)] = m l delta_(m+n, 0) on P[T, lambda]."""
        module = irreducible(p, pairs, {(1, 1): 1})
        assert module.dim == p ** len(pairs)
        assert check_level_relation(module).passed
        assert validate(module) is module

    @pytest.mark.parametrize("p, pairs", [(3, [(1, 1)]), (3, [(1, 1), (1, 2)]), (5, [(1, 1)])])
    def test_irreducible(self, p: int, pairs: list[tuple[int, int]]) -> None:
        """P[T, lambda] is irreducible and P + P is not."""
        module = irreducible(p, pairs, {(1, 1): 2})
        rng = np.random.default_rng(0)
        assert is_irreducible(module, 20, rng)
        assert not is_irreducible(direct_sum(module, module), 20, rng)

    def test_irreducible_logs_skipped_enumeration(self, caplog: pytest.LogCaptureFixture) -> None:
        """Past the enumeration limit only sampled vectors are tested, with a debug record."""
        module = irreducible(3, [(1, 1)])
        with caplog.at_level(logging.DEBUG, logger="modvoa_heisenberg.heismod"):
            assert is_irreducible(module, 5, np.random.default_rng(1), enumeration_limit=1)
        assert any("enumeration limit 1" in r.getMessage() for r in caplog.records)

    def test_vacuum_space_is_constants(self) -> None:
        """The vacuum space is spanned by the constant polynomial."""
        module = irreducible(3, [(1, 1), (1, 2)])
        omega = vacuum_space(module)
        assert omega.rows == 1
        assert omega.contains_row([1] + [0] * 8)

    def test_monomial_images_of_vacuum(self) -> None:
        """x^e 1 runs through the monomial basis."""
        module = irreducible(3, [(1, 1), (1, 2)], {(1, 1): 1})
        assert monomial_images(module, [1] + [0] * 8) == FpMatrix.identity(9, 3)

    def test_rejects_level_zero(self) -> None:
        """Level p is level 0."""
        ctx = FockContext.create(3, level=3)
        with pytest.raises(ValueError):
            build_irreducible(ctx, ModeSet.of(3, [(1, 1)]), LambdaSpec.zero(1))

    def test_rejects_non_diagonal(self) -> None:
        """The model needs a diagonal form."""
        ctx = FockContext.create(5, 2, gram=[[1, 1], [1, 2]])
        with pytest.raises(ValueError):
            build_irreducible(ctx, ModeSet.of(5, [(1, 1)]), LambdaSpec.zero(2))

    def test_matches_quotient(self) -> None:
        """The truncated quotient of V(l, 0) realizes P[T, lambda]."""
        p = 3
        ctx = FockContext.create(p)
        lam = LambdaSpec.from_entries(1, {(1, 1): 2}, p)
        modes = ModeSet.of(p, [(1, 1), (1, 2)])
        _, matrices = quotient_module_matrices(ctx, lam, modes.pairs)
        model = build_irreducible(ctx, modes, lam)
        for mode, matrix in matrices.items():
            assert model.action(mode) == matrix


class TestHeisModule:
    """Tests for module invariants and constructions."""

    def test_shape_validated(self) -> None:
        """Matrices must be dim x dim over GF(p)."""
        with pytest.raises(ModuleInvariantError):
            HeisModule(3, 1, 1, (1,), 2, {Mode(1, 1): FpMatrix.zeros(3, 3, 3)})

    def test_gram_length_validated(self) -> None:
        """One gram entry per generator."""
        with pytest.raises(ModuleInvariantError):
            HeisModule(3, 2, 1, (1,), 1, {})

    def test_broken_level_relation(self) -> None:
        """validate names the failing bracket."""
        module = irreducible(3, [(1, 1)])
        broken = dict(module.actions)
        broken[Mode(1, 1)] = broken[Mode(1, 1)].scale(2)
        with pytest.raises(ModuleInvariantError, match=r"u1\(-1\)|u1\(1\)"):
            validate(module.with_actions(broken, module.dim))

    def test_undeclared_modes_act_by_zero(self) -> None:
        """action() of an undeclared mode is the zero matrix."""
        module = irreducible(3, [(1, 1)])
        assert module.action(Mode(1, 7)).is_zero()

    def test_restrict_requires_invariance(self) -> None:
        """The span of x alone is not a submodule."""
        module = irreducible(3, [(1, 1)])
        with pytest.raises(DecompositionError):
            restrict(module, FpMatrix.from_rows([[0, 1, 0]], 3))

    def test_conjugate_preserves_relations(self) -> None:
        """g A g^-1 is again a module."""
        module = irreducible(5, [(1, 1)], {(1, 1): 3})
        g = FpMatrix.random_invertible(5, 5, np.random.default_rng(2))
        assert check_level_relation(conjugate(module, g)).passed


class TestCentralCharacters:
    """Tests for condition C0 and central blocks."""

    def test_blocks_split_characters(self) -> None:
        """P + P' splits into two blocks tagged by lambda and lambda'."""
        p = 3
        first = irreducible(p, [(1, 1)], {(1, 1): 1})
        second = irreducible(p, [(1, 1)], {(1, 1): 2})
        blocks = central_blocks(direct_sum(first, second))
        assert sorted(b.dim for b in blocks) == [3, 3]
        assert {b.tag.value(1, 1) for b in blocks} == {1, 2}

    def test_c0_passes(self) -> None:
        """P[T, lambda] satisfies C0."""
        assert check_C0(irreducible(3, [(1, 1), (1, 2)], {(1, 1): 1})).passed

    def test_c0_fails_on_nonzero_central_mode(self) -> None:
        """u(p) must act by zero."""
        module = HeisModule(3, 1, 1, (1,), 1, {Mode(1, 3): FpMatrix.identity(1, 3)})
        assert not check_C0(module).passed

    def test_non_semisimple_central_operator(self) -> None:
        """A Jordan block for u(-p) breaks C0."""
        jordan = FpMatrix.from_rows([[1, 1], [0, 1]], 3)
        module = HeisModule(3, 1, 1, (1,), 2, {Mode(1, -3): jordan})
        with pytest.raises(ConditionC0Error):
            central_blocks(module)
        with pytest.raises(ConditionC0Error):
            decompose(module)


class TestDecompose:
    """Tests for complete reducibility."""

    def test_irreducible_is_one_summand(self) -> None:
        """decompose(P) returns P itself."""
        module = irreducible(3, [(1, 1)], {(1, 1): 1})
        summands = decompose(module)
        assert len(summands) == 1
        assert summands[0].dim == 3
        assert summands[0].tag == module.central

    @pytest.mark.parametrize("pairs", [[(1, 1)], [(1, 1), (1, 2)]])
    def test_conjugated_sum(self, pairs: list[tuple[int, int]]) -> None:
        """Random conjugations of P + P' split into two summands of the right characters."""
        p = 3
        first = irreducible(p, pairs, {(1, 1): 0})
        second = irreducible(p, pairs, {(1, 1): 1})
        rng = np.random.default_rng(11)
        for _ in range(5):
            g = FpMatrix.random_invertible(first.dim * 2, p, rng)
            summands = decompose(conjugate(direct_sum(first, second), g), 5, rng)
            assert [s.dim for s in summands] == [p ** len(pairs)] * 2
            assert sorted(s.tag.value(1, 1) for s in summands) == [0, 1]
            stacked = summands[0].basis.row_space()
            assert stacked.rank() == p ** len(pairs)

    def test_equal_characters(self) -> None:
        """P + P has a two-dimensional vacuum space and two summands."""
        module = irreducible(3, [(1, 1)])
        double = direct_sum(module, module)
        assert vacuum_space(double).rows == 2
        assert len(decompose(double)) == 2

    def test_cyclic_summand(self) -> None:
        """U(h) w for a vacuum vector w has dimension p^|T|."""
        module = irreducible(5, [(1, 1)])
        double = direct_sum(module, module)
        w = vacuum_space(double).entries[0]
        assert cyclic_summand(double, w).rows == 5

    def test_intertwiner(self) -> None:
        """Conjugate copies are isomorphic; different characters are not."""
        p = 3
        module = irreducible(p, [(1, 1)], {(1, 1): 1})
        g = FpMatrix.random_invertible(3, p, np.random.default_rng(5))
        other = conjugate(module, g)
        x = find_intertwiner(module, other)
        assert x is not None
        for mode in module.actions:
            assert other.action(mode) @ x == x @ module.action(mode)
        assert find_intertwiner(module, irreducible(p, [(1, 1)], {(1, 1): 2})) is None


class TestIntegration:
    """Tests for integrate_family and repair_vacuum."""

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000), p=st.sampled_from([3, 5]))
    def test_round_trip(self, seed: int, p: int) -> None:
        """Differentiating and integrating recovers f with zero constant term."""
        modes = ModeSet.of(p, [(1, 1), (1, 2)])
        f = PolyElement.random(modes, np.random.default_rng(seed), constant_term=False)
        family = {pair: f.partial(pair).scale(pair[1]) for pair in modes}
        assert integrate_family(modes, family) == f

    def test_order_independent(self) -> None:
        """The integration order does not matter."""
        modes = ModeSet.of(5, [(1, 1), (1, 2)])
        f = PolyElement.random(modes, np.random.default_rng(9), constant_term=False)
        family = {pair: f.partial(pair).scale(pair[1]) for pair in modes}
        assert integrate_family(modes, family, [(1, 2), (1, 1)]) == f

    def test_non_integrable(self) -> None:
        """x^(p-1) in its own variable has no antiderivative."""
        modes = ModeSet.of(3, [(1, 1)])
        family = {(1, 1): PolyElement.from_terms(modes, {(2,): 1})}
        with pytest.raises(NonIntegrableError):
            integrate_family(modes, family)

    def test_incompatible(self) -> None:
        """Mixed partials must agree."""
        modes = ModeSet.of(3, [(1, 1), (1, 2)])
        family = {
            (1, 1): PolyElement.variable(modes, (1, 2)),
            (1, 2): PolyElement.zero(modes),
        }
        with pytest.raises(IncompatibleFamilyError):
            integrate_family(modes, family)

    def test_repair_vacuum(self) -> None:
        """A planted perturbation h0 of a vacuum vector is recovered exactly."""
        p = 3
        module = irreducible(p, [(1, 1), (1, 2)])
        double = direct_sum(module, module)
        omega = vacuum_space(double)
        rng = np.random.default_rng(4)
        for _ in range(10):
            h0 = np.zeros(double.dim, dtype=np.int64)
            for g in range(omega.rows):
                f = PolyElement.random(module.modes, rng, constant_term=False)
                h0 = (h0 + monomial_images(double, omega.entries[g]).T.apply(f.to_vector())) % p
            w = (rng.integers(0, p, size=omega.rows) @ omega.entries) % p
            h = repair_vacuum(double, omega, (w + h0) % p)
            assert np.array_equal(h, h0)

    def test_repair_needs_direct_generators(self) -> None:
        """Repeated generators do not give a direct sum."""
        module = irreducible(3, [(1, 1)])
        omega = vacuum_space(module)
        twice = FpMatrix.from_rows([omega.entries[0], omega.entries[0]], 3)
        with pytest.raises(VacuumPreconditionError):
            repair_vacuum(module, twice, [0, 1, 0])


@pytest.mark.slow
class TestReducibilityAtScale:
    """Decomposition and vacuum repair at full trial counts."""

    @pytest.mark.parametrize("pairs", [[(1, 1)], [(1, 1), (1, 2)]])
    def test_conjugated_sums(self, pairs: list[tuple[int, int]]) -> None:
        """20 random conjugations of P + P' each split into exactly two summands."""
        p = 3
        first = irreducible(p, pairs, {(1, 1): 0})
        second = irreducible(p, pairs, {(1, 1): 2})
        total = direct_sum(first, second)
        rng = np.random.default_rng(2024)
        for _ in range(20):
            g = FpMatrix.random_invertible(total.dim, p, rng)
            summands = decompose(conjugate(total, g), 10, rng)
            assert [s.dim for s in summands] == [p ** len(pairs)] * 2
            assert sorted(s.tag.value(1, 1) for s in summands) == [0, 2]
            stacked = vstack([s.basis for s in summands])
            assert stacked.rank() == total.dim

    def test_repair_vacuum(self) -> None:
        """Planted perturbations are recovered in 50 random instances."""
        p = 3
        module = irreducible(p, [(1, 1), (1, 2)])
        double = direct_sum(module, module)
        omega = vacuum_space(double)
        rng = np.random.default_rng(50)
        for _ in range(50):
            h0 = np.zeros(double.dim, dtype=np.int64)
            for g in range(omega.rows):
                f = PolyElement.random(module.modes, rng, constant_term=False)
                h0 = (h0 + monomial_images(double, omega.entries[g]).T.apply(f.to_vector())) % p
            w = (rng.integers(0, p, size=omega.rows) @ omega.entries) % p
            assert np.array_equal(repair_vacuum(double, omega, (w + h0) % p), h0)
