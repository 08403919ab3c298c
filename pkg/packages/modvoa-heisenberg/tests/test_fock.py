"""Tests for the Fock space realization of V(l, 0) and M(l, lambda0)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modvoa_core.field import NotPrimeError
from modvoa_core.formal import Window
from modvoa_heisenberg.fock import (
    ConformalUnavailableError,
    ContextError,
    FockAction,
    FockContext,
    FockMonomial,
    FockVector,
    Mode,
    act_D,
    act_mode,
    basis,
    basis_of_weight,
    basis_vectors,
    check_borcherds,
    check_central_modes,
    check_conjugation,
    check_creation,
    check_D_composition,
    check_grading,
    check_L0_grading,
    check_L_bracket_modes,
    check_L_minus_one,
    check_skew,
    check_vacuum_like,
    check_vacuum_property,
    check_weak_comm_generators,
    conformal_vector,
    product_nth,
    random_vector,
    virasoro_bracket_check,
    virasoro_mode,
)
from modvoa_heisenberg.report import CheckStatus


def gen(p: int, i: int = 1, n: int = 1) -> FockVector:
    return FockVector.generator(p, i, n)


def mono(p: int, exponents: dict[tuple[int, int], int], c: int = 1) -> FockVector:
    return FockVector.monomial(p, FockMonomial.from_exponents(exponents), c)


SMALL = basis_vectors(FockContext.create(3), 2)


class TestFockContext:
    """Tests for FockContext validation."""

    def test_defaults(self) -> None:
        """Identity gram, level 1 and zero character by default."""
        ctx = FockContext.create(5, 2)
        assert ctx.gram == ((1, 0), (0, 1))
        assert ctx.zero_char == (0, 0)
        assert ctx.is_diagonal

    def test_diagonal_gram(self) -> None:
        """A flat gram list is the diagonal."""
        ctx = FockContext.create(7, 2, gram=[2, 3])
        assert ctx.g(1, 1) == 2
        assert ctx.g(2, 2) == 3
        assert ctx.g(1, 2) == 0

    def test_values_reduced(self) -> None:
        """Level and lambda0 are stored mod p."""
        ctx = FockContext.create(5, 1, level=7, zero_char=[-1])
        assert ctx.level == 2
        assert ctx.zero_char == (4,)

    def test_rejects_composite(self) -> None:
        """p must be prime."""
        with pytest.raises(NotPrimeError):
            FockContext.create(4)

    def test_rejects_degenerate_gram(self) -> None:
        """The form must be invertible mod p."""
        with pytest.raises(ContextError):
            FockContext.create(3, 2, gram=[[1, 1], [1, 1]])

    def test_rejects_asymmetric_gram(self) -> None:
        """The form must be symmetric."""
        with pytest.raises(ContextError):
            FockContext.create(5, 2, gram=[[1, 2], [0, 1]])

    def test_rejects_wrong_lambda0_length(self) -> None:
        """lambda0 has one entry per generator."""
        with pytest.raises(ContextError):
            FockContext.create(5, 2, zero_char=[1])

    def test_algebra_drops_character(self) -> None:
        """algebra() is the same context with lambda0 = 0."""
        ctx = FockContext.create(5, 1, zero_char=[3])
        assert ctx.algebra().zero_char == (0,)
        assert ctx.algebra().level == ctx.level


class TestBasis:
    """Tests for PBW monomial enumeration."""

    def test_partition_counts(self) -> None:
        """Weight w monomials of rank 1 are counted by partitions of w."""
        ctx = FockContext.create(3)
        assert [len(basis_of_weight(ctx, w)) for w in range(7)] == [1, 1, 2, 3, 5, 7, 11]

    def test_colored_partitions(self) -> None:
        """Rank 2 weight 2: u1(-2), u2(-2), u1(-1)^2, u2(-1)^2, u1(-1) u2(-1)."""
        ctx = FockContext.create(3, 2)
        assert len(basis_of_weight(ctx, 2)) == 5

    def test_basis_is_cumulative(self) -> None:
        """basis(max_weight) lists every weight up to the bound."""
        ctx = FockContext.create(5)
        assert len(basis(ctx, 3)) == 1 + 1 + 2 + 3
        assert basis(ctx, 0) == [FockMonomial.vacuum()]

    def test_random_vector_is_deterministic(self) -> None:
        """Equal seeds give equal vectors."""
        ctx = FockContext.create(5, 2)
        first = random_vector(ctx, 3, np.random.default_rng(4))
        second = random_vector(ctx, 3, np.random.default_rng(4))
        assert first == second
        assert first.weight <= 3


class TestFockVector:
    """Tests for FockVector arithmetic and printing."""

    def test_printing(self) -> None:
        """Vectors print in the monomial grammar."""
        v = mono(5, {(1, 1): 1, (1, 2): 1}, 2) + FockVector.vacuum(5)
        assert str(v) == "1 + 2*u1(-1) u1(-2)"
        assert str(FockVector.zero(5)) == "0"
        assert str(mono(3, {(2, 1): 2})) == "u2(-1)^2"

    def test_coefficients_reduced(self) -> None:
        """Coefficients live in GF(p) and zeros are dropped."""
        v = gen(3).scale(3)
        assert v.is_zero()
        assert gen(5).scale(-1).coefficient(FockMonomial(((1, 1, 1),))) == 4

    def test_from_exponents_validates(self) -> None:
        """Depths and generators start at 1."""
        with pytest.raises(ValueError):
            FockMonomial.from_exponents({(0, 1): 1})
        with pytest.raises(ValueError):
            FockMonomial.from_exponents({(1, 0): 1})

    def test_weight(self) -> None:
        """Weight is the sum of depth times exponent."""
        m = FockMonomial.from_exponents({(1, 2): 2, (2, 3): 1})
        assert m.weight == 7


class TestModes:
    """Tests for mode actions and the divided-power derivations."""

    def test_creation_mode(self) -> None:
        """Negative modes multiply."""
        ctx = FockContext.create(5)
        assert act_mode(ctx, Mode(1, -2), gen(5)) == mono(5, {(1, 1): 1, (1, 2): 1})

    def test_annihilation_mode(self) -> None:
        """u(1) u(-1)^2 1 = 2 l <u, u> u(-1) 1."""
        ctx = FockContext.create(5, level=2, gram=[3])
        image = act_mode(ctx, Mode(1, 1), mono(5, {(1, 1): 2}))
        assert image == gen(5).scale(2 * 2 * 3)

    def test_zero_mode_character(self) -> None:
        """u(0) acts by lambda0 on M(l, lambda0)."""
        ctx = FockContext.create(7, 2, zero_char=[3, 5])
        v = gen(7, 2)
        assert act_mode(ctx, Mode(1, 0), v) == v.scale(3)
        assert act_mode(ctx, Mode(2, 0), v) == v.scale(5)

    def test_orthogonal_generators(self) -> None:
        """u1(1) kills u2(-1) for a diagonal form."""
        ctx = FockContext.create(5, 2)
        assert act_mode(ctx, Mode(1, 1), gen(5, 2)).is_zero()

    def test_derivation(self) -> None:
        """D^(k) u(-1) = u(-1-k) and D kills the vacuum."""
        ctx = FockContext.create(5)
        assert act_D(ctx, 1, gen(5)) == gen(5, 1, 2)
        assert act_D(ctx, 2, gen(5)) == gen(5, 1, 3)
        assert act_D(ctx, 3, FockVector.vacuum(5)).is_zero()

    def test_derivation_leibniz(self) -> None:
        """D u(-1)^2 = 2 u(-1) u(-2)."""
        ctx = FockContext.create(5)
        assert act_D(ctx, 1, mono(5, {(1, 1): 2})) == mono(5, {(1, 1): 1, (1, 2): 1}, 2)

    def test_derivation_vanishes_in_characteristic(self) -> None:
        """D^(1) u(-1)^p = p u(-1)^(p-1) u(-2) = 0."""
        ctx = FockContext.create(3)
        assert act_D(ctx, 1, mono(3, {(1, 1): 3})).is_zero()

    def test_negative_derivation_rejected(self) -> None:
        """D^(k) needs k >= 0."""
        with pytest.raises(ValueError):
            act_D(FockContext.create(3), -1, gen(3))


class TestProducts:
    """Tests for product_nth."""

    def test_level_product(self) -> None:
        """u(-1)_1 u(-1) = l <u, u> vacuum."""
        ctx = FockContext.create(5)
        assert str(product_nth(ctx, gen(5), 1, gen(5))) == "1"

    def test_vacuum_is_identity(self) -> None:
        """vacuum_(-1) v = v."""
        ctx = FockContext.create(5)
        assert product_nth(ctx, FockVector.vacuum(5), -1, gen(5)) == gen(5)

    def test_truncation(self) -> None:
        """u_n v vanishes for n >= wt(u) + wt(v)."""
        ctx = FockContext.create(5)
        assert product_nth(ctx, gen(5), 5, mono(5, {(1, 2): 2})).is_zero()

    def test_normal_ordered_products(self) -> None:
        """u(-1)_(-1) u(-1) = u(-1)^2 and u(-1)_(-2) u(-1) = u(-2) u(-1)."""
        ctx = FockContext.create(5)
        assert product_nth(ctx, gen(5), -1, gen(5)) == mono(5, {(1, 1): 2})
        assert product_nth(ctx, gen(5), -2, gen(5)) == mono(5, {(1, 1): 1, (1, 2): 1})
        assert product_nth(ctx, gen(5), 0, gen(5)).is_zero()

    def test_quadratic_product(self) -> None:
        """(u(-1)^2)_3 u(-1)^2 = 2 vacuum at level 1."""
        ctx = FockContext.create(5)
        square = mono(5, {(1, 1): 2})
        assert product_nth(ctx, square, 3, square) == FockVector.vacuum(5).scale(2)

    def test_module_zero_mode(self) -> None:
        """On M(l, lambda0), u(-1)_0 vacuum = lambda0 vacuum."""
        ctx = FockContext.create(5, zero_char=[2])
        assert product_nth(ctx, gen(5), 0, FockVector.vacuum(5)) == FockVector.vacuum(5).scale(2)


class TestAxiomCheckers:
    """The axiom checkers pass on V(l, 0)."""

    def test_borcherds_exhaustive_small(self) -> None:
        """Borcherds identity on all weight <= 1 triples, |m|, |n| <= 1."""
        ctx = FockContext.create(3)
        vecs = basis_vectors(ctx, 1)
        pairs = [(m, n) for m in range(-1, 2) for n in range(-1, 2)]
        for u in vecs:
            for v in vecs:
                for w in vecs:
                    assert check_borcherds(ctx, u, v, w, pairs).passed

    @settings(max_examples=20, deadline=None)
    @given(
        u=st.sampled_from(SMALL),
        v=st.sampled_from(SMALL),
        w=st.sampled_from(SMALL),
        m=st.integers(min_value=-2, max_value=2),
        n=st.integers(min_value=-2, max_value=2),
    )
    def test_borcherds_sampled(
        self, u: FockVector, v: FockVector, w: FockVector, m: int, n: int
    ) -> None:
        """Borcherds identity on sampled weight <= 2 triples over GF(3)."""
        assert check_borcherds(FockContext.create(3), u, v, w, [(m, n)]).passed

    def test_borcherds_on_module(self) -> None:
        """The Jacobi identity holds on M(l, lambda0)."""
        ctx = FockContext.create(5, zero_char=[2])
        vecs = basis_vectors(ctx, 1)
        pairs = [(m, n) for m in range(-1, 2) for n in range(-1, 2)]
        for u in vecs:
            for v in vecs:
                assert check_borcherds(ctx, u, v, gen(5), pairs).passed

    def test_borcherds_counts_instances(self) -> None:
        """Each (m, n) pair is one instance."""
        result = check_borcherds(FockContext.create(5), gen(5), gen(5), gen(5), [(1, -1), (0, 0)])
        assert result.passed
        assert result.instances == 2

    def test_skew(self) -> None:
        """Skew symmetry on rank 2 basis pairs."""
        ctx = FockContext.create(3, 2)
        vecs = basis_vectors(ctx, 2)
        for u in vecs:
            for v in vecs:
                if u.weight + v.weight <= 2:
                    assert check_skew(ctx, u, v, range(-2, 3)).passed

    def test_conjugation(self) -> None:
        """Y(D^(k) u, x) v is the z^k part of Y(u, x + z) v."""
        ctx = FockContext.create(5)
        for k in (1, 2):
            assert check_conjugation(ctx, gen(5), gen(5), k, Window.symmetric(3)).passed

    def test_weak_commutativity(self) -> None:
        """(x1 - x2)^2 [a(x1), b(x2)] = 0."""
        ctx = FockContext.create(3, 2)
        for w in basis_vectors(ctx, 1):
            assert check_weak_comm_generators(ctx, 1, 2, Window.symmetric(2), w).passed
            assert check_weak_comm_generators(ctx, 1, 1, Window.symmetric(2), w).passed

    def test_weak_commutativity_needs_square(self) -> None:
        """A single factor (x1 - x2) does not kill [a(x1), a(x2)]."""
        ctx = FockContext.create(5)
        result = check_weak_comm_generators(
            ctx, 1, 1, Window.symmetric(2), FockVector.vacuum(5), power=1
        )
        assert result.status is CheckStatus.FAIL
        assert result.check_id == "weak_commutativity_power_1"

    def test_central_modes(self) -> None:
        """u(kp) and u(k)^p are central."""
        ctx = FockContext.create(3)
        vecs = basis_vectors(ctx, 3)
        assert check_central_modes(ctx, range(-1, 2), vecs, Window.symmetric(3)).passed

    def test_vacuum_and_creation(self) -> None:
        """vacuum_n v = delta_(n,-1) v and u_(-k-1) vacuum = D^(k) u."""
        ctx = FockContext.create(5, 2)
        vecs = basis_vectors(ctx, 2)
        assert check_vacuum_property(ctx, vecs, range(-3, 3)).passed
        assert check_creation(ctx, vecs, 3).passed

    def test_vacuum_like(self) -> None:
        """The vacuum is vacuum-like; u(-1) fails the precondition."""
        ctx = FockContext.create(3)
        action = FockAction(ctx)
        vecs = basis_vectors(ctx, 2)
        assert check_vacuum_like(action, FockVector.vacuum(3), vecs, 4).passed
        result = check_vacuum_like(action, gen(3), vecs, 4)
        assert result.status is CheckStatus.PRECONDITION

    def test_vacuum_like_checks_pth_divided_power(self) -> None:
        """u(-5) vacuum at p=5 is killed by D^(1..4) but not by D^(5)."""
        ctx = FockContext.create(5)
        action = FockAction(ctx)
        w = FockVector.generator(5, 1, 5)
        assert all(action.derivation(k, w).is_zero() for k in range(1, 5))
        result = check_vacuum_like(action, w, basis_vectors(ctx, 1), 2)
        assert result.status is CheckStatus.PRECONDITION
        assert result.counterexample is not None
        assert result.counterexample["k"] == 5

    def test_d_composition_and_grading(self) -> None:
        """D^(m) D^(n) = C(m+n, n) D^(m+n) and products are graded."""
        ctx = FockContext.create(3, 2)
        assert check_D_composition(ctx, basis_vectors(ctx, 2), 4).passed
        assert check_grading(ctx, basis(ctx, 2), range(-2, 3)).passed


class TestConformal:
    """Tests for the conformal vector and Virasoro modes."""

    def test_conformal_vector(self) -> None:
        """omega = (1/2) u(-1)^2 at level 1 over GF(5)."""
        ctx = FockContext.create(5)
        assert conformal_vector(ctx) == mono(5, {(1, 1): 2}, 3)

    def test_unavailable_for_p2(self) -> None:
        """1/2 does not exist in GF(2)."""
        with pytest.raises(ConformalUnavailableError):
            conformal_vector(FockContext.create(2))

    def test_unavailable_at_level_zero(self) -> None:
        """Level p reduces to level 0."""
        with pytest.raises(ConformalUnavailableError):
            conformal_vector(FockContext.create(5, level=5))

    def test_l0_eigenvalue(self) -> None:
        """L(0) u(-1)^2 = 2 u(-1)^2."""
        ctx = FockContext.create(5)
        v = mono(5, {(1, 1): 2})
        assert virasoro_mode(ctx, 0, v) == v.scale(2)

    def test_virasoro_relations(self) -> None:
        """[L(m), L(n)] with central charge d on small vectors."""
        ctx = FockContext.create(5, 2)
        vecs = basis_vectors(ctx, 2)
        for m in range(-2, 3):
            for n in range(-2, 3):
                assert virasoro_bracket_check(ctx, m, n, vecs).passed

    def test_l_checks(self) -> None:
        """L(-1) = D, L(0) grades and [L(m), a(n)] = -n a(m+n)."""
        ctx = FockContext.create(7)
        vecs = basis_vectors(ctx, 3)
        assert check_L_minus_one(ctx, vecs).passed
        assert check_L0_grading(ctx, basis(ctx, 4)).passed
        assert check_L_bracket_modes(ctx, range(-2, 3), range(-2, 3), vecs).passed


ACCEPTANCE_ALGEBRAS = [(3, 1, 1), (3, 2, 2), (5, 1, 1), (5, 2, 1)]
ACCEPTANCE_PAIRS = [(m, n) for m in range(-4, 5) for n in range(-4, 5)]


def triples_up_to(ctx: FockContext, max_weight: int) -> list[tuple[FockVector, ...]]:
    """Basis triples whose weights add up to at most max_weight."""
    vecs = basis_vectors(ctx, max_weight)
    return [
        (u, v, w)
        for u in vecs
        for v in vecs
        if u.weight + v.weight <= max_weight
        for w in vecs
        if u.weight + v.weight + w.weight <= max_weight
    ]


@pytest.mark.slow
class TestAxiomsAtScale:
    """Axiom checkers on the full grid of modes [-4, 4]^2 and weight 5."""

    @pytest.mark.parametrize(("p", "d", "level"), ACCEPTANCE_ALGEBRAS)
    def test_borcherds_exhaustive(self, p: int, d: int, level: int) -> None:
        """Borcherds identity on every basis triple of total weight <= 5."""
        ctx = FockContext.create(p, d, level=level)
        for u, v, w in triples_up_to(ctx, 5):
            result = check_borcherds(ctx, u, v, w, ACCEPTANCE_PAIRS)
            assert result.passed, result.to_dict()

    @pytest.mark.parametrize(("p", "d", "level"), ACCEPTANCE_ALGEBRAS)
    def test_skew_exhaustive(self, p: int, d: int, level: int) -> None:
        """Skew symmetry on every basis pair of total weight <= 5."""
        ctx = FockContext.create(p, d, level=level)
        vecs = basis_vectors(ctx, 5)
        for u in vecs:
            for v in vecs:
                if u.weight + v.weight <= 5:
                    result = check_skew(ctx, u, v, range(-4, 5))
                    assert result.passed, result.to_dict()

    @pytest.mark.parametrize("p", [3, 5, 7])
    @pytest.mark.parametrize("d", [1, 2])
    def test_virasoro_relations(self, p: int, d: int) -> None:
        """[L(m), L(n)] with central charge d on the weight <= 5 basis, m, n in [-3, 3]."""
        ctx = FockContext.create(p, d)
        vecs = basis_vectors(ctx, 5)
        for m in range(-3, 4):
            for n in range(-3, 4):
                result = virasoro_bracket_check(ctx, m, n, vecs)
                assert result.passed, result.to_dict()
        assert check_L_minus_one(ctx, vecs).passed
        assert check_L0_grading(ctx, basis(ctx, 5)).passed
