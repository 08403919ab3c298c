"""Verification suites: fixed sets of checkers run under one configuration and seed."""

from __future__ import annotations

import itertools
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from modvoa_core.field import FpMatrix
from modvoa_core.formal import Window
from modvoa_heisenberg.config import VOAConfig
from modvoa_heisenberg.fock import (
    FockAction,
    FockContext,
    FockVector,
    ModuleAction,
    basis,
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
    clear_caches,
    conformal_vector,
    random_vector,
    virasoro_bracket_check,
)
from modvoa_heisenberg.heismod import (
    ModeSet,
    PolyElement,
    build_irreducible,
    check_C0,
    check_level_relation,
    conjugate,
    decompose,
    direct_sum,
    find_intertwiner,
    integrate_family,
    is_irreducible,
    monomial_images,
    repair_vacuum,
    vacuum_space,
)
from modvoa_heisenberg.logging import VerifyLogger
from modvoa_heisenberg.quotient import (
    LambdaSpec,
    QuotientAction,
    check_d_power_closed_form,
    check_generators_l0_stable,
    check_maximality,
    check_normal_form,
    check_pth_power_series,
    check_quotient_module_property,
    check_stability_iff,
    ideal_span_oracle,
    quotient_module_matrices,
)
from modvoa_heisenberg.report import CheckResult, VerifyReport, combine, merge

Check = tuple[str, Callable[[], CheckResult]]


class Suite(str, Enum):
    """Verification suites selectable from the command line."""

    AXIOMS = "axioms"
    CONFORMAL = "conformal"
    IDEAL = "ideal"
    PTH_POWER = "pth-power"
    HEISENBERG = "heisenberg"
    ALL = "all"


def coordinate_pairs(p: int, d: int, limit: int) -> list[tuple[int, int]]:
    """Leading coordinates (gen, depth), p not dividing depth, while p^|pairs| <= limit."""
    pairs: list[tuple[int, int]] = []
    for depth in itertools.count(1):
        if depth % p == 0:
            continue
        for gen in range(1, d + 1):
            if p ** (len(pairs) + 1) > limit:
                return pairs or [(1, 1)]
            pairs.append((gen, depth))


def _ok_if(
    check_id: str, condition: bool, payload: dict[str, Any], instances: int = 1
) -> CheckResult:
    if condition:
        return CheckResult.ok(check_id, instances)
    return CheckResult.failed(check_id, payload, instances)


@dataclass
class SuiteRunner:
    """Runs suites for one configuration; every suite reseeds from ``config.run.seed``."""

    config: VOAConfig
    lam: LambdaSpec | None = None
    logger: VerifyLogger | None = None
    ctx: FockContext = field(init=False)

    def __post_init__(self) -> None:
        self.ctx = self.config.to_context()
        if self.lam is None:
            self.lam = LambdaSpec(self.ctx.d, (), self.ctx.zero_char)

    @property
    def lam_spec(self) -> LambdaSpec:
        assert self.lam is not None
        return self.lam

    def parameters(self) -> dict[str, Any]:
        return {
            **self.config.algebra.model_dump(),
            **self.config.run.model_dump(),
            "lambda": [list(e) for e in self.lam_spec.entries],
        }

    def run(self, suite: Suite) -> VerifyReport:
        if suite is Suite.ALL:
            parts = [s for s in Suite if s is not Suite.ALL]
            return merge(suite.value, [self._run_one(s, tolerate=True) for s in parts])
        return self._run_one(suite, tolerate=False)

    def _run_one(self, suite: Suite, tolerate: bool) -> VerifyReport:
        builders: dict[Suite, Callable[[np.random.Generator], list[Check]]] = {
            Suite.AXIOMS: self._axioms,
            Suite.CONFORMAL: self._conformal,
            Suite.IDEAL: self._ideal,
            Suite.PTH_POWER: self._pth_power,
            Suite.HEISENBERG: self._heisenberg,
        }
        start = time.perf_counter()
        rng = np.random.default_rng(self.config.run.seed)
        try:
            checks = builders[suite](rng)
        except ValueError as exc:
            if not tolerate:
                raise
            message = str(exc)
            checks = [("available", lambda: CheckResult.precondition("available", message))]
        try:
            results = [self._timed(suite.value, check_id, fn) for check_id, fn in checks]
        finally:
            clear_caches()
        return VerifyReport(suite.value, self.parameters(), results, time.perf_counter() - start)

    def _timed(self, suite: str, check_id: str, fn: Callable[[], CheckResult]) -> CheckResult:
        start = time.perf_counter()
        try:
            result = fn().renamed(check_id)
        except ValueError as exc:
            result = CheckResult.error(check_id, exc)
        if self.logger is not None:
            self.logger.log_check(suite, result, (time.perf_counter() - start) * 1000)
        return result

    # -- shared inputs ------------------------------------------------------

    def _basis_vectors(self, max_weight: int) -> list[FockVector]:
        return [FockVector.monomial(self.ctx.p, m) for m in basis(self.ctx, max_weight)]

    def _pairs(self) -> list[tuple[int, int]]:
        r = self.config.run.pair_radius
        return [(m, n) for m in range(-r, r + 1) for n in range(-r, r + 1)]

    def _window(self) -> Window:
        return Window.symmetric(self.config.run.mode_window)

    # -- suites -------------------------------------------------------------

    def _axioms(self, rng: np.random.Generator) -> list[Check]:
        ctx, run = self.ctx, self.config.run
        vecs = self._basis_vectors(run.exhaustive_weight)
        triples = [
            (u, v, w)
            for u, v, w in itertools.product(vecs, repeat=3)
            if u.weight + v.weight + w.weight <= run.exhaustive_weight
        ]
        sampled = [
            tuple(random_vector(ctx, run.max_weight, rng, terms=2) for _ in range(3))
            for _ in range(run.samples)
        ]
        r = run.pair_radius
        sampled_pairs = [
            (int(rng.integers(-r, r + 1)), int(rng.integers(-r, r + 1))) for _ in sampled
        ]
        ns = range(-r, r + 1)

        def borcherds() -> CheckResult:
            exhaustive = (check_borcherds(ctx, u, v, w, self._pairs()) for u, v, w in triples)
            random_part = (
                check_borcherds(ctx, u, v, w, [pair])
                for (u, v, w), pair in zip(sampled, sampled_pairs, strict=True)
            )
            return combine("borcherds", itertools.chain(exhaustive, random_part))

        def skew() -> CheckResult:
            return combine(
                "skew",
                (
                    check_skew(ctx, u, v, ns)
                    for u, v in itertools.product(vecs, repeat=2)
                    if u.weight + v.weight <= run.exhaustive_weight
                ),
            )

        def conjugation() -> CheckResult:
            return combine(
                "conjugation",
                (
                    check_conjugation(ctx, u, v, k, self._window())
                    for u, v in itertools.product(vecs, repeat=2)
                    for k in (1, 2)
                    if u.weight + v.weight <= run.exhaustive_weight
                ),
            )

        def weak_commutativity() -> CheckResult:
            return combine(
                "weak_commutativity",
                (
                    check_weak_comm_generators(ctx, i, j, self._window(), w)
                    for i in ctx.generators()
                    for j in ctx.generators()
                    for w in vecs
                ),
            )

        ks = range(-run.mode_window, run.mode_window + 1)
        monomials = basis(ctx, run.exhaustive_weight)
        action = FockAction(ctx.algebra())
        return [
            ("borcherds", borcherds),
            ("skew", skew),
            ("conjugation", conjugation),
            ("weak_commutativity", weak_commutativity),
            ("central_modes", lambda: check_central_modes(ctx, ks, vecs, self._window())),
            ("creation", lambda: check_creation(ctx, vecs, 3)),
            ("vacuum", lambda: check_vacuum_property(ctx, vecs, range(-r - 1, r + 1))),
            (
                "vacuum_like",
                lambda: check_vacuum_like(
                    action, FockVector.vacuum(ctx.p), vecs, 2 * run.exhaustive_weight + 1
                ),
            ),
            ("d_composition", lambda: check_D_composition(ctx, vecs, ctx.p + 1)),
            ("grading", lambda: check_grading(ctx, monomials, ns)),
        ]

    def _conformal(self, rng: np.random.Generator) -> list[Check]:
        ctx, run = self.ctx, self.config.run
        conformal_vector(ctx.algebra())
        vecs = self._basis_vectors(run.exhaustive_weight)
        vecs += [random_vector(ctx, run.max_weight, rng) for _ in range(run.samples // 4)]
        r = run.pair_radius
        ms = range(-r, r + 1)

        def virasoro() -> CheckResult:
            return combine(
                "virasoro",
                (virasoro_bracket_check(ctx, m, n, vecs) for m in ms for n in ms),
            )

        return [
            ("virasoro", virasoro),
            ("l_minus_one", lambda: check_L_minus_one(ctx, vecs)),
            ("l0_grading", lambda: check_L0_grading(ctx, basis(ctx, run.max_weight))),
            ("l_bracket_modes", lambda: check_L_bracket_modes(ctx, ms, ms, vecs)),
            (
                "l0_generators",
                lambda: check_generators_l0_stable(ctx, self.lam_spec, 2 * ctx.p),
            ),
        ]

    def _ideal(self, rng: np.random.Generator) -> list[Check]:
        ctx, run, lam = self.ctx.algebra(), self.config.run, self.lam_spec
        p = ctx.p
        vectors = [random_vector(ctx, run.max_weight + p, rng) for _ in range(run.samples)]

        def grid() -> CheckResult:
            specs = (
                LambdaSpec.from_entries(ctx.d, {(1, 1): a, (1, 2): b}, p)
                for a in range(p)
                for b in (0, 1)
            )
            return combine("d_stability_grid", (check_stability_iff(ctx, s) for s in specs))

        checks: list[Check] = [
            ("normal_form", lambda: check_normal_form(ctx, lam, vectors)),
            ("d_power_closed_form", lambda: check_d_power_closed_form(ctx, 3, 3 * p)),
            ("d_stability", lambda: check_stability_iff(ctx, lam)),
            ("d_stability_grid", grid),
            ("ideal_span", lambda: ideal_span_oracle(ctx, lam, run.max_weight)),
        ]
        if lam.in_Lambda:
            pairs = coordinate_pairs(p, ctx.d, 81)
            checks += [
                (
                    "quotient_module",
                    lambda: check_quotient_module_property(
                        ctx, lam, self._window(), run.max_weight
                    ),
                ),
                (
                    "maximality",
                    lambda: check_maximality(ctx, lam, pairs, max(run.samples // 4, 1), rng),
                ),
            ]
        return checks

    def _pth_power(self, rng: np.random.Generator) -> list[Check]:
        ctx, run, lam = self.ctx, self.config.run, self.lam_spec
        window = Window.symmetric(run.mode_window * ctx.p)
        plain = self._basis_vectors(1)
        plain += [random_vector(ctx, 2, rng, terms=2) for _ in range(max(run.samples // 10, 1))]
        actions: list[tuple[str, ModuleAction, list[FockVector]]] = [
            ("adjoint", FockAction(ctx), plain)
        ]
        if lam.in_Lambda:
            quotient = QuotientAction(ctx.algebra(), lam)
            actions.append(("quotient", quotient, [quotient.reduce(v) for v in plain]))
        return [
            (f"{name}_n{n}", _series_check(f"{name}_n{n}", action, n, window, vectors))
            for name, action, vectors in actions
            for n in (1, 2)
        ]

    def _heisenberg(self, rng: np.random.Generator) -> list[Check]:
        ctx, run, lam = self.ctx, self.config.run, self.lam_spec
        p = ctx.p
        modes = ModeSet.of(p, coordinate_pairs(p, ctx.d, 9))
        first_pair = modes.pairs[0]
        irreducible = build_irreducible(ctx, modes, lam)
        shifted = LambdaSpec.from_entries(
            ctx.d, {**lam.as_dict(), first_pair: lam.value(*first_pair) + 1}, p, lam.lambda0
        )
        other = build_irreducible(ctx, modes, shifted)
        double = direct_sum(irreducible, irreducible)
        mixed = direct_sum(irreducible, other)

        def character(tag: LambdaSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
            keys = [*modes.pairs] + [
                (i, kp) for i in ctx.generators() for kp in range(p, irreducible.mode_window + 1, p)
            ]
            return tag.lambda0, tuple(tag.value(*k) for k in keys)

        def irreducibility() -> CheckResult:
            payload = {"pairs": [list(x) for x in modes]}
            if not is_irreducible(irreducible, run.samples, rng):
                return CheckResult.failed("irreducible", {**payload, "module": "P"})
            if is_irreducible(double, run.samples, rng):
                return CheckResult.failed("irreducible", {**payload, "module": "P+P"}, 2)
            return CheckResult.ok("irreducible", 2)

        def vacuum_dims() -> CheckResult:
            dims = [vacuum_space(m).rows for m in (irreducible, double, mixed)]
            return _ok_if("vacuum_space", dims == [1, 2, 2], {"dims": dims}, 3)

        def decomposition() -> CheckResult:
            expected = sorted([character(lam), character(shifted)])
            count = 0
            for source in [double] + [mixed] * run.samples:
                g = FpMatrix.random_invertible(source.dim, p, rng)
                summands = decompose(conjugate(source, g), max(run.samples // 4, 1), rng)
                count += 1
                dims = [s.dim for s in summands]
                if dims != [modes.size] * 2:
                    return CheckResult.failed("decompose", {"dims": dims}, count)
                tags = sorted(character(s.tag) for s in summands)
                if source is mixed and tags != expected:
                    return CheckResult.failed("decompose", {"tags": repr(tags)}, count)
            return CheckResult.ok("decompose", count)

        def intertwiner() -> CheckResult:
            count = 0
            for summand in decompose(mixed, 1, rng):
                model = build_irreducible(ctx, modes, summand.tag)
                count += 1
                if find_intertwiner(summand.module, model, rng) is None:
                    return CheckResult.failed(
                        "intertwiner", {"tag": [list(e) for e in summand.tag.entries]}, count
                    )
            return CheckResult.ok("intertwiner", count)

        def integration() -> CheckResult:
            for count in range(1, run.samples + 1):
                f = PolyElement.random(modes, rng, constant_term=False)
                family = {pair: f.partial(pair).scale(pair[1]) for pair in modes}
                recovered = integrate_family(modes, family)
                if recovered != f:
                    return CheckResult.failed(
                        "integration", {"f": str(f), "recovered": str(recovered)}, count
                    )
            return CheckResult.ok("integration", run.samples)

        def repair() -> CheckResult:
            omega = vacuum_space(double)
            phi = [monomial_images(double, omega.entries[g]) for g in range(omega.rows)]
            for count in range(1, run.samples + 1):
                planted = [PolyElement.random(modes, rng, constant_term=False) for _ in phi]
                h0 = np.zeros(double.dim, dtype=np.int64)
                for images, f in zip(phi, planted, strict=True):
                    h0 = (h0 + images.T.apply(f.to_vector())) % p
                w = (rng.integers(0, p, size=omega.rows) @ omega.entries) % p
                h = repair_vacuum(double, omega, (w + h0) % p)
                if not np.array_equal(h, h0):
                    return CheckResult.failed(
                        "repair_vacuum",
                        {"planted": [str(f) for f in planted], "h": h.tolist(), "h0": h0.tolist()},
                        count,
                    )
            return CheckResult.ok("repair_vacuum", run.samples)

        def quotient_match() -> CheckResult:
            if not lam.in_Lambda:
                return CheckResult.precondition("quotient_irreducible", "lambda is not in Lambda")
            alg_lam = LambdaSpec(lam.d, lam.entries)
            _, matrices = quotient_module_matrices(ctx.algebra(), alg_lam, modes.pairs)
            model = build_irreducible(ctx.algebra(), modes, alg_lam)
            bad = [str(m) for m, a in matrices.items() if model.action(m) != a]
            return _ok_if("quotient_irreducible", not bad, {"modes": bad}, len(matrices))

        return [
            (
                "level_relation",
                lambda: combine("level_relation", map(check_level_relation, [irreducible, mixed])),
            ),
            ("c0", lambda: combine("c0", map(check_C0, [irreducible, mixed]))),
            ("irreducible", irreducibility),
            ("vacuum_space", vacuum_dims),
            ("decompose", decomposition),
            ("intertwiner", intertwiner),
            ("integration", integration),
            ("g_operator", lambda: check_g_operator(modes)),
            ("repair_vacuum", repair),
            ("quotient_irreducible", quotient_match),
        ]


def _series_check(
    check_id: str,
    action: ModuleAction,
    n: int,
    window: Window,
    vectors: list[FockVector],
) -> Callable[[], CheckResult]:
    def run() -> CheckResult:
        return combine(
            check_id,
            (
                check_pth_power_series(action, i, n, window, vectors)
                for i in action.ctx.generators()
            ),
        )

    return run


def check_g_operator(modes: ModeSet) -> CheckResult:
    """g commutes with foreign partials and n d g f = f on the image of d, on every monomial."""
    count = 0
    for exps in modes.exponent_vectors():
        f = PolyElement.from_terms(modes, {exps: 1})
        for pair in modes:
            if f.is_integrable(pair):
                count += 1
                if f.g_operator(pair).partial(pair).scale(pair[1]) != f:
                    payload = {"f": str(f), "pair": list(pair)}
                    return CheckResult.failed("g_operator", payload, count)
            for other in modes:
                if other == pair:
                    continue
                count += 1
                lhs = f.partial(other).g_operator(pair)
                rhs = f.g_operator(pair).partial(other)
                if lhs != rhs:
                    return CheckResult.failed(
                        "g_operator", {"f": str(f), "pair": list(pair), "other": list(other)}, count
                    )
    return CheckResult.ok("g_operator", count)
