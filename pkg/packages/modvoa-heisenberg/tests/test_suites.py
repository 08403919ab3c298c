"""Tests for the verification suites."""

import pytest

from modvoa_heisenberg.config import RunConfig, VOAConfig
from modvoa_heisenberg.fock import (
    ConformalUnavailableError,
    _d_on_monomial,
    _mode_on_monomial,
    _product,
    conformal_vector,
)
from modvoa_heisenberg.heismod import ModeSet
from modvoa_heisenberg.logging import VerifyLogger
from modvoa_heisenberg.quotient import LambdaSpec
from modvoa_heisenberg.report import CheckStatus
from modvoa_heisenberg.suites import Suite, SuiteRunner, check_g_operator, coordinate_pairs

SMALL = RunConfig(
    max_weight=2, exhaustive_weight=1, pair_radius=1, mode_window=1, samples=2, seed=3
)


def _runner(p: int, level: int = 1, lam: LambdaSpec | None = None) -> SuiteRunner:
    config = VOAConfig.for_algebra(p=p, level=level, run=SMALL)
    return SuiteRunner(config, lam, VerifyLogger(name="modvoa.test.suites"))


class TestCoordinatePairs:
    """Tests for coordinate_pairs."""

    def test_skips_multiples_of_p(self) -> None:
        """Depths divisible by p are never leading coordinates."""
        assert coordinate_pairs(3, 1, 81) == [(1, 1), (1, 2), (1, 4), (1, 5)]

    def test_cycles_generators(self) -> None:
        """All generators are used at one depth before the next."""
        assert coordinate_pairs(5, 2, 25) == [(1, 1), (2, 1)]

    def test_never_empty(self) -> None:
        """A limit below p still yields one pair."""
        assert coordinate_pairs(7, 1, 3) == [(1, 1)]


class TestSuiteRunner:
    """Tests for SuiteRunner."""

    def test_axioms_pass(self) -> None:
        """The vertex algebra axioms hold for V(1, 0) at p = 3."""
        report = _runner(3).run(Suite.AXIOMS)
        assert report.passed, report.to_json()
        ids = {r.check_id for r in report.results}
        assert {"borcherds", "skew", "vacuum", "d_composition"} <= ids

    def test_pth_power_pass(self) -> None:
        """The p-th power series identity holds on V and on the quotient."""
        report = _runner(3).run(Suite.PTH_POWER)
        assert report.passed, report.to_json()
        assert any(r.check_id.startswith("quotient_") for r in report.results)

    def test_ideal_without_Lambda(self) -> None:  # noqa: N802
        """Quotient checks are only run when lambda vanishes past depth 1."""
        lam = LambdaSpec.from_entries(1, {(1, 2): 1}, 3)
        report = _runner(3, lam=lam).run(Suite.IDEAL)
        ids = {r.check_id for r in report.results}
        assert "quotient_module" not in ids
        assert "d_stability" in ids

    def test_same_seed_same_report(self) -> None:
        """Reports depend only on configuration and seed."""
        first = _runner(3).run(Suite.PTH_POWER)
        second = _runner(3).run(Suite.PTH_POWER)
        assert first.to_json() == second.to_json()

    def test_unavailable_suite_raises(self) -> None:
        """A single suite that cannot be built raises its precondition error."""
        with pytest.raises(ConformalUnavailableError):
            _runner(3, level=0).run(Suite.CONFORMAL)

    def test_all_tolerates_unavailable(self) -> None:
        """'all' turns unbuildable suites into precondition results."""
        report = _runner(3, level=0).run(Suite.ALL)
        by_id = {r.check_id: r for r in report.results}
        assert by_id["conformal.available"].status is CheckStatus.PRECONDITION
        assert by_id["heisenberg.available"].status is CheckStatus.PRECONDITION
        assert "axioms.borcherds" in by_id

    def test_logger_sees_every_check(self) -> None:
        """Each result is passed to the logger."""
        runner = _runner(3)
        report = runner.run(Suite.AXIOMS)
        assert runner.logger is not None
        assert len(runner.logger.entries) == len(report.results)

    def test_parameters(self) -> None:
        """Parameters echo the algebra, run and lambda."""
        lam = LambdaSpec.from_entries(1, {(1, 1): 2}, 3)
        params = _runner(3, lam=lam).parameters()
        assert params["p"] == 3
        assert params["seed"] == 3
        assert params["lambda"] == [[1, 1, 2]]

    def test_caches_cleared_after_run(self) -> None:
        """Memoized products do not outlive a suite run."""
        report = _runner(3).run(Suite.AXIOMS)
        assert report.results
        for cached in (_product, _mode_on_monomial, _d_on_monomial, conformal_vector):
            assert cached.cache_info().currsize == 0


class TestGOperator:
    """Tests for check_g_operator."""

    @pytest.mark.parametrize("pairs", [[(1, 1)], [(1, 1), (1, 2)], [(1, 1), (2, 1)]])
    def test_passes(self, pairs: list[tuple[int, int]]) -> None:
        """The homotopy identities hold on every monomial."""
        assert check_g_operator(ModeSet.of(3, pairs)).passed
