"""
modvoa-heisenberg - Heisenberg vertex algebras and their modules over GF(p).

This package builds the Heisenberg vertex algebra V(l, 0) with exact modular
arithmetic, its simple quotients by the ideals J(l, lambda), and the finite
dimensional irreducible modules of the Heisenberg Lie algebra, and verifies
the structural identities with a command line driver.
"""

from modvoa_heisenberg.config import AlgebraConfig, RunConfig, VOAConfig
from modvoa_heisenberg.expr import parse_vector
from modvoa_heisenberg.fock import (
    FockContext,
    FockMonomial,
    FockVector,
    Mode,
    conformal_vector,
    product_nth,
)
from modvoa_heisenberg.heismod import (
    HeisModule,
    ModeSet,
    PolyElement,
    build_irreducible,
    conjugate,
    decompose,
    direct_sum,
)
from modvoa_heisenberg.quotient import LambdaSpec, check_D_stability, normal_form
from modvoa_heisenberg.report import CheckResult, CheckStatus, VerifyReport
from modvoa_heisenberg.suites import Suite, SuiteRunner

__version__ = "0.1.0"
__all__ = [
    "AlgebraConfig",
    "CheckResult",
    "CheckStatus",
    "FockContext",
    "FockMonomial",
    "FockVector",
    "HeisModule",
    "LambdaSpec",
    "Mode",
    "ModeSet",
    "PolyElement",
    "RunConfig",
    "Suite",
    "SuiteRunner",
    "VOAConfig",
    "VerifyReport",
    "build_irreducible",
    "check_D_stability",
    "conformal_vector",
    "conjugate",
    "decompose",
    "direct_sum",
    "normal_form",
    "parse_vector",
    "product_nth",
]
