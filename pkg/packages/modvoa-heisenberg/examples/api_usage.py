"""Example demonstrating programmatic usage of modvoa-heisenberg.

This script computes a few products in V(1, 0) over GF(5), reduces vectors
modulo the ideal J(1, lambda), and splits a disguised module into its
irreducible summands.
"""

import numpy as np

from modvoa_core.field import FpMatrix
from modvoa_heisenberg import (
    FockContext,
    LambdaSpec,
    ModeSet,
    RunConfig,
    Suite,
    SuiteRunner,
    VOAConfig,
    build_irreducible,
    conformal_vector,
    conjugate,
    decompose,
    direct_sum,
    normal_form,
    parse_vector,
    product_nth,
)


def main() -> None:
    """Main example function."""
    ctx = FockContext.create(5)

    print("=== Products in V(1, 0) over GF(5) ===")
    u = parse_vector(ctx, "u1(-1)")
    for n in (-2, -1, 0, 1):
        print(f"  u1(-1)_{n} u1(-1) = {product_nth(ctx, u, n, u)}")
    print(f"  conformal vector: {conformal_vector(ctx)}")
    print()

    print("=== Normal forms modulo J(1, lambda) ===")
    lam = LambdaSpec.from_entries(1, {(1, 1): 2}, 5)
    for text in ("u1(-1)^5", "u1(-5) u1(-2)", "u1(-1)^6 + u1(-3)"):
        print(f"  {text}  ->  {normal_form(ctx, lam, parse_vector(ctx, text))}")
    print()

    print("=== Decomposing a conjugated direct sum ===")
    rng = np.random.default_rng(0)
    modes = ModeSet.of(5, [(1, 1)])
    first = build_irreducible(ctx, modes, lam)
    second = build_irreducible(ctx, modes, LambdaSpec.from_entries(1, {(1, 1): 3}, 5))
    module = direct_sum(first, second)
    module = conjugate(module, FpMatrix.random_invertible(module.dim, 5, rng))
    for summand in decompose(module, 10, rng):
        print(f"  summand of dimension {summand.dim}, lambda = {list(summand.tag.entries)}")
    print()

    print("=== Running a verification suite ===")
    config = VOAConfig.for_algebra(p=5, run=RunConfig(max_weight=2, samples=5))
    report = SuiteRunner(config).run(Suite.PTH_POWER)
    print(report.to_json())


if __name__ == "__main__":
    main()
