"""CLI entry point for modvoa with .env file support."""

import json
import sys
from pathlib import Path
from typing import Annotated, Any, Optional

import numpy as np
import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from modvoa_core.field import FpMatrix
from modvoa_heisenberg import __version__
from modvoa_heisenberg.config import LogConfig, RunConfig, VOAConfig
from modvoa_heisenberg.expr import ExpressionSyntaxError, parse_vector
from modvoa_heisenberg.fock import FockContext, FockVector, product_nth
from modvoa_heisenberg.formats import load_lambda, load_module, save_module
from modvoa_heisenberg.heismod import (
    ConditionC0Error,
    DecompositionError,
    HeisModule,
    ModeSet,
    build_irreducible,
    conjugate,
    decompose,
    direct_sum,
    validate,
)
from modvoa_heisenberg.logging import VerifyLogger
from modvoa_heisenberg.quotient import LambdaSpec, normal_form
from modvoa_heisenberg.report import CheckStatus, VerifyReport
from modvoa_heisenberg.suites import Suite, SuiteRunner, coordinate_pairs

console = Console()
err_console = Console(stderr=True)
app = typer.Typer(
    name="modvoa",
    help="""Heisenberg vertex algebras over GF(p): verification, products and modules.

Expressions use the monomial grammar: factors u<i>(-<n>)[^<e>] separated by
spaces, terms joined by '+', an optional '<c>*' coefficient, and '1' for the
vacuum.

Examples:
  modvoa verify axioms --p 5 --dim 2 --max-weight 3 --seed 7
  modvoa product "u1(-1)" 1 "u1(-1)" --p 5
  modvoa build --p 3 --copies 2 --conjugate --output double.json
  modvoa decompose double.json
""",
    no_args_is_help=True,
)


# Type aliases for reusable options
POpt = Annotated[int, typer.Option("--p", help="Characteristic, a prime below 2**20")]
DimOpt = Annotated[int, typer.Option("--dim", "-d", help="Dimension d of h")]
LevelOpt = Annotated[int, typer.Option("--level", "-l", help="Level l")]
GramOpt = Annotated[
    Optional[str],
    typer.Option(
        "--gram",
        help="Gram matrix: diagonal '1,2' or rows '1,0;0,1' (default identity)",
    ),
]
LambdaOpt = Annotated[
    Optional[Path],
    typer.Option("--lambda", help="JSON file with the characters lambda0 and lambda"),
]
Lambda0Opt = Annotated[
    Optional[str],
    typer.Option("--lambda0", help="Zero-mode character as a comma separated list"),
]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed for the random generator")]


def parse_ints(text: str, option: str) -> list[int]:
    """Parse a comma separated list of integers."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"{option} expects integers separated by commas") from e


def parse_gram(text: str | None) -> list[int] | list[list[int]] | None:
    if text is None:
        return None
    if ";" in text:
        return [parse_ints(row, "--gram") for row in text.split(";")]
    return parse_ints(text, "--gram")


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """Parse 'gen:depth' pairs such as '1:1,1:2,2:1'."""
    pairs: list[tuple[int, int]] = []
    for item in text.split(","):
        gen, sep, depth = item.strip().partition(":")
        if not sep:
            raise typer.BadParameter(f"mode {item!r} is not of the form gen:depth")
        try:
            pairs.append((int(gen), int(depth)))
        except ValueError as e:
            raise typer.BadParameter(f"mode {item!r} is not of the form gen:depth") from e
    return pairs


def build_config(
    p: int,
    dim: int,
    level: int,
    gram: str | None,
    lambda_file: Path | None,
    lambda0: str | None,
    run: RunConfig | None = None,
    log_file: Path | None = None,
) -> tuple[VOAConfig, LambdaSpec | None]:
    """Build a VOAConfig and the optional characters from parsed options."""
    zero_char = parse_ints(lambda0, "--lambda0") if lambda0 is not None else None
    lam: LambdaSpec | None = None
    if lambda_file is not None:
        if not lambda_file.exists():
            raise typer.BadParameter(f"lambda file not found: {lambda_file}")
        data = load_lambda(lambda_file)
        if (data.p, data.dim) != (p, dim):
            raise typer.BadParameter(
                f"lambda file is for p={data.p}, dim={data.dim}; options give p={p}, dim={dim}"
            )
        if zero_char is None:
            zero_char = data.lambda0
        spec = data.to_spec()
        lam = LambdaSpec.from_entries(dim, spec.as_dict(), p, zero_char)
    kwargs: dict[str, Any] = {"run": run or RunConfig()}
    if log_file is not None:
        kwargs["logging"] = LogConfig(log_file=log_file)
    config = VOAConfig.for_algebra(p, dim, level, parse_gram(gram), zero_char, **kwargs)
    return config, lam


def make_context(
    p: int,
    dim: int,
    level: int,
    gram: str | None,
    lambda_file: Path | None,
    lambda0: str | None,
) -> tuple[FockContext, LambdaSpec | None]:
    try:
        config, lam = build_config(p, dim, level, gram, lambda_file, lambda0)
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e
    return config.to_context(), lam


def parse_expression(ctx: FockContext, text: str, name: str) -> FockVector:
    try:
        return parse_vector(ctx, text)
    except ExpressionSyntaxError as e:
        caret = " " * e.position + "^"
        raise typer.BadParameter(f"{e}\n  {e.text}\n  {caret}", param_hint=name) from e


def print_report(
    report: VerifyReport, logger: VerifyLogger, timings: bool, verbose: bool = False
) -> None:
    """Print a report as rich tables, with a panel for every failing check.

    verbose adds the logger's per-check table with suites and durations.
    """
    table = Table(title=f"Suite: {report.suite}")
    table.add_column("Check", style="bold")
    table.add_column("Instances", justify="right")
    table.add_column("Status")
    table.add_column("Detail", style="dim")
    colors = {"pass": "green", "fail": "red", "precondition": "yellow", "error": "magenta"}
    for result in report.results:
        status = result.status.value
        table.add_row(
            result.check_id,
            str(result.instances),
            f"[{colors[status]}]{status}[/]",
            result.detail,
        )
    console.print(table)

    for status in (CheckStatus.FAIL, CheckStatus.ERROR):
        for entry in logger.get_entries(status=status):
            logger.print_entry(entry)
    if verbose:
        logger.print_summary()

    verdict = "[green]passed[/]" if report.passed else f"[red]{len(report.failures)} failing[/]"
    line = f"[bold]{report.suite}:[/] {verdict}"
    if timings and report.wall_time is not None:
        line += f" [dim]in {report.wall_time:.2f}s[/]"
    console.print(line)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"modvoa {__version__}")
        raise typer.Exit()


@app.callback()
def main_callback(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            callback=version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = False,
    env: Annotated[
        Optional[Path],
        typer.Option("--env", "-e", help="Path to .env file to load environment variables from"),
    ] = None,
) -> None:
    """Heisenberg vertex algebras over GF(p)."""
    if env and env.exists():
        load_dotenv(env)
        err_console.print(f"[dim]Loaded environment from {env}[/]")
    elif env:
        err_console.print(f"[yellow]Warning: .env file not found at {env}[/]")


@app.command()
def verify(
    suite: Annotated[Suite, typer.Argument(help="Suite to run")],
    p: POpt = 3,
    dim: DimOpt = 1,
    level: LevelOpt = 1,
    gram: GramOpt = None,
    lambda_file: LambdaOpt = None,
    lambda0: Lambda0Opt = None,
    max_weight: Annotated[
        int, typer.Option("--max-weight", help="Largest weight of sampled vectors")
    ] = 3,
    exhaustive_weight: Annotated[
        int, typer.Option("--exhaustive-weight", help="Weight bound for exhaustive triples")
    ] = 2,
    mode_window: Annotated[
        int, typer.Option("--mode-window", help="Window for mode and series checks")
    ] = 2,
    samples: Annotated[int, typer.Option("--samples", help="Random samples per check")] = 20,
    seed: SeedOpt = 0,
    text: Annotated[bool, typer.Option("--text", help="Print rich tables instead of JSON")] = False,
    timings: Annotated[bool, typer.Option("--timings", help="Include wall time")] = False,
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="With --text, also print per-check durations")
    ] = False,
    log_file: Annotated[
        Optional[Path], typer.Option("--log-file", help="Also write check logs to this file")
    ] = None,
) -> None:
    """Run a verification suite and print its report."""
    try:
        run = RunConfig(
            max_weight=max_weight,
            exhaustive_weight=exhaustive_weight,
            mode_window=mode_window,
            samples=samples,
            seed=seed,
        )
        config, lam = build_config(p, dim, level, gram, lambda_file, lambda0, run, log_file)
        log = config.logging
        logger = VerifyLogger(
            level=log.level,
            log_file=str(log.log_file) if log.log_file else None,
            format=log.format,
            log_checks=log.log_checks or text,
            console=console,
        )
        runner = SuiteRunner(config, lam, logger if log.enabled or text else None)
        report = runner.run(suite)
    except (ValueError, ValidationError) as e:
        raise typer.BadParameter(str(e)) from e

    if text:
        print_report(report, logger, timings, verbose)
    else:
        typer.echo(report.to_json(include_timing=timings))
    if not report.passed:
        raise typer.Exit(1)


@app.command(context_settings={"ignore_unknown_options": True})
def product(
    u: Annotated[str, typer.Argument(help="Left factor u")],
    n: Annotated[int, typer.Argument(help="Product index n")],
    v: Annotated[str, typer.Argument(help="Right factor v")],
    p: POpt = 3,
    dim: DimOpt = 1,
    level: LevelOpt = 1,
    gram: GramOpt = None,
    lambda_file: LambdaOpt = None,
    lambda0: Lambda0Opt = None,
) -> None:
    """Print the n-th product u_n v, reduced to normal form when --lambda is given."""
    ctx, lam = make_context(p, dim, level, gram, lambda_file, lambda0)
    left = parse_expression(ctx, u, "U")
    right = parse_expression(ctx, v, "V")
    result = product_nth(ctx, left, n, right)
    if lam is not None:
        result = normal_form(ctx, lam, result)
    typer.echo(str(result))


@app.command("normal-form")
def normal_form_command(
    expr: Annotated[str, typer.Argument(help="Vector of V(l, 0)")],
    p: POpt = 3,
    dim: DimOpt = 1,
    level: LevelOpt = 1,
    gram: GramOpt = None,
    lambda_file: LambdaOpt = None,
    lambda0: Lambda0Opt = None,
) -> None:
    """Print the normal form of EXPR modulo J(l, lambda) (lambda = 0 by default)."""
    ctx, lam = make_context(p, dim, level, gram, lambda_file, lambda0)
    vector = parse_expression(ctx, expr, "EXPR")
    typer.echo(str(normal_form(ctx, lam or LambdaSpec(ctx.d, (), ctx.zero_char), vector)))


@app.command("decompose")
def decompose_command(
    path: Annotated[Path, typer.Argument(help="HeisModule JSON file")],
    samples: Annotated[
        int, typer.Option("--samples", help="Random vectors tried for irreducibility")
    ] = 10,
    seed: SeedOpt = 0,
    as_json: Annotated[bool, typer.Option("--json", help="Print the summands as JSON")] = False,
) -> None:
    """Split a module file into irreducible summands."""
    if not path.exists():
        raise typer.BadParameter(f"module file not found: {path}")
    try:
        module = validate(load_module(path))
    except (ValueError, ValidationError) as e:
        raise typer.BadParameter(str(e), param_hint="PATH") from e

    try:
        summands = decompose(module, samples, np.random.default_rng(seed))
    except (ConditionC0Error, DecompositionError) as e:
        console.print(f"[red]Decomposition failed:[/] {e}")
        raise typer.Exit(1) from e
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="PATH") from e

    total = sum(s.dim for s in summands)
    if as_json:
        data = {
            "dim": module.dim,
            "summands": [
                {
                    "dim": s.dim,
                    "lambda0": list(s.tag.lambda0),
                    "lambda": [list(e) for e in s.tag.entries],
                    "basis": s.basis.to_rows(),
                }
                for s in summands
            ],
        }
        typer.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        table = Table(title=f"Summands of {path.name}")
        table.add_column("#", justify="right")
        table.add_column("Dim", justify="right")
        table.add_column("lambda0")
        table.add_column("lambda")
        for i, s in enumerate(summands, 1):
            entries = ", ".join(f"({g},{n}):{v}" for g, n, v in s.tag.entries) or "0"
            table.add_row(str(i), str(s.dim), str(list(s.tag.lambda0)), entries)
        console.print(table)
        console.print(f"[bold]Total:[/] {total} of {module.dim}")
    if total != module.dim:
        raise typer.Exit(1)


@app.command()
def build(
    output: Annotated[Path, typer.Option("--output", "-o", help="Where to write the module")],
    p: POpt = 3,
    dim: DimOpt = 1,
    level: LevelOpt = 1,
    gram: GramOpt = None,
    lambda_file: LambdaOpt = None,
    lambda0: Lambda0Opt = None,
    modes: Annotated[
        Optional[str],
        typer.Option("--modes", "-m", help="Mode set as gen:depth pairs, e.g. '1:1,1:2'"),
    ] = None,
    copies: Annotated[int, typer.Option("--copies", min=1, help="Number of summands")] = 1,
    shift: Annotated[
        int,
        typer.Option("--shift", help="Add k*shift to lambda at the first mode of copy k"),
    ] = 0,
    conjugate_module: Annotated[
        bool, typer.Option("--conjugate", help="Conjugate by a random invertible matrix")
    ] = False,
    mode_window: Annotated[
        Optional[int], typer.Option("--mode-window", help="Window of p-multiple modes")
    ] = None,
    seed: SeedOpt = 0,
) -> None:
    """Write a direct sum of irreducible modules, optionally conjugated, as JSON."""
    ctx, lam = make_context(p, dim, level, gram, lambda_file, lambda0)
    lam = lam or LambdaSpec(ctx.d, (), ctx.zero_char)
    pairs = parse_pairs(modes) if modes else coordinate_pairs(p, dim, 9)
    try:
        mode_set = ModeSet.of(p, pairs)
        first = mode_set.pairs[0]
        summands: list[HeisModule] = []
        for k in range(copies):
            values = {**lam.as_dict(), first: lam.value(*first) + k * shift}
            tag = LambdaSpec.from_entries(ctx.d, values, p, lam.lambda0)
            summands.append(build_irreducible(ctx, mode_set, tag, mode_window))
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e

    module = summands[0]
    for summand in summands[1:]:
        module = direct_sum(module, summand)
    if conjugate_module:
        rng = np.random.default_rng(seed)
        module = conjugate(module, FpMatrix.random_invertible(module.dim, p, rng))
    save_module(output, module)
    err_console.print(f"[green]Wrote[/] module of dimension {module.dim} to {output}")


def main() -> None:
    """Main entry point."""
    try:
        app()
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/]")
    except Exception as e:
        console.print(f"[red]Error:[/] {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
