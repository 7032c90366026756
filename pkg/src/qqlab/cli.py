"""qqlab command line.

Every command prints one report to stdout (or ``--out``) and exits with 0 when
all assertions pass, 1 when one fails and 2 on a usage error.
"""

import logging
import sys
from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Annotated

import typer

from . import __version__
from . import experiments as ex
from .boolfn import vertices_for_edges
from .errors import QQLabError, ValidationError, log_experiment
from .formats import load_algorithm, load_distribution, load_realization, load_truth_table
from .formats import render_report, save_realization
from .models import ExperimentReport
from .settings import settings

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"
    table = "table"


class Variant(str, Enum):
    plus = "plus"
    minus = "minus"


FormatOpt = Annotated[OutputFormat, typer.Option("--format", help="Report format")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="Write the report to this file")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", help="DEBUG logging on stderr")]
FnOpt = Annotated[str | None, typer.Option("--fn", help="Named family (or, and, parity, ...)")]
NOpt = Annotated[int | None, typer.Option("--n", help="Input length")]
VOpt = Annotated[int | None, typer.Option("--v", help="Vertex count for connectivity")]
TableOpt = Annotated[Path | None, typer.Option("--table", help="Truth-table file")]
RealizationOpt = Annotated[Path | None, typer.Option("--realization", help="Realization JSON")]
AlgOpt = Annotated[Path | None, typer.Option("--alg", help="Algorithm JSON")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed for random algorithms")]


app = typer.Typer(no_args_is_help=True, help="Exact desk-scale quantum query complexity lab.")
fn_app = typer.Typer(no_args_is_help=True, help="Boolean functions")
sim_app = typer.Typer(no_args_is_help=True, help="Query algorithm simulation")
hybrid_app = typer.Typer(no_args_is_help=True, help="Hybrid-argument progress traces")
poly_app = typer.Typer(no_args_is_help=True, help="Polynomial method")
record_app = typer.Typer(no_args_is_help=True, help="Recording method")
adv_app = typer.Typer(no_args_is_help=True, help="Adversary certificates and realizations")
dual_app = typer.Typer(no_args_is_help=True, help="Dual-adversary algorithm")
sdp_app = typer.Typer(no_args_is_help=True, help="Dual adversary SDP")

for sub, name in (
    (fn_app, "fn"),
    (sim_app, "sim"),
    (hybrid_app, "hybrid"),
    (poly_app, "poly"),
    (record_app, "record"),
    (adv_app, "adv"),
    (dual_app, "dual"),
    (sdp_app, "sdp"),
):
    app.add_typer(sub, name=name)


def _configure_logging(verbose: bool):
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def _emit(
    build: Callable[[], ExperimentReport], fmt: OutputFormat, out: Path | None, verbose: bool
):
    """Run ``build``, render the report and exit with the report status."""
    _configure_logging(verbose)
    try:
        report = build()
    except QQLabError as e:
        typer.echo(f"error [{e.code}]: {e.message}", err=True)
        if e.details:
            typer.echo(f"  details: {e.details}", err=True)
        raise typer.Exit(2)
    text = render_report(report, fmt.value)
    if out:
        out.write_text(text, encoding="utf-8")
        logger.info(f"Report written to {out}")
    else:
        typer.echo(text, nl=False)
    log_experiment(report.command, report.ok, report.elapsed_s, report.failed())
    raise typer.Exit(0 if report.ok else 1)


def _function(fn: str | None, n: int | None, v: int | None, table: Path | None):
    if table is not None:
        return load_truth_table(table)
    if fn is None:
        raise ValidationError("pass --fn (with --n or --v) or --table", field="fn")
    return ex.named_function(fn, n=n, v=v)


def _realization(fn, n, v, table, realization: Path | None):
    if realization is not None:
        w, _ = load_realization(realization)
        return w, None
    f = _function(fn, n, v, table)
    if (f.name or "").upper().startswith("CONNECTIVITY"):
        v = v or vertices_for_edges(f.n)
    else:
        v = None
    return ex.realization_for(f, v), v


def _balanced(fn, n, v, realization: Path | None):
    w, _ = _realization(fn, n, v, None, realization)
    return ex.adversary.rebalance(w)


def _version_callback(value: bool):
    if value:
        typer.echo(f"qqlab {__version__}")
        raise typer.Exit(0)


@app.callback()
def main_callback(
    version: Annotated[
        bool,
        typer.Option("--version", callback=_version_callback, is_eager=True, help="Print the version"),
    ] = False,
):
    """Exact desk-scale quantum query complexity lab."""


# === fn ===


@fn_app.command("info")
def fn_info(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Truth table summary, exact degree and D(f)."""
    _emit(lambda: ex.function_info(_function(fn, n, v, table)), fmt, out, verbose)


@fn_app.command("bs")
def fn_bs(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Exact block sensitivity with witness and blocks."""
    _emit(lambda: ex.function_bs(_function(fn, n, v, table)), fmt, out, verbose)


@fn_app.command("degree")
def fn_degree(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    eps: Annotated[float, typer.Option("--eps")] = 1 / 3,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Exact and approximate degree."""
    _emit(lambda: ex.function_degree(_function(fn, n, v, table), eps), fmt, out, verbose)


# === sim ===


@sim_app.command("run")
def sim_run(
    alg: Annotated[Path, typer.Option("--alg", help="Algorithm JSON")],
    fn: FnOpt = None, n: NOpt = None, table: TableOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Acceptance probabilities of a saved algorithm, and its success on f if given."""

    def build():
        algorithm = load_algorithm(alg)
        f = _function(fn, n or algorithm.n, None, table) if fn or table else None
        return ex.simulate(algorithm, f)

    _emit(build, fmt, out, verbose)


@sim_app.command("grover")
def sim_grover(
    n: Annotated[int, typer.Option("--n")],
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Worst-case success of the coherent OR algorithm."""
    _emit(lambda: ex.grover_experiment(n), fmt, out, verbose)


@sim_app.command("deutsch")
def sim_deutsch(
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """One-query exact PARITY_2."""
    _emit(ex.deutsch_experiment, fmt, out, verbose)


# === hybrid ===


@hybrid_app.command("trace")
def hybrid_trace(
    x: Annotated[str, typer.Option("--x", help="Bits, x_1 first")],
    y: Annotated[str, typer.Option("--y", help="Bits, y_1 first")],
    alg: AlgOpt = None, fn: FnOpt = "or",
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Distances and cross terms for one input pair (coherent OR algorithm by default)."""

    def build():
        n = len(x.strip())
        algorithm = load_algorithm(alg) if alg else ex.qsim.grover_or(n)
        f = ex.named_function(fn, n=algorithm.n) if fn else None
        return ex.hybrid_pair(
            algorithm, ex.parse_bits(x, algorithm.n), ex.parse_bits(y, algorithm.n), f
        )

    _emit(build, fmt, out, verbose)


@hybrid_app.command("or")
def hybrid_or(
    n: Annotated[int, typer.Option("--n")], alg: AlgOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Aggregated OR progress and query-weight certificates."""
    _emit(
        lambda: ex.or_hybrid_experiment(n, load_algorithm(alg) if alg else None), fmt, out, verbose
    )


@hybrid_app.command("bs")
def hybrid_bs(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None, alg: AlgOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Progress over a block-sensitivity witness (classical lookup by default)."""

    def build():
        f = _function(fn, n, v, table)
        return ex.bs_hybrid_experiment(f, load_algorithm(alg) if alg else None)

    _emit(build, fmt, out, verbose)


# === poly ===


@poly_app.command("extract")
def poly_extract(
    alg: AlgOpt = None,
    n: Annotated[int, typer.Option("--n")] = 2,
    T: Annotated[int, typer.Option("--T")] = 1,
    d: Annotated[int, typer.Option("--d")] = 1,
    seed: SeedOpt = 0,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Acceptance polynomial of a saved or seeded random algorithm."""

    def build():
        algorithm = load_algorithm(alg) if alg else ex.qsim.random_algorithm(n, T, d=d, seed=seed)
        return ex.extract_experiment(algorithm)

    _emit(build, fmt, out, verbose)


@poly_app.command("adeg")
def poly_adeg(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    eps: Annotated[float, typer.Option("--eps")] = 1 / 3,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Approximate degree by LP."""
    _emit(lambda: ex.adeg_experiment(_function(fn, n, v, table), eps), fmt, out, verbose)


@poly_app.command("sym")
def poly_sym(
    fn: Annotated[str, typer.Option("--fn")], n: Annotated[int, typer.Option("--n")],
    eps: Annotated[float, typer.Option("--eps")] = 1 / 3,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Symmetric approximate degree and the derivative degree bound."""
    _emit(lambda: ex.symmetric_experiment(fn, n, eps), fmt, out, verbose)


@poly_app.command("dual-check")
def poly_dual_check(
    d: Annotated[int, typer.Option("--d", help="Claimed pure high degree")],
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Dual polynomial from the LP, checked as a degree certificate."""
    _emit(lambda: ex.dual_polynomial_experiment(_function(fn, n, v, table), d), fmt, out, verbose)


@poly_app.command("distinguish")
def poly_distinguish(
    n: Annotated[int, typer.Option("--n")],
    T: Annotated[int, typer.Option("--T")] = 1,
    count: Annotated[int, typer.Option("--count")] = 1,
    seed: SeedOpt = 0,
    dist: Annotated[Path | None, typer.Option("--dist", help="Distribution file")] = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Advantage of random algorithms at telling a distribution from uniform."""

    def build():
        loaded = load_distribution(dist) if dist else None
        return ex.distinguish_experiment(n, T, count, seed, loaded)

    _emit(build, fmt, out, verbose)


# === record ===


@record_app.command("check")
def record_check(
    n: Annotated[int, typer.Option("--n")], m: Annotated[int, typer.Option("--m")],
    T: Annotated[int, typer.Option("--T")] = 2,
    d: Annotated[int, typer.Option("--d")] = 1,
    count: Annotated[int, typer.Option("--count")] = 1,
    seed: SeedOpt = 0,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Indistinguishability and structure of the recording oracle."""
    _emit(lambda: ex.recording_experiment(n, m, T, d, count, seed), fmt, out, verbose)


@record_app.command("search")
def record_search(
    n: Annotated[int, typer.Option("--n")], m: Annotated[int, typer.Option("--m")],
    T: Annotated[int, typer.Option("--T")] = 2,
    seed: SeedOpt = 0, alg: AlgOpt = None,
    solver: Annotated[bool, typer.Option("--solver", help="Use the alphabet-search iterate")] = False,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """SEARCH progress trace."""

    def build():
        if solver:
            return ex.search_experiment(n, m, alg=ex.qsim.search_algorithm(n, m))
        return ex.search_experiment(n, m, T, seed, load_algorithm(alg) if alg else None)

    _emit(build, fmt, out, verbose)


@record_app.command("collision")
def record_collision(
    n: Annotated[int, typer.Option("--n")], m: Annotated[int, typer.Option("--m")],
    T: Annotated[int, typer.Option("--T")] = 2,
    seed: SeedOpt = 0,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """COLLISION progress trace."""
    _emit(lambda: ex.collision_experiment(n, m, T, seed), fmt, out, verbose)


# === adv ===


@adv_app.command("or")
def adv_or(
    n: Annotated[int, typer.Option("--n")],
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """The OR certificate: value sqrt(n), pinched by the balanced realization."""
    _emit(lambda: ex.or_adversary_experiment(n), fmt, out, verbose)


@adv_app.command("ratio")
def adv_ratio(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Adversary ratio of a shipped certificate."""

    def build():
        f = _function(fn, n, v, None)
        return ex.ratio_experiment(ex.certificate_for(f, v))

    _emit(build, fmt, out, verbose)


@adv_app.command("ambainis")
def adv_ambainis(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Ambainis bound of a shipped hardness graph."""
    _emit(lambda: ex.ambainis_experiment(_function(fn, n, v, None), v), fmt, out, verbose)


@adv_app.command("realize")
def adv_realize(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    save: Annotated[Path | None, typer.Option("--save", help="Write the realization JSON")] = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Feasibility and T0/T1 of a realization."""

    def build():
        w, vertices = _realization(fn, n, v, None, realization)
        if save:
            save_realization(w, save)
        return ex.realize_experiment(w, balance=False, v=vertices)

    _emit(build, fmt, out, verbose)


@adv_app.command("rebalance")
def adv_rebalance(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Value of a realization before and after rebalancing."""

    def build():
        w, _ = _realization(fn, n, v, None, realization)
        return ex.realize_experiment(w, balance=True)

    _emit(build, fmt, out, verbose)


# === dual ===


XOpt = Annotated[int | None, typer.Option("--x", help="Single input (table index)")]
VariantOpt = Annotated[Variant, typer.Option("--variant", help="Vectors spanning Delta")]


@dual_app.command("build")
def dual_build(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    variant: VariantOpt = Variant.plus,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Build the reflection system and check its invariants."""

    def build():
        w = _balanced(fn, n, v, realization)
        return ex.dual_build_experiment(w, variant.value)

    _emit(build, fmt, out, verbose)


@dual_app.command("phasegap")
def dual_phasegap(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    x: XOpt = None, variant: VariantOpt = Variant.plus,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Spectral mass of s near phase 0 for every input."""

    def build():
        w = _balanced(fn, n, v, realization)
        return ex.dual_phasegap_experiment(w, x, variant.value)

    _emit(build, fmt, out, verbose)


@dual_app.command("run")
def dual_run(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    x: XOpt = None, variant: VariantOpt = Variant.plus,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Phase-estimation algorithm: per-input success."""

    def build():
        w = _balanced(fn, n, v, realization)
        return ex.dual_run_experiment(w, x, variant.value)

    _emit(build, fmt, out, verbose)


@dual_app.command("decompose")
def dual_decompose(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, realization: RealizationOpt = None,
    x: XOpt = None, variant: VariantOpt = Variant.plus,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """R_x against two oracle calls around fixed unitaries."""

    def build():
        w = _balanced(fn, n, v, realization)
        return ex.dual_decompose_experiment(w, x, variant.value)

    _emit(build, fmt, out, verbose)


# === sdp ===


@sdp_app.command("solve")
def sdp_solve(
    fn: FnOpt = None, n: NOpt = None, v: VOpt = None, table: TableOpt = None,
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Solve the dual adversary SDP."""
    _emit(lambda: ex.sdp_experiment(_function(fn, n, v, table)), fmt, out, verbose)


@sdp_app.command("feas")
def sdp_feas(
    realization: Annotated[Path, typer.Option("--realization", help="Realization JSON")],
    fmt: FormatOpt = OutputFormat.json, out: OutOpt = None, verbose: VerboseOpt = False,
):
    """Check the Gram matrices of a realization as a dual SDP point."""
    _emit(lambda: ex.feasibility_experiment(load_realization(realization)[0]), fmt, out, verbose)


def main():
    app()


if __name__ == "__main__":
    main()
