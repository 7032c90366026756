"""Named experiments shared by the CLI and the MCP tools.

Each function builds the inputs of one experiment, runs the engines and
returns an ``ExperimentReport``. Nothing here prints or exits.
"""

import logging
import math
import time
from collections.abc import Sequence

import numpy as np

from . import adversary, dual, hybrid, poly, qsim, recording
from .boolfn import (
    BooleanFunction,
    Family,
    Relation,
    bits_to_index,
    block_sensitivity,
    deterministic_query_complexity,
    exact_degree,
    index_to_bits,
    make_named,
)
from .errors import ValidationError
from .models import Assertion, ExperimentReport
from .settings import settings

logger = logging.getLogger(__name__)


def _report(command: str, **parameters) -> ExperimentReport:
    return ExperimentReport(
        command=command, parameters=parameters, tolerances=settings.tolerances()
    )


def _finish(report: ExperimentReport, started: float) -> ExperimentReport:
    report.elapsed_s = time.perf_counter() - started
    return report


def named_function(name: str, n: int = None, v: int = None) -> BooleanFunction:
    """A named Boolean function; relations (SEARCH, COLLISION) are rejected."""
    f = make_named(name, n=n, v=v)
    if isinstance(f, Relation):
        raise ValidationError(f"{name} is a relation, not a Boolean function", field="fn")
    return f


def parse_bits(text: str, n: int) -> list[int]:
    """'0110' lists x_1 first."""
    text = text.strip()
    if len(text) != n or set(text) - {"0", "1"}:
        raise ValidationError(f"expected {n} bits of 0/1, got '{text}'", field="x")
    return [int(c) for c in text]


# === fn ===


def function_info(f: BooleanFunction) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("fn info", f=f.name, n=f.n)
    deg = exact_degree(f)
    report.results = {**f.describe(), "degree": deg}
    if f.n <= settings.dqc_max_n:
        depth, tree = deterministic_query_complexity(f)
        report.results["D"] = depth
        report.results["decision_tree"] = tree.render()
        report.assertions.append(Assertion.at_most("deg <= D", deg, depth))
    else:
        report.notes.append(f"D(f) skipped: n > {settings.dqc_max_n}")
    return _finish(report, started)


def function_bs(f: BooleanFunction) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("fn bs", f=f.name, n=f.n)
    bs = block_sensitivity(f)
    x = bits_to_index(bs.witness)
    insensitive = 0
    for block in bs.blocks:
        mask = sum(1 << (i - 1) for i in block)
        insensitive += int(f(x ^ mask) == f(x))
    covered = [i for block in bs.blocks for i in block]
    report.assertions.append(Assertion.at_most("insensitive blocks", insensitive, 0))
    report.assertions.append(
        Assertion.at_most("overlapping coordinates", len(covered) - len(set(covered)), 0)
    )
    report.results = bs.model_dump()
    return _finish(report, started)


def function_degree(f: BooleanFunction, eps: float = 1 / 3) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("fn degree", f=f.name, n=f.n, eps=eps)
    report.results["degree"] = exact_degree(f)
    if f.n <= settings.adeg_max_n:
        result = poly.approx_degree(f, eps)
        report.results["adeg"] = result.adeg
        report.assertions.extend(poly.degree_sandwich(f, eps))
    else:
        report.notes.append(f"approximate degree skipped: n > {settings.adeg_max_n}")
    return _finish(report, started)


# === sim ===


def _success_rows(alg: qsim.QueryAlgorithm, f: BooleanFunction, report: ExperimentReport):
    success = qsim.success_probability(alg, f)
    report.assertions.append(
        Assertion.at_least("worst-case success", success.worst, 2 / 3, settings.identity_tol)
    )
    report.results.update(worst_success=success.worst, per_input=success.per_input)
    return success


def simulate(alg: qsim.QueryAlgorithm, f: BooleanFunction = None) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("sim run", algorithm=alg.name, n=alg.n, m=alg.m, d=alg.d, T=alg.T)
    if alg.m == 2:
        report.results["acceptance"] = qsim.acceptance_probabilities(alg).tolist()
    if f is not None:
        _success_rows(alg, f, report)
    return _finish(report, started)


def grover_experiment(n: int) -> ExperimentReport:
    started = time.perf_counter()
    alg = qsim.grover_or(n)
    report = _report("sim grover", n=n, T=alg.T, d=alg.d)
    _success_rows(alg, make_named("OR", n=n), report)
    report.results["T"] = alg.T
    report.results["T_over_sqrt_n"] = alg.T / math.sqrt(n)
    if n <= 3:
        worst = max(
            qsim.oracle_equivalence_deviation(index_to_bits(x, n), n) for x in range(2**n)
        )
        report.assertions.append(Assertion.at_most("oracle equivalence", worst, 0.0, 1e-12))
    return _finish(report, started)


def deutsch_experiment() -> ExperimentReport:
    started = time.perf_counter()
    alg = qsim.deutsch_parity()
    report = _report("sim deutsch", T=alg.T)
    success = qsim.success_probability(alg, make_named("PARITY", n=2))
    report.assertions.append(Assertion.close_to("exact success", success.worst, 1.0, 1e-12))
    report.results = {"worst_success": success.worst, "T": alg.T}
    return _finish(report, started)


# === hybrid ===


def hybrid_pair(
    alg: qsim.QueryAlgorithm, x: Sequence[int], y: Sequence[int], f: BooleanFunction = None
) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("hybrid trace", algorithm=alg.name, x=list(x), y=list(y))
    trace = hybrid.hybrid_trace(alg, x, y, f)
    report.assertions.extend(trace.assertions)
    report.assertions.extend(hybrid.hybrid_of_hybrids_check(alg, x, y))
    report.results = {
        "distances": trace.distances,
        "cross_terms": trace.cross_terms,
        "average_witness_probability": hybrid.query_weight_average(alg, x, y),
    }
    return _finish(report, started)


def or_hybrid_experiment(n: int, alg: qsim.QueryAlgorithm = None) -> ExperimentReport:
    """Aggregated OR progress plus the query-weight certificate of every pair (0^n, e_i)."""
    default = alg is None
    alg = alg or qsim.grover_or(n)
    f = make_named("OR", n=n)
    report = hybrid.or_hybrid_report(alg, n)
    zero = [0] * n
    sums = []
    for i in range(n):
        e_i = [int(j == i) for j in range(n)]
        trace = hybrid.hybrid_trace(alg, zero, e_i, f)
        certificate = hybrid.query_weight_certificate(alg, f, zero, e_i)
        report.assertions.extend(
            a.model_copy(update={"name": f"{a.name} (e_{i + 1})"})
            for a in [*trace.assertions, *certificate.assertions]
        )
        sums.append(certificate.value)
    report.results["query_weight_sums"] = sums
    if default and n >= 4:
        report.assertions.extend(hybrid.grover_weight_growth(n))
    return report


def bs_hybrid_experiment(f: BooleanFunction, alg: qsim.QueryAlgorithm = None) -> ExperimentReport:
    return hybrid.bs_hybrid_report(alg or qsim.classical_lookup(f), f)


# === poly ===


def extract_experiment(alg: qsim.QueryAlgorithm) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("poly extract", algorithm=alg.name, n=alg.n, T=alg.T)
    p = poly.acceptance_polynomial(alg)
    deviation = float(np.max(np.abs(p.values() - qsim.acceptance_probabilities(alg))))
    report.assertions.append(Assertion.at_most("interpolation error", deviation, 0.0, 1e-10))
    report.assertions.append(poly.acceptance_degree_check(p, alg.T))
    report.results = {
        "degree": p.degree(tol=settings.identity_tol),
        "coefficients": {
            "{" + ",".join(str(i) for i in sorted(s)) + "}": c
            for s, c in p.coefficients(tol=settings.identity_tol).items()
        },
    }
    return _finish(report, started)


def adeg_experiment(f: BooleanFunction, eps: float = 1 / 3) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("poly adeg", f=f.name, n=f.n, eps=eps)
    result = poly.approx_degree(f, eps)
    report.assertions.extend(result.assertions)
    report.results = {"adeg": result.adeg, "optima": result.optima}
    return _finish(report, started)


def symmetric_values(family: str, n: int) -> np.ndarray:
    """Values on Hamming weights 0..n of a symmetric family."""
    k = np.arange(n + 1)
    family = Family(family.upper())
    if family is Family.OR:
        return (k > 0).astype(float)
    if family is Family.AND:
        return (k == n).astype(float)
    if family is Family.PARITY:
        return (k % 2).astype(float)
    if family is Family.MAJ:
        return (k > n // 2).astype(float)
    raise ValidationError(f"{family.value} is not a symmetric family", field="fn")


def symmetric_experiment(family: str, n: int, eps: float = 1 / 3) -> ExperimentReport:
    """Univariate approximate degree and the derivative-based degree bound on its witness."""
    started = time.perf_counter()
    report = _report("poly sym", f=family, n=n, eps=eps)
    values = symmetric_values(family, n)
    result = poly.symmetric_approx_degree(n, values, eps)
    report.assertions.extend(result.assertions)
    report.results = {"adeg": result.adeg, "optima": result.optima}
    if np.any(values[1:] != values[:-1]):
        bound = poly.ez_rc_degree_bound(result.witness, n, -eps, 1 + eps, 1 - 2 * eps)
        report.assertions.extend(bound.assertions)
        report.results["degree_lower_bound"] = bound.bound
    if family.upper() == "OR":
        report.assertions.extend(poly.or_witness_check(poly.chebyshev_or_witness(n), n))
    return _finish(report, started)


def dual_polynomial_experiment(f: BooleanFunction, d: int) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("poly dual-check", f=f.name, n=f.n, d=d)
    phi, check = poly.lp_dual_polynomial(f, d)
    report.assertions.extend(check.assertions)
    report.results = {
        "correlation": check.correlation,
        "implied_adeg": check.implied_adeg,
        "phi": phi.values.tolist(),
    }
    return _finish(report, started)


def distinguish_experiment(
    n: int, T: int, count: int = 1, seed: int = 0, dist: poly.InputDistribution = None
) -> ExperimentReport:
    """Distinguishing advantage of random algorithms between the uniform distribution and ``dist``."""
    started = time.perf_counter()
    dist = dist or poly.even_parity_distribution(n)
    k = poly.k_wise_independence(dist)
    report = _report("poly distinguish", n=n, T=T, count=count, seed=seed, dist=dist.name)
    uniform = poly.InputDistribution.uniform(n)
    rng = np.random.default_rng(seed)
    advantages = []
    for _ in range(count):
        alg = qsim.random_algorithm(n, T, seed=rng)
        advantages.append(poly.distinguishing_advantage(alg, uniform, dist))
    worst = max(advantages)
    if 2 * T <= k:
        report.assertions.append(Assertion.at_most("distinguishing advantage", worst, 0.0, 1e-10))
    else:
        report.notes.append(f"2T = {2 * T} exceeds independence {k}: no bound asserted")
    report.results = {"k_wise": k, "max_advantage": worst, "advantages": advantages}
    return _finish(report, started)


# === record ===


def _random_phase(n: int, m: int, T: int, d: int, rng) -> qsim.QueryAlgorithm:
    return qsim.random_algorithm(n, T, m=m, d=d, kind="phase", seed=rng)


def recording_experiment(
    n: int, m: int, T: int = 2, d: int = 1, count: int = 1, seed: int = 0
) -> ExperimentReport:
    """Indistinguishability on random algorithms plus the structural checks of R."""
    started = time.perf_counter()
    report = _report("record check", n=n, m=m, T=T, d=d, count=count, seed=seed)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(count):
        check = recording.indistinguishability_check(_random_phase(n, m, T, d, rng))
        worst = max(worst, max(check.results["deviations"]))
        if not check.ok:
            report.assertions.extend(
                a.model_copy(update={"name": f"{a.name} (algorithm {k})"})
                for a in check.assertions
                if not a.passed
            )
    report.assertions.append(
        Assertion.at_most("max indistinguishability deviation", worst, 0.0, settings.structure_tol)
    )
    report.assertions.append(
        Assertion.at_most(
            "recording action closed form", recording.recording_action_deviation(n, m, d), 0.0, 1e-10
        )
    )
    report.assertions.extend(recording.involution_check(n, m))
    report.assertions.extend(recording.decomposition_norm_check(n, m, d, seed=seed))
    report.results = {"max_deviation": worst}
    return _finish(report, started)


def _trace_report(command: str, trace: recording.ProgressTrace, **parameters) -> ExperimentReport:
    report = _report(command, **parameters)
    report.assertions.extend(trace.assertions)
    report.results = {"predicate": trace.predicate, "deltas": trace.deltas, **trace.results}
    return report


def search_experiment(
    n: int, m: int, T: int = 2, seed: int = 0, alg: qsim.QueryAlgorithm = None
) -> ExperimentReport:
    started = time.perf_counter()
    alg = alg or _random_phase(n, m, T, 1, np.random.default_rng(seed))
    trace = recording.search_progress(alg)
    report = _trace_report("record search", trace, n=alg.n, m=alg.m, T=alg.T, algorithm=alg.name)
    return _finish(report, started)


def collision_experiment(n: int, m: int, T: int = 2, seed: int = 0) -> ExperimentReport:
    started = time.perf_counter()
    alg = _random_phase(n, m, T, 1, np.random.default_rng(seed))
    trace = recording.collision_progress(alg)
    report = _trace_report("record collision", trace, n=n, m=m, T=T, seed=seed)
    report.notes.append("final condition for COLLISION is not asserted")
    return _finish(report, started)


# === adv ===


def certificate_for(f: BooleanFunction, v: int = None) -> adversary.AdversaryCertificate:
    """Shipped certificates: OR, AND and the cycle construction for CONNECTIVITY."""
    name = (f.name or "").upper()
    if name.startswith("OR_"):
        return adversary.or_adversary(f.n)
    if name.startswith("AND_"):
        return adversary.negate_certificate(adversary.or_adversary(f.n), complement_inputs=True)
    if name.startswith("CONNECTIVITY") and v is not None:
        graph = adversary.connectivity_cycle_graph(v)
        return adversary.hardness_graph_certificate(graph, f)
    raise ValidationError(
        f"no shipped certificate for {f.name or 'f'}; use 'sdp solve' instead", field="fn"
    )


def realization_for(f: BooleanFunction, v: int = None) -> adversary.VectorRealization:
    """Shipped realizations: OR, AND and CONNECTIVITY."""
    name = (f.name or "").upper()
    if name.startswith("OR_"):
        return adversary.or_realization(f.n)
    if name.startswith("AND_"):
        return adversary.negate_realization(adversary.or_realization(f.n), complement_inputs=True)
    if name.startswith("CONNECTIVITY") and v is not None:
        return adversary.connectivity_realization(v)
    raise ValidationError(
        f"no shipped realization for {f.name or 'f'}; pass a realization file", field="fn"
    )


def ratio_experiment(
    cert: adversary.AdversaryCertificate, w: adversary.VectorRealization = None
) -> ExperimentReport:
    started = time.perf_counter()
    report = _report("adv ratio", f=cert.f.name, n=cert.f.n, support=len(cert.support))
    ratio = adversary.adversary_ratio(cert)
    principal = adversary.principal_eigenvector(cert)
    report.results = {**ratio.model_dump(), "eigenvalue": principal.eigenvalue}
    if principal.note:
        report.notes.append(principal.note)
    if w is not None:
        report.assertions.append(adversary.weak_duality_check(cert, w))
    return _finish(report, started)


def or_adversary_experiment(n: int) -> ExperimentReport:
    """||Gamma|| = sqrt(n), punctured norms 1, pinched against the balanced OR realization."""
    cert = adversary.or_adversary(n)
    w = adversary.or_realization(n)
    report = ratio_experiment(cert, w)
    report.command = "adv or"
    tol = settings.identity_tol
    balanced = adversary.realization_check(adversary.rebalance(w))
    report.assertions.append(Assertion.close_to("norm", report.results["norm"], math.sqrt(n), tol))
    report.assertions.append(
        Assertion.close_to("max punctured norm", report.results["max_punctured_norm"], 1.0, tol)
    )
    report.assertions.append(Assertion.close_to("balanced value", balanced.T, math.sqrt(n), tol))
    if n in (2, 4, 8):
        report.extend(adversary.adversary_progress_check(qsim.grover_or(n), cert).assertions)
    return report


def ambainis_experiment(f: BooleanFunction, v: int = None) -> ExperimentReport:
    started = time.perf_counter()
    name = (f.name or "").upper()
    if name.startswith("OR_"):
        graph = adversary.or_hardness_graph(f.n)
    elif name.startswith("CONNECTIVITY") and v is not None:
        graph = adversary.connectivity_cycle_graph(v)
    else:
        raise ValidationError(f"no shipped hardness graph for {f.name or 'f'}", field="fn")
    report = _report("adv ambainis", f=f.name, graph=graph.name, edges=len(graph.edges))
    result = adversary.ambainis_bound(graph, f)
    report.assertions.extend(result.assertions)
    report.notes.extend(result.notes)
    report.results = result.model_dump(exclude={"assertions", "notes"})
    return _finish(report, started)


def realize_experiment(
    w: adversary.VectorRealization, balance: bool = False, v: int = None
) -> ExperimentReport:
    started = time.perf_counter()
    report = adversary.realization_report(w, balance=balance)
    report.command = "adv rebalance" if balance else "adv realize"
    if v is not None:
        report.assertions.extend(
            adversary.connectivity_value_rows(adversary.realization_check(w), v)
        )
    return _finish(report, started)


def sdp_experiment(f: BooleanFunction) -> ExperimentReport:
    return adversary.sdp_report(f)


def feasibility_experiment(w: adversary.VectorRealization) -> ExperimentReport:
    """Gram matrices of a realization checked as a dual SDP point."""
    started = time.perf_counter()
    report = _report("sdp feas", f=w.f.name, n=w.n, d=w.d)
    check = adversary.dual_feasibility([w.gram(i) for i in range(1, w.n + 1)], w.f)
    report.assertions.extend(check.assertions)
    report.results = check.model_dump(exclude={"assertions"})
    return _finish(report, started)


# === dual ===


def _inputs(f: BooleanFunction, x: int | None) -> list[int] | None:
    if x is None:
        return None
    if not 0 <= x < f.size:
        raise ValidationError(f"input index {x} out of range for n={f.n}", field="x")
    return [x]


def dual_build_experiment(
    w: adversary.VectorRealization, variant: dual.DeltaVariant = "plus"
) -> ExperimentReport:
    started = time.perf_counter()
    system = dual.build_reflection_system(w, variant)
    report = _report("dual build", f=w.f.name, n=w.n, d=w.d, variant=variant)
    report.assertions.extend(system.assertions)
    report.results = {
        "T": system.T,
        "dimension": system.dim,
        "delta_rank": int(round(np.trace(system.delta).real)),
        "ell": dual.phase_estimation_bits(system.T),
        "queries": dual.dual_query_count(system.T),
    }
    return _finish(report, started)


def dual_phasegap_experiment(
    w: adversary.VectorRealization, x: int = None, variant: dual.DeltaVariant = "plus"
) -> ExperimentReport:
    system = dual.build_reflection_system(w, variant)
    report = dual.phase_gap_report(system, _inputs(w.f, x))
    if x is not None and variant == "plus" and not w.f.table[x]:
        t = system.t_minus(x)
        gap = dual.effective_spectral_gap_check(
            system.pi(x), system.delta, t, 1 / (3 * system.T)
        )
        report.assertions.append(gap.assertion)
    return report


def dual_run_experiment(
    w: adversary.VectorRealization, x: int = None, variant: dual.DeltaVariant = "plus"
) -> ExperimentReport:
    return dual.run_dual_algorithm(w, _inputs(w.f, x), variant)


def dual_decompose_experiment(
    w: adversary.VectorRealization, x: int = None, variant: dual.DeltaVariant = "plus"
) -> ExperimentReport:
    started = time.perf_counter()
    system = dual.build_reflection_system(w, variant)
    report = _report("dual decompose", f=w.f.name, n=w.n, d=w.d, variant=variant)
    inputs = _inputs(w.f, x) or range(w.f.size)
    report.assertions.extend(dual.two_query_decomposition_check(system, k) for k in inputs)
    return _finish(report, started)
