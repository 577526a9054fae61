"""Config-driven experiment runs.

``run`` evaluates the hypotheses of the configured problem, carries out one
task and writes ``report.json`` plus the task's CSV tables to an artifact
store. The return value is the process exit status:

- 0: success
- 1: solver failure (partial outputs removed)
- 2: a hypothesis the task needs does not hold (report still written)
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np
import polars as pl
from tqdm import tqdm

from .artifacts import ArtifactStore, open_store
from .bounds import (
    antisymmetric_lower_bound,
    bound_report,
    interval_sequence_scan,
    linear_energy_min,
    phi_monotone_check,
    symmetry_breaking_criterion,
    upper_bound_curve,
    zero_state_instability,
)
from .config import ExperimentConfig, ProblemConfig
from .eigen import l1_product_certificate, lambda1, scaled_eigenvalue_check, uniqueness_certificate
from .exceptions import (
    CertificateContradiction,
    ConfigError,
    ConvergenceError,
    FlatRegionError,
    NonIntegrableError,
    PreconditionError,
)
from .grid import GridFunction
from .rearrange import MonotoneGrid, verify_odd_rearrangement
from .solve1d import (
    Discretization,
    derivative_comparison,
    hamiltonian_trace,
    hessian_negative_count,
    minimize,
    minimize_antisymmetric,
    multi_start_uniqueness,
    ordering_check,
    shoot,
    uniqueness_certified,
)
from .weights import Constant, HypothesisReport, Problem, Verdict, check_hypotheses

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER_FAILURE = 1
EXIT_PRECONDITION = 2

REPORT_NAME = "report.json"
A_PRIORI_SLACK = 1e-6

THEOREM_KEYS = (
    "unique_odd_increasing",
    "unique_critical_point",
    "increasing_solutions_i",
    "increasing_solutions_ii",
    "increasing_critical_points_odd",
    "convex_energy_unique",
    "odd_rearrangement_decreases",
    "a_priori_bound",
    "antisymmetric_minimizers_excluded",
    "small_data_non_odd",
    "semistable_unique",
)


def mesh_for(L: float, points_per_unit: int) -> int:
    """Even element count with about points_per_unit elements per unit length, at least 64."""
    return max(64, 2 * int(round(points_per_unit * L / 2)))


def theorem_verdicts(p: Problem, hypotheses: HypothesisReport, eigen_mesh: int = 1024) -> dict[str, Verdict]:
    """Applicability verdict of every result, including those decided by the bounds and eigenvalues."""
    verdicts = dict(hypotheses.theorem_verdicts())
    even = hypotheses.even and hypotheses.even_G.holds
    positive = p.m > 0

    bounds = bound_report(p)
    verdicts["antisymmetric_minimizers_excluded"] = Verdict.of(
        positive and even and bounds.C_as is not None, bool(bounds.symmetry_breaking_certified)
    )

    try:
        criterion = symmetry_breaking_criterion(p)
    except PreconditionError as error:
        logger.info("Small-data criterion not applicable: %s", error)
        criterion = None
    verdicts["small_data_non_odd"] = Verdict.of(even and criterion is not None, bool(criterion and criterion.certified))

    certificate = uniqueness_certificate(p, eigen_mesh)
    verdicts["semistable_unique"] = Verdict.of(certificate.strict_margin > 0, certificate.certified)
    return {key: verdicts[key] for key in THEOREM_KEYS}


def audit(config: ExperimentConfig) -> dict[str, Any]:
    """Hypotheses and theorem verdicts of the configured problem."""
    p = config.problem.build()
    hypotheses = check_hypotheses(p, config.grid_points)
    return {
        "problem": p.describe(),
        "hypotheses": hypotheses.to_dict(),
        "theorems": theorem_verdicts(p, hypotheses, config.eigen.mesh),
    }


def _solution_table(p: Problem, u: GridFunction) -> pl.DataFrame:
    x = u.x
    du = u.nodal_derivative()
    a, b = p.a.eval(x), p.b.eval(x)
    hamiltonian = 0.5 * (a * du) ** 2 - a * b * p.G.eval(u.values)
    return pl.DataFrame({"x": x, "u": u.values, "uprime": du, "hamiltonian": hamiltonian})


def _minimize_task(config: ExperimentConfig, p: Problem, hypotheses: HypothesisReport, store: ArtifactStore) -> dict:
    options = config.minimize
    n = config.mesh
    certified = uniqueness_certified(p, config.eigen.mesh)
    multi = multi_start_uniqueness(p, options.presets, n=n, seed=config.seed, certified=certified)
    if not multi.solutions:
        raise ConvergenceError(f"No start converged for presets {options.presets}")
    representatives = multi.representatives()
    best = representatives[0]

    cluster_of = {}
    for k, cluster in enumerate(multi.clusters):
        for i in cluster:
            cluster_of[i] = k
    starts = pl.DataFrame(
        {
            "init": [s.init for s in multi.solutions],
            "cluster": [cluster_of[i] for i in range(len(multi.solutions))],
            "energy": [s.energy for s in multi.solutions],
            "residual_inf": [s.residual_inf for s in multi.solutions],
            "u0": [s.diagnostics.u0 for s in multi.solutions],
            "oddness_defect": [s.diagnostics.oddness_defect for s in multi.solutions],
            "is_increasing": [s.diagnostics.is_increasing for s in multi.solutions],
        }
    )
    store.write_table("solution.csv", _solution_table(p, best.u))
    store.write_table("starts.csv", starts)

    results: dict[str, Any] = {
        "best": best.summary(),
        "distinct_solutions": multi.distinct_solutions,
        "uniqueness_certified": multi.certified,
        "failures": multi.failures,
        "representatives": [s.summary() for s in representatives],
    }

    trace = hamiltonian_trace(p, best, x0=hypotheses.muffin_x0)
    results["hamiltonian"] = {
        "max_drift": trace.max_drift,
        "x0": trace.x0,
        "monotone_defect": trace.monotone_defect,
        "unimodal": trace.unimodal,
    }
    if options.second_order:
        results["best"]["hessian_negative_count"] = hessian_negative_count(Discretization(p, n), best.u.values)

    gap = derivative_comparison(best, p)
    results["derivative_comparison"] = {
        "min_gap": gap.min_gap,
        "x_at_min": gap.x_at_min,
        "binding": gap.binding,
        "reason": gap.reason,
    }

    if len(representatives) >= 2:
        order = ordering_check(p, representatives[0].u, representatives[1].u)
        results["ordering"] = {
            "energy_1": order.energy_1,
            "energy_2": order.energy_2,
            "energy_min": order.energy_min,
            "energy_max": order.energy_max,
            "cut_ok": order.cut_ok,
            "ordered": order.ordered,
        }

    if hypotheses.a_priori_bound.holds and p.m > 0:
        worst = max(s.diagnostics.max_abs for s in multi.solutions)
        results["a_priori_bound"] = {"max_abs": worst, "holds": bool(worst <= p.m + A_PRIORI_SLACK)}

    if options.antisymmetric and p.even and p.m > 0 and n % 2 == 0:
        odd = minimize_antisymmetric(p, n=n, seed=config.seed)
        record: dict[str, Any] = {"energy": odd.energy, "residual_inf": odd.residual_inf}
        try:
            C_as = antisymmetric_lower_bound(p).value
            record.update(C_as=C_as, above_C_as=bool(odd.energy >= C_as - 1e-8))
        except PreconditionError as error:
            record.update(C_as=None, reason=str(error))
        record["energy_gap_to_best"] = odd.energy - best.energy
        results["antisymmetric"] = record

    if options.shoot:
        shot = shoot(p, integrator_steps=options.shoot_steps)
        results["shooting"] = {
            "energy": shot.energy,
            "shots": shot.iterations,
            "sup_distance_to_best": best.u.sup_distance(shot.u),
        }
    return results


def _read_solution(path: str, p: Problem) -> GridFunction:
    frame = pl.read_csv(path)
    if not {"x", "u"} <= set(frame.columns):
        raise ConfigError(f"solution file {path} needs columns x and u", key="rearrange.solution")
    u = GridFunction(frame["x"].to_numpy(), frame["u"].to_numpy())
    if not (np.isclose(u.L, p.L) and np.isclose(u.m, p.m) and np.isclose(u.x[0], -p.L)):
        raise ConfigError(
            f"solution file {path} spans [{u.x[0]}, {u.L}] with u(L)={u.m}, problem has L={p.L}, m={p.m}",
            key="rearrange.solution",
        )
    return u


def _rearrange_task(config: ExperimentConfig, p: Problem, store: ArtifactStore) -> dict:
    options = config.rearrange
    if options.solution is not None:
        u = _read_solution(options.solution, p)
        source = options.solution
    else:
        u = minimize(p, options.init, n=config.mesh, seed=config.seed).u
        source = options.init
    if not np.all(np.diff(u.values) > 0):
        raise PreconditionError("Rearrangement needs a strictly increasing function; the solution is not")
    try:
        report = verify_odd_rearrangement(MonotoneGrid.from_grid_function(u), p, options.t_points, options.K)
    except FlatRegionError as error:
        raise PreconditionError(str(error)) from error
    store.write_table("rearrangement.csv", report.table())
    return {"source": source, **report.summary()}


def _bounds_task(config: ExperimentConfig, p: Problem, store: ArtifactStore) -> dict:
    options = config.bounds
    report = bound_report(p)
    store.write_table("upper_bound.csv", report.upper_table())
    results: dict[str, Any] = {"bounds": report.summary()}

    if p.m > 0:
        try:
            lower = antisymmetric_lower_bound(p)
            store.write_table("psi.csv", lower.table())
        except PreconditionError as error:
            results["antisymmetric_lower_bound"] = str(error)
        half = linear_energy_min(p.a, (0.0, p.L), 0.0, p.m)
        results["linear_energy_half"] = {"value": half.value, "int_inv_a": half.integral}
    else:
        zero = zero_state_instability(p)
        results["zero_state"] = {
            "zero_energy": zero.zero_energy,
            "upper_min": zero.upper_min,
            "upper_argmin": zero.upper_argmin,
            "unstable": zero.unstable,
        }

    try:
        criterion = symmetry_breaking_criterion(p)
        results["symmetry_breaking"] = {
            "lhs": criterion.lhs,
            "t_star": criterion.t_star,
            "threshold": criterion.threshold,
            "certified": criterion.certified,
            "upper_min": criterion.upper_min,
            "C_as": criterion.C_as,
            "antisymmetric_excluded": criterion.antisymmetric_excluded,
        }
    except PreconditionError as error:
        results["symmetry_breaking"] = {"reason": str(error)}

    if options.scan and p.a.extendable and p.b.extendable:
        scan = interval_sequence_scan(p.a, p.b, options.horizon)
        store.write_table("scan.csv", scan.frontier)
        results["scan"] = {
            "horizons": scan.horizons,
            "best": {f"{eps:g}": row for eps, row in scan.best.items()},
            "trend": scan.trend,
        }

    if options.phi_L:
        phi = phi_monotone_check(p, options.phi_L, presets=config.minimize.presets)
        results["phi_monotone"] = {"L": phi.L, "energies": phi.energies, "nonincreasing": phi.nonincreasing}
    return results


def _eigen_task(config: ExperimentConfig, p: Problem, store: ArtifactStore) -> dict:
    n = config.eigen.mesh
    result = lambda1(p, n)
    store.write_table("eigenvector.csv", result.eigenvector_table())
    results: dict[str, Any] = {
        "eigen": result.summary(),
        "certificate": uniqueness_certificate(p, n).summary(),
    }
    try:
        l1 = l1_product_certificate(p.a, p.b, p.G)
        results["l1_product"] = {
            "certified": l1.certified,
            "lhs": l1.lhs,
            "norm_inv_a": l1.norm_inv_a,
            "norm_b": l1.norm_b,
            "target": l1.target,
        }
    except NonIntegrableError as error:
        results["l1_product"] = {"reason": str(error)}
    if isinstance(p.a, Constant) and isinstance(p.b, Constant):
        check = scaled_eigenvalue_check(p, n=max(128, n // 2))
        results["dilation"] = {"ratio": check.ratio, "expected_ratio": check.expected_ratio, "holds": check.holds}
    return results


def sweep_point(problem: ProblemConfig, variable: str, value: float, presets: list[str], points_per_unit: int, seed: int) -> dict:
    """Best minimizer and the symmetry-breaking quantities at one sweep value."""
    p = problem.build(**{variable: value})
    n = mesh_for(p.L, points_per_unit)
    best = None
    for preset in presets:
        try:
            solution = minimize(p, preset, n=n, seed=seed)
        except ConvergenceError as error:
            logger.warning("%s=%g, preset '%s' did not converge: %s", variable, value, preset, error)
            continue
        if best is None or solution.energy < best.energy:
            best = solution
    if best is None:
        raise ConvergenceError(f"No preset converged at {variable}={value}")

    try:
        C_as = antisymmetric_lower_bound(p).value
    except PreconditionError:
        C_as = None
    _, upper = upper_bound_curve(p)
    try:
        certified = symmetry_breaking_criterion(p).certified
    except PreconditionError:
        certified = None
    return {
        variable: float(value),
        "u0": best.diagnostics.u0,
        "energy": best.energy,
        "C_as": C_as,
        "upper_min": float(np.min(upper)),
        "certified": certified,
    }


def _sweep_task(config: ExperimentConfig, store: ArtifactStore, jobs: int) -> dict:
    options = config.sweep
    args = [
        (config.problem, options.variable, value, options.presets, options.points_per_unit, config.seed)
        for value in options.values
    ]
    if jobs <= 1:
        rows = [sweep_point(*arg) for arg in tqdm(args, desc="Sweep", unit="point")]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            rows = list(tqdm(executor.map(sweep_point, *zip(*args)), total=len(args), desc="Sweep", unit="point"))

    schema = {
        options.variable: pl.Float64,
        "u0": pl.Float64,
        "energy": pl.Float64,
        "C_as": pl.Float64,
        "upper_min": pl.Float64,
        "certified": pl.Boolean,
    }
    store.write_table("sweep.csv", pl.DataFrame(rows, schema=schema))
    return {"variable": options.variable, "points": rows}


def run(config: ExperimentConfig, out: str | None = None, jobs: int | None = None) -> int:
    """Carry out the configured task and write its artifacts under ``out``.

    ``out`` defaults to the config's ``out`` key, then ``oddsym-out``; ``jobs``
    defaults to the config's ``jobs`` key, then the CPU count.
    """
    location = out or config.out or "oddsym-out"
    jobs = jobs or config.jobs or os.cpu_count() or 1
    store = open_store(location)

    p = config.problem.build()
    hypotheses = check_hypotheses(p, config.grid_points)
    report: dict[str, Any] = {
        "task": config.task,
        "seed": config.seed,
        "mesh": config.mesh,
        "problem": p.describe(),
        "hypotheses": hypotheses.to_dict(),
        "status": "ok",
    }
    logger.info("Running task '%s' on %s", config.task, p.describe())

    try:
        report["theorems"] = theorem_verdicts(p, hypotheses, config.eigen.mesh)
        if config.task == "minimize":
            report["results"] = _minimize_task(config, p, hypotheses, store)
        elif config.task == "rearrange":
            report["results"] = _rearrange_task(config, p, store)
        elif config.task == "bounds":
            report["results"] = _bounds_task(config, p, store)
        elif config.task == "eigen":
            report["results"] = _eigen_task(config, p, store)
        elif config.task == "sweep":
            report["results"] = _sweep_task(config, store, jobs)
    except PreconditionError as error:
        logger.error("Precondition failed: %s", error)
        report["status"] = "precondition_failed"
        report["error"] = str(error)
        report.setdefault("theorems", {key: Verdict.NOT_APPLICABLE for key in THEOREM_KEYS})
        report["artifacts"] = _artifact_names(store)
        store.write_json(REPORT_NAME, report)
        return EXIT_PRECONDITION
    except (ConvergenceError, CertificateContradiction) as error:
        logger.error("Solver failure: %s", error)
        store.discard()
        return EXIT_SOLVER_FAILURE

    report["artifacts"] = _artifact_names(store)
    store.write_json(REPORT_NAME, report)
    logger.info("Wrote %d artifacts to %s", len(store.written), location)
    return EXIT_OK


def _artifact_names(store: ArtifactStore) -> list[str]:
    return [path.rsplit("/", 1)[-1] for path in store.written]
