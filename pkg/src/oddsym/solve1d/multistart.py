import logging
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from ..eigen import uniqueness_certificate
from ..exceptions import CertificateContradiction, ConvergenceError
from ..weights import Problem, Verdict, check_hypotheses
from .newton import DEFAULT_PRESETS, Solution, minimize

logger = logging.getLogger(__name__)

CLUSTER_THRESHOLD = 1e-4
REQUIRED_PRESETS = frozenset({"plus_one", "minus_one", "odd_tanh", "random"})
UNIQUENESS_RESULTS = ("unique_odd_increasing", "unique_critical_point", "convex_energy_unique")


@dataclass
class MultiStartResult:
    """Converged solutions from several starts, grouped by sup-norm distance."""

    solutions: list[Solution]
    clusters: list[list[int]]
    pairwise_gaps: np.ndarray
    failures: dict[str, str] = field(default_factory=dict)
    certified: bool = False

    @property
    def distinct_solutions(self) -> int:
        return len(self.clusters)

    def representatives(self) -> list[Solution]:
        """Lowest-energy member of each cluster, ordered by energy."""
        best = [min((self.solutions[i] for i in cluster), key=lambda s: s.energy) for cluster in self.clusters]
        return sorted(best, key=lambda s: s.energy)


def uniqueness_certified(p: Problem, eigen_mesh: int = 1024) -> bool:
    """A hypothesis-based uniqueness result applies, or lambda_1 >= -G''(0) is certified."""
    verdicts = check_hypotheses(p).theorem_verdicts()
    if any(verdicts[name] is Verdict.CERTIFIED for name in UNIQUENESS_RESULTS):
        return True
    try:
        certificate = uniqueness_certificate(p, eigen_mesh)
    except ConvergenceError as error:
        logger.warning("Eigenvalue certificate unavailable: %s", error)
        return False
    if certificate.certified:
        logger.info("Uniqueness certified by %s (margin %.3e)", certificate.route, certificate.margin)
    return certificate.certified


def _cluster(solutions: list[Solution], threshold: float) -> tuple[list[list[int]], np.ndarray]:
    k = len(solutions)
    gaps = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            gaps[i, j] = gaps[j, i] = solutions[i].u.sup_distance(solutions[j].u)
    clusters: list[list[int]] = []
    for i in range(k):
        for cluster in clusters:
            if gaps[i, cluster[0]] <= threshold:
                cluster.append(i)
                break
        else:
            clusters.append([i])
    return clusters, gaps


def multi_start_uniqueness(
    p: Problem,
    presets=DEFAULT_PRESETS,
    n: int = 1024,
    seed: int = 0,
    certified: bool | None = None,
    threshold: float = CLUSTER_THRESHOLD,
) -> MultiStartResult:
    """Minimize from every preset and count distinct solutions.

    When ``certified`` is None it is decided from the hypothesis report and
    the eigenvalue certificate; either one makes a second cluster a
    contradiction.

    Raises:
        ValueError: If fewer than 4 presets are given or a required one is missing.
        CertificateContradiction: If uniqueness is certified but several clusters appear.
    """
    presets = list(presets)
    missing = REQUIRED_PRESETS - set(presets)
    if len(presets) < 4 or missing:
        raise ValueError(f"Multi-start needs at least 4 presets including {sorted(REQUIRED_PRESETS)}; missing {sorted(missing)}")
    if certified is None:
        certified = uniqueness_certified(p)

    solutions = []
    failures = {}
    for preset in tqdm(presets, desc="Multi-start", unit="start"):
        try:
            solutions.append(minimize(p, preset, n=n, seed=seed))
        except ConvergenceError as error:
            logger.warning("Start '%s' excluded from clustering: %s", preset, error)
            failures[preset] = str(error)

    clusters, gaps = _cluster(solutions, threshold)
    result = MultiStartResult(solutions, clusters, gaps, failures, certified)
    if certified and result.distinct_solutions > 1:
        energies = ", ".join(f"{s.energy:.12g}" for s in result.representatives())
        raise CertificateContradiction(
            f"uniqueness is certified but multi-start found {result.distinct_solutions} distinct solutions "
            f"(energies {energies})"
        )
    return result
