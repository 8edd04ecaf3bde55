"""How rare non-uniqueness is: hyperplanes, perturbations, sampling.

Every potential with more than one maximizing measure integrates two
distinct cycle measures to the same maximal value, so it lies on one of
finitely many hyperplanes through the origin (one per pair of distinct
cycle measures).  This module builds that arrangement, verifies the
covering exactly, and runs the two experimental probes: random sampling
(ties should essentially never happen on a fine rational grid) and
perturbation to uniqueness (ties are destroyed by arbitrarily small
generic perturbations).  It also quantifies the stability of the
maximizing set: perturbations below half the spectral gap can only shrink
the critical graph.

All randomness is drawn from per-trial generators keyed by
``"{seed}:{counter}"`` so results are reproducible and independent of
execution order; samples are converted to exact rationals before any
decision is made.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import CycleMeasure, Graph, Potential, _as_fraction, cycle_to_measure, integrate
from .errors import GapUndefined, GapViolation, RetryBudgetExceeded
from .optimize import (
    DEFAULT_CYCLE_BUDGET,
    beta,
    critical_graph,
    enumerate_simple_cycles,
    is_unique,
    second_gap,
)

# Grid resolution for perturbation draws.
_PERTURBATION_GRID = 2**30

PERTURBATION_DRAW_BUDGET = 64


@dataclass(frozen=True)
class Hyperplane:
    """The locus of potentials integrating two cycle measures equally.

    ``normal`` is the frequency-vector difference in canonical projective
    form: integer entries in lowest terms with the first nonzero entry
    positive.  ``source_pairs`` collects every pair of cycle indices (into
    the graph's sorted cycle list) whose difference is proportional to
    this normal.  Membership of a potential is the exact test
    ``<f, normal> = 0``.
    """

    normal: tuple[int, ...]
    source_pairs: tuple[tuple[int, int], ...]

    def contains(self, f: Potential) -> bool:
        return (
            sum((w * c for w, c in zip(f.weights, self.normal)), start=Fraction(0))
            == 0
        )


@dataclass(frozen=True)
class PerturbResult:
    """Outcome of a perturbation-to-uniqueness search."""

    potential: Potential
    retries: int


@dataclass(frozen=True)
class MonteCarloReport:
    """Summary of a random-potential uniqueness experiment.

    Reproducible from ``seed``; ``covering_violations`` counts sampled
    potentials that were non-unique yet lay on no hyperplane of attaining
    cycle measures (always zero unless the implementation is wrong).
    """

    trials: int
    nonunique_count: int
    seed: int
    bound: int
    covering_violations: int
    distribution: str
    elapsed_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "nonunique_count": self.nonunique_count,
            "seed": self.seed,
            "bound": self.bound,
            "covering_violations": self.covering_violations,
        }


def _rng(seed: int, counter: int) -> random.Random:
    # str seeding hashes all bits deterministically, and deriving one
    # generator per counter keeps trials order-independent.
    return random.Random(f"{seed}:{counter}")


def enumerate_cycle_measures(
    graph: Graph, budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[CycleMeasure, ...]:
    """One cycle measure per simple cycle, in the sorted cycle order."""
    return tuple(
        cycle_to_measure(graph, c) for c in enumerate_simple_cycles(graph, budget)
    )


def _canonical_normal(diff: Sequence[Fraction]) -> tuple[int, ...]:
    scale = math.lcm(*(d.denominator for d in diff))
    ints = [d.numerator * (scale // d.denominator) for d in diff]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x != 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def build_hyperplanes(
    graph: Graph, budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[Hyperplane, ...]:
    """The arrangement of cycle-measure difference kernels.

    One hyperplane per unordered pair of distinct cycle measures,
    deduplicated by projective equivalence of normals; a deduplicated
    plane keeps every source pair so the covering test can ask whether
    some pair of its cycle measures both attain the maximum.
    """
    measures = enumerate_cycle_measures(graph, budget)
    planes: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    for i in range(len(measures)):
        for j in range(i + 1, len(measures)):
            diff = [
                a - b
                for a, b in zip(
                    measures[i].measure.frequencies, measures[j].measure.frequencies
                )
            ]
            normal = _canonical_normal(diff)
            planes.setdefault(normal, []).append((i, j))
    return tuple(
        Hyperplane(normal, tuple(pairs)) for normal, pairs in planes.items()
    )


def _on_attaining_hyperplane(
    graph: Graph, f: Potential, budget: int
) -> bool:
    measures = enumerate_cycle_measures(graph, budget)
    value = beta(graph, f)
    integrals = [integrate(f, m.measure) for m in measures]
    for plane in build_hyperplanes(graph, budget):
        if not plane.contains(f):
            continue
        for i, j in plane.source_pairs:
            if integrals[i] == value and integrals[j] == value:
                return True
    return False


def covering_check(
    graph: Graph, f: Potential, budget: int = DEFAULT_CYCLE_BUDGET
) -> bool:
    """Verify the hyperplane covering of the non-uniqueness set at ``f``.

    True when ``f`` has a unique maximizing measure, or when it lies on a
    hyperplane whose two source cycle measures both attain the maximum.
    Anything else would falsify the covering statement, so this must
    return True on every input.
    """
    if is_unique(graph, f):
        return True
    return _on_attaining_hyperplane(graph, f, budget)


def monte_carlo(
    graph: Graph,
    trials: int,
    seed: int,
    bound: int,
    budget: int = DEFAULT_CYCLE_BUDGET,
) -> MonteCarloReport:
    """Sample random potentials and count non-unique maximizers.

    Each weight is an independent uniform integer in ``[-bound, bound]``
    scaled by ``1/bound``, converted to an exact rational before any
    decision.  Every non-unique sample is additionally checked against
    the hyperplane covering.  Non-uniqueness requires an exact integer
    coincidence, so on a fine grid the count is expected to be zero.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    started = time.perf_counter()
    nonunique = 0
    violations = 0
    for t in range(trials):
        rng = _rng(seed, t)
        f = Potential(
            tuple(
                Fraction(rng.randint(-bound, bound), bound)
                for _ in range(graph.n_edges)
            )
        )
        if not is_unique(graph, f):
            nonunique += 1
            if not _on_attaining_hyperplane(graph, f, budget):
                violations += 1
    return MonteCarloReport(
        trials=trials,
        nonunique_count=nonunique,
        seed=seed,
        bound=bound,
        covering_violations=violations,
        distribution=f"uniform-int[-{bound},{bound}]/{bound}",
        elapsed_seconds=time.perf_counter() - started,
    )


def perturb_to_unique(graph: Graph, f: Potential, eps, seed: int) -> PerturbResult:
    """Find a potential within ``eps`` of ``f`` with a unique maximizer.

    Draws independent uniform rational perturbations of sup norm at most
    ``eps`` (fresh draw per attempt) until uniqueness holds; the result
    records how many draws were needed.  An already-unique input is
    returned unchanged with zero retries.

    Raises
    ------
    RetryBudgetExceeded
        After 64 unsuccessful draws; under this sampling scheme that is a
        probability-zero event and signals an arithmetic bug.
    """
    eps = _as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if is_unique(graph, f):
        return PerturbResult(f, 0)
    grid = _PERTURBATION_GRID
    for draw in range(1, PERTURBATION_DRAW_BUDGET + 1):
        rng = _rng(seed, draw)
        candidate = f + Potential(
            tuple(
                Fraction(rng.randint(-grid, grid), grid) * eps
                for _ in range(graph.n_edges)
            )
        )
        if is_unique(graph, candidate):
            return PerturbResult(candidate, draw)
    raise RetryBudgetExceeded(
        f"no unique perturbation within {PERTURBATION_DRAW_BUDGET} draws"
    )


def usc_inclusion_check(
    graph: Graph,
    f: Potential,
    delta,
    samples: int,
    seed: int,
) -> bool:
    """Check that small perturbations only shrink the critical graph.

    Samples potentials within sup-norm ``delta`` of ``f`` and verifies
    that each perturbed critical edge set is contained in the critical
    edge set of ``f``.  Requires ``delta`` strictly below half the
    spectral gap, which is exactly the margin making the inclusion
    unconditional.

    Raises
    ------
    GapUndefined
        If every simple cycle of the graph is critical for ``f``.
    GapViolation
        If ``delta >= gap/2``.
    """
    delta = _as_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    gap = second_gap(graph, f)
    if gap is None:
        raise GapUndefined("every simple cycle is critical; no gap exists")
    if delta >= gap / 2:
        raise GapViolation(f"delta {delta} is not below half the gap {gap}")
    base = critical_graph(graph, f).edge_set
    grid = _PERTURBATION_GRID
    holds = True
    for s in range(samples):
        rng = _rng(seed, s)
        perturbed = f + Potential(
            tuple(
                Fraction(rng.randint(-grid, grid), grid) * delta
                for _ in range(graph.n_edges)
            )
        )
        if not critical_graph(graph, perturbed).edge_set <= base:
            holds = False
    return holds
