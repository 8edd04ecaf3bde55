"""Directional analysis of the maximum ergodic average.

The value function is convex, piecewise linear and 1-Lipschitz for the sup
norm, so one-sided directional derivatives exist everywhere and are exact:
the right derivative at ``f`` in direction ``g`` is the largest integral of
``g`` over the maximizing face of ``f``, and the left derivative is the
smallest.  They agree in every coordinate direction exactly when the
maximizing measure is unique, which is the differentiability criterion
this module decides.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal

from .core import CycleMeasure, Graph, Potential, cycle_to_measure, integrate
from .errors import InternalError, UniqueInput
from .optimize import (
    DEFAULT_CYCLE_BUDGET,
    beta,
    critical_graph,
    cycles_within,
    max_cycle_mean,
)

# Perturbation sizes used when validating a semi-continuity witness.
EPSILON_LADDER = tuple(Fraction(1, 2**i) for i in range(11))

# The difference-quotient probe must stabilize long before this; reaching
# the floor means the piecewise-linear structure was computed wrong.
_TAU_FLOOR = Fraction(1, 2**40)


def max_face_integral(graph: Graph, f: Potential, g: Potential) -> Fraction:
    """Largest integral of ``g`` over the measures maximizing ``f``.

    The maximizing face is the flow polytope of the critical graph of
    ``f``, so the supremum is attained at one of its cycle measures; this
    evaluates it as a maximum cycle mean of ``g`` restricted to critical
    edges.
    """
    cg = critical_graph(graph, f)
    return max_cycle_mean(graph, g, cg.edge_set)


def _difference_quotient_limit(
    graph: Graph, f: Potential, g: Potential, sign: int
) -> Fraction:
    """One-sided derivative via exact difference quotients.

    Halves tau from 1 until two successive quotients agree; by convexity
    and piecewise linearity, agreement certifies that the common value is
    the exact one-sided limit.
    """
    base = beta(graph, f)
    tau = Fraction(1)
    prev: Fraction | None = None
    while tau >= _TAU_FLOOR:
        step = sign * tau
        quotient = (beta(graph, f + step * g) - base) / step
        if prev is not None and quotient == prev:
            return quotient
        prev = quotient
        tau = tau / 2
    raise InternalError("difference quotient failed to stabilize above 2^-40")


def directional_derivative(
    graph: Graph,
    f: Potential,
    g: Potential,
    side: Literal["left", "right"],
    self_check: bool = True,
) -> Fraction:
    """Exact one-sided directional derivative of the value function.

    Parameters
    ----------
    side:
        ``"right"`` for the limit from positive step sizes, ``"left"`` for
        negative ones.
    self_check:
        When true (the default) the face formula is re-derived through
        exact difference quotients and the two must agree; a mismatch
        raises :class:`InternalError`.
    """
    if side == "right":
        value = max_face_integral(graph, f, g)
        sign = 1
    elif side == "left":
        value = -max_face_integral(graph, f, -g)
        sign = -1
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if self_check:
        probe = _difference_quotient_limit(graph, f, g, sign)
        if probe != value:
            raise InternalError(
                f"face formula gives {value}, difference quotient gives {probe}"
            )
    return value


def is_gateaux(graph: Graph, f: Potential) -> bool:
    """Whether all directional derivatives at ``f`` are two-sided.

    Coordinate directions suffice: distinct vertex measures differ in some
    edge frequency, so a kink shows up along an edge indicator whenever
    one exists at all.  Agrees with uniqueness of the maximizing measure
    on every input.
    """
    cg = critical_graph(graph, f)
    for i in range(graph.n_edges):
        g = Potential.coordinate(graph.n_edges, i)
        right = max_cycle_mean(graph, g, cg.edge_set)
        left = -max_cycle_mean(graph, -g, cg.edge_set)
        if left != right:
            return False
    return True


def sandwich_check(graph: Graph, f: Potential, g: Potential, tau) -> bool:
    """Verify the two-sided bound on the difference quotient at step tau.

    Checks, exactly, that the largest integral of ``g`` over the
    maximizing face of ``f`` is at most ``(beta(f + tau g) - beta(f)) /
    tau``, which in turn is at most the largest integral over the
    maximizing face of ``f + tau g``.  Always true; exercised as a
    property probe.
    """
    tau = Fraction(tau)
    if tau <= 0:
        raise ValueError("tau must be positive")
    lower = max_face_integral(graph, f, g)
    shifted = f + tau * g
    upper = max_face_integral(graph, shifted, g)
    quotient = (beta(graph, shifted) - beta(graph, f)) / tau
    return lower <= quotient <= upper


def witness_discontinuity(
    graph: Graph, f: Potential, budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[Potential, CycleMeasure]:
    """Exhibit the failure of lower semi-continuity of the maximizing set.

    For a potential with several maximizing measures, returns a direction
    ``g`` (the difference of two distinct extreme maximizing frequency
    vectors) and the extreme measure that every perturbation ``f + eps*g``
    with ``eps > 0`` expels from the maximizing set.  The expulsion is
    verified for ``eps = 1, 1/2, ..., 2^-10`` before returning.

    Raises
    ------
    UniqueInput
        If ``f`` has a unique maximizing measure.
    """
    cg = critical_graph(graph, f)
    critical_cycles = cycles_within(graph, cg.edge_set, budget)
    if len(critical_cycles) < 2:
        raise UniqueInput("potential has a unique maximizing measure")
    mu1 = cycle_to_measure(graph, critical_cycles[0])
    mu2 = cycle_to_measure(graph, critical_cycles[1])
    g = Potential(
        tuple(
            a - b
            for a, b in zip(mu1.measure.frequencies, mu2.measure.frequencies)
        )
    )
    if integrate(f, mu2.measure) != cg.beta_value:
        raise InternalError("second critical cycle does not attain the maximum")
    for eps in EPSILON_LADDER:
        perturbed = f + eps * g
        if integrate(perturbed, mu2.measure) >= beta(graph, perturbed):
            raise InternalError(
                f"witness measure survived the perturbation at eps={eps}"
            )
    return g, mu2
