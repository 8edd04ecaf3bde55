"""Reference instances used by the test corpus and the bundled files.

The three small graphs are fixed throughout: a single loop (the unique
measure case), two parallel loops (the minimal non-uniqueness example),
and the two-node graph with a loop plus a 2-cycle, which doubles as the
canonical presentation of the golden-mean shift.  The complete digraph on
four nodes supplies a cycle-rich instance, and the full shift on two
symbols is the recoding substrate.
"""

from __future__ import annotations

from fractions import Fraction

from .core import Graph, Potential, build_graph


def g1() -> Graph:
    """One node, one self-loop: the system with a single invariant measure."""
    return build_graph(1, [("e0", 0, 0)])


def g2() -> Graph:
    """One node, two parallel self-loops: minimal non-uniqueness geometry."""
    return build_graph(1, [("e0", 0, 0), ("e1", 0, 0)])


def g3() -> Graph:
    """Two nodes, a self-loop and a 2-cycle (golden-mean shift presentation)."""
    return build_graph(2, [("e0", 0, 0), ("e1", 0, 1), ("e2", 1, 0)])


def complete_digraph(n: int) -> Graph:
    """All ordered pairs as edges, no self-loops; ids ``e{i}{j}``."""
    edges = [
        (f"e{i}{j}", i, j) for i in range(n) for j in range(n) if i != j
    ]
    return build_graph(n, edges)


def full_shift(symbols: int) -> Graph:
    """One node with ``symbols`` self-loops; edge ids are ``"0"``, ``"1"``, ..."""
    return build_graph(1, [(str(i), 0, 0) for i in range(symbols)])


def g1_potential() -> Potential:
    return Potential((Fraction(2),))


def g2_potential() -> Potential:
    return Potential((Fraction(0), Fraction(1)))


def g3_potential() -> Potential:
    return Potential((Fraction(1), Fraction(0), Fraction(3)))


def g3_tie_potential() -> Potential:
    """Both cycles of g3 tie at mean 3/2."""
    return Potential((Fraction(3, 2), Fraction(0), Fraction(3)))


def k4_potential() -> Potential:
    """Unique maximizer on the 2-cycle between nodes 0 and 1, value 1."""
    g = complete_digraph(4)
    weights = {e.id: Fraction(0) for e in g.edges}
    weights["e01"] = Fraction(3, 2)
    weights["e10"] = Fraction(1, 2)
    weights["e02"] = Fraction(1, 3)
    return Potential(tuple(weights[e.id] for e in g.edges))


def k4_tie_potential() -> Potential:
    """The 2-cycles (0,1) and (2,3) tie at mean 1."""
    g = complete_digraph(4)
    tied = {"e01", "e10", "e23", "e32"}
    return Potential(
        tuple(Fraction(1) if e.id in tied else Fraction(0) for e in g.edges)
    )


def fullshift2_k3_table() -> dict[tuple[int, int, int], Fraction]:
    """Indicator of the 3-block (1, 0, 1) on the full 2-shift."""
    table = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                table[(a, b, c)] = Fraction(1 if (a, b, c) == (1, 0, 1) else 0)
    return table


def goldenmean_k2_table() -> dict[tuple[int, int], Fraction]:
    """A 2-block potential on g3 whose recoding has a unique maximizer."""
    return {
        (0, 0): Fraction(1, 2),
        (0, 1): Fraction(0),
        (1, 2): Fraction(1),
        (2, 0): Fraction(0),
        (2, 1): Fraction(1, 4),
    }
