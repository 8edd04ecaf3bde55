"""Graphs, potentials, measures and exact rational arithmetic.

The dynamical system is the edge shift of a finite directed multigraph:
bi-infinite admissible edge paths under the shift map.  A potential is an
edge-indexed vector of rationals (the value of the function on a point
depends only on the current edge), and an invariant probability measure is
represented by its edge-frequency projection: a nonnegative, node-balanced
vector of total mass one.  Every decision in this package is made in exact
rational arithmetic; :class:`fractions.Fraction` supplies the
lowest-terms / positive-denominator contract.

Rationals are serialized as ``"p/q"`` strings (``"p"`` alone means ``p/1``,
the sign goes on ``p``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    DimensionMismatch,
    InvalidBlockTable,
    MalformedEdge,
    NoCycle,
    NotAMeasure,
    NotASimpleCycle,
    ParseError,
)

Rational = Fraction

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_rational(text: str) -> Fraction:
    """Parse a ``"p/q"`` string into an exact rational.

    Parameters
    ----------
    text:
        ``"p"`` or ``"p/q"`` with an optional sign on ``p`` and an unsigned
        positive ``q``.

    Raises
    ------
    ParseError
        If the string does not match the format or has a zero denominator.
    """
    if not isinstance(text, str):
        raise ParseError(f"rational must be a string, got {type(text).__name__}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ParseError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ParseError(f"zero denominator in rational literal: {text!r}")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    """Render an exact rational as ``"p"`` or ``"p/q"`` (round-trips with
    :func:`parse_rational`)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _as_fraction(value) -> Fraction:
    # Floats are banned everywhere a decision could depend on them; samplers
    # must convert to Fraction before touching this layer.
    if isinstance(value, float):
        raise TypeError("floating-point values are not allowed; use Fraction")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class Edge(NamedTuple):
    """One directed edge: an id label plus source and target node indices."""

    id: str
    src: int
    dst: int


@dataclass(frozen=True)
class Graph:
    """A finite directed multigraph with at least one directed cycle.

    Parallel edges and self-loops are permitted; edges are identified by
    their position ``0..E-1`` in :attr:`edges` throughout the package, with
    :class:`Edge` ids kept for serialization.  Build instances through
    :func:`build_graph`, which validates the invariants.
    """

    node_count: int
    edges: tuple[Edge, ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_adj(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node, the tuple of ``(edge_index, target)`` pairs leaving it."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for i, e in enumerate(self.edges):
            out[e.src].append((i, e.dst))
        return tuple(tuple(a) for a in out)

    @cached_property
    def in_adj(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node, the tuple of ``(edge_index, source)`` pairs entering it."""
        inc: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for i, e in enumerate(self.edges):
            inc[e.dst].append((i, e.src))
        return tuple(tuple(a) for a in inc)

    @cached_property
    def _id_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    def edge_index(self, edge_id: str) -> int:
        """Map an edge id label to its index; raises ``KeyError`` if unknown."""
        return self._id_index[edge_id]


def _has_directed_cycle(node_count: int, edges: Sequence[Edge]) -> bool:
    # Kahn's algorithm; a self-loop keeps its node's in-degree positive, so
    # loops are detected without special-casing.
    indeg = [0] * node_count
    out: list[list[int]] = [[] for _ in range(node_count)]
    for e in edges:
        indeg[e.dst] += 1
        out[e.src].append(e.dst)
    queue = [v for v in range(node_count) if indeg[v] == 0]
    removed = 0
    while queue:
        v = queue.pop()
        removed += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return removed < node_count


def build_graph(node_count: int, edges: Iterable[tuple[str, int, int]]) -> Graph:
    """Validate and construct a :class:`Graph`.

    Parameters
    ----------
    node_count:
        Number of nodes, indexed ``0..node_count-1``.
    edges:
        Iterable of ``(id, source, target)`` triples, in edge-index order.

    Raises
    ------
    MalformedEdge
        On an out-of-range node index or a duplicated edge id.
    NoCycle
        If the graph has no directed cycle (the system would carry no
        invariant measure).
    """
    if node_count < 1:
        raise MalformedEdge(f"node_count must be positive, got {node_count}")
    built: list[Edge] = []
    seen: set[str] = set()
    for edge_id, src, dst in edges:
        edge_id = str(edge_id)
        if not (0 <= src < node_count and 0 <= dst < node_count):
            raise MalformedEdge(
                f"edge {edge_id!r}: endpoint out of range for {node_count} nodes"
            )
        if edge_id in seen:
            raise MalformedEdge(f"duplicate edge id {edge_id!r}")
        seen.add(edge_id)
        built.append(Edge(edge_id, src, dst))
    if not _has_directed_cycle(node_count, built):
        raise NoCycle("graph has no directed cycle, so no invariant measure exists")
    return Graph(node_count, tuple(built))


@dataclass(frozen=True)
class Potential:
    """An edge-indexed vector of exact rationals.

    Supports the vector-space operations needed for directional analysis:
    ``f + g``, ``f - g``, ``-f`` and scalar multiplication by ints or
    Fractions.  Entries may be given as ints, Fractions or ``"p/q"``
    strings; floats are rejected.
    """

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "weights", tuple(_as_fraction(w) for w in self.weights)
        )

    def __len__(self) -> int:
        return len(self.weights)

    def __add__(self, other: "Potential") -> "Potential":
        if len(self) != len(other):
            raise DimensionMismatch("potentials have different edge counts")
        return Potential(tuple(a + b for a, b in zip(self.weights, other.weights)))

    def __sub__(self, other: "Potential") -> "Potential":
        if len(self) != len(other):
            raise DimensionMismatch("potentials have different edge counts")
        return Potential(tuple(a - b for a, b in zip(self.weights, other.weights)))

    def __neg__(self) -> "Potential":
        return Potential(tuple(-a for a in self.weights))

    def __mul__(self, scalar) -> "Potential":
        c = _as_fraction(scalar)
        return Potential(tuple(c * a for a in self.weights))

    __rmul__ = __mul__

    @classmethod
    def constant(cls, n_edges: int, value) -> "Potential":
        """The potential taking the same value on every edge."""
        return cls((_as_fraction(value),) * n_edges)

    @classmethod
    def coordinate(cls, n_edges: int, edge_index: int) -> "Potential":
        """The indicator of a single edge (a coordinate direction)."""
        w = [Fraction(0)] * n_edges
        w[edge_index] = Fraction(1)
        return cls(tuple(w))


def sup_norm(f: Potential) -> Fraction:
    """Maximum absolute edge weight; zero exactly for the zero potential."""
    return max(abs(w) for w in f.weights)


@dataclass(frozen=True)
class Measure:
    """The edge-frequency projection of an invariant probability measure.

    Entries are nonnegative, sum to one, and are balanced at every node
    (inflow equals outflow).  Construct through :func:`validate_measure`
    unless the conditions are guaranteed by construction.
    """

    frequencies: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "frequencies", tuple(_as_fraction(w) for w in self.frequencies)
        )

    def __len__(self) -> int:
        return len(self.frequencies)


def validate_measure(graph: Graph, values: Sequence) -> Measure:
    """Check flow-polytope membership and wrap the vector as a :class:`Measure`.

    Parameters
    ----------
    graph:
        The underlying multigraph.
    values:
        Edge-indexed vector (ints, Fractions or ``"p/q"`` strings).

    Raises
    ------
    NotAMeasure
        Naming the violated condition: length, negativity, total mass, or
        the node at which balance fails.
    """
    vec = tuple(_as_fraction(v) for v in values)
    if len(vec) != graph.n_edges:
        raise NotAMeasure(
            f"length {len(vec)} does not match edge count {graph.n_edges}"
        )
    for i, v in enumerate(vec):
        if v < 0:
            raise NotAMeasure(f"negative frequency on edge {graph.edges[i].id!r}")
    total = sum(vec)
    if total != 1:
        raise NotAMeasure(f"total mass is {total}, expected 1")
    for node in range(graph.node_count):
        outflow = sum(vec[i] for i, _ in graph.out_adj[node])
        inflow = sum(vec[i] for i, _ in graph.in_adj[node])
        if outflow != inflow:
            raise NotAMeasure(f"node balance fails at node {node}")
    return Measure(vec)


@dataclass(frozen=True)
class CycleMeasure:
    """The invariant measure equidistributed on one simple directed cycle.

    ``cycle`` holds edge indices in canonical rotation (lexicographically
    smallest edge index first); the measure puts ``1/L`` on each of the
    ``L`` cycle edges.  These are exactly the vertices of the flow polytope.
    """

    cycle: tuple[int, ...]
    measure: Measure


def canonical_rotation(cycle: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cycle's edge list so the smallest edge index comes first."""
    cyc = tuple(cycle)
    k = cyc.index(min(cyc))
    return cyc[k:] + cyc[:k]


def cycle_to_measure(graph: Graph, cycle: Sequence[int]) -> CycleMeasure:
    """Build the :class:`CycleMeasure` of a simple directed cycle.

    Parameters
    ----------
    cycle:
        Edge indices tracing a closed directed path that visits no node
        twice.  Any rotation is accepted; the result is canonicalized.

    Raises
    ------
    NotASimpleCycle
        If the edges do not chain up, do not close, repeat a node, or an
        index is out of range.
    """
    cyc = tuple(cycle)
    if not cyc:
        raise NotASimpleCycle("empty edge sequence")
    for i in cyc:
        if not isinstance(i, int) or not (0 <= i < graph.n_edges):
            raise NotASimpleCycle(f"unknown edge index {i!r}")
    edges = [graph.edges[i] for i in cyc]
    for a, b in zip(edges, edges[1:]):
        if a.dst != b.src:
            raise NotASimpleCycle(
                f"edges {a.id!r} and {b.id!r} are not consecutive"
            )
    if edges[-1].dst != edges[0].src:
        raise NotASimpleCycle("edge sequence does not close up")
    visited = [e.src for e in edges]
    if len(set(visited)) != len(visited):
        raise NotASimpleCycle("cycle visits a node twice")
    length = len(cyc)
    freq = [Fraction(0)] * graph.n_edges
    for i in cyc:
        freq[i] = Fraction(1, length)
    measure = validate_measure(graph, freq)
    return CycleMeasure(canonical_rotation(cyc), measure)


def integrate(f: Potential, mu: Measure) -> Fraction:
    """Exact integral of a potential against a measure (a dot product)."""
    if len(f) != len(mu):
        raise DimensionMismatch(
            f"potential has {len(f)} edges, measure has {len(mu)}"
        )
    return sum(
        (w * p for w, p in zip(f.weights, mu.frequencies)), start=Fraction(0)
    )


# ---------------------------------------------------------------------------
# Higher-block recoding
# ---------------------------------------------------------------------------


def _admissible_blocks(graph: Graph, length: int) -> list[tuple[int, ...]]:
    """All edge-index words of the given length that trace a directed path."""
    blocks: list[tuple[int, ...]] = [(i,) for i in range(graph.n_edges)]
    for _ in range(length - 1):
        extended = []
        for block in blocks:
            last = graph.edges[block[-1]]
            for i, _dst in graph.out_adj[last.dst]:
                extended.append(block + (i,))
        blocks = extended
    blocks.sort()
    return blocks


def higher_block_recode(
    alphabet_graph: Graph,
    f_k: Mapping[tuple[int, ...], object],
    k: int,
) -> tuple[Graph, Potential]:
    """Reduce a k-step-dependent potential to plain edge weights.

    Builds the de Bruijn-style presentation whose nodes are the admissible
    ``(k-1)``-blocks of ``alphabet_graph`` (words of edge indices tracing a
    path) and whose edges are the admissible ``k``-blocks; each new edge
    carries the table value of its block.  The maximum ergodic average is
    unchanged by this recoding.

    Parameters
    ----------
    alphabet_graph:
        The graph whose edge shift carries the original system.
    f_k:
        Mapping from every admissible ``k``-block (tuple of edge indices)
        to a rational weight.
    k:
        Block length, at least 2.

    Returns
    -------
    (Graph, Potential)
        The recoded graph, with edge ids formed by joining the original
        edge ids with commas, and the induced edge potential.

    Raises
    ------
    InvalidBlockTable
        If the table lists an inadmissible block or omits an admissible one.
    """
    if k < 2:
        raise ValueError(f"block length must be at least 2, got {k}")
    table: dict[tuple[int, ...], Fraction] = {}
    for key, value in f_k.items():
        table[tuple(key)] = _as_fraction(value)

    kblocks = _admissible_blocks(alphabet_graph, k)
    kblock_set = set(kblocks)
    for key in table:
        if key not in kblock_set:
            raise InvalidBlockTable(f"block {key!r} is not an admissible path")
    for block in kblocks:
        if block not in table:
            raise InvalidBlockTable(f"missing weight for admissible block {block!r}")

    nodes = _admissible_blocks(alphabet_graph, k - 1)
    node_index = {block: i for i, block in enumerate(nodes)}
    ids = [e.id for e in alphabet_graph.edges]
    edges = [
        (",".join(ids[i] for i in block), node_index[block[:-1]], node_index[block[1:]])
        for block in kblocks
    ]
    recoded = build_graph(len(nodes), edges)
    weights = Potential(tuple(table[block] for block in kblocks))
    return recoded, weights
