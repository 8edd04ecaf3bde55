"""Maximum ergodic averages and maximizing-measure supports.

The maximum ergodic average of an edge potential equals the maximum mean
weight of a simple directed cycle, and the set of maximizing measures is
the face of the flow polytope supported on the critical graph (the union
of all maximum-mean cycles).  Two independent routes are provided:

* :func:`beta` — Karp's recurrence per strongly connected component, run
  over exactly scaled integers (a vectorized int64 path handles large
  instances; overflow is excluded a priori, so both paths are exact);
* :func:`beta_oracle` — brute-force enumeration of simple cycles, used as
  the ground truth in tests and refused via :class:`CycleBudgetExceeded`
  when the cycle count passes the configured cap.

:func:`howard_beta` adds max-plus policy iteration as a second fast path;
all three must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .core import Graph, Potential, canonical_rotation
from .errors import (
    CycleBudgetExceeded,
    DimensionMismatch,
    InternalError,
    NoCycle,
)

DEFAULT_CYCLE_BUDGET = 10**6

# Switch to the vectorized Karp only when the dynamic programme is big
# enough to amortize array overhead.
_NUMPY_MIN_WORK = 5000

_HOWARD_ITERATION_CAP = 10_000


@dataclass(frozen=True)
class CriticalGraph:
    """Edges supporting every maximizing measure, with the attained value.

    Every edge in ``edge_set`` lies on a simple cycle of mean
    ``beta_value`` inside the set, and every simple cycle of mean
    ``beta_value`` in the original graph stays inside the set.
    """

    edge_set: frozenset[int]
    beta_value: Fraction


# ---------------------------------------------------------------------------
# Strongly connected components (iterative Tarjan)
# ---------------------------------------------------------------------------


def _sccs(nodes: Iterable[int], successors: Callable[[int], Iterable[int]]) -> list[list[int]]:
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    result: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        dfs: list[tuple[int, Iterator[int]]] = [(root, iter(successors(root)))]
        while dfs:
            v, it = dfs[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    dfs.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            dfs.pop()
            if dfs:
                u = dfs[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result


def _graph_sccs(graph: Graph, allowed: frozenset[int] | None = None) -> list[list[int]]:
    if allowed is None:
        succ = lambda v: (dst for _, dst in graph.out_adj[v])
    else:
        succ = lambda v: (dst for i, dst in graph.out_adj[v] if i in allowed)
    return _sccs(range(graph.node_count), succ)


# ---------------------------------------------------------------------------
# Simple-cycle enumeration (Johnson's algorithm at edge granularity)
# ---------------------------------------------------------------------------
#
# Cycles are edge sequences, so two parallel edges through the same nodes
# give two distinct cycles; node-level enumerators would merge them.


def _circuits_through(
    start: int,
    nodes: set[int],
    adj: Sequence[Sequence[tuple[int, int]]],
) -> Iterator[tuple[int, ...]]:
    """All simple cycles through ``start`` inside the node set (length >= 2)."""
    sub = {v: [(i, w) for i, w in adj[v] if w in nodes] for v in nodes}
    blocked = {v: False for v in nodes}
    blist: dict[int, set[int]] = {v: set() for v in nodes}

    def unblock(u: int) -> None:
        todo = [u]
        while todo:
            v = todo.pop()
            if blocked[v]:
                blocked[v] = False
                todo.extend(blist[v])
                blist[v].clear()

    blocked[start] = True
    path: list[int] = []
    # frame: [node, edge iterator, found-a-cycle flag, incoming edge index]
    frames: list[list] = [[start, iter(sub[start]), False, None]]
    while frames:
        frame = frames[-1]
        v, it = frame[0], frame[1]
        descended = False
        for eidx, w in it:
            if w == start:
                yield tuple(path) + (eidx,)
                frame[2] = True
            elif not blocked[w]:
                blocked[w] = True
                path.append(eidx)
                frames.append([w, iter(sub[w]), False, eidx])
                descended = True
                break
        if descended:
            continue
        frames.pop()
        if frame[2]:
            unblock(v)
            if frames:
                frames[-1][2] = True
        else:
            for _, w in sub[v]:
                blist[w].add(v)
        if frame[3] is not None:
            path.pop()


def iter_simple_cycles(
    graph: Graph, budget: int = DEFAULT_CYCLE_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every simple directed cycle exactly once, in canonical rotation.

    A cycle is a tuple of edge indices, rotated so the smallest index comes
    first.  Raises :class:`CycleBudgetExceeded` as soon as more than
    ``budget`` cycles have been produced, which keeps the brute-force path
    refusing instead of hanging on cycle-rich graphs.
    """

    def generate() -> Iterator[tuple[int, ...]]:
        for i, e in enumerate(graph.edges):
            if e.src == e.dst:
                yield (i,)
        adj = [
            [(i, dst) for i, dst in row if dst != node]
            for node, row in enumerate(graph.out_adj)
        ]
        pending = [
            set(comp)
            for comp in _sccs(range(graph.node_count), lambda v: (w for _, w in adj[v]))
            if len(comp) >= 2
        ]
        while pending:
            comp = pending.pop()
            start = min(comp)
            yield from _circuits_through(start, comp, adj)
            rest = comp - {start}
            if len(rest) >= 2:
                for sub in _sccs(
                    sorted(rest), lambda v: (w for _, w in adj[v] if w in rest)
                ):
                    if len(sub) >= 2:
                        pending.append(set(sub))

    count = 0
    for cycle in generate():
        count += 1
        if count > budget:
            raise CycleBudgetExceeded(
                f"more than {budget} simple cycles; raise the budget to insist"
            )
        yield canonical_rotation(cycle)


@lru_cache(maxsize=256)
def enumerate_simple_cycles(
    graph: Graph, budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[tuple[int, ...], ...]:
    """All simple cycles as a sorted tuple (cached per graph and budget)."""
    return tuple(sorted(iter_simple_cycles(graph, budget)))


def cycles_within(
    graph: Graph, edge_set: frozenset[int], budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[tuple[int, ...], ...]:
    """Simple cycles whose edges all lie in the given subset (sorted)."""
    return tuple(
        c
        for c in enumerate_simple_cycles(graph, budget)
        if all(i in edge_set for i in c)
    )


def cycle_mean(f: Potential, cycle: Sequence[int]) -> Fraction:
    """Average weight of a potential along a cycle's edges."""
    return sum((f.weights[i] for i in cycle), start=Fraction(0)) / len(cycle)


def beta_oracle(
    graph: Graph, f: Potential, budget: int = DEFAULT_CYCLE_BUDGET
) -> tuple[Fraction, tuple[tuple[int, ...], ...]]:
    """Brute-force maximum cycle mean with every attaining cycle.

    The supremum of the integral over the flow polytope is attained at a
    vertex, i.e. at a cycle measure, so scanning simple cycles is a
    complete oracle.  Streaming, with denominators cleared once up front
    and means compared by integer cross-multiplication, so memory and
    per-cycle work stay bounded even when the budget check eventually
    refuses.
    """
    if len(f) != graph.n_edges:
        raise DimensionMismatch("potential length does not match edge count")
    scaled, scale = _scaled_int_weights(f.weights)
    best: tuple[int, int] | None = None
    argbest: list[tuple[int, ...]] = []
    for cycle in iter_simple_cycles(graph, budget):
        total = sum(map(scaled.__getitem__, cycle))
        length = len(cycle)
        if best is None or total * best[1] > best[0] * length:
            best, argbest = (total, length), [cycle]
        elif total * best[1] == best[0] * length:
            argbest.append(cycle)
    if best is None:
        raise NoCycle("graph has no simple cycle")
    return Fraction(best[0], best[1] * scale), tuple(sorted(argbest))


# ---------------------------------------------------------------------------
# Karp's recurrence over exactly scaled integers
# ---------------------------------------------------------------------------


def _scaled_int_weights(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    """Clear denominators: returns integer weights and the common scale L."""
    scale = math.lcm(*(w.denominator for w in weights)) if weights else 1
    return [w.numerator * (scale // w.denominator) for w in weights], scale


def _karp_python(
    n: int, edges: Sequence[tuple[int, int, int]], source: int = 0
) -> tuple[int, int]:
    """Exact Karp on integer weights; returns the best mean as (num, den).

    ``edges`` must span one strongly connected subgraph relabeled to
    ``0..n-1``.  Levels hold the maximum weight of a walk of exactly k
    edges from the source (None where unreachable).
    """
    levels: list[list] = [[None] * n for _ in range(n + 1)]
    levels[0][source] = 0
    for k in range(1, n + 1):
        prev = levels[k - 1]
        cur = levels[k]
        for u, v, w in edges:
            pu = prev[u]
            if pu is None:
                continue
            cand = pu + w
            if cur[v] is None or cand > cur[v]:
                cur[v] = cand
    top = levels[n]
    best: tuple[int, int] | None = None
    for v in range(n):
        dn = top[v]
        if dn is None:
            continue
        m: tuple[int, int] | None = None
        for k in range(n):
            dk = levels[k][v]
            if dk is None:
                continue
            num, den = dn - dk, n - k
            if m is None or num * m[1] < m[0] * den:
                m = (num, den)
        # A length-n walk repeats a node, so some shorter prefix reaches v
        # and m is never None here.
        if best is None or m[0] * best[1] > best[0] * m[1]:
            best = m
    if best is None:
        raise InternalError("Karp recurrence found no length-n walk in an SCC")
    return best


def _karp_numpy(
    n: int, edges: Sequence[tuple[int, int, int]], source: int = 0
) -> tuple[int, int] | None:
    """Vectorized Karp; returns None when int64 safety cannot be guaranteed.

    All arithmetic is on int64 with an a-priori overflow exclusion
    (|walk weight| <= maxabs*n =: M and every cross-multiplied comparison
    bounded by (2M+2)*n < 2**62), so results are exact whenever this path
    runs at all.
    """
    maxabs = max((abs(w) for _, _, w in edges), default=0)
    m_bound = maxabs * n
    if (2 * m_bound + 2) * max(n, 1) >= 2**62:
        return None
    sent = -(2**62)
    thresh = -(2**61)

    src = np.fromiter((u for u, _, _ in edges), dtype=np.int64, count=len(edges))
    dst = np.fromiter((v for _, v, _ in edges), dtype=np.int64, count=len(edges))
    wgt = np.fromiter((w for _, _, w in edges), dtype=np.int64, count=len(edges))
    order = np.argsort(dst, kind="stable")
    src, dst, wgt = src[order], dst[order], wgt[order]
    uniq, starts = np.unique(dst, return_index=True)

    levels = np.full((n + 1, n), sent, dtype=np.int64)
    levels[0, source] = 0
    for k in range(1, n + 1):
        cand = levels[k - 1][src] + wgt
        row = np.full(n, sent, dtype=np.int64)
        row[uniq] = np.maximum.reduceat(cand, starts)
        levels[k] = row

    top = levels[n]
    diff = top[None, :] - levels[:n]
    dens = np.broadcast_to((n - np.arange(n, dtype=np.int64))[:, None], (n, n)).copy()
    huge = 2 * m_bound + 2
    unreachable = levels[:n] <= thresh
    diff = np.where(unreachable, huge, diff)
    dens = np.where(unreachable, 1, dens)

    # Tournament minimum of diff/dens along axis 0 via exact cross products.
    while diff.shape[0] > 1:
        half = diff.shape[0] // 2
        a_num, a_den = diff[:half], dens[:half]
        b_num, b_den = diff[half : 2 * half], dens[half : 2 * half]
        take_a = a_num * b_den <= b_num * a_den
        merged_num = np.where(take_a, a_num, b_num)
        merged_den = np.where(take_a, a_den, b_den)
        if diff.shape[0] % 2:
            merged_num = np.vstack([merged_num, diff[-1:]])
            merged_den = np.vstack([merged_den, dens[-1:]])
        diff, dens = merged_num, merged_den

    best: tuple[int, int] | None = None
    for v in range(n):
        if top[v] <= thresh:
            continue
        num, den = int(diff[0, v]), int(dens[0, v])
        if best is None or num * best[1] > best[0] * den:
            best = (num, den)
    if best is None:
        raise InternalError("Karp recurrence found no length-n walk in an SCC")
    return best


def _component_edge_lists(
    graph: Graph, allowed: frozenset[int] | None
) -> Iterator[tuple[int, list[tuple[int, int, int]]]]:
    """Per SCC of the (restricted) graph: node count and relabeled edge list.

    Edge entries are ``(u, v, edge_index)``; components without internal
    edges are skipped.
    """
    comps = _graph_sccs(graph, allowed)
    comp_id = {}
    for cid, comp in enumerate(comps):
        for v in comp:
            comp_id[v] = cid
    buckets: dict[int, list[tuple[int, int, int]]] = {}
    for i, e in enumerate(graph.edges):
        if allowed is not None and i not in allowed:
            continue
        if comp_id[e.src] != comp_id[e.dst]:
            continue
        buckets.setdefault(comp_id[e.src], []).append((e.src, e.dst, i))
    for cid, comp_edges in sorted(buckets.items()):
        nodes = sorted({u for u, _, _ in comp_edges} | {v for _, v, _ in comp_edges})
        relabel = {v: j for j, v in enumerate(nodes)}
        yield len(nodes), [(relabel[u], relabel[v], i) for u, v, i in comp_edges]


def max_cycle_mean(
    graph: Graph, f: Potential, allowed: frozenset[int] | None = None
) -> Fraction:
    """Exact maximum cycle mean, optionally restricted to an edge subset.

    Runs Karp per strongly connected component over integer weights with
    cleared denominators; only edges whose cycles stay inside ``allowed``
    (when given) are considered.
    """
    if len(f) != graph.n_edges:
        raise DimensionMismatch("potential length does not match edge count")
    best: Fraction | None = None
    for n, comp_edges in _component_edge_lists(graph, allowed):
        scaled, scale = _scaled_int_weights([f.weights[i] for _, _, i in comp_edges])
        int_edges = [(u, v, w) for (u, v, _), w in zip(comp_edges, scaled)]
        result = None
        if n * len(int_edges) >= _NUMPY_MIN_WORK:
            result = _karp_numpy(n, int_edges)
        if result is None:
            result = _karp_python(n, int_edges)
        num, den = result
        value = Fraction(num, den * scale)
        if best is None or value > best:
            best = value
    if best is None:
        raise NoCycle("no cycle within the allowed edge set")
    return best


def beta(graph: Graph, f: Potential) -> Fraction:
    """The maximum ergodic average of ``f``: the best simple-cycle mean."""
    return max_cycle_mean(graph, f, None)


# ---------------------------------------------------------------------------
# Critical graph, uniqueness, stability margin
# ---------------------------------------------------------------------------


def critical_graph(graph: Graph, f: Potential) -> CriticalGraph:
    """Compute the support of all maximizing measures.

    Reweights so the maximum cycle mean is zero, computes longest-walk node
    potentials by relaxation, keeps the tight edges, and restricts to edges
    lying on cycles of the tight subgraph (edges whose endpoints share a
    strongly connected component).  The relaxation doubles as a certificate:
    it can only stabilize because no reweighted cycle is positive.
    """
    value = beta(graph, f)
    shifted = [w - value for w in f.weights]
    scaled, _scale = _scaled_int_weights(shifted)
    n = graph.node_count
    potential = [0] * n
    for _ in range(max(n - 1, 1)):
        changed = False
        for i, e in enumerate(graph.edges):
            cand = potential[e.src] + scaled[i]
            if cand > potential[e.dst]:
                potential[e.dst] = cand
                changed = True
        if not changed:
            break
    for i, e in enumerate(graph.edges):
        if potential[e.src] + scaled[i] > potential[e.dst]:
            raise InternalError("longest-path relaxation failed to stabilize")
    tight = [
        i
        for i, e in enumerate(graph.edges)
        if potential[e.src] + scaled[i] == potential[e.dst]
    ]
    tight_set = frozenset(tight)
    comp_of: dict[int, int] = {}
    for cid, comp in enumerate(_graph_sccs(graph, tight_set)):
        for v in comp:
            comp_of[v] = cid
    critical = frozenset(
        i for i in tight if comp_of[graph.edges[i].src] == comp_of[graph.edges[i].dst]
    )
    if not critical:
        raise InternalError("critical graph is empty; maximum cycle mean is wrong")
    return CriticalGraph(critical, value)


def _is_single_cycle(graph: Graph, edge_set: frozenset[int]) -> bool:
    out: dict[int, tuple[int, int]] = {}
    indeg: dict[int, int] = {}
    for i in edge_set:
        e = graph.edges[i]
        if e.src in out:
            return False
        out[e.src] = (i, e.dst)
        indeg[e.dst] = indeg.get(e.dst, 0) + 1
        if indeg[e.dst] > 1:
            return False
    if set(out) != set(indeg):
        return False
    start = graph.edges[min(edge_set)].src
    v = start
    steps = 0
    while True:
        _, v = out[v]
        steps += 1
        if v == start or steps > len(edge_set):
            break
    return v == start and steps == len(edge_set)


def is_unique(graph: Graph, f: Potential) -> bool:
    """Whether exactly one invariant measure maximizes ``f``.

    Equivalent to the critical graph being a single simple cycle with no
    extra edges, i.e. the maximizing face of the flow polytope being a
    vertex.
    """
    return _is_single_cycle(graph, critical_graph(graph, f).edge_set)


def second_gap(
    graph: Graph, f: Potential, budget: int = DEFAULT_CYCLE_BUDGET
) -> Fraction | None:
    """Stability margin: beta minus the best non-critical simple-cycle mean.

    Returns None when every simple cycle lies inside the critical graph
    (then no second value exists).  Perturbations below half this gap
    cannot make a non-critical cycle optimal.
    """
    cg = critical_graph(graph, f)
    best: Fraction | None = None
    for cycle in enumerate_simple_cycles(graph, budget):
        if all(i in cg.edge_set for i in cycle):
            continue
        m = cycle_mean(f, cycle)
        if best is None or m > best:
            best = m
    if best is None:
        return None
    return cg.beta_value - best


# ---------------------------------------------------------------------------
# Howard policy iteration (optional second fast path)
# ---------------------------------------------------------------------------


def _howard_evaluate(
    n: int,
    out_edges: Sequence[Sequence[tuple[int, Fraction, int]]],
    policy: Sequence[int],
) -> tuple[list[Fraction], list[Fraction]]:
    """Gain and bias of a positional policy (one out-edge per node)."""
    eta: list[Fraction | None] = [None] * n
    bias: list[Fraction | None] = [None] * n
    state = [0] * n  # 0 unvisited, 1 on current walk, 2 resolved or queued
    for start in range(n):
        if state[start]:
            continue
        chain = []
        u = start
        while state[u] == 0:
            state[u] = 1
            chain.append(u)
            u = out_edges[u][policy[u]][0]
        if state[u] == 1:
            cyc = chain[chain.index(u):]
            total = sum(
                (out_edges[x][policy[x]][1] for x in cyc), start=Fraction(0)
            )
            gain = total / len(cyc)
            anchor_pos = cyc.index(min(cyc))
            ordered = cyc[anchor_pos:] + cyc[:anchor_pos]
            eta[ordered[0]] = gain
            bias[ordered[0]] = Fraction(0)
            for x in reversed(ordered[1:]):
                nxt = out_edges[x][policy[x]][0]
                eta[x] = gain
                bias[x] = out_edges[x][policy[x]][1] - gain + bias[nxt]
        for x in chain:
            state[x] = 2
    # Resolve tree nodes by following the policy to evaluated territory.
    for start in range(n):
        if eta[start] is not None:
            continue
        trail = []
        u = start
        while eta[u] is None:
            trail.append(u)
            u = out_edges[u][policy[u]][0]
        for x in reversed(trail):
            nxt = out_edges[x][policy[x]][0]
            eta[x] = eta[nxt]
            bias[x] = out_edges[x][policy[x]][1] - eta[x] + bias[nxt]
    return eta, bias  # type: ignore[return-value]


def _howard_scc(
    n: int, out_edges: Sequence[Sequence[tuple[int, Fraction, int]]]
) -> Fraction:
    policy = [
        min(range(len(row)), key=lambda j: row[j][2]) for row in out_edges
    ]
    for _ in range(_HOWARD_ITERATION_CAP):
        eta, bias = _howard_evaluate(n, out_edges, policy)
        changed = False
        for u in range(n):
            best = eta[u]
            pick = None
            for j, (v, _w, key) in enumerate(out_edges[u]):
                if eta[v] > best or (
                    pick is not None
                    and eta[v] == best
                    and key < out_edges[u][pick][2]
                ):
                    best, pick = eta[v], j
            if pick is not None and best > eta[u]:
                policy[u] = pick
                changed = True
        if changed:
            continue
        for u in range(n):
            best = bias[u]
            pick = None
            for j, (v, w, key) in enumerate(out_edges[u]):
                if eta[v] != eta[u]:
                    continue
                val = w - eta[u] + bias[v]
                if val > best or (
                    pick is not None
                    and val == best
                    and key < out_edges[u][pick][2]
                ):
                    best, pick = val, j
            if pick is not None and best > bias[u]:
                policy[u] = pick
                changed = True
        if not changed:
            # Stationarity makes the gain non-increasing along every edge;
            # strong connectivity then forces it constant.
            return eta[0]
    raise InternalError("policy iteration exceeded its iteration cap")


def howard_beta(graph: Graph, f: Potential) -> Fraction:
    """Maximum cycle mean by max-plus policy iteration (must match beta)."""
    if len(f) != graph.n_edges:
        raise DimensionMismatch("potential length does not match edge count")
    best: Fraction | None = None
    for n, comp_edges in _component_edge_lists(graph, None):
        rows: list[list[tuple[int, Fraction, int]]] = [[] for _ in range(n)]
        for u, v, i in comp_edges:
            rows[u].append((v, f.weights[i], i))
        value = _howard_scc(n, rows)
        if best is None or value > best:
            best = value
    if best is None:
        raise NoCycle("graph has no simple cycle")
    return best
