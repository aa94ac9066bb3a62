"""Exact optimization oracles.

Min-sum solvers (Dijkstra shortest path, contraction-based minimum
arborescence) plus brute-force min-max oracles for desk-scale ground truth.
Everything runs on exact rationals; witnesses are deterministic.

Tie-breaking: the brute-force oracles return, among equal-value optima, the
solution whose sorted edge-id sequence is lexicographically smallest. The
polynomial solvers use a deterministic smallest-edge-id preference (greedy
walk over the shortest-path subgraph for paths; (cost, id) keys inside the
arborescence contraction); same instance bytes always give the same witness.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from .graphs import (
    ARBORESCENCE,
    PATH,
    CostSummary,
    Edge,
    Instance,
    Solution,
    cost_summary,
    solution_cost,
    validate_solution,
)

MIN_SUM = "min-sum"
MIN_MAX = "min-max"

BRUTE_NODE_BUDGET = 14


class NoFeasibleSolutionError(ValueError):
    """The instance admits no feasible solution."""


class BudgetExceededError(RuntimeError):
    """A brute-force oracle refused to run past its enumeration budget."""


class StructureError(ValueError):
    """Input does not have the block structure an oracle requires."""


@dataclass(frozen=True)
class OptimumReport:
    objective: str
    value: Fraction
    witness: Optional[Solution]
    choices: Optional[tuple[int, ...]] = None  # per-block picks, chain DP only


# -- shortest path ----------------------------------------------------------


def _adjacency(inst: Instance, reverse: bool = False):
    adj: list[list[tuple[int, Edge]]] = [[] for _ in range(inst.node_count)]
    for e in inst.edges:
        if inst.directed:
            if reverse:
                adj[e.head].append((e.tail, e))
            else:
                adj[e.tail].append((e.head, e))
        else:
            adj[e.tail].append((e.head, e))
            adj[e.head].append((e.tail, e))
    return adj


def _dijkstra(inst: Instance, start: int, reverse: bool = False) -> list[Optional[Fraction]]:
    adj = _adjacency(inst, reverse=reverse)
    dist: list[Optional[Fraction]] = [None] * inst.node_count
    heap: list[tuple[Fraction, int]] = [(Fraction(0), start)]
    while heap:
        d, u = heapq.heappop(heap)
        if dist[u] is not None:
            continue
        dist[u] = d
        for v, e in adj[u]:
            if dist[v] is None:
                heapq.heappush(heap, (d + e.cost, v))
    return dist


def shortest_path(inst: Instance) -> OptimumReport:
    """Min-sum s-t path with a deterministic witness.

    The witness is built by a greedy walk over the subgraph of edges lying on
    some minimum-cost path: at each node take the smallest-id usable edge from
    whose head the target is still reachable without revisiting nodes. Every
    walk inside that subgraph has total cost equal to the optimum.
    """
    if inst.mode != PATH:
        raise ValueError("shortest_path requires a path-mode instance")
    s, t = inst.source, inst.target_or_root
    dist_s = _dijkstra(inst, s)
    if dist_s[t] is None:
        raise NoFeasibleSolutionError("source and target are disconnected")
    dist_t = _dijkstra(inst, t, reverse=True)
    sp = dist_s[t]
    if s == t:
        return OptimumReport(MIN_SUM, Fraction(0), Solution(()))

    # Oriented shortest-path subgraph: u -> v allowed iff some optimal path
    # uses the edge in that direction.
    sub: list[list[tuple[int, Edge]]] = [[] for _ in range(inst.node_count)]
    for e in inst.edges:
        ends = [(e.tail, e.head)] if inst.directed else [(e.tail, e.head), (e.head, e.tail)]
        for u, v in ends:
            if dist_s[u] is not None and dist_t[v] is not None \
                    and dist_s[u] + e.cost + dist_t[v] == sp:
                sub[u].append((v, e))
    for lst in sub:
        lst.sort(key=lambda pair: pair[1].id)

    def reaches_target(start: int, blocked: set[int]) -> bool:
        if start == t:
            return True
        stack = [start]
        seen = {start}
        while stack:
            u = stack.pop()
            for v, _ in sub[u]:
                if v == t:
                    return True
                if v not in seen and v not in blocked:
                    seen.add(v)
                    stack.append(v)
        return False

    path_edges: list[Edge] = []
    visited = {s}
    node = s
    while node != t:
        for v, e in sub[node]:
            if v not in visited and reaches_target(v, visited):
                path_edges.append(e)
                visited.add(v)
                node = v
                break
        else:  # pragma: no cover - the subgraph always admits a continuation
            raise AssertionError("greedy walk got stuck in the shortest-path subgraph")
    witness = Solution(e.id for e in path_edges)
    assert solution_cost(inst, witness) == sp
    return OptimumReport(MIN_SUM, sp, witness)


# -- minimum arborescence ---------------------------------------------------


def min_arborescence(inst: Instance) -> OptimumReport:
    """Min-sum spanning arborescence via cycle contraction (Chu-Liu/Edmonds).

    Ties on incoming-edge selection break toward the smaller edge id, which
    makes the witness deterministic.
    """
    if inst.mode != ARBORESCENCE:
        raise ValueError("min_arborescence requires an arborescence-mode instance")
    root = inst.target_or_root
    chosen = _edmonds(
        nodes=list(range(inst.node_count)),
        root=root,
        edges=[(e.tail, e.head, e.cost, e.id) for e in inst.edges],
    )
    witness = Solution(chosen)
    value = solution_cost(inst, witness)
    return OptimumReport(MIN_SUM, value, witness)


def _edmonds(nodes: list[int], root: int, edges: list[tuple[int, int, Fraction, int]]) -> set[int]:
    """Return the set of original edge ids forming a min-cost arborescence."""
    # recursion on contracted graphs; edges carry their original id through
    best_in: dict[int, tuple[int, int, Fraction, int]] = {}
    for tail, head, cost, eid in edges:
        if head == root or tail == head:
            continue
        cur = best_in.get(head)
        if cur is None or (cost, eid) < (cur[2], cur[3]):
            best_in[head] = (tail, head, cost, eid)
    for v in nodes:
        if v != root and v not in best_in:
            raise NoFeasibleSolutionError(f"node {v} is unreachable from the root")

    # find a cycle among the chosen in-edges
    color = {v: 0 for v in nodes}  # 0 unvisited, 1 in progress, 2 done
    cycle: list[int] = []
    for start in nodes:
        if color[start] or start == root:
            continue
        path = []
        v = start
        while v != root and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = best_in[v][0]
        if v != root and color[v] == 1:  # found a new cycle through v
            idx = path.index(v)
            cycle = path[idx:]
        for u in path:
            color[u] = 2
        if cycle:
            break

    if not cycle:
        return {rec[3] for rec in best_in.values()}

    cycle_set = set(cycle)
    cycle_in = {v: best_in[v] for v in cycle}
    # contract the cycle into a fresh super-node
    super_node = max(nodes) + 1
    mapping = {v: (super_node if v in cycle_set else v) for v in nodes}
    contracted: list[tuple[int, int, Fraction, int]] = []
    for tail, head, cost, eid in edges:
        ct, ch = mapping[tail], mapping[head]
        if ct == ch:
            continue
        if ch == super_node:
            # entering the cycle at `head`: discount by the cycle edge replaced
            contracted.append((ct, ch, cost - cycle_in[head][2], eid))
        else:
            contracted.append((ct, ch, cost, eid))
    sub_nodes = [v for v in nodes if v not in cycle_set] + [super_node]
    sub_ids = _edmonds(sub_nodes, mapping[root], contracted)

    by_id = {eid: (tail, head) for tail, head, _, eid in edges}
    chosen = set(sub_ids)
    entering_head = None
    for eid in sub_ids:
        head = by_id[eid][1]
        if head in cycle_set:
            entering_head = head
            break
    assert entering_head is not None
    for v in cycle:
        if v != entering_head:
            chosen.add(cycle_in[v][3])
    return chosen


# -- brute-force min-max ----------------------------------------------------


def _enumerate_paths(inst: Instance):
    """Yield edge-id tuples of all simple source-target paths."""
    adj = _adjacency(inst)
    s, t = inst.source, inst.target_or_root
    path: list[int] = []
    visited = {s}

    def rec(u):
        if u == t:
            yield tuple(path)
            return
        for v, e in adj[u]:
            if v in visited:
                continue
            visited.add(v)
            path.append(e.id)
            yield from rec(v)
            path.pop()
            visited.remove(v)

    if s == t:
        yield ()
    else:
        yield from rec(s)


def _enumerate_arborescences(inst: Instance):
    """Yield edge-id tuples: one in-edge per non-root node, root-reachable."""
    root = inst.target_or_root
    in_edges: list[list[Edge]] = [[] for _ in range(inst.node_count)]
    for e in inst.edges:
        if e.head != root and e.tail != e.head:
            in_edges[e.head].append(e)
    non_root = [v for v in range(inst.node_count) if v != root]
    for v in non_root:
        if not in_edges[v]:
            raise NoFeasibleSolutionError(f"node {v} is unreachable from the root")
    for combo in product(*(in_edges[v] for v in non_root)):
        parent = {v: e.tail for v, e in zip(non_root, combo)}
        # reachability: follow parents up to the root
        ok = True
        for v in non_root:
            seen = set()
            u = v
            while u != root:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = parent[u]
            if not ok:
                break
        if ok:
            yield tuple(e.id for e in combo)


def brute_minmax(inst: Instance, limit: int = BRUTE_NODE_BUDGET) -> OptimumReport:
    """Exact min-max optimum by exhaustive enumeration.

    Refuses (BudgetExceededError) when the instance has more than `limit`
    nodes; pass a larger limit to override for structured instances known to
    enumerate cheaply.
    """
    if inst.node_count > limit:
        raise BudgetExceededError(
            f"{inst.node_count} nodes exceeds the enumeration budget {limit}")
    enumerator = _enumerate_paths if inst.mode == PATH else _enumerate_arborescences
    best: Optional[tuple[Fraction, tuple[int, ...]]] = None
    for ids in enumerator(inst):
        sol = Solution(ids)
        value = cost_summary(inst, sol).max_cost
        key = (value, tuple(sorted(ids)))
        if best is None or key < best:
            best = key
    if best is None:
        raise NoFeasibleSolutionError("no feasible solution exists")
    return OptimumReport(MIN_MAX, best[0], Solution(best[1]))


def brute_minsum(inst: Instance, limit: int = BRUTE_NODE_BUDGET) -> OptimumReport:
    """Exhaustive min-sum counterpart of brute_minmax (testing oracle)."""
    if inst.node_count > limit:
        raise BudgetExceededError(
            f"{inst.node_count} nodes exceeds the enumeration budget {limit}")
    enumerator = _enumerate_paths if inst.mode == PATH else _enumerate_arborescences
    best: Optional[tuple[Fraction, tuple[int, ...]]] = None
    for ids in enumerator(inst):
        sol = Solution(ids)
        value = solution_cost(inst, sol)
        key = (value, tuple(sorted(ids)))
        if best is None or key < best:
            best = key
    if best is None:
        raise NoFeasibleSolutionError("no feasible solution exists")
    return OptimumReport(MIN_SUM, best[0], Solution(best[1]))


# -- chain-structured exact min-max -----------------------------------------


def chain_minmax_exact(
    n: int,
    block_cost_vectors: Sequence[Sequence[Sequence[Fraction]]],
    block_edges: Optional[Sequence[Sequence[Sequence[int]]]] = None,
) -> OptimumReport:
    """Exact min-max over per-block path choices (makespan-style DP).

    `block_cost_vectors[k][c][i]` is the cost agent i+1 pays when choice `c`
    is taken in block k. Dominated load vectors are pruned, so the state count
    stays small on the chain families; still exponential in n in the worst
    case (intended for n <= 3).

    When `block_edges` is given (edge ids per block and choice), the witness
    Solution is assembled from the chosen blocks.
    """
    if n < 1:
        raise StructureError("need at least one agent")
    if not block_cost_vectors:
        raise StructureError("need at least one block")
    for k, block in enumerate(block_cost_vectors):
        if not block:
            raise StructureError(f"block {k} offers no choices")
        for c, vec in enumerate(block):
            if len(vec) != n:
                raise StructureError(
                    f"block {k} choice {c} has {len(vec)} agent costs, expected {n}")

    zero = tuple(Fraction(0) for _ in range(n))
    # load vector -> per-block choice indices (deterministic: first-found wins,
    # blocks processed left to right, choices in ascending index order)
    states: dict[tuple[Fraction, ...], tuple[int, ...]] = {zero: ()}
    for block in block_cost_vectors:
        nxt: dict[tuple[Fraction, ...], tuple[int, ...]] = {}
        for load, picks in sorted(states.items(), key=lambda kv: (kv[1], kv[0])):
            for c, vec in enumerate(block):
                new_load = tuple(a + Fraction(b) for a, b in zip(load, vec))
                if new_load not in nxt:
                    nxt[new_load] = picks + (c,)
        states = _prune_dominated(nxt)

    best_load, best_picks = min(
        states.items(), key=lambda kv: (max(kv[0]), kv[1]))
    value = max(best_load)
    witness = None
    if block_edges is not None:
        ids: list[int] = []
        for k, c in enumerate(best_picks):
            ids.extend(block_edges[k][c])
        witness = Solution(ids)
    return OptimumReport(MIN_MAX, value, witness, choices=best_picks)


def _prune_dominated(states: dict[tuple[Fraction, ...], tuple[int, ...]]):
    items = sorted(states.items(), key=lambda kv: (sum(kv[0]), kv[0]))
    kept: list[tuple[tuple[Fraction, ...], tuple[int, ...]]] = []
    for load, picks in items:
        if any(all(a <= b for a, b in zip(k, load)) for k, _ in kept):
            continue
        kept.append((load, picks))
    return dict(kept)


# -- convenience ------------------------------------------------------------


def min_sum_optimum(inst: Instance) -> OptimumReport:
    """Dispatch to the mode's exact min-sum solver (SC oracle)."""
    if inst.mode == PATH:
        return shortest_path(inst)
    return min_arborescence(inst)
