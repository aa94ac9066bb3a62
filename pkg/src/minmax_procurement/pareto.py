"""Approximation scheme for min-max path via approximate Pareto frontiers.

The min-max path problem embeds into multi-objective shortest path: an edge
owned by agent i gets the objective vector with its cost in coordinate i and
zeros elsewhere. After flooring all weights at a small delta (so the
max/min weight ratio is bounded) a label-correcting dynamic program computes
a (1+eps)-Pareto set of the target; minimizing the maximum coordinate over
that set, re-evaluated under the original costs, gives a (1+eps)^2
approximation of the min-max optimum.

Geometric bucketing uses a rational base b with b^(nodes-1) <= 1+eps, so the
coverage factor is certified in exact arithmetic; only the initial bucket
index estimate uses floating point, and it is corrected exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graphs import Instance, PATH, Solution, cost_summary
from .solvers import MIN_MAX, NoFeasibleSolutionError, OptimumReport, shortest_path


@dataclass(frozen=True)
class PtasConfig:
    epsilon: Fraction
    delta: Fraction
    ratio_bound: Fraction  # max/min modified weight ratio, <= n^2/eps
    baseline_sp: Fraction
    short_circuit: bool  # SP == 0: the shortest path itself is optimal


@dataclass
class ParetoLabel:
    node: int
    bucket_index: tuple[int, ...]  # objectives 1..n-1
    vector: tuple[Fraction, ...]  # exact costs under the modified weights
    predecessor: Optional[tuple["ParetoLabel", int]]  # (label, edge id)

    @property
    def best_last_cost(self) -> Fraction:
        return self.vector[-1]

    def edge_ids(self) -> list[int]:
        ids: list[int] = []
        label = self
        while label.predecessor is not None:
            label, eid = label.predecessor
            ids.append(eid)
        ids.reverse()
        return ids


def encode_objectives(inst: Instance) -> dict[int, tuple[Fraction, ...]]:
    """Edge id -> objective vector: owner's coordinate carries the cost."""
    if inst.mode != PATH:
        raise ValueError("objective encoding is defined for path instances")
    vectors = {}
    zero = [Fraction(0)] * inst.agent_count
    for e in inst.edges:
        vec = list(zero)
        vec[e.owner - 1] = e.cost
        vectors[e.id] = tuple(vec)
    return vectors


def preprocess(inst: Instance, epsilon: Fraction):
    """Prune expensive edges and floor all weights at delta.

    Returns (pruned instance, modified weight vectors, PtasConfig). Edges
    costing more than the shortest-path value cannot improve on the shortest
    path and are deleted; every remaining weight component is raised to at
    least delta = eps * SP / n^2 so the weight ratio is at most n^2 / eps.
    When SP = 0 the shortest path is already min-max optimal and the config
    carries the short-circuit flag.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = inst.agent_count
    sp = shortest_path(inst).value
    if sp == 0:
        config = PtasConfig(epsilon, Fraction(0), Fraction(1), sp, True)
        return inst, encode_objectives(inst), config

    delta = epsilon * sp / (n * n)
    pruned = inst.without_edges(e.id for e in inst.edges if e.cost > sp)
    weights = {}
    hi = delta
    for eid, vec in encode_objectives(pruned).items():
        mod = tuple(max(delta, w) for w in vec)
        weights[eid] = mod
        hi = max(hi, max(mod))
    ratio = hi / delta
    assert ratio <= Fraction(n * n, 1) / epsilon
    config = PtasConfig(epsilon, delta, ratio, sp, False)
    return pruned, weights, config


def _bucket_base(epsilon: Fraction, node_count: int) -> Fraction:
    """A rational b > 1 with b^(node_count-1) <= 1 + epsilon, certified exactly."""
    steps = max(node_count - 1, 1)
    approx = (1.0 + float(epsilon)) ** (1.0 / steps)
    base = Fraction(approx).limit_denominator(10**6)
    one_plus = 1 + epsilon
    if base <= 1:
        base = 1 + epsilon / steps
    while base**steps > one_plus:  # shrink toward 1 until certified exactly
        base = 1 + (base - 1) * Fraction(9, 10)
    assert base > 1
    return base


class _Bucketizer:
    def __init__(self, base: Fraction, delta: Fraction):
        self.base = base
        self.delta = delta
        self._log_base = math.log(float(base))
        self._powers = [Fraction(1)]

    def _power(self, k: int) -> Fraction:
        while len(self._powers) <= k:
            self._powers.append(self._powers[-1] * self.base)
        return self._powers[k]

    def index(self, value: Fraction) -> int:
        """Smallest k >= 0 with value <= delta * base^k (0 for value <= delta)."""
        if value <= self.delta:
            return 0
        k = max(int(math.log(float(value / self.delta)) / self._log_base), 0)
        while self.delta * self._power(k) < value:
            k += 1
        while k > 0 and self.delta * self._power(k - 1) >= value:
            k -= 1
        return k


def pareto_eps(inst: Instance, weights: dict[int, tuple[Fraction, ...]],
               epsilon: Fraction) -> list[ParetoLabel]:
    """Labels at the target forming a (1+eps)-Pareto set of s-t paths.

    Round-based relaxation: node_count-1 rounds over all edges, keeping per
    (node, bucket cell) the label with minimal last-objective cost. For every
    Pareto-optimal path p there is a returned label y with
    vector(y) <= (1+eps) * vector(p) componentwise, exactly.
    """
    epsilon = Fraction(epsilon)
    n = inst.agent_count
    s, t = inst.source, inst.target_or_root
    bucketizer = _Bucketizer(_bucket_base(epsilon, inst.node_count),
                             _min_positive(weights))
    incident: list[list[tuple[int, int]]] = [[] for _ in range(inst.node_count)]
    for e in inst.edges:
        if e.id not in weights:
            continue
        incident[e.tail].append((e.head, e.id))
        if not inst.directed:
            incident[e.head].append((e.tail, e.id))
    for lst in incident:
        lst.sort(key=lambda pair: pair[1])

    def cell_key(node: int, vec: tuple[Fraction, ...]) -> tuple:
        return (node, tuple(bucketizer.index(v) for v in vec[:-1]))

    start = ParetoLabel(s, (0,) * (n - 1), tuple(Fraction(0) for _ in range(n)), None)
    cells: dict[tuple, ParetoLabel] = {cell_key(s, start.vector): start}
    frontier = [start]
    for _ in range(max(inst.node_count - 1, 1)):
        new_frontier: list[ParetoLabel] = []
        for label in frontier:
            for head, eid in incident[label.node]:
                vec = tuple(a + b for a, b in zip(label.vector, weights[eid]))
                key = cell_key(head, vec)
                kept = cells.get(key)
                if kept is None or vec[-1] < kept.vector[-1]:
                    new = ParetoLabel(head, key[1], vec, (label, eid))
                    cells[key] = new
                    new_frontier.append(new)
        frontier = new_frontier
        if not frontier:
            break
    return [label for key, label in sorted(cells.items()) if label.node == t]


def _min_positive(weights: dict[int, tuple[Fraction, ...]]) -> Fraction:
    values = [w for vec in weights.values() for w in vec if w > 0]
    if not values:
        return Fraction(1)
    return min(values)


def _simplify_path(inst: Instance, edge_ids: list[int]) -> list[int]:
    """Drop cycles from a source-target walk; never increases any cost."""
    node = inst.source
    nodes = [node]
    kept: list[int] = []
    seen = {node: 0}
    for eid in edge_ids:
        e = inst.edge_by_id(eid)
        node = e.head if e.tail == node else e.tail
        if node in seen:
            idx = seen[node]
            for dropped in nodes[idx + 1:]:
                del seen[dropped]
            del nodes[idx + 1:]
            del kept[idx:]
        else:
            seen[node] = len(nodes)
            nodes.append(node)
            kept.append(eid)
            continue
    return kept


def minmax_ptas(inst: Instance, epsilon: Fraction) -> OptimumReport:
    """(1+eps)^2-approximate min-max s-t path.

    Runs the approximate Pareto DP on the floored weights, then re-evaluates
    every candidate under the original costs and returns the best.
    """
    if inst.mode != PATH:
        raise ValueError("the approximation scheme handles path instances only")
    pruned, weights, config = preprocess(inst, epsilon)
    if config.short_circuit:
        witness = shortest_path(inst).witness
        return OptimumReport(MIN_MAX, cost_summary(inst, witness).max_cost, witness)

    labels = pareto_eps(pruned, weights, config.epsilon)
    best: Optional[tuple[Fraction, tuple[int, ...]]] = None
    for label in labels:
        ids = _simplify_path(pruned, label.edge_ids())
        sol = Solution(ids)
        value = cost_summary(inst, sol).max_cost
        key = (value, tuple(sorted(ids)))
        if best is None or key < best:
            best = key
    if best is None:
        raise NoFeasibleSolutionError("no source-target path survived preprocessing")
    return OptimumReport(MIN_MAX, best[0], Solution(best[1]))
