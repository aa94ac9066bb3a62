"""Agent-partitioned weighted multigraphs with exact rational costs.

An instance is either an s-t path problem on an undirected (or directed)
multigraph, or an arborescence problem on a directed multigraph rooted at a
designated node. Edges carry an owning agent and a nonnegative rational cost;
parallel edges are allowed and edges are identified by integer id only.

All costs are `fractions.Fraction`. No floating point enters any comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

PATH = "path"
ARBORESCENCE = "arborescence"

FILE_FORMAT_VERSION = 1


class MalformedSolutionError(ValueError):
    """A solution references edge ids that the instance does not have."""


class InstanceFormatError(ValueError):
    """An instance file or dict does not conform to the on-disk schema."""


def as_cost(value) -> Fraction:
    """Coerce ints/strings like "3" or "1/2" to a nonnegative Fraction."""
    cost = Fraction(value)
    if cost < 0:
        raise ValueError(f"edge cost must be nonnegative, got {cost}")
    return cost


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    owner: int
    cost: Fraction

    def endpoints(self) -> tuple[int, int]:
        return (self.tail, self.head)


@dataclass(frozen=True)
class Instance:
    """Immutable problem instance.

    `mode` selects the feasible set: simple paths from `source` to
    `target_or_root` (PATH), or spanning arborescences rooted at
    `target_or_root` (ARBORESCENCE; `source` conventionally equals the root).
    """

    directed: bool
    node_count: int
    edges: tuple[Edge, ...]
    agent_count: int
    mode: str
    source: int
    target_or_root: int

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.agent_count < 1:
            raise ValueError("agent_count must be positive")
        if self.mode not in (PATH, ARBORESCENCE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == ARBORESCENCE and not self.directed:
            raise ValueError("arborescence mode requires a directed graph")
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise ValueError(f"duplicate edge id {e.id}")
            seen.add(e.id)
            if not (0 <= e.tail < self.node_count and 0 <= e.head < self.node_count):
                raise ValueError(f"edge {e.id} has endpoints outside 0..{self.node_count - 1}")
            if not (1 <= e.owner <= self.agent_count):
                raise ValueError(f"edge {e.id} owner {e.owner} outside 1..{self.agent_count}")
            if e.cost < 0:
                raise ValueError(f"edge {e.id} has negative cost")
        for node in (self.source, self.target_or_root):
            if not (0 <= node < self.node_count):
                raise ValueError("designated node outside the node range")

    # -- lookups ----------------------------------------------------------

    def edge_by_id(self, edge_id: int) -> Edge:
        try:
            return self._edge_index[edge_id]
        except KeyError:
            raise MalformedSolutionError(f"unknown edge id {edge_id}") from None

    @property
    def _edge_index(self) -> dict[int, Edge]:
        # cached on first use; object.__setattr__ because the dataclass is frozen
        index = self.__dict__.get("_edge_index_cache")
        if index is None:
            index = {e.id: e for e in self.edges}
            object.__setattr__(self, "_edge_index_cache", index)
        return index

    def agent_edges(self, agent: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.owner == agent)

    # -- derived instances -------------------------------------------------

    def with_costs(self, new_costs: Mapping[int, Fraction]) -> "Instance":
        """Copy with the given edge costs replaced (same topology and ids)."""
        edges = []
        for e in self.edges:
            if e.id in new_costs:
                edges.append(Edge(e.id, e.tail, e.head, e.owner, as_cost(new_costs[e.id])))
            else:
                edges.append(e)
        return Instance(self.directed, self.node_count, tuple(edges),
                        self.agent_count, self.mode, self.source, self.target_or_root)

    def without_agent(self, agent: int) -> "Instance":
        """Copy with all of `agent`'s edges deleted (agent ids unchanged)."""
        edges = tuple(e for e in self.edges if e.owner != agent)
        return Instance(self.directed, self.node_count, edges,
                        self.agent_count, self.mode, self.source, self.target_or_root)

    def without_edges(self, edge_ids: Iterable[int]) -> "Instance":
        drop = set(edge_ids)
        edges = tuple(e for e in self.edges if e.id not in drop)
        return Instance(self.directed, self.node_count, edges,
                        self.agent_count, self.mode, self.source, self.target_or_root)


@dataclass(frozen=True)
class Solution:
    """A claimed feasible solution: a set of edge ids."""

    edge_ids: frozenset[int]

    def __init__(self, edge_ids: Iterable[int]):
        object.__setattr__(self, "edge_ids", frozenset(edge_ids))

    def __contains__(self, edge_id: int) -> bool:
        return edge_id in self.edge_ids

    def sorted_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.edge_ids))


@dataclass(frozen=True)
class CostSummary:
    per_agent: tuple[Fraction, ...]
    max_cost: Fraction
    sum_cost: Fraction


def agent_cost(inst: Instance, sol: Solution, agent: int) -> Fraction:
    """Sum of costs of `agent`'s edges selected in `sol` (0 if none)."""
    total = Fraction(0)
    for edge_id in sol.edge_ids:
        e = inst.edge_by_id(edge_id)
        if e.owner == agent:
            total += e.cost
    return total


def cost_summary(inst: Instance, sol: Solution) -> CostSummary:
    per_agent = [Fraction(0)] * inst.agent_count
    for edge_id in sol.edge_ids:
        e = inst.edge_by_id(edge_id)
        per_agent[e.owner - 1] += e.cost
    per_agent = tuple(per_agent)
    return CostSummary(per_agent, max(per_agent), sum(per_agent, Fraction(0)))


def solution_cost(inst: Instance, sol: Solution) -> Fraction:
    """Total (min-sum) cost of a solution."""
    return sum((inst.edge_by_id(i).cost for i in sol.edge_ids), Fraction(0))


# -- feasibility ------------------------------------------------------------


def validate_solution(inst: Instance, sol: Solution) -> bool:
    """True iff `sol` is feasible for the instance's mode.

    Path mode: the edges form a simple path from source to target (undirected
    instances may traverse edges either way; directed instances must respect
    orientation). Arborescence mode: every node is reachable from the root and
    every non-root node has exactly one selected incoming edge.

    Raises MalformedSolutionError for unknown edge ids.
    """
    edges = [inst.edge_by_id(i) for i in sol.edge_ids]
    if inst.mode == PATH:
        return _is_simple_path(inst, edges)
    return _is_arborescence(inst, edges)


def _is_simple_path(inst: Instance, edges: list[Edge]) -> bool:
    s, t = inst.source, inst.target_or_root
    if s == t:
        return not edges
    if not edges:
        return False
    # Walk from s, consuming exactly one incident unused edge per step.
    incident: dict[int, list[Edge]] = {}
    for e in edges:
        incident.setdefault(e.tail, []).append(e)
        if not inst.directed:
            incident.setdefault(e.head, []).append(e)
    visited = {s}
    node = s
    used = set()
    while node != t:
        candidates = [e for e in incident.get(node, []) if e.id not in used]
        if len(candidates) != 1:
            return False
        e = candidates[0]
        nxt = e.head if e.tail == node else e.tail
        if inst.directed and e.tail != node:
            return False
        if nxt in visited:
            return False
        used.add(e.id)
        visited.add(nxt)
        node = nxt
    if len(used) != len(edges):
        return False
    # No stray incidences: every visited node must have degree <= 2 among
    # the selected edges, which the single-walk consumption already enforced
    # via `used == edges`. Endpoints must not have extra edges either; that is
    # also covered because all edges were consumed on the walk.
    return True


def _is_arborescence(inst: Instance, edges: list[Edge]) -> bool:
    root = inst.target_or_root
    indeg = [0] * inst.node_count
    children: dict[int, list[int]] = {}
    for e in edges:
        indeg[e.head] += 1
        children.setdefault(e.tail, []).append(e.head)
    if indeg[root] != 0:
        return False
    for v in range(inst.node_count):
        if v != root and indeg[v] != 1:
            return False
    # reachability from root via selected edges
    stack = [root]
    seen = {root}
    while stack:
        u = stack.pop()
        for v in children.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == inst.node_count


# -- serialization -----------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": FILE_FORMAT_VERSION,
        "directed": inst.directed,
        "nodes": inst.node_count,
        "mode": inst.mode,
        "source": inst.source,
        "target_or_root": inst.target_or_root,
        "agents": inst.agent_count,
        "edges": [
            {"id": e.id, "tail": e.tail, "head": e.head, "owner": e.owner,
             "cost": str(e.cost)}
            for e in inst.edges
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        if data["version"] != FILE_FORMAT_VERSION:
            raise InstanceFormatError(f"unsupported version {data['version']!r}")
        edges = tuple(
            Edge(int(e["id"]), int(e["tail"]), int(e["head"]), int(e["owner"]),
                 as_cost(e["cost"]))
            for e in data["edges"]
        )
        return Instance(
            directed=bool(data["directed"]),
            node_count=int(data["nodes"]),
            edges=edges,
            agent_count=int(data["agents"]),
            mode=data["mode"],
            source=int(data["source"]),
            target_or_root=int(data["target_or_root"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"bad instance data: {exc}") from exc


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return instance_from_dict(data)
