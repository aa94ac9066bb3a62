"""Worst-case chain constructions and the adversary driver.

The chain family: ``l`` blocks in series, each offering one route per agent.
In the expanded (path) variant each block route is an n-edge path spreading
ownership over all agents, with the route owner's edge at full cost and tiny
helper costs elsewhere. The directed variant adds paired backward helper
edges so an arborescence can cover the unselected routes' interior nodes.

The driver mechanically plays the lower-bound argument against any
deterministic allocation algorithm: start from the all-ones instance, find
the most-loaded agent, then for every other agent zero out its selected
edges and bump the rest. A monotone algorithm must keep its choices, ending
with a certified approximation-ratio witness close to n; any instability is
converted into an exactly re-verifiable weak-monotonicity violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .graphs import (
    ARBORESCENCE,
    PATH,
    Edge,
    Instance,
    Solution,
    cost_summary,
    validate_solution,
)
from .audit import (
    InfeasibleAllocationError,
    Perturbation,
    ViolationWitness,
    _agent_cost_table,
    _monotonicity_terms,
    is_strict_edge_stability,
)
from .solvers import chain_minmax_exact
from .vcg import AllocationAlgorithm

MODE_PATH = "path"
MODE_DMST = "dmst"


@dataclass(frozen=True)
class ChainSpec:
    agents: int
    blocks: int
    base_cost: Fraction = Fraction(1)
    helper_eps: Optional[Fraction] = None  # None: mode default

    def __post_init__(self):
        if self.agents < 2:
            raise ValueError("the constructions need at least two agents")
        if self.blocks < 1:
            raise ValueError("need at least one block")
        if Fraction(self.base_cost) <= 0:
            raise ValueError("base cost must be positive")
        if self.helper_eps is not None and not (
                0 < Fraction(self.helper_eps) < Fraction(self.base_cost)):
            raise ValueError("helper cost must lie strictly between 0 and the base cost")

    def eps_for(self, mode: str) -> Fraction:
        if self.helper_eps is not None:
            return Fraction(self.helper_eps)
        if mode == MODE_PATH:
            return Fraction(1, 2 * self.blocks)
        if mode == MODE_DMST:
            return Fraction(1, 4 * self.blocks * self.agents)
        raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class BlockPath:
    """One block route: the owning agent's full path through the block."""

    agent: int
    edge_ids: tuple[int, ...]  # rightward, in traversal order
    main_edge_id: int  # the full-cost edge, owned by `agent`
    leftward_ids: tuple[int, ...] = ()  # directed variant only


@dataclass(frozen=True)
class BlockIndexing:
    """Per block: the n routes, keyed by owning agent (1..n)."""

    blocks: tuple[tuple[BlockPath, ...], ...]

    def route(self, block: int, agent: int) -> BlockPath:
        return self.blocks[block][agent - 1]

    @property
    def block_count(self) -> int:
        return len(self.blocks)


def gen_chain(spec: ChainSpec) -> Instance:
    """Plain chain: l+1 nodes, n parallel edges per block, path mode."""
    n, l = spec.agents, spec.blocks
    base = Fraction(spec.base_cost)
    edges = []
    eid = 0
    for k in range(l):
        for agent in range(1, n + 1):
            edges.append(Edge(eid, k, k + 1, agent, base))
            eid += 1
    return Instance(False, l + 1, tuple(edges), n, PATH, 0, l)


def expand_chain(chain: Instance, eps: Fraction) -> tuple[Instance, BlockIndexing]:
    """Expand every block edge into an n-edge path spreading ownership.

    The route replacing agent i's edge keeps that edge's cost on position i
    (owned by i) and gives every other position j a helper edge owned by j at
    cost eps. Edge ids are assigned block-major, route-major, left to right.
    """
    eps = Fraction(eps)
    if chain.mode != PATH or chain.directed:
        raise ValueError("expand_chain expects an undirected path-mode chain")
    n = chain.agent_count
    l = chain.node_count - 1
    by_block: dict[int, dict[int, Fraction]] = {k: {} for k in range(l)}
    for e in chain.edges:
        k = min(e.tail, e.head)
        if abs(e.head - e.tail) != 1 or e.owner in by_block[k]:
            raise ValueError("instance is not a generated chain")
        by_block[k][e.owner] = e.cost

    edges: list[Edge] = []
    blocks: list[tuple[BlockPath, ...]] = []
    eid = 0
    next_node = l + 1  # u-nodes are 0..l; interiors appended after
    for k in range(l):
        routes = []
        for agent in range(1, n + 1):
            base = by_block[k][agent]
            interior = list(range(next_node, next_node + n - 1))
            next_node += n - 1
            nodes = [k] + interior + [k + 1]
            ids = []
            main_id = None
            for j in range(1, n + 1):
                cost = base if j == agent else eps
                edges.append(Edge(eid, nodes[j - 1], nodes[j], j, cost))
                if j == agent:
                    main_id = eid
                ids.append(eid)
                eid += 1
            routes.append(BlockPath(agent, tuple(ids), main_id))
        blocks.append(tuple(routes))
    inst = Instance(False, next_node, tuple(edges), n, PATH, 0, l)
    return inst, BlockIndexing(tuple(blocks))


def gen_dmst_chain(spec: ChainSpec) -> tuple[Instance, BlockIndexing]:
    """Directed chain for the arborescence bound, rooted at the left end.

    Per block and agent i: n rightward edges (the first owned by i at the
    base cost, the rest owned cyclically by i+1, i+2, ... at cost eps, the
    same order in every block) and, for each of those n-1 helper edges, a
    paired opposite edge of cost eps with the same owner.
    """
    n, l = spec.agents, spec.blocks
    base = Fraction(spec.base_cost)
    eps = spec.eps_for(MODE_DMST)
    edges: list[Edge] = []
    blocks: list[tuple[BlockPath, ...]] = []
    eid = 0
    next_node = l + 1
    for k in range(l):
        routes = []
        for agent in range(1, n + 1):
            interior = list(range(next_node, next_node + n - 1))
            next_node += n - 1
            nodes = [k] + interior + [k + 1]
            ids = []
            left_ids = []
            main_id = None
            for pos in range(1, n + 1):
                owner = ((agent - 1 + pos - 1) % n) + 1
                cost = base if pos == 1 else eps
                edges.append(Edge(eid, nodes[pos - 1], nodes[pos], owner, cost))
                if pos == 1:
                    main_id = eid
                ids.append(eid)
                eid += 1
                if pos > 1:
                    edges.append(Edge(eid, nodes[pos], nodes[pos - 1], owner, eps))
                    left_ids.append(eid)
                    eid += 1
            routes.append(BlockPath(agent, tuple(ids), main_id, tuple(left_ids)))
        blocks.append(tuple(routes))
    inst = Instance(True, next_node, tuple(edges), n, ARBORESCENCE, 0, 0)
    return inst, BlockIndexing(tuple(blocks))


def build_adversary_instance(spec: ChainSpec, mode: str) -> tuple[Instance, BlockIndexing]:
    if mode == MODE_PATH:
        return expand_chain(gen_chain(spec), spec.eps_for(MODE_PATH))
    if mode == MODE_DMST:
        return gen_dmst_chain(spec)
    raise ValueError(f"unknown mode {mode!r}")


def chain_exact_allocator(indexing: BlockIndexing) -> AllocationAlgorithm:
    """Wrap the exact block-structured min-max solver as an allocation rule.

    Works for any cost assignment on the same expanded-chain topology: per
    block it reads each route's per-agent cost vector off the instance and
    lets the makespan DP choose one route per block.
    """

    def allocate(inst: Instance) -> Solution:
        n = inst.agent_count
        vectors = []
        edge_lists = []
        for routes in indexing.blocks:
            block_vecs = []
            block_edges = []
            for route in routes:
                vec = [Fraction(0)] * n
                for eid in route.edge_ids:
                    e = inst.edge_by_id(eid)
                    vec[e.owner - 1] += e.cost
                block_vecs.append(tuple(vec))
                block_edges.append(route.edge_ids)
            vectors.append(block_vecs)
            edge_lists.append(block_edges)
        return chain_minmax_exact(n, vectors, edge_lists).witness

    return allocate


# -- the driver -------------------------------------------------------------


@dataclass(frozen=True)
class RatioWitness:
    final_costs: tuple[tuple[int, Fraction], ...]  # edge id -> cost under t*
    algorithm_cost: Fraction
    opt_upper_bound: Fraction
    upper_bound_solution: Solution
    certified_ratio: Fraction
    guaranteed_bound: Optional[Fraction]  # n - 4 n^3 / l, default helper cost only


@dataclass(frozen=True)
class AdversaryStep:
    agent: int
    allocation: Solution
    stable: bool


@dataclass(frozen=True)
class AdversaryReport:
    mode: str
    spec: ChainSpec
    selections_per_agent: tuple[int, ...]  # l_i
    heavy_agent: int  # i*
    trace: tuple[AdversaryStep, ...]
    ratio: Optional[RatioWitness]
    violation: Optional[ViolationWitness]

    @property
    def outcome(self) -> str:
        return "ratio" if self.ratio is not None else "monotonicity-violation"


def _selected_routes(inst: Instance, indexing: BlockIndexing,
                     sol: Solution) -> list[list[BlockPath]]:
    """Per block, the routes all of whose rightward edges are selected."""
    per_block = []
    for routes in indexing.blocks:
        chosen = [r for r in routes if set(r.edge_ids) <= sol.edge_ids]
        if not chosen:
            raise InfeasibleAllocationError(
                "allocation selects no complete route in some block")
        per_block.append(chosen)
    return per_block


def _count_selections(inst: Instance, indexing: BlockIndexing,
                      sol: Solution) -> list[int]:
    counts = [0] * inst.agent_count
    for chosen in _selected_routes(inst, indexing, sol):
        for route in chosen:
            counts[route.agent - 1] += 1
    return counts


def _transformation(inst: Instance, agent: int, sol: Solution,
                    eps: Fraction) -> Perturbation:
    """Selected edges of `agent` -> 0; unselected gain eps."""
    new_costs = {}
    for e in inst.agent_edges(agent):
        if e.id in sol.edge_ids:
            new_costs[e.id] = Fraction(0)
        else:
            new_costs[e.id] = e.cost + eps
    return Perturbation(agent, new_costs)


def run_adversary(alg: AllocationAlgorithm, spec: ChainSpec,
                  mode: str) -> AdversaryReport:
    """Execute the lower-bound argument against `alg`.

    Either returns a ratio witness (certified approximation ratio, at least
    n - 4n^3/l under the default helper cost) or a strictly re-verifiable
    weak-monotonicity violation. Requires the all-ones start (base cost 1).
    """
    if Fraction(spec.base_cost) != 1:
        raise ValueError("the lower-bound argument starts from unit base costs")
    eps = spec.eps_for(mode)
    default_eps = eps == ChainSpec(spec.agents, spec.blocks).eps_for(mode)
    inst, indexing = build_adversary_instance(spec, mode)
    n, l = spec.agents, spec.blocks

    sol = alg(inst)
    if not validate_solution(inst, sol):
        raise InfeasibleAllocationError("initial allocation is infeasible")
    counts = _count_selections(inst, indexing, sol)
    heavy = max(range(1, n + 1), key=lambda a: (counts[a - 1], -a))
    assert counts[heavy - 1] * n >= l, "pigeonhole bound violated"
    heavy_blocks = [
        k for k, chosen in enumerate(_selected_routes(inst, indexing, sol))
        if any(r.agent == heavy for r in chosen)
    ]

    if mode == MODE_PATH:
        order = [a for a in range(1, n + 1) if a != heavy]
    else:
        # positions n..2 along the heavy agent's route ownership cycle
        order = [((heavy - 1 + pos - 1) % n) + 1 for pos in range(n, 1, -1)]

    trace: list[AdversaryStep] = []
    cur_inst, cur_sol = inst, sol
    for step, agent in enumerate(order, start=1):
        pert = _transformation(cur_inst, agent, cur_sol, eps)
        assert is_strict_edge_stability(cur_inst, cur_sol, pert), \
            "transformation must be a strict edge-stability perturbation"
        new_inst = pert.apply(cur_inst)
        new_sol = alg(new_inst)
        if not validate_solution(new_inst, new_sol):
            raise InfeasibleAllocationError(f"allocation infeasible after step {step}")
        if mode == MODE_PATH:
            stable = new_sol.edge_ids == cur_sol.edge_ids
        else:
            stable = _dmst_stable(indexing, heavy, heavy_blocks, new_sol,
                                  prefix=n - step)
        trace.append(AdversaryStep(agent, new_sol, stable))
        if not stable:
            witness = _violation_witness(cur_inst, pert, cur_sol, new_sol)
            return AdversaryReport(mode, spec, tuple(counts), heavy,
                                   tuple(trace), None, witness)
        cur_inst, cur_sol = new_inst, new_sol

    alg_cost = cost_summary(cur_inst, cur_sol).max_cost
    assert alg_cost >= counts[heavy - 1]
    ub_sol, ub_value = opt_upper_bound(
        cur_inst, indexing, mode, heavy, heavy_blocks, sol, eps,
        default_eps=default_eps)
    ratio = alg_cost / ub_value
    guaranteed_bound = None
    if default_eps:
        guaranteed_bound = Fraction(n) - Fraction(4 * n**3, l)
        assert ratio >= guaranteed_bound
    witness = RatioWitness(
        final_costs=tuple((e.id, e.cost) for e in cur_inst.edges),
        algorithm_cost=alg_cost,
        opt_upper_bound=ub_value,
        upper_bound_solution=ub_sol,
        certified_ratio=ratio,
        guaranteed_bound=guaranteed_bound,
    )
    return AdversaryReport(mode, spec, tuple(counts), heavy, tuple(trace),
                           witness, None)


def _violation_witness(inst: Instance, pert: Perturbation, x: Solution,
                       x_prime: Solution) -> ViolationWitness:
    from .audit import EDGE_STABILITY

    terms = _monotonicity_terms(inst, pert, x, x_prime)
    witness = ViolationWitness(
        EDGE_STABILITY, pert.agent,
        _agent_cost_table(inst, pert.agent),
        _agent_cost_table(pert.apply(inst), pert.agent),
        x, x_prime, terms,
    )
    assert witness.is_strict(), \
        "instability without a strict monotonicity violation"
    return witness


def _dmst_stable(indexing: BlockIndexing, heavy: int, heavy_blocks: list[int],
                 sol: Solution, prefix: int) -> bool:
    """After k steps the first n-k edges of the heavy route must persist in
    every block where it was initially selected."""
    for k in heavy_blocks:
        route = indexing.route(k, heavy)
        if not set(route.edge_ids[:prefix]) <= sol.edge_ids:
            return False
    return True


def opt_upper_bound(inst: Instance, indexing: BlockIndexing, mode: str,
                    heavy: int, heavy_blocks: list[int], initial_sol: Solution,
                    eps: Fraction, default_eps: bool) -> tuple[Solution, Fraction]:
    """Explicit cheap solution under the final costs t*.

    The heavy agent's blocks are redistributed round-robin over all agents;
    every other block keeps a route whose cost collapsed to helper scale.
    Returns the solution and its exact max agent cost, checked against the
    closed-form bound ceil(l1/n)(1+eps) + 2*eps*l (path) respectively
    + 4*eps*n*l (directed), and against l1/n + 4 under the default eps.
    """
    n = inst.agent_count
    l = indexing.block_count
    l1 = len(heavy_blocks)
    heavy_set = set(heavy_blocks)
    initial_routes = _selected_routes(inst, indexing, initial_sol)

    ids: list[int] = []
    rr = 0
    for k in range(l):
        if k in heavy_set:
            agent = (rr % n) + 1
            rr += 1
        else:
            agent = min(r.agent for r in initial_routes[k] if r.agent != heavy)
        route = indexing.route(k, agent)
        ids.extend(route.edge_ids)
        if mode == MODE_DMST:
            for other in indexing.blocks[k]:
                if other.agent != agent:
                    ids.extend(other.leftward_ids)

    sol = Solution(ids)
    assert validate_solution(inst, sol)
    value = cost_summary(inst, sol).max_cost

    slack = 2 * eps * l if mode == MODE_PATH else 4 * eps * n * l
    closed_form = Fraction(math.ceil(Fraction(l1, n))) * (1 + eps) + slack
    assert value <= closed_form
    if default_eps:
        assert value <= Fraction(l1, n) + 4
    return sol, value
