"""Property-testing of truthfulness and weak monotonicity.

Black-box checks against allocation algorithms and mechanisms:

* weak monotonicity of an allocation rule under a single-agent perturbation,
  t_i(x) + t'_i(x') <= t_i(x') + t'_i(x);
* dominant-strategy truthfulness of a mechanism, comparing the agent's exact
  utility under truth-telling and under a misreport;
* edge-stability: when an agent's selected edges all get strictly cheaper and
  the unselected ones strictly dearer, a monotone algorithm must keep the
  agent's selected edge set unchanged; a change certifies a strict weak-
  monotonicity violation.

Verdicts are exact (rational arithmetic, no tolerances) and every violation
witness carries the evaluated terms so it can be re-verified from its own
data. The random probe generators are fully determined by their seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .graphs import (
    ARBORESCENCE,
    PATH,
    Edge,
    Instance,
    Solution,
    agent_cost,
    validate_solution,
)
from .vcg import AllocationAlgorithm, MechanismOutcome

WEAK_MONOTONICITY = "weak-monotonicity"
TRUTHFULNESS = "truthfulness"
EDGE_STABILITY = "edge-stability"


class InfeasibleAllocationError(RuntimeError):
    """The algorithm under test returned an infeasible solution (this is a
    contract breach of the plug-in, not a monotonicity violation)."""


class NonStrictPerturbationError(ValueError):
    """The perturbation does not satisfy the strict inequalities required for
    an edge-stability probe."""


@dataclass(frozen=True)
class Perturbation:
    """A single agent's alternative report: edge id -> new cost."""

    agent: int
    new_costs: Mapping[int, Fraction]

    def validate(self, inst: Instance) -> None:
        owned = {e.id for e in inst.agent_edges(self.agent)}
        for eid, cost in self.new_costs.items():
            if eid not in owned:
                raise ValueError(f"edge {eid} is not owned by agent {self.agent}")
            if Fraction(cost) < 0:
                raise ValueError(f"perturbed cost of edge {eid} is negative")

    def apply(self, inst: Instance) -> Instance:
        self.validate(inst)
        return inst.with_costs({eid: Fraction(c) for eid, c in self.new_costs.items()})


@dataclass(frozen=True)
class ViolationWitness:
    kind: str
    agent: int
    base_costs: tuple[tuple[int, Fraction], ...]  # agent's edges under t
    perturbed_costs: tuple[tuple[int, Fraction], ...]  # agent's edges under t'
    allocation: Solution  # x = A(t)
    perturbed_allocation: Solution  # x' = A(t')
    terms: tuple[Fraction, Fraction, Fraction, Fraction]
    # (t_i(x), t'_i(x'), t_i(x'), t'_i(x)) for monotonicity kinds;
    # (u_truth, u_misreport, 0, 0) for truthfulness.

    def reverify(self) -> bool:
        """Recompute the violated inequality from the stored terms."""
        a, b, c, d = self.terms
        if self.kind == TRUTHFULNESS:
            return a < b
        return a + b > c + d

    def is_strict(self) -> bool:
        return self.reverify()


def _monotonicity_terms(inst: Instance, pert: Perturbation,
                        x: Solution, x_prime: Solution):
    i = pert.agent
    perturbed = pert.apply(inst)
    return (
        agent_cost(inst, x, i),
        agent_cost(perturbed, x_prime, i),
        agent_cost(inst, x_prime, i),
        agent_cost(perturbed, x, i),
    )


def _agent_cost_table(inst: Instance, agent: int):
    return tuple((e.id, e.cost) for e in inst.agent_edges(agent))


def check_weak_monotonicity(alg: AllocationAlgorithm, inst: Instance,
                            pert: Perturbation) -> Optional[ViolationWitness]:
    """None on pass; a ViolationWitness when the inequality fails."""
    perturbed = pert.apply(inst)
    x = alg(inst)
    x_prime = alg(perturbed)
    for probe_inst, sol in ((inst, x), (perturbed, x_prime)):
        if not validate_solution(probe_inst, sol):
            raise InfeasibleAllocationError(
                f"algorithm returned an infeasible solution {sorted(sol.edge_ids)}")
    terms = _monotonicity_terms(inst, pert, x, x_prime)
    if terms[0] + terms[1] <= terms[2] + terms[3]:
        return None
    return ViolationWitness(
        WEAK_MONOTONICITY, pert.agent,
        _agent_cost_table(inst, pert.agent),
        _agent_cost_table(perturbed, pert.agent),
        x, x_prime, terms,
    )


Mechanism = Callable[[Instance], MechanismOutcome]


def check_truthfulness(mech: Mechanism, inst: Instance, agent: int,
                       misreport: Perturbation) -> Optional[ViolationWitness]:
    """None on pass; a witness when the misreport beats truth-telling.

    `inst` carries the true profile; `misreport` is the alternative report of
    `agent`. Utilities are evaluated with the true costs.
    """
    if misreport.agent != agent:
        raise ValueError("misreport must belong to the probed agent")
    reported = misreport.apply(inst)
    truthful = mech(inst)
    deviated = mech(reported)
    u_truth = truthful.payments[agent - 1] - agent_cost(inst, truthful.allocation, agent)
    u_dev = deviated.payments[agent - 1] - agent_cost(inst, deviated.allocation, agent)
    if u_truth >= u_dev:
        return None
    return ViolationWitness(
        TRUTHFULNESS, agent,
        _agent_cost_table(inst, agent),
        _agent_cost_table(reported, agent),
        truthful.allocation, deviated.allocation,
        (u_truth, u_dev, Fraction(0), Fraction(0)),
    )


def edge_stability_perturbation(inst: Instance, alloc: Solution, agent: int,
                        shrink: Fraction, bump: Fraction) -> tuple[Perturbation, bool]:
    """Scale the agent's selected edges by `shrink`, raise the rest by `bump`.

    Returns (perturbation, strict). `strict` is False when a selected edge
    already costs 0, in which case its cost cannot strictly decrease and the
    perturbation must not be used to claim an edge-stability witness.
    """
    shrink = Fraction(shrink)
    bump = Fraction(bump)
    if not (0 < shrink < 1):
        raise ValueError("shrink must lie strictly between 0 and 1")
    if bump <= 0:
        raise ValueError("bump must be positive")
    new_costs = {}
    strict = True
    for e in inst.agent_edges(agent):
        if e.id in alloc.edge_ids:
            if e.cost == 0:
                strict = False
                new_costs[e.id] = Fraction(0)
            else:
                new_costs[e.id] = e.cost * shrink
        else:
            new_costs[e.id] = e.cost + bump
    return Perturbation(agent, new_costs), strict


def is_strict_edge_stability(inst: Instance, alloc: Solution, pert: Perturbation) -> bool:
    """True iff selected costs strictly drop and unselected strictly rise."""
    for e in inst.agent_edges(pert.agent):
        new = Fraction(pert.new_costs.get(e.id, e.cost))
        if e.id in alloc.edge_ids:
            if not new < e.cost:
                return False
        elif not new > e.cost:
            return False
    return True


def check_edge_stability(alg: AllocationAlgorithm, inst: Instance,
                           pert: Perturbation) -> Optional[ViolationWitness]:
    """Edge-stability probe. None on pass.

    Requires a strict perturbation (selected edges strictly cheaper, others
    strictly dearer) relative to x = alg(inst). If the agent's selected edge
    set changes, the pair (t, t') strictly violates weak monotonicity; the
    returned witness carries the four terms and re-verifies strictly.
    """
    x = alg(inst)
    if not validate_solution(inst, x):
        raise InfeasibleAllocationError("algorithm returned an infeasible solution")
    if not is_strict_edge_stability(inst, x, pert):
        raise NonStrictPerturbationError(
            "perturbation is not strictly decreasing/increasing on the agent's edges")
    perturbed = pert.apply(inst)
    x_prime = alg(perturbed)
    if not validate_solution(perturbed, x_prime):
        raise InfeasibleAllocationError("algorithm returned an infeasible solution")
    owned = {e.id for e in inst.agent_edges(pert.agent)}
    if x.edge_ids & owned == x_prime.edge_ids & owned:
        return None
    terms = _monotonicity_terms(inst, pert, x, x_prime)
    witness = ViolationWitness(
        EDGE_STABILITY, pert.agent,
        _agent_cost_table(inst, pert.agent),
        _agent_cost_table(perturbed, pert.agent),
        x, x_prime, terms,
    )
    # a selection change under a strict perturbation certifies a strict
    # violation of the monotonicity inequality
    assert witness.is_strict()
    return witness


# -- random probes ----------------------------------------------------------

MAX_NUMERATOR = 20
MAX_DENOMINATOR = 4


def random_cost(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(0, MAX_NUMERATOR), rng.randint(1, MAX_DENOMINATOR))


def random_path_instance(rng: random.Random, max_nodes: int = 8,
                         agents: int | None = None) -> Instance:
    """Connected undirected path-mode instance with random rational costs.

    Built as a random s-t backbone plus extra parallel/chord edges, so the
    source and target stay connected even after deleting any single agent's
    edges (no agent is pivotal-infeasible by construction: every edge gets a
    same-route sibling owned by a different agent when n > 1).
    """
    n = agents if agents is not None else rng.randint(1, 3)
    nodes = rng.randint(3, max_nodes)
    edges: list[Edge] = []
    eid = 0

    def add(u, v, owner=None):
        nonlocal eid
        edges.append(Edge(eid, u, v, owner if owner else rng.randint(1, n),
                          random_cost(rng)))
        eid += 1

    order = list(range(nodes))
    rng.shuffle(order)
    s, t = order[0], order[-1]
    for u, v in zip(order, order[1:]):
        add(u, v)
        # sibling parallel edge under a different owner keeps every agent
        # non-pivotal when n > 1
        if n > 1:
            other = rng.choice([a for a in range(1, n + 1) if a != edges[-1].owner])
            add(u, v, owner=other)
    for _ in range(rng.randint(0, nodes)):
        u, v = rng.sample(range(nodes), 2)
        add(u, v)
    return Instance(False, nodes, tuple(edges), n, PATH, s, t)


def random_arborescence_instance(rng: random.Random, max_nodes: int = 8,
                                 agents: int | None = None) -> Instance:
    """Rooted directed instance where every node stays reachable without any
    single agent (each non-root node gets in-edges from two owners when n > 1)."""
    n = agents if agents is not None else rng.randint(1, 3)
    nodes = rng.randint(3, max_nodes)
    root = 0
    edges: list[Edge] = []
    eid = 0

    def add(u, v, owner=None):
        nonlocal eid
        edges.append(Edge(eid, u, v, owner if owner else rng.randint(1, n),
                          random_cost(rng)))
        eid += 1

    for v in range(1, nodes):
        u = rng.randint(0, v - 1)
        add(u, v)
        if n > 1:
            other = rng.choice([a for a in range(1, n + 1) if a != edges[-1].owner])
            add(rng.randint(0, v - 1), v, owner=other)
    for _ in range(rng.randint(0, nodes)):
        u, v = rng.sample(range(nodes), 2)
        if v != root:
            add(u, v)
    return Instance(True, nodes, tuple(edges), n, ARBORESCENCE, root, root)


def random_perturbation(rng: random.Random, inst: Instance, agent: int,
                        alloc: Optional[Solution] = None) -> Perturbation:
    """Half edge-stability shaped (when an allocation is supplied), half
    unstructured resampling of the agent's costs."""
    owned = inst.agent_edges(agent)
    if alloc is not None and rng.random() < 0.5:
        shrink = Fraction(rng.randint(1, 3), 4)
        bump = Fraction(1, rng.randint(1, 8))
        pert, _ = edge_stability_perturbation(inst, alloc, agent, shrink, bump)
        return pert
    return Perturbation(agent, {e.id: random_cost(rng) for e in owned})
