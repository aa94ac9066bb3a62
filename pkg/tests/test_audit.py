"""Truthfulness, weak-monotonicity, and edge-stability probes."""

import random
from fractions import Fraction

import pytest

from minmax_procurement import (
    Edge,
    Instance,
    PATH,
    Perturbation,
    Solution,
    check_edge_stability,
    check_truthfulness,
    check_weak_monotonicity,
    edge_stability_perturbation,
    run_vcg,
    vcg_allocate,
)
from minmax_procurement.adversary import ChainSpec, expand_chain, gen_chain
from minmax_procurement.audit import (
    InfeasibleAllocationError,
    NonStrictPerturbationError,
    is_strict_edge_stability,
    random_arborescence_instance,
    random_path_instance,
    random_perturbation,
)

F = Fraction


def parallel_instance(costs):
    edges = tuple(Edge(i, 0, 1, i + 1, F(c)) for i, c in enumerate(costs))
    return Instance(False, 2, edges, len(costs), PATH, 0, 1)


# -- weak monotonicity --------------------------------------------------------


def test_identity_perturbation_passes_with_equality():
    inst = parallel_instance([1, 3])
    pert = Perturbation(1, {0: F(1)})
    assert check_weak_monotonicity(vcg_allocate, inst, pert) is None


def test_stubborn_constant_algorithm_is_monotone():
    inst = parallel_instance([1, 3])
    fixed = Solution([1])
    stubborn = lambda _: fixed
    for cost in (F(0), F(2), F(10)):
        pert = Perturbation(1, {0: cost})
        assert check_weak_monotonicity(stubborn, inst, pert) is None


def test_vcg_passes_random_monotonicity_probes():
    for seed in range(300):
        rng = random.Random(seed)
        inst = random_path_instance(rng, agents=rng.randint(2, 3))
        agent = rng.randint(1, inst.agent_count)
        alloc = vcg_allocate(inst)
        pert = random_perturbation(rng, inst, agent, alloc)
        assert check_weak_monotonicity(vcg_allocate, inst, pert) is None


def test_anti_monotone_algorithm_is_caught():
    inst = parallel_instance([1, 1])

    def perverse(i):
        # picks agent 1's edge exactly when it is the more expensive one
        a, b = i.edge_by_id(0).cost, i.edge_by_id(1).cost
        return Solution([0]) if a >= b else Solution([1])

    pert = Perturbation(1, {0: F(1, 2)})
    witness = check_weak_monotonicity(perverse, inst, pert)
    assert witness is not None
    assert witness.reverify()
    a, b, c, d = witness.terms
    assert a + b > c + d


def test_infeasible_allocation_is_a_contract_breach_not_a_violation():
    inst = parallel_instance([1, 3])
    broken = lambda _: Solution([0, 1])
    with pytest.raises(InfeasibleAllocationError):
        check_weak_monotonicity(broken, inst, Perturbation(1, {0: F(2)}))


def test_perturbation_must_cover_only_owned_edges():
    inst = parallel_instance([1, 3])
    with pytest.raises(ValueError, match="not owned"):
        Perturbation(1, {1: F(2)}).apply(inst)
    with pytest.raises(ValueError, match="negative"):
        Perturbation(1, {0: F(-1)}).apply(inst)


# -- truthfulness -------------------------------------------------------------


def test_truthful_report_passes_with_equality():
    inst = parallel_instance([1, 3])
    assert check_truthfulness(run_vcg, inst, 1, Perturbation(1, {0: F(1)})) is None


def test_misreport_that_keeps_the_win_does_not_help():
    inst = parallel_instance([1, 3])
    assert check_truthfulness(run_vcg, inst, 1, Perturbation(1, {0: F(2)})) is None


def test_misreport_that_loses_the_auction_does_not_help():
    inst = parallel_instance([1, 3])
    assert check_truthfulness(run_vcg, inst, 1, Perturbation(1, {0: F(4)})) is None


def test_vcg_passes_random_truthfulness_probes():
    for seed in range(300):
        rng = random.Random(10_000 + seed)
        inst = random_path_instance(rng, agents=rng.randint(2, 3))
        agent = rng.randint(1, inst.agent_count)
        alloc = vcg_allocate(inst)
        pert = random_perturbation(rng, inst, agent, alloc)
        assert check_truthfulness(run_vcg, inst, agent, pert) is None


def test_pay_your_bid_mechanism_is_untruthful():
    from minmax_procurement.vcg import MechanismOutcome
    from minmax_procurement.graphs import agent_cost

    def first_price(inst):
        alloc = vcg_allocate(inst)
        pay = tuple(agent_cost(inst, alloc, a)
                    for a in range(1, inst.agent_count + 1))
        return MechanismOutcome(alloc, pay)

    inst = parallel_instance([1, 3])
    witness = check_truthfulness(first_price, inst, 1, Perturbation(1, {0: F(2)}))
    assert witness is not None and witness.reverify()
    assert witness.terms[0] < witness.terms[1]  # overbidding strictly helps


# -- edge-stability probes ----------------------------------------------------


def test_edge_stability_perturbation_shapes():
    inst = parallel_instance([1, 1])
    alloc = Solution([0])
    pert, strict = edge_stability_perturbation(inst, alloc, 1, F(1, 2), F(1, 8))
    assert strict
    assert pert.new_costs == {0: F(1, 2)}
    pert2, strict2 = edge_stability_perturbation(inst, alloc, 2, F(1, 2), F(1, 8))
    assert strict2
    assert pert2.new_costs == {1: F(9, 8)}  # no selected edges: bump only


def test_edge_stability_perturbation_on_expanded_chain_agent_two():
    inst, indexing = expand_chain(gen_chain(ChainSpec(2, 1)), F(1, 8))
    alloc = vcg_allocate(inst)
    pert, strict = edge_stability_perturbation(inst, alloc, 2, F(1, 2), F(1, 8))
    assert strict
    selected_helper = next(
        e for e in inst.agent_edges(2) if e.id in alloc.edge_ids)
    unselected_main = next(
        e for e in inst.agent_edges(2) if e.id not in alloc.edge_ids and e.cost == 1)
    assert pert.new_costs[selected_helper.id] == F(1, 16)
    assert pert.new_costs[unselected_main.id] == 1 + F(1, 8)


def test_zero_cost_selected_edge_makes_perturbation_non_strict():
    inst = parallel_instance([0, 3])
    alloc = Solution([0])
    pert, strict = edge_stability_perturbation(inst, alloc, 1, F(1, 2), F(1, 8))
    assert not strict
    assert not is_strict_edge_stability(inst, alloc, pert)
    with pytest.raises(NonStrictPerturbationError):
        check_edge_stability(vcg_allocate, inst, pert)


def test_vcg_passes_stability_probes():
    for seed in range(200):
        rng = random.Random(seed)
        inst = random_path_instance(rng, agents=rng.randint(2, 3))
        agent = rng.randint(1, inst.agent_count)
        alloc = vcg_allocate(inst)
        pert, strict = edge_stability_perturbation(inst, alloc, agent, F(1, 2), F(1, 8))
        if not strict:
            continue
        assert check_edge_stability(vcg_allocate, inst, pert) is None


def test_stability_failure_is_a_strict_monotonicity_violation():
    inst = parallel_instance([1, 1])

    def perverse(i):
        a, b = i.edge_by_id(0).cost, i.edge_by_id(1).cost
        return Solution([0]) if a >= b else Solution([1])

    alloc = perverse(inst)
    pert, strict = edge_stability_perturbation(inst, alloc, 1, F(1, 2), F(1, 8))
    assert strict
    witness = check_edge_stability(perverse, inst, pert)
    assert witness is not None
    assert witness.is_strict()
    # the same pair also fails the plain monotonicity check
    assert check_weak_monotonicity(perverse, inst, pert) is not None


def test_truthful_mechanism_implies_monotone_allocation_on_sampled_pairs():
    # two truthfulness checks on a (t, t') pair imply the monotonicity
    # inequality for the pair; spot-check the implication on random probes
    for seed in range(100):
        rng = random.Random(77_000 + seed)
        inst = random_path_instance(rng, agents=2)
        agent = rng.randint(1, 2)
        alloc = vcg_allocate(inst)
        pert = random_perturbation(rng, inst, agent, alloc)
        forward = check_truthfulness(run_vcg, inst, agent, pert)
        back_inst = pert.apply(inst)
        back = Perturbation(agent, {e.id: e.cost for e in inst.agent_edges(agent)})
        backward = check_truthfulness(run_vcg, back_inst, agent, back)
        if forward is None and backward is None:
            assert check_weak_monotonicity(vcg_allocate, inst, pert) is None


def test_witnesses_reverify_from_their_own_data():
    inst = parallel_instance([1, 1])
    stubborn_flip = [Solution([0]), Solution([1])]
    calls = {"n": 0}

    def flipper(_):
        sol = stubborn_flip[calls["n"] % 2]
        calls["n"] += 1
        return sol

    witness = check_weak_monotonicity(flipper, inst, Perturbation(1, {0: F(1, 2)}))
    if witness is not None:
        a, b, c, d = witness.terms
        assert (a + b > c + d) == witness.reverify()
