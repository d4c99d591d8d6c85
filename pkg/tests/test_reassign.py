import random

import pytest

from treevrp.reassign import (
    Assignment,
    AssignmentError,
    AssignmentInstance,
    client_levels,
    levels,
    levels_dump,
    solve,
)

from helpers import brute_min_overload, random_assignment_instance


def test_forced_single_assignment_zero_overload():
    inst = AssignmentInstance(
        facilities=["a"], clients=["b"], edge_w={("a", "b"): 5}, client_w={"b": 5}
    )
    out = solve(inst)
    assert out.f == {"b": "a"}
    assert out.overload() == 0


def test_complete_2x2_bounded_by_max_client_weight():
    inst = AssignmentInstance(
        facilities=["a1", "a2"],
        clients=["b1", "b2"],
        edge_w={(a, b): 1 for a in ("a1", "a2") for b in ("b1", "b2")},
        client_w={"b1": 2, "b2": 2},
    )
    out = solve(inst)
    assert out.overload() <= 2
    assert brute_min_overload(inst) <= out.overload()


def _figure_instance():
    # two facilities overloaded beyond the maximum client weight, one
    # underloaded facility reachable in a single level, one client whose
    # facility is unreachable from the overloaded region
    edge_w = {
        ("a1", "b1"): 1,
        ("a1", "b2"): 1,
        ("a2", "b3"): 1,
        ("a2", "b4"): 1,
        ("a3", "b5"): 5,
        ("a4", "b6"): 2,
        ("a2", "b2"): 2,
        ("a3", "b1"): 9,
        ("a3", "b3"): 9,
        ("a3", "b4"): 9,
        ("a3", "b6"): 8,
    }
    client_w = {"b1": 10, "b2": 3, "b3": 10, "b4": 10, "b5": 5, "b6": 10}
    inst = AssignmentInstance(
        facilities=["a1", "a2", "a3", "a4"],
        clients=["b1", "b2", "b3", "b4", "b5", "b6"],
        edge_w=edge_w,
        client_w=client_w,
    )
    f = {"b1": "a1", "b2": "a1", "b3": "a2", "b4": "a2", "b5": "a3", "b6": "a4"}
    return inst, f


def test_level_sets_on_reachability_figure():
    inst, f = _figure_instance()
    a_levels, b_levels = levels(inst, f)
    assert a_levels[0] == {"a1", "a2"}
    assert b_levels[0] == {"b1", "b2", "b3", "b4"}
    assert a_levels[1] == {"a3"}
    assert b_levels[1] == {"b5"}
    assert len(a_levels) == 2
    assert client_levels(inst, f)["b6"] is None  # infinite level
    dump = levels_dump(inst, f)
    assert "A0: a1 a2 | B0: b1 b2 b3 b4" in dump
    assert "A1: a3 | B1: b5" in dump
    assert "inf: b6" in dump


def test_improvement_step_raises_moved_client_level():
    inst, f = _figure_instance()
    before = client_levels(inst, f)
    # one hand-run improvement: smallest movable client to the underloaded a3
    f2 = dict(f)
    f2["b1"] = "a3"
    after = client_levels(inst, f2)
    assert after["b1"] is None or after["b1"] > before["b1"]
    for b in inst.clients:
        if b == "b1":
            continue
        if before[b] is not None and after[b] is not None:
            assert after[b] >= before[b]


def test_no_overload_means_no_levels():
    inst = AssignmentInstance(
        facilities=["a"], clients=["b"], edge_w={("a", "b"): 5}, client_w={"b": 3}
    )
    assert levels(inst, {"b": "a"}) == ([], [])


def test_precondition_violation_names_client():
    with pytest.raises(AssignmentError, match="b1"):
        AssignmentInstance(
            facilities=["a"], clients=["b1"], edge_w={("a", "b1"): 2}, client_w={"b1": 3}
        )
    with pytest.raises(AssignmentError, match="no incident edge"):
        AssignmentInstance(facilities=["a"], clients=["b1"], edge_w={}, client_w={"b1": 0})


@pytest.mark.parametrize("seed", range(40))
def test_random_instances_respect_lemma_bound(seed):
    rng = random.Random(seed)
    inst = random_assignment_instance(rng)
    out = solve(inst, check_levels=True)
    wmax = inst.max_client_weight()
    assert out.overload() <= wmax
    assert out.steps <= len(inst.clients) ** 2
    assert all(out.f[b] in inst.neighbors_of_client(b) for b in inst.clients)


@pytest.mark.parametrize("seed", range(12))
def test_small_instances_against_exhaustive_minimum(seed):
    rng = random.Random(1000 + seed)
    inst = random_assignment_instance(rng, max_side=4, max_weight=6)
    out = solve(inst)
    best = brute_min_overload(inst)
    assert best <= out.overload() <= inst.max_client_weight()


def test_determinism():
    rng = random.Random(7)
    inst = random_assignment_instance(rng)
    f1 = solve(inst).f
    f2 = solve(inst).f
    assert f1 == f2


def test_assignment_overload_figures_recomputable():
    inst, f = _figure_instance()
    a = Assignment(instance=inst, f=f)
    assert a.overload_of("a1") == 13 - 2
    assert a.overload_of("a3") == 5 - 40
    assert a.overload() == 16
