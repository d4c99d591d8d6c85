"""Acceptance suite: one test per criterion, one printed pass line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.  Every
tolerance is pinned here; nothing is deferred to later calibration.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

from treevrp.clustering import assign_small_clusters, build_cluster_tree, build_clustering
from treevrp.dp_capacity import ptas_capacity
from treevrp.dp_makespan import SolverParams, decide, ptas
from treevrp.instances import CounterexampleParams, check_cr, gen_counterexample, gen_random, recheck_cr_witness
from treevrp.oracle import exact_capacitated, exact_makespan, verify
from treevrp.reassign import solve as solve_assignment
from treevrp.solution import load_solution, save_solution
from treevrp.tree_model import (
    LOAD_LENGTH,
    binarize,
    condense,
    load_instance,
    save_instance,
)

from helpers import random_assignment_instance
from test_instances import _explicit_subdivision_exists


def _ok(line):
    print(f"\nACCEPTANCE {line}: PASS")


def test_criterion_1_ptas_guarantee_vs_oracle():
    t0 = time.time()
    count = 0
    worst = 0.0
    for seed in range(200):
        n = 2 + seed % 9  # 2..10 clients
        k = 1 + seed % 3
        tree = gen_random(seed=seed, n_clients=n, max_len=20)
        opt = exact_makespan(tree, k).value
        sol = ptas(tree, k, "0.25")
        assert verify(tree, sol, k=k).ok, f"seed {seed}: verifier failed"
        if opt == 0:
            assert sol.makespan == 0
        else:
            ratio = sol.makespan / opt
            worst = max(worst, ratio)
            assert ratio <= 1.25 + 1e-12, f"seed {seed}: ratio {ratio}"
        count += 1
    elapsed = time.time() - t0
    assert count >= 200
    assert elapsed <= 300, f"suite took {elapsed:.0f}s, budget is 5 minutes"
    _ok(f"1 ptas/oracle ratio <= 1.25 on {count} instances "
        f"(worst {worst:.4f}, {elapsed:.1f}s)")


def test_criterion_2_decision_monotonicity():
    violations = 0
    checked = 0
    for seed in range(50):
        n = 2 + seed % 7
        k = 1 + seed % 3
        tree = gen_random(seed=1000 + seed, n_clients=n, max_len=15)
        hi = 2 * tree.total_length()
        grid = sorted({max(1, hi * i // 10) for i in range(1, 11)})
        seen = False
        for D in grid:
            ok = decide(tree, SolverParams.make("0.25", k, D)) is not None
            if seen and not ok:
                violations += 1
            seen = seen or ok
            checked += 1
    assert violations == 0
    _ok(f"2 decision monotonicity, {checked} decisions, zero violations")


def test_criterion_3_reassignment_lemma_bound():
    steps_hist = 0
    for seed in range(1000):
        rng = random.Random(seed)
        inst = random_assignment_instance(rng, max_side=8, max_weight=10)
        out = solve_assignment(inst, check_levels=True)  # raises if a level drops
        wmax = inst.max_client_weight()
        assert out.overload() <= wmax, f"seed {seed}"
        assert out.steps <= len(inst.clients) ** 2, f"seed {seed}"
        steps_hist = max(steps_hist, out.steps)
    _ok(f"3 reassignment overload bound on 1000 instances (max steps {steps_hist})")


def _brute_maximal(tree, thr):
    loads = {v: LOAD_LENGTH.branch_load(tree, v) for v in tree.preorder() if v != tree.root}
    return {
        v
        for v, g in loads.items()
        if g <= thr and (tree.parent[v] == tree.root or loads[tree.parent[v]] > thr)
    }


def test_criterion_4_condense_cluster_invariants():
    instances = 0
    relaxed_total = 0
    promoted_total = 0
    for seed in range(100):
        tree = gen_random(seed=2000 + seed, n_clients=2 + seed % 9, max_len=20)
        work = binarize(tree)
        assert work.total_length() == tree.total_length()
        total = tree.total_length()
        grid = itertools.product(
            ((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 8), Fraction(1, 4))),
            sorted({max(1, total // 2), total, 2 * total}),
        )
        for (delta, eps_hat), D in grid:
            ct = condense(work, LOAD_LENGTH, delta, D)
            assert ct.tree.total_length() == tree.total_length()

            # brute-force maximality and sibling rule (n <= 50 everywhere here)
            assert len(work.children) <= 50
            maximal = _brute_maximal(work, ct.threshold)
            accounted = set()
            for leaf, br in ct.condensed_leaf_info.items():
                assert br.load <= ct.threshold
                tops = [
                    v for v in maximal
                    if set(work.subtree_vertices(v)) <= set(br.edge_vertices)
                ]
                assert 1 <= len(tops) <= 2
                accounted.update(tops)
            assert accounted == maximal
            for u, kids in ct.tree.children.items():
                cond = [v for v in kids if v in ct.condensed_leaf_info]
                if len(cond) == 2:
                    pair = sum(ct.condensed_leaf_info[v].load for v in cond)
                    assert pair > ct.threshold

            cl = build_clustering(ct, LOAD_LENGTH, eps_hat, delta, D)
            assert cl.tree.total_length() == tree.total_length()
            edges = {v for v in cl.tree.preorder() if v != cl.tree.root}
            seen = [lc.leaf for lc in cl.leaf_clusters]
            for sc in cl.small_clusters:
                seen += list(sc.backbone_edges) + list(sc.leaf_vertices)
            for ec in cl.edge_clusters:
                seen += ec.real_backbone_edges() + ec.real_leaves()
            assert sorted(seen) == sorted(edges)
            for lc in cl.leaf_clusters:
                if not lc.promoted:
                    assert lc.load >= delta * D / 2
            for sc in cl.small_clusters:
                assert sc.load < cl.lower
            for ec in cl.edge_clusters:
                assert ec.load >= cl.lower
                if not ec.relaxed:
                    assert ec.load <= cl.upper
            relaxed_total += cl.relaxed_count
            promoted_total += cl.promoted_count
        instances += 1
    assert instances >= 100
    _ok(f"4 condense/cluster invariants on {instances} instances "
        f"(relaxed clusters: {relaxed_total}, promoted anchors: {promoted_total})")


def test_criterion_5_rounding_accounting():
    tours_checked = 0
    for seed in range(60):
        tree = gen_random(seed=3000 + seed, n_clients=2 + seed % 9, max_len=20)
        k = 1 + seed % 3
        sol = ptas(tree, k, "0.25")
        for t in sol.tours:
            assert t.roundups <= t.clusters_covered + t.merge_branchings
            tours_checked += 1
    for seed in range(40):
        tree = gen_random(seed=3100 + seed, n_clients=2 + seed % 7, max_len=20)
        sol = ptas_capacity(tree, 1 + seed % 3, "0.25")
        for t in sol.tours:
            assert t.roundups <= t.clusters_covered + t.merge_branchings
            tours_checked += 1
    _ok(f"5 rounding accounting on {tours_checked} tours, zero violations")


def test_criterion_6_counterexample_family():
    family = gen_counterexample(
        CounterexampleParams(l=5, path_len=1, side_len=4, main_len=10, tau=10)
    )
    assert check_cr(family, 10) is None

    control = load_instance(
        "scale 1\nroot r\nedge r u1 2\nedge u1 a 4\nedge u1 b 6\n"
        "edge r u2 3\nedge u2 c 5\nedge u2 d 5\n"
        "client a\nclient b\nclient c\nclient d\n"
    )
    witness = check_cr(control, 10)
    assert witness is not None
    ok, reason = recheck_cr_witness(control, 10, witness)
    assert ok, reason

    crosschecked = 0
    for seed in range(10):
        rng = random.Random(4000 + seed)
        n = rng.randint(2, 4)
        tree = gen_random(seed=4000 + seed, n_clients=n, max_len=6)
        if len(tree.children) > 10:
            continue
        total = tree.total_length()
        for tau in {1, max(1, total // 2), total}:
            assert (check_cr(tree, tau) is not None) == _explicit_subdivision_exists(tree, tau)
            crosschecked += 1
    assert crosschecked >= 10
    _ok(f"6 counterexample admits no CR set; control verified; "
        f"{crosschecked} subdivision cross-checks")


def test_criterion_7_capacitated_bicriteria():
    count = 0
    for seed in range(100):
        n = 2 + seed % 7  # up to 8 clients
        Q = 1 + seed % 4
        tree = gen_random(seed=5000 + seed, n_clients=n, max_len=20)
        opt = exact_capacitated(tree, Q).value
        sol = ptas_capacity(tree, Q, "0.25")
        assert sol.total_length <= opt, f"seed {seed}"
        cap = math.ceil(1.25 * Q)
        assert all(len(t.clients) <= cap for t in sol.tours), f"seed {seed}"
        assert verify(tree, sol, capacity=cap).ok, f"seed {seed}"
        count += 1
    assert count >= 100
    _ok(f"7 capacitated bicriteria on {count} instances")


def test_criterion_8_format_round_trip():
    for seed in range(100):
        shape = ("random", "caterpillar", "star")[seed % 3]
        tree = gen_random(seed=6000 + seed, n_clients=2 + seed % 9, shape=shape)
        text = save_instance(tree)
        assert save_instance(load_instance(text)) == text, f"seed {seed}: text drift"
        js = save_instance(tree, fmt="json")
        assert save_instance(load_instance(js), fmt="json") == js, f"seed {seed}: json drift"
    # solution files re-verify after reload
    for seed in range(10):
        tree = gen_random(seed=6500 + seed, n_clients=2 + seed % 6, max_len=15)
        sol = ptas(tree, 2, "0.25")
        reloaded = load_solution(save_solution(sol))
        assert verify(tree, reloaded, k=2).ok
    _ok("8 format round-trip, 100 instances byte-exact; solutions re-verify")
