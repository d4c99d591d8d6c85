import random
from fractions import Fraction

import pytest

from treevrp.clustering import (
    assign_small_clusters,
    build_cluster_tree,
    build_clustering,
    clustering_to_dot,
    dump_clusters,
)
from treevrp.tree_model import LOAD_LENGTH, binarize, build_tree, condense

from helpers import random_tree


def _cluster(tree, eps_hat, delta, D, condense_delta=0):
    """Condense (optionally with a tiny threshold) and cluster."""
    work = binarize(tree)
    ct = condense(work, LOAD_LENGTH, condense_delta, D)
    return build_clustering(ct, LOAD_LENGTH, eps_hat, delta, D)


def test_single_leaf_cluster_at_depot():
    tree = build_tree("r", [("r", "v", 5)], ["v"])
    cl = _cluster(tree, Fraction(1, 4), Fraction(1, 2), 4)
    assert len(cl.leaf_clusters) == 1
    assert cl.leaf_clusters[0].attach == "r"
    assert cl.small_clusters == [] and cl.edge_clusters == []
    assert cl.backbone == frozenset()
    ts = build_cluster_tree(cl)
    assert len(ts.nodes) == 2  # root plus the single base vertex
    root = ts.node(ts.root_id)
    assert root.tag == "merge" and len(root.children) == 1
    assert ts.node(root.children[0]).tag == "base"


def test_caterpillar_heavy_wool_splits_into_windowed_edge_clusters():
    # spine of six length-2 edges, a length-2 leaf at the first five spine
    # vertices and one heavy anchor leaf at the end
    edges = []
    prev = "r"
    for i in range(6):
        edges.append((prev, f"x{i}", 2))
        prev = f"x{i}"
    clients = []
    for i in range(5):
        edges.append((f"x{i}", f"c{i}", 2))
        clients.append(f"c{i}")
    edges.append(("x5", "heavy", 16))
    clients.append("heavy")
    tree = build_tree("r", edges, clients)
    D = 64
    cl = _cluster(tree, Fraction(1, 4), Fraction(1), D)
    assert [lc.leaf for lc in cl.leaf_clusters] == ["heavy"]
    assert not cl.leaf_clusters[0].promoted
    assert len(cl.edge_clusters) >= 2
    lower, upper = cl.lower, cl.upper  # 8 and 32
    assert (lower, upper) == (Fraction(8), Fraction(32))
    for ec in cl.edge_clusters:
        assert ec.load >= lower
        assert ec.relaxed == (ec.load > upper)
    assert cl.relaxed_count == sum(1 for ec in cl.edge_clusters if ec.relaxed)


def test_light_wool_stays_one_small_cluster():
    tree = build_tree(
        "r", [("r", "x", 1), ("x", "w", 1), ("x", "y", 1), ("y", "big", 50)], ["w", "big"]
    )
    # wool chain load (edges + light leaf) far below the small bound
    cl = _cluster(tree, Fraction(1, 2), Fraction(1, 2), 100)
    assert [lc.leaf for lc in cl.leaf_clusters] == ["big"]
    assert len(cl.small_clusters) == 1
    assert cl.small_clusters[0].leaf_vertices == ("w",)
    assert cl.edge_clusters == []


def test_anchor_free_subtree_promotes_deepest_leaf():
    # every leaf is light: the deepest one is promoted so the backbone reaches it
    tree = build_tree("r", [("r", "a", 0), ("a", "b", 10), ("b", "c", 1)], ["c"])
    cl = _cluster(tree, Fraction(1, 4), Fraction(1, 4), 44)
    assert cl.promoted_count == 1
    assert [lc.leaf for lc in cl.leaf_clusters] == ["c"]
    assert cl.leaf_clusters[0].promoted
    # partition still total
    _assert_partition(cl)


def _assert_partition(cl):
    tree = cl.tree
    all_edges = {v for v in tree.preorder() if v != tree.root}
    seen = []
    for lc in cl.leaf_clusters:
        seen.append(lc.leaf)
    for sc in cl.small_clusters:
        seen.extend(sc.backbone_edges)
        seen.extend(sc.leaf_vertices)
    for ec in cl.edge_clusters:
        seen.extend(ec.real_backbone_edges())
        seen.extend(ec.real_leaves())
    assert sorted(seen) == sorted(all_edges), "clusters must partition the edge set"


def test_two_leaf_clusters_meet_at_one_merge_vertex():
    tree = build_tree(
        "r", [("r", "u", 4), ("u", "p", 6), ("u", "q", 7)], ["p", "q"]
    )
    cl = _cluster(tree, Fraction(1, 4), Fraction(1, 2), 10)
    ts = build_cluster_tree(cl)
    merges = [n for n in ts.nodes.values() if n.tag == "merge" and n.id != ts.root_id]
    assert len(merges) == 1
    assert len(merges[0].children) == 2
    assert all(ts.node(c).tag == "base" for c in merges[0].children)


@pytest.mark.parametrize("seed", range(15))
def test_grow_vertices_have_one_child_and_tree_is_binary(seed):
    rng = random.Random(seed)
    tree = random_tree(rng, n_clients=rng.randint(2, 10), max_len=12)
    D = max(1, rng.randint(tree.total_length() // 2, 2 * tree.total_length()))
    cl = _cluster(tree, Fraction(1, 8), Fraction(1, 8), D, condense_delta=Fraction(1, 8))
    ts = build_cluster_tree(cl)
    for n in ts.nodes.values():
        if n.tag == "grow":
            assert len(n.children) == 1
        if n.tag == "merge":
            assert len(n.children) <= 2
        if n.tag == "base":
            assert n.children == []
    leaves = [n.id for n in ts.nodes.values() if not n.children]
    assert sorted(leaves) == sorted(f"base:{lc.id}" for lc in cl.leaf_clusters)


@pytest.mark.parametrize("seed", range(25))
def test_partition_windows_and_conservation_grid(seed):
    rng = random.Random(100 + seed)
    tree = random_tree(rng, n_clients=rng.randint(2, 9), max_len=10)
    total = tree.total_length()
    for delta, eps_hat in ((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 8), Fraction(1, 4))):
        for D in sorted({max(1, total // 3), total, 2 * total}):
            work = binarize(tree)
            ct = condense(work, LOAD_LENGTH, delta, D)
            assert ct.tree.total_length() == tree.total_length()
            cl = build_clustering(ct, LOAD_LENGTH, eps_hat, delta, D)
            assert cl.tree.total_length() == tree.total_length()
            _assert_partition(cl)
            for lc in cl.leaf_clusters:
                if not lc.promoted:
                    assert lc.load >= delta * D / 2
            for sc in cl.small_clusters:
                assert sc.load < cl.lower
            for ec in cl.edge_clusters:
                assert ec.load >= cl.lower
                if not ec.relaxed:
                    assert ec.load <= cl.upper
                else:
                    assert ec.load <= 2 * cl.upper + 2
            # edge cluster shape: pads only at the ends, slots line up
            for ec in cl.edge_clusters:
                assert len(ec.leaves) == len(ec.backbone) - 1
                kinds = [k for k, _ in ec.backbone]
                assert all(k == "edge" for k in kinds[1:-1])


def test_assign_small_clusters_empty_and_single():
    tree = build_tree("r", [("r", "v", 5)], ["v"])
    cl = _cluster(tree, Fraction(1, 4), Fraction(1, 2), 4)
    ts = build_cluster_tree(cl)
    asg = assign_small_clusters(cl, ts)
    assert asg.mapping == {}

    tree2 = build_tree(
        "r", [("r", "x", 1), ("x", "w", 1), ("x", "y", 1), ("y", "big", 50)], ["w", "big"]
    )
    cl2 = _cluster(tree2, Fraction(1, 2), Fraction(1, 2), 100)
    ts2 = build_cluster_tree(cl2)
    asg2 = assign_small_clusters(cl2, ts2)
    assert list(asg2.mapping.values()) == [cl2.leaf_clusters[0].id]


@pytest.mark.parametrize("seed", range(20))
def test_assignment_capacity_and_descendant_property(seed):
    rng = random.Random(300 + seed)
    tree = random_tree(rng, n_clients=rng.randint(3, 10), max_len=8)
    D = max(1, tree.total_length())
    cl = _cluster(tree, Fraction(1, 4), Fraction(1, 4), D, condense_delta=Fraction(1, 4))
    ts = build_cluster_tree(cl)
    asg = assign_small_clusters(cl, ts)
    assert set(asg.mapping) == {sc.id for sc in cl.small_clusters}
    for smalls in asg.by_leaf.values():
        assert len(smalls) <= 2
    for sid, lid in asg.mapping.items():
        sc = cl.small_by_id(sid)
        lc = cl.leaf_cluster_by_id(lid)
        assert sc.bottom in cl.tree.ancestors(lc.attach)


def test_diagnostic_dumps_render():
    tree = build_tree(
        "r", [("r", "x", 1), ("x", "w", 1), ("x", "y", 1), ("y", "big", 50)], ["w", "big"]
    )
    cl = _cluster(tree, Fraction(1, 2), Fraction(1, 2), 100)
    table = dump_clusters(cl)
    assert "leaf" in table and "small" in table
    dot = clustering_to_dot(cl)
    assert dot.startswith("digraph") and '"big"' in dot


def test_parameter_validation():
    tree = build_tree("r", [("r", "v", 5)], ["v"])
    work = binarize(tree)
    ct = condense(work, LOAD_LENGTH, 0, 1)
    with pytest.raises(ValueError):
        build_clustering(ct, LOAD_LENGTH, 0, Fraction(1, 2), 10)
    with pytest.raises(ValueError):
        build_clustering(ct, LOAD_LENGTH, Fraction(1, 2), 2, 10)
