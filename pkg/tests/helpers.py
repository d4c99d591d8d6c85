"""Shared generators and independent brute-force oracles for the test suite."""

import itertools
import random

from treevrp.reassign import AssignmentInstance
from treevrp.tree_model import build_tree, tour_cost


def random_tree(rng, n_clients=6, max_len=10, allow_zero=False):
    """Random recursive tree, independent of the package generator."""
    lo = 0 if allow_zero else 1
    internals = ["r"]
    edges = []
    clients = []
    for i in range(rng.randint(0, n_clients)):
        edges.append((rng.choice(internals), f"i{i}", rng.randint(lo, max_len)))
        internals.append(f"i{i}")
    for i in range(n_clients):
        edges.append((rng.choice(internals), f"c{i}", rng.randint(lo, max_len)))
        clients.append(f"c{i}")
    return build_tree("r", edges, clients)


def random_assignment_instance(rng, max_side=8, max_weight=10, force_steps=False):
    """Random bipartite instance with the solvability precondition enforced.

    With force_steps, one trap facility carries every client's heaviest edge
    while the client weights sit at their full support, so the heaviest-edge
    initial assignment overloads the trap and improvement steps must run.
    """
    na = rng.randint(2 if force_steps else 1, max_side)
    nb = rng.randint(2 if force_steps else 1, max_side)
    facs = [f"a{i}" for i in range(na)]
    clis = [f"b{i}" for i in range(nb)]
    edge_w = {}
    client_w = {}
    if force_steps:
        trap = facs[0]
        for b in clis:
            others = rng.sample(facs[1:], rng.randint(1, min(3, na - 1)))
            top = rng.randint(3, max(3, max_weight // 2))
            edge_w[(trap, b)] = top
            for a in others:
                edge_w[(a, b)] = rng.randint(1, top - 1)
            client_w[b] = sum(
                w for (a, bb), w in edge_w.items() if bb == b
            )  # full support
    else:
        for b in clis:
            deg = rng.randint(1, min(3, na))
            for a in rng.sample(facs, deg):
                edge_w[(a, b)] = rng.randint(0, max_weight)
        for b in clis:
            support = sum(w for (a, bb), w in edge_w.items() if bb == b)
            client_w[b] = rng.randint(0, support)
    return AssignmentInstance(facilities=facs, clients=clis, edge_w=edge_w, client_w=client_w)


def brute_min_overload(inst):
    """Exhaustive minimum overload over all feasible assignments."""
    choices = [inst.neighbors_of_client(b) for b in inst.clients]
    best = None
    for combo in itertools.product(*choices):
        load = {a: 0 for a in inst.facilities}
        for b, a in zip(inst.clients, combo):
            load[a] += inst.client_w[b]
        over = max(load[a] - inst.capacity(a) for a in inst.facilities)
        if best is None or over < best:
            best = over
    return best


def enumerate_partitions(items, max_parts):
    """All partitions of `items` into at most max_parts nonempty groups."""
    items = list(items)

    def rec(i, groups):
        if i == len(items):
            yield [frozenset(g) for g in groups]
            return
        x = items[i]
        for g in groups:
            g.append(x)
            yield from rec(i + 1, groups)
            g.pop()
        if len(groups) < max_parts:
            groups.append([x])
            yield from rec(i + 1, groups)
            groups.pop()

    yield from rec(0, [])


def brute_makespan(tree, k):
    best = None
    for parts in enumerate_partitions(sorted(tree.clients, key=str), k):
        m = max(tour_cost(tree, g) for g in parts)
        if best is None or m < best:
            best = m
    return best


def brute_capacitated(tree, Q):
    n = len(tree.clients)
    best = None
    for parts in enumerate_partitions(sorted(tree.clients, key=str), n):
        if any(len(g) > Q for g in parts):
            continue
        m = sum(tour_cost(tree, g) for g in parts)
        if best is None or m < best:
            best = m
    return best
