"""Ground-truth solvers and checks for desk-scale instances.

Exact optima come from bitmask subset dynamic programming: the cost of
serving a client set is twice the length of its Steiner tree with the
depot, and partitions are scanned with the standard submask walk (3^n
overall).  Capped at 14 clients; the point is trustworthy expected values
for the test suites, not performance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .solution import Solution, VerifyReport, make_solution, verify_solution
from .tree_model import RoutingTree, tour_cost

MAX_EXACT_CLIENTS = 14


class InstanceTooLarge(ValueError):
    pass


@dataclass
class ExactResult:
    value: int
    groups: list  # witness partition, list of frozensets

    def group_count(self) -> int:
        return len(self.groups)


def _client_order(tree: RoutingTree) -> list:
    return sorted(tree.clients, key=str)


def _subset_costs(tree: RoutingTree, clients: list) -> list:
    """cost[S] = closed-walk cost of serving subset S, for all bitmasks."""
    n = len(clients)
    edge_index = {}
    for v in tree.preorder():
        if v != tree.root:
            edge_index[v] = len(edge_index)
    weight = [0] * len(edge_index)
    for v, i in edge_index.items():
        weight[i] = tree.edge_len[v]
    path_mask = []
    for c in clients:
        m = 0
        v = c
        while v != tree.root:
            m |= 1 << edge_index[v]
            v = tree.parent[v]
        path_mask.append(m)

    size = 1 << n
    edges_of = [0] * size
    cost = [0] * size
    for s in range(1, size):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        new_edges = path_mask[low] & ~edges_of[rest]
        edges_of[s] = edges_of[rest] | path_mask[low]
        add = 0
        m = new_edges
        while m:
            b = m & -m
            add += weight[b.bit_length() - 1]
            m ^= b
        cost[s] = cost[rest] + 2 * add
    return cost


def exact_makespan(tree: RoutingTree, k: int) -> ExactResult:
    """Optimal makespan over all covers by at most k depot tours."""
    clients = _client_order(tree)
    n = len(clients)
    if n > MAX_EXACT_CLIENTS:
        raise InstanceTooLarge(f"{n} clients exceed the exact-solver cap {MAX_EXACT_CLIENTS}")
    if k < 1:
        raise ValueError("k must be at least 1")
    cost = _subset_costs(tree, clients)
    full = (1 << n) - 1
    k_eff = min(k, max(1, n))
    level_f = [cost]
    level_c = [list(range(full + 1))]  # one tour takes the whole subset
    for _ in range(1, k_eff):
        prev = level_f[-1]
        cur = [0] * (full + 1)
        curc = [0] * (full + 1)
        for s in range(1, full + 1):
            low = s & -s
            rest = s ^ low
            best_v = None
            best_p = s
            # part runs over submasks of s containing the lowest set bit
            t = rest
            while True:
                part = t | low
                m = max(cost[part], prev[s ^ part])
                if best_v is None or m < best_v:
                    best_v = m
                    best_p = part
                if t == 0:
                    break
                t = (t - 1) & rest
            cur[s] = best_v
            curc[s] = best_p
        level_f.append(cur)
        level_c.append(curc)
    groups = []
    s = full
    level = k_eff - 1
    while s:
        part = level_c[level][s]
        groups.append(frozenset(clients[i] for i in range(n) if part >> i & 1))
        s ^= part
        level = max(0, level - 1)
    assert len(groups) <= k
    return ExactResult(value=level_f[k_eff - 1][full], groups=groups)


def exact_capacitated(tree: RoutingTree, Q: int) -> ExactResult:
    """Minimum total tour length with at most Q clients per tour."""
    clients = _client_order(tree)
    n = len(clients)
    if n > MAX_EXACT_CLIENTS:
        raise InstanceTooLarge(f"{n} clients exceed the exact-solver cap {MAX_EXACT_CLIENTS}")
    if Q < 1:
        raise ValueError("Q must be at least 1")
    cost = _subset_costs(tree, clients)
    full = (1 << n) - 1
    INF = float("inf")
    best = [0] + [INF] * full
    choice = [0] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        rest = s ^ low
        t = rest
        while True:
            part = t | low
            if part.bit_count() <= Q:
                cand = cost[part] + best[s ^ part]
                if cand < best[s]:
                    best[s] = cand
                    choice[s] = part
            if t == 0:
                break
            t = (t - 1) & rest
    groups = []
    s = full
    while s:
        part = choice[s]
        groups.append(frozenset(clients[i] for i in range(n) if part >> i & 1))
        s ^= part
    return ExactResult(value=int(best[full]), groups=groups)


def verify(tree: RoutingTree, sol: Solution, k=None, capacity=None) -> VerifyReport:
    """Feasibility and bookkeeping check; reports the first violation found."""
    return verify_solution(tree, sol, k=k, capacity=capacity)


def greedy_baseline(tree: RoutingTree, k: int) -> Solution:
    """LPT-style baseline: heaviest client first onto the currently lightest tour."""
    if k < 1:
        raise ValueError("k must be at least 1")
    items = sorted(tree.clients, key=lambda c: (-tree.dist_to_root(c), str(c)))
    groups = [set() for _ in range(k)]
    costs = [0] * k
    for c in items:
        i = min(range(k), key=lambda j: (costs[j], j))
        groups[i].add(c)
        costs[i] = tour_cost(tree, groups[i])
    groups = [g for g in groups if g]
    return make_solution(tree, groups, k=k, parameters={"algorithm": "greedy_lpt"})
