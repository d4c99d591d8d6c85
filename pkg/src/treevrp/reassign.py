"""Bipartite weight-capacitated assignment with a bounded-overload guarantee.

Facilities have capacities equal to the total weight of their incident
edges; each client carries a weight no larger than the total weight of its
own incident edges.  An assignment maps every client to an adjacent
facility; the overload of a facility is the assigned client weight minus
its capacity.  `solve` produces an assignment whose maximum overload never
exceeds the largest single client weight, by repeatedly moving one client
from the frontier of the overloaded region to an underloaded facility one
level further out.  Each move strictly increases the moved client's level
and never decreases any other client's level, which bounds the number of
moves by |B|^2.

Everything here is deterministic: the initial assignment and every
tie-break use fixed ordering rules, so identical instances always produce
identical assignments.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class AssignmentError(ValueError):
    """Instance violates the solvability precondition."""


@dataclass
class AssignmentInstance:
    """Edge-weighted bipartite graph of facilities A and clients B.

    edge_w maps (facility, client) pairs to nonnegative weights; client_w
    maps each client to its weight.  Capacities q(a) are derived: the sum
    of edge weights incident to a.
    """

    facilities: tuple
    clients: tuple
    edge_w: dict
    client_w: dict

    def __post_init__(self):
        self.facilities = tuple(self.facilities)
        self.clients = tuple(self.clients)
        fac = set(self.facilities)
        cli = set(self.clients)
        for (a, b), w in self.edge_w.items():
            if a not in fac or b not in cli:
                raise AssignmentError(f"edge ({a!r},{b!r}) uses unknown endpoints")
            if w < 0:
                raise AssignmentError(f"edge ({a!r},{b!r}) has negative weight")
        self._nbrs_of_client = {b: [] for b in self.clients}
        self._nbrs_of_fac = {a: [] for a in self.facilities}
        for a in self.facilities:
            for b in self.clients:
                if (a, b) in self.edge_w:
                    self._nbrs_of_client[b].append(a)
                    self._nbrs_of_fac[a].append(b)
        for b in self.clients:
            if not self._nbrs_of_client[b]:
                raise AssignmentError(f"client {b!r} has no incident edge")
            support = sum(self.edge_w[(a, b)] for a in self._nbrs_of_client[b])
            if self.client_w[b] > support:
                raise AssignmentError(
                    f"client {b!r} has weight {self.client_w[b]} exceeding its edge support {support}"
                )
            if self.client_w[b] < 0:
                raise AssignmentError(f"client {b!r} has negative weight")

    def capacity(self, a) -> int:
        return sum(self.edge_w[(a, b)] for b in self._nbrs_of_fac[a])

    def neighbors_of_client(self, b):
        return self._nbrs_of_client[b]

    def neighbors_of_facility(self, a):
        return self._nbrs_of_fac[a]

    def max_client_weight(self) -> int:
        return max(self.client_w[b] for b in self.clients)


@dataclass
class Assignment:
    """A feasible client-to-facility map plus derived overload figures."""

    instance: AssignmentInstance
    f: dict
    steps: int = 0

    def assigned_weight(self, a) -> int:
        return sum(self.instance.client_w[b] for b in self.instance.clients if self.f[b] == a)

    def overload_of(self, a) -> int:
        return self.assigned_weight(a) - self.instance.capacity(a)

    def overload(self) -> int:
        return max(self.overload_of(a) for a in self.instance.facilities)


def _initial_assignment(inst: AssignmentInstance) -> dict:
    # heaviest incident edge, ties to the smallest facility id
    f = {}
    for b in inst.clients:
        f[b] = min(inst.neighbors_of_client(b), key=lambda a: (-inst.edge_w[(a, b)], str(a)))
    return f


def levels(inst: AssignmentInstance, f: dict):
    """Level decomposition of an assignment.

    A0 holds the facilities overloaded beyond the maximum client weight;
    B_i are the clients assigned to A_i; A_{i+1} collects the new neighbors
    of B_i.  Clients outside every B_i have infinite level.  Returns
    (a_levels, b_levels) as lists of sets.
    """
    wmax = inst.max_client_weight()
    load = {a: 0 for a in inst.facilities}
    for b in inst.clients:
        load[f[b]] += inst.client_w[b]
    a0 = {a for a in inst.facilities if load[a] - inst.capacity(a) > wmax}
    if not a0:
        return [], []
    a_levels = [a0]
    b_levels = [{b for b in inst.clients if f[b] in a0}]
    seen_a = set(a0)
    while True:
        frontier = set()
        for b in b_levels[-1]:
            frontier.update(inst.neighbors_of_client(b))
        nxt_a = frontier - seen_a
        if not nxt_a:
            break
        seen_a |= nxt_a
        a_levels.append(nxt_a)
        nxt_b = {b for b in inst.clients if f[b] in nxt_a}
        b_levels.append(nxt_b)
        if not nxt_b:
            break
    return a_levels, b_levels


def client_levels(inst: AssignmentInstance, f: dict) -> dict:
    """Map each client to its finite level, or None for infinite level."""
    _, b_levels = levels(inst, f)
    out = {b: None for b in inst.clients}
    for i, bs in enumerate(b_levels):
        for b in bs:
            out[b] = i
    return out


def levels_dump(inst: AssignmentInstance, f: dict) -> str:
    """Text rendering of the level sets, one 'A<i>: ... | B<i>: ...' line each."""
    a_levels, b_levels = levels(inst, f)
    lines = []
    for i, (al, bl) in enumerate(zip(a_levels, b_levels)):
        lines.append(
            f"A{i}: {' '.join(sorted(map(str, al)))} | B{i}: {' '.join(sorted(map(str, bl)))}"
        )
    inf = [b for b in inst.clients if all(b not in bl for bl in b_levels)]
    lines.append("inf: " + " ".join(sorted(map(str, inf))))
    return "\n".join(lines)


def solve(inst: AssignmentInstance, check_levels=False) -> Assignment:
    """Find an assignment with overload at most max_b w(b).

    Raises AssignmentError if the instance precondition fails (detected at
    construction) and RuntimeError on internal invariant violations, which
    would indicate a bug rather than bad input.
    """
    wmax = inst.max_client_weight()
    f = _initial_assignment(inst)
    load = {a: 0 for a in inst.facilities}
    for b in inst.clients:
        load[f[b]] += inst.client_w[b]
    cap = {a: inst.capacity(a) for a in inst.facilities}

    max_steps = len(inst.clients) ** 2
    steps = 0
    while True:
        a_levels, b_levels = levels(inst, f)
        if not a_levels:
            break
        if steps >= max_steps:
            raise RuntimeError(f"no convergence within |B|^2 = {max_steps} improvement steps")
        if check_levels:
            before = client_levels(inst, f)
        # underloaded facility at the smallest positive level
        target = None
        for i in range(1, len(a_levels)):
            cand = [a for a in a_levels[i] if load[a] <= cap[a]]
            if cand:
                target = (i, min(cand, key=str))
                break
        if target is None:
            raise RuntimeError("no underloaded facility found while overload persists")
        i, a = target
        movable = sorted((b for b in b_levels[i - 1] if (a, b) in inst.edge_w), key=str)
        if not movable:
            raise RuntimeError("level construction produced an unreachable facility")
        b = movable[0]
        load[f[b]] -= inst.client_w[b]
        f[b] = a
        load[a] += inst.client_w[b]
        steps += 1
        if check_levels:
            after = client_levels(inst, f)
            moved_before = before[b]
            moved_after = after[b]
            if moved_after is not None and moved_before is not None and moved_after <= moved_before:
                raise RuntimeError(f"moved client {b!r} did not increase its level")
            for c in inst.clients:
                if c == b:
                    continue
                if before[c] is not None and after[c] is not None and after[c] < before[c]:
                    raise RuntimeError(f"client {c!r} level decreased from {before[c]} to {after[c]}")
                if before[c] is None and after[c] is not None:
                    raise RuntimeError(f"client {c!r} fell from infinite level to {after[c]}")

    out = Assignment(instance=inst, f=f, steps=steps)
    if out.overload() > wmax:
        raise RuntimeError("overload bound violated after convergence")
    return out
