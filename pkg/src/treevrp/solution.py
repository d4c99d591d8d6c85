"""Solution objects shared by the solvers, the oracles, and the CLI.

A solution is a list of depot tours, each given by the client set it
serves; the cost of a tour is twice the length of the Steiner tree spanning
its clients and the depot.  The structured form written by
`solution_to_dict` has stable field names: tours (clients, length,
clients_served), makespan, total_length, k, D, parameters, counters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .tree_model import RoutingTree, tour_cost


@dataclass
class Tour:
    clients: frozenset
    length: int
    rounded_length: int | None = None
    roundups: int = 0
    clusters_covered: int = 0
    merge_branchings: int = 0

    def client_count(self) -> int:
        return len(self.clients)


@dataclass
class Solution:
    tours: list
    makespan: int
    total_length: int
    k: int | None = None
    D: int | None = None
    parameters: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)

    def covered_clients(self) -> set:
        out = set()
        for t in self.tours:
            out |= t.clients
        return out


def make_solution(tree: RoutingTree, client_groups, k=None, D=None, parameters=None, counters=None,
                  tour_meta=None) -> Solution:
    """Assemble a Solution from client groups, recomputing exact costs."""
    tours = []
    for i, group in enumerate(client_groups):
        group = frozenset(group)
        meta = tour_meta[i] if tour_meta else {}
        tours.append(
            Tour(
                clients=group,
                length=tour_cost(tree, group),
                rounded_length=meta.get("rounded_length"),
                roundups=meta.get("roundups", 0),
                clusters_covered=meta.get("clusters_covered", 0),
                merge_branchings=meta.get("merge_branchings", 0),
            )
        )
    makespan = max((t.length for t in tours), default=0)
    total = sum(t.length for t in tours)
    return Solution(
        tours=tours,
        makespan=makespan,
        total_length=total,
        k=k,
        D=D,
        parameters=dict(parameters or {}),
        counters=dict(counters or {}),
    )


@dataclass
class VerifyReport:
    ok: bool
    violations: list

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def __bool__(self):
        return self.ok


def verify_solution(tree: RoutingTree, sol: Solution, k=None, capacity=None) -> VerifyReport:
    """Check coverage, tour budget, declared costs, and optional capacity."""
    violations = []
    covered = set()
    for i, t in enumerate(sol.tours):
        covered |= t.clients
        actual = tour_cost(tree, t.clients)
        if actual != t.length:
            violations.append(
                f"tour {i}: declared length {t.length} but recomputed {actual}"
            )
        if capacity is not None and len(t.clients) > capacity:
            violations.append(
                f"tour {i}: serves {len(t.clients)} clients, capacity is {capacity}"
            )
        unknown = t.clients - tree.clients
        if unknown:
            violations.append(f"tour {i}: unknown clients {sorted(unknown)[:3]}")
    for c in sorted(tree.clients - covered, key=str):
        violations.append(f"uncovered client {c}")
        break
    if k is not None and len(sol.tours) > k:
        violations.append(f"{len(sol.tours)} tours exceed the budget k={k}")
    recomputed_makespan = max((t.length for t in sol.tours), default=0)
    if sol.makespan != recomputed_makespan:
        violations.append(
            f"declared makespan {sol.makespan} != recomputed {recomputed_makespan}"
        )
    recomputed_total = sum(t.length for t in sol.tours)
    if sol.total_length != recomputed_total:
        violations.append(
            f"declared total length {sol.total_length} != recomputed {recomputed_total}"
        )
    return VerifyReport(ok=not violations, violations=violations)


def solution_to_dict(sol: Solution) -> dict:
    return {
        "tours": [
            {
                "clients": sorted(map(str, t.clients)),
                "length": t.length,
                "clients_served": len(t.clients),
                "rounded_length": t.rounded_length,
                "roundups": t.roundups,
                "clusters_covered": t.clusters_covered,
                "merge_branchings": t.merge_branchings,
            }
            for t in sol.tours
        ],
        "makespan": sol.makespan,
        "total_length": sol.total_length,
        "k": sol.k,
        "D": sol.D,
        "parameters": sol.parameters,
        "counters": sol.counters,
    }


def solution_from_dict(obj: dict) -> Solution:
    tours = [
        Tour(
            clients=frozenset(t["clients"]),
            length=t["length"],
            rounded_length=t.get("rounded_length"),
            roundups=t.get("roundups", 0),
            clusters_covered=t.get("clusters_covered", 0),
            merge_branchings=t.get("merge_branchings", 0),
        )
        for t in obj["tours"]
    ]
    return Solution(
        tours=tours,
        makespan=obj["makespan"],
        total_length=obj["total_length"],
        k=obj.get("k"),
        D=obj.get("D"),
        parameters=obj.get("parameters", {}),
        counters=obj.get("counters", {}),
    )


def save_solution(sol: Solution) -> str:
    return json.dumps(solution_to_dict(sol), indent=2) + "\n"


def load_solution(text) -> Solution:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return solution_from_dict(json.loads(text))
