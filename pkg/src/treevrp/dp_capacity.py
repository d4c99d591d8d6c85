"""Capacitated routing: min-max client count under a total-length budget.

The framework is re-instantiated with the client-count load: condensing
folds branches of at most delta*Q clients, clustering windows are measured
in clients, and a configuration counts open tours per rounded-client-count
bucket.  Tour lengths are never rounded here; each configuration stores the
exact minimum total length realizing it (merges discount the shared depot
path), so a budget check at the root is exact and the only relaxation is on
the per-tour client count, which stays below (1+epsilon)Q.

Searching the least feasible budget does not need repeated decisions: the
budget only filters root configurations, and the decision already keeps the
minimum-length configuration, whose value is exactly the least feasible
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._engine import DPEngine, cfg_max_bucket, cfg_total
from .clustering import assign_small_clusters, build_cluster_tree, build_clustering
from .solution import Solution, make_solution, verify_solution
from .tree_model import LOAD_CLIENTS, RoutingTree, as_fraction, binarize, condense, tour_cost


@dataclass
class CapacityParams:
    """Knobs for one capacitated decision; Q plays the load-bound role."""

    epsilon: Fraction
    eps_hat: Fraction
    delta: Fraction
    theta_q: Fraction
    Q: int
    k_length: int | None  # total-length budget; None disables the root filter

    @classmethod
    def make(cls, epsilon, Q, k_length=None, eps_hat=None, delta=None, theta_q=None):
        epsilon = as_fraction(epsilon)
        eps_hat = as_fraction(eps_hat) if eps_hat is not None else epsilon / 2
        delta = as_fraction(delta) if delta is not None else eps_hat
        theta_q = as_fraction(theta_q) if theta_q is not None else eps_hat**4
        p = cls(
            epsilon=epsilon,
            eps_hat=eps_hat,
            delta=delta,
            theta_q=theta_q,
            Q=int(Q),
            k_length=None if k_length is None else int(k_length),
        )
        p.validate()
        return p

    def validate(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.theta_q <= 1):
            raise ValueError("theta_q must lie in (0, 1]")
        if not (0 < self.eps_hat <= 1 and 0 < self.delta <= 1):
            raise ValueError("eps_hat and delta must lie in (0, 1]")
        if self.Q < 1:
            raise ValueError("Q must be at least 1")
        if self.k_length is not None and self.k_length < 0:
            raise ValueError("k_length must be nonnegative")

    @property
    def bucket_width(self) -> Fraction:
        return self.theta_q * self.Q

    @property
    def max_bucket(self) -> int:
        return math.floor((1 + self.epsilon) / self.theta_q)

    def capacity_cap(self) -> int:
        """Largest per-tour client count any stored configuration allows."""
        return math.floor(self.max_bucket * self.bucket_width)


@dataclass
class CostedConfiguration:
    """A count vector over client-count buckets plus its minimum total length."""

    counts: dict
    value: int


def _params_dict(params: CapacityParams) -> dict:
    return {
        "epsilon": str(params.epsilon),
        "eps_hat": str(params.eps_hat),
        "delta": str(params.delta),
        "theta_q": str(params.theta_q),
        "Q": params.Q,
        "k_length": params.k_length,
    }


def decide_capacity(tree: RoutingTree, params: CapacityParams, dominance=True):
    """Solution with total length <= k_length and tours of <= (1+eps)Q clients, or None."""
    params.validate()
    work = binarize(tree)
    ct = condense(work, LOAD_CLIENTS, params.delta, params.Q)
    cl = build_clustering(ct, LOAD_CLIENTS, params.eps_hat, params.delta, params.Q)
    t_star = build_cluster_tree(cl)
    asg = assign_small_clusters(cl, t_star)
    engine = DPEngine(
        cl,
        t_star,
        asg,
        width=params.bucket_width,
        max_bucket=params.max_bucket,
        max_total=len(tree.clients),
        count_clients=True,
        track_value=True,
        dominance=dominance,
    )
    root = engine.run()
    if not root:
        return None
    candidates = [
        (val, cfg_total(cfg), cfg_max_bucket(cfg), cfg) for cfg, (val, _) in root.items()
        if params.k_length is None or val <= params.k_length
    ]
    if not candidates:
        return None
    value, _, _, best = min(candidates)
    tours = engine.reconstruct(best)

    cap = params.capacity_cap()
    groups = []
    meta = []
    for t in tours:
        exact = tour_cost(tree, t.clients)
        if exact != t.value:
            raise RuntimeError(
                f"tracked tour length {t.value} differs from recomputed {exact}"
            )
        if len(t.clients) > t.bucket * params.bucket_width:
            raise RuntimeError("client count exceeds its rounded bucket")
        if t.roundups > t.clusters_covered + t.merge_branchings:
            raise RuntimeError("rounding accounting exceeded its budget")
        groups.append(t.clients)
        meta.append(
            {
                "rounded_length": math.floor(t.bucket * params.bucket_width),
                "roundups": t.roundups,
                "clusters_covered": t.clusters_covered,
                "merge_branchings": t.merge_branchings,
            }
        )
    sol = make_solution(
        tree,
        groups,
        k=None,
        D=params.Q,
        parameters=_params_dict(params),
        counters={
            "configs_stored": engine.stats.configs_stored,
            "configs_emitted": engine.stats.configs_emitted,
            "promoted_anchors": cl.promoted_count,
            "relaxed_clusters": cl.relaxed_count,
        },
        tour_meta=meta,
    )
    if sol.total_length != value:
        raise RuntimeError("configuration value disagrees with the assembled solution")
    report = verify_solution(tree, sol, capacity=cap)
    if not report.ok:
        raise RuntimeError(
            f"decide_capacity produced an infeasible solution: {report.first_violation}"
        )
    return sol


def ptas_capacity(tree: RoutingTree, Q: int, epsilon, eps_hat=None, delta=None,
                  theta_q=None, dominance=True) -> Solution:
    """Least total-length budget whose capacitated decision succeeds.

    One unfiltered decision suffices: the stored minimum-length root
    configuration is itself the smallest budget any filtered run accepts.
    """
    params = CapacityParams.make(
        epsilon, Q, k_length=None, eps_hat=eps_hat, delta=delta, theta_q=theta_q
    )
    sol = decide_capacity(tree, params, dominance=dominance)
    if sol is None:
        raise RuntimeError("capacitated decision failed with an unlimited budget")
    sol.parameters["k_length"] = sol.total_length
    sol.counters["least_budget"] = sol.total_length
    return sol
