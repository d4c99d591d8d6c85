"""Minimum-makespan routing: decision procedure and its binary-search PTAS.

`decide` answers the fixed-load question: given a load bound D and a fleet
of k tours, it condenses and clusters the tree for that D, then runs the
configuration DP over the cluster tree.  Whenever a makespan-D solution
exists the DP keeps a representative whose rounded loads stay under
(1+epsilon)D, so a returned solution has makespan at most (1+epsilon)D; any
returned solution is independently verified before it leaves this module.
`ptas` wraps the decision in an integer binary search between a lower bound
on the optimum and the one-tour upper bound 2*l(T).

Default knobs: eps_hat = delta = epsilon/2 and theta = eps_hat^4.  The
bucket width theta*D controls how coarsely projected tour lengths are
rounded; every tour is rounded only where it covers clients or merges, so
the accumulated error stays proportional to the number of clusters it
touches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._engine import DPEngine, cfg_expand, cfg_max_bucket, cfg_total
from .clustering import assign_small_clusters, build_cluster_tree, build_clustering
from .solution import Solution, Tour, make_solution, verify_solution
from .tree_model import LOAD_LENGTH, RoutingTree, as_fraction, binarize, condense


@dataclass
class SolverParams:
    """Knobs of one decision run; all rationals are exact Fractions."""

    epsilon: Fraction
    eps_hat: Fraction
    delta: Fraction
    theta: Fraction
    D: int
    k: int

    @classmethod
    def make(cls, epsilon, k, D, eps_hat=None, delta=None, theta=None):
        epsilon = as_fraction(epsilon)
        eps_hat = as_fraction(eps_hat) if eps_hat is not None else epsilon / 2
        delta = as_fraction(delta) if delta is not None else eps_hat
        theta = as_fraction(theta) if theta is not None else eps_hat**4
        p = cls(epsilon=epsilon, eps_hat=eps_hat, delta=delta, theta=theta, D=int(D), k=int(k))
        p.validate()
        return p

    def validate(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.theta <= 1):
            raise ValueError("theta must lie in (0, 1]")
        if not (0 < self.eps_hat <= 1 and 0 < self.delta <= 1):
            raise ValueError("eps_hat and delta must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.D < 0:
            raise ValueError("D must be nonnegative")

    @property
    def bucket_count(self) -> int:
        return math.ceil((1 + self.epsilon) / self.theta)

    @property
    def max_bucket(self) -> int:
        """Largest usable bucket index: i * theta * D must stay <= (1+eps) D."""
        return math.floor((1 + self.epsilon) / self.theta)

    @property
    def bucket_width(self) -> Fraction:
        return self.theta * self.D


@dataclass
class Configuration:
    """Count vector over rounded-load buckets (sparse view)."""

    counts: dict

    @classmethod
    def from_tuple(cls, cfg):
        return cls(counts=dict(cfg))

    def as_tuple(self):
        return tuple(sorted((b, c) for b, c in self.counts.items() if c))

    def total(self) -> int:
        return sum(self.counts.values())

    def max_bucket(self) -> int:
        return max((b for b, c in self.counts.items() if c), default=0)


@dataclass
class DPTable:
    """Per-cluster-tree-vertex configuration sets with backpointers."""

    tables: dict
    stats: object

    def configs_at(self, node_id):
        return list(self.tables.get(node_id, {}))

    def total_stored(self) -> int:
        return sum(len(t) for t in self.tables.values())


# -- spec'd case operations, exposed for direct testing ------------------------


def round_up_bucket(raw_load, width) -> int:
    """Index of the smallest bucket multiple >= raw_load."""
    width = as_fraction(width)
    return math.ceil(Fraction(raw_load) / width)


def dp_base(leaf_length, small_leaf_length, depth_to_root, width, max_bucket=None):
    """Bucket of the forced base tour, or None if it breaks the cap."""
    raw = 2 * (leaf_length + small_leaf_length + depth_to_root)
    b0 = max(1, round_up_bucket(raw, width))
    if max_bucket is not None and b0 > max_bucket:
        return None
    return b0


def dp_grow(engine: DPEngine, edge_cluster_id, child_configs):
    """All configurations reachable across one edge cluster."""
    out = {}
    for cfg in child_configs:
        for nxt, _val, _tail in engine.grow_emit(edge_cluster_id, tuple(cfg), 0):
            out.setdefault(nxt, None)
    return sorted(out)


def dp_merge(engine: DPEngine, depth, left_configs, right_configs):
    """All configurations reachable by merging two sibling subtrees at depth."""
    out = {}
    for c1 in left_configs:
        for c2 in right_configs:
            for nxt, _val, _tail in engine.merge_emit(depth, tuple(c1), 0, tuple(c2), 0):
                out.setdefault(nxt, None)
    return sorted(out)


# -- decision procedure ---------------------------------------------------------


def _trivial_zero_solution(tree, params):
    clients = sorted(tree.clients, key=str)
    return make_solution(
        tree,
        [clients],
        k=params.k,
        D=params.D,
        parameters=_params_dict(params),
        counters={"configs_stored": 0, "decides": 1},
    )


def _params_dict(params: SolverParams) -> dict:
    return {
        "epsilon": str(params.epsilon),
        "eps_hat": str(params.eps_hat),
        "delta": str(params.delta),
        "theta": str(params.theta),
        "k": params.k,
        "D": params.D,
    }


def decide(tree: RoutingTree, params: SolverParams, dominance=True, return_table=False):
    """Find a solution with rounded makespan <= (1+eps)D, or None.

    The returned solution is always feasible and verified; the quality
    guarantee (exists makespan-D solution => success) is the property the
    oracle suite exercises.
    """
    params.validate()
    if params.D == 0:
        if tree.total_length() == 0:
            return _trivial_zero_solution(tree, params)
        return None

    work = binarize(tree)
    ct = condense(work, LOAD_LENGTH, params.delta, params.D)
    cl = build_clustering(ct, LOAD_LENGTH, params.eps_hat, params.delta, params.D)
    t_star = build_cluster_tree(cl)
    asg = assign_small_clusters(cl, t_star)
    engine = DPEngine(
        cl,
        t_star,
        asg,
        width=params.bucket_width,
        max_bucket=params.max_bucket,
        max_total=params.k,
        count_clients=False,
        track_value=False,
        dominance=dominance,
    )
    root = engine.run()
    if not root:
        return (None, DPTable(engine.tables, engine.stats)) if return_table else None

    best = min(root, key=lambda c: (cfg_max_bucket(c), cfg_total(c), c))
    tours = engine.reconstruct(best)

    width = params.bucket_width
    groups = []
    meta = []
    for t in tours:
        true_len = _steiner(tree, t.clients)
        if true_len > t.bucket * width:
            raise RuntimeError(
                f"rounded length {t.bucket * width} below true length {true_len}"
            )
        if t.roundups > t.clusters_covered + t.merge_branchings:
            raise RuntimeError("rounding accounting exceeded its budget")
        groups.append(t.clients)
        meta.append(
            {
                "rounded_length": math.floor(t.bucket * width),
                "roundups": t.roundups,
                "clusters_covered": t.clusters_covered,
                "merge_branchings": t.merge_branchings,
            }
        )
    sol = make_solution(
        tree,
        groups,
        k=params.k,
        D=params.D,
        parameters=_params_dict(params),
        counters={
            "configs_stored": engine.stats.configs_stored,
            "configs_emitted": engine.stats.configs_emitted,
            "configs_pruned": engine.stats.configs_pruned,
            "promoted_anchors": cl.promoted_count,
            "relaxed_clusters": cl.relaxed_count,
        },
        tour_meta=meta,
    )
    report = verify_solution(tree, sol, k=params.k)
    if not report.ok:
        raise RuntimeError(f"decide produced an infeasible solution: {report.first_violation}")
    if sol.makespan * Fraction(1) > (1 + params.epsilon) * params.D:
        raise RuntimeError("returned makespan exceeds the (1+eps)D cap")
    return (sol, DPTable(engine.tables, engine.stats)) if return_table else sol


def _steiner(tree, clients):
    from .tree_model import tour_cost

    return tour_cost(tree, clients)


def reconstruct(engine: DPEngine, root_config):
    """Expand a stored root configuration into concrete open tours."""
    return engine.reconstruct(tuple(root_config))


# -- PTAS -----------------------------------------------------------------------


def makespan_lower_bound(tree: RoutingTree, k: int) -> int:
    """max(2 * deepest client, ceil(2 l(T) / k)): both are valid lower bounds."""
    deepest = max((tree.dist_to_root(c) for c in tree.clients), default=0)
    return max(2 * deepest, -(-2 * tree.total_length() // k))


def ptas(tree: RoutingTree, k: int, epsilon, eps_hat=None, delta=None, theta=None,
         dominance=True) -> Solution:
    """Binary search over D for the smallest load bound `decide` accepts.

    Returns the best (smallest true makespan) among the solutions seen; its
    D field records the smallest accepted load bound.
    """
    if not tree.clients:
        raise ValueError("instance has no clients")
    if k < 1:
        raise ValueError("k must be at least 1")
    d_high = 2 * tree.total_length()

    def params_for(D):
        return SolverParams.make(epsilon, k, D, eps_hat=eps_hat, delta=delta, theta=theta)

    if d_high == 0:
        return decide(tree, params_for(0))

    memo = {}

    def attempt(D):
        if D not in memo:
            memo[D] = decide(tree, params_for(D), dominance=dominance)
        return memo[D]

    lo = max(1, makespan_lower_bound(tree, k))
    hi = d_high
    if attempt(hi) is None:
        raise RuntimeError(f"decision failed at the trivial upper bound D={hi}")
    while lo < hi:
        mid = (lo + hi) // 2
        if attempt(mid) is not None:
            hi = mid
        else:
            lo = mid + 1
    successes = [(D, s) for D, s in memo.items() if s is not None]
    best_d = min(D for D, _ in successes)
    best = min(successes, key=lambda ds: (ds[1].makespan, ds[0]))[1]
    best.D = best_d
    best.counters["decides"] = len(memo)
    best.counters["binary_search_D"] = best_d
    return best
