"""Instance generators and the cover-partition (CR) existence checker.

Generators are deterministic per seed and echo their parameters into the
instance header comment, so generated files are reproducible byte for
byte.  The counterexample family builds the central-path construction with
light side subtrees and one heavy main subtree; `check_cr` then searches
exhaustively for a vertex set whose rooted subtrees partition the leaves
while each member is large (subtree length >= tau), small (every child
subtree < tau), and independent (no ancestor-descendant pair).  Candidates
include one virtual subdivision point per edge, which covers every safe
single-edge modification: a second point on the same edge would violate
independence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .tree_model import RoutingTree, build_tree

MAX_CR_VERTICES = 25


class InstanceTooLarge(ValueError):
    pass


# -- seeded generators ----------------------------------------------------------


def gen_random(seed: int, n_clients: int, max_len: int = 20, shape: str = "random") -> RoutingTree:
    """Deterministic instance: 'random' recursive tree, 'caterpillar', or 'star'."""
    if n_clients < 1:
        raise ValueError("n_clients must be at least 1")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    rng = random.Random(seed)
    comment = f"gen shape={shape} seed={seed} n_clients={n_clients} max_len={max_len}"
    edges = []
    clients = []
    if shape == "star":
        for i in range(n_clients):
            c = f"c{i}"
            edges.append(("r", c, rng.randint(1, max_len)))
            clients.append(c)
    elif shape == "caterpillar":
        prev = "r"
        for i in range(n_clients):
            spine = f"s{i}"
            edges.append((prev, spine, rng.randint(1, max_len)))
            c = f"c{i}"
            edges.append((spine, c, rng.randint(1, max_len)))
            clients.append(c)
            prev = spine
    elif shape == "random":
        internals = ["r"]
        n_internal = rng.randint(0, max(0, n_clients - 1))
        for i in range(n_internal):
            at = rng.choice(internals)
            v = f"v{i}"
            edges.append((at, v, rng.randint(1, max_len)))
            internals.append(v)
        for i in range(n_clients):
            at = rng.choice(internals)
            c = f"c{i}"
            edges.append((at, c, rng.randint(1, max_len)))
            clients.append(c)
    else:
        raise ValueError(f"unknown shape {shape!r}")
    return build_tree("r", edges, clients, comments=(comment,))


@dataclass
class CounterexampleParams:
    """Central path with l light side subtrees and one heavy main subtree.

    tau stands for the small/large threshold (the role epsilon*OPT plays):
    side subtrees must stay below tau/2 while the main subtree reaches at
    least tau/2, and path edges must have positive length.
    """

    l: int
    path_len: int
    side_len: int
    main_len: int
    tau: int

    def validate(self):
        if self.l < 1:
            raise ValueError("need at least one side subtree")
        if self.path_len <= 0:
            raise ValueError("path edges must have positive length")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 2 * self.side_len < self.tau:
            raise ValueError("side subtrees must have length below tau/2")
        if not 2 * self.main_len >= self.tau:
            raise ValueError("the main subtree must have length at least tau/2")


def gen_counterexample(p: CounterexampleParams) -> RoutingTree:
    """The family on which no CR set exists (side/main subtrees as single leaves)."""
    p.validate()
    comment = (
        f"gen shape=counterexample l={p.l} path_len={p.path_len} "
        f"side_len={p.side_len} main_len={p.main_len} tau={p.tau}"
    )
    edges = []
    clients = []
    prev = "r"
    for i in range(1, p.l + 1):
        v = f"v{i}"
        edges.append((prev, v, p.path_len))
        s = f"s{i}"
        edges.append((v, s, p.side_len))
        clients.append(s)
        prev = v
    edges.append((prev, "m", p.main_len))
    clients.append("m")
    return build_tree("r", edges, clients, comments=(comment,))


# -- CR existence checker ---------------------------------------------------------


@dataclass(frozen=True)
class CRMember:
    """Either a real vertex or a subdivision point on the edge (u, v).

    For a subdivision point, split_below is the piece kept on the v side,
    so the member's subtree length is subtree_length(v) + split_below.
    """

    vertex: str
    edge: tuple | None = None
    split_below: int | None = None

    def describe(self) -> str:
        if self.edge is None:
            return f"vertex {self.vertex}"
        u, v = self.edge
        return f"point on edge ({u},{v}) at {self.split_below} above {v}"


@dataclass
class CRWitness:
    members: tuple
    tau: int
    checks: dict  # member -> recorded property figures


def _vertex_candidates(tree: RoutingTree, tau: int):
    for v in tree.preorder():
        if tree.subtree_length(v) < tau:
            continue
        if any(tree.subtree_length(c) >= tau for c in tree.children.get(v, ())):
            continue
        yield CRMember(vertex=v)


def _virtual_candidates(tree: RoutingTree, tau: int):
    # admissible iff the subtree below is small but edge length reaches tau:
    # the split point can then sit exactly at subtree length tau, making the
    # new vertex large while its single child stays small.
    for v in tree.preorder():
        if v == tree.root:
            continue
        sub = tree.subtree_length(v)
        if sub < tau <= sub + tree.edge_len[v]:
            yield CRMember(vertex=f"{v}^cr", edge=(tree.parent[v], v), split_below=tau - sub)


def _member_leafset(tree: RoutingTree, m: CRMember) -> frozenset:
    v = m.vertex if m.edge is None else m.edge[1]
    return frozenset(u for u in tree.subtree_vertices(v) if u in tree.clients)


def check_cr(tree: RoutingTree, tau: int):
    """Search for a CR witness; None when no safe modification admits one."""
    if len(tree.children) > MAX_CR_VERTICES:
        raise InstanceTooLarge(
            f"{len(tree.children)} vertices exceed the CR search cap {MAX_CR_VERTICES}"
        )
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    leaves = sorted(tree.clients, key=str)
    index = {c: i for i, c in enumerate(leaves)}
    candidates = sorted(
        list(_vertex_candidates(tree, tau)) + list(_virtual_candidates(tree, tau)),
        key=lambda m: (str(m.vertex), m.split_below or 0),
    )
    cand_masks = []
    for m in candidates:
        mask = 0
        for c in _member_leafset(tree, m):
            mask |= 1 << index[c]
        cand_masks.append(mask)
    full = (1 << len(leaves)) - 1

    by_lowbit = {}
    for m, mask in zip(candidates, cand_masks):
        if mask:
            by_lowbit.setdefault((mask & -mask).bit_length() - 1, []).append((m, mask))

    chosen = []

    def cover(done):
        if done == full:
            return True
        low = (~done & full & -(~done & full)).bit_length() - 1
        for m, mask in by_lowbit.get(low, ()):
            if mask & done:
                continue
            chosen.append(m)
            if cover(done | mask):
                return True
            chosen.pop()
        return False

    if not cover(0):
        return None
    members = tuple(chosen)
    checks = {}
    for m in members:
        v = m.vertex if m.edge is None else m.edge[1]
        sub = tree.subtree_length(v) + (m.split_below or 0)
        kids = [tree.subtree_length(c) for c in tree.children.get(v, ())]
        if m.edge is not None:
            kids = [tree.subtree_length(v)]
        checks[m.describe()] = {
            "subtree_length": sub,
            "max_child_subtree": max(kids, default=0),
        }
    witness = CRWitness(members=members, tau=tau, checks=checks)
    ok, reason = recheck_cr_witness(tree, tau, witness)
    if not ok:
        raise RuntimeError(f"search produced an invalid witness: {reason}")
    return witness


def recheck_cr_witness(tree: RoutingTree, tau: int, witness: CRWitness):
    """Independent validation: apply splits physically, re-test all properties."""
    from .tree_model import subdivide_edge

    work = tree
    applied = {}
    for m in witness.members:
        if m.edge is not None:
            u, v = m.edge
            ln = work.edge_len[v]
            if not 0 < m.split_below <= ln:
                return False, f"{m.describe()}: split {m.split_below} outside edge of length {ln}"
            work, w = subdivide_edge(work, v, m.split_below)
            applied[m] = w
        else:
            applied[m] = m.vertex

    seen = set()
    for m in witness.members:
        v = applied[m]
        if work.subtree_length(v) < tau:
            return False, f"{m.describe()}: subtree length below tau (not large)"
        for c in work.children.get(v, ()):
            if work.subtree_length(c) >= tau:
                return False, f"{m.describe()}: child subtree reaches tau (not small)"
        leafset = frozenset(u for u in work.subtree_vertices(v) if u in work.clients)
        if leafset & seen:
            return False, f"{m.describe()}: overlaps another member's leaves"
        seen |= leafset
    if seen != set(work.clients):
        missing = sorted(set(work.clients) - seen, key=str)
        return False, f"leaves not partitioned (missing {missing[:3]})"
    verts = {applied[m] for m in witness.members}
    for m in witness.members:
        v = applied[m]
        up = work.parent.get(v)
        while up is not None:
            if up in verts:
                return False, f"{m.describe()}: ancestor-descendant conflict"
            up = work.parent.get(up)
    return True, ""
