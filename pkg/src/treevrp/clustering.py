"""Partition a condensed tree into leaf, small, and edge clusters.

Leaf edges carrying at least half the condense threshold of load anchor the
structure (leaf clusters).  The union of anchor-to-root paths is the
backbone; what remains are backbone chains dressed with light leaf edges.
Chains whose total load stays under the small-cluster bound are kept whole
(small clusters); heavier chains are cut into edge clusters whose loads sit
inside a fixed window, subdividing backbone edges where a cut lands inside
one.  The cluster tree mirrors this decomposition: anchors are its leaves,
edge clusters are unary internal vertices, and backbone branching points
(plus the depot) are binary merge vertices.

Two documented departures from the idealized picture are flagged rather
than hidden:

* a subtree that contains no anchor at all (every leaf under it is light)
  gets its deepest leaf promoted to an anchor so that the partition is
  total; promoted anchors are counted in `promoted_count`;
* an atomic leaf can force an edge cluster past the upper window bound, in
  which case the cluster is kept (never split mid-leaf) and counted in
  `relaxed_count`; such loads still stay within twice the bound.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .tree_model import (
    CLIENT_COUNT,
    TOUR_LENGTH,
    CondensedTree,
    LoadFunction,
    RoutingTree,
    as_fraction,
    fresh_vertex,
)


@dataclass
class LeafCluster:
    id: str
    leaf: str
    attach: str
    load: int
    length: int
    promoted: bool = False


@dataclass
class SmallCluster:
    id: str
    bottom: str
    top: str
    backbone_edges: tuple  # child-vertex ids, leafward to rootward
    leaf_vertices: tuple
    load: int


@dataclass
class EdgeCluster:
    """A woolly subedge: contiguous backbone piece plus its leaf edges.

    backbone entries run depot-first; each is ("edge", child_vertex) for a
    real tree edge or ("pad", vertex) for a synthetic zero-length element
    added so the cluster starts and ends with a backbone entry.  leaves has
    one slot between consecutive backbone entries, None where no leaf
    hangs; slot i sits at the vertex shared by entries i and i+1.
    """

    id: str
    bottom: str
    top: str
    backbone: tuple
    leaves: tuple
    load: int
    relaxed: bool = False

    def real_backbone_edges(self):
        return [v for kind, v in self.backbone if kind == "edge"]

    def real_leaves(self):
        return [v for v in self.leaves if v is not None]

    def slot_vertices(self):
        """Vertex at which each leaf slot sits (child endpoint of entry i)."""
        return [v for (_kind, v) in self.backbone[:-1]]


@dataclass
class _Chain:
    source_kind: str  # "anchor" | "merge"
    source_id: str  # leaf-cluster id or merge vertex
    start: str
    top: str
    cluster_ids: list = field(default_factory=list)
    small_id: str | None = None


@dataclass
class Clustering:
    tree: RoutingTree  # working condensed tree, after any subdivisions
    ct: CondensedTree
    load: LoadFunction
    eps_hat: Fraction
    delta: Fraction
    D: int
    lower: Fraction
    upper: Fraction
    backbone: frozenset
    leaf_clusters: list
    small_clusters: list
    edge_clusters: list
    chains: list
    merge_vertices: list
    promoted_count: int = 0
    relaxed_count: int = 0

    def leaf_cluster_by_id(self, cid):
        return self._by_id(self.leaf_clusters, cid)

    def small_by_id(self, cid):
        return self._by_id(self.small_clusters, cid)

    def edge_by_id(self, cid):
        return self._by_id(self.edge_clusters, cid)

    @staticmethod
    def _by_id(items, cid):
        for it in items:
            if it.id == cid:
                return it
        raise KeyError(cid)

    def leaf_clients(self, leaf_vertex) -> tuple:
        """Original clients behind a condensed-tree leaf."""
        return self.ct.leaf_clients(leaf_vertex)

    def leaf_length(self, leaf_vertex) -> int:
        return self.tree.edge_len[leaf_vertex]


def build_clustering(ct: CondensedTree, load: LoadFunction, eps_hat, delta, D: int) -> Clustering:
    """Partition the condensed tree; every edge lands in exactly one cluster."""
    eps_hat = as_fraction(eps_hat)
    delta = as_fraction(delta)
    if not (0 < eps_hat <= 1 and 0 < delta <= 1):
        raise ValueError("eps_hat and delta must lie in (0, 1]")
    if D < 0:
        raise ValueError("D must be nonnegative")
    anchor_thr = delta * D / 2
    lower = eps_hat * delta * D / 2
    upper = delta * D / 2

    base = ct.tree
    parent = dict(base.parent)
    children = {v: list(cs) for v, cs in base.children.items()}
    edge_len = dict(base.edge_len)
    existing = set(children)
    root = base.root

    def is_leaf(v):
        return not children[v]

    # -- anchors: heavy leaves, plus promotions for anchor-free subtrees ----
    anchors = [v for v in base.preorder() if is_leaf(v) and ct.leaf_load(load, v) >= anchor_thr]
    anchor_set = set(anchors)
    promoted = set()
    while True:
        has = {}
        for v in base.postorder():
            has[v] = v in anchor_set or any(has[c] for c in children[v])
        bad = next((v for v in base.preorder() if children[v] and not has[v]), None)
        if bad is None:
            break
        subleaves = [u for u in base.subtree_vertices(bad) if is_leaf(u)]
        pick = min(subleaves, key=lambda u: (-base.dist_to_root(u), str(u)))
        anchor_set.add(pick)
        promoted.add(pick)
        anchors = [v for v in base.preorder() if is_leaf(v) and v in anchor_set]

    leaf_clusters = [
        LeafCluster(
            id=f"L{i}",
            leaf=v,
            attach=parent[v],
            load=ct.leaf_load(load, v),
            length=edge_len[v],
            promoted=v in promoted,
        )
        for i, v in enumerate(anchors)
    ]
    cluster_of_anchor = {lc.leaf: lc for lc in leaf_clusters}

    # -- significant vertices: depot plus backbone branching points ---------
    def bb_children(u):
        return [c for c in children[u] if c in anchor_set or not is_leaf(c)]

    significant = {root}
    for u in base.preorder():
        if not is_leaf(u) and len(bb_children(u)) == 2:
            significant.add(u)

    def wool_at(v):
        return [c for c in children[v] if is_leaf(c) and c not in anchor_set]

    # -- chains: maximal backbone runs between significant points -----------
    chains = []
    sources = []
    for v in base.preorder():
        if v in cluster_of_anchor:
            sources.append(("anchor", v))
        elif v in significant and v != root:
            sources.append(("merge", v))
    for kind, v in sources:
        if kind == "anchor":
            lc = cluster_of_anchor[v]
            start = lc.attach
            if start in significant:
                chain = _Chain("anchor", lc.id, start, start)
                if start == root and len(bb_children(root)) == 1:
                    # root wool belongs to the single chain arriving at the
                    # depot, which here is this anchor's empty chain
                    chain._items = [("leaf", wl, root) for wl in wool_at(root)]
                chains.append(chain)
                continue
            source_id = lc.id
        else:
            start = v
            source_id = v
        items = []
        if kind == "anchor":
            for wl in wool_at(start):
                items.append(("leaf", wl, start))
        cur = start
        top = root
        while cur != root:
            p = parent[cur]
            items.append(("edge", cur, p))
            if p in significant:
                top = p
                break
            for wl in wool_at(p):
                items.append(("leaf", wl, p))
            cur = p
        if top == root and len(bb_children(root)) == 1:
            for wl in wool_at(root):
                items.append(("leaf", wl, root))
        chains.append(_Chain(kind, source_id, start, top))
        chains[-1]._items = items  # consumed below

    # -- classify / cut each chain ------------------------------------------
    small_clusters = []
    edge_clusters = []
    relaxed_count = 0
    unit = 2 if load.kind == TOUR_LENGTH else 0

    def item_load(it):
        if it[0] == "leaf":
            return ct.leaf_load(load, it[1])
        return unit * edge_len[it[1]]

    for chain in chains:
        items = getattr(chain, "_items", [])
        if not items:
            continue
        total = sum(item_load(it) for it in items)
        if total < lower:
            small_clusters.append(
                SmallCluster(
                    id=f"S{len(small_clusters)}",
                    bottom=chain.start,
                    top=chain.top,
                    backbone_edges=tuple(v for k, v, *_ in items if k == "edge"),
                    leaf_vertices=tuple(v for k, v, *_ in items if k == "leaf"),
                    load=total,
                )
            )
            chain.small_id = small_clusters[-1].id
            continue

        queue = deque(items)
        consumed = 0
        cur_load = 0
        cur_items = []
        while queue:
            it = queue.popleft()
            if it[0] == "leaf":
                cur_load += item_load(it)
                cur_items.append(it)
            else:
                _, v, p = it
                ln = edge_len[v]
                el = unit * ln
                if unit > 0 and cur_load < lower and cur_load + el >= lower:
                    need = lower - cur_load
                    take = math.ceil(need / unit)
                    if take < ln:
                        # split (p, v): keep the leafward part in this cluster
                        w = fresh_vertex(existing, f"{v}^s")
                        children[p][children[p].index(v)] = w
                        children[w] = [v]
                        parent[w] = p
                        parent[v] = w
                        edge_len[w] = ln - take
                        edge_len[v] = take
                        cur_items.append(("edge", v, w))
                        cur_load += unit * take
                        queue.appendleft(("edge", w, p))
                    else:
                        cur_items.append(it)
                        cur_load += el
                else:
                    cur_items.append(it)
                    cur_load += el
            if cur_load >= lower:
                remaining = total - consumed - cur_load
                # close only if nothing is left or the rest can stand alone;
                # zero-load tails ride along in the current cluster
                if not queue or remaining >= lower:
                    ec = _make_edge_cluster(
                        f"E{len(edge_clusters)}", cur_items, cur_load, upper, parent
                    )
                    if ec.relaxed:
                        relaxed_count += 1
                    edge_clusters.append(ec)
                    chain.cluster_ids.append(ec.id)
                    consumed += cur_load
                    cur_load = 0
                    cur_items = []
        if cur_items:
            raise RuntimeError("chain cutting left an unfinished cluster")

    for chain in chains:
        if hasattr(chain, "_items"):
            del chain._items

    working = RoutingTree(
        root=root,
        parent=parent,
        children=children,
        edge_len=edge_len,
        clients=base.clients,
        scale_den=base.scale_den,
        comments=base.comments,
    )
    backbone = frozenset(v for v in working.preorder() if v != root and working.children[v])
    return Clustering(
        tree=working,
        ct=ct,
        load=load,
        eps_hat=eps_hat,
        delta=delta,
        D=D,
        lower=lower,
        upper=upper,
        backbone=backbone,
        leaf_clusters=leaf_clusters,
        small_clusters=small_clusters,
        edge_clusters=edge_clusters,
        chains=chains,
        merge_vertices=sorted(significant, key=str),
        promoted_count=len(promoted),
        relaxed_count=relaxed_count,
    )


def _make_edge_cluster(cid, items, load_val, upper, parent):
    edges = [v for k, v, *_ in items if k == "edge"]  # leafward -> rootward
    leaf_at = {}
    for k, v, attach in items:
        if k == "leaf":
            if attach in leaf_at:
                raise RuntimeError(f"two wool leaves at vertex {attach!r}")
            leaf_at[attach] = v
    if edges:
        bottom = edges[0]
        top = parent[edges[-1]]
        ents = [("edge", v) for v in reversed(edges)]
        if top in leaf_at:
            ents.insert(0, ("pad", top))
        if bottom in leaf_at:
            ents.append(("pad", bottom))
    else:
        (attach,) = set(leaf_at)
        bottom = top = attach
        ents = [("pad", attach), ("pad", attach)]
    slots = []
    placed = 0
    for kind, v in ents[:-1]:
        s = leaf_at.get(v)
        slots.append(s)
        if s is not None:
            placed += 1
    if placed != len(leaf_at):
        raise RuntimeError(f"cluster {cid}: leaf slots lost {len(leaf_at) - placed} leaves")
    return EdgeCluster(
        id=cid,
        bottom=bottom,
        top=top,
        backbone=tuple(ents),
        leaves=tuple(slots),
        load=load_val,
        relaxed=load_val > upper,
    )


# -- cluster tree -------------------------------------------------------------


@dataclass
class ClusterTreeNode:
    id: str
    tag: str  # "base" | "grow" | "merge"
    ref: str  # cluster id (base/grow) or tree vertex (merge)
    tree_vertex: str
    children: list = field(default_factory=list)
    parent: str | None = None


@dataclass
class ClusterTree:
    nodes: dict
    root_id: str

    def node(self, nid) -> ClusterTreeNode:
        return self.nodes[nid]

    def postorder(self) -> list:
        out = []
        stack = [(self.root_id, False)]
        while stack:
            nid, done = stack.pop()
            if done:
                out.append(nid)
            else:
                stack.append((nid, True))
                for c in reversed(self.nodes[nid].children):
                    stack.append((c, False))
        return out

    def base_nodes(self) -> list:
        return [n for n in self.nodes.values() if n.tag == "base"]


def build_cluster_tree(cl: Clustering) -> ClusterTree:
    """Contract clusters and branching points into the DP traversal tree."""
    nodes = {}

    def add(nid, tag, ref, vertex):
        nodes[nid] = ClusterTreeNode(id=nid, tag=tag, ref=ref, tree_vertex=vertex)
        return nid

    for m in cl.merge_vertices:
        add(f"merge:{m}", "merge", m, m)
    for lc in cl.leaf_clusters:
        add(f"base:{lc.id}", "base", lc.id, lc.attach)
    for ec in cl.edge_clusters:
        add(f"grow:{ec.id}", "grow", ec.id, ec.top)

    def link(child_id, parent_id):
        nodes[parent_id].children.append(child_id)
        nodes[child_id].parent = parent_id

    for chain in cl.chains:
        below = f"base:{chain.source_id}" if chain.source_kind == "anchor" else f"merge:{chain.source_id}"
        prev = below
        for cid in chain.cluster_ids:
            link(prev, f"grow:{cid}")
            prev = f"grow:{cid}"
        link(prev, f"merge:{chain.top}")

    root_id = f"merge:{cl.tree.root}"
    tstar = ClusterTree(nodes=nodes, root_id=root_id)
    for n in nodes.values():
        if n.tag == "grow" and len(n.children) != 1:
            raise RuntimeError(f"grow vertex {n.id} has {len(n.children)} children")
        if n.tag == "merge" and len(n.children) > 2:
            raise RuntimeError(f"merge vertex {n.id} has {len(n.children)} children")
        if n.tag == "base" and n.children:
            raise RuntimeError(f"base vertex {n.id} is not a leaf")
    return tstar


# -- small-cluster assignment --------------------------------------------------


@dataclass
class SmallClusterAssignment:
    mapping: dict  # small cluster id -> leaf cluster id
    by_leaf: dict  # leaf cluster id -> list of small cluster ids

    def smalls_for(self, leaf_cluster_id) -> list:
        return self.by_leaf.get(leaf_cluster_id, [])


def assign_small_clusters(cl: Clustering, t_star: ClusterTree) -> SmallClusterAssignment:
    """Charge each small cluster to a descendant leaf cluster, at most two per leaf.

    Candidate sets are laminar (descendants of the chain bottom), so a
    deepest-first greedy with per-anchor capacity two always succeeds; a
    failure here would mean the clustering itself is inconsistent.
    """
    tree = cl.tree
    depth = {v: tree.dist_to_root(v) for v in tree.preorder()}
    anc_cache = {}

    def ancestors(v):
        if v not in anc_cache:
            anc_cache[v] = set(tree.ancestors(v))
        return anc_cache[v]

    mapping = {}
    by_leaf = {}
    order = sorted(cl.small_clusters, key=lambda s: (-depth[s.bottom], s.id))
    for sc in order:
        cands = [lc for lc in cl.leaf_clusters if sc.bottom in ancestors(lc.attach)]
        cands.sort(key=lambda lc: (-depth[lc.attach], lc.id))
        chosen = next((lc for lc in cands if len(by_leaf.get(lc.id, [])) < 2), None)
        if chosen is None:
            raise RuntimeError(f"no capacity left for small cluster {sc.id}")
        mapping[sc.id] = chosen.id
        by_leaf.setdefault(chosen.id, []).append(sc.id)
    return SmallClusterAssignment(mapping=mapping, by_leaf=by_leaf)


# -- diagnostics ---------------------------------------------------------------


def dump_clusters(cl: Clustering) -> str:
    """Tabular text dump: id, type, load, promoted/relaxed flags, edges."""
    rows = [("id", "type", "load", "flags", "edges")]
    for lc in cl.leaf_clusters:
        rows.append(
            (lc.id, "leaf", str(lc.load), "promoted" if lc.promoted else "", lc.leaf)
        )
    for sc in cl.small_clusters:
        rows.append(
            (
                sc.id,
                "small",
                str(sc.load),
                "",
                " ".join(list(sc.backbone_edges) + list(sc.leaf_vertices)),
            )
        )
    for ec in cl.edge_clusters:
        rows.append(
            (
                ec.id,
                "edge",
                str(ec.load),
                "relaxed" if ec.relaxed else "",
                " ".join(ec.real_backbone_edges() + ec.real_leaves()),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = []
    for r in rows:
        lines.append(
            "  ".join(str(r[i]).ljust(widths[i]) for i in range(4)) + "  " + r[4]
        )
    return "\n".join(lines)


def clustering_to_dot(cl: Clustering) -> str:
    """DOT rendering of the working tree with cluster membership colors."""
    owner = {}
    for lc in cl.leaf_clusters:
        owner[lc.leaf] = ("leaf", lc.id)
    for sc in cl.small_clusters:
        for v in list(sc.backbone_edges) + list(sc.leaf_vertices):
            owner[v] = ("small", sc.id)
    for ec in cl.edge_clusters:
        for v in ec.real_backbone_edges() + ec.real_leaves():
            owner[v] = ("edge", ec.id)
    colors = {"leaf": "gold", "small": "skyblue", "edge": "palegreen"}
    lines = ["digraph clustering {", "  rankdir=TB;"]
    for v in cl.tree.preorder():
        shape = "doublecircle" if v == cl.tree.root else (
            "box" if v in cl.tree.clients else "circle"
        )
        lines.append(f'  "{v}" [shape={shape}];')
    for v in cl.tree.preorder():
        if v == cl.tree.root:
            continue
        kind, cid = owner.get(v, ("", "?"))
        color = colors.get(kind, "gray")
        lines.append(
            f'  "{cl.tree.parent[v]}" -> "{v}" '
            f'[label="{cl.tree.edge_len[v]} {cid}", color={color}];'
        )
    lines.append("}")
    return "\n".join(lines)
