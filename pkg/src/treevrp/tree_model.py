"""Rooted edge-weighted tree instances.

A routing instance is a tree rooted at the depot, with nonnegative integer
edge lengths and clients sitting on leaves.  This module owns the canonical
representation plus the structural operations everything downstream builds
on: parsing/serialization (text and JSON forms, byte-exact round trip),
pruning of client-free subtrees, binarization with zero-length auxiliary
vertices, exact metrics (subtree length, depot distance, branch loads), edge
subdivision, and the condense operation that folds every maximal light
branch into a single leaf edge.

All values are treated as immutable once constructed; metric caches are
built lazily and assume no later mutation.  Rational inputs are expected to
be pre-scaled to integers (the instance header carries the scale
denominator).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

TOUR_LENGTH = "tour_length"
CLIENT_COUNT = "client_count"


def as_fraction(x) -> Fraction:
    """Coerce an int/float/str/Fraction parameter to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


class InstanceError(ValueError):
    """Malformed or inconsistent routing instance."""


@dataclass(frozen=True)
class LoadFunction:
    """Monotone, subadditive load measure g() over subgraphs.

    kind is one of TOUR_LENGTH (g = twice the total edge length, the
    closed-walk cost of covering the subgraph) or CLIENT_COUNT (g = number
    of clients in the subgraph).
    """

    kind: str

    def branch_load(self, tree: "RoutingTree", v) -> int:
        """g of the v-branch at parent(v): the subtree plus the parent edge."""
        if v == tree.root:
            raise KeyError("the root has no branch")
        if self.kind == TOUR_LENGTH:
            return 2 * (tree.edge_len[v] + tree.subtree_length(v))
        return tree.subtree_client_count(v)

    def edge_load(self, tree: "RoutingTree", v) -> int:
        """g contribution of the single edge (parent(v), v)."""
        if self.kind == TOUR_LENGTH:
            return 2 * tree.edge_len[v]
        return 1 if v in tree.clients else 0

    def subgraph_load(self, tree: "RoutingTree", edge_children) -> int:
        """g of the subgraph given as a collection of edges (by child id)."""
        return sum(self.edge_load(tree, v) for v in set(edge_children))


LOAD_LENGTH = LoadFunction(TOUR_LENGTH)
LOAD_CLIENTS = LoadFunction(CLIENT_COUNT)


@dataclass
class RoutingTree:
    """Depot-rooted tree with integer edge lengths and clients on leaves.

    parent maps every non-root vertex to its parent; children keeps a stable
    order (input order, auxiliary vertices appended last) so that all
    downstream enumeration is deterministic; edge_len[v] is the length of
    the edge (parent[v], v).
    """

    root: str
    parent: dict
    children: dict
    edge_len: dict
    clients: frozenset
    scale_den: int = 1
    comments: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- basic structure ---------------------------------------------------

    def vertices(self):
        return self.preorder()

    def preorder(self) -> list:
        out = self._cache.get("preorder")
        if out is None:
            out = []
            stack = [self.root]
            while stack:
                v = stack.pop()
                out.append(v)
                stack.extend(reversed(self.children.get(v, ())))
            self._cache["preorder"] = out
        return out

    def postorder(self) -> list:
        return self._postorder()

    def _postorder(self) -> list:
        out = self._cache.get("postorder")
        if out is None:
            out = []
            stack = [(self.root, False)]
            while stack:
                v, done = stack.pop()
                if done:
                    out.append(v)
                else:
                    stack.append((v, True))
                    for c in reversed(self.children.get(v, ())):
                        stack.append((c, False))
            self._cache["postorder"] = out
        return out

    def is_leaf(self, v) -> bool:
        return not self.children.get(v)

    def leaves(self) -> list:
        return [v for v in self.preorder() if self.is_leaf(v)]

    def total_length(self) -> int:
        return sum(self.edge_len.values())

    # -- metrics -----------------------------------------------------------

    def dist_to_root(self, v) -> int:
        depths = self._cache.get("depth")
        if depths is None:
            depths = {self.root: 0}
            for u in self.preorder():
                if u != self.root:
                    depths[u] = depths[self.parent[u]] + self.edge_len[u]
            self._cache["depth"] = depths
        if v not in depths:
            raise KeyError(f"unknown vertex {v!r}")
        return depths[v]

    def subtree_length(self, v) -> int:
        subs = self._cache.get("sublen")
        if subs is None:
            subs = {}
            for u in self._postorder():
                subs[u] = sum(subs[c] + self.edge_len[c] for c in self.children.get(u, ()))
            self._cache["sublen"] = subs
        if v not in subs:
            raise KeyError(f"unknown vertex {v!r}")
        return subs[v]

    def subtree_client_count(self, v) -> int:
        counts = self._cache.get("subclients")
        if counts is None:
            counts = {}
            for u in self._postorder():
                counts[u] = (1 if u in self.clients else 0) + sum(
                    counts[c] for c in self.children.get(u, ())
                )
            self._cache["subclients"] = counts
        if v not in counts:
            raise KeyError(f"unknown vertex {v!r}")
        return counts[v]

    def subtree_vertices(self, v) -> list:
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(reversed(self.children.get(u, ())))
        return out

    def subtree_clients(self, v) -> list:
        return [u for u in self.subtree_vertices(v) if u in self.clients]

    def ancestors(self, v) -> list:
        """Vertices on the v-to-root path, v and root included."""
        out = [v]
        while v != self.root:
            v = self.parent[v]
            out.append(v)
        return out


def subtree_length(tree: RoutingTree, v) -> int:
    return tree.subtree_length(v)


def dist_to_root(tree: RoutingTree, v) -> int:
    return tree.dist_to_root(v)


def branch_load(tree: RoutingTree, load: LoadFunction, v) -> int:
    return load.branch_load(tree, v)


def tour_cost(tree: RoutingTree, clients) -> int:
    """Closed-walk cost of serving a client set from the depot.

    Equals twice the length of the Steiner tree spanning the clients and
    the root (tours traverse every used edge exactly twice).
    """
    seen = set()
    total = 0
    for c in clients:
        v = c
        while v != tree.root and v not in seen:
            seen.add(v)
            total += tree.edge_len[v]
            v = tree.parent[v]
    return 2 * total


# -- construction and validation -------------------------------------------


def build_tree(root, edges, clients, scale_den=1, comments=(), prune=True) -> RoutingTree:
    """Assemble and validate a RoutingTree from (parent, child, length) triples.

    Client-free subtrees are pruned (any subtree without a client can be
    dropped without changing the problem), after which every leaf is a
    client.  Raises InstanceError on structural problems.
    """
    root = str(root)
    parent = {}
    children = {root: []}
    edge_len = {}
    for u, v, ln in edges:
        u, v = str(u), str(v)
        if not isinstance(ln, int):
            raise InstanceError(f"edge ({u},{v}) length {ln!r} is not an integer")
        if ln < 0:
            raise InstanceError(f"edge ({u},{v}) has negative length {ln}")
        if v in parent or v == root:
            raise InstanceError(f"duplicate edge into vertex {v!r}")
        parent[v] = u
        edge_len[v] = ln
        children.setdefault(u, []).append(v)
        children.setdefault(v, [])
    all_vertices = set(children)
    # connectivity: everything must be reachable from the root
    reachable = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v in reachable:
            raise InstanceError("cycle detected in edge list")
        reachable.add(v)
        stack.extend(children[v])
    if reachable != all_vertices:
        missing = sorted(all_vertices - reachable)[:3]
        raise InstanceError(f"disconnected edge list (unreachable: {missing})")

    client_set = set()
    for c in clients:
        c = str(c)
        if c not in all_vertices:
            raise InstanceError(f"client {c!r} is not a vertex")
        if children[c]:
            raise InstanceError(f"client {c!r} is not a leaf")
        client_set.add(c)
    if int(scale_den) < 1:
        raise InstanceError(f"scale denominator must be >= 1, got {scale_den}")

    if prune:
        # drop maximal subtrees containing no client
        keep = set()
        order = []
        stack = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                order.append(v)
            else:
                stack.append((v, True))
                for c in reversed(children[v]):
                    stack.append((c, False))
        has_client = {}
        for v in order:
            has_client[v] = v in client_set or any(has_client[c] for c in children[v])
        if not has_client[root]:
            raise InstanceError("instance has no clients")
        children = {v: [c for c in children[v] if has_client[c]] for v in children if has_client[v]}
        parent = {v: p for v, p in parent.items() if has_client[v]}
        edge_len = {v: ln for v, ln in edge_len.items() if has_client[v]}

    return RoutingTree(
        root=root,
        parent=parent,
        children=children,
        edge_len=edge_len,
        clients=frozenset(client_set),
        scale_den=int(scale_den),
        comments=tuple(comments),
    )


# -- serialization -----------------------------------------------------------

# Text form (one item per line, '\n' endings, comments only at the top):
#   # optional comment lines
#   scale <denominator>
#   root <id>
#   edge <parent> <child> <length>     (edges in preorder, children in order)
#   client <id>                        (clients in preorder)
# The JSON form carries the same fields as one object; both round-trip
# byte-identically through save -> load -> save.


def load_instance(data) -> RoutingTree:
    """Parse an instance from text/JSON bytes or string."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    stripped = data.lstrip()
    if stripped.startswith("{"):
        return instance_from_dict(json.loads(data))
    root = None
    scale = 1
    edges = []
    clients = []
    comments = []
    header = True
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not header:
                raise InstanceError(f"line {lineno}: comments are only allowed at the top")
            comments.append(line[1:].strip())
            continue
        header = False
        parts = line.split()
        if parts[0] == "scale" and len(parts) == 2:
            try:
                scale = int(parts[1])
            except ValueError:
                raise InstanceError(f"line {lineno}: bad scale {parts[1]!r}") from None
        elif parts[0] == "root" and len(parts) == 2:
            if root is not None:
                raise InstanceError(f"line {lineno}: duplicate root line")
            root = parts[1]
        elif parts[0] == "edge" and len(parts) == 4:
            try:
                ln = int(parts[3])
            except ValueError:
                raise InstanceError(f"line {lineno}: bad edge length {parts[3]!r}") from None
            edges.append((parts[1], parts[2], ln))
        elif parts[0] == "client" and len(parts) == 2:
            clients.append(parts[1])
        else:
            raise InstanceError(f"line {lineno}: cannot parse {raw!r}")
    if root is None:
        raise InstanceError("missing root line")
    return build_tree(root, edges, clients, scale_den=scale, comments=comments)


def save_instance(tree: RoutingTree, fmt="text") -> str:
    """Serialize canonically (preorder edges) so save/load is byte-exact."""
    if fmt == "json":
        return json.dumps(instance_to_dict(tree), indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"# {c}" for c in tree.comments]
    lines.append(f"scale {tree.scale_den}")
    lines.append(f"root {tree.root}")
    order = tree.preorder()
    for v in order:
        if v != tree.root:
            lines.append(f"edge {tree.parent[v]} {v} {tree.edge_len[v]}")
    for v in order:
        if v in tree.clients:
            lines.append(f"client {v}")
    return "\n".join(lines) + "\n"


def instance_to_dict(tree: RoutingTree) -> dict:
    order = tree.preorder()
    return {
        "comments": list(tree.comments),
        "scale": tree.scale_den,
        "root": tree.root,
        "edges": [
            {"u": tree.parent[v], "v": v, "len": tree.edge_len[v]} for v in order if v != tree.root
        ],
        "clients": [v for v in order if v in tree.clients],
    }


def instance_from_dict(obj: dict) -> RoutingTree:
    try:
        return build_tree(
            obj["root"],
            [(e["u"], e["v"], e["len"]) for e in obj["edges"]],
            obj["clients"],
            scale_den=obj.get("scale", 1),
            comments=obj.get("comments", ()),
        )
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed structured instance: {exc}") from exc


# -- binarize ----------------------------------------------------------------


def fresh_vertex(existing, base) -> str:
    """Deterministic id not present in `existing` (which it updates)."""
    n = 0
    cand = f"{base}{n}"
    while cand in existing:
        n += 1
        cand = f"{base}{n}"
    existing.add(cand)
    return cand


def binarize(tree: RoutingTree) -> RoutingTree:
    """Make every vertex have at most two children.

    A vertex with children c1..cl (l > 2) keeps c1 and hands c2..cl to a new
    zero-length auxiliary child, recursively.  Lengths, leaves and pairwise
    leaf distances are unchanged; the operation is idempotent.
    """
    parent = dict(tree.parent)
    children = {v: list(cs) for v, cs in tree.children.items()}
    edge_len = dict(tree.edge_len)
    existing = set(children)
    queue = [v for v in tree.preorder() if len(children[v]) > 2]
    while queue:
        v = queue.pop(0)
        while len(children[v]) > 2:
            rest = children[v][1:]
            aux = fresh_vertex(existing, "_b")
            children[v] = [children[v][0], aux]
            children[aux] = rest
            parent[aux] = v
            edge_len[aux] = 0
            for c in rest:
                parent[c] = aux
            v = aux
    return RoutingTree(
        root=tree.root,
        parent=parent,
        children=children,
        edge_len=edge_len,
        clients=tree.clients,
        scale_den=tree.scale_den,
        comments=tree.comments,
    )


def subdivide_edge(tree: RoutingTree, v, bottom_len: int, new_id=None):
    """Split the edge (parent(v), v) into (parent, w) + (w, v).

    The piece adjacent to v keeps `bottom_len` of the original length.
    Returns (new_tree, w).  Total length is conserved.
    """
    if v == tree.root:
        raise ValueError("the root has no parent edge")
    ln = tree.edge_len[v]
    if not 0 <= bottom_len <= ln:
        raise ValueError(f"bottom_len {bottom_len} outside [0, {ln}]")
    existing = set(tree.children)
    w = new_id if new_id is not None else fresh_vertex(existing, f"{v}^s")
    if w in tree.children:
        raise ValueError(f"vertex id {w!r} already in use")
    u = tree.parent[v]
    parent = dict(tree.parent)
    children = {x: list(cs) for x, cs in tree.children.items()}
    edge_len = dict(tree.edge_len)
    children[u][children[u].index(v)] = w
    children[w] = [v]
    parent[w] = u
    parent[v] = w
    edge_len[w] = ln - bottom_len
    edge_len[v] = bottom_len
    return (
        RoutingTree(
            root=tree.root,
            parent=parent,
            children=children,
            edge_len=edge_len,
            clients=tree.clients,
            scale_den=tree.scale_den,
            comments=tree.comments,
        ),
        w,
    )


# -- condense ----------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """The v-branch at u: the subtree rooted at v plus the edge (u, v)."""

    attach: str
    top: str
    edge_vertices: tuple  # every edge in the branch, named by its child vertex
    clients: tuple
    length: int
    load: int


@dataclass
class CondensedTree:
    """Tree after folding every maximal light branch into one leaf edge.

    condensed_leaf_info maps each folded leaf back to the original branch;
    clients of a folded branch are modeled as co-located at the leaf.  The
    input tree is kept so tours can be expanded back to original clients.
    """

    tree: RoutingTree
    original: RoutingTree
    condensed_leaf_info: dict
    provenance: dict
    threshold: int

    def leaf_load(self, load: LoadFunction, v) -> int:
        info = self.condensed_leaf_info.get(v)
        if info is not None:
            return info.load
        return load.branch_load(self.tree, v)

    def leaf_clients(self, v) -> tuple:
        """Original clients represented by condensed-tree leaf v."""
        info = self.condensed_leaf_info.get(v)
        if info is not None:
            return info.clients
        return (v,)


def _branch_of(tree: RoutingTree, load: LoadFunction, v) -> Branch:
    verts = tree.subtree_vertices(v)
    return Branch(
        attach=tree.parent[v],
        top=v,
        edge_vertices=tuple(verts),
        clients=tuple(u for u in verts if u in tree.clients),
        length=tree.edge_len[v] + tree.subtree_length(v),
        load=load.branch_load(tree, v),
    )


def condense(tree: RoutingTree, load: LoadFunction, delta, D: int) -> CondensedTree:
    """Fold every maximal branch of load <= floor(delta*D) into a leaf edge.

    Two sibling foldable branches whose combined load still fits under the
    threshold are first merged under a zero-length vertex, so no two sibling
    condensed leaves can be re-combined within the threshold.  The folded
    leaf edge carries the full branch length; total tree length is
    conserved.
    """
    thr = math.floor(as_fraction(delta) * D)
    loads = {v: load.branch_load(tree, v) for v in tree.preorder() if v != tree.root}
    in_b = {
        v
        for v, g in loads.items()
        if g <= thr and (tree.parent[v] == tree.root or loads[tree.parent[v]] > thr)
    }

    parent = {}
    children = {tree.root: []}
    edge_len = {}
    clients = set()
    info = {}
    provenance = {tree.root: tree.root}
    existing = set(tree.children)

    def add_leaf(u, leaf_id, length, branch):
        parent[leaf_id] = u
        children[u].append(leaf_id)
        children[leaf_id] = []
        edge_len[leaf_id] = length
        clients.add(leaf_id)
        info[leaf_id] = branch

    stack = [tree.root]
    while stack:
        u = stack.pop()
        kids = tree.children.get(u, [])
        folded = [v for v in kids if v in in_b]
        merge_pair = len(folded) == 2 and loads[folded[0]] + loads[folded[1]] <= thr
        merged_done = False
        for v in kids:
            if v in in_b:
                if merge_pair:
                    if merged_done:
                        continue
                    v1, v2 = folded
                    b1 = _branch_of(tree, load, v1)
                    b2 = _branch_of(tree, load, v2)
                    merged_id = fresh_vertex(existing, f"{u}~m")
                    merged = Branch(
                        attach=u,
                        top=merged_id,
                        edge_vertices=b1.edge_vertices + b2.edge_vertices,
                        clients=b1.clients + b2.clients,
                        length=b1.length + b2.length,
                        load=b1.load + b2.load,
                    )
                    add_leaf(u, merged_id, merged.length, merged)
                    provenance[merged_id] = None
                    merged_done = True
                else:
                    add_leaf(
                        u, v, tree.edge_len[v] + tree.subtree_length(v), _branch_of(tree, load, v)
                    )
                    provenance[v] = v
            else:
                parent[v] = u
                children[u].append(v)
                children[v] = []
                edge_len[v] = tree.edge_len[v]
                if v in tree.clients:
                    clients.add(v)
                provenance[v] = v
                stack.append(v)

    condensed = RoutingTree(
        root=tree.root,
        parent=parent,
        children=children,
        edge_len=edge_len,
        clients=frozenset(clients),
        scale_den=tree.scale_den,
        comments=tree.comments,
    )
    return CondensedTree(
        tree=condensed,
        original=tree,
        condensed_leaf_info=info,
        provenance=provenance,
        threshold=thr,
    )
