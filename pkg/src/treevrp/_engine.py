"""Configuration dynamic program over the cluster tree.

Shared by the makespan and the capacitated solvers; the two differ only in
what a bucket measures (rounded tour length vs rounded client count), in
whether a minimum total length is tracked per configuration, and in the
merge arithmetic.  A configuration is a sparse sorted tuple of
(bucket, count) pairs: count open tours whose rounded load is
bucket * width, every tour projected up to the depot so that backbone
traversal is pre-paid and passing a cluster changes nothing.

Cases, processed over the cluster tree in postorder:

* base: the single tour that covers a leaf cluster plus its assigned small
  clusters, rounded once on introduction;
* grow: an edge cluster is covered either by one open tour collecting all
  its leaves, or split at an index i: a new cluster-ending tour takes the
  depot-side leaves 1..i and an open tour takes the rest;
* merge: at a branching vertex, any multiset of (left bucket, right bucket)
  tour pairs may fuse; the shared depot path is counted once.

Configurations breaching the bucket cap or the tour budget are dropped.  A
configuration pointwise-coverable by a stored one with the same total may
be pruned (`dominance`); pruning only removes redundant states and is
switchable off for oracle tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


def cfg_get(cfg, bucket) -> int:
    for b, c in cfg:
        if b == bucket:
            return c
    return 0


def cfg_total(cfg) -> int:
    return sum(c for _, c in cfg)


def cfg_add(cfg, bucket, delta):
    """Return cfg with `delta` tours added at `bucket` (delta may be < 0)."""
    items = dict(cfg)
    items[bucket] = items.get(bucket, 0) + delta
    if items[bucket] < 0:
        raise ValueError(f"negative count at bucket {bucket}")
    if items[bucket] == 0:
        del items[bucket]
    return tuple(sorted(items.items()))


def cfg_expand(cfg) -> tuple:
    """Ascending list of bucket values with multiplicity."""
    out = []
    for b, c in cfg:
        out.extend([b] * c)
    return tuple(out)


def cfg_max_bucket(cfg) -> int:
    return max((b for b, _ in cfg), default=0)


@dataclass
class _OpenTour:
    clients: set
    bucket: int
    value: int = 0
    roundups: int = 0
    clusters_covered: int = 0
    merge_branchings: int = 0


@dataclass
class DPStats:
    nodes: int = 0
    configs_stored: int = 0
    configs_emitted: int = 0
    configs_pruned: int = 0
    matrices_tried: int = 0


class DPEngine:
    """One DP run over a fixed clustering and parameter set."""

    def __init__(
        self,
        cl,
        t_star,
        assignment,
        *,
        width: Fraction,
        max_bucket: int,
        max_total: int,
        count_clients: bool,
        track_value: bool,
        dominance: bool = True,
    ):
        self.cl = cl
        self.t_star = t_star
        self.assignment = assignment
        self.width = Fraction(width)
        if self.width <= 0:
            raise ValueError("bucket width must be positive")
        self.max_bucket = max_bucket
        self.max_total = max_total
        self.count_clients = count_clients
        self.track_value = track_value
        self.dominance = dominance
        self.stats = DPStats()
        self.tables = {}
        self._wp = self.width.numerator
        self._wq = self.width.denominator
        self._prepare()

    # bucket arithmetic: exact integer ceil/floor of x / width
    def ceil_buckets(self, x: int) -> int:
        return -((-x * self._wq) // self._wp)

    def floor_buckets(self, x: int) -> int:
        return (x * self._wq) // self._wp

    def _prepare(self):
        cl = self.cl
        tree = cl.tree
        self.base_info = {}
        for lc in cl.leaf_clusters:
            small_ids = self.assignment.smalls_for(lc.id)
            small_len = 0
            small_clients = set()
            for sid in small_ids:
                sc = cl.small_by_id(sid)
                for v in sc.leaf_vertices:
                    small_len += tree.edge_len[v]
                    small_clients.update(cl.leaf_clients(v))
            clients = set(cl.leaf_clients(lc.leaf)) | small_clients
            raw_len = 2 * (lc.length + small_len + tree.dist_to_root(lc.attach))
            self.base_info[lc.id] = {
                "clients": clients,
                "raw_len": raw_len,
                "count": len(clients),
                "n_small": len(small_ids),
            }
        self.grow_info = {}
        for ec in cl.edge_clusters:
            slots = []
            svs = ec.slot_vertices()
            for leaf, at in zip(ec.leaves, svs):
                if leaf is None:
                    continue
                cls = set(cl.leaf_clients(leaf))
                slots.append(
                    {
                        "leaf": leaf,
                        "attach": at,
                        "depth": tree.dist_to_root(at),
                        "len": tree.edge_len[leaf],
                        "clients": cls,
                        "count": len(cls),
                    }
                )
            prefix_len = 0
            prefix_count = 0
            for s in slots:
                prefix_len += s["len"]
                prefix_count += s["count"]
                s["prefix_len"] = prefix_len
                s["prefix_count"] = prefix_count
            total_len = prefix_len
            total_count = prefix_count
            self.grow_info[ec.id] = {
                "slots": slots,
                "total_len": total_len,
                "total_count": total_count,
            }

    # -- case transitions ----------------------------------------------------

    def base_configuration(self, lc_id):
        """Single configuration for a leaf cluster, or None when over cap."""
        info = self.base_info[lc_id]
        raw = info["count"] if self.count_clients else info["raw_len"]
        b0 = max(1, self.ceil_buckets(raw))  # a zero-load tour still occupies a slot
        if b0 > self.max_bucket:
            return None
        return ((b0, 1),), info["raw_len"]

    def grow_emit(self, ec_id, cfg, value):
        """All successor (config, value, backpointer-tail) triples for one child config."""
        info = self.grow_info[ec_id]
        slots = info["slots"]
        out = []
        if not slots:
            out.append((cfg, value, ("pass",)))
            return out
        coll_load = info["total_count"] if self.count_clients else 2 * info["total_len"]
        coll_value = 2 * info["total_len"]
        # (a) no ending tour: one open tour collects every leaf
        for l2, cnt in cfg:
            if cnt < 1:
                continue
            l3 = l2 + self.ceil_buckets(coll_load)
            if l3 > self.max_bucket:
                continue
            nxt = cfg_add(cfg_add(cfg, l2, -1), l3, 1)
            out.append((nxt, value + coll_value, ("collect", l2, l3, None)))
        # (b) split at a real leaf index: new ending tour takes slots 1..i
        for i, s in enumerate(slots):
            raw1 = (
                s["prefix_count"]
                if self.count_clients
                else 2 * (s["depth"] + s["prefix_len"])
            )
            end_value = 2 * (s["depth"] + s["prefix_len"])
            l1 = self.ceil_buckets(raw1)
            if l1 > self.max_bucket or l1 < 1:
                continue
            if i == len(slots) - 1:
                # ending tour covers everything: no collecting tour involved
                if cfg_total(cfg) + 1 > self.max_total:
                    continue
                nxt = cfg_add(cfg, l1, 1)
                out.append((nxt, value + end_value, ("split", i, l1, None, None)))
                continue
            suffix_len = info["total_len"] - s["prefix_len"]
            suffix_count = info["total_count"] - s["prefix_count"]
            suff_load = suffix_count if self.count_clients else 2 * suffix_len
            for l2, cnt in cfg:
                if cnt < 1:
                    continue
                l3 = l2 + self.ceil_buckets(suff_load)
                if l3 > self.max_bucket:
                    continue
                if cfg_total(cfg) + 1 > self.max_total:
                    continue
                nxt = cfg_add(cfg_add(cfg_add(cfg, l1, 1), l2, -1), l3, 1)
                out.append(
                    (nxt, value + end_value + 2 * suffix_len, ("split", i, l1, l2, l3))
                )
        return out

    def merge_bucket(self, l1, l2, depth) -> int:
        if self.count_clients:
            return l1 + l2
        return l1 + l2 - self.floor_buckets(2 * depth)

    def merge_emit(self, depth, cfg1, v1, cfg2, v2):
        """All merge outcomes for a pair of child configurations."""
        out = []
        pairs = [(b1, b2) for b1, _ in cfg1 for b2, _ in cfg2]
        avail1 = dict(cfg1)
        avail2 = dict(cfg2)

        def rec(idx, a1, a2, chosen):
            if idx == len(pairs):
                self.stats.matrices_tried += 1
                merged_adds = []
                ok = True
                n_pairs = 0
                for (b1, b2), cnt in chosen:
                    lm = self.merge_bucket(b1, b2, depth)
                    if lm > self.max_bucket or lm < 1:
                        ok = False
                        break
                    merged_adds.append((lm, cnt))
                    n_pairs += cnt
                if not ok:
                    return
                total = sum(a1.values()) + sum(a2.values()) + n_pairs
                if total > self.max_total:
                    return
                items = {}
                for b, c in list(a1.items()) + list(a2.items()) + merged_adds:
                    if c:
                        items[b] = items.get(b, 0) + c
                nxt = tuple(sorted(items.items()))
                val = v1 + v2 - (2 * depth * n_pairs if self.track_value else 0)
                out.append((nxt, val, ("merge", tuple(chosen))))
                return
            b1, b2 = pairs[idx]
            most = min(a1.get(b1, 0), a2.get(b2, 0))
            for take in range(most + 1):
                if take:
                    a1[b1] -= take
                    a2[b2] -= take
                    rec(idx + 1, a1, a2, chosen + [((b1, b2), take)])
                    a1[b1] += take
                    a2[b2] += take
                else:
                    rec(idx + 1, a1, a2, chosen)

        rec(0, dict(avail1), dict(avail2), [])
        return out

    # -- table construction ----------------------------------------------------

    def run(self):
        """Fill the per-vertex tables bottom-up; returns the root config dict."""
        order = self.t_star.postorder()
        for nid in order:
            node = self.t_star.node(nid)
            self.stats.nodes += 1
            entries = {}

            def put(cfg, value, bp):
                self.stats.configs_emitted += 1
                old = entries.get(cfg)
                if old is None or (self.track_value and value < old[0]):
                    entries[cfg] = (value, bp)

            if node.tag == "base":
                made = self.base_configuration(node.ref)
                if made is not None:
                    cfg, raw_len = made
                    put(cfg, raw_len if self.track_value else 0, ("base",))
            elif node.tag == "grow":
                (child,) = node.children
                for cfg, (val, _) in self.tables[child].items():
                    for nxt, nval, tail in self.grow_emit(node.ref, cfg, val):
                        put(nxt, nval, (tail[0], cfg) + tail[1:])
            else:  # merge (or the depot root, which may have a single child)
                if len(node.children) == 1:
                    (child,) = node.children
                    for cfg, (val, _) in self.tables[child].items():
                        put(cfg, val, ("pass", cfg))
                else:
                    left, right = node.children
                    depth = self.cl.tree.dist_to_root(node.tree_vertex)
                    for cfg1, (v1, _) in self.tables[left].items():
                        for cfg2, (v2, _) in self.tables[right].items():
                            for nxt, nval, tail in self.merge_emit(depth, cfg1, v1, cfg2, v2):
                                put(nxt, nval, ("merge", cfg1, cfg2, tail[1]))
            if self.dominance:
                entries = self._prune(entries)
            self.tables[nid] = entries
            self.stats.configs_stored += len(entries)
            if not entries:
                break  # no feasible covering below this vertex; root stays empty
        return self.tables.get(self.t_star.root_id, {})

    def _prune(self, entries):
        if len(entries) <= 1:
            return entries
        by_total = {}
        for cfg in entries:
            by_total.setdefault(cfg_total(cfg), []).append(cfg)
        drop = set()
        for group in by_total.values():
            expanded = {cfg: cfg_expand(cfg) for cfg in group}
            group.sort(key=lambda c: (sum(expanded[c]), expanded[c]))
            for i, hi in enumerate(group):
                if hi in drop:
                    continue
                for lo in group[:i]:
                    if lo in drop:
                        continue
                    if all(a <= b for a, b in zip(expanded[lo], expanded[hi])) and (
                        not self.track_value or entries[lo][0] <= entries[hi][0]
                    ):
                        drop.add(hi)
                        break
        if drop:
            self.stats.configs_pruned += len(drop)
            entries = {cfg: e for cfg, e in entries.items() if cfg not in drop}
        return entries

    # -- reconstruction ---------------------------------------------------------

    def reconstruct(self, cfg) -> list:
        tours = self._expand(self.t_star.root_id, cfg)
        counted = tuple(sorted((t.bucket for t in tours)))
        if counted != cfg_expand(cfg):
            raise RuntimeError("reconstructed tours disagree with the root configuration")
        return tours

    def _expand(self, nid, cfg) -> list:
        node = self.t_star.node(nid)
        _, bp = self.tables[nid][cfg]
        kind = bp[0]
        if kind == "base":
            info = self.base_info[node.ref]
            (b0, _), = cfg
            return [
                _OpenTour(
                    clients=set(info["clients"]),
                    bucket=b0,
                    value=info["raw_len"],
                    roundups=1,
                    clusters_covered=1 + info["n_small"],
                )
            ]
        if kind == "pass":
            return self._expand(node.children[0], bp[1])
        if kind == "collect":
            _, child_cfg, l2, l3, _ = bp
            tours = self._expand(node.children[0], child_cfg)
            info = self.grow_info[node.ref]
            tour = self._take(tours, l2)
            tour.bucket = l3
            for s in info["slots"]:
                tour.clients |= s["clients"]
            tour.value += 2 * info["total_len"]
            tour.roundups += 1
            tour.clusters_covered += 1
            return tours
        if kind == "split":
            _, child_cfg, i, l1, l2, l3 = bp
            tours = self._expand(node.children[0], child_cfg)
            info = self.grow_info[node.ref]
            slots = info["slots"]
            s = slots[i]
            ending = _OpenTour(
                clients=set(),
                bucket=l1,
                value=2 * (s["depth"] + s["prefix_len"]),
                roundups=1,
                clusters_covered=1,
            )
            for t in slots[: i + 1]:
                ending.clients |= t["clients"]
            tours.append(ending)
            if l2 is not None:
                tour = self._take(tours[:-1], l2)
                tour.bucket = l3
                for t in slots[i + 1 :]:
                    tour.clients |= t["clients"]
                tour.value += 2 * (info["total_len"] - s["prefix_len"])
                tour.roundups += 1
                tour.clusters_covered += 1
            return tours
        if kind == "merge":
            _, cfg1, cfg2, matrix = bp
            left, right = node.children
            tours1 = self._expand(left, cfg1)
            tours2 = self._expand(right, cfg2)
            depth = self.cl.tree.dist_to_root(node.tree_vertex)
            merged = []
            for (b1, b2), cnt in matrix:
                for _ in range(cnt):
                    t1 = self._pop(tours1, b1)
                    t2 = self._pop(tours2, b2)
                    merged.append(
                        _OpenTour(
                            clients=t1.clients | t2.clients,
                            bucket=self.merge_bucket(b1, b2, depth),
                            value=t1.value + t2.value - 2 * depth,
                            roundups=t1.roundups + t2.roundups + 1,
                            clusters_covered=t1.clusters_covered + t2.clusters_covered,
                            merge_branchings=t1.merge_branchings + t2.merge_branchings + 1,
                        )
                    )
            return tours1 + tours2 + merged
        raise RuntimeError(f"corrupt backpointer {bp!r} at {nid}")

    @staticmethod
    def _take(tours, bucket) -> _OpenTour:
        for t in tours:
            if t.bucket == bucket:
                return t
        raise RuntimeError(f"no open tour at bucket {bucket} during reconstruction")

    @staticmethod
    def _pop(tours, bucket) -> _OpenTour:
        for i, t in enumerate(tours):
            if t.bucket == bucket:
                return tours.pop(i)
        raise RuntimeError(f"no open tour at bucket {bucket} during reconstruction")
