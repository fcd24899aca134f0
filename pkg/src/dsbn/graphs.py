"""Directed acyclic graphs, partially oriented graphs, and separation.

Separation in a directed graph comes in two interchangeable flavours: a
linear-time reachability search and an exhaustive enumeration of simple
trails.  Partially oriented graphs carry per-edge orientation marks
(none, one way, or both) and support the trail-based separation notion
that treats a node as a passable collider when it could still acquire a
descendant inside the conditioning set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import GraphError


def norm_edge(a: str, b: str) -> tuple[str, str]:
    """Canonical (sorted) endpoint pair for an undirected edge."""
    if a == b:
        raise GraphError("self-loops are not allowed")
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph over named nodes."""

    nodes: tuple[str, ...]
    arcs: frozenset[tuple[str, str]]
    _caches: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __init__(self, nodes: Iterable[str], arcs: Iterable[tuple[str, str]]):
        node_tuple = tuple(sorted(nodes))
        if len(set(node_tuple)) != len(node_tuple):
            raise GraphError("duplicate node names")
        arc_set = frozenset((u, v) for u, v in arcs)
        known = set(node_tuple)
        for u, v in arc_set:
            if u == v:
                raise GraphError("self-loops are not allowed")
            if u not in known or v not in known:
                raise GraphError(f"arc ({u}, {v}) uses an unknown node")
        object.__setattr__(self, "nodes", node_tuple)
        object.__setattr__(self, "arcs", arc_set)
        object.__setattr__(self, "_caches", {})
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        indeg = {v: 0 for v in self.nodes}
        for _, v in self.arcs:
            indeg[v] += 1
        ready = deque(v for v, d in indeg.items() if d == 0)
        seen = 0
        while ready:
            u = ready.popleft()
            seen += 1
            for w in self.children.get(u, ()):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if seen != len(self.nodes):
            raise GraphError("graph contains a directed cycle")

    @cached_property
    def parents(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.nodes}
        for u, v in sorted(self.arcs):
            out[v].append(u)
        return {v: tuple(ps) for v, ps in out.items()}

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.nodes}
        for u, v in sorted(self.arcs):
            out[u].append(v)
        return {v: tuple(cs) for v, cs in out.items()}

    @cached_property
    def neighbors(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, set[str]] = {v: set() for v in self.nodes}
        for u, v in self.arcs:
            out[u].add(v)
            out[v].add(u)
        return {v: tuple(sorted(ns)) for v, ns in out.items()}

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def adjacent(self, a: str, b: str) -> bool:
        return (a, b) in self.arcs or (b, a) in self.arcs

    def descendants(self, v: str) -> frozenset[str]:
        """All nodes reachable from ``v`` along arcs, excluding ``v``."""
        seen: set[str] = set()
        stack = list(self.children[v])
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(self.children[w])
        return frozenset(seen)

    def ancestors(self, v: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(self.parents[v])
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(self.parents[w])
        return frozenset(seen)

    def topological(self) -> tuple[str, ...]:
        indeg = {v: len(self.parents[v]) for v in self.nodes}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            u = ready.pop(0)
            order.append(u)
            for w in self.children[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            ready.sort()
        return tuple(order)

    def _mask(self, names: Iterable[str]) -> int:
        idx = self._index
        m = 0
        for v in names:
            m |= 1 << idx[v]
        return m

    def _desc_mask(self, v: str) -> int:
        cache = self._caches.setdefault("desc_mask", {})
        if v not in cache:
            cache[v] = self._mask(self.descendants(v) | {v})
        return cache[v]

    # -- serialization ----------------------------------------------

    def to_obj(self) -> dict:
        edges = []
        for u, v in sorted(self.arcs, key=lambda a: norm_edge(*a)):
            a, b = norm_edge(u, v)
            edges.append({"a": a, "b": b, "orient": ["ab" if (a, b) == (u, v) else "ba"]})
        return {"nodes": list(self.nodes), "edges": edges}

    @classmethod
    def from_obj(cls, obj: Mapping) -> "Dag":
        arcs = []
        for entry in obj.get("edges", ()):
            a, b, orient = entry["a"], entry["b"], entry.get("orient", ())
            if len(orient) != 1:
                raise GraphError("directed graph edges need exactly one orientation")
            arcs.append((a, b) if orient[0] == "ab" else (b, a))
        return cls(obj["nodes"], arcs)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.nodes:
            lines.append(f'  "{v}";')
        for u, v in sorted(self.arcs):
            lines.append(f'  "{u}" -> "{v}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Pog:
    """An undirected graph whose edges carry orientation marks.

    ``orient`` maps each canonical edge to the set of directed pairs
    established on it: empty (unoriented), one pair, or both pairs
    (a structural conflict the learner reports as failure).
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    orient: dict[tuple[str, str], frozenset[tuple[str, str]]]
    _caches: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]],
                 orient: Mapping[tuple[str, str], Iterable[tuple[str, str]]] | None = None):
        node_tuple = tuple(sorted(nodes))
        if len(set(node_tuple)) != len(node_tuple):
            raise GraphError("duplicate node names")
        known = set(node_tuple)
        edge_tuple = tuple(sorted({norm_edge(a, b) for a, b in edges}))
        for a, b in edge_tuple:
            if a not in known or b not in known:
                raise GraphError(f"edge ({a}, {b}) uses an unknown node")
        orient_map: dict[tuple[str, str], frozenset[tuple[str, str]]] = {e: frozenset() for e in edge_tuple}
        for e, pairs in (orient or {}).items():
            key = norm_edge(*e)
            if key not in orient_map:
                raise GraphError(f"orientation on a missing edge {key}")
            pair_set = frozenset(tuple(p) for p in pairs)
            for p in pair_set:
                if set(p) != set(key):
                    raise GraphError(f"orientation {p} does not match edge {key}")
            orient_map[key] = pair_set
        object.__setattr__(self, "nodes", node_tuple)
        object.__setattr__(self, "edges", edge_tuple)
        object.__setattr__(self, "orient", orient_map)
        object.__setattr__(self, "_caches", {})

    @cached_property
    def neighbors(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, set[str]] = {v: set() for v in self.nodes}
        for a, b in self.edges:
            out[a].add(b)
            out[b].add(a)
        return {v: tuple(sorted(ns)) for v, ns in out.items()}

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def adjacent(self, a: str, b: str) -> bool:
        return norm_edge(a, b) in self.orient if a != b else False

    def has_arrow(self, u: str, v: str) -> bool:
        """Whether the arc u -> v has been established."""
        e = norm_edge(u, v)
        return e in self.orient and (u, v) in self.orient[e]

    def is_doubly_oriented(self, a: str, b: str) -> bool:
        return len(self.orient[norm_edge(a, b)]) == 2

    def oriented_arcs(self) -> frozenset[tuple[str, str]]:
        return frozenset(p for pairs in self.orient.values() for p in pairs)

    def with_arrow(self, u: str, v: str) -> "Pog":
        e = norm_edge(u, v)
        if e not in self.orient:
            raise GraphError(f"no edge between {u} and {v}")
        new_orient = dict(self.orient)
        new_orient[e] = self.orient[e] | {(u, v)}
        return Pog(self.nodes, self.edges, new_orient)

    def _mask(self, names: Iterable[str]) -> int:
        idx = self._index
        m = 0
        for v in names:
            m |= 1 << idx[v]
        return m

    # -- serialization ----------------------------------------------

    def to_obj(self) -> dict:
        edges = []
        for a, b in self.edges:
            marks = sorted("ab" if p == (a, b) else "ba" for p in self.orient[(a, b)])
            edges.append({"a": a, "b": b, "orient": marks})
        return {"nodes": list(self.nodes), "edges": edges}

    @classmethod
    def from_obj(cls, obj: Mapping) -> "Pog":
        edges = []
        orient = {}
        for entry in obj.get("edges", ()):
            a, b = entry["a"], entry["b"]
            e = norm_edge(a, b)
            edges.append(e)
            pairs = []
            for mark in entry.get("orient", ()):
                if mark not in ("ab", "ba"):
                    raise GraphError(f"unknown orientation mark {mark!r}")
                pairs.append((a, b) if mark == "ab" else (b, a))
            orient[e] = pairs
        return cls(obj["nodes"], edges, orient)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for v in self.nodes:
            lines.append(f'  "{v}";')
        for a, b in self.edges:
            pairs = self.orient[(a, b)]
            if len(pairs) == 2:
                attr = " [dir=both]"
            elif (a, b) in pairs:
                attr = " [dir=forward]"
            elif (b, a) in pairs:
                attr = " [dir=back]"
            else:
                attr = ""
            lines.append(f'  "{a}" -- "{b}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AdjacentEdges:
    """How two edges sharing a node sit relative to each other."""

    outer1: str
    shared: str
    outer2: str
    bridged: bool
    into_shared_1: bool
    into_shared_2: bool
    out_of_shared_1: bool
    out_of_shared_2: bool


def classify_adjacent_edges(pog: Pog, a: str, b: str, c: str) -> AdjacentEdges:
    """Classify the edge pair ({a,b}, {b,c}): whether the outer
    endpoints are themselves adjacent (bridged) and which orientation
    marks point into or out of the shared node."""
    for x, y in ((a, b), (b, c)):
        if not pog.adjacent(x, y):
            raise GraphError(f"no edge between {x} and {y}")
    return AdjacentEdges(
        a, b, c,
        bridged=pog.adjacent(a, c),
        into_shared_1=pog.has_arrow(a, b),
        into_shared_2=pog.has_arrow(c, b),
        out_of_shared_1=pog.has_arrow(b, a),
        out_of_shared_2=pog.has_arrow(b, c),
    )


# -- separation in directed graphs ----------------------------------

def _validate_query(nodes: Iterable[str], j: str, k: str, l: Iterable[str]) -> tuple[str, ...]:
    known = set(nodes)
    cond = tuple(sorted(set(l)))
    for v in (j, k, *cond):
        if v not in known:
            raise GraphError(f"unknown node {v!r}")
    if j == k or j in cond or k in cond:
        raise GraphError("endpoints must be distinct and outside the conditioning set")
    return cond


def _dsep_search(dag: Dag, j: str, k: str, cond: tuple[str, ...]) -> bool:
    lset = set(cond)
    anl = set(cond)
    stack = list(cond)
    while stack:
        v = stack.pop()
        for p in dag.parents[v]:
            if p not in anl:
                anl.add(p)
                stack.append(p)
    # States pair a node with the arrival mode: True when the trail
    # entered along an arc pointing at the node.
    queue: deque[tuple[str, bool]] = deque()
    seen: set[tuple[str, bool]] = set()
    for c in dag.children[j]:
        queue.append((c, True))
    for p in dag.parents[j]:
        queue.append((p, False))
    while queue:
        v, arrived_head = queue.popleft()
        if (v, arrived_head) in seen:
            continue
        seen.add((v, arrived_head))
        if v == k:
            return False
        for w in dag.children[v]:
            # leaving along v -> w: v acts as a chain or fork node
            if v not in lset and (w, True) not in seen:
                queue.append((w, True))
        for w in dag.parents[v]:
            # leaving against w -> v: collider when we also arrived head-on
            passable = (v in anl) if arrived_head else (v not in lset)
            if passable and (w, False) not in seen:
                queue.append((w, False))
    return True


@dataclass(frozen=True)
class _TrailRecord:
    path: tuple[str, ...]
    noncollider_mask: int
    collider_masks: tuple[int, ...]

    def active(self, lmask: int) -> bool:
        if self.noncollider_mask & lmask:
            return False
        return all(m & lmask for m in self.collider_masks)


def _trail_records(dag: Dag, j: str, k: str) -> tuple[_TrailRecord, ...]:
    cache = dag._caches.setdefault("trails", {})
    key = (j, k)
    if key in cache:
        return cache[key]
    records: list[_TrailRecord] = []
    path = [j]
    onpath = {j}

    def descend(v: str) -> None:
        if v == k:
            tup = tuple(path)
            noncol = 0
            cols: list[int] = []
            for i in range(1, len(tup) - 1):
                into_prev = (tup[i - 1], tup[i]) in dag.arcs
                into_next = (tup[i + 1], tup[i]) in dag.arcs
                if into_prev and into_next:
                    cols.append(dag._desc_mask(tup[i]))
                else:
                    noncol |= 1 << dag._index[tup[i]]
            records.append(_TrailRecord(tup, noncol, tuple(cols)))
            return
        for w in dag.neighbors[v]:
            if w not in onpath:
                path.append(w)
                onpath.add(w)
                descend(w)
                path.pop()
                onpath.remove(w)

    descend(j)
    cache[key] = tuple(records)
    return cache[key]


def d_separated(dag: Dag, j: str, k: str, l: Iterable[str] = (), method: str = "search") -> bool:
    """Whether every trail between ``j`` and ``k`` is blocked by ``l``.

    ``method`` picks the reachability search or the exhaustive trail
    enumeration; both return the same verdict.
    """
    cond = _validate_query(dag.nodes, j, k, l)
    if method == "search":
        return _dsep_search(dag, j, k, cond)
    if method == "enumeration":
        lmask = dag._mask(cond)
        return not any(rec.active(lmask) for rec in _trail_records(dag, j, k))
    raise GraphError(f"unknown method {method!r}")


def find_active_trail(dag: Dag, j: str, k: str, l: Iterable[str] = ()) -> tuple[str, ...] | None:
    """A witness trail left active by ``l``, or None when separated."""
    cond = _validate_query(dag.nodes, j, k, l)
    lmask = dag._mask(cond)
    for rec in _trail_records(dag, j, k):
        if rec.active(lmask):
            return rec.path
    return None


def remove_outgoing(dag: Dag, sources: Iterable[str]) -> Dag:
    """Copy of the graph without the arcs leaving the given nodes."""
    drop = set(sources)
    for v in drop:
        if v not in dag._index:
            raise GraphError(f"unknown node {v!r}")
    return Dag(dag.nodes, [(u, v) for u, v in dag.arcs if u not in drop])


# -- separation in partially oriented graphs ------------------------

def p_descendants(pog: Pog, n: str) -> frozenset[str]:
    """Nodes that could still end up below ``n`` in some orientation.

    Reached by trails leaving ``n`` that never travel against an
    established arrow (doubly oriented edges block both ways), never
    take two consecutive links whose outer endpoints are adjacent, and
    do not end on a node already pointing back at ``n``.
    """
    if n not in pog._index:
        raise GraphError(f"unknown node {n!r}")
    cache = pog._caches.setdefault("pdesc", {})
    if n in cache:
        return cache[n]

    def passable(u: str, v: str) -> bool:
        return not pog.has_arrow(v, u)

    reached: set[str] = set()
    seen: set[tuple[str, str]] = set()
    queue: deque[tuple[str, str]] = deque()
    for w in pog.neighbors[n]:
        if passable(n, w):
            queue.append((n, w))
    while queue:
        prev, v = queue.popleft()
        if (prev, v) in seen:
            continue
        seen.add((prev, v))
        reached.add(v)
        for w in pog.neighbors[v]:
            if w == prev or pog.adjacent(prev, w):
                continue
            if passable(v, w) and (v, w) not in seen:
                queue.append((v, w))
    reached.discard(n)
    result = frozenset(v for v in reached if not pog.has_arrow(v, n))
    cache[n] = result
    return result


@dataclass(frozen=True)
class _WalkRecord:
    interior_mask: int
    collider_masks: tuple[int, ...]

    def active(self, lmask: int) -> bool:
        if self.interior_mask & lmask:
            return False
        return all(m & lmask for m in self.collider_masks)


def _pdesc_mask(pog: Pog, v: str) -> int:
    cache = pog._caches.setdefault("pdesc_mask", {})
    if v not in cache:
        cache[v] = pog._mask(p_descendants(pog, v) | {v})
    return cache[v]


def _walk_records(pog: Pog, j: str, k: str) -> tuple[_WalkRecord, ...]:
    cache = pog._caches.setdefault("walks", {})
    key = (j, k)
    if key in cache:
        return cache[key]
    found: set[tuple[int, tuple[int, ...]]] = set()
    path = [j]
    used: set[tuple[str, str]] = set()

    def classify() -> None:
        # each occurrence blocks on its own: a pass-through of a node in
        # l blocks even when the same node sits head-to-head elsewhere.
        # A meeting counts as head-to-head when some link arrives as an
        # established head and neither link is established outward; an
        # unoriented partner link may still be oriented inward by a
        # compatible dag, so its potential descendants decide.
        other = 0
        cols: set[int] = set()
        for i in range(1, len(path) - 1):
            v = path[i]
            p, n = path[i - 1], path[i + 1]
            heads = pog.has_arrow(p, v) or pog.has_arrow(n, v)
            tails = pog.has_arrow(v, p) or pog.has_arrow(v, n)
            if heads and not tails:
                cols.add(_pdesc_mask(pog, v))
            else:
                other |= 1 << pog._index[v]
        found.add((other, tuple(sorted(cols))))

    def descend(v: str) -> None:
        if v == k and len(path) > 1:
            classify()
        for w in pog.neighbors[v]:
            e = norm_edge(v, w)
            if e in used:
                continue
            used.add(e)
            path.append(w)
            descend(w)
            path.pop()
            used.remove(e)

    descend(j)
    records = tuple(_WalkRecord(om, cm) for om, cm in sorted(found))
    cache[key] = records
    return records


def pd_separated(pog: Pog, j: str, k: str, l: Iterable[str] = ()) -> bool:
    """Separation in a partially oriented graph.

    Trails revisit no edge.  A trail is active when every potential
    head-to-head occurrence on it is in ``l`` or keeps a potential
    descendant there, and every pass-through occurrence stays outside
    ``l``.  Separated means no active trail.
    """
    cond = _validate_query(pog.nodes, j, k, l)
    lmask = pog._mask(cond)
    return not any(rec.active(lmask) for rec in _walk_records(pog, j, k))
