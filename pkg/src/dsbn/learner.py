"""Structure learning: from independence queries to oriented graphs.

The pipeline removes edges whose endpoints are separable, orients the
unbridged triples that every separating set avoids, closes the
orientation under three propagation rules, reports structural failures
(an edge oriented both ways, an oriented cycle, or a collider at a
recorded non-collider), and finally enumerates the directed graphs
compatible with the surviving orientation marks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import GraphError
from .graphs import Dag, Pog, norm_edge
from .independence import AuditRecord, IndependenceOracle

RULES = ("away", "ancestral", "converge")


@dataclass(frozen=True)
class Skeleton:
    """Adjacency structure plus the first separating set found for each
    removed pair."""

    pog: Pog
    sepsets: dict[tuple[str, str], tuple[str, ...]]


@dataclass(frozen=True)
class ColliderLog:
    """Unbridged triples classified while orienting: (outer, shared,
    outer) with the outer nodes in sorted order."""

    colliders: tuple[tuple[str, str, str], ...]
    noncolliders: tuple[tuple[str, str, str], ...]


@dataclass(frozen=True)
class Failure:
    """A structural contradiction in the learned orientation."""

    kind: str
    detail: str
    witness: tuple[str, ...]

    def to_obj(self) -> dict:
        return {"kind": self.kind, "detail": self.detail, "witness": list(self.witness)}


@dataclass(frozen=True)
class LearnResult:
    pog: Pog
    dags: tuple[Dag, ...]
    failure: Failure | None
    audit: tuple[AuditRecord, ...]
    enumerated: bool

    def to_obj(self) -> dict:
        return {
            "pog": self.pog.to_obj(),
            "dags": [d.to_obj() for d in self.dags],
            "failure": self.failure.to_obj() if self.failure else None,
            "audit": [r.to_obj() for r in self.audit],
            "enumerated": self.enumerated,
        }


def _conditioning_sets(pool: Iterable[str], max_cond: int | None):
    """All subsets of the pool in canonical order: size first, then
    lexicographic within a size."""
    pool = sorted(pool)
    top = len(pool) if max_cond is None else min(max_cond, len(pool))
    for size in range(top + 1):
        yield from itertools.combinations(pool, size)


def build_skeleton(oracle: IndependenceOracle, variables: Iterable[str] | None = None,
                   max_cond: int | None = None) -> Skeleton:
    """Keep an edge exactly when no conditioning set separates its
    endpoints; remember the first separating set otherwise."""
    names = tuple(sorted(variables if variables is not None else oracle.variables))
    for v in names:
        if v not in oracle.variables:
            raise GraphError(f"unknown variable {v!r}")
    edges: list[tuple[str, str]] = []
    sepsets: dict[tuple[str, str], tuple[str, ...]] = {}
    for a, b in itertools.combinations(names, 2):
        rest = [v for v in names if v not in (a, b)]
        for cond in _conditioning_sets(rest, max_cond):
            if oracle.query(a, b, cond):
                sepsets[(a, b)] = cond
                break
        else:
            edges.append((a, b))
    return Skeleton(Pog(names, edges), sepsets)


def _unbridged_triples(pog: Pog):
    """Triples (i, j, k), i < k, with edges {i,j} and {j,k} but no edge
    {i,k}, in canonical scan order."""
    for j in pog.nodes:
        nbrs = pog.neighbors[j]
        for i, k in itertools.combinations(nbrs, 2):
            if not pog.adjacent(i, k):
                yield i, j, k


def orient_colliders(skeleton: Skeleton, oracle: IndependenceOracle,
                     max_cond: int | None = None) -> tuple[Pog, ColliderLog]:
    """Orient both edges of an unbridged triple into its centre when the
    centre cannot be part of any separating set.

    Exact oracles are asked directly: the triple is a collider when the
    outer pair stays dependent given every conditioning set containing
    the centre.  Statistical oracles reuse the recorded separating set:
    collider when the centre is missing from it.
    """
    pog = skeleton.pog
    colliders: list[tuple[str, str, str]] = []
    noncolliders: list[tuple[str, str, str]] = []
    for i, j, k in _unbridged_triples(pog):
        if oracle.is_exact:
            rest = [v for v in pog.nodes if v not in (i, k) and v != j]
            is_collider = True
            for cond in _conditioning_sets(rest, None if max_cond is None else max_cond - 1):
                if oracle.query(i, k, (j,) + cond):
                    is_collider = False
                    break
        else:
            sep = skeleton.sepsets.get((i, k) if i < k else (k, i))
            if sep is None:
                raise GraphError(f"no separating set recorded for ({i}, {k})")
            is_collider = j not in sep
        if is_collider:
            colliders.append((i, j, k))
            pog = pog.with_arrow(i, j).with_arrow(k, j)
        else:
            noncolliders.append((i, j, k))
    return pog, ColliderLog(tuple(colliders), tuple(noncolliders))


# -- propagation rules ----------------------------------------------

def _apply_away(pog: Pog, log: ColliderLog) -> tuple[Pog, bool]:
    # An arrow into the centre of an unbridged triple pushes on through
    # when the far edge is still unoriented.
    for i, j, k in _unbridged_triples(pog):
        for a, c in ((i, k), (k, i)):
            if pog.has_arrow(a, j) and not pog.orient[norm_edge(j, c)]:
                return pog.with_arrow(j, c), True
    return pog, False


def _apply_ancestral(pog: Pog, log: ColliderLog) -> tuple[Pog, bool]:
    # An unoriented edge whose far end is already reachable along
    # established arrows gets oriented the same way.
    arcs = pog.oriented_arcs()
    children: dict[str, set[str]] = {}
    for u, v in arcs:
        children.setdefault(u, set()).add(v)

    def reaches(a: str, b: str) -> bool:
        seen = {a}
        stack = [a]
        while stack:
            u = stack.pop()
            for w in children.get(u, ()):
                if w == b:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    for a, b in pog.edges:
        if pog.orient[(a, b)]:
            continue
        if reaches(a, b):
            return pog.with_arrow(a, b), True
        if reaches(b, a):
            return pog.with_arrow(b, a), True
    return pog, False


def _apply_converge(pog: Pog, log: ColliderLog) -> tuple[Pog, bool]:
    # A fourth node tied by unoriented edges to a recorded collider gets
    # its edge to the centre oriented inward.
    def unoriented(a: str, b: str) -> bool:
        return pog.adjacent(a, b) and not pog.orient[norm_edge(a, b)]

    for i, j, k in log.colliders:
        for l in pog.nodes:
            if l in (i, j, k) or not unoriented(l, j):
                continue
            alt1 = unoriented(i, l)
            alt2 = unoriented(k, l)
            alt3 = alt1 and alt2
            if alt1 or alt2 or alt3:
                return pog.with_arrow(l, j), True
    return pog, False


_RULE_FNS = {"away": _apply_away, "ancestral": _apply_ancestral, "converge": _apply_converge}


def propagate(pog: Pog, rule: str, log: ColliderLog) -> tuple[Pog, bool]:
    """Apply one orientation rule at the first place it fires, scanning
    in canonical order.  Returns the (possibly new) graph and whether
    anything changed."""
    try:
        fn = _RULE_FNS[rule]
    except KeyError:
        raise GraphError(f"unknown rule {rule!r}") from None
    return fn(pog, log)


def close_orientations(pog: Pog, log: ColliderLog, order: tuple[str, ...] = RULES) -> Pog:
    """Run the rules to a fixpoint, restarting from the first rule after
    every successful application."""
    changed = True
    while changed:
        changed = False
        for rule in order:
            pog, fired = propagate(pog, rule, log)
            if fired:
                changed = True
                break
    return pog


def detect_failure(pog: Pog, log: ColliderLog) -> Failure | None:
    """Structural contradictions, in order of precedence: an edge
    oriented both ways, a cycle among established arrows, or arrows
    meeting head-to-head at a recorded non-collider."""
    for a, b in pog.edges:
        if len(pog.orient[(a, b)]) == 2:
            return Failure("double-orientation",
                           f"edge {a} - {b} is oriented both ways", (a, b))
    arcs = pog.oriented_arcs()
    children: dict[str, set[str]] = {}
    for u, v in arcs:
        children.setdefault(u, set()).add(v)
    state: dict[str, int] = {}

    def cycle_from(v: str, trail: list[str]) -> tuple[str, ...] | None:
        state[v] = 1
        trail.append(v)
        for w in sorted(children.get(v, ())):
            if state.get(w, 0) == 1:
                return tuple(trail[trail.index(w):]) + (w,)
            if state.get(w, 0) == 0:
                hit = cycle_from(w, trail)
                if hit:
                    return hit
        trail.pop()
        state[v] = 2
        return None

    for v in pog.nodes:
        if state.get(v, 0) == 0:
            hit = cycle_from(v, [])
            if hit:
                return Failure("oriented-cycle",
                               "established arrows form the cycle " + " -> ".join(hit), hit)
    for i, j, k in log.noncolliders:
        if pog.has_arrow(i, j) and pog.has_arrow(k, j):
            return Failure("forbidden-collider",
                           f"arrows meet head-to-head at {j}, recorded as a non-collider",
                           (i, j, k))
    return None


def enumerate_dags(pog: Pog) -> tuple[Dag, ...]:
    """All directed acyclic graphs over the skeleton that respect every
    established arrow and create no collider at a node beyond those the
    orientation already shows.

    Built by repeatedly removing a node that can act as a sink: all its
    established arrows point inward and any pair of its edges with an
    unoriented member is bridged.  Removal orients the node's remaining
    edges inward; recursion over the rest collects full arc sets.
    """
    failure = detect_failure(pog, ColliderLog((), ()))
    if failure is not None:
        raise GraphError(f"orientation is inconsistent: {failure.detail}")
    memo: dict[frozenset, frozenset] = {}

    def solutions(remaining: frozenset) -> frozenset:
        live = [v for v in pog.nodes if v in remaining]
        if len(live) <= 1:
            return frozenset({frozenset()})
        if remaining in memo:
            return memo[remaining]
        out: set[frozenset] = set()
        for v in live:
            nbrs = [w for w in pog.neighbors[v] if w in remaining]
            if any(pog.has_arrow(v, w) for w in nbrs):
                continue
            blocked = False
            for a, b in itertools.combinations(nbrs, 2):
                loose = not pog.orient[norm_edge(v, a)] or not pog.orient[norm_edge(v, b)]
                if loose and not pog.adjacent(a, b):
                    blocked = True
                    break
            if blocked:
                continue
            inward = frozenset((w, v) for w in nbrs)
            for rest in solutions(remaining - {v}):
                out.add(rest | inward)
        memo[remaining] = frozenset(out)
        return memo[remaining]

    arc_sets = solutions(frozenset(pog.nodes))
    dags = [Dag(pog.nodes, arcs) for arcs in arc_sets]
    dags.sort(key=lambda d: tuple(sorted(d.arcs)))
    return tuple(dags)


def learn(oracle: IndependenceOracle, variables: Iterable[str] | None = None,
          max_cond: int | None = None, enumerate: bool = True) -> LearnResult:
    """Full pipeline: skeleton, colliders, orientation closure, failure
    check, and (absent failure) enumeration of the compatible graphs."""
    skeleton = build_skeleton(oracle, variables, max_cond)
    pog, log = orient_colliders(skeleton, oracle, max_cond)
    failure = detect_failure(pog, log)
    if failure is None:
        pog = close_orientations(pog, log)
        failure = detect_failure(pog, log)
    enumerated = failure is None and enumerate
    dags = enumerate_dags(pog) if enumerated else ()
    return LearnResult(pog, dags, failure, tuple(oracle.audit), enumerated)
