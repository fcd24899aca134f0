"""Seeded generators shared across the test modules.

Every generator takes an explicit ``random.Random`` so a failing case
reproduces from the seed alone.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from dsbn import ConfigSet, Dag, MassAssignment, Pog, Scope
from dsbn.graphs import norm_edge

POOLS = (("a", "b"), ("a", "b", "c"))


def random_scope(rng: random.Random, max_vars: int = 3,
                 min_vars: int = 1) -> Scope:
    n = rng.randint(min_vars, max_vars)
    return Scope.of({f"X{i + 1}": rng.choice(POOLS) for i in range(n)})


def random_subsets(rng: random.Random, scope: Scope,
                   count: int) -> list[ConfigSet]:
    """Distinct nonempty configuration sets; count is capped by the
    number available."""
    full = (1 << scope.config_count) - 1
    count = min(count, full)
    out: set[int] = set()
    while len(out) < count:
        bits = rng.getrandbits(scope.config_count) & full
        if bits:
            out.add(bits)
    return [ConfigSet(scope, b) for b in out]


def random_proper_mass(rng: random.Random, scope: Scope | None = None,
                       exact: bool = True) -> MassAssignment:
    if scope is None:
        scope = random_scope(rng)
    sets = random_subsets(rng, scope, rng.randint(1, 5))
    weights = [rng.randint(1, 9) for _ in sets]
    total = sum(weights)
    if exact:
        focal = {a: Fraction(w, total) for a, w in zip(sets, weights)}
    else:
        vals = [w / total for w in weights]
        vals[-1] = 1.0 - sum(vals[:-1])
        focal = dict(zip(sets, vals))
    mass = MassAssignment.of(scope, focal)
    assert mass.kind == "proper", mass
    return mass


def random_pseudo_mass(rng: random.Random, scope: Scope | None = None,
                       exact: bool = True) -> MassAssignment:
    """A valid mass with at least one negative entry.

    Rejection-samples signed weights; positive-only draws get one sign
    flipped so the result can never classify as proper.
    """
    for _ in range(400):
        sc = scope if scope is not None else random_scope(rng)
        sets = random_subsets(rng, sc, rng.randint(2, 5))
        weights = [rng.choice([-3, -2, -1, 1, 2, 3, 4, 5, 6]) for _ in sets]
        if all(w > 0 for w in weights):
            weights[0] = -weights[0]
        total = sum(abs(w) for w in weights)
        if exact:
            focal = {a: Fraction(w, total) for a, w in zip(sets, weights)}
        else:
            focal = {a: w / total for a, w in zip(sets, weights)}
        mass = MassAssignment.of(sc, focal)
        if mass.kind == "pseudo":
            return mass
    # large frames rarely pass rejection; fall back to a nested chain
    # a1 ⊂ a2 ⊂ full with weights (+a, -b, +c), c ≥ b, which always
    # keeps the commonality nonnegative on the closure.
    sc = scope if scope is not None else random_scope(rng)
    full = (1 << sc.config_count) - 1
    while True:
        a2 = rng.randint(1, full - 1)
        if bin(a2).count("1") >= 2:
            break
    while True:
        a1 = a2 & rng.randint(1, full)
        if a1 and a1 != a2:
            break
    a, b = rng.randint(1, 6), rng.randint(1, 3)
    c = rng.randint(b, b + 5)
    total = a + b + c
    table = {ConfigSet(sc, a1): Fraction(a, total),
             ConfigSet(sc, a2): Fraction(-b, total),
             ConfigSet.full(sc): Fraction(c, total)}
    if not exact:
        table = {k: float(v) for k, v in table.items()}
    mass = MassAssignment.of(sc, table)
    assert mass.kind == "pseudo", mass
    return mass


def overlapping_scopes(rng: random.Random,
                       max_vars: int = 3) -> tuple[Scope, Scope]:
    """Two scopes drawn from one variable pool, guaranteed compatible
    on shared names and with a nonempty union."""
    base = random_scope(rng, max_vars=max_vars, min_vars=2)
    names = list(base.names)
    g = sorted(rng.sample(names, rng.randint(1, len(names))))
    h = sorted(rng.sample(names, rng.randint(1, len(names))))
    return base.restrict(g), base.restrict(h)


def random_dag(rng: random.Random, max_nodes: int = 8,
               edge_prob: float = 0.35, min_nodes: int = 2) -> Dag:
    n = rng.randint(min_nodes, max_nodes)
    nodes = [f"X{i}" for i in range(n)]
    arcs = [(nodes[i], nodes[j])
            for i in range(n) for j in range(i + 1, n)
            if rng.random() < edge_prob]
    return Dag(nodes, arcs)


def as_pog(dag: Dag) -> Pog:
    """The fully oriented pog carrying exactly the dag's arrows."""
    edges = [norm_edge(u, v) for u, v in dag.arcs]
    orient = {norm_edge(u, v): frozenset({(u, v)}) for u, v in dag.arcs}
    return Pog(dag.nodes, edges, orient)


def singleton_queries(nodes):
    """Every (j, k, l) with singleton endpoints and l over the rest."""
    for j, k in itertools.combinations(nodes, 2):
        rest = [v for v in nodes if v not in (j, k)]
        for r in range(len(rest) + 1):
            for l in itertools.combinations(rest, r):
                yield j, k, l


def tv_distance(m1: MassAssignment, m2: MassAssignment) -> float:
    """Total variation between two masses on a common scope."""
    assert m1.scope == m2.scope
    keys = {a.bits for a in m1.focal} | {a.bits for a in m2.focal}
    gap = 0.0
    for bits in keys:
        a = ConfigSet(m1.scope, bits)
        gap += abs(float(m1.value(a)) - float(m2.value(a)))
    return gap / 2.0
