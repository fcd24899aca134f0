"""Belief networks over directed graphs, datasets, and sampling.

A network attaches to each graph node a conditional mass assignment on
the node plus its parents; combining the conditionals in topological
order yields the joint assignment, which is validated eagerly.  Datasets
hold set-valued records (each cell a non-empty subset of a variable's
domain) and estimate a joint assignment by relative frequencies of the
induced product sets.
"""

from __future__ import annotations

import csv
import io
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import EvidenceError, NetworkError, SamplingError
from .evidence import MassAssignment, validate
from .frame import ConfigSet, Domain, Scope
from .graphs import Dag


@dataclass(frozen=True)
class Dataset:
    """Set-valued records over a scope.

    ``rows[i][j]`` is the sorted tuple of values observed for variable
    ``scope.names[j]`` in record ``i``; a cell listing the whole domain
    encodes total ignorance about that variable.
    """

    scope: Scope
    rows: tuple[tuple[tuple[str, ...], ...], ...]

    @classmethod
    def of(cls, scope: Scope, rows: Iterable[Sequence[Iterable[str]]]) -> "Dataset":
        packed = []
        for row in rows:
            cells = tuple(tuple(sorted(set(cell))) for cell in row)
            if len(cells) != len(scope.names):
                raise EvidenceError("record length does not match the scope")
            for name, cell in zip(scope.names, cells):
                domain = set(scope.domain(name).values)
                if not cell:
                    raise EvidenceError(f"empty cell for {name!r}")
                bad = set(cell) - domain
                if bad:
                    raise EvidenceError(f"unknown values {sorted(bad)} for {name!r}")
            packed.append(cells)
        return cls(scope, tuple(packed))

    def __len__(self) -> int:
        return len(self.rows)

    def config_set(self, i: int) -> ConfigSet:
        """The product set encoded by record ``i``."""
        labels = dict(zip(self.scope.names, self.rows[i]))
        return ConfigSet.product(self.scope, labels)

    def estimate(self) -> MassAssignment:
        """Relative-frequency mass assignment: each distinct record set
        gets mass count/n (exact rationals)."""
        if not self.rows:
            raise EvidenceError("cannot estimate from an empty dataset")
        counts: dict[ConfigSet, int] = {}
        for i in range(len(self.rows)):
            key = self.config_set(i)
            counts[key] = counts.get(key, 0) + 1
        n = len(self.rows)
        return validate(self.scope, {b: Fraction(c, n) for b, c in counts.items()})

    # -- CSV round trip ----------------------------------------------

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.scope.names)
        full = {name: tuple(self.scope.domain(name).values) for name in self.scope.names}
        for row in self.rows:
            rendered = []
            for name, cell in zip(self.scope.names, row):
                rendered.append("*" if set(cell) == set(full[name]) else "|".join(cell))
            writer.writerow(rendered)
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str | Iterable[str],
                 domains: Mapping[str, Sequence[str]] | Iterable[Domain] | None = None) -> "Dataset":
        """Parse records; with ``domains`` omitted, each variable's
        domain is the sorted union of its observed values (an error when
        a column holds nothing but ``*`` cells)."""
        lines = io.StringIO(text) if isinstance(text, str) else text
        reader = csv.reader(lines)
        try:
            header = next(reader)
        except StopIteration:
            raise EvidenceError("dataset is missing a header row") from None
        names = [h.strip() for h in header]
        if len(set(names)) != len(names) or not names:
            raise EvidenceError("dataset header must list distinct variable names")
        raw_rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(names):
                raise EvidenceError("record length does not match the header")
            raw_rows.append([cell.strip() for cell in row])
        if domains is not None:
            scope = Scope.of(domains if isinstance(domains, Mapping)
                             else {d.name: d.values for d in domains})
            if set(scope.names) != set(names):
                raise EvidenceError("provided domains do not match the header")
        else:
            observed: dict[str, set[str]] = {name: set() for name in names}
            for row in raw_rows:
                for name, cell in zip(names, row):
                    if cell != "*":
                        observed[name].update(v for v in cell.split("|") if v)
            missing = [name for name, vals in observed.items() if not vals]
            if missing:
                raise EvidenceError(
                    f"cannot infer domains for {missing}: only '*' cells present")
            scope = Scope.of({name: tuple(sorted(vals)) for name, vals in observed.items()})
        rows = []
        for row in raw_rows:
            cells = []
            for name, cell in zip(names, row):
                if cell == "*":
                    cells.append(scope.domain(name).values)
                else:
                    cells.append(tuple(v for v in cell.split("|") if v))
            rows.append([cells[names.index(n)] for n in scope.names])
        return cls.of(scope, rows)


@dataclass(frozen=True, eq=False)
class DsNetwork:
    """A directed graph with one conditional mass assignment per node,
    scoped on the node and its parents.  The joint assignment is built
    and checked at construction time."""

    dag: Dag
    conditionals: dict[str, MassAssignment]
    _joint: MassAssignment = field(init=False, repr=False)

    def __init__(self, dag: Dag, conditionals: Mapping[str, MassAssignment]):
        object.__setattr__(self, "dag", dag)
        object.__setattr__(self, "conditionals", dict(conditionals))
        if set(self.conditionals) != set(dag.nodes):
            raise NetworkError("conditionals must cover the graph nodes exactly")
        for v in dag.nodes:
            cond = self.conditionals[v]
            expected = tuple(sorted({v, *dag.parents[v]}))
            if cond.scope.names != expected:
                raise NetworkError(
                    f"conditional for {v!r} has scope {cond.scope.names}, "
                    f"expected {expected}")
            if cond.kind == "invalid":
                raise NetworkError(f"conditional for {v!r} is invalid")
        joint = None
        for v in dag.topological():
            factor = self.conditionals[v]
            joint = factor if joint is None else joint.combine(factor)
        if joint is None:
            raise NetworkError("network needs at least one node")
        if joint.kind != "proper":
            raise NetworkError("network joint assignment is not proper")
        object.__setattr__(self, "_joint", joint)

    @cached_property
    def scope(self) -> Scope:
        return self._joint.scope

    def joint_mass(self) -> MassAssignment:
        return self._joint

    def drop_terminal(self, v: str) -> "DsNetwork":
        """Remove a childless node together with its conditional."""
        if v not in self.conditionals:
            raise NetworkError(f"unknown node {v!r}")
        if self.dag.children[v]:
            raise NetworkError(f"{v!r} has children and cannot be dropped")
        dag = Dag([n for n in self.dag.nodes if n != v],
                  [a for a in self.dag.arcs if v not in a])
        conds = {n: c for n, c in self.conditionals.items() if n != v}
        return DsNetwork(dag, conds)

    # -- sampling ----------------------------------------------------

    def sample(self, n: int, seed: int = 0) -> Dataset:
        """Draw records from the joint assignment.

        Every focal set must be a product of per-variable sets, so a
        draw can be written as one set-valued record.  Record ``i`` is a
        pure function of ``(seed, i)``.
        """
        if n < 0:
            raise SamplingError("sample size must be non-negative")
        if n == 0:
            return Dataset(self.scope, ())
        joint = self._joint
        focal = list(joint.focal.items())
        rows_for: list[tuple[tuple[str, ...], ...]] = []
        for b, _ in focal:
            factors = b.factorize()
            if factors is None:
                raise SamplingError(
                    "a joint focal set is not a product of per-variable sets")
            rows_for.append(tuple(tuple(v for (v,) in f.members()) for f in factors))
        cumulative: list[float] = []
        acc = 0.0
        for _, v in focal:
            acc += float(v)
            cumulative.append(acc)
        rows = []
        for i in range(n):
            r = random.Random(hash((seed, i))).random()
            idx = min(bisect_right(cumulative, r * acc), len(focal) - 1)
            rows.append(rows_for[idx])
        return Dataset(self.scope, tuple(rows))

    # -- serialization ----------------------------------------------

    def to_obj(self) -> dict:
        return {
            "variables": [
                {"name": name, "domain": list(self.scope.domain(name).values)}
                for name in self.scope.names
            ],
            "nodes": [
                {
                    "var": v,
                    "parents": sorted(self.dag.parents[v]),
                    "conditional": self.conditionals[v].to_obj(),
                }
                for v in self.dag.nodes
            ],
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "DsNetwork":
        arcs = []
        conds = {}
        names = []
        for entry in obj["nodes"]:
            v = entry["var"]
            names.append(v)
            for p in entry.get("parents", ()):
                arcs.append((p, v))
            conds[v] = MassAssignment.from_obj(entry["conditional"])
        return cls(Dag(names, arcs), conds)


def example_network(shape: str, p: Fraction | float = Fraction(3, 10)) -> DsNetwork:
    """Three-variable reference networks over binary variables.

    ``chain`` and ``fork`` copy a root bit deterministically along their
    arcs; ``collider`` reads the middle variable as an equality gate on
    the two independent roots.  The endpoint weight ``p`` must stay away
    from one half for the collider's dependencies to be visible.
    """
    if not 0 < p < 1:
        raise NetworkError("root weight must lie strictly between 0 and 1")
    half = Fraction(1, 2) if isinstance(p, (int, Fraction)) else 0.5
    one = Fraction(1) if isinstance(p, (int, Fraction)) else 1.0
    doms = {name: ("v1", "v2") for name in ("X1", "X2", "X3")}

    def root(name: str) -> MassAssignment:
        s = Scope.of({name: doms[name]})
        return validate(s, {
            ConfigSet.of(s, [("v1",)]): p,
            ConfigSet.of(s, [("v2",)]): one - p,
        })

    def copy_link(src: str, dst: str) -> MassAssignment:
        s = Scope.of({src: doms[src], dst: doms[dst]})
        same = lambda v: ConfigSet.of(s, [{src: v, dst: v}])
        return validate(s, {same("v1"): half, same("v2"): half})

    if shape == "chain":
        dag = Dag(["X1", "X2", "X3"], [("X1", "X2"), ("X2", "X3")])
        conds = {"X1": root("X1"), "X2": copy_link("X1", "X2"),
                 "X3": copy_link("X2", "X3")}
    elif shape == "fork":
        dag = Dag(["X1", "X2", "X3"], [("X2", "X1"), ("X2", "X3")])
        conds = {"X2": root("X2"), "X1": copy_link("X2", "X1"),
                 "X3": copy_link("X2", "X3")}
    elif shape == "collider":
        dag = Dag(["X1", "X2", "X3"], [("X1", "X2"), ("X3", "X2")])
        s = Scope.of(doms)
        quarter = half * half
        gate = validate(s, {
            ConfigSet.of(s, [{"X1": a, "X3": b, "X2": "v1" if a == b else "v2"}]): quarter
            for a in ("v1", "v2") for b in ("v1", "v2")
        })
        conds = {"X1": root("X1"), "X3": root("X3"), "X2": gate}
    else:
        raise NetworkError(f"unknown example shape {shape!r}")
    return DsNetwork(dag, conds)
