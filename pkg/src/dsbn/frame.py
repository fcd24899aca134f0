"""Finite configuration spaces and sets of configurations.

A Scope is an ordered collection of named variables, each ranging over a
finite Domain.  A configuration assigns one value to every variable in
the scope; the full configuration space is the cartesian product of the
domains.  A ConfigSet is a subset of that space, stored as a bitmask
over the mixed-radix enumeration of configurations, which keeps set
algebra, projection and cylinder extension cheap and canonical.

Variable order inside a scope is always the sorted order of the
variable names, so scopes built from the same variables in any order
compare equal and their configurations line up without translation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ScopeError

#: Largest configuration space a scope may enumerate.
MAX_CONFIGS = 1 << 24


def _iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``bits``, lowest first."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class Domain:
    """A named, ordered, non-empty collection of distinct values."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ScopeError(f"domain {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise ScopeError(f"domain {self.name!r} repeats a value")


@dataclass(frozen=True)
class Scope:
    """An ordered set of (variable name, Domain) pairs.

    The constructor sorts variables by name; that sorted order is the
    canonical order used for configuration encoding everywhere.
    """

    vars: tuple[tuple[str, Domain], ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted(self.vars, key=lambda p: p[0]))
        object.__setattr__(self, "vars", pairs)
        names = [name for name, _ in pairs]
        if len(set(names)) != len(names):
            raise ScopeError(f"scope repeats a variable: {names}")
        count = 1
        for _, dom in pairs:
            count *= len(dom.values)
            if count > MAX_CONFIGS:
                raise ScopeError(
                    f"scope enumerates more than {MAX_CONFIGS} configurations"
                )

    @classmethod
    def of(cls, domains: Mapping[str, Sequence[str]] | Iterable[Domain]) -> "Scope":
        """Build a scope from ``name -> values`` or from Domain objects."""
        if isinstance(domains, Mapping):
            pairs = tuple(
                (name, Domain(name, tuple(vals))) for name, vals in domains.items()
            )
        else:
            pairs = tuple((dom.name, dom) for dom in domains)
        return cls(pairs)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.vars)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, (name, _) in enumerate(self.vars)}

    @cached_property
    def _sizes(self) -> tuple[int, ...]:
        return tuple(len(dom.values) for _, dom in self.vars)

    @cached_property
    def config_count(self) -> int:
        count = 1
        for size in self._sizes:
            count *= size
        return count

    def __len__(self) -> int:
        return len(self.vars)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def domain(self, name: str) -> Domain:
        try:
            return self.vars[self._index[name]][1]
        except KeyError:
            raise ScopeError(f"unknown variable {name!r}") from None

    def encode(self, values: Sequence[str]) -> int:
        """Mixed-radix index of a configuration given in canonical order."""
        if len(values) != len(self.vars):
            raise ScopeError("configuration length does not match scope")
        idx = 0
        for (name, dom), value in zip(self.vars, values):
            try:
                digit = dom.values.index(value)
            except ValueError:
                raise ScopeError(f"value {value!r} not in domain of {name!r}") from None
            idx = idx * len(dom.values) + digit
        return idx

    def decode(self, idx: int) -> tuple[str, ...]:
        """Configuration at mixed-radix index ``idx``, canonical order."""
        out = [""] * len(self.vars)
        for pos in range(len(self.vars) - 1, -1, -1):
            dom = self.vars[pos][1]
            idx, digit = divmod(idx, len(dom.values))
            out[pos] = dom.values[digit]
        return tuple(out)

    def covers(self, other: "Scope") -> bool:
        """Whether every variable of ``other`` appears here with the
        same domain."""
        for name, dom in other.vars:
            if name not in self._index or self.domain(name) != dom:
                return False
        return True

    def restrict(self, names: Iterable[str]) -> "Scope":
        wanted = set(names)
        unknown = wanted - set(self.names)
        if unknown:
            raise ScopeError(f"unknown variables {sorted(unknown)}")
        return Scope(tuple(p for p in self.vars if p[0] in wanted))

    def union(self, other: "Scope") -> "Scope":
        merged = dict(self.vars)
        for name, dom in other.vars:
            if name in merged and merged[name] != dom:
                raise ScopeError(f"variable {name!r} has clashing domains")
            merged[name] = dom
        return Scope(tuple(merged.items()))

    def to_obj(self) -> list:
        return [{"name": name, "values": list(dom.values)} for name, dom in self.vars]

    @classmethod
    def from_obj(cls, obj: Sequence[Mapping]) -> "Scope":
        return cls.of({entry["name"]: tuple(entry["values"]) for entry in obj})


@dataclass(frozen=True)
class ConfigSet:
    """A subset of a scope's configuration space, held as a bitmask."""

    scope: Scope
    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.scope.config_count:
            raise ScopeError("bitmask does not fit the configuration space")

    @classmethod
    def empty(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, 0)

    @classmethod
    def full(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, (1 << scope.config_count) - 1)

    @classmethod
    def of(cls, scope: Scope, members: Iterable[Sequence[str] | Mapping[str, str]]) -> "ConfigSet":
        """Build from configurations given as value tuples (canonical
        order) or as name -> value mappings."""
        bits = 0
        for member in members:
            if isinstance(member, Mapping):
                member = tuple(member[name] for name in scope.names)
            bits |= 1 << scope.encode(member)
        return cls(scope, bits)

    @classmethod
    def product(cls, scope: Scope, labels: Mapping[str, Iterable[str]]) -> "ConfigSet":
        """Cartesian product of one value set per variable of the scope."""
        if set(labels) != set(scope.names):
            raise ScopeError("product labels must cover the scope exactly")
        per_var = [tuple(labels[name]) for name in scope.names]
        return cls.of(scope, product(*per_var))

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    @property
    def is_full(self) -> bool:
        return self.bits == (1 << self.scope.config_count) - 1

    def members(self) -> list[tuple[str, ...]]:
        """Member configurations as value tuples, in enumeration order."""
        return [self.scope.decode(i) for i in _iter_bits(self.bits)]

    def __iter__(self) -> Iterator[tuple[str, ...]]:
        return iter(self.members())

    def __le__(self, other: "ConfigSet") -> bool:
        self._check_same_scope(other)
        return self.bits & ~other.bits == 0

    def __lt__(self, other: "ConfigSet") -> bool:
        return self <= other and self.bits != other.bits

    def __and__(self, other: "ConfigSet") -> "ConfigSet":
        self._check_same_scope(other)
        return ConfigSet(self.scope, self.bits & other.bits)

    def __or__(self, other: "ConfigSet") -> "ConfigSet":
        self._check_same_scope(other)
        return ConfigSet(self.scope, self.bits | other.bits)

    def __sub__(self, other: "ConfigSet") -> "ConfigSet":
        self._check_same_scope(other)
        return ConfigSet(self.scope, self.bits & ~other.bits)

    def complement(self) -> "ConfigSet":
        return ConfigSet.full(self.scope) - self

    def _check_same_scope(self, other: "ConfigSet") -> None:
        if self.scope != other.scope:
            raise ScopeError("configuration sets live on different scopes")

    def project(self, sub: Scope | Iterable[str]) -> "ConfigSet":
        """Elementwise restriction of every member onto a sub-scope."""
        sub = sub if isinstance(sub, Scope) else self.scope.restrict(sub)
        if not self.scope.covers(sub):
            raise ScopeError("projection target is not a sub-scope")
        table = _projection_table(self.scope, sub)
        out = 0
        for i in _iter_bits(self.bits):
            out |= 1 << table[i]
        return ConfigSet(sub, out)

    def extend(self, sup: Scope) -> "ConfigSet":
        """Cylinder (empty) extension onto a superset scope: members
        combined with every configuration of the added variables."""
        if not sup.covers(self.scope):
            raise ScopeError("extension target is not a super-scope")
        if sup == self.scope:
            return ConfigSet(sup, self.bits)
        table = _projection_table(sup, self.scope)
        out = 0
        for idx, sub_idx in enumerate(table):
            if self.bits >> sub_idx & 1:
                out |= 1 << idx
        return ConfigSet(sup, out)

    def factorize(self) -> tuple["ConfigSet", ...] | None:
        """Per-variable factors when this set is exactly their product,
        else None.

        Membership in the product always holds, so the set factorizes
        precisely when its size matches the product of the projection
        sizes.
        """
        if self.is_empty:
            return None
        factors = tuple(
            self.project(self.scope.restrict([name])) for name in self.scope.names
        )
        count = 1
        for factor in factors:
            count *= factor.size
        return factors if count == self.size else None

    def to_obj(self) -> list | dict:
        """JSON form: a name -> values map when the set is a product,
        otherwise the explicit list of configurations."""
        factors = self.factorize()
        if factors is not None:
            return {
                name: [v for (v,) in factor.members()]
                for name, factor in zip(self.scope.names, factors)
            }
        return [dict(zip(self.scope.names, member)) for member in self.members()]

    @classmethod
    def from_obj(cls, scope: Scope, obj: list | dict) -> "ConfigSet":
        if isinstance(obj, Mapping):
            return cls.product(scope, obj)
        return cls.of(scope, obj)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        shown = ["".join(m) for m in self.members()[:6]]
        if self.size > 6:
            shown.append("...")
        return f"ConfigSet({'/'.join(self.scope.names)}: {{{', '.join(shown)}}})"


_projection_cache: dict[tuple, tuple[int, ...]] = {}


def _projection_table(scope: Scope, sub: Scope) -> tuple[int, ...]:
    """Map every configuration index of ``scope`` to the index of its
    restriction in ``sub``.  Cached per scope pair."""
    key = (scope, sub)
    table = _projection_cache.get(key)
    if table is None:
        positions = [scope._index[name] for name in sub.names]
        out = []
        for idx in range(scope.config_count):
            values = scope.decode(idx)
            out.append(sub.encode(tuple(values[p] for p in positions)))
        table = tuple(out)
        if len(_projection_cache) > 512:
            _projection_cache.clear()
        _projection_cache[key] = table
    return table


def intersection_closure(sets: Iterable[ConfigSet], cap: int = 20000) -> list[ConfigSet]:
    """Closure of a family under pairwise intersection, the empty set
    excluded.  Commonality values attain every distinct value they take
    anywhere on such a closure, which keeps validity and ratio checks
    over a whole powerset affordable."""
    pool = list(sets)
    if not pool:
        return []
    scope = pool[0].scope
    seen: set[int] = set()
    frontier = []
    for cs in pool:
        if cs.scope != scope:
            raise ScopeError("closure over mixed scopes")
        if cs.bits and cs.bits not in seen:
            seen.add(cs.bits)
            frontier.append(cs.bits)
    work = list(frontier)
    while work:
        current = work.pop()
        for other in list(seen):
            meet = current & other
            if meet and meet not in seen:
                seen.add(meet)
                work.append(meet)
                if len(seen) > cap:
                    raise ScopeError("intersection closure exceeded its cap")
    return [ConfigSet(scope, bits) for bits in sorted(seen)]
