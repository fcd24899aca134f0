"""Mass assignments over configuration spaces and their calculus.

A mass assignment distributes weight over non-empty sets of
configurations.  Proper assignments carry positive weights summing to
one; signed assignments are also admitted as long as the absolute
weights sum to one and the induced commonality function stays
non-negative everywhere (the classification calls these ``pseudo``).
Signed assignments arise naturally as conditionals obtained by dividing
commonalities, and behave under combination exactly like proper ones.

Values may be :class:`fractions.Fraction` (exact mode) or floats
(compared within :data:`TOL`); operations preserve whichever kind they
are given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .errors import (
    CombinationError,
    ConditioningError,
    EvidenceError,
    InversionError,
    ScopeError,
)
from .frame import ConfigSet, Scope, intersection_closure

#: Absolute tolerance used for float-valued assignments.
TOL = 1e-9

#: Smallest admissible combination normalizer in float mode.
CONFLICT_FLOOR = 1e-12

PROPER = "proper"
PSEUDO = "pseudo"
INVALID = "invalid"

_VIEWS = ("belief", "plausibility", "commonality")


def _is_exact(values: Iterable) -> bool:
    return all(isinstance(v, Rational) for v in values)


def _sum(values: list, exact: bool):
    if exact:
        return sum(values, Fraction(0))
    return math.fsum(values)


def _sorted_sets(sets: Iterable[ConfigSet]) -> list[ConfigSet]:
    return sorted(sets, key=lambda cs: (cs.size, cs.bits))


@dataclass(frozen=True, eq=False)
class MassAssignment:
    """A sparse mass distribution over non-empty configuration sets.

    Instances are produced by :func:`validate`, which classifies them as
    ``proper``, ``pseudo`` or ``invalid``; the arithmetic operations
    refuse invalid inputs.
    """

    scope: Scope
    focal: dict[ConfigSet, object]
    kind: str

    # -- construction ------------------------------------------------

    @classmethod
    def of(cls, scope: Scope, focal: Mapping[ConfigSet, object]) -> "MassAssignment":
        return validate(scope, focal)

    @property
    def exact(self) -> bool:
        return _is_exact(self.focal.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MassAssignment):
            return NotImplemented
        return self.scope == other.scope and self.focal == other.focal

    def value(self, a: ConfigSet):
        zero = Fraction(0) if self.exact else 0.0
        return self.focal.get(a, zero)

    def _require_usable(self) -> None:
        if self.kind == INVALID:
            raise EvidenceError("operation on an invalid mass assignment")

    # -- the three set-function views --------------------------------

    def belief(self, a: ConfigSet):
        """Total mass committed to subsets of ``a``."""
        vals = [v for b, v in self.focal.items() if b.bits & ~a.bits == 0]
        return _sum(vals, self.exact)

    def plausibility(self, a: ConfigSet):
        """One minus the belief of the complement."""
        one = Fraction(1) if self.exact else 1.0
        return one - self.belief(a.complement())

    def commonality(self, a: ConfigSet):
        """Total mass on supersets of ``a`` (the whole total at ``a`` empty)."""
        vals = [v for b, v in self.focal.items() if a.bits & ~b.bits == 0]
        return _sum(vals, self.exact)

    def derive(self, view: str) -> "FunctionView":
        """Tabulate one of the three views over the candidate focal
        family, keeping this assignment as backing for lazy evaluation."""
        self._require_usable()
        if view not in _VIEWS:
            raise EvidenceError(f"unknown view {view!r}")
        support = tuple(_sorted_sets(self.focal))
        fn = getattr(self, view)
        table = {a: fn(a) for a in support}
        if view == "plausibility":
            for a in support:
                comp = a.complement()
                table.setdefault(comp, self.plausibility(comp))
        return FunctionView(self.scope, view, support, table, self)

    # -- combination and scope changes -------------------------------

    def extend_to(self, sup: Scope) -> "MassAssignment":
        """Cylinder extension: every focal set crossed with the full
        space of the added variables."""
        self._require_usable()
        if sup == self.scope:
            return self
        return validate(sup, {b.extend(sup): v for b, v in self.focal.items()})

    def marginalize(self, target: Scope | Iterable[str]) -> "MassAssignment":
        """Project every focal set onto a sub-scope, pooling masses of
        sets with a common projection."""
        self._require_usable()
        sub = target if isinstance(target, Scope) else self.scope.restrict(target)
        if not self.scope.covers(sub):
            raise ScopeError("marginal target is not a sub-scope")
        pooled: dict[ConfigSet, object] = {}
        for b, v in self.focal.items():
            key = b.project(sub)
            pooled[key] = pooled.get(key, 0) + v
        return _rescaled_if_signed(sub, pooled)

    def combine(self, other: "MassAssignment") -> "MassAssignment":
        """Dempster's rule, after extending both arguments onto the
        union of their scopes."""
        self._require_usable()
        other._require_usable()
        sup = self.scope.union(other.scope)
        a, b = self.extend_to(sup), other.extend_to(sup)
        exact = a.exact and b.exact
        pooled: dict[int, object] = {}
        for s1, v1 in a.focal.items():
            for s2, v2 in b.focal.items():
                meet = s1.bits & s2.bits
                if meet:
                    pooled[meet] = pooled.get(meet, 0) + v1 * v2
        denom = _sum(list(pooled.values()), exact)
        if (denom <= 0) if exact else (denom <= CONFLICT_FLOOR):
            raise CombinationError("combination normalizer is not positive")
        one = Fraction(1) if exact else 1.0
        c = one / denom
        focal = {ConfigSet(sup, bits): v * c for bits, v in pooled.items()}
        return _rescaled_if_signed(sup, focal)

    # -- conditioning -----------------------------------------------

    def condition(self, b: ConfigSet) -> "MassAssignment":
        """Dempster conditioning: combination with full certainty on ``b``."""
        self._require_usable()
        pl = self.plausibility(b)
        if (pl <= 0) if self.exact else (pl <= TOL):
            raise ConditioningError("conditioning event has no plausibility")
        return self.combine(simple_support(b, Fraction(1) if self.exact else 1.0))

    def condition_interval(self, a: ConfigSet, b: ConfigSet):
        """Lower/upper conditional pair obtained by conditioning every
        probability compatible with this assignment on ``b``."""
        self._require_usable()
        bel_b = self.belief(b)
        if (bel_b <= 0) if self.exact else (bel_b <= TOL):
            raise ConditioningError("conditioning event has no belief")
        a_in = a & b
        a_out = a.complement() & b
        lo_den = self.belief(a_in) + self.plausibility(a_out)
        hi_den = self.plausibility(a_in) + self.belief(a_out)
        if lo_den == 0 or hi_den == 0:
            raise ConditioningError("conditional interval denominators vanish")
        return self.belief(a_in) / lo_den, self.plausibility(a_in) / hi_den

    def condition_jeffrey(self, b: ConfigSet, p) -> "MassAssignment":
        """Partial conditioning: combination with a simple support
        assignment putting weight ``p`` on ``b``."""
        self._require_usable()
        return self.combine(simple_support(b, p))

    def conditional(self, on: Scope | Iterable[str]) -> "MassAssignment":
        """The factor that combines with this assignment's marginal on
        ``on`` to reproduce the assignment itself.

        Built by dividing the commonality by the extended commonality
        of the marginal and inverting the ratio back to masses.  The
        result is normalized so absolute masses sum to one; it may carry
        negative masses yet always keeps a non-negative commonality.
        """
        self._require_usable()
        sub = on if isinstance(on, Scope) else self.scope.restrict(on)
        marg = self.marginalize(sub)
        if marg.kind == INVALID:
            raise ConditioningError(
                "no conditional exists: the marginal is not a valid mass"
            )
        exact = self.exact
        zero = Fraction(0) if exact else 0.0
        cylinders = [b.extend(self.scope) for b in marg.focal]
        candidates = intersection_closure(
            list(self.focal) + cylinders + [ConfigSet.full(self.scope)]
        )
        ratio: dict[ConfigSet, object] = {}
        for a in candidates:
            num = self.commonality(a)
            den = marg.commonality(a.project(sub))
            if (den == 0) if exact else (abs(den) <= TOL):
                if (num != 0) if exact else (abs(num) > TOL):
                    raise ConditioningError(
                        "no conditional exists: commonality survives where "
                        "the marginal's vanishes"
                    )
                ratio[a] = zero
            else:
                ratio[a] = num / den
        masses = _invert_superset_sums(candidates, ratio, exact)
        result = _rescaled_if_signed(self.scope, masses, force=True)
        if result.kind == INVALID:
            raise ConditioningError("conditional failed to validate")
        try:
            check = marg.combine(result)
        except CombinationError as exc:
            raise ConditioningError(f"no conditional exists: {exc}") from exc
        if not check.allclose(self.canonical(), tol=1e-7):
            raise ConditioningError(
                "no conditional exists: combining with the marginal does "
                "not reproduce the assignment"
            )
        return result

    # -- comparison helpers ------------------------------------------

    def canonical(self) -> "MassAssignment":
        """Rescale so absolute masses sum to one (identity for proper)."""
        total = _sum([abs(v) for v in self.focal.values()], self.exact)
        if total == 0:
            raise EvidenceError("cannot normalize an empty assignment")
        return validate(self.scope, {b: v / total for b, v in self.focal.items()})

    def allclose(self, other: "MassAssignment", tol: float = TOL) -> bool:
        if self.scope != other.scope:
            return False
        exact = self.exact and other.exact
        for key in set(self.focal) | set(other.focal):
            diff = self.value(key) - other.value(key)
            if (diff != 0) if exact else (abs(diff) > tol):
                return False
        return True

    # -- serialization ----------------------------------------------

    def to_obj(self) -> dict:
        return {
            "scope": self.scope.to_obj(),
            "focal": [
                {"set": b.to_obj(), "mass": _encode_value(v)}
                for b, v in self.focal.items()
            ],
            "kind": self.kind,
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "MassAssignment":
        scope = Scope.from_obj(obj["scope"])
        focal = {
            ConfigSet.from_obj(scope, entry["set"]): _decode_value(entry["mass"])
            for entry in obj["focal"]
        }
        return validate(scope, focal)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = ", ".join(
            f"{{{','.join(''.join(m) for m in b.members())}}}:{v}"
            for b, v in self.focal.items()
        )
        return f"MassAssignment[{self.kind}]({parts})"


def _encode_value(v) -> object:
    if isinstance(v, Rational) and not isinstance(v, float):
        return str(Fraction(v))
    return float(v)


def _decode_value(v) -> object:
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


def validate(scope: Scope, focal: Mapping[ConfigSet, object]) -> "MassAssignment":
    """Classify a raw focal mapping as proper, pseudo or invalid.

    Zero entries are dropped.  Proper: positive masses summing to one.
    Pseudo: absolute masses sum to one, nothing on the empty set, and
    the commonality is non-negative on the intersection closure of the
    focal family (which carries every value it takes anywhere).
    """
    entries: dict[ConfigSet, object] = {}
    empty_mass = False
    for b, v in focal.items():
        if b.scope != scope:
            raise ScopeError("focal set does not live on the assignment's scope")
        if v == 0:
            continue
        if b.is_empty:
            empty_mass = True
        entries[b] = v
    entries = dict(sorted(entries.items(), key=lambda kv: (kv[0].size, kv[0].bits)))
    exact = _is_exact(entries.values())
    kind = INVALID
    if entries and not empty_mass:
        values = list(entries.values())
        total = _sum(values, exact)
        absolute = _sum([abs(v) for v in values], exact)
        one = Fraction(1) if exact else 1.0
        if all(v > 0 for v in values) and _near(total, one, exact):
            kind = PROPER
        elif _near(absolute, one, exact) and _nonneg(total, exact):
            mass = MassAssignment(scope, entries, PSEUDO)
            lattice = intersection_closure(list(entries))
            if all(_nonneg(mass.commonality(a), exact) for a in lattice):
                kind = PSEUDO
    return MassAssignment(scope, entries, kind)


def _near(value, target, exact: bool) -> bool:
    return value == target if exact else abs(value - target) <= TOL


def _nonneg(value, exact: bool) -> bool:
    return value >= 0 if exact else value >= -TOL


def _rescaled_if_signed(scope: Scope, focal: Mapping[ConfigSet, object], force: bool = False) -> MassAssignment:
    """Validate, first rescaling absolute masses to one whenever
    negative entries are present (combination and reconstruction are
    insensitive to positive rescaling, and the signed convention demands
    a unit absolute sum)."""
    entries = {b: v for b, v in focal.items() if v != 0}
    if (force or any(v < 0 for v in entries.values())) and entries:
        exact = _is_exact(entries.values())
        total = _sum([abs(v) for v in entries.values()], exact)
        if total > 0:
            entries = {b: v / total for b, v in entries.items()}
    return validate(scope, entries)


def simple_support(b: ConfigSet, p) -> MassAssignment:
    """Mass ``p`` on ``b`` and the rest on the full space."""
    if p < 0 or p > 1:
        raise EvidenceError("support weight must lie in [0, 1]")
    if b.is_empty:
        raise EvidenceError("support set must be non-empty")
    full = ConfigSet.full(b.scope)
    one = Fraction(1) if isinstance(p, Rational) else 1.0
    focal: dict[ConfigSet, object] = {}
    for key, v in ((b, p), (full, one - p)):
        focal[key] = focal.get(key, 0) + v
    return validate(b.scope, focal)


def _invert_superset_sums(candidates: list[ConfigSet], values: Mapping[ConfigSet, object], exact: bool) -> dict[ConfigSet, object]:
    """Solve ``value(A) = sum of m(B) over candidate supersets B of A``
    for ``m``, processing candidates from largest to smallest.  Exact
    because any function of the candidate family's containment patterns
    has its inverse supported on that family."""
    masses: dict[ConfigSet, object] = {}
    for a in sorted(candidates, key=lambda cs: (-cs.size, cs.bits)):
        acc = values[a]
        for b, m in masses.items():
            if a.bits & ~b.bits == 0 and a.bits != b.bits:
                acc = acc - m
        if (acc != 0) if exact else (abs(acc) > TOL):
            masses[a] = acc
    return masses


@dataclass(frozen=True, eq=False)
class FunctionView:
    """One of the three set-function views of a mass assignment,
    tabulated on the candidate focal family.

    When derived from a mass assignment the view keeps it as backing,
    so values at arbitrary sets stay available; views built from raw
    tables answer only at tabulated sets.
    """

    scope: Scope
    view: str
    support: tuple[ConfigSet, ...]
    table: dict[ConfigSet, object]
    _backing: MassAssignment | None = field(default=None, repr=False)

    @classmethod
    def from_table(cls, scope: Scope, view: str, support: Iterable[ConfigSet], table: Mapping[ConfigSet, object]) -> "FunctionView":
        if view not in _VIEWS:
            raise EvidenceError(f"unknown view {view!r}")
        return cls(scope, view, tuple(_sorted_sets(support)), dict(table), None)

    @property
    def exact(self) -> bool:
        return _is_exact(self.table.values())

    def value_at(self, a: ConfigSet):
        if a in self.table:
            return self.table[a]
        if self._backing is not None:
            return getattr(self._backing, self.view)(a)
        raise InversionError(f"view has no value at {a!r}")

    def invert(self) -> MassAssignment:
        """Recover the mass assignment this view came from.

        Belief inverts bottom-up over the support, commonality top-down,
        and plausibility through its complement relation with belief.
        The result is checked against the tabulated values.
        """
        exact = self.exact
        if self.view == "commonality":
            masses = _invert_superset_sums(list(self.support), {a: self.value_at(a) for a in self.support}, exact)
        else:
            one = Fraction(1) if exact else 1.0
            if self.view == "plausibility":
                def bel(a: ConfigSet):
                    return one - self.value_at(a.complement())
            else:
                bel = self.value_at
            masses = {}
            for a in sorted(self.support, key=lambda cs: (cs.size, cs.bits)):
                acc = bel(a)
                for b, m in masses.items():
                    if b.bits & ~a.bits == 0 and a.bits != b.bits:
                        acc = acc - m
                if (acc != 0) if exact else (abs(acc) > TOL):
                    masses[a] = acc
        result = validate(self.scope, masses)
        if result.kind == INVALID:
            raise InversionError("view values are not consistent with any mass")
        derived = result.derive(self.view)
        for a, expected in self.table.items():
            got = derived.value_at(a)
            diff = got - expected
            if (diff != 0) if exact and derived.exact else (abs(diff) > TOL):
                raise InversionError("view values are not consistent with any mass")
        return result
