"""Independence tests over mass assignments, and query oracles.

Two exact tests decide independence of variable blocks under a known
joint assignment; two statistical tests do the same from an estimated
assignment with a chi-square decision rule; a compressibility check
flags variables whose estimated marginal is close to vacuous.  The
oracle classes wrap these (or a graph, or an explicit relation) behind
a memoized ``query(j, k, l)`` interface with an audit trail.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DegenerateTestError, ScopeError, TestUndefinedError
from .evidence import TOL, MassAssignment, _invert_superset_sums
from .frame import ConfigSet, Scope, intersection_closure

REASON_EXACT = "exact"
REASON_BELOW = "below-critical"
REASON_ABOVE = "above-critical"
REASON_NEGATIVE = "negative-mass-rejection"
REASON_SUPPORT = "support-mismatch-rejection"
REASON_DEGENERATE = "degenerate"
REASON_UNDEFINED = "undefined"


@dataclass(frozen=True)
class TestOutcome:
    """Verdict of one independence test."""

    independent: bool
    statistic: float | None = None
    df: int | None = None
    alpha: float | None = None
    reason: str = REASON_EXACT

    def to_obj(self) -> dict:
        stat = self.statistic
        if stat is not None and math.isinf(stat):
            stat = "inf"
        return {
            "independent": self.independent,
            "statistic": stat,
            "df": self.df,
            "alpha": self.alpha,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class CompressionOutcome:
    """Confidence-interval verdict on how much mass a variable's
    marginal places below the full domain."""

    variable: str
    index: float
    lower: float
    upper: float
    threshold: float
    compressible: bool
    n: int
    alpha: float

    @property
    def independent(self) -> bool:
        return self.compressible

    def to_obj(self) -> dict:
        return {
            "variable": self.variable,
            "index": self.index,
            "lower": self.lower,
            "upper": self.upper,
            "threshold": self.threshold,
            "compressible": self.compressible,
            "n": self.n,
            "alpha": self.alpha,
        }


# -- chi-square critical values -------------------------------------

# Upper-tail quantiles for the usual significance levels, df 1..30.
_CHI2_TABLE: dict[int, tuple[float, float, float]] = {
    1: (2.705543454, 3.841458821, 6.634896601),
    2: (4.605170186, 5.991464547, 9.210340372),
    3: (6.251388631, 7.814727903, 11.344866730),
    4: (7.779440340, 9.487729037, 13.276704136),
    5: (9.236356900, 11.070497694, 15.086272469),
    6: (10.644640676, 12.591587244, 16.811893830),
    7: (12.017036624, 14.067140449, 18.475306907),
    8: (13.361566137, 15.507313056, 20.090235030),
    9: (14.683656573, 16.918977605, 21.665994333),
    10: (15.987179172, 18.307038053, 23.209251159),
    11: (17.275008518, 19.675137573, 24.724970311),
    12: (18.549347787, 21.026069817, 26.216967306),
    13: (19.811929307, 22.362032495, 27.688249610),
    14: (21.064144213, 23.684791305, 29.141237741),
    15: (22.307129582, 24.995790140, 30.577914167),
    16: (23.541828923, 26.296227605, 31.999926909),
    17: (24.769035344, 27.587111638, 33.408663605),
    18: (25.989423083, 28.869299430, 34.805305735),
    19: (27.203571029, 30.143527206, 36.190869129),
    20: (28.411980584, 31.410432844, 37.566234787),
    21: (29.615089436, 32.670573341, 38.932172684),
    22: (30.813282344, 33.924438471, 40.289360438),
    23: (32.006899682, 35.172461627, 41.638398119),
    24: (33.196244289, 36.415028502, 42.979820139),
    25: (34.381587018, 37.652484133, 44.314104896),
    26: (35.563171272, 38.885138660, 45.641682666),
    27: (36.741216748, 40.113272069, 46.962942125),
    28: (37.915922545, 41.337138151, 48.278235770),
    29: (39.087469771, 42.556967804, 49.587884473),
    30: (40.256023739, 43.772971826, 50.892181312),
}
_TABLE_ALPHAS = (0.10, 0.05, 0.01)

_NORMAL_QUANTILES = {
    0.90: 1.2815515655,
    0.95: 1.6448536270,
    0.975: 1.9599639845,
    0.99: 2.3263478740,
    0.995: 2.5758293035,
}


def _normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (Acklam's approximation plus one
    Halley refinement; common quantiles come from a frozen table)."""
    for key, z in _NORMAL_QUANTILES.items():
        if abs(p - key) <= 1e-12:
            return z
    if not 0.0 < p < 1.0:
        raise ValueError("quantile probability must lie in (0, 1)")
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
             / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
             / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
              / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def chi2_critical(df: int, alpha: float) -> float:
    """Upper-tail chi-square quantile: tabulated for df up to 30 at the
    usual levels, Wilson-Hilferty beyond."""
    if df < 1:
        raise DegenerateTestError("chi-square requires at least one degree of freedom")
    if not 0.0 < alpha < 1.0:
        raise ValueError("significance level must lie in (0, 1)")
    if df in _CHI2_TABLE:
        for idx, key in enumerate(_TABLE_ALPHAS):
            if abs(alpha - key) <= 1e-12:
                return _CHI2_TABLE[df][idx]
    z = _normal_quantile(1.0 - alpha)
    t = 2.0 / (9.0 * df)
    return df * (1.0 - t + z * math.sqrt(t)) ** 3


# -- block plumbing -------------------------------------------------

def _as_names(group: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(group, str):
        return (group,)
    return tuple(group)


def _block_scopes(m: MassAssignment, *groups: Iterable[str]) -> tuple[MassAssignment, list[Scope]]:
    """Marginalize ``m`` onto the union of the groups and return the
    per-group sub-scopes.  Groups must be disjoint and covered."""
    names = [_as_names(g) for g in groups]
    flat: list[str] = []
    for g in names:
        flat.extend(g)
    if len(set(flat)) != len(flat):
        raise ScopeError("variable blocks must be disjoint")
    union = m.scope.restrict(flat)
    mv = m.marginalize(union) if union != m.scope else m
    return mv, [mv.scope.restrict(g) for g in names if g]


def _grouped(mv: MassAssignment, s1: Scope, s2: Scope) -> dict[tuple[int, int], object]:
    pooled: dict[tuple[int, int], object] = {}
    for a, v in mv.focal.items():
        key = (a.project(s1).bits, a.project(s2).bits)
        pooled[key] = pooled.get(key, 0) + v
    return pooled


# -- exact tests -----------------------------------------------------

def exact_marginal_test(m: MassAssignment, g1: Iterable[str], g2: Iterable[str]) -> TestOutcome:
    """Decide whether the two blocks are independent under ``m``: the
    mass pooled over each pair of projections must equal the product of
    the marginal masses of that pair."""
    mv, (s1, s2) = _block_scopes(m, g1, g2)
    m1, m2 = mv.marginalize(s1), mv.marginalize(s2)
    pooled = _grouped(mv, s1, s2)
    exact = mv.exact
    keys = set(pooled)
    keys.update((b1.bits, b2.bits) for b1 in m1.focal for b2 in m2.focal)
    for k1, k2 in keys:
        got = pooled.get((k1, k2), 0)
        want = m1.value(ConfigSet(s1, k1)) * m2.value(ConfigSet(s2, k2))
        diff = got - want
        if (diff != 0) if exact else (abs(diff) > TOL):
            return TestOutcome(False, reason=REASON_EXACT)
    return TestOutcome(True, reason=REASON_EXACT)


def exact_conditional_test(m: MassAssignment, j: Iterable[str], k: Iterable[str], l: Iterable[str]) -> TestOutcome:
    """Decide whether blocks ``j`` and ``k`` are independent given ``l``
    under ``m``, via the multiplicative commonality identity
    ``q(A) * q_l(A) == q_jl(A) * q_kl(A)`` checked over the candidate
    lattice (which carries every value each side takes anywhere)."""
    l = _as_names(l)
    if not l:
        return exact_marginal_test(m, j, k)
    mv, _ = _block_scopes(m, j, k, l)
    jl = tuple(_as_names(j)) + l
    kl = tuple(_as_names(k)) + l
    m_jl = mv.marginalize(jl)
    m_kl = mv.marginalize(kl)
    m_l = mv.marginalize(l)
    full = ConfigSet.full(mv.scope)
    candidates = intersection_closure(
        list(mv.focal)
        + [b.extend(mv.scope) for part in (m_jl, m_kl, m_l) for b in part.focal]
        + [full]
    )
    exact = mv.exact
    for a in candidates:
        lhs = mv.commonality(a) * m_l.commonality(a.project(m_l.scope))
        rhs = m_jl.commonality(a.project(m_jl.scope)) * m_kl.commonality(a.project(m_kl.scope))
        diff = lhs - rhs
        if (diff != 0) if exact else (abs(diff) > TOL):
            return TestOutcome(False, reason=REASON_EXACT)
    return TestOutcome(True, reason=REASON_EXACT)


# -- statistical tests ----------------------------------------------

def chi2_marginal(m_hat: MassAssignment, n: int, g1: Iterable[str], g2: Iterable[str], alpha: float = 0.05) -> TestOutcome:
    """Chi-square test of block independence from an estimated
    assignment: compares pooled masses with marginal products over the
    support of the two marginals."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    mv, (s1, s2) = _block_scopes(m_hat, g1, g2)
    m1, m2 = mv.marginalize(s1), mv.marginalize(s2)
    df = (len(m1.focal) - 1) * (len(m2.focal) - 1)
    if df <= 0:
        raise DegenerateTestError("a marginal has a single focal set")
    pooled = _grouped(mv, s1, s2)
    acc = Fraction(0) if mv.exact else 0.0
    for b1, v1 in m1.focal.items():
        for b2, v2 in m2.focal.items():
            want = v1 * v2
            got = pooled.get((b1.bits, b2.bits), 0)
            acc += (got - want) ** 2 / want
    statistic = float(n * acc)
    critical = chi2_critical(df, alpha)
    independent = statistic <= critical
    return TestOutcome(independent, statistic, df, alpha,
                       REASON_BELOW if independent else REASON_ABOVE)


def chi2_conditional(m_hat: MassAssignment, n: int, x1: Iterable[str], x2: Iterable[str], x3: Iterable[str], alpha: float = 0.05) -> TestOutcome:
    """Chi-square test of ``x1`` independent of ``x3`` given ``x2``.

    Builds the closest conditionally independent target assignment by
    splicing the estimated marginals through their commonalities,
    inverts it on the candidate lattice, and measures the pooled
    squared deviation of the estimate from the target.  Targets with
    negative mass or with support missing an observed focal set refuse
    the hypothesis outright (infinite statistic).
    """
    if n <= 0:
        raise ValueError("sample size must be positive")
    x2 = _as_names(x2)
    if not x2:
        raise ScopeError("middle block must be non-empty; use chi2_marginal")
    mv, _ = _block_scopes(m_hat, x1, x2, x3)
    m12 = mv.marginalize(tuple(_as_names(x1)) + x2)
    m23 = mv.marginalize(x2 + tuple(_as_names(x3)))
    m2 = mv.marginalize(x2)
    df = (len(m12.focal) - 1) * (len(m23.focal) - 1)
    full = ConfigSet.full(mv.scope)
    candidates = intersection_closure(
        list(mv.focal)
        + [b.extend(mv.scope) for part in (m12, m23, m2) for b in part.focal]
        + [full]
    )
    exact = mv.exact
    zero = Fraction(0) if exact else 0.0
    target_q: dict[ConfigSet, object] = {}
    for a in candidates:
        num = m12.commonality(a.project(m12.scope)) * m23.commonality(a.project(m23.scope))
        den = m2.commonality(a.project(m2.scope))
        if (den == 0) if exact else (abs(den) <= TOL):
            if (num != 0) if exact else (abs(num) > TOL):
                raise TestUndefinedError("target commonality divides by zero")
            target_q[a] = zero
        else:
            target_q[a] = num / den
    raw = _invert_superset_sums(candidates, target_q, exact)
    total = sum(raw.values(), Fraction(0)) if exact else math.fsum(raw.values())
    if (total == 0) if exact else (abs(total) <= TOL):
        raise TestUndefinedError("target mass sums to zero")
    target = {a: v / total for a, v in raw.items()}
    negative = any((v < 0) if exact else (v < -TOL) for v in target.values())
    if negative:
        return TestOutcome(False, math.inf, df, alpha, REASON_NEGATIVE)
    for a, v in mv.focal.items():
        t = target.get(a, zero)
        if ((t == 0) if exact else (abs(t) <= TOL)) and v > 0:
            return TestOutcome(False, math.inf, df, alpha, REASON_SUPPORT)
    if df <= 0:
        raise DegenerateTestError("a spliced marginal has a single focal set")
    acc = Fraction(0) if exact else 0.0
    for a, t in target.items():
        if (t == 0) if exact else (abs(t) <= TOL):
            continue
        acc += (mv.value(a) - t) ** 2 / abs(t)
    statistic = float(n * acc)
    critical = chi2_critical(df, alpha)
    independent = statistic <= critical
    return TestOutcome(independent, statistic, df, alpha,
                       REASON_BELOW if independent else REASON_ABOVE)


def compressibility_index(m_hat: MassAssignment, var: str, n: int, alpha: float = 0.05, threshold: float = 0.01) -> CompressionOutcome:
    """Estimate how much of a variable's marginal mass falls below the
    full domain, with a normal-approximation confidence interval; the
    variable is compressible when the interval reaches the threshold."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    marg = m_hat.marginalize([var])
    index = float(1 - marg.value(ConfigSet.full(marg.scope)))
    z = _normal_quantile(1.0 - alpha / 2.0)
    half = z * math.sqrt(max(index * (1.0 - index), 0.0) / n)
    lower = max(0.0, index - half)
    upper = min(1.0, index + half)
    return CompressionOutcome(var, index, lower, upper, threshold,
                              lower <= threshold, n, alpha)


# -- oracles ---------------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    """One resolved oracle query."""

    j: str
    k: str
    l: tuple[str, ...]
    independent: bool
    statistic: float | None
    df: int | None
    reason: str

    def to_obj(self) -> dict:
        stat = self.statistic
        if stat is not None and math.isinf(stat):
            stat = "inf"
        return {
            "j": self.j,
            "k": self.k,
            "l": list(self.l),
            "independent": self.independent,
            "statistic": stat,
            "df": self.df,
            "reason": self.reason,
        }


class IndependenceOracle:
    """Base class: memoized, thread-safe independence queries with an
    audit trail of every test actually run."""

    #: Whether answers are exact (True) or statistical decisions.
    is_exact = True

    def __init__(self, variables: Iterable[str]):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ScopeError("oracle variables must be distinct")
        self._memo: dict[tuple, bool] = {}
        self._lock = threading.Lock()
        self.audit: list[AuditRecord] = []

    def query(self, j: str, k: str, l: Iterable[str] = ()) -> bool:
        """Is ``j`` independent of ``k`` given the set ``l``?"""
        cond = tuple(sorted(set(l)))
        for name in (j, k, *cond):
            if name not in self.variables:
                raise ScopeError(f"unknown variable {name!r}")
        if j == k or j in cond or k in cond:
            raise ScopeError("query variables must be distinct from the conditioning set")
        key = (min(j, k), max(j, k), cond)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        outcome = self._decide(j, k, cond)
        with self._lock:
            if key not in self._memo:
                self._memo[key] = outcome.independent
                self.audit.append(AuditRecord(
                    key[0], key[1], cond, outcome.independent,
                    outcome.statistic, outcome.df, outcome.reason,
                ))
            return self._memo[key]

    def _decide(self, j: str, k: str, l: tuple[str, ...]) -> TestOutcome:
        raise NotImplementedError


class DsepOracle(IndependenceOracle):
    """Answers queries by separation in a known directed graph."""

    is_exact = True

    def __init__(self, dag):
        super().__init__(dag.nodes)
        self.dag = dag

    def _decide(self, j: str, k: str, l: tuple[str, ...]) -> TestOutcome:
        from .graphs import d_separated

        return TestOutcome(d_separated(self.dag, j, k, l), reason=REASON_EXACT)


class ExactOracle(IndependenceOracle):
    """Answers queries by the exact conditional test on a known joint
    assignment."""

    is_exact = True

    def __init__(self, mass: MassAssignment):
        super().__init__(mass.scope.names)
        self.mass = mass

    def _decide(self, j: str, k: str, l: tuple[str, ...]) -> TestOutcome:
        return exact_conditional_test(self.mass, (j,), (k,), l)


class StatOracle(IndependenceOracle):
    """Answers queries by chi-square tests on an assignment estimated
    from data.  Degenerate or undefined tests count as independence:
    they arise when a marginal collapses to a single focal set, which
    carries no evidence of dependence."""

    is_exact = False

    def __init__(self, data, alpha: float = 0.05):
        super().__init__(data.scope.names)
        self.alpha = alpha
        self.n = len(data)
        self.m_hat = data.estimate()

    def _decide(self, j: str, k: str, l: tuple[str, ...]) -> TestOutcome:
        try:
            if l:
                return chi2_conditional(self.m_hat, self.n, (j,), l, (k,), self.alpha)
            return chi2_marginal(self.m_hat, self.n, (j,), (k,), self.alpha)
        except DegenerateTestError:
            return TestOutcome(True, None, None, self.alpha, REASON_DEGENERATE)
        except TestUndefinedError:
            return TestOutcome(True, None, None, self.alpha, REASON_UNDEFINED)


class RelationOracle(IndependenceOracle):
    """Answers queries from an explicit list of independence statements;
    anything not listed counts as dependent."""

    is_exact = True

    def __init__(self, variables: Iterable[str], statements: Iterable[tuple[str, str, Iterable[str]]]):
        super().__init__(variables)
        self.statements: set[tuple[str, str, frozenset[str]]] = set()
        for j, k, l in statements:
            a, b = sorted((j, k))
            self.statements.add((a, b, frozenset(l)))

    def _decide(self, j: str, k: str, l: tuple[str, ...]) -> TestOutcome:
        a, b = sorted((j, k))
        return TestOutcome((a, b, frozenset(l)) in self.statements, reason=REASON_EXACT)

    def to_obj(self) -> dict:
        return {
            "variables": list(self.variables),
            "independent": [
                {"j": j, "k": k, "l": sorted(l)}
                for j, k, l in sorted(self.statements, key=lambda s: (s[0], s[1], sorted(s[2])))
            ],
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "RelationOracle":
        statements = [
            (entry["j"], entry["k"], tuple(entry.get("l", ())))
            for entry in obj.get("independent", ())
        ]
        return cls(obj["variables"], statements)
