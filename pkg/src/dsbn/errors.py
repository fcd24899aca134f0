"""Exception types shared across the package.

Everything derives from DsbnError so callers can catch one base class;
the subclasses keep distinct failure modes distinguishable in tests and
at the command line.
"""


class DsbnError(ValueError):
    """Base class for all errors raised by this package."""


class ScopeError(DsbnError):
    """Variable sets do not line up: unknown names, clashing domains,
    non-subset projections, or overlapping scopes where disjoint ones
    are required."""


class EvidenceError(DsbnError):
    """A mass assignment is unusable for the requested operation
    (e.g. classified invalid, or mass on the empty set)."""


class CombinationError(DsbnError):
    """Dempster combination failed: the normalizer denominator is zero
    or negative (total or pathological conflict)."""


class ConditioningError(DsbnError):
    """No conditional exists, or the conditioning event carries no
    plausibility / belief as required by the chosen rule."""


class InversionError(DsbnError):
    """A function view could not be inverted back to a mass assignment
    (insufficient or inconsistent values)."""


class DegenerateTestError(DsbnError):
    """An independence test has zero degrees of freedom."""


class TestUndefinedError(DsbnError):
    """A test statistic cannot be formed (zero denominator inside the
    commonality ratio, or a degenerate reference mass)."""


class GraphError(DsbnError):
    """Malformed graph input: cycles in a dag, self loops, duplicate or
    unknown edges."""


class NetworkError(DsbnError):
    """A belief network failed validation."""


class SamplingError(DsbnError):
    """The joint mass cannot be sampled record-wise (a focal set does
    not factor into one label per variable)."""
