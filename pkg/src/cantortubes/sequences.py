"""Derivation and validation of the scale sequences driving the construction.

Three interlocked sequences are produced in exact dyadic-rational arithmetic:

* ``Delta``  -- per-level rectangle heights (powers of two),
* ``delta``  -- per-level rectangle widths (powers of two times ``c``),
* ``theta``  -- per-level rotation steps, ``theta[n+1] = c * Delta[n+1] * delta[n]``.

The widths follow a per-level exponent schedule ``s_n`` targeting a chosen
box-dimension ``s`` of the horizontal projection.  All rounding is downward
onto the dyadic grid, which preserves every one-sided constraint exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import (
    ceil_frac,
    dyadic_to_json,
    floor_log2,
    is_dyadic,
    is_pow2_reciprocal,
    pow2,
    short_repr,
)
from .errors import DepthUnreachableError

#: Exponents larger than this make downstream extended-precision work
#: impractically slow; the derivation refuses to cross it.
DEFAULT_MAX_EXPONENT = 200_000

PROFILES = ("strict", "demo")


@dataclass(frozen=True)
class DimensionSchedule:
    """Target dimension s in [0,1] and the per-level exponents s_1..s_N."""

    s: Fraction
    s_n: tuple[Fraction, ...]

    @property
    def depth(self) -> int:
        return len(self.s_n)

    def exponent(self, n: int) -> Fraction:
        """s_n, 1-based."""
        return self.s_n[n - 1]

    def to_json(self) -> dict:
        return {"s": str(self.s), "s_n": [str(x) for x in self.s_n]}


def build_schedule(s, depth: int) -> DimensionSchedule:
    """Per-level width exponents: s_n = 1/n when s == 0, else s*n/(n+1)."""
    s = Fraction(s)
    if not 0 <= s <= 1:
        raise ValueError(f"target dimension must lie in [0, 1], got {s}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if s == 0:
        exps = tuple(Fraction(1, n) for n in range(1, depth + 1))
    else:
        exps = tuple(s * n / (n + 1) for n in range(1, depth + 1))
    return DimensionSchedule(s=s, s_n=exps)


@dataclass(frozen=True)
class SequenceTable:
    """Validated scale sequences plus the constants used by every check.

    Entries are 1-based through the ``delta_``/``Delta_``/``theta_``
    accessors; the underlying tuples are 0-based.
    """

    c: Fraction
    depth: int
    delta: tuple[Fraction, ...]
    Delta: tuple[Fraction, ...]
    theta: tuple[Fraction, ...]
    c1: Fraction
    C_tube: Fraction
    profile: str
    schedule: DimensionSchedule

    @property
    def c2(self) -> Fraction:
        return 4 * self.c * (self.c1 + 1)

    def delta_(self, n: int) -> Fraction:
        """Width delta_n, 1-based; delta_0 := 1 by convention (used by the
        n = 1 instance of the child-count sandwich)."""
        if n == 0:
            return Fraction(1)
        return self.delta[n - 1]

    def Delta_(self, n: int) -> Fraction:
        return self.Delta[n - 1]

    def theta_(self, n: int) -> Fraction:
        return self.theta[n - 1]

    def p2_exponent(self, n: int) -> int:
        """Exponent in the height recursion Delta_{n+1} <= c*delta_n**e."""
        return n + 1 if self.profile == "strict" else 2

    def min_scale_bits(self) -> int:
        """Bits needed to resolve the finest scale in the table."""
        return -floor_log2(self.theta[-1])

    def to_json(self) -> dict:
        return {
            "profile": self.profile,
            "depth": self.depth,
            "c": dyadic_to_json(self.c),
            "c1": str(self.c1),
            "c2": str(self.c2),
            "C_tube": str(self.C_tube),
            "schedule": self.schedule.to_json(),
            "delta": [dyadic_to_json(x) for x in self.delta],
            "Delta": [dyadic_to_json(x) for x in self.Delta],
            "theta": [dyadic_to_json(x) for x in self.theta],
        }


def derive_sequences(
    schedule: DimensionSchedule,
    c,
    profile: str = "strict",
    c1=Fraction(2),
    C_tube=Fraction(16),
    max_exponent: int = DEFAULT_MAX_EXPONENT,
) -> SequenceTable:
    """Greedily derive the largest dyadic sequences satisfying every bound.

    Heights: Delta_{n+1} is the largest power of two <= c*delta_n**e with
    e = n+1 (strict) or e = 2 (demo).  Widths: delta_{n+1} is the largest
    power of two times c satisfying both delta_{n+1} <= c*Delta_{n+1}**(1/s_{n+1})
    and delta_{n+1} <= c*Delta_{n+1}*delta_n.  The demo profile trades the
    theorem's constants for shallow growth so deeper levels stay tractable;
    structural and spacing properties are unaffected.

    Raises DepthUnreachableError when an exponent would exceed
    ``max_exponent`` bits, reporting the deepest achievable level.
    """
    c = Fraction(c)
    c1 = Fraction(c1)
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}, got {profile!r}")
    if not 0 < c < Fraction(1, 10):
        raise ValueError(f"c must lie in (0, 1/10), got {c}")
    if not is_pow2_reciprocal(c):
        # A general dyadic c breaks the integrality of theta_2/theta_3 and of
        # the level-2 grid ratio: the odd part of 1/c never cancels.
        raise ValueError(f"c must be a reciprocal power of two, got {c}")
    c2 = 4 * c * (c1 + 1)
    if not c * (1 + c2) < 1:
        raise ValueError(f"constant constraint c*(1+4c(c1+1)) < 1 fails for c={c}, c1={c1}")
    if not 3 * c * c1 < Fraction(1, 2):
        raise ValueError(f"constant constraint 3*c*c1 < 1/2 fails for c={c}, c1={c1}")

    depth = schedule.depth
    one = Fraction(1)
    delta = [one]
    Delta = [one]
    theta = [c]

    for n in range(1, depth):
        # Height: largest power of two below the profile bound.
        e = n + 1 if profile == "strict" else 2
        bound = c * delta[n - 1] ** e
        a = -floor_log2(bound)
        if a > max_exponent:
            raise DepthUnreachableError(requested=depth, max_depth=n)
        Delta_next = pow2(-a)
        theta_next = c * Delta_next * delta[n - 1]

        # Width: delta_{n+1} = c * 2**-m, m = max of the two requirements.
        inv_s = 1 / schedule.exponent(n + 1)
        m_schedule = ceil_frac(a * inv_s)  # c*2**-m <= c*(2**-a)**(1/s)
        m_product = -floor_log2(Delta_next * delta[n - 1])  # (P3) bound
        m = max(m_schedule, m_product, 0)
        if m > max_exponent:
            raise DepthUnreachableError(requested=depth, max_depth=n)
        delta_next = c * pow2(-m)

        delta.append(delta_next)
        Delta.append(Delta_next)
        theta.append(theta_next)

    table = SequenceTable(
        c=c,
        depth=depth,
        delta=tuple(delta),
        Delta=tuple(Delta),
        theta=tuple(theta),
        c1=c1,
        C_tube=Fraction(C_tube),
        profile=profile,
        schedule=schedule,
    )
    report = validate_sequences(table)
    if not report.ok:
        raise AssertionError(
            "derived table failed its own validation: "
            + "; ".join(e.name for e in report.failures)
        )
    return table


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    slack: Fraction | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "slack": None if self.slack is None else str(self.slack),
            "detail": self.detail,
        }


@dataclass
class ConstraintReport:
    entries: list[ConstraintCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[ConstraintCheck]:
        return [e for e in self.entries if not e.passed]

    def add(self, name: str, passed: bool, slack=None, detail: str = ""):
        self.entries.append(ConstraintCheck(name, bool(passed), slack, detail))

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [e.to_json() for e in self.entries]}


def validate_sequences(table: SequenceTable) -> ConstraintReport:
    """Check every table constraint exactly, recording rational slacks.

    The report never raises; failed constraints are entries with
    ``passed=False`` and the exact (negative) slack.
    """
    r = ConstraintReport()
    c, c1, c2 = table.c, table.c1, table.c2
    d, D, t = table.delta, table.Delta, table.theta
    N = table.depth

    r.add("base: delta_1 == Delta_1 == 1", d[0] == 1 and D[0] == 1)
    r.add("base: theta_1 == c", t[0] == c, slack=t[0] - c)
    r.add("constant: c < 1/10", c < Fraction(1, 10), slack=Fraction(1, 10) - c)
    r.add("constant: c*(1+4c(c1+1)) < 1", c * (1 + c2) < 1, slack=1 - c * (1 + c2))
    r.add("constant: 3*c*c1 < 1/2", 3 * c * c1 < Fraction(1, 2),
          slack=Fraction(1, 2) - 3 * c * c1)
    r.add("constant: c1 >= sqrt(2)", c1 * c1 >= 2, slack=c1 * c1 - 2,
          detail="compared as c1^2 >= 2")

    for x, name in ((d, "delta"), (D, "Delta"), (t, "theta")):
        r.add(f"dyadic closure: all {name} entries dyadic",
              all(is_dyadic(v) for v in x))
        r.add(f"monotone: {name} strictly decreasing",
              all(x[i] > x[i + 1] for i in range(len(x) - 1)) or len(x) == 1)

    for n in range(1, N):  # constraints linking level n to n+1 (1-based n)
        e = table.p2_exponent(n)
        tag = "" if table.profile == "strict" else " [demo exponent 2]"
        r.add(f"height bound{tag}: Delta_{n+1} <= c*delta_{n}^{e}",
              D[n] <= c * d[n - 1] ** e, slack=c * d[n - 1] ** e - D[n])
        r.add(f"width bound: delta_{n+1} <= c*Delta_{n+1}*delta_{n}",
              d[n] <= c * D[n] * d[n - 1], slack=c * D[n] * d[n - 1] - d[n])
        r.add(f"angle def: theta_{n+1} == c*Delta_{n+1}*delta_{n}",
              t[n] == c * D[n] * d[n - 1], slack=t[n] - c * D[n] * d[n - 1])
        ratio = t[n - 1] / t[n]
        r.add(f"angle integrality: theta_{n}/theta_{n+1} in N",
              ratio.denominator == 1, detail=f"ratio = {short_repr(ratio)}")
        if ratio.denominator == 1:
            r.add(f"angle integrality: theta_{n}/theta_{n+1} power of two",
                  is_pow2_reciprocal(1 / ratio), detail=f"ratio = {short_repr(ratio)}")

    if N >= 2:
        r.add("grid integrality: 1/Delta_2 in N", (1 / D[1]).denominator == 1,
              detail=f"1/Delta_2 = {short_repr(1 / D[1])}")
    for n in range(2, N):  # 1-based n >= 2: ratio at level n+1
        ratio = (D[n - 1] * d[n - 2]) / (D[n] * d[n - 1])
        r.add(f"grid integrality: Delta_{n}*delta_{n-1}/(Delta_{n+1}*delta_{n}) in N",
              ratio.denominator == 1, detail=f"ratio = {short_repr(ratio)}")

    narrow = [d[i] / D[i] for i in range(N)]
    r.add("narrowing: delta_n/Delta_n strictly decreasing",
          all(narrow[i] > narrow[i + 1] for i in range(N - 1)) or N == 1)

    return r
