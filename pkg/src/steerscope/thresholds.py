"""Harmonic-number steering thresholds with exact or certified arithmetic.

Harmonic indices up to ``EXACT_HARMONIC_LIMIT`` are evaluated as exact
rationals. Above that, H_n comes from an Euler-Maclaurin expansion evaluated
in interval arithmetic, with the truncation remainder folded into the
interval. Strict comparisons go through :func:`certify_greater`, which
climbs a precision ladder until the two enclosures separate.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Union

import mpmath
from mpmath import mp
from mpmath.ctx_iv import MPIntervalContext

EXACT_HARMONIC_LIMIT = 10_000
DEFAULT_DPS = 50
DEFAULT_PRECISION_CEILING = 800
PRECISION_ENV = "STEERSCOPE_PRECISION"


class PrecisionError(ArithmeticError):
    """A strict comparison could not be decided below the precision ceiling."""


class Variant(str, enum.Enum):
    """Right-hand side used for the k-copy criterion."""

    PROOF = "proof"
    PRINTED_EQ10 = "printed-eq10"


class MeasurementClass(str, enum.Enum):
    PROJECTIVE = "projective"
    POVM = "povm"


@dataclass(frozen=True)
class Precision:
    dps: int = DEFAULT_DPS
    em_terms: int = 1


def precision_ceiling() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION_CEILING
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{PRECISION_ENV} must be an integer number of digits, got {raw!r}") from exc
    return max(value, 15)


def precision_ladder(start: Precision = Precision()) -> Iterator[Precision]:
    """Increasing precisions, capped at STEERSCOPE_PRECISION decimal digits."""
    ceiling = precision_ceiling()
    dps, terms = min(start.dps, ceiling), start.em_terms
    while True:
        yield Precision(dps, terms)
        if dps >= ceiling:
            return
        dps, terms = min(2 * dps, ceiling), terms + 2


@lru_cache(maxsize=None)
def _ctx(dps: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.dps = dps
    return ctx


@dataclass(frozen=True)
class ThresholdValue:
    """A threshold number, either an exact rational or a certified enclosure.

    For ``representation == "certified"`` the true value lies in
    ``[value - error_bound, value + error_bound]``; ``lo``/``hi`` are the
    underlying (exactly representable) interval endpoints.
    """

    value: Union[Fraction, mpmath.mpf]
    representation: str
    error_bound: Union[Fraction, mpmath.mpf]
    lo: Union[Fraction, mpmath.mpf, None] = None
    hi: Union[Fraction, mpmath.mpf, None] = None

    @classmethod
    def exact(cls, q: Fraction) -> "ThresholdValue":
        q = Fraction(q)
        return cls(q, "exact", Fraction(0), q, q)

    @classmethod
    def from_interval(cls, x, dps: int) -> "ThresholdValue":
        lo, hi = (mp.make_mpf(t) for t in x._mpi_)
        with mp.workdps(dps + 10):
            mid = (lo + hi) / 2
            err = max(hi - mid, mid - lo) * (1 + mpmath.mpf(10) ** (-dps))
        return cls(mid, "certified", err, lo, hi)

    @property
    def is_exact(self) -> bool:
        return self.representation == "exact"

    def interval(self, ctx: MPIntervalContext):
        if self.is_exact:
            return ctx.mpf(self.value.numerator) / ctx.mpf(self.value.denominator)
        return ctx.mpf([self.lo, self.hi])

    def __float__(self) -> float:
        return float(self.value)

    def decimal(self, digits: int = 17) -> str:
        if self.is_exact:
            with mp.workdps(digits + 10):
                return mpmath.nstr(mpmath.mpf(self.value.numerator) / self.value.denominator, digits)
        return mpmath.nstr(self.value, digits)

    def rational(self, max_chars: int | None = None) -> str | None:
        """'p/q' string for exact values, None otherwise or when longer than ``max_chars``."""
        if not self.is_exact:
            return None
        text = f"{self.value.numerator}/{self.value.denominator}"
        if max_chars is not None and len(text) > max_chars:
            return None
        return text


Number = Union[Fraction, ThresholdValue]


def to_fraction(x) -> Fraction:
    """Exact rational for a float (its binary value), int, str or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(x)
    return Fraction(x)


@lru_cache(maxsize=64)
def _harmonic_exact(n: int) -> Fraction:
    lcm = math.lcm(*range(1, n + 1))
    return Fraction(sum(lcm // i for i in range(1, n + 1)), lcm)


@lru_cache(maxsize=4096)
def _harmonic_interval(n: int, prec: Precision):
    ctx = _ctx(prec.dps)
    nn = ctx.mpf(n)
    x = ctx.log(nn) + ctx.euler + 1 / (2 * nn)
    for j in range(1, prec.em_terms + 1):
        p, q = mpmath.bernfrac(2 * j)
        x -= ctx.mpf(int(p)) / (ctx.mpf(int(q)) * 2 * j * nn ** (2 * j))
    j = prec.em_terms + 1
    p, q = mpmath.bernfrac(2 * j)
    tail = abs(ctx.mpf(int(p)) / (ctx.mpf(int(q)) * 2 * j * nn ** (2 * j)))
    return ctx.mpf([x.a - tail.b, x.b + tail.b])


def em_truncation_bound(n: int, em_terms: int = 1) -> Fraction:
    """Magnitude of the first omitted Euler-Maclaurin term, e.g. 1/(120 n^4) for one term."""
    j = em_terms + 1
    p, q = mpmath.bernfrac(2 * j)
    return abs(Fraction(int(p), int(q))) / (2 * j * Fraction(n) ** (2 * j))


def harmonic(n: int, prec: Precision = Precision()) -> ThresholdValue:
    """H_n = sum_{i=1}^n 1/i; exact for n <= EXACT_HARMONIC_LIMIT."""
    if n < 1:
        raise ValueError(f"harmonic index must be >= 1, got {n}")
    if n <= EXACT_HARMONIC_LIMIT:
        return ThresholdValue.exact(_harmonic_exact(n))
    return ThresholdValue.from_interval(_harmonic_interval(n, prec), prec.dps)


def _proj_from_index(D: int, shift: int, prec: Precision) -> ThresholdValue:
    # [(1 + D)(H_D - shift) - D] / D^2
    if D <= EXACT_HARMONIC_LIMIT:
        H = _harmonic_exact(D)
        return ThresholdValue.exact(((1 + D) * (H - shift) - D) / Fraction(D * D))
    ctx = _ctx(prec.dps)
    H = _harmonic_interval(D, prec)
    DD = ctx.mpf(D)
    return ThresholdValue.from_interval(((1 + DD) * (H - shift) - DD) / (DD * DD), prec.dps)


def _check_d(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")


@lru_cache(maxsize=4096)
def f_proj(d: int, prec: Precision = Precision()) -> ThresholdValue:
    """Largest F for which ISO_d(F) is unsteerable with projective measurements:
    [(1 + d) H_d - d] / d^2."""
    _check_d(d)
    return _proj_from_index(int(d), 0, prec)


@lru_cache(maxsize=512)
def f_povm(d: int, printed_eq16: bool = False) -> ThresholdValue:
    """POVM local-hidden-state bound for ISO_d(F) as an entanglement fraction.

    Default: 1/d^2 + eta (1 - 1/d^2) with the visibility
    eta = (3d - 1)(d - 1)^(d-1) / ((d + 1) d^d).
    ``printed_eq16`` gives the alternative closed form
    [1 + ((d + 1)/d)^d (3d - 1)] / d^2, which exceeds 1 already at d = 2.
    """
    _check_d(d)
    d = int(d)
    if printed_eq16:
        return ThresholdValue.exact((1 + Fraction(d + 1, d) ** d * (3 * d - 1)) / (d * d))
    eta = Fraction((3 * d - 1) * (d - 1) ** (d - 1), (d + 1) * d**d)
    return ThresholdValue.exact(Fraction(1, d * d) + eta * (1 - Fraction(1, d * d)))


def single_copy_bound(d: int, mclass: MeasurementClass, printed_eq16: bool = False) -> ThresholdValue:
    if MeasurementClass(mclass) is MeasurementClass.PROJECTIVE:
        return f_proj(d)
    return f_povm(d, printed_eq16)


@lru_cache(maxsize=8192)
def kcopy_threshold(d: int, k: int, variant: Variant = Variant.PROOF, prec: Precision = Precision()) -> ThresholdValue:
    """Right-hand side of the k-copy criterion F^k > threshold, with D = d^k.

    PROOF: f_proj(D) = [(1 + D) H_D - D] / D^2.
    PRINTED_EQ10: [(1 + D)(H_D - 1) - D] / D^2.
    """
    _check_d(d)
    if int(k) != k or k < 1:
        raise ValueError(f"copy number must be an integer >= 1, got {k}")
    shift = 0 if Variant(variant) is Variant.PROOF else 1
    return _proj_from_index(int(d) ** int(k), shift, prec)


def power(x: Number, k: int, prec: Precision = Precision()) -> Number:
    """x**k, exact when cheap, otherwise as a certified enclosure."""
    if isinstance(x, Fraction):
        bits = x.numerator.bit_length() + x.denominator.bit_length()
        if bits * k <= 200_000:
            return x**k
        ctx = _ctx(prec.dps)
        return ThresholdValue.from_interval((ctx.mpf(x.numerator) / ctx.mpf(x.denominator)) ** k, prec.dps)
    if x.is_exact:
        return power(x.value, k, prec)
    ctx = _ctx(prec.dps)
    return ThresholdValue.from_interval(x.interval(ctx) ** k, prec.dps)


def _as_interval(x: Number, ctx: MPIntervalContext):
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / ctx.mpf(x.denominator)
    return x.interval(ctx)


def _exact_value(x: Number) -> Fraction | None:
    if isinstance(x, Fraction):
        return x
    return x.value if x.is_exact else None


def compare(a: Number, b: Number, prec: Precision = Precision()) -> int | None:
    """Sign of a - b (1, 0, -1), or None when the enclosures overlap."""
    ea, eb = _exact_value(a), _exact_value(b)
    if ea is not None and eb is not None:
        return (ea > eb) - (ea < eb)
    ctx = _ctx(prec.dps)
    ia, ib = _as_interval(a, ctx), _as_interval(b, ctx)
    if ia.a > ib.b:
        return 1
    if ia.b < ib.a:
        return -1
    return None


def certify_greater(lhs: Callable[[Precision], Number], rhs: Callable[[Precision], Number]) -> bool:
    """Decide lhs > rhs, escalating precision until the decision is certain.

    Raises PrecisionError if the ceiling is reached with the enclosures
    still overlapping.
    """
    last = None
    for prec in precision_ladder():
        s = compare(lhs(prec), rhs(prec), prec)
        if s is not None:
            return s > 0
        last = prec
    raise PrecisionError(f"comparison undecided at {last.dps} digits; raise {PRECISION_ENV} to go further")


def margin(lhs: Number, rhs: Number, prec: Precision = Precision()) -> ThresholdValue:
    """lhs - rhs as an exact value or certified enclosure."""
    ea, eb = _exact_value(lhs), _exact_value(rhs)
    if ea is not None and eb is not None:
        return ThresholdValue.exact(ea - eb)
    ctx = _ctx(prec.dps)
    return ThresholdValue.from_interval(_as_interval(lhs, ctx) - _as_interval(rhs, ctx), prec.dps)


def kth_root(x: ThresholdValue, k: int, prec: Precision = Precision()) -> ThresholdValue:
    if k == 1:
        return x
    ctx = _ctx(prec.dps)
    return ThresholdValue.from_interval(x.interval(ctx) ** (ctx.mpf(1) / k), prec.dps)
