"""Level-indexed extended-range arithmetic for non-negative magnitudes.

A :class:`LogTower` stores a magnitude as ``exp`` applied ``level`` times to a
double ``v``.  This lets quantities like ``2**65536`` or the coefficients of
iterated power towers be stored, multiplied and compared without overflow.

Canonical form
--------------
* zero is exactly ``(level=0, v=0.0)``;
* ``level == 0`` with ``v in [0, E)`` where ``E = 1e15``;
* ``level >= 1`` with ``v in [ln E, E)``.

Magnitudes too small for a positive double (they arise from divisions such as
``tiny / huge``) are held at *negative* levels: ``level = -n`` means
``1 / exp^n(v)`` with the same ``v`` band.  Negative levels are produced by
arithmetic only; ``from_real`` always yields canonical non-negative levels.

Precision contract: the relative error of an operation is stated on the
top-level stored component ``v``, not on the represented value (which may not
be a representable real at all).  Additions absorb the smaller operand once
the natural-log gap exceeds ``DOMINANCE_GAP``; the absorbed error is below the
component precision everywhere the gap test fires.

Values are immutable; all operations are pure.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

__all__ = [
    "LogTower",
    "LogTowerError",
    "BAND_LIMIT",
    "DOMINANCE_GAP",
    "LEVEL_CAP",
    "lt_zero",
    "lt_one",
    "lt_from_real",
    "lt_from_int",
    "lt_from_ln",
    "lt_mul",
    "lt_div",
    "lt_pow",
    "lt_add",
    "lt_exp",
    "lt_cmp",
    "lt_max",
    "lt_encode",
    "lt_parse",
    "log_component_rel_diff",
]

#: Upper edge of the canonical band for the stored component.
BAND_LIMIT = 1e15
_LN_BAND = math.log(BAND_LIMIT)  # ~34.5387763949...

#: Natural-log gap beyond which addition returns the larger operand.
DOMINANCE_GAP = 40.0

#: Levels outside [-LEVEL_CAP, LEVEL_CAP] raise; nothing at desk scale needs more.
LEVEL_CAP = 8

_LN_MAX_FLOAT = math.log(sys.float_info.max)  # ~709.78
_LN_MIN_NORMAL = -math.log(sys.float_info.min)  # ~708.40


class LogTowerError(ValueError):
    """Domain or range violation in tower arithmetic."""


@dataclass(frozen=True, slots=True)
class LogTower:
    """Magnitude ``exp^level(v)``, canonical after construction helpers."""

    level: int
    v: float

    def is_zero(self) -> bool:
        return self.level == 0 and self.v == 0.0

    def to_float(self) -> float:
        """Decode to a double; raises when the value is out of float range."""
        if self.level == 0:
            return self.v
        if self.level == 1:
            if self.v <= _LN_MAX_FLOAT:
                return math.exp(self.v)
            raise LogTowerError(f"value at level 1 with v={self.v} exceeds float range")
        if self.level == -1:
            return math.exp(-self.v)
        raise LogTowerError(f"level {self.level} value is not representable as a float")

    def ln_float(self) -> float:
        """Natural log of the magnitude as a double.

        Returns ``-inf`` for zero and ``+/-inf`` as an out-of-range marker for
        very deep towers; callers on fast paths test ``math.isfinite``.
        """
        if self.is_zero():
            return -math.inf
        lvl = self.level
        if lvl == 0:
            return math.log(self.v)
        if lvl == 1:
            return self.v
        if lvl == -1:
            return -self.v
        if lvl == 2:
            return math.exp(self.v) if self.v <= _LN_MAX_FLOAT else math.inf
        if lvl == -2:
            return -math.exp(self.v) if self.v <= _LN_MAX_FLOAT else -math.inf
        return math.inf if lvl > 0 else -math.inf

    def __float__(self) -> float:
        return self.to_float()

    def __str__(self) -> str:
        return lt_encode(self)

    def __repr__(self) -> str:
        return f"LogTower({self.level}, {self.v!r})"

    # Ordering sugar; the primitive is lt_cmp.
    def __lt__(self, other: "LogTower") -> bool:
        return lt_cmp(self, other) < 0

    def __le__(self, other: "LogTower") -> bool:
        return lt_cmp(self, other) <= 0


_ZERO = LogTower(0, 0.0)
_ONE = LogTower(0, 1.0)


def lt_zero() -> LogTower:
    return _ZERO


def lt_one() -> LogTower:
    return _ONE


def _check_level(level: int) -> None:
    if abs(level) > LEVEL_CAP:
        raise LogTowerError(f"level {level} exceeds cap {LEVEL_CAP}")


def normalize(level: int, v: float) -> LogTower:
    """Bring an arbitrary (level, v) pair with v >= 0 into canonical form."""
    if math.isnan(v) or v < 0.0:
        raise LogTowerError(f"invalid stored component {v}")
    if v == 0.0 and level >= 0:
        # exp^l(0) is a finite tower of e's; collapse it.
        if level == 0:
            return _ZERO
        level -= 1
        v = 1.0
    while True:
        _check_level(level)
        if level == 0:
            if v < BAND_LIMIT:
                return LogTower(0, v)
            level, v = 1, math.log(v)
        elif level >= 1:
            if v >= BAND_LIMIT:
                level, v = level + 1, math.log(v)
            elif v < _LN_BAND:
                # descend one level; exp(v) < BAND_LIMIT so this terminates
                level, v = level - 1, math.exp(v)
            else:
                return LogTower(level, v)
        else:  # reciprocal levels
            if v >= BAND_LIMIT:
                level, v = level - 1, math.log(v)
            elif level == -1:
                if v <= _LN_MIN_NORMAL:
                    # value fits a normal double; prefer the level-0 form
                    return LogTower(0, math.exp(-v))
                return LogTower(-1, v)
            elif v < _LN_BAND:
                level, v = level + 1, math.exp(v)
            else:
                return LogTower(level, v)


def lt_from_real(x: float) -> LogTower:
    """Encode a non-negative finite real; exact for x below the band limit."""
    if isinstance(x, LogTower):
        return x
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise LogTowerError(f"non-finite input {x}")
    if x < 0.0:
        raise LogTowerError(f"negative input {x}")
    return normalize(0, x)


def lt_from_int(n: int) -> LogTower:
    """Encode a non-negative integer, including ints beyond float range."""
    if n < 0:
        raise LogTowerError(f"negative input {n}")
    if n < (1 << 53):
        return lt_from_real(float(n))
    return normalize(1, math.log(n))


def lt_from_ln(ln_value: float) -> LogTower:
    """Encode a magnitude given by its natural log (any finite float; -inf -> 0)."""
    if ln_value == -math.inf:
        return _ZERO
    if math.isnan(ln_value) or ln_value == math.inf:
        raise LogTowerError(f"invalid natural log {ln_value}")
    return _exp_sln(("f", ln_value))


# ---------------------------------------------------------------------------
# Signed natural-log intermediates.
#
# The ln of a positive tower is either a plain signed double or, for deep
# towers, a positive tower one level down carrying a sign.  Tagged tuples:
#   ("f", x)            float, any sign
#   ("t", s, LogTower)  s * tower, tower non-decodable (> max float)
# ---------------------------------------------------------------------------


def _sln(x: LogTower):
    """Signed-log hybrid of a positive tower."""
    lvl = x.level
    if lvl == 0:
        return ("f", math.log(x.v))
    mag = LogTower(abs(lvl) - 1, x.v) if abs(lvl) > 1 else None
    sign = 1 if lvl > 0 else -1
    if abs(lvl) == 1:
        return ("f", sign * x.v)
    assert mag is not None
    if mag.level == 0:
        return ("f", sign * mag.v)
    if mag.level == 1 and mag.v <= _LN_MAX_FLOAT:
        return ("f", sign * math.exp(mag.v))
    return ("t", sign, mag)


def _exp_sln(s) -> LogTower:
    """Exponential of a signed-log hybrid, back to a canonical tower."""
    if s[0] == "f":
        f = s[1]
        if f >= _LN_BAND:
            return normalize(1, f)
        if f >= -_LN_MIN_NORMAL:
            return normalize(0, math.exp(f))
        return normalize(-1, -f)
    _, sign, mag = s
    if sign > 0:
        return normalize(mag.level + 1, mag.v)
    return normalize(-(mag.level + 1), mag.v)


def _sln_neg(s):
    if s[0] == "f":
        return ("f", -s[1])
    return ("t", -s[1], s[2])


def _sln_from_overflowed(sign: int, half_sum: float):
    # |2*half_sum| overflowed a double; re-encode through its log.
    return ("t", sign, normalize(1, math.log(abs(half_sum)) + math.log(2.0)))


def _sln_add(a, b):
    """Signed-log addition with documented absorption for deep towers."""
    if a[0] == "f" and b[0] == "f":
        s = a[1] + b[1]
        if math.isinf(s):
            half = a[1] / 2.0 + b[1] / 2.0
            return _sln_from_overflowed(1 if half > 0 else -1, half)
        return ("f", s)
    if a[0] == "f":
        a, b = b, a
    # a is a tower hybrid; b may be float or tower
    _, sa, ta = a
    if b[0] == "f":
        f = b[1]
        if ta.level >= 2:
            return a
        # ta.level == 1 with ta.v > ln(max float): scale f down into the band
        q = f * math.exp(-ta.v) * sa
        if q == 0.0:
            return a
        if q <= -1.0:
            # |f| meets or exceeds the tower right at the float boundary
            d = math.log(abs(f)) - ta.v
            rest = math.expm1(d)
            if rest <= 0.0:
                return ("f", 0.0)
            return ("t", -sa, normalize(1, ta.v + math.log(rest)))
        return ("t", sa, normalize(1, ta.v + math.log1p(q)))
    _, sb, tb = b
    if ta.level == tb.level and ta.v == tb.v:
        if sa != sb:
            return ("f", 0.0)
        if ta.level == 1:
            return ("t", sa, normalize(1, ta.v + math.log(2.0)))
        return a  # doubling is below component precision at this depth
    # distinct deep towers: the larger one absorbs the other entirely
    if (ta.level, ta.v) >= (tb.level, tb.v):
        return a
    return b


def _sln_scale(s, c: float):
    """Multiply a signed-log hybrid by a finite real c."""
    if c == 0.0:
        return ("f", 0.0)
    if s[0] == "f":
        p = s[1] * c
        if math.isinf(p):
            sign = 1 if p > 0 else -1
            return ("t", sign, normalize(1, math.log(abs(s[1])) + math.log(abs(c))))
        return ("f", p)
    _, sign, mag = s
    if c < 0:
        sign, c = -sign, -c
    # mag * c computed one level down: exp(ln(mag) + ln(c))
    scaled = _exp_sln(_sln_add(_sln(mag), ("f", math.log(c))))
    if scaled.level == 0 or (scaled.level == 1 and scaled.v <= _LN_MAX_FLOAT):
        return ("f", sign * scaled.to_float())
    return ("t", sign, scaled)


def _sln_cmp(a, b) -> int:
    if a[0] == "f" and b[0] == "f":
        return (a[1] > b[1]) - (a[1] < b[1])
    if a[0] == "f":
        return -b[1]  # non-decodable tower beats any float; sign decides
    if b[0] == "f":
        return a[1]
    _, sa, ta = a
    _, sb, tb = b
    if sa != sb:
        return 1 if sa > sb else -1
    key = ((ta.level, ta.v) > (tb.level, tb.v)) - ((ta.level, ta.v) < (tb.level, tb.v))
    return key * sa


# ---------------------------------------------------------------------------
# Public arithmetic
# ---------------------------------------------------------------------------


def lt_mul(a: LogTower, b: LogTower) -> LogTower:
    if a.is_zero() or b.is_zero():
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    if a.level == 0 and b.level == 0:
        p = a.v * b.v
        if p >= sys.float_info.min:  # exact unless the product underflows
            return normalize(0, p)
    return _exp_sln(_sln_add(_sln(a), _sln(b)))


def lt_div(a: LogTower, b: LogTower) -> LogTower:
    if b.is_zero():
        raise LogTowerError("division by zero")
    if a.is_zero():
        return _ZERO
    if b == _ONE:
        return a
    if a.level == 0 and b.level == 0:
        q = a.v / b.v
        if q >= sys.float_info.min:
            return normalize(0, q)
    return _exp_sln(_sln_add(_sln(a), _sln_neg(_sln(b))))


def lt_pow(a: LogTower, e: float) -> LogTower:
    if a.is_zero():
        if e > 0:
            return _ZERO
        raise LogTowerError("0 ** e undefined for e <= 0")
    e = float(e)
    if e == 1.0:
        return a
    if e == 0.0:
        return _ONE
    if a.level == 0:
        le = e * math.log(a.v) if a.v != 1.0 else 0.0
        if abs(le) < _LN_MIN_NORMAL:
            return lt_from_real(math.pow(a.v, e))
    return _exp_sln(_sln_scale(_sln(a), e))


def lt_exp(t: LogTower) -> LogTower:
    """exp of the represented magnitude (one extra tower level)."""
    if t.is_zero():
        return _ONE
    if t.level >= 0:
        return normalize(t.level + 1, t.v)
    if t.level == -1:
        return lt_from_real(math.exp(t.to_float()))
    return _ONE  # exp of a sub-epsilon magnitude rounds to 1 exactly


def lt_add(a: LogTower, b: LogTower) -> LogTower:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.level == 0 and b.level == 0:
        s = a.v + b.v
        return LogTower(0, s) if s < BAND_LIMIT else normalize(0, s)
    hi, lo = (a, b) if lt_cmp(a, b) >= 0 else (b, a)
    gap = _sln_add(_sln(hi), _sln_neg(_sln(lo)))
    if gap[0] != "f" or gap[1] > DOMINANCE_GAP:
        return hi  # documented absorption
    return lt_mul(hi, lt_from_real(1.0 + math.exp(-gap[1])))


def lt_cmp(a: LogTower, b: LogTower) -> int:
    """Total order on represented values: -1, 0 or 1."""
    az, bz = a.is_zero(), b.is_zero()
    if az or bz:
        return (not az) - (not bz)
    if a.level >= 0 and b.level >= 0:
        # canonical bands are disjoint and increasing for levels >= 0
        ka, kb = (a.level, a.v), (b.level, b.v)
        return (ka > kb) - (ka < kb)
    c = _sln_cmp(_sln(a), _sln(b))
    return 1 if c > 0 else -1 if c < 0 else 0


def lt_max(values) -> LogTower:
    it = iter(values)
    best = next(it)
    for x in it:
        if lt_cmp(x, best) > 0:
            best = x
    return best


# ---------------------------------------------------------------------------
# Text serialization "T{level}:{v}" used inside JSON certificates.
# ---------------------------------------------------------------------------


def lt_encode(x: LogTower) -> str:
    return f"T{x.level}:{x.v!r}"


def lt_parse(text: str) -> LogTower:
    if not text.startswith("T") or ":" not in text:
        raise LogTowerError(f"malformed tower literal {text!r}")
    head, _, tail = text[1:].partition(":")
    try:
        level = int(head)
        v = float(tail)
    except ValueError as exc:
        raise LogTowerError(f"malformed tower literal {text!r}") from exc
    return normalize(level, v)


def log_component_rel_diff(a: LogTower, b: LogTower) -> float:
    """Relative disagreement of the top-level stored components.

    Co-normalizes both operands to the higher of the two levels first, so a
    pair sitting just across a canonical band boundary still compares small.
    Returns inf when the values cannot be brought to a common level.
    """
    if a.is_zero() and b.is_zero():
        return 0.0
    if a.is_zero() or b.is_zero():
        return math.inf
    la, lb = a.level, b.level
    if (la < 0) != (lb < 0):
        # mixed sign levels: only near the level 0 boundary can they be close
        fa, fb = a.ln_float(), b.ln_float()
        if math.isfinite(fa) and math.isfinite(fb):
            return abs(fa - fb) / max(1.0, abs(fa), abs(fb))
        return math.inf
    target = max(abs(la), abs(lb))
    va = _component_at(abs(la), a.v, target)
    vb = _component_at(abs(lb), b.v, target)
    if va is None or vb is None:
        return math.inf
    return abs(va - vb) / max(abs(va), abs(vb), sys.float_info.min)


def _component_at(level: int, v: float, target: int) -> float | None:
    while level < target:
        if v <= 0.0:
            return None
        level, v = level + 1, math.log(v)
    return v
