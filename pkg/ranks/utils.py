"""
Utility functions for command-line parsing.

These turn the compact spellings used on the command line and in the
family data file into integers.
"""

import re

_RANGE_RE = re.compile(r"^(?P<lo>\d+)(?:\.\.(?P<hi>\d+))?$")
_POWER_RE = re.compile(r"^2\^(?P<exp>\d+)$")


def parse_int_range(text):
    """Parse ``"1..10"`` (inclusive) or ``"4"`` into a range

    Examples:
    - "1..10" -> range(1, 11)
    - "4" -> range(4, 5)
    """
    match = _RANGE_RE.match(str(text).strip())
    if not match:
        raise ValueError(f"invalid range {text!r}: expected N or LO..HI")
    lo = int(match.group("lo"))
    hi = int(match.group("hi")) if match.group("hi") is not None else lo
    if hi < lo:
        raise ValueError(f"invalid range {text!r}: {hi} < {lo}")
    return range(lo, hi + 1)


def parse_budget(text):
    """Parse a state budget written as ``"2^26"``, ``"67108864"`` or ``"67_108_864"``"""
    compact = str(text).strip().replace("_", "").replace(",", "")
    match = _POWER_RE.match(compact)
    if match:
        return 1 << int(match.group("exp"))
    if compact.isdigit() and int(compact) > 0:
        return int(compact)
    raise ValueError(f"invalid budget {text!r}: expected 2^N or a positive integer")


def parse_sml(text):
    """Parse ``"3,0,2"`` into the triple (s, m, l)"""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"invalid s,m,l triple {text!r}")
    s, m, l = (int(p) for p in parts)
    if s < 1:
        raise ValueError(f"invalid s,m,l triple {text!r}: s must be >= 1")
    return s, m, l
