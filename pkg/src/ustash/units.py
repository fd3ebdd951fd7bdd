"""Unit parsing and conversion.

Everything internal runs on one unit system: bandwidths in MB/s, sizes
in MB, costs in cents/MB, times in seconds. Config files may use common
suffixed strings ("500kbps", "6Mbps", "2102KB") which are converted on
load. Decimal prefixes throughout: 1 Mbps = 0.125 MB/s, 1 MB = 1000 KB.
"""

from __future__ import annotations

import re

_BANDWIDTH_FACTORS = {
    # factor to MB/s
    "bps": 0.125e-6,
    "kbps": 0.125e-3,
    "mbps": 0.125,
    "gbps": 125.0,
    "b/s": 1e-6,
    "kb/s": 1e-3,
    "mb/s": 1.0,
    "gb/s": 1e3,
}

_SIZE_FACTORS = {
    # factor to MB
    "b": 1e-6,
    "kb": 1e-3,
    "mb": 1.0,
    "gb": 1e3,
    "tb": 1e6,
}

_QUANTITY_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*([a-zA-Z/]*)\s*$")


class UnitError(ValueError):
    """Raised for unparseable or unknown-unit quantity strings."""


def _parse(value, factors, kind, bare_unit):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    m = _QUANTITY_RE.match(str(value))
    if m is None:
        raise UnitError(f"cannot parse {kind} quantity: {value!r}")
    number, suffix = float(m.group(1)), m.group(2).lower()
    if suffix == "":
        return number  # already in the internal unit
    # Bandwidth strings like "500kbps" use bits; "MB/s" style uses bytes.
    if suffix not in factors:
        raise UnitError(f"unknown {kind} unit {suffix!r} in {value!r} (expected e.g. {bare_unit})")
    return number * factors[suffix]


def parse_bandwidth(value) -> float:
    """Convert a bandwidth (number in MB/s, or string like "800kbps") to MB/s."""
    return _parse(value, _BANDWIDTH_FACTORS, "bandwidth", "kbps/Mbps/MB/s")


def parse_size(value) -> float:
    """Convert a data size (number in MB, or string like "194061KB") to MB."""
    return _parse(value, _SIZE_FACTORS, "size", "KB/MB/GB")
