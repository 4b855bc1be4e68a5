"""Linear-ratio / decibel conversions.

All efficiencies inside the library are linear ratios in (0, 1]; decibels
are a presentation format only.
"""

import math


def to_db(ratio: float) -> float:
    """10*log10(ratio). Requires ratio > 0."""
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    return 10.0 * math.log10(ratio)


def from_db(db: float) -> float:
    """Inverse of to_db."""
    return 10.0 ** (db / 10.0)


def format_db(ratio: float) -> str:
    """Signed, one-decimal dB string used in human-readable reports."""
    return f"{to_db(ratio):+.1f} dB"
