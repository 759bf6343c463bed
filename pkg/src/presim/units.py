"""Time and size units used throughout the simulator.

All simulation time is measured in hours. A "metric year" is exactly
10,000 hours and a billing month is one twelfth of that; a simplified time
system that keeps rate/half-life conversions trivial. Sizes are bytes, with
binary suffixes (KB = 2**10, MB = 2**20, ...). Storage billing quantities
are expressed in GB of 2**30 bytes.
"""

from __future__ import annotations

import math

from .errors import ValidationError

HOUR = 1.0
KILOHOUR = 1.0e3
MEGAHOUR = 1.0e6
METRIC_YEAR = 1.0e4
MONTH_HOURS = METRIC_YEAR / 12.0

BYTE = 1
KB = 2**10
MB = 2**20
GB = 2**30
TB = 2**40

DEFAULT_BLOCK_SIZE = MB

_TIME_SUFFIXES = {"h": HOUR, "kh": KILOHOUR, "Mh": MEGAHOUR, "my": METRIC_YEAR}
_SIZE_SUFFIXES = {"B": BYTE, "KB": KB, "MB": MB, "GB": GB, "TB": TB}


def _split_suffix(text: str, suffixes) -> tuple[str, str]:
    text = text.strip()
    for suffix in sorted(suffixes, key=len, reverse=True):
        if text.endswith(suffix):
            head = text[: -len(suffix)].strip()
            if head:
                return head, suffix
    return text, ""


def parse_time(value, path: str = "") -> float:
    """Parse a duration into hours.

    Accepts a bare number (hours), or a string ``"<num><suffix>"`` with
    suffix one of h, kh, Mh, my. Suffixes are case sensitive.
    """
    if isinstance(value, bool):
        raise ValidationError(path, f"expected a duration, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        if value.strip() in ("inf", "infinity"):
            return math.inf
        head, suffix = _split_suffix(value, _TIME_SUFFIXES)
        if not suffix:
            raise ValidationError(
                path, f"missing time unit in {value!r} (use h, kh, Mh or my)"
            )
        try:
            number = float(head)
        except ValueError:
            raise ValidationError(path, f"cannot parse duration {value!r}") from None
        return number * _TIME_SUFFIXES[suffix]
    raise ValidationError(path, f"expected a duration, got {type(value).__name__}")


def parse_size(value, path: str = "") -> int:
    """Parse a size into whole bytes (binary suffixes B/KB/MB/GB/TB)."""
    if isinstance(value, bool):
        raise ValidationError(path, f"expected a size, got {value!r}")
    if isinstance(value, (int, float)):
        size = int(value)
    elif isinstance(value, str):
        head, suffix = _split_suffix(value, _SIZE_SUFFIXES)
        if not suffix:
            raise ValidationError(
                path, f"missing size unit in {value!r} (use B, KB, MB, GB or TB)"
            )
        try:
            number = float(head)
        except ValueError:
            raise ValidationError(path, f"cannot parse size {value!r}") from None
        size = int(round(number * _SIZE_SUFFIXES[suffix]))
    else:
        raise ValidationError(path, f"expected a size, got {type(value).__name__}")
    if size <= 0:
        raise ValidationError(path, f"size must be positive, got {value!r}")
    return size


def bytes_to_gb(n_bytes) -> float:
    return n_bytes / GB
