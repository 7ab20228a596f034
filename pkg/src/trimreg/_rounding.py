"""Integer rounding tolerant of float representation error.

Counts like floor(eps * n) are defined by exact arithmetic, but the float
product can land a hair on the wrong side of an integer (for example
0.043 * 10000 == 429.99999999999994). A relative slack of 1e-9 absorbs
representation error while leaving genuinely fractional values untouched.
"""

import math

_SLACK = 1e-9


def floor_int(x: float) -> int:
    return math.floor(x + _SLACK * max(1.0, abs(x)))


def ceil_int(x: float) -> int:
    return math.ceil(x - _SLACK * max(1.0, abs(x)))
