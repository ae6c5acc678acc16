"""Extended nonnegative arithmetic for sensitivities, p-indices, and Lp norms.

Sensitivities (grades, distances, privacy budgets) live in [0, inf]; p-indices
live in [1, inf]. Both are plain 64-bit floats with ``math.inf`` for infinity.
Multiplication uses the absorbing convention inf*0 = 0*inf = inf, which is the
sound (if imprecise) choice for graded environments.
"""

from __future__ import annotations

import math
from collections.abc import Iterable

INF = math.inf

# Absolute tolerance for all grade/index comparisons downstream.
ABS_TOL = 1e-9

# Finite p at or above this is indistinguishable from inf at double precision.
P_INF_THRESHOLD = 1e6


class MetricError(ValueError):
    pass


def check_sens(s: float, what: str = "sensitivity") -> float:
    if isinstance(s, bool) or not isinstance(s, (int, float)):
        raise MetricError(f"{what} must be a real number, got {s!r}")
    s = float(s)
    if math.isnan(s) or s < 0:
        raise MetricError(f"{what} must be >= 0, got {s!r}")
    return s


def check_pidx(p: float) -> float:
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise MetricError(f"p-index must be a real number, got {p!r}")
    p = float(p)
    if math.isnan(p) or p < 1:
        raise MetricError(f"p-index must be >= 1, got {p!r}")
    return INF if p >= P_INF_THRESHOLD else p


def sens_mul(a: float, b: float) -> float:
    """Product with inf absorbing, including inf*0 = 0*inf = inf."""
    if a == INF or b == INF:
        return INF
    return a * b


def sens_add(a: float, b: float) -> float:
    return a + b  # inf is absorbing under float addition already


def lp_norm(p: float, xs: Iterable[float]) -> float:
    """(sum x_i^p)^(1/p); max for p = inf; inf if any x_i = inf; 0 on empty.

    Finite p is computed as m*(sum (x_i/m)^p)^(1/p) with m = max x_i, which
    never overflows and is exact when all but one entry is zero.
    """
    xs = list(xs)
    if not xs:
        return 0.0
    if any(x == INF for x in xs):
        return INF
    m = max(xs)
    if m == 0.0:
        return 0.0
    if p == INF or p >= P_INF_THRESHOLD:
        return m
    if len(xs) == 1:
        return xs[0]
    total = math.fsum((x / m) ** p for x in xs)
    if total == 1.0:  # all other entries were zero
        return m
    return m * total ** (1.0 / p)


def c_factor(p: float, q: float) -> float:
    """Contraction correction at a q-node when contracting with the Lp norm.

    1 when p = inf, else 2^|1/q - 1/p| (so c(p, inf) = 2^(1/p) for finite p).
    """
    if p == INF:
        return 1.0
    inv_p = 1.0 / p
    inv_q = 0.0 if q == INF else 1.0 / q
    return 2.0 ** abs(inv_q - inv_p)


def sens_div_ceil(target: float, r: float) -> float:
    """Least s >= 0 with sens_mul(r, s) >= target under the inf*0 convention."""
    if target == 0.0:
        return 0.0
    if r == INF:
        return 0.0  # inf * 0 = inf >= target
    if r == 0.0:
        return INF  # 0 * s = 0 for finite s; 0 * inf = inf >= target
    if target == INF:
        return INF
    return target / r


def approx_le(a: float, b: float, tol: float = ABS_TOL) -> bool:
    if b == INF:
        return True
    if a == INF:
        return False
    return a <= b + tol


def approx_eq(a: float, b: float, tol: float = ABS_TOL) -> bool:
    if a == INF or b == INF:
        return a == b
    return abs(a - b) <= tol


def format_sens(x: float) -> str:
    """Decimal rendering with 9 significant digits; 'inf' for infinity."""
    if x == INF:
        return "inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.9g}"
