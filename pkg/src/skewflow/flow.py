"""The skew product F(a, z) = (tau(a), sigma(a)(z)) on Z(2) x S^1.

Direct iteration (``step``, ``iterate``, ``sigma_n``) is the reference
implementation.  The ``fast_*`` functions jump to the special times built
from ``m_k = 2^(n_1 + ... + n_k)`` in O(k) closed-form operations, so times
far beyond any direct budget are reachable.  Base coordinates of every
fast result are computed with exact odometer addition.
"""

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Tuple, Union

from . import circle
from .circle import IDENTITY, CircleHomeo
from .errors import BudgetExceeded, SOutOfRange
from .family import CocycleFamily
from .odometer import OdometerPoint, add, block_at, eval_e, first_zero_block, metric_d

DIRECT_BUDGET = 1 << 24

Angle = Union[float, Fraction]


@dataclass(frozen=True)
class FlowPoint:
    base: OdometerPoint
    fiber: Angle

    def __post_init__(self):
        object.__setattr__(self, "fiber", circle.normalize(self.fiber))

    def __str__(self):
        return f"({self.base}, {float(self.fiber):.17g})"


def rho(p: FlowPoint, q: FlowPoint) -> float:
    """Max-metric on the product: max(odometer distance, fiber arc length)."""
    return max(metric_d(p.base, q.base), circle.arc_metric(p.fiber, q.fiber))


def sigma(fam: CocycleFamily, alpha: OdometerPoint) -> CircleHomeo:
    """The fiber map over ``alpha``: phi_k^e(a^k) for the first block ``a^k`` with a zero."""
    k = first_zero_block(alpha, fam.schedule)
    if k is None:
        return IDENTITY
    return fam.phi(k, eval_e(block_at(alpha, fam.schedule, k)))


def step(fam: CocycleFamily, p: FlowPoint) -> FlowPoint:
    return FlowPoint(add(p.base, 1), circle.apply(sigma(fam, p.base), p.fiber))


def step_inverse(fam: CocycleFamily, p: FlowPoint) -> FlowPoint:
    prev = add(p.base, -1)
    return FlowPoint(prev, circle.apply(circle.invert(sigma(fam, prev)), p.fiber))


def _check_budget(m):
    if m < 0:
        raise ValueError("iteration count must be nonnegative")
    if m > DIRECT_BUDGET:
        raise BudgetExceeded(f"{m} steps exceeds the direct budget {DIRECT_BUDGET}; use the fast_* functions")


def orbit(fam: CocycleFamily, p: FlowPoint, m: int) -> Iterator[Tuple[int, FlowPoint]]:
    """Yield ``(n, F^n p)`` for ``n = 0 .. m``."""
    _check_budget(m)
    yield 0, p
    for n in range(1, m + 1):
        p = step(fam, p)
        yield n, p


def iterate(fam: CocycleFamily, p: FlowPoint, m: int) -> FlowPoint:
    _check_budget(m)
    for _ in range(m):
        p = step(fam, p)
    return p


def sigma_n(fam: CocycleFamily, alpha: OdometerPoint, m: int) -> CircleHomeo:
    """sigma(tau^(m-1) a) o ... o sigma(tau a) o sigma(a); the identity for m = 0."""
    _check_budget(m)
    h = IDENTITY
    for _ in range(m):
        h = circle.compose(sigma(fam, alpha), h)
        alpha = add(alpha, 1)
    return h


# -- closed forms -----------------------------------------------------------------


@dataclass(frozen=True)
class PsiDecomposition:
    """Partial compositions of level ``k`` below and above the block value ``e``.

    ``plus = phi^(e-1) o ... o phi^0`` and ``minus = phi^(2^n-2) o ... o phi^e``;
    ``c`` is the net power with ``plus = level_map^c`` (0 for ``e = 0``).
    """

    k: int
    e: int
    plus: CircleHomeo
    minus: CircleHomeo
    c: int


def psi_decomposition(fam: CocycleFamily, alpha: OdometerPoint, k: int) -> PsiDecomposition:
    if k < 1:
        raise ValueError("level must be >= 1")
    e = eval_e(block_at(alpha, fam.schedule, k))
    plus = fam.segment(k, 0, e - 1)
    minus = fam.segment(k, e, fam.max_index(k))
    return PsiDecomposition(k, e, plus, minus, fam.net_count(k, e))


def _exit_map(fam, alpha, k):
    """sigma at the last step before the first k blocks roll over.

    This is phi_{k+1}^e(a^{k+1}) whenever block k+1 has a zero; if it is all
    ones, the cocycle reads further blocks and this still gives the right map.
    """
    off = fam.schedule.offset(k)
    return sigma(fam, alpha.with_low_digits((1,) * off))


def align_time(fam: CocycleFamily, alpha: OdometerPoint, k: int) -> int:
    """m_k - e(a^1 ... a^k)."""
    return fam.schedule.m(k) - alpha.low_value(fam.schedule.offset(k))


def align_map(fam: CocycleFamily, alpha: OdometerPoint, k: int) -> CircleHomeo:
    """Fiber map of F^(m_k - e(a^1..a^k)) over ``alpha``."""
    minus = [psi_decomposition(fam, alpha, i).minus for i in range(k, 0, -1)]
    return circle.compose_all(_exit_map(fam, alpha, k), *minus)


def m_k_map(fam: CocycleFamily, alpha: OdometerPoint, k: int) -> CircleHomeo:
    """Fiber map of F^(m_k) over ``alpha``:
    psi_1^+ o ... o psi_k^+ o (exit map) o psi_k^- o ... o psi_1^-.
    """
    parts = [psi_decomposition(fam, alpha, i) for i in range(1, k + 1)]
    plus = [d.plus for d in parts]
    minus = [d.minus for d in reversed(parts)]
    return circle.compose_all(*plus, _exit_map(fam, alpha, k), *minus)


def m_k_map_single_family(fam: CocycleFamily, alpha: OdometerPoint, k: int) -> CircleHomeo:
    """The same map written as powers of each level map:
    phi_1^c1 o ... o phi_k^ck o (exit map) o phi_k^-ck o ... o phi_1^-c1.
    """
    cs = [fam.net_count(i, eval_e(block_at(alpha, fam.schedule, i))) for i in range(1, k + 1)]
    plus = [circle.power(fam.level_map(i), c) for i, c in zip(range(1, k + 1), cs)]
    minus = [circle.power(fam.level_map(i), -c) for i, c in reversed(list(zip(range(1, k + 1), cs)))]
    return circle.compose_all(*plus, _exit_map(fam, alpha, k), *minus)


def _check_s(fam, level, s):
    top = (1 << fam.n(level)) - 1
    if not 1 <= s <= top:
        raise SOutOfRange(f"s = {s} outside 1..{top} for level {level}")


def fast_zero_orbit(fam: CocycleFamily, z0: Angle, k: int, s: int) -> FlowPoint:
    """F^(s m_k)(0^inf, z0) = (0^off(k) s 0^inf, phi_{k+1}^(s-1) o ... o phi_{k+1}^0 (z0)).

    ``k = 0`` is allowed (``m_0 = 1``).
    """
    if k < 0:
        raise ValueError("level must be >= 0")
    _check_s(fam, k + 1, s)
    base = add(OdometerPoint.zero(), s * fam.schedule.m(k))
    return FlowPoint(base, circle.apply(fam.segment(k + 1, 0, s - 1), z0))


def fast_align(fam: CocycleFamily, p: FlowPoint, k: int) -> FlowPoint:
    """F^(m_k - e(a^1..a^k))(p); the base becomes 0^off(k) tau(a^(k+1) ...)."""
    base = add(p.base, align_time(fam, p.base, k))
    return FlowPoint(base, circle.apply(align_map(fam, p.base, k), p.fiber))


def fast_m_k(fam: CocycleFamily, p: FlowPoint, k: int) -> FlowPoint:
    """F^(m_k)(p); the base becomes a^1 ... a^k tau(a^(k+1) ...)."""
    base = add(p.base, fam.schedule.m(k))
    return FlowPoint(base, circle.apply(m_k_map(fam, p.base, k), p.fiber))


def mixed_time(fam: CocycleFamily, alpha: OdometerPoint, k: int, j: int, s: int) -> int:
    return align_time(fam, alpha, k) + s * fam.schedule.m(j)


def fast_mixed(fam: CocycleFamily, p: FlowPoint, k: int, j: int, s: int) -> FlowPoint:
    """F^(m_k - e(a^1..a^k) + s m_j)(p) for ``0 <= j < k``."""
    if not 0 <= j < k:
        raise ValueError("need 0 <= j < k")
    _check_s(fam, j + 1, s)
    base = add(p.base, mixed_time(fam, p.base, k, j, s))
    h = circle.compose(fam.segment(j + 1, 0, s - 1), align_map(fam, p.base, k))
    return FlowPoint(base, circle.apply(h, p.fiber))


# -- trajectory dump ---------------------------------------------------------------

TRAJECTORY_HEADER = ("time", "base", "fiber")


def write_trajectory(fam: CocycleFamily, p: FlowPoint, m: int, fh) -> int:
    """Write ``time,base,fiber`` rows for ``F^0 p .. F^m p``; returns the row count."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    rows = 0
    for n, q in orbit(fam, p, m):
        w.writerow((str(n), str(q.base), f"{float(q.fiber):.17g}"))
        rows += 1
    return rows


def read_trajectory(fh):
    """Parse a trajectory CSV back into ``(time, FlowPoint)`` pairs."""
    r = csv.DictReader(fh)
    return [(int(row["time"]), FlowPoint(OdometerPoint.parse(row["base"]), float(row["fiber"]))) for row in r]
