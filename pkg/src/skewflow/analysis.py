"""Numerical evidence for the dynamical properties of a constructed flow.

Every report records the parameters it was computed with.  The checks here
are finite samples: they can refute a property at the sampled scale but
never prove it.
"""

import itertools
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import mpmath
import numpy as np

from . import circle
from .circle import TWO_PI
from .errors import BudgetExceeded, ConfigurationBroken, PreconditionError
from .family import CocycleFamily
from .flow import FlowPoint, fast_m_k, fast_zero_orbit, m_k_map, rho, sigma, step
from .odometer import OdometerPoint, add, metric_d, unval

DEFAULT_EPS_PROX = 1e-2
DEFAULT_EPS_REC = 1e-1
DEFAULT_FIBER_POINTS = 1 << 10
# Fiber maps here look like A o R o A^-1, so with total log-exponent L the
# float round trip through A^-1 and A is off by about 1e-16 * exp(L / 2).
# Past L = 46 that exceeds 1e-6 and mpmath takes over.
FLOAT_LOG_LIMIT = 46.0
AP_PRECISION = 40
DENSITY_BUDGET = 1 << 20


def default_workers() -> int:
    """Worker cap from ``SKEWFLOW_THREADS`` (1 when unset)."""
    try:
        return max(1, int(os.environ.get("SKEWFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _base_from_blocks(fam, values):
    bits = ()
    for i, e in enumerate(values, start=1):
        bits += unval(e, fam.n(i))
    return OdometerPoint(bits)


# -- uniform rigidity --------------------------------------------------------------


@dataclass(frozen=True)
class RigidityGrid:
    """Sample points for the sup in ``D(F^m_k, id)``.

    Bases: ``random_bases`` points with random digits through block
    ``k_max + 1`` (zeros after), plus, when ``corners`` is set, for each level
    ``k`` the points whose lower blocks take extreme net powers (no rotation
    or half a turn of rotation; no contraction or a full branch of it) and
    whose block ``k + 1`` selects either branch.  Fibers: a uniform grid of
    ``fiber_points`` angles.
    """

    fiber_points: int = DEFAULT_FIBER_POINTS
    random_bases: int = 64
    corners: bool = True
    seed: int = 0
    max_corner_levels: int = 10

    def to_dict(self):
        return dict(self.__dict__)


def _corner_bases(fam, k, cap):
    choices = []
    for i in range(1, k + 1):
        H = fam.schedule.half(i)
        cs = (0, H // 2) if i % 2 else (0, H)
        choices.append(sorted({c + 1 for c in cs}))
    H = fam.schedule.half(k + 1)
    choices.append([1, H + 1])
    if k > cap:
        # only the top ``cap`` levels vary; lower ones stay at the identity corner
        choices = [[1]] * (k - cap) + choices[k - cap:]
    return [_base_from_blocks(fam, vals) for vals in itertools.product(*choices)]


def _random_bases(fam, k_max, count, seed):
    rng = random.Random(seed)
    width = fam.schedule.offset(k_max + 1)
    return [OdometerPoint(tuple(rng.getrandbits(1) for _ in range(width))) for _ in range(count)]


@dataclass
class RigidityEntry:
    k: int
    m_k: int
    sup_displacement: float
    base_sup: float
    fiber_sup: float
    witness_base: str
    witness_fiber: float

    def to_dict(self):
        d = dict(self.__dict__)
        d["m_k"] = str(self.m_k)
        return d


@dataclass
class RigidityProfile:
    entries: List[RigidityEntry]
    params: dict

    @property
    def values(self):
        return [e.sup_displacement for e in self.entries]

    def trend_ok(self, threshold: float) -> bool:
        """Last entry below the first and below ``threshold``."""
        v = self.values
        return len(v) >= 1 and v[-1] < threshold and (len(v) == 1 or v[-1] < v[0])

    def to_dict(self):
        return {"params": self.params, "entries": [e.to_dict() for e in self.entries]}


def _total_log_exponent(h):
    atoms = h.maps if isinstance(h, circle.Chain) else (h,)
    return sum(abs(a.log_exponent) for a in atoms if isinstance(a, circle.ArcPower))


def _fiber_displacements(h, grid_x):
    L = _total_log_exponent(h)
    if L <= FLOAT_LOG_LIMIT:
        return circle.arc_metric(circle.apply(h, grid_x), grid_x)
    with mpmath.workdps(int(L / math.log(10)) + 25):
        xs = [mpmath.mpf(float(x)) for x in grid_x]
        return np.array([circle.arc_metric(circle.apply(h, x), x) for x in xs])


def _rigidity_level(fam, k, bases, grid_x):
    m = fam.schedule.m(k)
    best = (-1.0, 0.0, 0.0, None, 0.0)
    for alpha in bases:
        base_d = metric_d(alpha, add(alpha, m))
        disp = _fiber_displacements(m_k_map(fam, alpha, k), grid_x)
        i = int(np.argmax(disp))
        fib = float(disp[i])
        total = max(base_d, fib)
        if total > best[0]:
            best = (total, base_d, fib, alpha, float(grid_x[i]))
    total, base_d, fib, alpha, x = best
    base_sup = max(metric_d(a, add(a, m)) for a in bases)
    return RigidityEntry(k, m, total, base_sup, fib, str(alpha), x)


def rigidity_profile(fam: CocycleFamily, k_max: int, grid: RigidityGrid = RigidityGrid(),
                     workers: Optional[int] = None) -> RigidityProfile:
    """Estimate ``sup_x rho(F^(m_k) x, x)`` for ``k = 1 .. k_max``.

    Fiber maps whose arc powers add up to a large exponent are evaluated
    in mpmath with enough digits to survive the contraction; that is much
    slower than the vectorized float path.
    """
    workers = default_workers() if workers is None else workers
    grid_x = circle.sample_grid(grid.fiber_points)
    shared = _random_bases(fam, k_max, grid.random_bases, grid.seed)

    def level(k):
        bases = list(shared)
        if grid.corners:
            bases += _corner_bases(fam, k, grid.max_corner_levels)
        return _rigidity_level(fam, k, bases, grid_x)

    entries = _pmap(level, range(1, k_max + 1), workers)
    params = {"family": fam.to_dict(), "k_max": k_max, "grid": grid.to_dict(),
              "metric": "max(odometer d, fiber arc length in radians)"}
    return RigidityProfile(entries, params)


# -- proximality ---------------------------------------------------------------------


def proximal_witness_time(fam: CocycleFamily, kappa: int) -> int:
    """T = 2^(n_{2 kappa} - 1) * m_{2 kappa - 1}."""
    return (1 << (fam.n(2 * kappa) - 1)) * fam.schedule.m(2 * kappa - 1)


@dataclass
class ProximalEntry:
    kappa: int
    time: int
    distance: float
    fiber1: float
    fiber2: float

    def to_dict(self):
        d = dict(self.__dict__)
        d["time"] = str(self.time)
        return d


@dataclass
class ProximalTrace:
    z1: float
    z2: float
    entries: List[ProximalEntry]
    params: dict = field(default_factory=dict)

    @property
    def distances(self):
        return [e.distance for e in self.entries]

    def to_dict(self):
        return {"z1": self.z1, "z2": self.z2, "params": self.params,
                "entries": [e.to_dict() for e in self.entries]}


def proximal_trace(fam: CocycleFamily, z1, z2, k_max: int) -> ProximalTrace:
    """Distances of the pair ``(0^inf, z1), (0^inf, z2)`` at the times
    ``2^(n_{2 kappa} - 1) m_{2 kappa - 1}``, ``kappa = 1 .. k_max``.

    At those times the fiber has been pushed through the whole positive
    branch of level ``2 kappa``, the strongest contraction the level offers.
    """
    entries = []
    for kappa in range(1, k_max + 1):
        s = 1 << (fam.n(2 * kappa) - 1)
        q1 = fast_zero_orbit(fam, z1, 2 * kappa - 1, s)
        q2 = fast_zero_orbit(fam, z2, 2 * kappa - 1, s)
        assert q1.base == q2.base
        t = s * fam.schedule.m(2 * kappa - 1)
        entries.append(ProximalEntry(kappa, t, circle.arc_metric(q1.fiber, q2.fiber),
                                     float(q1.fiber), float(q2.fiber)))
    return ProximalTrace(float(z1), float(z2), entries, {"family": fam.to_dict(), "k_max": k_max})


# -- almost periodic configurations ----------------------------------------------------


@dataclass(frozen=True)
class APConfiguration:
    """``count`` points in the fiber over ``base``, spaced 1/count turn from ``anchor``."""

    base: OdometerPoint
    anchor: float
    count: int

    @property
    def fibers(self) -> np.ndarray:
        j = np.arange(self.count, dtype=float)
        return circle.normalize(self.anchor + j / self.count)

    def local_coordinates(self):
        """Each point as ``(arc index, coordinate in the arc)`` with an ``mpf`` coordinate."""
        scaled = mpmath.mpf(self.anchor) % 1 * self.count
        q0 = int(mpmath.floor(scaled))
        u = scaled - q0
        return [((q0 + j) % self.count, u) for j in range(self.count)]

    def to_dict(self):
        return {"base": str(self.base), "anchor": self.anchor, "count": self.count}


@dataclass
class APReport:
    config: APConfiguration
    horizon: int
    k_max: int
    max_deviation: float
    first_violation: Optional[int]
    tol: float

    @property
    def ok(self):
        return self.first_violation is None

    def to_dict(self):
        return {"config": self.config.to_dict(), "horizon": self.horizon, "k_max": self.k_max,
                "max_deviation": self.max_deviation, "tol": self.tol, "ok": self.ok,
                "first_violation": None if self.first_violation is None else str(self.first_violation)}


def _spacing_deviation(points, n):
    """Largest drift (radians) of consecutive counterclockwise gaps from 1/n turn."""
    worst = mpmath.mpf(0)
    for (q1, u1), (q2, u2) in zip(points, points[1:]):
        gap = (mpmath.mpf((q2 - q1) % n) + (u2 - u1)) / n
        worst = max(worst, abs(gap - mpmath.mpf(1) / n))
    return TWO_PI * float(worst)


def verify_ap_configuration(fam: CocycleFamily, cfg: APConfiguration, horizon: int, k_max: int = 6,
                            tol: float = 1e-12, strict: bool = True, precision: int = AP_PRECISION) -> APReport:
    """Follow the ``count`` equally spaced points for ``horizon`` direct steps
    and to the times ``m_k``, ``k <= k_max``, and measure how far the
    consecutive counterclockwise gaps drift from ``2 pi / count``.

    Each point is iterated on its own, carried as (arc index, arc coordinate)
    with a ``precision``-digit coordinate; see ``circle.apply_local``.
    """
    if fam.arcs != cfg.count:
        raise PreconditionError(f"family has {fam.arcs} arcs but the configuration has {cfg.count} points")
    n = cfg.count
    worst, first_bad = 0.0, None

    def check(t, points):
        nonlocal worst, first_bad
        dev = _spacing_deviation(points, n)
        worst = max(worst, dev)
        if first_bad is None and dev > tol:
            first_bad = t

    if n > 1:
        with mpmath.workdps(precision):
            base, pts = cfg.base, cfg.local_coordinates()
            check(0, pts)
            for t in range(1, horizon + 1):
                h = sigma(fam, base)
                pts = [circle.apply_local(h, n, q, u) for q, u in pts]
                base = add(base, 1)
                check(t, pts)
            for k in range(1, k_max + 1):
                h = m_k_map(fam, cfg.base, k)
                check(fam.schedule.m(k), [circle.apply_local(h, n, q, u) for q, u in cfg.local_coordinates()])
    report = APReport(cfg, horizon, k_max, worst, first_bad, tol)
    if strict and first_bad is not None:
        raise ConfigurationBroken(first_bad, worst)
    return report


# -- strong Li-Yorke evidence -----------------------------------------------------------


@dataclass
class LiYorkeEvidence:
    p1: FlowPoint
    p2: FlowPoint
    separation: float
    proximal_witnesses: List[Tuple[int, float]]
    recurrence_witnesses: List[Tuple[int, float]]
    eps_prox: float
    eps_rec: float
    k_max: int

    @property
    def separated(self):
        return self.separation > self.eps_prox

    @property
    def verdict(self):
        return self.separated and bool(self.proximal_witnesses) and bool(self.recurrence_witnesses)

    def to_dict(self):
        return {
            "p1": str(self.p1), "p2": str(self.p2), "separation": self.separation,
            "eps_prox": self.eps_prox, "eps_rec": self.eps_rec, "k_max": self.k_max,
            "separated": self.separated, "verdict": self.verdict,
            "proximal_witnesses": [[str(t), d] for t, d in self.proximal_witnesses],
            "recurrence_witnesses": [[str(t), d] for t, d in self.recurrence_witnesses],
        }


def scan_strong_li_yorke(fam: CocycleFamily, p1: FlowPoint, p2: FlowPoint, k_max: int,
                         eps_prox: float = DEFAULT_EPS_PROX, eps_rec: float = DEFAULT_EPS_REC) -> LiYorkeEvidence:
    """Look for proximality and joint recurrence of a same-fiber pair.

    Proximal witnesses come from ``proximal_trace`` (pairs over ``0^inf``);
    recurrence witnesses are the times ``m_k`` at which both points come back
    within ``eps_rec`` of themselves.
    """
    if p1.base != p2.base:
        raise PreconditionError("the pair must lie in one fiber")
    if not p1.base.is_zero:
        raise PreconditionError("proximal witnesses are computed in the fiber over 0^inf")
    prox = [(e.time, e.distance) for e in proximal_trace(fam, p1.fiber, p2.fiber, k_max).entries
            if e.distance < eps_prox]
    rec = []
    for k in range(1, k_max + 1):
        d = max(rho(fast_m_k(fam, p1, k), p1), rho(fast_m_k(fam, p2, k), p2))
        if d < eps_rec:
            rec.append((fam.schedule.m(k), d))
    return LiYorkeEvidence(p1, p2, rho(p1, p2), prox, rec, eps_prox, eps_rec, k_max)


# -- orbit density ----------------------------------------------------------------------


@dataclass
class DensityEntry:
    k: int
    cells_hit: int
    cells_total: int

    @property
    def coverage(self):
        return self.cells_hit / self.cells_total

    def to_dict(self):
        return {"k": self.k, "cells_hit": self.cells_hit, "cells_total": self.cells_total,
                "coverage": self.coverage}


@dataclass
class DensityReport:
    entries: List[DensityEntry]
    first_hit: dict
    params: dict

    @property
    def final_coverage(self):
        return self.entries[-1].coverage

    def to_dict(self):
        return {"params": self.params, "entries": [e.to_dict() for e in self.entries],
                "first_hit": {f"{c}:{b}": str(t) for (c, b), t in sorted(self.first_hit.items())}}


def orbit_density(fam: CocycleFamily, p: FlowPoint, base_prefix_len: int, fiber_bins: int, k_max: int,
                  sweep: Optional[int] = None, budget: int = DENSITY_BUDGET) -> DensityReport:
    """Cells (length-``base_prefix_len`` cylinder, fiber bin) visited by the orbit of ``p``.

    Anchors are ``p`` itself and, for ``kappa = 1 .. k_max``, the rotation
    bursts ``F^(s m_{2 kappa - 2}) p`` for ``1 <= s < 2^n_{2 kappa - 1}``
    (closed form; needs ``p`` over ``0^inf``).  From every anchor the orbit is
    followed for ``sweep`` direct steps (default: one pass over all
    cylinders).  Entry ``k`` counts the cells hit using bursts up to ``k``.
    Raises ``BudgetExceeded`` if that plan needs more than ``budget`` steps.
    """
    if k_max > 0 and not p.base.is_zero:
        raise PreconditionError("rotation bursts are computed from the fiber over 0^inf")
    sweep = (1 << base_prefix_len) if sweep is None else sweep
    anchors = 1 + sum((1 << fam.n(2 * kappa - 1)) - 1 for kappa in range(1, k_max + 1))
    if anchors * sweep > budget:
        raise BudgetExceeded(f"{anchors} anchors x {sweep} steps exceeds the density budget {budget}")
    total = (1 << base_prefix_len) * fiber_bins
    first_hit = {}

    def visit(t0, q):
        for d in range(sweep):
            cell = (q.base.low_value(base_prefix_len), min(int(float(q.fiber) * fiber_bins), fiber_bins - 1))
            t = t0 + d
            if cell not in first_hit or t < first_hit[cell]:
                first_hit[cell] = t
            q = step(fam, q)

    visit(0, p)
    entries = [DensityEntry(0, len(first_hit), total)]
    for kappa in range(1, k_max + 1):
        level = 2 * kappa - 1
        m = fam.schedule.m(level - 1)
        for s in range(1, (1 << fam.n(level))):
            visit(s * m, fast_zero_orbit(fam, p.fiber, level - 1, s))
        entries.append(DensityEntry(kappa, len(first_hit), total))
    params = {"family": fam.to_dict(), "start": str(p), "base_prefix_len": base_prefix_len,
              "fiber_bins": fiber_bins, "k_max": k_max, "sweep": sweep}
    return DensityReport(entries, first_hit, params)
