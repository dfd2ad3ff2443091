"""Circle points and a closed-form algebra of circle homeomorphisms.

Points of the circle are stored as a fraction of a full turn in ``[0, 1)``.
Distances are arc lengths on a circle of circumference ``2*pi``.

Three families are closed under composition and integer powers:

* ``Rotation(r)``: ``x -> x + r (mod 1)``, with ``r`` an exact ``Fraction``.
* ``ArcPower(n, s)``: cut the circle into ``n`` equal arcs and, on each arc
  with local coordinate ``u`` in ``[0, 1)``, apply ``u -> u**exp(s)``.
  Exponents multiply under composition, so the log-exponents add.
* ``Identity``.

Anything else is a ``Chain`` of these, applied right to left.  Powers of an
``ArcPower`` are stored as ``(log_step, count)`` with an integer count, so
equal numbers of a map and its inverse cancel exactly rather than to
rounding.
"""

import contextlib
import contextvars
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

import mpmath
import numpy as np

from .errors import UnsupportedChain

TWO_PI = 2.0 * math.pi

_ops = contextvars.ContextVar("skewflow_ops", default=None)


class OpCounter:
    """Tally of closed-form homeomorphism operations (see ``count_ops``)."""

    def __init__(self):
        self.by_kind = {}

    @property
    def total(self):
        return sum(self.by_kind.values())

    def __repr__(self):
        return f"OpCounter({self.by_kind})"


@contextlib.contextmanager
def count_ops():
    """Count compose/power/invert/apply calls made inside the block."""
    counter = OpCounter()
    token = _ops.set(counter)
    try:
        yield counter
    finally:
        _ops.reset(token)


def _tick(kind):
    counter = _ops.get()
    if counter is not None:
        counter.by_kind[kind] = counter.by_kind.get(kind, 0) + 1


def normalize(x):
    """Reduce an angle (turns) into ``[0, 1)``; arrays are handled elementwise."""
    if isinstance(x, (Fraction, mpmath.mpf)):
        return x % 1
    if isinstance(x, np.ndarray):
        y = np.mod(x, 1.0)
        return np.where(y >= 1.0, 0.0, y)
    y = float(x) % 1.0
    return 0.0 if y >= 1.0 else y


def arc_metric(a, b):
    """Arc length between two angles, in radians, in ``[0, pi]``."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
        return TWO_PI * np.minimum(d, 1.0 - d)
    d = (a - b) % 1
    return TWO_PI * float(min(d, 1 - d))


# -- homeomorphism families ---------------------------------------------------


@dataclass(frozen=True)
class Identity:
    def __str__(self):
        return "id"


@dataclass(frozen=True)
class Rotation:
    turns: Fraction

    def __post_init__(self):
        t = self.turns
        if not isinstance(t, Fraction):
            t = Fraction(t)
        object.__setattr__(self, "turns", t % 1)

    def __str__(self):
        return f"R({self.turns})"


@dataclass(frozen=True)
class ArcPower:
    """On each of ``arcs`` arcs, ``u -> u ** exp(log_step * count)``."""

    arcs: int
    log_step: float
    count: int = 1

    def __post_init__(self):
        if int(self.arcs) < 1:
            raise ValueError("arc count must be positive")
        object.__setattr__(self, "arcs", int(self.arcs))
        step, count = float(self.log_step), int(self.count)
        if step < 0:
            step, count = -step, -count
        object.__setattr__(self, "log_step", step)
        object.__setattr__(self, "count", count)

    @property
    def log_exponent(self) -> float:
        if self.count == 0 or self.log_step == 0.0:
            return 0.0
        try:
            return self.log_step * self.count
        except OverflowError:
            return math.copysign(math.inf, self.count)

    @property
    def exponent(self) -> float:
        s = self.log_exponent
        if s > 709.0:
            return math.inf
        return math.exp(s)

    @property
    def is_trivial(self) -> bool:
        return self.count == 0 or self.log_step == 0.0

    def __str__(self):
        return f"P{self.arcs}(exp({self.log_step:.6g}*{self.count}))"


@dataclass(frozen=True)
class Chain:
    """Composite ``maps[0] o maps[1] o ... o maps[-1]`` (last applied first)."""

    maps: Tuple[Union[Identity, Rotation, ArcPower], ...]

    def __str__(self):
        return " o ".join(str(m) for m in self.maps)


CircleHomeo = Union[Identity, Rotation, ArcPower, Chain]

IDENTITY = Identity()


def rotation(turns) -> CircleHomeo:
    """Rotation by ``turns`` (Fraction, int, str or float), simplified."""
    r = Rotation(turns)
    return IDENTITY if r.turns == 0 else r


def arc_power(arcs: int, log_exponent: float, count: int = 1) -> CircleHomeo:
    h = ArcPower(arcs, log_exponent, count)
    return IDENTITY if h.is_trivial else h


def _simplify_atom(h):
    if isinstance(h, Rotation) and h.turns == 0:
        return IDENTITY
    if isinstance(h, ArcPower) and h.is_trivial:
        return IDENTITY
    return h


def _merge(a, b):
    """Closed-form ``a o b`` for two atoms of one family, else ``None``."""
    if isinstance(a, Rotation) and isinstance(b, Rotation):
        return Rotation(a.turns + b.turns)
    if isinstance(a, ArcPower) and isinstance(b, ArcPower) and a.arcs == b.arcs:
        if a.log_step == b.log_step:
            return ArcPower(a.arcs, a.log_step, a.count + b.count)
        return ArcPower(a.arcs, a.log_exponent + b.log_exponent, 1)
    return None


def _atoms(h):
    if isinstance(h, Chain):
        return list(h.maps)
    if isinstance(h, Identity):
        return []
    return [h]


def _build(atoms) -> CircleHomeo:
    out = []
    for a in atoms:
        a = _simplify_atom(a)
        if isinstance(a, Identity):
            continue
        if out:
            merged = _merge(out[-1], a)
            if merged is not None:
                merged = _simplify_atom(merged)
                out.pop()
                if not isinstance(merged, Identity):
                    out.append(merged)
                continue
        out.append(a)
    if not out:
        return IDENTITY
    if len(out) == 1:
        return out[0]
    return Chain(tuple(out))


def compose(outer: CircleHomeo, inner: CircleHomeo) -> CircleHomeo:
    """``outer o inner``; same-family neighbours are merged in closed form."""
    _tick("compose")
    return _build(_atoms(outer) + _atoms(inner))


def compose_all(*maps: CircleHomeo) -> CircleHomeo:
    """``maps[0] o maps[1] o ... o maps[-1]``."""
    _tick("compose")
    atoms = []
    for h in maps:
        atoms.extend(_atoms(h))
    return _build(atoms)


def invert(h: CircleHomeo) -> CircleHomeo:
    _tick("invert")
    if isinstance(h, Identity):
        return h
    if isinstance(h, Rotation):
        return Rotation(-h.turns)
    if isinstance(h, ArcPower):
        return ArcPower(h.arcs, h.log_step, -h.count)
    return _build([invert(a) for a in reversed(h.maps)])


def power(h: CircleHomeo, c: int) -> CircleHomeo:
    """``h`` composed with itself ``c`` times (``c`` may be negative or huge)."""
    _tick("power")
    c = int(c)
    if isinstance(h, Identity) or c == 0:
        return IDENTITY
    if isinstance(h, Rotation):
        return _simplify_atom(Rotation(h.turns * c))
    if isinstance(h, ArcPower):
        return _simplify_atom(ArcPower(h.arcs, h.log_step, h.count * c))
    raise UnsupportedChain("power() needs a single-family map; compose chains iteratively")


# -- evaluation ----------------------------------------------------------------


def _apply_rotation(r: Rotation, x):
    if isinstance(x, Fraction):
        return (x + r.turns) % 1
    if isinstance(x, mpmath.mpf):
        return (x + mpmath.mpf(r.turns.numerator) / r.turns.denominator) % 1
    return normalize(x + float(r.turns))


def _apply_arc_power(h: ArcPower, x):
    n = h.arcs
    t = h.exponent
    if isinstance(x, np.ndarray):
        y = np.asarray(x, dtype=float) * n
        q = np.floor(y)
        u = np.clip(y - q, 0.0, 1.0)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            v = np.power(u, t)
        v = np.where(u == 0.0, 0.0, v)
        # rounding must not carry a point onto the next arc
        return normalize(np.minimum((q + v) / n, np.nextafter((q + 1) / n, 0.0)))
    if isinstance(x, mpmath.mpf):
        return _apply_arc_power_mp(h, x)
    y = float(x) * n
    q = math.floor(y)
    u = min(max(y - q, 0.0), 1.0)
    if u == 0.0:
        v = 0.0
    else:
        try:
            v = u ** t
        except OverflowError:
            v = 0.0
    return normalize(min((q + v) / n, math.nextafter((q + 1) / n, 0.0)))


def _apply_arc_power_mp(h: ArcPower, x):
    n = h.arcs
    y = x * n
    q = mpmath.floor(y)
    u = y - q
    if u == 0:
        return q / n % 1
    t = mpmath.exp(mpmath.mpf(h.log_step) * h.count)
    return ((q + u ** t) / n) % 1


def apply(h: CircleHomeo, x):
    """Evaluate ``h`` at an angle: float, Fraction, ``mpmath.mpf``, or a numpy
    array of floats.

    Fractions stay exact under rotations (an ``ArcPower`` converts them to
    float); ``mpf`` inputs are evaluated at the current mpmath precision.
    """
    _tick("apply")
    return _eval(h, x)


def _eval(h, x):
    if isinstance(h, Identity):
        return x
    if isinstance(h, Rotation):
        return _apply_rotation(h, x)
    if isinstance(h, ArcPower):
        if h.is_trivial:
            return x
        return _apply_arc_power(h, x)
    for a in reversed(h.maps):
        x = _eval(a, x)
    return x


def sample_grid(samples: int) -> np.ndarray:
    """``samples`` equally spaced angles ``j / samples``."""
    return np.arange(samples, dtype=float) / samples


def sup_distance(f: CircleHomeo, g: CircleHomeo, samples: int = 1024) -> float:
    """Max arc distance between ``f`` and ``g`` over a uniform grid."""
    x = sample_grid(samples)
    return float(np.max(arc_metric(_eval(f, x), _eval(g, x))))


def sup_distance_to_identity(h: CircleHomeo, samples: int = 1024) -> float:
    """Sup of the arc displacement of ``h``.

    Exact for rotations and arc powers; grid-sampled for chains.
    """
    if isinstance(h, Identity):
        return 0.0
    if isinstance(h, Rotation):
        return arc_metric(h.turns, Fraction(0))
    if isinstance(h, ArcPower):
        # max |u^t - u| sits at u = t^(-1/(t-1)); the inverse map has the same max
        lt = abs(h.log_exponent)
        if lt == 0.0:
            return 0.0
        if math.isinf(lt):
            return TWO_PI / h.arcs
        u = math.exp(-lt / math.expm1(lt))
        return TWO_PI / h.arcs * u * -math.expm1(-lt)
    return sup_distance(h, IDENTITY, samples)


# -- arc-local coordinates -----------------------------------------------------


def apply_local(h: CircleHomeo, arcs: int, q: int, u):
    """Evaluate ``h`` at the point ``(q + u) / arcs`` kept as the pair ``(q, u)``.

    ``q`` is the arc index and ``u`` in ``[0, 1)`` the coordinate inside the
    arc (float or ``mpf``).  Keeping them apart means a point squeezed to
    ``u ~ 1e-100`` by an arc power keeps its relative precision, which the
    single number ``x`` cannot do.  Every ``ArcPower`` in ``h`` must use
    ``arcs`` arcs.  Returns the new ``(q, u)``.
    """
    _tick("apply")
    for a in reversed(_atoms(h)):
        if isinstance(a, Rotation):
            shift = a.turns * arcs
            whole = shift.numerator // shift.denominator
            frac = shift - whole
            if isinstance(u, mpmath.mpf):
                u = u + mpmath.mpf(frac.numerator) / frac.denominator
            else:
                u = u + float(frac)
            if u >= 1:
                u -= 1
                whole += 1
            q = (q + whole) % arcs
        elif isinstance(a, ArcPower):
            if a.arcs != arcs:
                raise ValueError(f"map acts on {a.arcs} arcs, point is split into {arcs}")
            if a.is_trivial or u == 0:
                continue
            if isinstance(u, mpmath.mpf):
                u = u ** mpmath.exp(mpmath.mpf(a.log_step) * a.count)
            else:
                try:
                    u = u ** a.exponent
                except OverflowError:
                    u = 0.0
    return q, u
