"""Cocycle families: the level maps phi(k, j) and their structural checks.

Odd levels ``2*kappa - 1`` carry rotations by ``theta_kappa = 1/(2^(n-1) - 1)``
turns; even levels ``2*kappa`` carry arc powers with exponent ``t_kappa``.
Index ``j = 0`` is the identity; ``1 <= j <= 2^(n-1) - 1`` selects the map and
the remaining indices up to ``2^n - 2`` select its inverse, so every level
contains equally many copies of the map and of its inverse.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import circle
from .circle import IDENTITY, ArcPower, CircleHomeo, Rotation
from .errors import IndexOutOfRange, ValidationFailure
from .odometer import BlockSchedule

T_KINDS = ("one_plus_pow2", "count_scaled", "explicit", "identity")


@dataclass(frozen=True)
class TRule:
    """How the even-level exponents ``t_kappa > 1`` are chosen.

    ``one_plus_pow2``
        ``t = 1 + 2^-kappa``.
    ``count_scaled``
        ``t = 1 + rate * kappa / (2^(n_{2 kappa} - 1) - 1)``, so the
        exponent reached after a full positive branch is about
        ``exp(rate * kappa)`` and grows without bound.
    ``explicit``
        ``values[kappa - 1]``; past the list the excess over 1 halves each level.
    ``identity``
        ``t = 1`` (no fiber contraction; for baselines only).
    """

    kind: str = "one_plus_pow2"
    rate: float = 1.0
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in T_KINDS:
            raise ValueError(f"unknown t rule {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind == "explicit" and (not self.values or min(self.values) <= 1.0):
            raise ValueError("explicit t values must be a nonempty list of numbers > 1")
        if self.kind == "count_scaled" and self.rate <= 0:
            raise ValueError("count_scaled rate must be positive")

    def excess(self, kappa: int, schedule: BlockSchedule) -> float:
        """``t_kappa - 1``, computed without cancellation."""
        if self.kind == "one_plus_pow2":
            return math.ldexp(1.0, -kappa)
        if self.kind == "count_scaled":
            return self.rate * kappa / schedule.half(2 * kappa)
        if self.kind == "explicit":
            K = len(self.values)
            if kappa <= K:
                return self.values[kappa - 1] - 1.0
            return math.ldexp(self.values[-1] - 1.0, K - kappa)
        return 0.0

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "count_scaled":
            d["rate"] = self.rate
        if self.kind == "explicit":
            d["values"] = list(self.values)
        return d


@dataclass(frozen=True)
class CocycleFamily:
    """The family ``Phi = {phi_k^j}`` determined by a handful of parameters.

    ``branch_rule="printed"`` reads the strict inequality ``1 < j`` literally,
    leaving ``j = 1`` as the identity; such families break the cancellation
    condition and exist to exercise the validator.
    """

    schedule: BlockSchedule
    t_rule: TRule = field(default_factory=TRule)
    arcs: int = 1
    rotation_rule: str = "C4"
    branch_rule: str = "inclusive"

    def __post_init__(self):
        if self.arcs < 1:
            raise ValueError("arc count must be positive")
        if self.rotation_rule not in ("C4", "identity"):
            raise ValueError(f"unknown rotation rule {self.rotation_rule!r}")
        if self.branch_rule not in ("inclusive", "printed"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "CocycleFamily":
        t = dict(d.get("t", {"kind": "one_plus_pow2"}))
        return cls(
            schedule=BlockSchedule(tuple(d["schedule"]), d.get("schedule_extension", "repeat_last")),
            t_rule=TRule(t.get("kind", "one_plus_pow2"), t.get("rate", 1.0), tuple(t.get("values", ()))),
            arcs=int(d.get("arcs", 1)),
            rotation_rule=d.get("rotation_rule", "C4"),
            branch_rule=d.get("branch_rule", "inclusive"),
        )

    def to_dict(self) -> dict:
        return {
            "schedule": list(self.schedule.blocks),
            "schedule_extension": self.schedule.extension,
            "t": self.t_rule.to_dict(),
            "arcs": self.arcs,
            "rotation_rule": self.rotation_rule,
            "branch_rule": self.branch_rule,
        }

    # -- parameters --

    def n(self, k: int) -> int:
        return self.schedule.n(k)

    def max_index(self, k: int) -> int:
        """Largest admissible ``j`` at level ``k``: ``2^n_k - 2``."""
        return (1 << self.n(k)) - 2

    def theta(self, kappa: int) -> Fraction:
        """Rotation step of level ``2 kappa - 1`` in turns."""
        return Fraction(1, self.schedule.half(2 * kappa - 1))

    def t(self, kappa: int) -> float:
        return 1.0 + self.t_rule.excess(kappa, self.schedule)

    def log_t(self, kappa: int) -> float:
        return math.log1p(self.t_rule.excess(kappa, self.schedule))

    def level_map(self, k: int) -> CircleHomeo:
        """The map selected by the first branch of level ``k`` (its inverse is the second)."""
        if k % 2 == 1:
            if self.rotation_rule == "identity":
                return IDENTITY
            return circle.rotation(self.theta((k + 1) // 2))
        return circle.arc_power(self.arcs, self.log_t(k // 2))

    def branch(self, k: int, j: int) -> int:
        """+1 for the map, -1 for its inverse, 0 for the identity."""
        if j < 0 or j > self.max_index(k):
            raise IndexOutOfRange(f"index {j} outside 0..{self.max_index(k)} at level {k}")
        if j == 0 or (j == 1 and self.branch_rule == "printed"):
            return 0
        return 1 if j <= self.schedule.half(k) else -1

    def branch_counts(self, k: int, lo: int, hi: int) -> Tuple[int, int]:
        """How many ``j`` in ``[lo, hi]`` select the map and the inverse."""
        if hi < lo:
            return 0, 0
        H = self.schedule.half(k)
        first = 2 if self.branch_rule == "printed" else 1
        plus = max(0, min(hi, H) - max(lo, first) + 1)
        minus = max(0, min(hi, 2 * H) - max(lo, H + 1) + 1)
        return plus, minus

    def phi(self, k: int, j: int) -> CircleHomeo:
        b = self.branch(k, j)
        if b == 0:
            return IDENTITY
        h = self.level_map(k)
        return h if b > 0 else circle.invert(h)

    def segment(self, k: int, lo: int, hi: int) -> CircleHomeo:
        """``phi_k^hi o ... o phi_k^lo`` in closed form (identity if ``hi < lo``).

        All maps of one level commute, so only the net branch count matters.
        """
        plus, minus = self.branch_counts(k, lo, hi)
        return circle.power(self.level_map(k), plus - minus)

    def net_count(self, k: int, e: int) -> int:
        """Net power ``c_k`` of ``phi_k^(e-1) o ... o phi_k^0`` (0 when ``e = 0``)."""
        plus, minus = self.branch_counts(k, 0, e - 1)
        return plus - minus


def phi(fam: CocycleFamily, k: int, j: int) -> CircleHomeo:
    return fam.phi(k, j)


def reference_family() -> CocycleFamily:
    """Schedule 3,3,4,4,5,5,... with ``t = 1 + 2^-kappa`` on a single arc."""
    return CocycleFamily(BlockSchedule((3, 3, 4, 4), "arithmetic"), TRule("one_plus_pow2"), arcs=1)


# Rate 10 puts t_3 at 3, so the full positive branch at level 6 contracts by an
# exponent 3^15 ~ 1.4e7; levels 7+ jump to 64-digit blocks so the rotations
# there stay far below the distortion built up by levels 1..6.
_PRESET_SCHEDULE = BlockSchedule((3, 3, 4, 4, 5, 5, 64, 64), "geometric")

PRESETS = {
    "proximal-c5": CocycleFamily(_PRESET_SCHEDULE, TRule("count_scaled", rate=10.0), arcs=1),
    "almost-proximal-c6-n3": CocycleFamily(_PRESET_SCHEDULE, TRule("count_scaled", rate=10.0), arcs=3),
    "reference": reference_family(),
}


def preset(name: str) -> CocycleFamily:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# -- validation ------------------------------------------------------------------


@dataclass
class LevelCheck:
    level: int
    kind: str
    c1_sup: float
    c2_ok: bool
    c3_deviation: float
    c3_literal: bool

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class ValidationReport:
    levels: List[LevelCheck]
    c1_decreasing: bool
    failures: List[Tuple[str, Optional[int], str]]
    samples: int
    tol: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def raise_if_failed(self):
        if self.failures:
            cond, level, msg = self.failures[0]
            raise ValidationFailure(cond, level, msg)

    def to_dict(self):
        return {
            "ok": self.ok,
            "samples": self.samples,
            "tol": self.tol,
            "c1_decreasing": self.c1_decreasing,
            "levels": [lc.to_dict() for lc in self.levels],
            "failures": [list(f) for f in self.failures],
        }


def _literal_composite(fam, k):
    h = IDENTITY
    for j in range(fam.max_index(k) + 1):
        h = circle.compose(fam.phi(k, j), h)
    return h


def validate_family(fam: CocycleFamily, levels: int = 6, samples: int = 64, tol: float = 1e-12,
                    strict: bool = False, literal_limit: int = 10) -> ValidationReport:
    """Check the level maps against C1 (decay), C2 (``phi_k^0 = id``) and C3
    (each level's full composite is the identity).

    C1 is judged per family of maps: the rotation levels and the power levels
    must each show strictly decreasing sup-distance to the identity (a family
    that is already identically the identity also passes).  The C3 composite
    is built map by map when ``n_k <= literal_limit`` and from branch counts
    otherwise.
    """
    grid = circle.sample_grid(samples)
    checks = []
    failures = []
    for k in range(1, levels + 1):
        h = fam.level_map(k)
        c1 = circle.sup_distance_to_identity(h, samples)
        c2 = fam.phi(k, 0) == IDENTITY
        literal = fam.n(k) <= literal_limit
        psi = _literal_composite(fam, k) if literal else fam.segment(k, 0, fam.max_index(k))
        dev = float(np.max(circle.arc_metric(circle.apply(psi, grid), grid)))
        kind = "rotation" if k % 2 else "power"
        checks.append(LevelCheck(k, kind, c1, c2, dev, literal))
        if not c2:
            failures.append(("C2", k, "phi_k^0 is not the identity"))
        if not dev <= tol:
            failures.append(("C3", k, f"full composite deviates by {dev:.3e} > {tol:.1e}"))
    decreasing = True
    for kind in ("rotation", "power"):
        seq = [c.c1_sup for c in checks if c.kind == kind]
        for lvl, (a, b) in zip([c.level for c in checks if c.kind == kind][1:], zip(seq, seq[1:])):
            if not (b < a or a == b == 0.0):
                decreasing = False
                failures.append(("C1", lvl, f"{kind} sup-distance {b:.3e} does not decrease from {a:.3e}"))
                break
    report = ValidationReport(checks, decreasing, failures, samples, tol)
    if strict:
        report.raise_if_failed()
    return report
