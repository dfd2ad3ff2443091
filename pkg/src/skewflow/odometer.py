"""The dyadic odometer Z(2): exact points, +1 with carry, block structure.

A point is an infinite binary sequence ``a_1 a_2 a_3 ...`` stored as a finite
prefix followed by a periodic tail word.  The all-zeros and all-ones tails are
the period-one words ``(0,)`` and ``(1,)``.  Digit 1 is the least significant
one, so adding 1 flips ``a_1`` and carries to the right.

Textual literals::

    "110*0"   prefix 110, then zeros forever
    "*1"      all ones
    "01(10)"  prefix 01, then 10 10 10 ...
"""

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .errors import OutOfRange, SearchLimitExceeded

Bits = Tuple[int, ...]

ZEROS: Bits = (0,)
ONES: Bits = (1,)


def _primitive(word: Bits) -> Bits:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return word[:p]
    return word


def _rotate(word: Bits, r: int) -> Bits:
    r %= len(word)
    return word[r:] + word[:r]


def _bits_of(value: int, width: int) -> Bits:
    return tuple((value >> i) & 1 for i in range(width))


@dataclass(frozen=True)
class OdometerPoint:
    """A point of Z(2) in canonical prefix/tail form.

    Canonicalization reduces the tail to its primitive period and absorbs any
    trailing prefix digits that already follow the tail rule, so two points
    are equal (as dataclasses) iff they agree digit by digit.
    """

    prefix: Bits = ()
    tail: Bits = ZEROS

    def __post_init__(self):
        prefix = tuple(int(b) for b in self.prefix)
        tail = tuple(int(b) for b in self.tail)
        if not tail:
            raise ValueError("tail word must be nonempty")
        if any(b not in (0, 1) for b in prefix + tail):
            raise ValueError("digits must be 0 or 1")
        tail = _primitive(tail)
        while prefix and prefix[-1] == tail[-1]:
            prefix = prefix[:-1]
            tail = _rotate(tail, -1)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def zero(cls) -> "OdometerPoint":
        return cls((), ZEROS)

    @classmethod
    def ones(cls) -> "OdometerPoint":
        return cls((), ONES)

    @classmethod
    def from_int(cls, n: int) -> "OdometerPoint":
        """The image of the integer ``n`` (negative values allowed)."""
        return add(cls.zero(), n)

    @classmethod
    def parse(cls, text: str) -> "OdometerPoint":
        m = _LITERAL.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"bad odometer literal {text!r}")
        prefix = tuple(int(c) for c in m.group(1))
        if m.group(2) is not None:
            tail = (int(m.group(2)),)
        elif m.group(3) is not None:
            tail = tuple(int(c) for c in m.group(3))
        else:
            tail = ZEROS
        return cls(prefix, tail)

    def __str__(self):
        p = "".join(map(str, self.prefix))
        if len(self.tail) == 1:
            return f"{p}*{self.tail[0]}"
        return f"{p}({''.join(map(str, self.tail))})"

    @property
    def is_all_ones(self) -> bool:
        return not self.prefix and self.tail == ONES

    @property
    def is_zero(self) -> bool:
        return not self.prefix and self.tail == ZEROS

    def digit(self, i: int) -> int:
        """Digit ``a_i`` for ``i >= 1``."""
        if i < 1:
            raise IndexError("digits are indexed from 1")
        L = len(self.prefix)
        if i <= L:
            return self.prefix[i - 1]
        return self.tail[(i - L - 1) % len(self.tail)]

    def digits(self, start: int, stop: int) -> Bits:
        """Digits ``a_start .. a_stop`` inclusive."""
        return tuple(self.digit(i) for i in range(start, stop + 1))

    def low_value(self, n: int) -> int:
        """e(a_1 ... a_n): the integer encoded by the first ``n`` digits."""
        if n <= 0:
            return 0
        return eval_e(self.digits(1, n))

    def tail_from(self, i: int) -> "OdometerPoint":
        """The shifted point ``a_i a_{i+1} ...``."""
        L = len(self.prefix)
        if i <= L:
            return OdometerPoint(self.prefix[i - 1:], self.tail)
        return OdometerPoint((), _rotate(self.tail, i - L - 1))

    def with_low_digits(self, bits: Sequence[int]) -> "OdometerPoint":
        """Replace ``a_1 .. a_len(bits)`` by ``bits``, keeping the rest."""
        rest = self.tail_from(len(bits) + 1)
        return OdometerPoint(tuple(bits) + rest.prefix, rest.tail)


_LITERAL = re.compile(r"([01]*)(?:\*([01])|\(([01]+)\))?")


def tau(p: OdometerPoint) -> OdometerPoint:
    """The odometer map: add 1 at digit 1, carrying to the right."""
    return add(p, 1)


def add(p: OdometerPoint, m: int) -> OdometerPoint:
    """``tau^m(p)`` for any integer ``m``, by exact binary addition."""
    m = int(m)
    if m == 0:
        return p
    L = len(p.prefix)
    N = max(L, abs(m).bit_length() + 1) + len(p.tail) + 1
    v = p.low_value(N) + m
    low = v & ((1 << N) - 1)
    carry = v >> N
    rest = _rotate(p.tail, N - L)
    extra: Bits = ()
    if carry == 1:
        if rest == ONES:
            rest = ZEROS
        else:
            idx = rest.index(0)
            extra = (0,) * idx + (1,)
            rest = _rotate(rest, idx + 1)
    elif carry == -1:
        if rest == ZEROS:
            rest = ONES
        else:
            idx = rest.index(1)
            extra = (1,) * idx + (0,)
            rest = _rotate(rest, idx + 1)
    return OdometerPoint(_bits_of(low, N) + extra, rest)


def first_difference(p: OdometerPoint, q: OdometerPoint) -> Optional[int]:
    """Smallest ``i`` with ``p_i != q_i``, or ``None`` if ``p == q``."""
    if p == q:
        return None
    horizon = max(len(p.prefix), len(q.prefix)) + math.lcm(len(p.tail), len(q.tail))
    for i in range(1, horizon + 1):
        if p.digit(i) != q.digit(i):
            return i
    raise AssertionError("unequal canonical points agree on a full period")


def metric_d(p: OdometerPoint, q: OdometerPoint) -> float:
    """d(p, q) = 1 / (first index where the digits differ); 0 if equal."""
    i = first_difference(p, q)
    return 0.0 if i is None else 1.0 / i


def eval_e(word: Sequence[int]) -> int:
    """Least-significant-first binary value x_1 + 2 x_2 + 4 x_3 + ..."""
    if not word:
        return 0
    return int("".join(str(int(b)) for b in reversed(word)), 2)


def unval(n: int, width: int) -> Bits:
    """The width-``width`` word ``w`` with ``eval_e(w) == n``."""
    if width < 1:
        raise ValueError("width must be positive")
    if n < 0 or n >= 1 << width:
        raise OutOfRange(f"{n} does not fit in {width} bits")
    return _bits_of(n, width)


@dataclass(frozen=True)
class BlockSchedule:
    """Block lengths ``n_1, n_2, ...`` cutting a point into words.

    Only ``blocks`` is stored; levels past the end follow ``extension``:

    ``repeat_last``
        ``n_i = n_K``.
    ``arithmetic``
        ``n_i = n_{i-2} + 1`` (pairs of levels grow by one: 3,3,4,4 -> 5,5,...).
    ``geometric``
        ``n_i = 2 n_{i-2}``.
    """

    blocks: Tuple[int, ...]
    extension: str = "repeat_last"
    _cache: list = field(default_factory=list, init=False, repr=False, compare=False, hash=False)

    EXTENSIONS = ("repeat_last", "arithmetic", "geometric")

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("schedule needs at least one block")
        if self.extension not in self.EXTENSIONS:
            raise ValueError(f"unknown schedule extension {self.extension!r}")
        if min(blocks) < 2:
            raise ValueError("block lengths must be >= 2")
        if any(b > a for a, b in zip(blocks[1:], blocks)):
            raise ValueError("block lengths must be nondecreasing")
        if 2 in blocks:
            warnings.warn("block length 2 makes the odd-level rotation trivial", stacklevel=3)
        self._cache.extend(blocks)

    def n(self, k: int) -> int:
        """Length of block ``k`` (1-based)."""
        if k < 1:
            raise IndexError("levels are indexed from 1")
        cache = self._cache
        lag = 2 if len(self.blocks) >= 2 else 1
        while len(cache) < k:
            prev = cache[-lag]
            if self.extension == "repeat_last":
                cache.append(cache[-1])
            elif self.extension == "arithmetic":
                cache.append(prev + 1)
            else:
                cache.append(2 * prev)
        return cache[k - 1]

    def offset(self, k: int) -> int:
        """n_1 + ... + n_k (0 for k = 0)."""
        return sum(self.n(i) for i in range(1, k + 1))

    def m(self, k: int) -> int:
        """The return time m_k = 2^offset(k), as an exact integer."""
        return 1 << self.offset(k)

    def half(self, k: int) -> int:
        """2^(n_k - 1) - 1: the size of each branch of level ``k``."""
        return (1 << (self.n(k) - 1)) - 1

    def block_of_digit(self, i: int) -> int:
        """Index of the block containing digit ``i``."""
        k, off = 1, 0
        while True:
            off += self.n(k)
            if i <= off:
                return k
            k += 1


def block_at(p: OdometerPoint, s: BlockSchedule, k: int) -> Bits:
    """The ``k``-th block of ``p`` (width ``n_k``)."""
    start = s.offset(k - 1) + 1
    return p.digits(start, start + s.n(k) - 1)


def first_zero_block(p: OdometerPoint, s: BlockSchedule, search_limit: int = 10_000) -> Optional[int]:
    """Index of the first block of ``p`` containing a 0; ``None`` for 1^inf."""
    if p.is_all_ones:
        return None
    if 0 in p.prefix:
        i0 = p.prefix.index(0) + 1
    else:
        i0 = len(p.prefix) + p.tail.index(0) + 1
    # cheap bound first: blocks are at least 2 wide
    if i0 > 2 * search_limit and s.offset(search_limit) < i0:
        raise SearchLimitExceeded(f"first zero digit {i0} lies beyond block {search_limit}")
    k = s.block_of_digit(i0)
    if k > search_limit:
        raise SearchLimitExceeded(f"first zero block {k} exceeds search limit {search_limit}")
    return k
