"""
Finite Integer Sets and Iterated Sumsets

Exact arithmetic on finite sets of integers:
- IntSet: immutable, sorted, deduplicated int64 elements
- two sumset engines that must always agree:
    dense  - boolean mask over [0, span], OR of shifted copies
    sparse - all pairwise sums, sorted and deduplicated
- h-fold sumsets computed incrementally, with a per-base fold cache
- growth profiles |hA| for h = 1..h_max
- set literal parsing ("0,1,3") and one-set-per-line files

Elements live in int64 arrays. Every operation that creates new elements
checks the resulting range with Python integers first and raises
SumsetOverflowError instead of wrapping around.
"""

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    BudgetExceeded,
    EmptySetError,
    ParseError,
    PreconditionViolation,
    SumsetOverflowError,
)

logger = logging.getLogger(__name__)

# ============================================================================
# Configuration
# ============================================================================
DEFAULT_DENSE_BITS = 2 ** 27
DEFAULT_SPARSE_MAX_ELEMS = 2 ** 22
FOLD_CACHE_SIZE = 64

INT64_MIN = int(np.iinfo(np.int64).min)
INT64_MAX = int(np.iinfo(np.int64).max)


@dataclass(frozen=True)
class Budget:
    """Resource ceiling for one materialization.

    dense_bits bounds the mask length of the dense engine (span + 1),
    sparse_max_elems bounds the number of pairwise sums the sparse engine
    may generate before deduplication.
    """

    dense_bits: int = DEFAULT_DENSE_BITS
    sparse_max_elems: int = DEFAULT_SPARSE_MAX_ELEMS

    def __post_init__(self):
        if self.dense_bits < 1 or self.sparse_max_elems < 1:
            raise PreconditionViolation(
                f"budgets must be positive (dense_bits={self.dense_bits}, "
                f"sparse_max_elems={self.sparse_max_elems})"
            )

    def allows_dense(self, span: int) -> bool:
        return span + 1 <= self.dense_bits

    def allows_sparse(self, candidates: int) -> bool:
        return candidates <= self.sparse_max_elems


DEFAULT_BUDGET = Budget()


def check_range(lo: int, hi: int, operands: List, operation: str) -> None:
    if lo < INT64_MIN or hi > INT64_MAX:
        names = ', '.join(_describe(op) for op in operands)
        raise SumsetOverflowError(
            f"{operation} leaves the int64 range ([{lo}, {hi}]) for operands {names}",
            operands=operands,
        )


def _describe(value) -> str:
    if isinstance(value, IntSet):
        return repr(value)
    return str(value)


# ============================================================================
# IntSet
# ============================================================================

class IntSet:
    """A nonempty finite set of integers, stored sorted and deduplicated.

    The constructor trusts its input (sorted, unique, int64); build sets
    from arbitrary values with from_elements().
    """

    __slots__ = ('_elements', '_key')

    def __init__(self, elements: np.ndarray):
        arr = np.array(elements, dtype=np.int64, copy=True)
        if arr.size == 0:
            raise EmptySetError("an IntSet needs at least one element")
        arr.setflags(write=False)
        self._elements = arr
        self._key: Optional[bytes] = None

    @property
    def elements(self) -> np.ndarray:
        return self._elements

    @property
    def min(self) -> int:
        return int(self._elements[0])

    @property
    def max(self) -> int:
        return int(self._elements[-1])

    @property
    def diameter(self) -> int:
        return self.max - self.min

    @property
    def gcd(self) -> int:
        """gcd of all differences; 0 for a singleton."""
        check_range(0, self.diameter, [self], 'gcd')
        return int(np.gcd.reduce(self._elements - self._elements[0]))

    @property
    def key(self) -> bytes:
        if self._key is None:
            self._key = self._elements.tobytes()
        return self._key

    def tolist(self) -> List[int]:
        return self._elements.tolist()

    def is_normalized(self) -> bool:
        return self.min == 0 and (len(self) == 1 or self.gcd == 1)

    def issubset(self, other: 'IntSet') -> bool:
        return bool(np.isin(self._elements, other._elements, assume_unique=True).all())

    def translated(self, t: int) -> 'IntSet':
        t = int(t)
        check_range(self.min + t, self.max + t, [self, t], 'translate')
        return IntSet(self._elements + t)

    def scaled(self, c: int) -> 'IntSet':
        c = int(c)
        if c == 0:
            raise PreconditionViolation("scale factor must be nonzero")
        ends = (self.min * c, self.max * c)
        check_range(min(ends), max(ends), [self, c], 'scale')
        scaled = self._elements * c
        return IntSet(scaled if c > 0 else scaled[::-1])

    def __len__(self) -> int:
        return int(self._elements.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self._elements.tolist())

    def __contains__(self, value) -> bool:
        value = int(value)
        if value < self.min or value > self.max:
            return False
        i = int(np.searchsorted(self._elements, value))
        return int(self._elements[i]) == value

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntSet):
            return NotImplemented
        return np.array_equal(self._elements, other._elements)

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if len(self) <= 12:
            body = ', '.join(str(x) for x in self.tolist())
        else:
            head = ', '.join(str(x) for x in self._elements[:5].tolist())
            tail = ', '.join(str(x) for x in self._elements[-3:].tolist())
            body = f"{head}, ..., {tail}; {len(self)} elements"
        return f"IntSet({{{body}}})"


def from_elements(values: Iterable[int]) -> IntSet:
    """Build a sorted, deduplicated IntSet from any integers."""
    items = [int(v) for v in values]
    if not items:
        raise EmptySetError("cannot build a set from no values")
    check_range(min(items), max(items), items[:4], 'from_elements')
    return IntSet(np.unique(np.array(items, dtype=np.int64)))


def interval(lo: int, hi: int) -> IntSet:
    """The integer interval [lo, hi]."""
    if hi < lo:
        raise EmptySetError(f"empty interval [{lo}, {hi}]")
    check_range(lo, hi, [lo, hi], 'interval')
    return IntSet(np.arange(lo, hi + 1, dtype=np.int64))


def normalize(A: IntSet) -> Tuple[IntSet, int, int]:
    """Return (A', shift, scale) with A = scale * A' + shift, min(A') = 0, gcd(A') = 1.

    A singleton normalizes to {0} with scale 1.
    """
    shift = A.min
    if len(A) == 1:
        return IntSet(np.zeros(1, dtype=np.int64)), shift, 1
    check_range(0, A.max - A.min, [A], 'normalize')
    offsets = A.elements - A.elements[0]
    scale = int(np.gcd.reduce(offsets))
    return IntSet(offsets // scale), shift, scale


def reflect(A: IntSet) -> IntSet:
    """{max(A) - a : a in A}."""
    check_range(0, A.diameter, [A], 'reflect')
    return IntSet((A.elements[-1] - A.elements)[::-1])


# ============================================================================
# Sumset engines
# ============================================================================

def _mask(A: IntSet) -> np.ndarray:
    mask = np.zeros(A.diameter + 1, dtype=bool)
    mask[A.elements - A.elements[0]] = True
    return mask


def dense_sumset(A: IntSet, B: IntSet) -> IntSet:
    """A + B through a boolean mask: one shifted OR per element of one operand."""
    lo, hi = A.min + B.min, A.max + B.max
    check_range(lo, hi, [A, B], 'sumset')

    # shift whichever operand costs fewer byte operations
    if len(A) * (B.diameter + 1) <= len(B) * (A.diameter + 1):
        moving, fixed = A, B
    else:
        moving, fixed = B, A

    fixed_mask = _mask(fixed)
    width = fixed_mask.size
    out = np.zeros(hi - lo + 1, dtype=bool)
    for offset in (moving.elements - moving.elements[0]).tolist():
        out[offset:offset + width] |= fixed_mask
    return IntSet(np.flatnonzero(out) + lo)


def sparse_sumset(A: IntSet, B: IntSet) -> IntSet:
    """A + B by sorting all |A|*|B| pairwise sums."""
    check_range(A.min + B.min, A.max + B.max, [A, B], 'sumset')
    sums = np.add.outer(A.elements, B.elements).ravel()
    return IntSet(np.unique(sums))


def sumset(A: IntSet, B: IntSet, budget: Budget = DEFAULT_BUDGET) -> IntSet:
    """{a + b : a in A, b in B}, dense when the span fits, sparse otherwise."""
    span = A.diameter + B.diameter
    if budget.allows_dense(span):
        return dense_sumset(A, B)
    candidates = len(A) * len(B)
    if budget.allows_sparse(candidates):
        return sparse_sumset(A, B)
    raise BudgetExceeded(
        f"sumset of {A!r} and {B!r} needs {span + 1} dense bits "
        f"(budget {budget.dense_bits}) or {candidates} sparse elements "
        f"(budget {budget.sparse_max_elems})",
        needed=span + 1,
        allowed=budget.dense_bits,
    )


def iter_folds(A: IntSet, h_max: Optional[int] = None,
               budget: Budget = DEFAULT_BUDGET) -> Iterator[Tuple[int, IntSet]]:
    """Yield (h, hA) for h = 1, 2, ... up to h_max (unbounded when None)."""
    fold = A
    h = 1
    yield h, fold
    while h_max is None or h < h_max:
        try:
            fold = sumset(fold, A, budget)
        except BudgetExceeded as exc:
            exc.h = h + 1
            raise
        h += 1
        yield h, fold


# ============================================================================
# Fold cache
# ============================================================================

class _FoldCursor:
    __slots__ = ('h', 'fold', 'sizes')

    def __init__(self, base: IntSet):
        self.h = 1
        self.fold = base
        self.sizes = [len(base)]


class FoldCache:
    """Latest h-fold per base set (LRU over bases), plus every size seen.

    Requests below the cached h recompute from scratch without disturbing
    the cursor; requests above it advance the cursor.
    """

    def __init__(self, max_entries: int = FOLD_CACHE_SIZE):
        self.max_entries = max_entries
        self._entries: 'OrderedDict[bytes, _FoldCursor]' = OrderedDict()
        self._lock = threading.Lock()

    def _cursor(self, A: IntSet) -> _FoldCursor:
        cursor = self._entries.get(A.key)
        if cursor is None:
            cursor = _FoldCursor(A)
            self._entries[A.key] = cursor
            while len(self._entries) > self.max_entries:
                self._entries.popitem(last=False)
        else:
            self._entries.move_to_end(A.key)
        return cursor

    @staticmethod
    def _check_cached(cursor: _FoldCursor, A: IntSet, h: int, budget: Budget) -> None:
        """Cached steps up to h must fit the budget they are served under."""
        for k in range(2, min(h, cursor.h) + 1):
            span = k * A.diameter
            candidates = cursor.sizes[k - 2] * len(A)
            if not (budget.allows_dense(span) or budget.allows_sparse(candidates)):
                raise BudgetExceeded(
                    f"{k}-fold of {A!r} needs {span + 1} dense bits (budget {budget.dense_bits}) "
                    f"or {candidates} sparse elements (budget {budget.sparse_max_elems})",
                    needed=span + 1, allowed=budget.dense_bits, h=k,
                )

    @staticmethod
    def _advance(cursor: _FoldCursor, A: IntSet, h: int, budget: Budget) -> None:
        while cursor.h < h:
            try:
                cursor.fold = sumset(cursor.fold, A, budget)
            except BudgetExceeded as exc:
                exc.h = cursor.h + 1
                raise
            cursor.h += 1
            cursor.sizes.append(len(cursor.fold))

    def fold(self, A: IntSet, h: int, budget: Budget) -> IntSet:
        with self._lock:
            cursor = self._cursor(A)
            if h >= cursor.h:
                self._check_cached(cursor, A, h, budget)
                self._advance(cursor, A, h, budget)
                return cursor.fold
        for k, fold in iter_folds(A, h, budget):
            if k == h:
                return fold
        raise AssertionError("unreachable")

    def sizes(self, A: IntSet, h_max: int, budget: Budget) -> List[int]:
        with self._lock:
            cursor = self._cursor(A)
            self._check_cached(cursor, A, h_max, budget)
            self._advance(cursor, A, h_max, budget)
            return list(cursor.sizes[:h_max])

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


FOLD_CACHE = FoldCache()


def hfold(A: IntSet, h: int, budget: Budget = DEFAULT_BUDGET,
          cache: Optional[FoldCache] = FOLD_CACHE) -> IntSet:
    """The h-fold sumset hA: all sums of exactly h elements of A, repetition allowed."""
    if h < 1:
        raise PreconditionViolation(f"h must be a positive integer, got {h}")
    if cache is None:
        for k, fold in iter_folds(A, h, budget):
            if k == h:
                return fold
    return cache.fold(A, h, budget)


# ============================================================================
# Growth profiles
# ============================================================================

@dataclass(frozen=True)
class GrowthProfile:
    base: IntSet
    sizes: Tuple[int, ...]  # sizes[h - 1] = |hA|

    @property
    def h_max(self) -> int:
        return len(self.sizes)

    def size(self, h: int) -> int:
        return self.sizes[h - 1]

    def first_differences(self) -> List[int]:
        return [b - a for a, b in zip(self.sizes, self.sizes[1:])]


def growth_profile(A: IntSet, h_max: int, budget: Budget = DEFAULT_BUDGET,
                   cache: Optional[FoldCache] = FOLD_CACHE) -> GrowthProfile:
    if h_max < 1:
        raise PreconditionViolation(f"h_max must be a positive integer, got {h_max}")
    if cache is None:
        sizes = [len(fold) for _, fold in iter_folds(A, h_max, budget)]
    else:
        sizes = cache.sizes(A, h_max, budget)
    return GrowthProfile(base=A, sizes=tuple(sizes))


def size_bounds(A: IntSet, h: int) -> Tuple[int, int]:
    """Trivial bounds |A| <= |hA| <= min(h*diam(A) + 1, C(h + |A| - 1, h))."""
    return len(A), min(h * A.diameter + 1, comb(h + len(A) - 1, h))


# ============================================================================
# Set literals
# ============================================================================

def parse_set_literal(text: str) -> IntSet:
    """Parse "0, 1, 3" into an IntSet."""
    if text is None or not text.strip():
        raise EmptySetError("empty set literal")
    values = []
    for token in text.split(','):
        token = token.strip()
        try:
            values.append(int(token))
        except ValueError:
            raise ParseError(f"not an integer in set literal: {token!r}") from None
    return from_elements(values)


def format_set_literal(A: IntSet) -> str:
    return ','.join(str(x) for x in A.tolist())


def read_set_file(path: Union[str, Path]) -> List[IntSet]:
    """Read one set literal per line; blank lines and '#' comments are skipped."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ParseError(f"cannot read set file {path}: {exc}") from exc

    sets = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            sets.append(parse_set_literal(line))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not sets:
        raise ParseError(f"no sets found in {path}")
    logger.debug("Read %d sets from %s", len(sets), path)
    return sets
