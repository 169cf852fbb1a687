"""
Eventual Structure of Iterated Sumsets

For a normalized set A (min 0, max N, gcd 1) there is an onset h0 after
which every h-fold sumset splits into three parts:

    hA = A1  U  [b, hN - c]  U  (hN - A2)

with fixed fringes A1 subset [0, b-2] and A2 subset [0, c-2]. From h0 on
the size grows linearly: |hA| = hN + 1 - delta, delta = b - |A1| + c - |A2|.

Detection scans h = 1, 2, ... and accepts the first h whose fold has a
middle run of length >= N and whose successor fold has identical fringes.
Those two conditions make the decomposition persist for every larger h:
fringes cannot grow (anything below b in (h+2)A already lies in (h+1)A),
and a middle run of length >= N absorbs every gap of A.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .errors import (
    PreconditionViolation,
    StabilizationNotFound,
    StructureInvariantError,
)
from .intset import DEFAULT_BUDGET, Budget, IntSet, check_range, hfold, iter_folds, reflect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Decomposition:
    """Three-part split of one materialized fold around its longest run."""

    b: int
    c: int
    low: Tuple[int, ...]   # A1
    high: Tuple[int, ...]  # A2, stored as offsets below hN
    middle_length: int

    def fringes(self) -> Tuple[int, int, Tuple[int, ...], Tuple[int, ...]]:
        return self.b, self.c, self.low, self.high


def decompose(fold: IntSet, h: int, N: int) -> Decomposition:
    """Split hA (min 0, max hN) around its longest run of consecutive integers.

    Ties go to the lowest run.
    """
    top = h * N
    if fold.min != 0 or fold.max != top:
        raise PreconditionViolation(f"fold must span [0, {top}], got [{fold.min}, {fold.max}]")

    el = fold.elements
    breaks = np.flatnonzero(np.diff(el) != 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [el.size - 1]))
    best = int(np.argmax(ends - starts))
    start, end = int(starts[best]), int(ends[best])

    b = int(el[start])
    middle_top = int(el[end])
    low = tuple(el[:start].tolist())
    high = tuple((top - el[end + 1:])[::-1].tolist())
    return Decomposition(b=b, c=top - middle_top, low=low, high=high,
                         middle_length=middle_top - b + 1)


@dataclass(frozen=True)
class EventualStructure:
    base: IntSet
    N: int
    h0: int
    b: int
    c: int
    A1: Tuple[int, ...]
    A2: Tuple[int, ...]
    delta: int
    gamma: int

    def validate(self) -> 'EventualStructure':
        """Raise StructureInvariantError unless the parameters are self-consistent."""
        if self.delta != self.b - len(self.A1) + self.c - len(self.A2):
            raise StructureInvariantError(f"delta {self.delta} does not match the fringes")
        if self.gamma != self.b + self.c:
            raise StructureInvariantError(f"gamma {self.gamma} != b + c")
        if not 0 <= self.delta <= self.N + 1:
            raise StructureInvariantError(
                f"delta = {self.delta} outside [0, N + 1] = [0, {self.N + 1}] for {self.base!r}"
            )
        if any(x < 0 or x > self.b - 2 for x in self.A1):
            raise StructureInvariantError(f"A1 = {self.A1} not inside [0, b - 2], b = {self.b}")
        if any(x < 0 or x > self.c - 2 for x in self.A2):
            raise StructureInvariantError(f"A2 = {self.A2} not inside [0, c - 2], c = {self.c}")
        return self

    @property
    def deficit_constant(self) -> int:
        """The constant a in |hA| = hN - a, i.e. delta - 1 (may be -1)."""
        return self.delta - 1

    def swapped(self) -> 'EventualStructure':
        """Structure of reflect(base): the low and high fringes trade places."""
        return replace(self, base=reflect(self.base), b=self.c, c=self.b, A1=self.A2, A2=self.A1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'h0': self.h0,
            'b': self.b,
            'c': self.c,
            'A1': list(self.A1),
            'A2': list(self.A2),
            'delta': self.delta,
            'gamma': self.gamma,
        }


def _structure_from(A: IntSet, h: int, d: Decomposition) -> EventualStructure:
    return EventualStructure(
        base=A,
        N=A.max,
        h0=h,
        b=d.b,
        c=d.c,
        A1=d.low,
        A2=d.high,
        delta=d.b - len(d.low) + d.c - len(d.high),
        gamma=d.b + d.c,
    ).validate()


def eventual_structure(A: IntSet, budget: Budget = DEFAULT_BUDGET,
                       cap: Optional[int] = None) -> EventualStructure:
    """Detect the onset h0 and the fringes of a normalized set with at least two elements.

    Args:
        A: normalized set (min 0, gcd 1)
        budget: resource ceiling for the folds materialized during the scan
        cap: largest h tried; defaults to max(8, N(N - 1))

    Raises:
        StabilizationNotFound: no onset below the cap (carries the size profile)
    """
    if len(A) < 2:
        raise PreconditionViolation(f"eventual structure needs at least two elements, got {A!r}")
    if not A.is_normalized():
        raise PreconditionViolation(f"{A!r} is not normalized (min 0, gcd 1)")

    N = A.max
    cap = cap if cap is not None else max(8, N * (N - 1))

    profile = []
    previous: Optional[Tuple[int, Decomposition]] = None
    for h, fold in iter_folds(A, cap + 1, budget):
        profile.append(len(fold))
        current = decompose(fold, h, N)
        if previous is not None:
            h_prev, d_prev = previous
            if d_prev.middle_length >= N and d_prev.fringes() == current.fringes():
                es = _structure_from(A, h_prev, d_prev)
                logger.debug("Structure of %r: %s", A, es.to_dict())
                return es
        previous = (h, current)

    raise StabilizationNotFound(
        f"no eventual structure for {A!r} with h <= {cap}", profile=profile
    )


def predicted_size(es: EventualStructure, h: int) -> int:
    """|hA| = hN + 1 - delta for h >= h0."""
    if h < es.h0:
        raise PreconditionViolation(f"size law holds from h0 = {es.h0}, asked for h = {h}")
    return h * es.N + 1 - es.delta


def predicted_set(es: EventualStructure, h: int) -> IntSet:
    """A1 U [b, hN - c] U (hN - A2)."""
    if h < es.h0:
        raise PreconditionViolation(f"decomposition holds from h0 = {es.h0}, asked for h = {h}")
    top = h * es.N
    check_range(0, top, [es.base, h], 'predicted_set')
    parts = [
        np.array(es.A1, dtype=np.int64),
        np.arange(es.b, top - es.c + 1, dtype=np.int64),
        top - np.array(es.A2[::-1], dtype=np.int64),
    ]
    return IntSet(np.unique(np.concatenate(parts)))


def verify_structure(A: IntSet, es: EventualStructure, h: int,
                     budget: Budget = DEFAULT_BUDGET) -> bool:
    """True iff the materialized hA equals the predicted decomposition exactly."""
    if h < es.h0:
        raise PreconditionViolation(f"decomposition holds from h0 = {es.h0}, asked for h = {h}")
    if es.N != A.max:
        return False
    fold = hfold(A, h, budget)
    return len(fold) == predicted_size(es, h) and fold == predicted_set(es, h)
