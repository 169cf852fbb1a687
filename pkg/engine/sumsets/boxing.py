"""
Translate Unions ("boxes")

A box places copies of a base set at spacing tau along an index set:

    A' = U_{j in I} (j*tau + A) = tau*I + A

A recipe is either a plain IntSet or a BoxedSet whose base is itself a
recipe, so race certificates can describe deep constructions compactly.

Size laws, each with an explicit validity predicate (a law is never
applied outside the range where it is proven):
- product law:  |hA'| = |hI| * |hA|                   when h * max(A) < tau
- linear law:   |hA'| = h((r-1)tau + N) + 1 - delta    for I = [0, r-1],
                tau >= gamma and h >= max(h0, (gamma + tau - 1) / N)

The linear law's merge argument needs tau >= max(b, c); the stronger
tau >= gamma = b + c is what gets enforced.
"""

import logging
from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, List, Union

import numpy as np

from .errors import ParseError, PreconditionViolation, ValidityError
from .intset import (
    DEFAULT_BUDGET,
    Budget,
    IntSet,
    check_range,
    from_elements,
    hfold,
    interval,
    sumset,
)
from .structure import EventualStructure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxedSet:
    base: 'Recipe'
    index: IntSet
    tau: int

    def __post_init__(self):
        if self.index.min != 0:
            raise PreconditionViolation(f"index set must have min 0, got {self.index!r}")
        if recipe_min(self.base) != 0:
            raise PreconditionViolation("base of a box must have min 0")
        if self.tau <= recipe_max(self.base):
            raise ValidityError(
                f"tau = {self.tau} must exceed max(base) = {recipe_max(self.base)}"
            )

    @property
    def max(self) -> int:
        return self.index.max * self.tau + recipe_max(self.base)

    def __len__(self) -> int:
        return len(self.index) * recipe_len(self.base)


Recipe = Union[IntSet, BoxedSet]


# ============================================================================
# Recipe helpers
# ============================================================================

def recipe_min(x: Recipe) -> int:
    return x.min if isinstance(x, IntSet) else 0


def recipe_max(x: Recipe) -> int:
    return x.max


def recipe_len(x: Recipe) -> int:
    return len(x)


def recipe_gcd(x: Recipe) -> int:
    """gcd of the elements of a recipe with min 0."""
    if isinstance(x, IntSet):
        return x.gcd
    return gcd(recipe_gcd(x.base), x.tau * x.index.gcd)


def recipe_levels(x: Recipe) -> List[Recipe]:
    """Innermost base first, the recipe itself last."""
    levels = [x]
    while isinstance(levels[-1], BoxedSet):
        levels.append(levels[-1].base)
    return levels[::-1]


def materialize(x: Recipe) -> IntSet:
    """The explicit set tau*I + A (recursively for nested bases)."""
    if isinstance(x, IntSet):
        return x
    base = materialize(x.base)
    check_range(0, x.max, [x.index, x.tau, base], 'materialize')
    # tau > max(base): the translated copies are disjoint and already ordered
    copies = np.add.outer(x.index.elements * x.tau, base.elements)
    return IntSet(copies.ravel())


def hfold_boxed(x: Recipe, h: int, budget: Budget = DEFAULT_BUDGET) -> IntSet:
    """Exact h-fold of a recipe via h(tau*I + A) = tau*hI + hA.

    Pure sumset algebra: no size law is involved, so the result is a
    brute-force materialization of the full set.
    """
    if isinstance(x, IntSet):
        return hfold(x, h, budget)
    index_fold = hfold(x.index, h, budget).scaled(x.tau)
    return sumset(index_fold, hfold_boxed(x.base, h, budget), budget)


def recipe_to_json(x: Recipe) -> Dict[str, Any]:
    if isinstance(x, IntSet):
        return {'elements': x.tolist()}
    return {
        'base': recipe_to_json(x.base),
        'index': x.index.tolist(),
        'tau': str(x.tau),
    }


def recipe_from_json(obj: Any) -> Recipe:
    """Inverse of recipe_to_json.

    Raises ParseError on malformed input and ValidityError when a box
    breaks tau > max(base).
    """
    if not isinstance(obj, dict):
        raise ParseError(f"set recipe must be an object, got {type(obj).__name__}")
    if 'elements' in obj:
        values = obj['elements']
        if not isinstance(values, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise ParseError("'elements' must be a list of integers")
        try:
            return from_elements(values)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    missing = {'base', 'index', 'tau'} - set(obj)
    if missing:
        raise ParseError(f"box recipe is missing {sorted(missing)}")
    index = obj['index']
    if not isinstance(index, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in index):
        raise ParseError("'index' must be a list of integers")
    try:
        tau = int(str(obj['tau']))
        index_set = from_elements(index)
    except ValueError as exc:
        raise ParseError(f"bad box recipe: {exc}") from exc
    base = recipe_from_json(obj['base'])
    try:
        return BoxedSet(base=base, index=index_set, tau=tau)
    except PreconditionViolation as exc:
        raise ParseError(str(exc)) from exc


# ============================================================================
# Size laws
# ============================================================================

def product_law_violations(bs: BoxedSet, h: int) -> List[str]:
    base_max = recipe_max(bs.base)
    if h * base_max < bs.tau:
        return []
    return [f"product law needs h*max(base) < tau: {h}*{base_max} >= {bs.tau}"]


def small_h_size(bs: BoxedSet, h: int, budget: Budget = DEFAULT_BUDGET) -> int:
    """|hA'| = |hI| * |hA| for h < tau / max(A)."""
    violations = product_law_violations(bs, h)
    if violations:
        raise ValidityError('; '.join(violations))
    return len(hfold(bs.index, h, budget)) * len(hfold_boxed(bs.base, h, budget))


@dataclass(frozen=True)
class LinearGrowth:
    size: int
    interval_length: int


def linear_law_violations(es: EventualStructure, r: int, tau: int, h: int) -> List[str]:
    violations = []
    if r < 2:
        violations.append(f"linear law needs r >= 2, got r = {r}")
    if tau < 1 or tau < es.gamma:
        violations.append(f"linear law needs tau >= gamma: tau = {tau}, gamma = {es.gamma}")
    if h < es.h0:
        violations.append(f"linear law needs h >= h0: h = {h}, h0 = {es.h0}")
    if h * es.N < es.gamma + tau - 1:
        violations.append(
            f"linear law needs h*N >= gamma + tau - 1: {h}*{es.N} < {es.gamma} + {tau} - 1"
        )
    return violations


def large_h_size(es: EventualStructure, r: int, tau: int, h: int) -> LinearGrowth:
    """Size of h(U_{j<r}(j*tau + A)) and the length of the interval it is guaranteed to contain."""
    violations = linear_law_violations(es, r, tau, h)
    if violations:
        raise ValidityError('; '.join(violations))
    return LinearGrowth(
        size=h * ((r - 1) * tau + es.N) + 1 - es.delta,
        interval_length=h * (es.N + (r - 1) * tau) - es.gamma + 1,
    )


def is_interval_index(index: IntSet) -> bool:
    return index.min == 0 and len(index) == index.max + 1


# ============================================================================
# Index sets I and J
# ============================================================================

def _require_H(H: int) -> None:
    if H < 3:
        raise PreconditionViolation(f"H must be at least 3, got {H}")


def index_set_I(H: int) -> IntSet:
    """[0, 2] U {2H}."""
    _require_H(H)
    return from_elements([0, 1, 2, 2 * H])


def index_set_J(H: int) -> IntSet:
    """[0, 1] U [2H - 1, 2H]."""
    _require_H(H)
    return from_elements([0, 1, 2 * H - 1, 2 * H])


def card_hI(H: int, h: int) -> int:
    _require_H(H)
    if h < 1:
        raise PreconditionViolation(f"h must be positive, got {h}")
    if h < H:
        return (h + 1) ** 2
    return H * H + 2 * H * (h - H + 1)


def card_hJ(H: int, h: int) -> int:
    """(h + 1)^2, proven only for h < 2H - 1."""
    _require_H(H)
    if h < 1:
        raise PreconditionViolation(f"h must be positive, got {h}")
    if h > 2 * H - 2:
        raise ValidityError(f"|hJ| closed form holds for h <= 2H - 2 = {2 * H - 2}, asked h = {h}")
    return (h + 1) ** 2


def interval_index(r: int) -> IntSet:
    return interval(0, r - 1)
