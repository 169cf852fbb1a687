"""
Sumset Races

A race between two sets A and B is the sign sequence of |hA| - |hB| as h
grows. A race certificate with m checkpoints h_1 < ... < h_m records sets
with |h_iA| > |h_iB| for odd i and |h_iA| < |h_iB| for even i.

Construction, one checkpoint at a time:
1. base pair: exhaustive deterministic search for the first strict witness
2. extension: box both sets so every old checkpoint keeps its sign (the
   product law) and a new checkpoint with the opposite sign appears
   - free-diameter: interval index [0, 1], spacings alpha < beta; the set
     with the larger spacing wins for large h (linear law)
   - equal-diameter: index sets I, J of equal diameter 2H and spacing
     tau = 2HN + 1; the crossing at h = 2H - 2 is an exact identity

Sizes are measured by brute force whenever the result fits the dense
budget, otherwise by a size law whose hypotheses are checked first.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache, partial
from itertools import combinations
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .boxing import (
    BoxedSet,
    Recipe,
    card_hI,
    card_hJ,
    hfold_boxed,
    index_set_I,
    index_set_J,
    interval_index,
    is_interval_index,
    large_h_size,
    linear_law_violations,
    materialize,
    product_law_violations,
    recipe_gcd,
    recipe_len,
    recipe_max,
    recipe_min,
    recipe_to_json,
)
from .errors import (
    BudgetExceeded,
    Inconclusive,
    InvalidState,
    NoBasePair,
    PreconditionViolation,
    SearchExhausted,
    StabilizationNotFound,
    SumsetOverflowError,
)
from .intset import (
    DEFAULT_BUDGET,
    Budget,
    IntSet,
    from_elements,
    growth_profile,
    hfold,
    iter_folds,
)
from .schema import CheckpointClaim, RaceCertificate, StepRecord
from .structure import EventualStructure, eventual_structure

logger = logging.getLogger(__name__)

# ============================================================================
# Configuration
# ============================================================================
DEFAULT_BASE_N_MAX = 12
DEFAULT_FLIP_SCAN_CAP = 4096
DEFAULT_ELEMENT_LIST_CAP = 4096
STRUCTURE_CACHE_SIZE = 256

BRUTE_FORCE = 'brute-force'
ANALYTIC = 'analytic'

# errors that end a construction with a partial certificate
RESOURCE_ERRORS = (BudgetExceeded, Inconclusive, StabilizationNotFound,
                   SearchExhausted, SumsetOverflowError)


class RaceMode(str, Enum):
    EQUAL = 'equal-diam'
    FREE = 'free-diam'


def sign(x: int) -> int:
    return (x > 0) - (x < 0)


def expected_sign(i: int) -> int:
    """Required sign at the 1-based checkpoint i: +1 odd, -1 even."""
    return 1 if i % 2 == 1 else -1


# ============================================================================
# Race state
# ============================================================================

@dataclass
class RaceState:
    A: Recipe
    B: Recipe
    checkpoints: List[int]
    sizes: List[Tuple[int, int]]  # (|h_iA|, |h_iB|) per checkpoint
    mode: RaceMode
    trace: List[StepRecord] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.checkpoints)


def check_state(state: RaceState) -> RaceState:
    """Raise InvalidState unless every race invariant holds."""
    problems = []
    if recipe_len(state.A) != recipe_len(state.B):
        problems.append(f"|A| = {recipe_len(state.A)} != |B| = {recipe_len(state.B)}")
    for name, x in (('A', state.A), ('B', state.B)):
        if recipe_min(x) != 0:
            problems.append(f"min({name}) = {recipe_min(x)}, expected 0")
        if recipe_gcd(x) != 1:
            problems.append(f"gcd({name}) = {recipe_gcd(x)}, expected 1")
    if state.mode is RaceMode.EQUAL and recipe_max(state.A) != recipe_max(state.B):
        problems.append(f"diameters differ: {recipe_max(state.A)} != {recipe_max(state.B)}")
    if any(h2 <= h1 for h1, h2 in zip(state.checkpoints, state.checkpoints[1:])):
        problems.append(f"checkpoints not strictly increasing: {state.checkpoints}")
    if len(state.sizes) != state.m or len(state.trace) != state.m:
        problems.append(
            f"{state.m} checkpoints but {len(state.sizes)} size pairs and {len(state.trace)} steps"
        )
    for i, (size_a, size_b) in enumerate(state.sizes, start=1):
        if sign(size_a - size_b) != expected_sign(i):
            problems.append(f"checkpoint {i}: sign of {size_a} - {size_b} is not {expected_sign(i):+d}")
    if problems:
        raise InvalidState('; '.join(problems))
    return state


# ============================================================================
# Measurement
# ============================================================================

@dataclass(frozen=True)
class Measurement:
    size: int
    method: str
    lemmas: Tuple[str, ...] = ()
    span: int = 0  # largest dense span materialized


@lru_cache(maxsize=STRUCTURE_CACHE_SIZE)
def structure_of(A: IntSet, budget: Budget) -> EventualStructure:
    return eventual_structure(A, budget)


def measure(x: Recipe, h: int, budget: Budget = DEFAULT_BUDGET) -> Measurement:
    """|hX| for a recipe: brute force when the result fits, a size law otherwise.

    Raises:
        Inconclusive: too large for brute force and no law's hypotheses hold
    """
    span = h * recipe_max(x)
    if isinstance(x, IntSet) or budget.allows_dense(span):
        try:
            return Measurement(len(hfold_boxed(x, h, budget)), BRUTE_FORCE, (), span)
        except BudgetExceeded as exc:
            raise Inconclusive(f"|{h}X| does not fit the budget: {exc}") from exc
    return _measure_analytic(x, h, budget)


def _measure_analytic(x: BoxedSet, h: int, budget: Budget) -> Measurement:
    product_violations = product_law_violations(x, h)
    if not product_violations:
        inner = measure(x.base, h, budget)
        index_size = len(hfold(x.index, h, budget))
        lemma = (f"product law at h={h}: h*max(base) = {h * recipe_max(x.base)} < "
                 f"tau = {x.tau}, |hI| = {index_size}")
        return Measurement(index_size * inner.size, ANALYTIC, (lemma,) + inner.lemmas, inner.span)

    if len(x.index) < 2 or not is_interval_index(x.index):
        raise Inconclusive(
            f"no size law at h={h}: {product_violations[0]}, and the index is not an interval"
        )
    try:
        es = structure_of(materialize(x.base), budget)
    except (BudgetExceeded, StabilizationNotFound, PreconditionViolation) as exc:
        raise Inconclusive(f"eventual structure of the base unavailable: {exc}") from exc

    r = len(x.index)
    violations = linear_law_violations(es, r, x.tau, h)
    if violations:
        raise Inconclusive(f"no size law at h={h}: " + '; '.join(product_violations + violations))
    growth = large_h_size(es, r, x.tau, h)
    lemma = (f"linear law at h={h}: r={r}, tau={x.tau}, N={es.N}, h0={es.h0}, "
             f"delta={es.delta}, gamma={es.gamma}")
    return Measurement(growth.size, ANALYTIC, (lemma,), 0)


def crossing_value(N: int, H: int, p: int, q: int) -> int:
    """|hJ||hY| - |hI||hX| at h = 2H - 2, where X (constant p) receives I
    and Y (constant q) receives J, and |hX| = hN - p, |hY| = hN - q.
    """
    return 2 * N * (H - 1) ** 3 - q * (4 * H * H - 4 * H + 1) + p * (3 * H * H - 2 * H)


# ============================================================================
# Sign profiles
# ============================================================================

@dataclass(frozen=True)
class SignRow:
    h: int
    size_a: int
    size_b: int
    sign: int


@dataclass(frozen=True)
class SignProfile:
    rows: Tuple[SignRow, ...]
    alternations: int


def count_alternations(signs: List[int]) -> int:
    """Number of strict sign changes, zeros skipped."""
    nonzero = [s for s in signs if s != 0]
    return sum(1 for s, t in zip(nonzero, nonzero[1:]) if s != t)


def iter_sign_rows(A: IntSet, B: IntSet, h_max: int,
                   budget: Budget = DEFAULT_BUDGET) -> Iterator[SignRow]:
    """Rows one h at a time; BudgetExceeded carries the first uncomputed h."""
    if h_max < 1:
        raise PreconditionViolation(f"h_max must be a positive integer, got {h_max}")
    for (h, fold_a), (_, fold_b) in zip(iter_folds(A, h_max, budget), iter_folds(B, h_max, budget)):
        yield SignRow(h, len(fold_a), len(fold_b), sign(len(fold_a) - len(fold_b)))


def sign_profile(A: IntSet, B: IntSet, h_max: int,
                 budget: Budget = DEFAULT_BUDGET) -> SignProfile:
    rows = tuple(iter_sign_rows(A, B, h_max, budget))
    return SignProfile(rows=rows, alternations=count_alternations([r.sign for r in rows]))


# ============================================================================
# Base pair
# ============================================================================

@dataclass(frozen=True)
class BasePair:
    A: IntSet
    B: IntSet
    h1: int
    N: int


def base_candidates(N: int, k: int, equal_diameter: bool) -> List[IntSet]:
    """k-subsets of [0, N] containing 0 (and N when equal_diameter) with gcd 1, lexicographic."""
    if equal_diameter:
        shapes = ((0,) + c + (N,) for c in combinations(range(1, N), k - 2))
    else:
        shapes = ((0,) + c for c in combinations(range(1, N + 1), k - 1))
    candidates = [from_elements(s) for s in shapes]
    return [c for c in candidates if c.gcd == 1]


def base_pair_search(equal_diameter: bool, n_max: int = DEFAULT_BASE_N_MAX,
                     h_max: Optional[int] = None,
                     budget: Budget = DEFAULT_BUDGET) -> BasePair:
    """First (A, B, h1) with |h1 A| > |h1 B| in the fixed search order.

    N ascends from 3, then k from 3 to N + 1, then ordered pairs of
    candidates, then h from 1 to min(h_max, 3N).
    """
    if n_max < 3:
        raise PreconditionViolation(f"n_max must be at least 3, got {n_max}")
    for N in range(3, n_max + 1):
        limit = 3 * N if h_max is None else min(h_max, 3 * N)
        for k in range(3, N + 2):
            candidates = base_candidates(N, k, equal_diameter)
            sizes: Dict[IntSet, Tuple[int, ...]] = {}
            for A in candidates:
                for B in candidates:
                    if A == B:
                        continue
                    for c in (A, B):
                        if c not in sizes:
                            sizes[c] = growth_profile(c, limit, budget, cache=None).sizes
                    for h in range(1, limit + 1):
                        if sizes[A][h - 1] > sizes[B][h - 1]:
                            logger.info("Base pair: A=%r B=%r h1=%d", A, B, h)
                            return BasePair(A=A, B=B, h1=h, N=N)
    raise NoBasePair(
        f"no base pair with N <= {n_max} ({'equal' if equal_diameter else 'free'} diameter)"
    )


def initial_state(mode: RaceMode, n_max: int = DEFAULT_BASE_N_MAX,
                  budget: Budget = DEFAULT_BUDGET) -> RaceState:
    pair = base_pair_search(mode is RaceMode.EQUAL, n_max, budget=budget)
    size_a = len(hfold(pair.A, pair.h1, budget))
    size_b = len(hfold(pair.B, pair.h1, budget))
    step = StepRecord(kind='base', m=1, h_new=pair.h1, N=pair.N, n_max=n_max)
    return check_state(RaceState(A=pair.A, B=pair.B, checkpoints=[pair.h1],
                                 sizes=[(size_a, size_b)], mode=mode, trace=[step]))


# ============================================================================
# Extension steps
# ============================================================================

def _materialized_structures(state: RaceState, budget: Budget
                             ) -> Tuple[IntSet, IntSet, EventualStructure, EventualStructure]:
    A_set, B_set = materialize(state.A), materialize(state.B)
    return A_set, B_set, structure_of(A_set, budget), structure_of(B_set, budget)


def extend_free_diameter(state: RaceState, budget: Budget = DEFAULT_BUDGET,
                         scan_cap: int = DEFAULT_FLIP_SCAN_CAP) -> RaceState:
    """Box both sets along [0, 1] with spacings alpha, beta > h_m * N.

    The set that must lose at the new checkpoint gets the smaller spacing;
    the new checkpoint is the first h > h_m with the required sign.
    """
    if state.mode is not RaceMode.FREE:
        raise InvalidState(f"free-diameter step on a {state.mode.value} race")
    check_state(state)

    m, h_m = state.m, state.checkpoints[-1]
    A_set, B_set, es_a, es_b = _materialized_structures(state, budget)
    N = max(A_set.max, B_set.max)

    small = max(h_m * N, es_a.gamma, es_b.gamma, N) + 1
    large = small + N
    alpha, beta = (small, large) if m % 2 == 1 else (large, small)
    r = 2
    want = expected_sign(m + 1)
    if sign(alpha - beta) != want:
        raise InvalidState(f"spacings alpha={alpha}, beta={beta} cannot produce sign {want:+d}")

    index = interval_index(r)
    A_new = BoxedSet(base=state.A, index=index, tau=alpha)
    B_new = BoxedSet(base=state.B, index=index, tau=beta)
    logger.info("Free-diameter step %d: N=%d alpha=%d beta=%d", m + 1, N, alpha, beta)

    # old checkpoints: |h_i([0, r-1]*tau + X)| = (h_i(r-1) + 1) * |h_iX|
    sizes = [((h * (r - 1) + 1) * sa, (h * (r - 1) + 1) * sb)
             for h, (sa, sb) in zip(state.checkpoints, state.sizes)]

    for h in range(h_m + 1, h_m + scan_cap + 1):
        ma = measure(A_new, h, budget)
        mb = measure(B_new, h, budget)
        logger.debug("  h=%d: |hA'|=%d (%s) |hB'|=%d (%s)", h, ma.size, ma.method, mb.size, mb.method)
        if sign(ma.size - mb.size) != want:
            continue
        flip_method = BRUTE_FORCE if ma.method == mb.method == BRUTE_FORCE else ANALYTIC
        step = StepRecord(
            kind='free-diameter-extend', m=m + 1, h_new=h, N=N,
            alpha=alpha, beta=beta, r=r, flip_method=flip_method, h_prev=h_m,
            h0_a=es_a.h0, h0_b=es_b.h0, delta_a=es_a.delta, delta_b=es_b.delta,
            gamma_a=es_a.gamma, gamma_b=es_b.gamma,
        )
        logger.info("  checkpoint h%d = %d: %d vs %d", m + 1, h, ma.size, mb.size)
        return check_state(RaceState(
            A=A_new, B=B_new, checkpoints=state.checkpoints + [h],
            sizes=sizes + [(ma.size, mb.size)], mode=state.mode,
            trace=state.trace + [step],
        ))

    raise SearchExhausted(
        f"no sign {want:+d} in h = {h_m + 1}..{h_m + scan_cap} "
        f"(alpha={alpha}, beta={beta}, N={N})"
    )


def choose_H(N: int, h_m: int, h0_floor: int, p: int, q: int) -> int:
    """Smallest H > max(h_m, h0_floor, 2) with a positive crossing value."""
    H = max(h_m, h0_floor, 2) + 1
    while crossing_value(N, H, p, q) <= 0:
        H += 1
    return H


def extend_equal_diameter(state: RaceState, budget: Budget = DEFAULT_BUDGET) -> RaceState:
    """Box A and B along I and J with tau = 2HN + 1; the new checkpoint is 2H - 2.

    For odd m the set A receives I, for even m it receives J.
    """
    if state.mode is not RaceMode.EQUAL:
        raise InvalidState(f"equal-diameter step on a {state.mode.value} race")
    check_state(state)

    m, h_m = state.m, state.checkpoints[-1]
    A_set, B_set, es_a, es_b = _materialized_structures(state, budget)
    if A_set.max != B_set.max:
        raise InvalidState(f"diameters differ: {A_set.max} != {B_set.max}")
    N = A_set.max

    a, b = es_a.deficit_constant, es_b.deficit_constant
    a_gets_I = m % 2 == 1
    p, q = (a, b) if a_gets_I else (b, a)
    H = choose_H(N, h_m, max(es_a.h0, es_b.h0), p, q)
    tau = 2 * H * N + 1
    h_new = 2 * H - 2
    crossing = crossing_value(N, H, p, q)

    I, J = index_set_I(H), index_set_J(H)
    A_new = BoxedSet(base=state.A, index=I if a_gets_I else J, tau=tau)
    B_new = BoxedSet(base=state.B, index=J if a_gets_I else I, tau=tau)
    logger.info("Equal-diameter step %d: N=%d H=%d tau=%d a=%d b=%d crossing=%d",
                m + 1, N, H, tau, a, b, crossing)

    # h_i < H: |h_iI| = |h_iJ| = (h_i + 1)^2
    sizes = [((h + 1) ** 2 * sa, (h + 1) ** 2 * sb)
             for h, (sa, sb) in zip(state.checkpoints, state.sizes)]

    # h_new * N < tau, so the product law gives the new sizes exactly
    fold_a = h_new * N - a
    fold_b = h_new * N - b
    size_I = card_hI(H, h_new)
    size_J = card_hJ(H, h_new)
    new_a = (size_I if a_gets_I else size_J) * fold_a
    new_b = (size_J if a_gets_I else size_I) * fold_b
    difference = (new_b - new_a) if a_gets_I else (new_a - new_b)
    if difference != crossing:
        raise InvalidState(f"crossing identity failed: {difference} != {crossing}")

    step = StepRecord(
        kind='equal-diameter-extend', m=m + 1, h_new=h_new, N=N,
        H=H, tau=tau, a_index='I' if a_gets_I else 'J', b_index='J' if a_gets_I else 'I',
        crossing=crossing, h_prev=h_m, h0_a=es_a.h0, h0_b=es_b.h0,
        delta_a=es_a.delta, delta_b=es_b.delta, gamma_a=es_a.gamma, gamma_b=es_b.gamma,
        a_const=a, b_const=b,
    )
    logger.info("  checkpoint h%d = %d: %d vs %d", m + 1, h_new, new_a, new_b)
    return check_state(RaceState(
        A=A_new, B=B_new, checkpoints=state.checkpoints + [h_new],
        sizes=sizes + [(new_a, new_b)], mode=state.mode, trace=state.trace + [step],
    ))


# ============================================================================
# Full construction
# ============================================================================

def _confirm(x: Recipe, h: int, claimed: int, budget: Budget) -> Optional[str]:
    """Re-measure a derived size; returns the method that backs the claim.

    None when neither brute force nor a validated law fits the budget.
    """
    try:
        measured = measure(x, h, budget)
    except RESOURCE_ERRORS:
        return None
    if measured.size != claimed:
        raise InvalidState(f"size at h={h} derived as {claimed} but measured {measured.size}")
    return measured.method


def certify(state: RaceState, requested_m: int, budget: Budget = DEFAULT_BUDGET,
            failure: Optional[str] = None,
            element_cap: int = DEFAULT_ELEMENT_LIST_CAP) -> RaceCertificate:
    check_state(state)
    claims = []
    for h, (size_a, size_b) in zip(state.checkpoints, state.sizes):
        claims.append(CheckpointClaim(
            h=h, size_a=size_a, size_b=size_b, sign=sign(size_a - size_b),
            method_a=_confirm(state.A, h, size_a, budget),
            method_b=_confirm(state.B, h, size_b, budget),
        ))

    def elements(x: Recipe) -> Optional[List[int]]:
        return materialize(x).tolist() if recipe_len(x) <= element_cap else None

    return RaceCertificate(
        mode=state.mode.value,
        m=state.m,
        requested_m=requested_m,
        status='partial' if failure else 'complete',
        failure=failure,
        a=recipe_to_json(state.A),
        b=recipe_to_json(state.B),
        a_elements=elements(state.A),
        b_elements=elements(state.B),
        checkpoints=claims,
        trace=list(state.trace),
    )


def build_race(m: int, mode, budget: Budget = DEFAULT_BUDGET,
               n_max: int = DEFAULT_BASE_N_MAX,
               scan_cap: int = DEFAULT_FLIP_SCAN_CAP,
               element_cap: int = DEFAULT_ELEMENT_LIST_CAP) -> RaceCertificate:
    """Build a race with m alternating checkpoints.

    A step that hits a resource ceiling ends the construction; the
    certificate then has status "partial" and names the failure.
    """
    if m < 1:
        raise PreconditionViolation(f"m must be at least 1, got {m}")
    mode = RaceMode(mode)

    state = initial_state(mode, n_max, budget)
    extend: Callable[[RaceState], RaceState]
    if mode is RaceMode.EQUAL:
        extend = partial(extend_equal_diameter, budget=budget)
    else:
        extend = partial(extend_free_diameter, budget=budget, scan_cap=scan_cap)

    failure = None
    while state.m < m:
        try:
            state = extend(state)
        except RESOURCE_ERRORS as exc:
            failure = f"step {state.m + 1} of {m} failed: {type(exc).__name__}: {exc}"
            logger.warning(failure)
            break

    return certify(state, m, budget, failure, element_cap)
