"""
Independent verification of race certificates.

Nothing recorded in a certificate is trusted: the sets are rebuilt from
their recipes, every checkpoint size is recomputed (brute force when the
fold fits the dense budget, otherwise a size law whose hypotheses are
re-checked on the spot) and every construction step is cross-checked
against the recipe it claims to have produced.

Verdicts:
- pass: every structural check holds and every checkpoint matches
- fail: some check or recomputed size contradicts the certificate
- inconclusive: nothing contradicts it, but some size could not be
  recomputed within the budget, or the certificate is partial
"""

import logging
from typing import List, Optional, Tuple

from joblib import Parallel, delayed

from .boxing import (
    BoxedSet,
    Recipe,
    index_set_I,
    index_set_J,
    interval_index,
    materialize,
    recipe_from_json,
    recipe_gcd,
    recipe_len,
    recipe_levels,
    recipe_max,
    recipe_min,
)
from .errors import ParseError, PreconditionViolation, ValidityError
from .intset import DEFAULT_BUDGET, Budget
from .race import (
    BRUTE_FORCE,
    RESOURCE_ERRORS,
    crossing_value,
    expected_sign,
    measure,
    sign,
    structure_of,
)
from .schema import (
    CERTIFICATE_VERSION,
    CheckpointClaim,
    CheckpointResult,
    RaceCertificate,
    ResourceUsage,
    StepRecord,
    VerificationReport,
)

logger = logging.getLogger(__name__)

# structures are recomputed only for step inputs up to this many elements
STRUCTURE_RECHECK_MAX_ELEMS = 4096


def _check_checkpoint(i: int, claim: CheckpointClaim, A: Recipe, B: Recipe,
                      budget: Budget) -> Tuple[CheckpointResult, int, int, int]:
    """Recompute one checkpoint; returns the result, the largest span and the method counts."""
    try:
        ma = measure(A, claim.h, budget)
        mb = measure(B, claim.h, budget)
    except RESOURCE_ERRORS as exc:
        result = CheckpointResult(
            i=i, h=claim.h, claimed_a=claim.size_a, claimed_b=claim.size_b,
            method='inconclusive', note=str(exc),
        )
        return result, 0, 0, 0

    brute = [m.method == BRUTE_FORCE for m in (ma, mb)]
    method = 'brute-force' if all(brute) else 'analytic-with-validated-hypotheses'
    match = ma.size == claim.size_a and mb.size == claim.size_b
    note = None
    if not match:
        note = (f"claimed ({claim.size_a}, {claim.size_b}), "
                f"recomputed ({ma.size}, {mb.size})")
    elif sign(ma.size - mb.size) != expected_sign(i):
        match = False
        note = f"recomputed sign {sign(ma.size - mb.size):+d}, expected {expected_sign(i):+d}"

    result = CheckpointResult(
        i=i, h=claim.h, claimed_a=claim.size_a, claimed_b=claim.size_b,
        size_a=ma.size, size_b=mb.size, method=method,
        lemmas=list(ma.lemmas + mb.lemmas), match=match, note=note,
    )
    return result, max(ma.span, mb.span), sum(brute), 2 - sum(brute)


class _Checks:
    """Collects contradictions (failures) and unverifiable points (notes)."""

    def __init__(self):
        self.failures: List[str] = []
        self.notes: List[str] = []

    def require(self, condition: bool, message: str) -> bool:
        if not condition:
            self.failures.append(message)
        return condition


def _check_shape(cert: RaceCertificate, A: Recipe, B: Recipe, checks: _Checks) -> None:
    checks.require(cert.version == CERTIFICATE_VERSION,
                   f"unsupported version {cert.version}")
    checks.require(len(cert.checkpoints) == cert.m == len(cert.trace),
                   f"m = {cert.m} but {len(cert.checkpoints)} checkpoints and {len(cert.trace)} steps")
    checks.require(cert.m >= 1, "a race needs at least one checkpoint")
    checks.require(recipe_len(A) == recipe_len(B),
                   f"|A| = {recipe_len(A)} != |B| = {recipe_len(B)}")
    for name, x in (('A', A), ('B', B)):
        checks.require(recipe_min(x) == 0, f"min({name}) != 0")
        checks.require(recipe_gcd(x) == 1, f"gcd({name}) = {recipe_gcd(x)}, expected 1")
    if cert.mode == 'equal-diam':
        checks.require(recipe_max(A) == recipe_max(B),
                       f"diameters differ: {recipe_max(A)} != {recipe_max(B)}")

    for name, x, listed in (('A', A, cert.a_elements), ('B', B, cert.b_elements)):
        if listed is not None:
            checks.require(len(listed) == recipe_len(x) and materialize(x).tolist() == listed,
                           f"explicit elements of {name} do not match its recipe")

    hs = [c.h for c in cert.checkpoints]
    checks.require(all(h2 > h1 for h1, h2 in zip(hs, hs[1:])),
                   f"checkpoints not strictly increasing: {hs}")
    for i, claim in enumerate(cert.checkpoints, start=1):
        checks.require(claim.sign == expected_sign(i),
                       f"checkpoint {i}: claimed sign {claim.sign}, expected {expected_sign(i):+d}")
        checks.require(claim.sign == sign(claim.size_a - claim.size_b),
                       f"checkpoint {i}: claimed sign does not match claimed sizes")
    if cert.status == 'partial':
        checks.notes.append(
            f"partial certificate: {cert.m} of {cert.requested_m} checkpoints ({cert.failure})"
        )
    else:
        checks.require(cert.failure is None and cert.m == cert.requested_m,
                       "complete certificate with a failure marker or fewer checkpoints than requested")


def _recheck_constants(step: StepRecord, k: int, bases: Tuple[Recipe, Recipe],
                       budget: Budget, checks: _Checks) -> None:
    """Recompute the recorded eventual-structure constants of a step's inputs."""
    for name, base, h0, delta, gamma in (('A', bases[0], step.h0_a, step.delta_a, step.gamma_a),
                                         ('B', bases[1], step.h0_b, step.delta_b, step.gamma_b)):
        if recipe_len(base) > STRUCTURE_RECHECK_MAX_ELEMS:
            checks.notes.append(f"step {k + 1}: structure of {name} not rechecked (too large)")
            continue
        try:
            es = structure_of(materialize(base), budget)
        except RESOURCE_ERRORS as exc:
            checks.notes.append(f"step {k + 1}: structure of {name} not rechecked: {exc}")
            continue
        checks.require(h0 == es.h0,
                       f"step {k + 1}: recorded h0 of {name} = {h0}, recomputed {es.h0}")
        checks.require(delta == es.delta and gamma == es.gamma,
                       f"step {k + 1}: recorded delta/gamma of {name} = {delta}/{gamma}, "
                       f"recomputed {es.delta}/{es.gamma}")
        if step.kind == 'equal-diameter-extend':
            checks.require(step.H is not None and step.H > es.h0,
                           f"step {k + 1}: H = {step.H} must exceed h0 of {name} = {es.h0}")
            recorded = step.a_const if name == 'A' else step.b_const
            checks.require(recorded == es.deficit_constant,
                           f"step {k + 1}: recorded constant of {name} = {recorded}, "
                           f"recomputed {es.deficit_constant}")


def _check_trace(cert: RaceCertificate, A: Recipe, B: Recipe, budget: Budget,
                 checks: _Checks) -> None:
    levels_a, levels_b = recipe_levels(A), recipe_levels(B)
    if not checks.require(len(levels_a) == len(levels_b) == cert.m,
                          f"recipe depths {len(levels_a)}/{len(levels_b)} do not match m = {cert.m}"):
        return
    if len(cert.trace) != cert.m or len(cert.checkpoints) != cert.m:
        return
    hs = [c.h for c in cert.checkpoints]
    expected_kind = 'equal-diameter-extend' if cert.mode == 'equal-diam' else 'free-diameter-extend'

    for k, step in enumerate(cert.trace):
        checks.require(step.m == k + 1, f"step {k + 1}: recorded m = {step.m}")
        checks.require(step.h_new == hs[k], f"step {k + 1}: h_new = {step.h_new}, checkpoint h = {hs[k]}")
        if k == 0:
            checks.require(step.kind == 'base', f"step 1 is {step.kind!r}, expected 'base'")
            continue
        if not checks.require(step.kind == expected_kind,
                              f"step {k + 1} is {step.kind!r}, expected {expected_kind!r}"):
            continue

        box_a, box_b = levels_a[k], levels_b[k]
        base_a, base_b = levels_a[k - 1], levels_b[k - 1]
        if not (isinstance(box_a, BoxedSet) and isinstance(box_b, BoxedSet)):
            checks.failures.append(f"step {k + 1}: recipe level is not a box")
            continue
        h_prev = hs[k - 1]
        checks.require(step.h_prev == h_prev, f"step {k + 1}: h_prev = {step.h_prev}, expected {h_prev}")
        checks.require(step.h_new > h_prev, f"step {k + 1}: h_new = {step.h_new} not above {h_prev}")
        N = step.N

        if cert.mode == 'free-diam':
            checks.require(N == max(recipe_max(base_a), recipe_max(base_b)),
                           f"step {k + 1}: N = {N} is not the larger input diameter")
            alpha, beta, r = step.alpha, step.beta, step.r
            if not checks.require(None not in (alpha, beta, r), f"step {k + 1}: missing alpha, beta or r"):
                continue
            checks.require(box_a.tau == alpha and box_b.tau == beta,
                           f"step {k + 1}: spacings {box_a.tau}/{box_b.tau} differ from "
                           f"recorded alpha/beta {alpha}/{beta}")
            checks.require(r >= 2 and box_a.index == interval_index(r) == box_b.index,
                           f"step {k + 1}: index sets are not [0, {r - 1}]")
            checks.require(min(alpha, beta) > h_prev * N,
                           f"step {k + 1}: alpha, beta must exceed h_prev*N = {h_prev * N}")
            checks.require(sign(alpha - beta) == expected_sign(k + 1),
                           f"step {k + 1}: alpha < beta must hold exactly when step {k} is odd")
            checks.require((r - 1) * abs(beta - alpha) >= N - 1,
                           f"step {k + 1}: (r-1)|beta-alpha| < N - 1")
        else:
            H, tau = step.H, step.tau
            if not checks.require(None not in (H, tau, step.crossing, step.a_const, step.b_const),
                                  f"step {k + 1}: missing H, tau, crossing or constants"):
                continue
            checks.require(N == recipe_max(base_a) == recipe_max(base_b),
                           f"step {k + 1}: N = {N} is not the common input diameter")
            checks.require(box_a.tau == box_b.tau == tau,
                           f"step {k + 1}: spacings {box_a.tau}/{box_b.tau} differ from tau = {tau}")
            checks.require(tau > 2 * H * N, f"step {k + 1}: tau = {tau} must exceed 2HN = {2 * H * N}")
            floor = max(h_prev, step.h0_a or 0, step.h0_b or 0, 2)
            checks.require(H > floor, f"step {k + 1}: H = {H} must exceed max(h_prev, h0_A, h0_B, 2) = {floor}")
            checks.require(step.h_new == 2 * H - 2, f"step {k + 1}: h_new = {step.h_new} != 2H - 2")
            a_gets_I = k % 2 == 1
            want_a, want_b = ('I', 'J') if a_gets_I else ('J', 'I')
            checks.require(step.a_index == want_a and step.b_index == want_b,
                           f"step {k + 1}: index assignment {step.a_index}/{step.b_index}, "
                           f"expected {want_a}/{want_b}")
            try:
                I, J = index_set_I(H), index_set_J(H)
            except PreconditionViolation as exc:
                checks.failures.append(f"step {k + 1}: {exc}")
                continue
            checks.require(box_a.index == (I if a_gets_I else J) and box_b.index == (J if a_gets_I else I),
                           f"step {k + 1}: index sets do not match the recorded assignment")
            p, q = (step.a_const, step.b_const) if a_gets_I else (step.b_const, step.a_const)
            checks.require(step.crossing == crossing_value(N, H, p, q) and step.crossing > 0,
                           f"step {k + 1}: crossing {step.crossing} is not the positive "
                           f"value {crossing_value(N, H, p, q)}")

        _recheck_constants(step, k, (base_a, base_b), budget, checks)


def _decode(cert: RaceCertificate, checks: _Checks) -> Optional[Tuple[Recipe, Recipe]]:
    try:
        return recipe_from_json(cert.a), recipe_from_json(cert.b)
    except (ParseError, ValidityError, PreconditionViolation) as exc:
        checks.failures.append(f"invalid set recipe: {exc}")
        return None


def verify_certificate(cert: RaceCertificate, budget: Budget = DEFAULT_BUDGET,
                       n_jobs: int = 1) -> VerificationReport:
    """Check a certificate without trusting any recorded value.

    Checkpoints are recomputed concurrently when n_jobs > 1; results keep
    checkpoint order.
    """
    checks = _Checks()
    resources = ResourceUsage(dense_bits=budget.dense_bits, sparse_max_elems=budget.sparse_max_elems)

    decoded = _decode(cert, checks)
    if decoded is None:
        return VerificationReport(verdict='fail', mode=cert.mode, m=cert.m,
                                  issues=checks.failures, resources=resources)
    A, B = decoded

    _check_shape(cert, A, B, checks)
    _check_trace(cert, A, B, budget, checks)

    logger.info("Verifying %d checkpoints (n_jobs=%d)", len(cert.checkpoints), n_jobs)
    outcomes = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_check_checkpoint)(i, claim, A, B, budget)
        for i, claim in enumerate(cert.checkpoints, start=1)
    )

    results = []
    for result, span, brute, analytic in outcomes:
        results.append(result)
        resources.largest_span = max(resources.largest_span, span)
        resources.brute_force_sizes += brute
        resources.analytic_sizes += analytic
        if result.match is False:
            checks.failures.append(f"checkpoint {result.i} (h={result.h}): {result.note}")
        elif result.method == 'inconclusive':
            checks.notes.append(f"checkpoint {result.i} (h={result.h}) inconclusive: {result.note}")

    if checks.failures:
        verdict = 'fail'
    elif cert.status == 'partial' or any(r.method == 'inconclusive' for r in results):
        verdict = 'inconclusive'
    else:
        verdict = 'pass'
    logger.info("Verdict: %s (%d failures, %d notes)", verdict, len(checks.failures), len(checks.notes))

    return VerificationReport(
        verdict=verdict, mode=cert.mode, m=cert.m, checkpoints=results,
        issues=checks.failures + checks.notes, resources=resources,
    )
