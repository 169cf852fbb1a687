#!/usr/bin/env python3
"""
End-to-end race constructions

Builds full certificates, verifies them independently and re-derives the
per-step crossing values by brute force on the materialized sets.
"""

import pytest

from sumsets.boxing import materialize, recipe_from_json, recipe_levels
from sumsets.intset import hfold
from sumsets.pipeline import run_pipeline
from sumsets.race import build_race, expected_sign
from sumsets.verifier import verify_certificate


@pytest.mark.slow
def test_three_checkpoint_equal_diameter_race():
    cert = build_race(3, 'equal-diam')
    assert cert.status == 'complete'

    report = verify_certificate(cert)
    assert report.verdict == 'pass'
    assert all(r.method == 'brute-force' for r in report.checkpoints)

    A, B = recipe_from_json(cert.a), recipe_from_json(cert.b)
    flat_a, flat_b = materialize(A), materialize(B)
    assert flat_a.max == flat_b.max
    assert len(flat_a) == len(flat_b) == 64
    assert [c.sign for c in cert.checkpoints] == [1, -1, 1]
    assert [c.sign for c in cert.checkpoints] == [expected_sign(i) for i in (1, 2, 3)]

    last = cert.trace[-1]
    assert cert.checkpoints[-1].h == 2 * last.H - 2

    # each step's new checkpoint separates its own two sets by the recorded crossing value
    for step, level_a, level_b in zip(cert.trace[1:], recipe_levels(A)[1:], recipe_levels(B)[1:]):
        size_a = len(hfold(materialize(level_a), step.h_new))
        size_b = len(hfold(materialize(level_b), step.h_new))
        gap = size_b - size_a if step.a_index == 'I' else size_a - size_b
        assert gap == step.crossing > 0


@pytest.mark.slow
def test_four_checkpoint_free_diameter_race(tmp_path):
    result = run_pipeline(4, 'free-diam', output_file=str(tmp_path / "race4.json"))
    assert result['success'], result['error']
    assert result['report'].verdict == 'pass'
    cert = result['certificate']
    assert [c.sign for c in cert.checkpoints] == [1, -1, 1, -1]
    assert all(step.kind == 'free-diameter-extend' for step in cert.trace[1:])
