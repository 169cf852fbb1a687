"""
Tests for the certificate format and the independent verifier.
"""

import copy
import json
import random

import pytest

from sumsets.errors import ParseError
from sumsets.intset import Budget
from sumsets.pipeline import run_pipeline
from sumsets.race import build_race
from sumsets.schema import RaceCertificate, canonical_json, dump_certificate, load_certificate, parse_certificate
from sumsets.verifier import verify_certificate


@pytest.fixture(scope='module')
def cert():
    return build_race(2, 'equal-diam')


@pytest.fixture(scope='module')
def cert_data(cert):
    return json.loads(canonical_json(cert))


def mutated(data, change):
    data = copy.deepcopy(data)
    change(data)
    return RaceCertificate.model_validate(data)


def test_canonical_json_is_deterministic(cert):
    assert canonical_json(build_race(2, 'equal-diam')) == canonical_json(cert)


def test_big_integers_are_strings(cert_data):
    assert cert_data['checkpoints'][1]['size_a'] == '357'
    assert cert_data['checkpoints'][1]['size_b'] == '400'
    assert cert_data['a']['tau'] == '25'
    assert cert_data['trace'][1]['crossing'] == '43'
    assert list(cert_data) == sorted(cert_data)


def test_written_certificate_loads_and_passes(cert, tmp_path):
    path = tmp_path / "race2.json"
    dump_certificate(cert, path)
    loaded = load_certificate(path)
    assert loaded == cert
    report = verify_certificate(loaded)
    assert report.verdict == 'pass'
    assert [r.method for r in report.checkpoints] == ['brute-force', 'brute-force']
    assert report.resources.brute_force_sizes == 4


def test_unreadable_certificates(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_certificate(bad)
    with pytest.raises(ParseError):
        load_certificate(tmp_path / "missing.json")
    with pytest.raises(ParseError):
        parse_certificate(json.dumps({'version': 1, 'mode': 'equal-diam'}))
    with pytest.raises(ParseError):
        parse_certificate(json.dumps({'mode': 'sideways'}))


def test_size_off_by_one_fails_at_that_checkpoint(cert_data):
    def change(d):
        d['checkpoints'][1]['size_b'] = str(int(d['checkpoints'][1]['size_b']) + 1)
    report = verify_certificate(mutated(cert_data, change))
    assert report.verdict == 'fail'
    assert report.checkpoints[1].match is False
    assert report.checkpoints[0].match is True
    assert any('checkpoint 2' in issue for issue in report.issues)


def test_sign_flip_fails(cert_data):
    def change(d):
        d['checkpoints'][0]['sign'] = -1
    assert verify_certificate(mutated(cert_data, change)).verdict == 'fail'


def test_tau_edit_fails(cert_data):
    def change(d):
        d['a']['tau'] = str(int(d['a']['tau']) + 1)
    report = verify_certificate(mutated(cert_data, change))
    assert report.verdict == 'fail'


def test_tau_below_the_box_bound_fails(cert_data):
    def change(d):
        d['b']['tau'] = '3'
    report = verify_certificate(mutated(cert_data, change))
    assert report.verdict == 'fail'
    assert any('recipe' in issue for issue in report.issues)


def test_trace_hypothesis_edit_fails(cert_data):
    def change(d):
        d['trace'][1]['tau'] = str(2 * 3 * 4)
    report = verify_certificate(mutated(cert_data, change))
    assert report.verdict == 'fail'
    assert any('2HN' in issue for issue in report.issues)


def test_onset_edit_fails(cert_data):
    def change(d):
        d['trace'][1]['h0_a'] = d['trace'][1]['h0_b'] = 99
    report = verify_certificate(mutated(cert_data, change))
    assert report.verdict == 'fail'
    assert any('recorded h0 of A = 99' in issue for issue in report.issues)
    assert any('max(h_prev, h0_A, h0_B, 2) = 99' in issue for issue in report.issues)


def test_squeezed_budget_uses_validated_size_laws(cert):
    report = verify_certificate(cert, Budget(dense_bits=64))
    assert report.verdict == 'pass'
    assert report.checkpoints[1].method == 'analytic-with-validated-hypotheses'
    assert any('product law' in lemma for lemma in report.checkpoints[1].lemmas)


def test_budget_too_small_for_any_method_is_inconclusive(cert):
    report = verify_certificate(cert, Budget(dense_bits=4, sparse_max_elems=1))
    assert report.verdict == 'inconclusive'
    assert all(r.method == 'inconclusive' for r in report.checkpoints)


def test_partial_certificate_is_inconclusive():
    partial = build_race(3, 'equal-diam', budget=Budget(dense_bits=700, sparse_max_elems=1))
    report = verify_certificate(partial)
    assert report.verdict == 'inconclusive'
    assert any('partial' in issue for issue in report.issues)


def test_parallel_verification_keeps_order(cert):
    serial = verify_certificate(cert, n_jobs=1)
    parallel = verify_certificate(cert, n_jobs=2)
    assert parallel.model_dump() == serial.model_dump()


def test_random_corruptions_never_pass(cert_data):
    rng = random.Random(20251019)

    def bump(value):
        return str(int(value) + rng.choice([-1, 1]))

    def corrupt_size(d):
        claim = rng.choice(d['checkpoints'])
        key = rng.choice(['size_a', 'size_b'])
        claim[key] = bump(claim[key])

    def corrupt_sign(d):
        claim = rng.choice(d['checkpoints'])
        claim['sign'] = -claim['sign']

    def corrupt_recipe_tau(d):
        side = rng.choice(['a', 'b'])
        d[side]['tau'] = str(int(d[side]['tau']) + rng.choice([-5, -2, -1, 1, 3, 10]))

    def corrupt_trace_tau(d):
        d['trace'][1]['tau'] = bump(d['trace'][1]['tau'])

    def corrupt_checkpoint_h(d):
        claim = rng.choice(d['checkpoints'])
        claim['h'] = claim['h'] + 1

    def corrupt_onset(d):
        key = rng.choice(['h0_a', 'h0_b'])
        d['trace'][1][key] = d['trace'][1][key] + rng.choice([-1, 1, 5])

    corruptions = [corrupt_size, corrupt_sign, corrupt_recipe_tau, corrupt_trace_tau, corrupt_checkpoint_h,
                   corrupt_onset]
    for _ in range(50):
        try:
            candidate = mutated(cert_data, rng.choice(corruptions))
        except Exception:
            continue
        assert verify_certificate(candidate).verdict != 'pass'


def test_pipeline_writes_a_verified_certificate(tmp_path):
    out = tmp_path / "nested" / "race2.json"
    result = run_pipeline(2, 'equal-diam', output_file=str(out))
    assert result['success'] and result['error'] is None
    assert result['report'].verdict == 'pass'
    assert load_certificate(out) == result['certificate']


def test_pipeline_reports_a_missing_base_pair():
    result = run_pipeline(1, 'equal-diam', base_n_max=3)
    assert not result['success']
    assert 'NoBasePair' in result['error']
    assert result['certificate'] is None
