"""
Tests for the sumrace command line: outputs and the exit-code contract.
"""

import json

import click
from typer.testing import CliRunner

import main
from main import EXIT_FAILURE, EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_VERIFY_FAILED, app, run

runner = CliRunner()


def test_profile_csv(capsys):
    assert run(['profile', '--set', '0,1,3', '--hmax', '5', '--format', 'csv']) == EXIT_OK
    assert capsys.readouterr().out == "h,size,first_difference\n1,3,\n2,6,3\n3,9,3\n4,12,3\n5,15,3\n"


def test_profile_json(capsys):
    assert run(['profile', '--set', '0,1', '--hmax', '4', '--format', 'json']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data['sizes'] == [2, 3, 4, 5]
    assert data['first_differences'] == [1, 1, 1]


def test_profile_reads_a_set_file(tmp_path, capsys):
    path = tmp_path / "sets.txt"
    path.write_text("# base\n0,1,3\n")
    assert run(['profile', '--file', str(path), '--hmax', '2', '--format', 'json']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['sizes'] == [3, 6]


def test_profile_rejects_an_empty_set():
    assert run(['profile', '--set', '']) == EXIT_USAGE
    assert run(['profile', '--set', '0,1', '--hmax', '0']) == EXIT_USAGE


def test_structure_of_a_normalized_set(capsys):
    assert run(['structure', '--set', '0,2,3']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert (data['delta'], data['h0'], data['N']) == (1, 2, 3)


def test_structure_normalizes_first(capsys):
    assert run(['structure', '--set', '0,4,6']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data['input'] == [0, 4, 6]
    assert data['normalization'] == {'shift': 0, 'scale': 2, 'set': [0, 2, 3]}
    assert data['delta'] == 1


def test_structure_of_an_interval_and_a_singleton(capsys):
    assert run(['structure', '--set', '0,1']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['delta'] == 0
    assert run(['structure', '--set', '5']) == EXIT_USAGE


def test_race_of_reflected_sets_is_flat(capsys):
    assert run(['race', '--a', '0,1,3', '--b', '0,2,3', '--hmax', '3', '--format', 'csv']) == EXIT_OK
    assert capsys.readouterr().out == "h,size_a,size_b,sign\n1,3,3,0\n2,6,6,0\n3,9,9,0\n"

    assert run(['race', '--a', '0,1,3', '--b', '0,2,3', '--hmax', '3', '--format', 'json']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['alternations'] == 0


def test_race_keeps_rows_computed_before_the_budget_ran_out(capsys):
    code = run(['race', '--a', '0,1,3', '--b', '0,2,3', '--hmax', '5', '--format', 'csv',
                '--dense-bits', '8', '--sparse-max-elems', '1'])
    captured = capsys.readouterr()
    assert code == EXIT_FAILURE
    assert captured.out == "h,size_a,size_b,sign\n1,3,3,0\n2,6,6,0\n"
    assert "first uncomputed h = 3" in captured.err


def test_construct_rejects_bad_arguments():
    assert run(['construct', '--m', '0']) == EXIT_USAGE
    assert run(['construct', '--m', '1', '--mode', 'sideways']) == EXIT_USAGE


def test_construct_writes_to_stdout(capsys):
    assert run(['construct', '--m', '1', '--mode', 'free-diam']) == EXIT_OK
    cert = json.loads(capsys.readouterr().out)
    assert cert['mode'] == 'free-diam'
    assert cert['a_elements'] == [0, 1, 3] and cert['b_elements'] == [0, 1, 2]


def test_construct_then_verify(tmp_path, capsys):
    path = tmp_path / "race2.json"
    assert run(['construct', '--m', '2', '--out', str(path)]) == EXIT_OK
    assert run(['verify', str(path), '--format', 'csv']) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "i,h,claimed_a,claimed_b,size_a,size_b,method,match"
    assert "2,4,357,400,357,400,brute-force,true" in out

    data = json.loads(path.read_text())
    data['checkpoints'][1]['size_a'] = '356'
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(data))
    assert run(['verify', str(tampered)]) == EXIT_VERIFY_FAILED


def test_verify_unreadable_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("not json at all")
    assert run(['verify', str(bad)]) == EXIT_PARSE
    assert run(['verify', str(tmp_path / "missing.json")]) == EXIT_PARSE
    assert run(['verify', str(bad), '--mode', 'equal-diam']) == EXIT_USAGE


def test_construct_failure_exits_with_the_trace(capsys):
    assert run(['construct', '--m', '1', '--n-max', '3']) == EXIT_FAILURE
    assert "NoBasePair" in capsys.readouterr().err


def test_typer_runner_profile():
    result = runner.invoke(app, ['profile', '--set', '0,1,3', '--hmax', '3', '--format', 'json'])
    assert result.exit_code == 0
    assert json.loads(result.stdout)['sizes'] == [3, 6, 9]


def test_interrupt_is_a_failure_not_a_verdict(monkeypatch):
    def interrupted(*args, **kwargs):
        raise click.exceptions.Abort()
    monkeypatch.setattr(main, 'run_pipeline', interrupted)
    assert run(['construct', '--m', '1']) == EXIT_FAILURE
