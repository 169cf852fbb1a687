import csv
import io
import json
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import List, Optional

import click
import typer
from pydantic import BaseModel, Field, ValidationError
from rich.console import Console
from rich.table import Table

import config
from sumsets.errors import (
    BudgetExceeded,
    ConstructionFailed,
    Inconclusive,
    ParseError,
    StabilizationNotFound,
    SumsetError,
)
from sumsets.intset import Budget, IntSet, growth_profile, normalize, parse_set_literal, read_set_file
from sumsets.pipeline import run_pipeline
from sumsets.race import RaceMode, count_alternations, iter_sign_rows
from sumsets.schema import canonical_json, load_certificate
from sumsets.structure import eventual_structure
from sumsets.verifier import verify_certificate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_FAILURE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_PARSE = 65

VERDICT_EXIT = {'pass': EXIT_OK, 'fail': EXIT_VERIFY_FAILED, 'inconclusive': EXIT_INCONCLUSIVE}

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="Sumset races: construct, verify and explore h-fold sumset growth.")


class OutputFormat(str, Enum):
    human = 'human'
    csv = 'csv'
    json = 'json'


class RunConfig(BaseModel):
    """Merged command-line and environment settings for one invocation."""

    subcommand: str
    m: int = Field(1, ge=1)
    mode: RaceMode = RaceMode.EQUAL
    h_max: int = Field(1, ge=1)
    dense_bits: int = Field(config.DENSE_BITS, gt=0)
    sparse_max_elems: int = Field(config.SPARSE_MAX_ELEMS, gt=0)
    n_jobs: int = Field(config.N_JOBS, ge=1)
    out: Optional[Path] = None
    format: OutputFormat = OutputFormat.human

    @property
    def budget(self) -> Budget:
        return Budget(dense_bits=self.dense_bits, sparse_max_elems=self.sparse_max_elems)


# shared options
DenseBits = typer.Option(config.DENSE_BITS, '--dense-bits', help="Dense engine mask budget (bits).")
SparseMax = typer.Option(config.SPARSE_MAX_ELEMS, '--sparse-max-elems', help="Sparse engine element budget.")
NJobs = typer.Option(config.N_JOBS, '--n-jobs', help="Parallel checkpoint verifications.")
Format = typer.Option(OutputFormat.human, '--format', help="Output format.")


def _parse_set(text: Optional[str], name: str) -> IntSet:
    try:
        return parse_set_literal(text or '')
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint=name)


def _sets_from(literals: List[Optional[str]], file: Optional[Path], names: List[str]) -> List[IntSet]:
    """Sets from literals, or the first len(literals) sets of a file."""
    if file is None:
        return [_parse_set(text, name) for text, name in zip(literals, names)]
    sets = read_set_file(file)
    if len(sets) < len(literals):
        raise ParseError(f"{file} holds {len(sets)} sets, {len(literals)} needed")
    return sets[:len(literals)]


def _emit_csv(header: List[str], rows: List[List]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    sys.stdout.write(buffer.getvalue())


def _emit_table(title: str, header: List[str], rows: List[List]) -> None:
    table = Table(title=title)
    for column in header:
        table.add_column(column, justify='right')
    for row in rows:
        table.add_row(*(str(v) for v in row))
    Console().print(table)


# ============================================================================
# Commands
# ============================================================================

@app.command()
def construct(
    m: int = typer.Option(..., '--m', help="Number of alternating checkpoints."),
    mode: RaceMode = typer.Option(RaceMode.EQUAL, '--mode'),
    out: Optional[Path] = typer.Option(None, '--out', help="Certificate path (stdout when omitted)."),
    n_max: int = typer.Option(config.BASE_N_MAX, '--n-max', help="Largest base pair diameter tried."),
    dense_bits: int = DenseBits,
    sparse_max_elems: int = SparseMax,
    n_jobs: int = NJobs,
):
    """Build a race certificate and self-verify it."""
    cfg = RunConfig(subcommand='construct', m=m, mode=mode, out=out, dense_bits=dense_bits,
                    sparse_max_elems=sparse_max_elems, n_jobs=n_jobs)
    result = run_pipeline(cfg.m, cfg.mode.value, output_file=str(cfg.out) if cfg.out else None,
                          budget=cfg.budget, base_n_max=n_max, scan_cap=config.FLIP_SCAN_CAP,
                          element_cap=config.ELEMENT_LIST_CAP, n_jobs=cfg.n_jobs)
    certificate, report = result['certificate'], result['report']

    if certificate is not None and cfg.out is None:
        sys.stdout.write(canonical_json(certificate))
    if result['success']:
        raise typer.Exit(EXIT_OK)
    if certificate is not None and certificate.status == 'complete' and report is not None \
            and report.verdict == 'inconclusive':
        raise Inconclusive(result['error'])
    partial = certificate.model_dump(mode='json') if certificate is not None else None
    raise ConstructionFailed(result['error'] or "construction failed", partial=partial)


@app.command()
def verify(
    path: Path = typer.Argument(..., help="Certificate JSON file."),
    dense_bits: int = DenseBits,
    sparse_max_elems: int = SparseMax,
    n_jobs: int = NJobs,
    format: OutputFormat = Format,
):
    """Independently re-check a certificate: exit 0 pass, 1 fail, 3 inconclusive."""
    cfg = RunConfig(subcommand='verify', dense_bits=dense_bits, sparse_max_elems=sparse_max_elems,
                    n_jobs=n_jobs, format=format)
    certificate = load_certificate(path)
    report = verify_certificate(certificate, budget=cfg.budget, n_jobs=cfg.n_jobs)

    header = ['i', 'h', 'claimed_a', 'claimed_b', 'size_a', 'size_b', 'method', 'match']
    rows = [[r.i, r.h, r.claimed_a, r.claimed_b,
             '' if r.size_a is None else r.size_a, '' if r.size_b is None else r.size_b,
             r.method, '' if r.match is None else str(r.match).lower()]
            for r in report.checkpoints]
    if cfg.format is OutputFormat.json:
        sys.stdout.write(canonical_json(report))
    elif cfg.format is OutputFormat.csv:
        _emit_csv(header, rows)
    else:
        _emit_table(f"{path}: {report.verdict.upper()}", header, rows)
        for issue in report.issues:
            typer.echo(f"  - {issue}")
    raise typer.Exit(VERDICT_EXIT[report.verdict])


@app.command()
def profile(
    set_literal: Optional[str] = typer.Option(None, '--set', help='Set literal such as "0,1,3".'),
    file: Optional[Path] = typer.Option(None, '--file', help="Read the first set of a file instead."),
    h_max: int = typer.Option(10, '--hmax'),
    dense_bits: int = DenseBits,
    sparse_max_elems: int = SparseMax,
    format: OutputFormat = Format,
):
    """Print |hA| and its first differences for h = 1..hmax."""
    cfg = RunConfig(subcommand='profile', h_max=h_max, dense_bits=dense_bits,
                    sparse_max_elems=sparse_max_elems, format=format)
    (A,) = _sets_from([set_literal], file, ['--set'])
    sizes = growth_profile(A, cfg.h_max, cfg.budget).sizes
    rows = [[h, size, '' if h == 1 else size - sizes[h - 2]] for h, size in enumerate(sizes, start=1)]

    if cfg.format is OutputFormat.json:
        sys.stdout.write(json.dumps({
            'set': A.tolist(),
            'sizes': list(sizes),
            'first_differences': [b - a for a, b in zip(sizes, sizes[1:])],
        }, sort_keys=True, indent=2) + '\n')
    elif cfg.format is OutputFormat.csv:
        _emit_csv(['h', 'size', 'first_difference'], rows)
    else:
        _emit_table(f"growth of {A!r}", ['h', '|hA|', 'difference'], rows)
    raise typer.Exit(EXIT_OK)


@app.command()
def structure(
    set_literal: Optional[str] = typer.Option(None, '--set', help='Set literal such as "0,2,3".'),
    file: Optional[Path] = typer.Option(None, '--file'),
    dense_bits: int = DenseBits,
    sparse_max_elems: int = SparseMax,
):
    """Print the eventual structure of the normalized set as JSON."""
    cfg = RunConfig(subcommand='structure', dense_bits=dense_bits, sparse_max_elems=sparse_max_elems)
    (A,) = _sets_from([set_literal], file, ['--set'])
    if len(A) < 2:
        raise typer.BadParameter("eventual structure needs at least two elements", param_hint='--set')
    normalized, shift, scale = normalize(A)
    es = eventual_structure(normalized, cfg.budget)

    payload = es.to_dict()
    payload['input'] = A.tolist()
    payload['normalization'] = {'shift': shift, 'scale': scale, 'set': normalized.tolist()}
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + '\n')
    raise typer.Exit(EXIT_OK)


@app.command()
def race(
    a: Optional[str] = typer.Option(None, '--a', help="Set literal for A."),
    b: Optional[str] = typer.Option(None, '--b', help="Set literal for B."),
    file: Optional[Path] = typer.Option(None, '--file', help="Read A and B from the first two lines."),
    h_max: int = typer.Option(10, '--hmax'),
    dense_bits: int = DenseBits,
    sparse_max_elems: int = SparseMax,
    format: OutputFormat = Format,
):
    """Print the sign of |hA| - |hB| for h = 1..hmax."""
    cfg = RunConfig(subcommand='race', h_max=h_max, dense_bits=dense_bits,
                    sparse_max_elems=sparse_max_elems, format=format)
    A, B = _sets_from([a, b], file, ['--a', '--b'])

    rows = []
    budget_error = None
    try:
        for row in iter_sign_rows(A, B, cfg.h_max, cfg.budget):
            rows.append([row.h, row.size_a, row.size_b, row.sign])
    except BudgetExceeded as exc:
        budget_error = exc
    alternations = count_alternations([row[3] for row in rows])

    if cfg.format is OutputFormat.json:
        sys.stdout.write(json.dumps({
            'rows': [dict(zip(['h', 'size_a', 'size_b', 'sign'], row)) for row in rows],
            'alternations': alternations,
        }, sort_keys=True, indent=2) + '\n')
    elif cfg.format is OutputFormat.csv:
        _emit_csv(['h', 'size_a', 'size_b', 'sign'], rows)
    else:
        _emit_table(f"race {A!r} vs {B!r}", ['h', '|hA|', '|hB|', 'sign'], rows)
        typer.echo(f"alternations: {alternations}")

    if budget_error is not None:
        raise budget_error
    raise typer.Exit(EXIT_OK)


# ============================================================================
# Entry point
# ============================================================================

def _fail(message: str, code: int) -> int:
    typer.echo(f"error: {message}", err=True)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map every outcome onto the exit-code contract."""
    logging.basicConfig(level=config.LOG_LEVEL, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        code = app(args=argv, prog_name='sumrace', standalone_mode=False)
        return code if isinstance(code, int) else EXIT_OK
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except ValidationError as exc:
        return _fail(f"invalid arguments: {exc}", EXIT_USAGE)
    except ParseError as exc:
        return _fail(str(exc), EXIT_PARSE)
    except ConstructionFailed as exc:
        typer.echo(f"error: {exc}", err=True)
        if exc.partial is not None:
            typer.echo(json.dumps(exc.partial.get('trace', []), sort_keys=True, indent=2), err=True)
        return EXIT_FAILURE
    except BudgetExceeded as exc:
        where = f" (first uncomputed h = {exc.h})" if exc.h is not None else ""
        return _fail(f"budget exceeded{where}: {exc}", EXIT_FAILURE)
    except StabilizationNotFound as exc:
        return _fail(f"{exc}; sizes so far: {exc.profile}", EXIT_FAILURE)
    except Inconclusive as exc:
        return _fail(f"inconclusive: {exc}", EXIT_INCONCLUSIVE)
    except SumsetError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_FAILURE)
    except click.exceptions.Abort:
        return _fail("aborted", EXIT_FAILURE)


if __name__ == '__main__':
    sys.exit(run())
