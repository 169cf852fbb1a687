"""
Wire format for race certificates and verification reports.

Certificates are versioned JSON documents. Big integers (sizes, spacings,
crossing values) are written as decimal strings; no floats appear anywhere.
The canonical writer sorts keys so identical inputs give byte-identical
files.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, ValidationError
from typing_extensions import Annotated

from .errors import ParseError

CERTIFICATE_VERSION = 1

# ints that travel as decimal strings
BigInt = Annotated[int, PlainSerializer(lambda v: str(v), return_type=str, when_used='json')]

Mode = Literal['equal-diam', 'free-diam']
StepKind = Literal['base', 'free-diameter-extend', 'equal-diameter-extend']
Method = Literal['brute-force', 'analytic']


class StepRecord(BaseModel):
    """One construction step: the base search or one extension."""

    model_config = ConfigDict(extra='forbid')

    kind: StepKind
    m: int = Field(description="number of checkpoints after this step")
    h_new: int
    N: BigInt

    # base search
    n_max: Optional[int] = None

    # free-diameter step
    alpha: Optional[BigInt] = None
    beta: Optional[BigInt] = None
    r: Optional[int] = None
    flip_method: Optional[Method] = None

    # equal-diameter step
    H: Optional[int] = None
    tau: Optional[BigInt] = None
    a_index: Optional[Literal['I', 'J']] = None
    b_index: Optional[Literal['I', 'J']] = None
    crossing: Optional[BigInt] = None

    # eventual structures of the step's input sets
    h_prev: Optional[int] = None
    h0_a: Optional[int] = None
    h0_b: Optional[int] = None
    delta_a: Optional[int] = None
    delta_b: Optional[int] = None
    gamma_a: Optional[int] = None
    gamma_b: Optional[int] = None
    a_const: Optional[int] = None
    b_const: Optional[int] = None


class CheckpointClaim(BaseModel):
    model_config = ConfigDict(extra='forbid')

    h: int
    size_a: BigInt
    size_b: BigInt
    sign: int
    method_a: Optional[Method] = None
    method_b: Optional[Method] = None


class RaceCertificate(BaseModel):
    model_config = ConfigDict(extra='forbid')

    version: int = CERTIFICATE_VERSION
    mode: Mode
    m: int
    requested_m: int
    status: Literal['complete', 'partial'] = 'complete'
    failure: Optional[str] = None
    a: Dict[str, Any]
    b: Dict[str, Any]
    a_elements: Optional[List[int]] = None
    b_elements: Optional[List[int]] = None
    checkpoints: List[CheckpointClaim]
    trace: List[StepRecord]


class CheckpointResult(BaseModel):
    model_config = ConfigDict(extra='forbid')

    i: int
    h: int
    claimed_a: BigInt
    claimed_b: BigInt
    size_a: Optional[BigInt] = None
    size_b: Optional[BigInt] = None
    method: Literal['brute-force', 'analytic-with-validated-hypotheses', 'inconclusive']
    lemmas: List[str] = Field(default_factory=list)
    match: Optional[bool] = None
    note: Optional[str] = None


class ResourceUsage(BaseModel):
    model_config = ConfigDict(extra='forbid')

    dense_bits: BigInt
    sparse_max_elems: BigInt
    largest_span: BigInt = 0
    brute_force_sizes: int = 0
    analytic_sizes: int = 0


class VerificationReport(BaseModel):
    model_config = ConfigDict(extra='forbid')

    verdict: Literal['pass', 'fail', 'inconclusive']
    mode: Optional[Mode] = None
    m: Optional[int] = None
    checkpoints: List[CheckpointResult] = Field(default_factory=list)
    issues: List[str] = Field(default_factory=list)
    resources: ResourceUsage


# ============================================================================
# Canonical JSON
# ============================================================================

def canonical_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode='json'), sort_keys=True, indent=2,
                      ensure_ascii=False) + '\n'


def dump_certificate(cert: RaceCertificate, path: Union[str, Path]) -> None:
    Path(path).write_text(canonical_json(cert), encoding='utf-8')


def parse_certificate(text: str) -> RaceCertificate:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"certificate is not valid JSON: {exc}") from exc
    try:
        return RaceCertificate.model_validate(data)
    except ValidationError as exc:
        raise ParseError(f"malformed certificate: {exc}") from exc


def load_certificate(path: Union[str, Path]) -> RaceCertificate:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ParseError(f"cannot read certificate {path}: {exc}") from exc
    return parse_certificate(text)
