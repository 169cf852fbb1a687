"""
Sumsets package for sumset races

Contains modules for:
- intset: finite integer sets, the two sumset engines and h-fold sumsets
- structure: eventual structure of hA (onset, fringes, deficit)
- boxing: translate unions tau*I + A and their size laws
- race: base pair search, extension steps and race construction
- schema: certificate and report models, canonical JSON
- verifier: independent certificate verification
- pipeline: construct-then-verify interface
"""

from .intset import Budget, IntSet, from_elements, hfold, parse_set_literal
from .pipeline import run_pipeline
from .race import RaceMode, build_race
from .structure import eventual_structure
from .verifier import verify_certificate

__all__ = [
    'Budget',
    'IntSet',
    'RaceMode',
    'build_race',
    'eventual_structure',
    'from_elements',
    'hfold',
    'parse_set_literal',
    'run_pipeline',
    'verify_certificate',
]
