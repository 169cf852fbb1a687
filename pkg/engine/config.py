"""
Runtime configuration, read once from the environment (and a .env file).

Every variable carries the SUMRACE_ prefix; command-line flags override
these values.
"""

import os

from dotenv import load_dotenv

load_dotenv()


def _int(name: str, default: int) -> int:
    return int(os.getenv(f"SUMRACE_{name}", default))


DENSE_BITS = _int("DENSE_BITS", 2 ** 27)
SPARSE_MAX_ELEMS = _int("SPARSE_MAX_ELEMS", 2 ** 22)
BASE_N_MAX = _int("BASE_N_MAX", 12)
FLIP_SCAN_CAP = _int("FLIP_SCAN_CAP", 4096)
N_JOBS = _int("N_JOBS", 1)
ELEMENT_LIST_CAP = _int("ELEMENT_LIST_CAP", 4096)
LOG_LEVEL = os.getenv("SUMRACE_LOG_LEVEL", "WARNING").upper()
