#!/usr/bin/env python3
"""
Race Pipeline Integration Module

This module provides a unified interface to run the complete race pipeline:
1. Race construction (base pair search + extension steps)
2. Independent self-verification of the certificate
3. Canonical JSON output

Usage:
    from sumsets.pipeline import run_pipeline

    result = run_pipeline(m=3, mode='equal-diam', output_file='race3.json')
"""

import logging
import os
from typing import Any, Dict, Optional

from .errors import SumsetError
from .intset import DEFAULT_BUDGET, Budget
from .race import DEFAULT_BASE_N_MAX, DEFAULT_ELEMENT_LIST_CAP, DEFAULT_FLIP_SCAN_CAP, build_race
from .schema import dump_certificate
from .verifier import verify_certificate

logger = logging.getLogger(__name__)


def run_pipeline(m: int, mode: str, output_file: Optional[str] = None,
                 budget: Budget = DEFAULT_BUDGET,
                 base_n_max: int = DEFAULT_BASE_N_MAX,
                 scan_cap: int = DEFAULT_FLIP_SCAN_CAP,
                 element_cap: int = DEFAULT_ELEMENT_LIST_CAP,
                 verify: bool = True,
                 n_jobs: int = 1) -> Dict[str, Any]:
    """
    Build a race certificate, verify it and optionally write it to disk.

    Args:
        m: number of alternating checkpoints
        mode: 'equal-diam' or 'free-diam'
        output_file: where to write the certificate JSON (skipped when None)
        budget: resource ceiling for every materialization
        base_n_max: largest diameter tried by the base pair search
        scan_cap: how far past h_m a free-diameter step scans for its flip
        element_cap: explicit element lists are written only up to this cardinality
        verify: run the independent verifier on the result
        n_jobs: parallel checkpoint verifications

    Returns:
        Dictionary containing:
        - success: bool (complete certificate, and a passing report when verified)
        - error: str (if failed)
        - certificate: RaceCertificate (possibly partial)
        - report: VerificationReport (if verified)
        - output_file: path written (if any)
    """

    result = {
        'success': False,
        'error': None,
        'certificate': None,
        'report': None,
        'output_file': None,
    }

    logger.info("=" * 80)
    logger.info("STARTING RACE PIPELINE")
    logger.info("m: %d  mode: %s", m, mode)
    logger.info("Budget: %d dense bits, %d sparse elements", budget.dense_bits, budget.sparse_max_elems)
    logger.info("Verification: %s", 'ENABLED' if verify else 'DISABLED')
    logger.info("=" * 80)

    try:
        # STEP 1: Construction
        logger.info("--- STEP 1: RACE CONSTRUCTION ---")
        certificate = build_race(m, mode, budget=budget, n_max=base_n_max,
                                 scan_cap=scan_cap, element_cap=element_cap)
        result['certificate'] = certificate
        checkpoints = [c.h for c in certificate.checkpoints]
        logger.info("Construction %s: checkpoints %s", certificate.status, checkpoints)
        if certificate.status != 'complete':
            result['error'] = certificate.failure

        # STEP 2: Self-verification
        if verify:
            logger.info("--- STEP 2: VERIFICATION ---")
            report = verify_certificate(certificate, budget=budget, n_jobs=n_jobs)
            result['report'] = report
            logger.info("Verdict: %s", report.verdict)
            if report.verdict != 'pass' and result['error'] is None:
                result['error'] = f"self-verification returned {report.verdict}: " + '; '.join(report.issues)

        # STEP 3: Output
        if output_file:
            logger.info("--- STEP 3: OUTPUT ---")
            directory = os.path.dirname(output_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            dump_certificate(certificate, output_file)
            result['output_file'] = output_file
            logger.info("Wrote %s", output_file)

        result['success'] = result['error'] is None

        logger.info("=" * 80)
        logger.info("PIPELINE %s", 'COMPLETE' if result['success'] else 'FINISHED WITH ERRORS')
        logger.info("=" * 80)

    except SumsetError as e:
        result['error'] = f"{type(e).__name__}: {e}"
        logger.exception("Pipeline failed: %s", e)

    return result
