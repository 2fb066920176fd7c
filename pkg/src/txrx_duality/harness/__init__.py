"""Seeded Monte Carlo experiments, link-level checks and result files."""

from .experiments import (ExperimentSpec, ResultRow, SweepSummary, paper_config, run_experiment,
                          run_single, run_sweep_gamma, run_sweep_weight, run_verify_link,
                          summarize)
from .link import LinkVerification, qpsk_ser_reference, verify_link
from .results import emit_results, read_metadata, read_results

__all__ = ['ExperimentSpec', 'ResultRow', 'SweepSummary', 'paper_config', 'run_experiment',
           'run_single', 'run_sweep_gamma', 'run_sweep_weight', 'run_verify_link', 'summarize',
           'LinkVerification', 'qpsk_ser_reference', 'verify_link', 'emit_results',
           'read_metadata', 'read_results']
