"""Efficiency-bound computations."""
from .crlb import (
    BoundReport,
    bootstrap_gap_se,
    convolution_reference,
    crlb_asymptotic,
    crlb_curved,
    crlb_n,
    lam_reference,
    psd_gap,
)
from .van_trees import PriorSpec, bias_curvature_matrix, bump_prior, van_trees_bound

__all__ = [
    "BoundReport", "bootstrap_gap_se", "convolution_reference",
    "crlb_asymptotic", "crlb_curved", "crlb_n", "lam_reference", "psd_gap",
    "PriorSpec", "bias_curvature_matrix", "bump_prior", "van_trees_bound",
]
