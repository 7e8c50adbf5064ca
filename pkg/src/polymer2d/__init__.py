"""Desk-scale numerics for 2D lattice polymer partition-function moments.

Exact simple-walk kernels, partition-function dynamic programming,
transfer-matrix moments, renewal overlap tables, interaction-diagram
combinatorics, discrete exponential-moment lemmas, and reproducible
Monte Carlo over independent walks, with a CLI harness that emits CSV
reports, figures and re-runnable manifests.
"""

__version__ = "0.1.0"
