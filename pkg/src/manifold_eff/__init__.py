"""manifold-eff: asymptotic-efficiency machinery for manifold-valued parameters.

Subpackages: ``geometry`` (chart-based Riemannian kernel), ``models``
(Riemannian Gaussian families), ``estimators`` (Frechet mean, Hodges, AIPW,
single-index scores), ``bounds`` (curvature-corrected CRLB, convolution,
van Trees), ``harness`` (seeded Monte Carlo experiments and CLI).
"""

__version__ = "0.1.0"
