"""Parametric statistical families on manifolds."""
from .gaussian import FisherInfo, RiemannianGaussian, make_rng
from .fisher import fisher_information, fisher_information_hessian
from .dqm import (
    LanResult,
    anderson_darling_pvalue,
    dqm_residual,
    lan_replicates,
    lan_statistics,
)

__all__ = [
    "FisherInfo", "RiemannianGaussian", "make_rng",
    "fisher_information", "fisher_information_hessian",
    "LanResult", "anderson_darling_pvalue", "dqm_residual",
    "lan_replicates", "lan_statistics",
]
