"""Order-2 digital sequences over F2 and their L_p discrepancy."""

from __future__ import annotations

__version__ = "0.1.0"

from .discrepancy import (
    DiscrepancyReport,
    GuardCeilingError,
    HaarIndex,
    decay_profile,
    haar_coefficient,
    l2_exact,
    littlewood_paley_bound,
    local_discrepancy,
    lp_cellwise,
    parseval_l2,
    star_discrepancy,
)
from .genmat import GenMatrixSet, interlace, order2_matrices, tezuka_matrices, truncate
from .gf2 import BinMatrix, GF2Poly, irreducibles_up_to, rank_f2
from .netverify import check_equidistribution, is_order_alpha_net, t_value
from .sequence import (
    DyadicPointSet,
    SequenceSpec,
    prefix,
    prefix_decompose,
    symmetrized_vdc,
    van_der_corput,
)

__all__ = [
    "BinMatrix",
    "DiscrepancyReport",
    "DyadicPointSet",
    "GF2Poly",
    "GenMatrixSet",
    "GuardCeilingError",
    "HaarIndex",
    "SequenceSpec",
    "check_equidistribution",
    "decay_profile",
    "haar_coefficient",
    "interlace",
    "irreducibles_up_to",
    "is_order_alpha_net",
    "l2_exact",
    "littlewood_paley_bound",
    "local_discrepancy",
    "lp_cellwise",
    "order2_matrices",
    "parseval_l2",
    "prefix",
    "prefix_decompose",
    "rank_f2",
    "star_discrepancy",
    "symmetrized_vdc",
    "t_value",
    "tezuka_matrices",
    "truncate",
    "van_der_corput",
]
