"""p-adic C^r functions on O_F, moment distributions and two-chart criteria on P^1(F)."""

from .chars import Character, analyticity_level, chi_eval, chi_local_expansion, chi_val_p
from .dist import (
    MomentTable,
    avv_norm,
    consistency_check,
    dirac,
    growth_table,
    pair,
    random_consistent,
    translate_scale_action,
    velu_check,
)
from .field import INF, FieldDescriptor, LogNorm, PadicElement, PrecisionExhausted
from .funcspace import (
    CoverageExceeded,
    LocallyPolyFunction,
    LocalPolynomial,
    cr_norm_enum,
    cr_norm_upper,
    indicator,
    polynomial_function,
    remainder_profile,
    scale_into_disk,
    subspace_check,
)
from .pone import (
    ConditionRange,
    InductionDatum,
    PreconditionFailed,
    TwoChartDistribution,
    TwoChartFunction,
    act,
    cond_A_check,
    cond_B_check,
    datum_analysis,
    equivalence_harness,
    funzionicr_truncations,
    lattice_generators,
    nullity_collapse,
)

__version__ = "0.1.0"
