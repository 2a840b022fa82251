"""Optimal privacy-utility trade-off for one-bit distribution estimation.

Exact rational mechanisms and block designs, closed-form trade-off curves
under local differential privacy and maximal leakage, the shared-randomness
schemes that attain them, and exact and Monte Carlo MSE analysis.
"""

from .bounds import lan_lower_bound, put, put_ldp, put_ml, zeta
from .designs import (
    BlockDesign,
    bd_mechanism,
    complete_block_design,
    concat_designs,
    dual_pair_partition,
    incidence_matrix,
    resolve,
    verify_design,
)
from .errors import (
    ConstructionError,
    DegenerateMechanismError,
    DesignError,
    DomainError,
    MechanismError,
    ResourceError,
)
from .mechanisms import (
    Mechanism,
    PrivacyConstraint,
    check_ldp,
    check_ml,
    check_one_bit,
    f_value,
    satisfies,
    sup_f,
    sup_f_closed_form,
)
from .schemes import (
    PlainScheme,
    SRScheme,
    build_optimal_sr_scheme,
    calibration_closed_form,
    calibration_numeric,
    estimate_plain,
    estimate_sr,
    to_plain_scheme,
)
from .sim import SimConfig, SimReport, exact_mse, mc_mse, run_trial, worst_case_scan

__version__ = "0.1.0"
