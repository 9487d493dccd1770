"""Multidimensional theta functions with characteristics: truncated
lattice-sum evaluation and numerical verification of the classical
identity families (Schroter, binary, Jacobi, Riemann, Weierstrass)."""

from .duals import Quadruple, jacobi_dual, ww_dual, ww_to_jacobi_sign_relation
from .harness import SuiteConfig, SuiteReport, generate_instance, replay, run_suite
from .identities import (
    CosetVector,
    IDENTITY_NAMES,
    IdentityInstance,
    ResidualReport,
    binary_residual,
    coset_enumerate,
    equivalence_suite,
    evaluate,
    jacobi_residual,
    lemma_decomposition_residual,
    linear_identity_residual,
    naive_weierstrass_residual,
    orthogonality_check,
    riemann_residual,
    schroter_residual,
    weierstrass_pfaffian_residual,
)
from .numerics import (
    LatticeShell,
    SkewMatrix,
    compensated_sum,
    enumerate_lattice,
    pfaffian,
    scalar_product,
    unit_phase,
)
from .theta import (
    Characteristic,
    EvalSettings,
    HalfPeriod,
    RiemannMatrix,
    ThetaPoint,
    enumerate_half_periods,
    parity,
    quasi_shift,
    reduce_characteristic,
    reflect,
    shift_characteristic,
    theta_eval,
    theta_eval_info,
    theta_values,
)

__version__ = "0.1.0"
