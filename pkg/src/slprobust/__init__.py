"""Robust symbol-level precoding for the multiuser MISO downlink.

Per-symbol power-minimizing precoders over distance-preserving
constructive-interference regions, with worst-case (norm-bounded) and
chance-constrained (Gaussian) robustness to channel-estimate errors, a
specialized second-order-cone solver, and a seeded Monte-Carlo harness.
"""

from .constellation import Constellation, mpsk, detect_ml
from .dpcir import CirDescriptor, Psi, dpcir_for, psi, inv_sqrt_gram, SingularGramError
from .channel import (
    UncertaintyModel,
    ChannelRealization,
    t_expand,
    sample_rayleigh,
    sample_error_spherical,
    sample_error_gaussian,
    realize,
)
from .socp import SocpRow, SocpProblem, SocpSolution, BarrierSolver, solve, verify
from .precoders import (
    ScenarioInputs,
    erf,
    erf_inv,
    rho,
    build_nonrobust,
    build_worstcase,
    build_stochastic,
    wc_infimum_unstructured,
    wc_infimum_structured,
    upsilon_covariance,
    ci_violation_mc,
    chance_product_bound,
)
from .sim import SimConfig, SlotOutcome, SweepRow, SweepResult, run_slot, run_sweep, power_efficiency

__version__ = "0.1.0"
