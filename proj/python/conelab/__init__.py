"""Blow-up and global existence for u_t = Delta u + F(t) u^p on cones of H^n."""

from ._core import (
    ConelabError,
    H_integral,
    bound_T_thm1,
    bound_Tstar_thm2,
    bound_Tstar_thm2bis,
    cap_eigenpair,
    classify_regime,
    find_k0,
    find_R0,
    lambda1,
    lemma1_min_residual,
    normalize_barrier,
    ode_lower_bound,
    run_sweep,
)

__all__ = [
    "ConelabError",
    "H_integral",
    "bound_T_thm1",
    "bound_Tstar_thm2",
    "bound_Tstar_thm2bis",
    "cap_eigenpair",
    "classify_regime",
    "find_k0",
    "find_R0",
    "lambda1",
    "lemma1_min_residual",
    "normalize_barrier",
    "ode_lower_bound",
    "run_sweep",
]
