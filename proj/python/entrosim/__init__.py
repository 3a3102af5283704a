"""Entropic-reservoir defect simulations.

Thin re-export of the compiled core: exact solutions of the reservoir-coupled
Ising chain, toric-code Gibbs observables and kinetic Monte Carlo lifetimes,
and BKT flow integration with reservoir-renormalized fugacity.
"""

from entrosim._core import (  # noqa: F401
    BathWeights,
    BktParams,
    ChainParams,
    CrossoverResult,
    FitReport,
    FlowTermination,
    RateTable,
    Regime,
    RegimeLabel,
    RgTrajectory,
    Sector,
    SectorMode,
    ToricParams,
    TorusLattice,
    TrajectoryOutcome,
    bath_threshold,
    bath_weights,
    beta_eff,
    bkt_correlation_length,
    brute_force_correlator,
    classify_regime,
    conditional_defect_marginal,
    correlation_length,
    crossover_beta,
    defect_probability,
    exact_lifetime_small,
    find_beta_bkt,
    finite_chain_correlator,
    fit_power_law,
    integrate_flow,
    lambda_ratio,
    log_lambda_ratio,
    nu_eff,
    rate_table,
    run_trajectory,
    sample_stabilizers,
    stabilizer_expectation,
    steady_state_density,
    stream_seed,
    vortex_kinetics,
    wilson_loop,
    xi_scan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
