"""Zero-energy states of 2-D Pauli operators with Aharonov-Bohm flux arrays.

The package decides whether a given flux configuration admits square-integrable
zero modes, constructs the corresponding wave functions explicitly, and
certifies them numerically (annihilation residuals, norm quadrature, flux
quantization checks).
"""

from .special import (
    DomainError,
    ConsistencyError,
    LatticeBasis,
    LatticeConstants,
    lattice_constants,
    weierstrass_sigma,
    weierstrass_zeta,
    log_sigma,
    sigma_tilde,
    log_abs_sigma_tilde,
    sigma_tilde_dlog,
    primary_factor,
    log_primary_factor,
    canonical_product,
    canonical_product_limit,
    chain_log_abs,
    chain_dlog,
    star_log_abs,
    star_dlog,
    log_sin,
    sinc_sqrt,
)
from .config import (
    ConfigError,
    ChainMergeError,
    FluxSite,
    ChainComponent,
    LatticeComponent,
    StarComponent,
    AddedSet,
    Perturbation,
    FluxConfiguration,
    normalize_fluxes,
    mirror_configuration,
    merge_collinear_chains,
    enumerate_support,
    config_to_dict,
    config_from_dict,
)
from .decide import ZeroModeVerdict, decide
from .verify import (
    DecayHint,
    ProbeRegion,
    QuadratureResult,
    ResidualReport,
    GrowthEstimate,
    l2_norm_squared,
    integrate_disc,
    annihilation_residual,
    laplacian_residual,
    loop_flux,
    growth_estimate,
)
from .ansatz import (
    NoModesError,
    ScalarPotential,
    VectorPotential,
    WaveFunction,
    ZeroModeFamily,
    build_scalar_potential,
    build_vector_potential,
    build_zero_modes,
    build_divergence_candidate,
    alpha_default,
    sample_grid,
)

__all__ = [
    "DomainError",
    "ConsistencyError",
    "LatticeBasis",
    "LatticeConstants",
    "lattice_constants",
    "weierstrass_sigma",
    "weierstrass_zeta",
    "log_sigma",
    "sigma_tilde",
    "log_abs_sigma_tilde",
    "sigma_tilde_dlog",
    "primary_factor",
    "log_primary_factor",
    "canonical_product",
    "canonical_product_limit",
    "chain_log_abs",
    "chain_dlog",
    "star_log_abs",
    "star_dlog",
    "log_sin",
    "sinc_sqrt",
    "ConfigError",
    "ChainMergeError",
    "FluxSite",
    "ChainComponent",
    "LatticeComponent",
    "StarComponent",
    "AddedSet",
    "Perturbation",
    "FluxConfiguration",
    "normalize_fluxes",
    "mirror_configuration",
    "merge_collinear_chains",
    "enumerate_support",
    "config_to_dict",
    "config_from_dict",
    "ZeroModeVerdict",
    "decide",
    "DecayHint",
    "ProbeRegion",
    "QuadratureResult",
    "ResidualReport",
    "GrowthEstimate",
    "l2_norm_squared",
    "integrate_disc",
    "annihilation_residual",
    "laplacian_residual",
    "loop_flux",
    "growth_estimate",
    "NoModesError",
    "ScalarPotential",
    "VectorPotential",
    "WaveFunction",
    "ZeroModeFamily",
    "build_scalar_potential",
    "build_vector_potential",
    "build_zero_modes",
    "build_divergence_candidate",
    "alpha_default",
    "sample_grid",
]

__version__ = "0.1.0"
