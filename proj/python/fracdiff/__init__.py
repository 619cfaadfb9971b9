"""Diffusion models driven by a Markov approximation of fractional Brownian motion."""

from ._core import (
    ConfigError,
    FracdiffError,
    KernelTables,
    NumericalError,
    SpaceGrid,
    UnsupportedError,
    approx_covariance,
    evaluate,
    fbm_covariance,
    half_moons,
    kernel_tables,
    sample,
    sample_gaussian_reference,
    sample_marginal,
    simulate_noise,
    sliced_wasserstein,
    space_grid,
    train,
    vendi_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
