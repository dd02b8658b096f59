"""Simulation and fitting of optical coherence measurements in rare-earth-doped glass."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, InsufficientDataError, RankError
from .physics import (
    DephasingParams,
    Environment,
    activation_linewidth,
    linewidth_to_t2,
    shb_linewidth_from_sd_model,
    spectral_diffusion_linewidth,
    superhyperfine_splitting,
    t2_from_decay_constant,
    tls_powerlaw_linewidth,
)
from .sequences import (
    AxisKind,
    Curve,
    HoleSpectrum,
    Pe3Surface,
    mc_sudden_jump_echo,
    simulate_2pe_decay,
    simulate_3pe_surface,
    simulate_power_broadening_series,
    simulate_shb_spectrum,
)
from .solver import FitOptions
from .estimation import (
    FitResult,
    consistency_report,
    fit_3pe_surface,
    fit_activation,
    fit_exponential_decay,
    fit_hole_profile,
    fit_linear,
    fit_modulation_frequency,
    fit_powerlaw,
)
