"""Metric entropy and minimax risk of compact pseudodifferential operators.

Everything is computed from the phase-space volume function
V(lam) = |{(x, omega) : sigma(x, omega) > lam}| of the operator symbol.
"""

from .asymptotics import (
    AsymptoticLaw,
    embedding_entropy_asymptote,
    pinsker_entropy_constant,
    pinsker_risk_asymptote,
    weighted_entropy_asymptote,
    weighted_volume_asymptote,
    xi_constant,
    xi_constant_even,
)
from .errors import (
    BracketError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    NumericalError,
    PhasevolError,
    SpecParseError,
)
from .functionals import (
    critical_radius,
    entropy,
    entropy_from_spectrum,
    entropy_from_volume,
    entropy_log_integral,
    entropy_number,
    minimax_risk,
    power_law_closed_forms,
)
from .spectral import (
    EigenvalueSequence,
    count_at_or_above,
    count_upward,
    harmonic_spectrum,
    type_integral_exact,
)
from .symbols import (
    SymbolDescriptor,
    SymbolKind,
    make_custom,
    make_power_law_radial,
    make_schrodinger_inverse,
    make_weighted_sobolev_inverse,
)
from .volume import MCConfig, VolumeFunction, VolumeMethod, volume_fn

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
