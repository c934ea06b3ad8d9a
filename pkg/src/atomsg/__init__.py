"""Electron-mediated center-of-mass / relative-system coupling in atoms.

Closed-form and brute-force evaluation of the effective nucleus CM-R
interaction for hydrogenic closed-shell atoms, adiabaticity estimates, and a
reduced Stern-Gerlach decoherence simulator.
"""

from atomsg.errors import (
    AtomsgError,
    CapabilityError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericalBlowupError,
    StabilityError,
)
from atomsg.core import (
    AtomSpec,
    Orbital,
    ShellConfig,
    UnitSystem,
    closed_shell_Z,
    shells_for,
)

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "AtomsgError",
    "CapabilityError",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "NumericalBlowupError",
    "Orbital",
    "ShellConfig",
    "StabilityError",
    "UnitSystem",
    "closed_shell_Z",
    "shells_for",
    "__version__",
]
