"""Center-of-mass / relative-coordinate transforms, nuclear masses, adiabaticity.

The relative coordinates of an N-body system are not unique. Two pairing
schemes are provided: ``"star"`` (every particle measured from particle 1,
the default) and ``"chain"`` (consecutive differences). Both are linear and
invertible together with the center of mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from atomsg.core import NATURAL_UNITS, AtomSpec, UnitSystem
from atomsg.errors import DomainError

ELECTRON_SEPARABLE_MAX = 1e-2
CM_R_SEPARABLE_MAX = 1e-3

SCHEMES = ("star", "chain")


@dataclass(frozen=True)
class ParticleSet:
    positions: np.ndarray  # (N, 3)
    masses: np.ndarray  # (N,)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise DomainError("positions must have shape (N, 3)")
        if len(pos) != len(m):
            raise DomainError("positions and masses differ in length")
        if np.any(m <= 0):
            raise DomainError("all masses must be positive")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    def __len__(self):
        return len(self.masses)


@dataclass(frozen=True)
class CmRelDecomposition:
    R_cm: np.ndarray
    rel_coords: np.ndarray  # (N-1, 3)
    weights: np.ndarray  # m_{alpha+1} / M
    total_mass: float
    reduced_masses: np.ndarray
    masses: np.ndarray
    scheme: str = "star"


def _pairing_matrix(n: int, scheme: str) -> np.ndarray:
    """Rows of the (N-1) x N matrix taking positions to relative coordinates."""
    D = np.zeros((n - 1, n))
    for a in range(n - 1):
        if scheme == "star":
            D[a, a + 1], D[a, 0] = 1.0, -1.0
        elif scheme == "chain":
            D[a, a + 1], D[a, a] = 1.0, -1.0
        else:
            raise DomainError(f"unknown relative-coordinate scheme {scheme!r}; use one of {SCHEMES}")
    return D


def _transform(masses: np.ndarray, scheme: str) -> np.ndarray:
    n = len(masses)
    T = np.empty((n, n))
    T[0] = masses / masses.sum()
    T[1:] = _pairing_matrix(n, scheme)
    return T


def reduced_masses(masses) -> np.ndarray:
    """``m_{a+1} (M - m_{a+1}) / M`` for every relative particle a."""
    m = np.asarray(masses, dtype=float)
    M = m.sum()
    return m[1:] * (M - m[1:]) / M


def decompose(ps: ParticleSet, scheme: str = "star") -> CmRelDecomposition:
    if len(ps) < 2:
        raise DomainError("a single particle has no relative system R")
    T = _transform(ps.masses, scheme)
    coords = T @ ps.positions
    M = float(ps.masses.sum())
    return CmRelDecomposition(
        R_cm=coords[0],
        rel_coords=coords[1:],
        weights=ps.masses[1:] / M,
        total_mass=M,
        reduced_masses=reduced_masses(ps.masses),
        masses=ps.masses.copy(),
        scheme=scheme,
    )


def inverse_coefficients(d: CmRelDecomposition) -> np.ndarray:
    """Matrix c with r_i = R_cm + sum_a c[i, a] rho_a."""
    Tinv = np.linalg.inv(_transform(d.masses, d.scheme))
    return Tinv[:, 1:]


def recompose(d: CmRelDecomposition) -> np.ndarray:
    c = inverse_coefficients(d)
    return d.R_cm[None, :] + c @ np.asarray(d.rel_coords).reshape(-1, 3)


class NucleusMasses(NamedTuple):
    M_nucleus: float
    mu_reduced: float
    M_atom: float
    degenerate: bool


def nucleus_masses(atom: AtomSpec, u: UnitSystem = NATURAL_UNITS) -> NucleusMasses:
    """Nuclear and whole-atom masses; ``mu = (1 - 1/A) m_p`` with m_n ~ m_p.

    ``degenerate`` is set for A = 1, where no relative system exists.
    """
    if atom.A < 1:
        raise DomainError("mass number must be >= 1")
    M = atom.Z * u.m_p + atom.neutrons * u.m_n
    mu = (1.0 - 1.0 / atom.A) * u.m_p
    M_atom = atom.Z * (u.m_e + u.m_p) + atom.neutrons * u.m_n
    return NucleusMasses(M, mu, M_atom, atom.A == 1)


@dataclass(frozen=True)
class KappaParams:
    kappa1: float
    kappa2: float
    kappa3: float
    electron_threshold: float = ELECTRON_SEPARABLE_MAX
    cm_r_threshold: float = CM_R_SEPARABLE_MAX

    @property
    def kappa(self) -> float:
        return max(self.kappa1, self.kappa2)

    @property
    def adiabatic_error_bound(self) -> float:
        return self.kappa ** 0.75

    @property
    def electrons_separable(self) -> bool:
        return self.kappa1 <= self.electron_threshold and self.kappa2 <= self.electron_threshold

    @property
    def cm_r_separable(self) -> bool:
        return self.kappa3 <= self.cm_r_threshold

    def as_dict(self) -> dict:
        return {
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "kappa3": self.kappa3,
            "kappa": self.kappa,
            "adiabatic_error_bound": self.adiabatic_error_bound,
            "electrons_separable": self.electrons_separable,
            "cm_r_separable": self.cm_r_separable,
        }


def kappa_params(
    atom: AtomSpec,
    u: UnitSystem = NATURAL_UNITS,
    electron_threshold: float = ELECTRON_SEPARABLE_MAX,
    cm_r_threshold: float = CM_R_SEPARABLE_MAX,
) -> KappaParams:
    """Electron/nucleus mass ratios controlling the adiabatic separations.

    All relative masses are taken equal to ``mu = (1 - 1/A) m``, so the
    maximum of ``m_e / mu_a`` is simply ``m_e / mu``.
    """
    if atom.A < 2:
        raise DomainError("no relative system R for A < 2; kappa3 undefined")
    M, mu, _, _ = nucleus_masses(atom, u)
    return KappaParams(
        kappa1=u.m_e / M,
        kappa2=u.m_e / mu,
        kappa3=mu / M,
        electron_threshold=electron_threshold,
        cm_r_threshold=cm_r_threshold,
    )


@dataclass(frozen=True)
class YukawaParams:
    gamma_sq: float
    mu_range_inv: float

    def __post_init__(self):
        if self.gamma_sq <= 0 or self.mu_range_inv <= 0:
            raise DomainError("Yukawa coupling and inverse range must be positive")


def yukawa(r, p: YukawaParams):
    """Screened nucleon pair potential ``-g^2 exp(-mu r) / r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("Yukawa potential is singular for r <= 0")
    out = -p.gamma_sq * np.exp(-p.mu_range_inv * r) / r
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MassPolarization:
    """Cross-kinetic coupling ``sum m_{a+1} m_{b+1} rho_a' . rho_b' / M`` of R.

    Kept as a record of the masses involved only; the simulator uses a
    phenomenological R Hamiltonian and never evaluates this term.
    """

    masses: tuple[float, ...]

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))
