"""Closed-form effective CM-R interaction for hydrogenic closed-shell atoms.

The electron density of each filled (n, l) subshell is expanded as a finite
polynomial times ``exp(-x)`` with ``x = 2 Z xi / (n a_mu)``; the Coulomb
average then reduces to integer-order incomplete gammas. Coefficients are
assembled exactly (``fractions.Fraction``); only the Omega-dependent brackets
are floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from atomsg.core import MAX_N, NATURAL_UNITS, ShellConfig, UnitSystem, n_max_for, shells_for
from atomsg.errors import CapabilityError, DomainError
from atomsg.special import binom, factorial, lower_gamma_int, upper_gamma_int

SOURCES = ("closed-form", "radial-quadrature", "monte-carlo")
ASYMPTOTIC_Z_MIN = 10
EXPONENTIAL_NEGLIGIBLE = 1e-3


class CoefficientEntry(NamedTuple):
    n: int
    l: int  # noqa: E741
    g: int
    t: int
    C: Fraction


def coefficient(n: int, l: int, g: int, t: int) -> Fraction:  # noqa: E741
    """Single exact coefficient of the (n, l, g, t) term."""
    k = n - l - 1
    return (
        Fraction(2 * l + 1, 2 * n * 2 ** (2 * k))
        * binom(2 * k - 2 * g, k - g)
        * Fraction(factorial(2 * g), factorial(g) * factorial(2 * l + 1 + g))
        * binom(2 * g + 2 * (2 * l + 1), 2 * g - t)
        * Fraction((-2) ** t, factorial(t))
    )


@dataclass(frozen=True)
class CoefficientTable:
    entries: tuple[CoefficientEntry, ...]
    shells: ShellConfig
    # per (n, l): exact coefficients summed over g, indexed by t
    by_orbital: dict = field(compare=False, repr=False)

    def orbital_sum(self, n: int, l: int) -> Fraction:  # noqa: E741
        """``sum_{g,t} C (2l+t+2)!``; equals ``2l+1`` by radial normalization."""
        return sum(
            (p * factorial(2 * l + t + 2) for t, p in enumerate(self.by_orbital[(n, l)])),
            Fraction(0),
        )

    def weight(self, n: int, l: int) -> int:  # noqa: E741
        """Extra multiplicity factor (2 with spin doubling, else 1)."""
        return 2 if self.shells.spin_doubling else 1

    def condition_number(self, n: int, l: int) -> float:  # noqa: E741
        """``sum |C|(2l+t+2)! / sum C(2l+t+2)!``: cancellation amplification factor."""
        absum = sum(abs(p) * factorial(2 * l + t + 2) for t, p in enumerate(self.by_orbital[(n, l)]))
        return float(absum / self.orbital_sum(n, l))


def build_coefficients(shells: ShellConfig) -> CoefficientTable:
    entries = []
    by_orbital = {}
    for orb in shells:
        n, l = orb.n, orb.l
        if n > MAX_N:
            raise CapabilityError(f"n={n} exceeds the supported maximum {MAX_N}")
        k = n - l - 1
        per_t = [Fraction(0)] * (2 * k + 1)
        for g in range(k + 1):
            for t in range(2 * g + 1):
                c = coefficient(n, l, g, t)
                entries.append(CoefficientEntry(n, l, g, t, c))
                per_t[t] += c
        by_orbital[(n, l)] = tuple(per_t)
    return CoefficientTable(tuple(entries), shells, by_orbital)


_TABLE_CACHE: dict = {}


def _table(shells: ShellConfig) -> CoefficientTable:
    tab = _TABLE_CACHE.get(shells)
    if tab is None:
        tab = _TABLE_CACHE[shells] = build_coefficients(shells)
    return tab


def _neumaier_sum(terms: np.ndarray) -> np.ndarray:
    """Compensated sum along axis 0."""
    s = np.zeros(terms.shape[1:])
    c = np.zeros_like(s)
    for term in terms:
        t = s + term
        big = np.abs(s) >= np.abs(term)
        c += np.where(big, (s - t) + term, (term - t) + s)
        s = t
    return s + c


def orbital_potential(Z: float, n: int, l: int, omega, table: CoefficientTable, u: UnitSystem = NATURAL_UNITS):  # noqa: E741
    """Contribution of one filled subshell, without the overall ``k Z`` factor."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    q = 2.0 * Z / (n * u.a_mu)
    x = q * om
    safe = np.where(om > 0, om, 1.0)
    terms = []
    for t, p in enumerate(table.by_orbital[(n, l)]):
        if p == 0:
            continue
        a = 2 * l + t + 2
        inner = np.where(om > 0, lower_gamma_int(a, x) / safe, 0.0)
        terms.append(float(p) * inner)
        terms.append(float(p) * q * upper_gamma_int(a - 1, x))
    return _neumaier_sum(np.array(terms)) * table.weight(n, l)


def potential_closed_form(Z: int, shells: ShellConfig, omega, u: UnitSystem = NATURAL_UNITS):
    """Effective CM-R interaction energy at CM-R separation ``omega``.

    Vectorized over ``omega``. At ``omega = 0`` the removable singularity is
    replaced by its limit.
    """
    om = np.asarray(omega, dtype=float)
    if np.any(om < 0) or np.any(np.isnan(om)):
        raise DomainError("omega must be >= 0")
    table = _table(shells)
    parts = np.array([orbital_potential(Z, o.n, o.l, om, table, u) for o in shells])
    val = u.k * Z * _neumaier_sum(parts)
    return float(val[0]) if om.ndim == 0 else val


@dataclass
class PotentialProfile:
    Z: int
    shells: ShellConfig
    omega: np.ndarray
    values: np.ndarray
    source: str = "closed-form"
    stderr: np.ndarray | None = None
    units: UnitSystem = NATURAL_UNITS

    def __post_init__(self):
        if self.source not in SOURCES:
            raise DomainError(f"unknown profile source {self.source!r}")
        self.omega = np.asarray(self.omega, dtype=float)
        self.values = np.asarray(self.values, dtype=float)

    def __call__(self, omega):
        """Linear interpolation; beyond the grid, continued as ``V_end * Omega_end / Omega``."""
        om = np.asarray(omega, dtype=float)
        inside = np.interp(om, self.omega, self.values)
        tail = self.values[-1] * self.omega[-1] / np.where(om > 0, om, 1.0)
        return np.where(om > self.omega[-1], tail, inside)

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def is_monotone(self, rtol: float = 1e-12) -> bool:
        d = np.diff(self.values)
        return bool(np.all(d <= rtol * np.abs(self.values[:-1])))


def closed_form_profile(Z: int, omega, shells: ShellConfig | None = None, u: UnitSystem = NATURAL_UNITS) -> PotentialProfile:
    shells = shells or shells_for(Z)
    omega = np.asarray(omega, dtype=float)
    return PotentialProfile(Z, shells, omega, potential_closed_form(Z, shells, omega, u), "closed-form", units=u)


# -- large-separation coefficient ----------------------------------------------


@dataclass(frozen=True)
class BetaResult:
    Z: int
    beta_exact: Fraction  # in units of k
    contributions: dict  # (n, l) -> Fraction
    k: float = 1.0

    @property
    def beta(self) -> float:
        return self.k * float(self.beta_exact)

    @property
    def beta_over_k(self) -> float:
        return float(self.beta_exact)


def beta(Z_closed: int, u: UnitSystem = NATURAL_UNITS, spin_doubling: bool = False) -> BetaResult:
    """Coefficient of the large-separation limit ``V ~ beta Z / Omega``."""
    shells = shells_for(Z_closed, spin_doubling=spin_doubling)
    table = _table(shells)
    contrib = {(o.n, o.l): table.orbital_sum(o.n, o.l) * table.weight(o.n, o.l) for o in shells}
    total = sum(contrib.values(), Fraction(0))
    return BetaResult(Z_closed, total, contrib, u.k)


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


# -- Z scaling -----------------------------------------------------------------------


class ScalingRow(NamedTuple):
    Z: int
    V: float
    approx: float
    rel_dev: float
    asymptotic: bool
    exponential_significant: bool


def z_scaling_report(Z_list, omega_ref: float, u: UnitSystem = NATURAL_UNITS) -> list[ScalingRow]:
    """Compare V(omega_ref) with its asymptotic form ``beta Z / omega_ref`` per Z."""
    if omega_ref <= 0:
        raise DomainError("omega_ref must be positive")
    rows = []
    for Z in Z_list:
        shells = shells_for(Z)
        V = potential_closed_form(Z, shells, omega_ref, u)
        approx = beta(Z, u).beta * Z / omega_ref
        dev = abs(V - approx) / V
        rows.append(ScalingRow(Z, V, approx, dev, Z >= ASYMPTOTIC_Z_MIN, dev > EXPONENTIAL_NEGLIGIBLE))
    return rows


def loglog_slope(Z_list, omega_ref: float, u: UnitSystem = NATURAL_UNITS) -> float:
    rows = z_scaling_report(Z_list, omega_ref, u)
    lz = np.log([r.Z for r in rows])
    lv = np.log([r.V for r in rows])
    return float(np.polyfit(lz, lv, 1)[0])


# -- pointer basis ------------------------------------------------------------------


@dataclass
class PointerReport:
    position_offdiag_max: float
    packet_overlap: float
    packet_offdiag_ratio: float
    variation: float  # |V(c+s) - V(c-s)| / V(c)
    center: float
    width: float


def _profile_eval(profile: PotentialProfile, omega):
    if profile.source == "closed-form":
        return potential_closed_form(profile.Z, profile.shells, np.abs(omega), profile.units)
    return profile(np.abs(omega))


def pointer_basis_diagnostic(
    profile: PotentialProfile,
    packet_width: float,
    center: float = 5.0,
    second_center: float | None = None,
    grid_points: int = 4001,
) -> PointerReport:
    """How well position eigenstates and Gaussian packets diagonalize V.

    In the position basis V is a multiplication operator, so its discretized
    matrix is exactly diagonal. For two normalized Gaussian packets of width
    ``packet_width`` the off-diagonal element is reported relative to the
    geometric mean of the diagonal ones, alongside the bare packet overlap.
    """
    if packet_width <= 0:
        raise DomainError("packet_width must be positive")
    sigma = packet_width
    c2 = center + 3 * sigma if second_center is None else second_center
    lo = max(0.0, min(center, c2) - 8 * sigma)
    hi = max(center, c2) + 8 * sigma
    grid = np.linspace(lo, hi, grid_points)
    V = _profile_eval(profile, grid)
    op = np.diag(V[:64])
    offdiag = float(np.max(np.abs(op - np.diag(np.diag(op)))))

    def packet(c):
        g = np.exp(-((grid - c) ** 2) / (4 * sigma ** 2))
        return g / np.sqrt(np.trapezoid(g * g, grid))

    p1, p2 = packet(center), packet(c2)
    v11 = np.trapezoid(p1 * V * p1, grid)
    v22 = np.trapezoid(p2 * V * p2, grid)
    v12 = np.trapezoid(p1 * V * p2, grid)
    overlap = float(np.trapezoid(p1 * p2, grid))
    vc, vp, vm = _profile_eval(profile, np.array([center, center + sigma, max(center - sigma, 0.0)]))
    return PointerReport(
        position_offdiag_max=offdiag,
        packet_overlap=overlap,
        packet_offdiag_ratio=float(abs(v12) / math.sqrt(v11 * v22)),
        variation=float(abs(vp - vm) / vc),
        center=center,
        width=sigma,
    )
