"""Shared vocabulary: unit system, atoms, hydrogenic orbitals and closed shells.

All quantities are carried in natural units (k = a_mu = hbar = m_e = 1) unless
a different :class:`UnitSystem` is passed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from atomsg.errors import DomainError

MAX_N = 12
REALISTIC_Z_MAX = 118


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants of the model.

    ``k`` is the Coulomb constant, ``a_mu`` the Bohr-radius analog. Masses are
    in units where the electron mass defaults to 1.
    """

    k: float = 1.0
    a_mu: float = 1.0
    hbar: float = 1.0
    m_e: float = 1.0
    m_p: float = 1836.0
    m_n: float = 1836.0
    mu_B: float = 1.0

    def __post_init__(self):
        for name in ("k", "a_mu", "hbar", "m_e", "m_p", "m_n", "mu_B"):
            if not getattr(self, name) > 0:
                raise DomainError(f"unit constant {name} must be positive")


NATURAL_UNITS = UnitSystem()


@dataclass(frozen=True)
class AtomSpec:
    Z: int
    A: int

    def __post_init__(self):
        if int(self.Z) != self.Z or int(self.A) != self.A:
            raise DomainError("Z and A must be integers")
        if self.Z < 1:
            raise DomainError(f"Z must be >= 1, got {self.Z}")
        if self.A < self.Z:
            raise DomainError(f"A must be >= Z, got Z={self.Z}, A={self.A}")

    @property
    def realistic(self) -> bool:
        return self.Z <= REALISTIC_Z_MAX

    @property
    def neutrons(self) -> int:
        return self.A - self.Z


@dataclass(frozen=True, order=True)
class Orbital:
    """Hydrogenic (n, l) subshell; the magnetic number is summed over."""

    n: int
    l: int  # noqa: E741

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l < self.n:
            raise DomainError(f"need 0 <= l < n, got n={self.n}, l={self.l}")

    @property
    def degeneracy(self) -> int:
        return 2 * self.l + 1


@dataclass(frozen=True)
class ShellConfig:
    """Ordered set of occupied subshells.

    Each subshell contributes ``2l+1`` spatial orbitals, or ``2(2l+1)`` when
    ``spin_doubling`` is set.
    """

    occupied: tuple[Orbital, ...]
    spin_doubling: bool = False
    _index: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        occ = tuple(self.occupied)
        keys = [(o.n, o.l) for o in occ]
        if len(set(keys)) != len(keys):
            raise DomainError("duplicate (n, l) pair in shell configuration")
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "_index", frozenset(keys))

    def __iter__(self):
        return iter(self.occupied)

    def __len__(self):
        return len(self.occupied)

    def __contains__(self, item):
        if isinstance(item, Orbital):
            item = (item.n, item.l)
        return tuple(item) in self._index

    def multiplicity(self, orb: Orbital) -> int:
        return orb.degeneracy * (2 if self.spin_doubling else 1)

    @property
    def n_max(self) -> int:
        return max(o.n for o in self.occupied)

    @property
    def orbital_count(self) -> int:
        return sum(self.multiplicity(o) for o in self.occupied)

    @property
    def is_closed(self) -> bool:
        nm = self.n_max
        return self._index == {(n, l) for n in range(1, nm + 1) for l in range(n)}

    @classmethod
    def closed(cls, n_max: int, spin_doubling: bool = False) -> "ShellConfig":
        if not 1 <= n_max <= MAX_N:
            raise DomainError(f"n_max must be in [1, {MAX_N}], got {n_max}")
        orbs = tuple(Orbital(n, l) for n in range(1, n_max + 1) for l in range(n))
        return cls(orbs, spin_doubling=spin_doubling)


def closed_shell_Z(n_max: int) -> int:
    """Electron count of the hydrogenic closed shell filled up to ``n_max``."""
    if int(n_max) != n_max or not 1 <= n_max <= MAX_N:
        raise DomainError(f"n_max must be an integer in [1, {MAX_N}], got {n_max}")
    return 2 * sum(n * n for n in range(1, int(n_max) + 1))


CLOSED_SHELL_ZS = tuple(closed_shell_Z(n) for n in range(1, MAX_N + 1))


def n_max_for(Z: int) -> int:
    """Inverse of :func:`closed_shell_Z`; raises with the neighbouring values."""
    try:
        return CLOSED_SHELL_ZS.index(Z) + 1
    except ValueError:
        pass
    below = [z for z in CLOSED_SHELL_ZS if z < Z]
    above = [z for z in CLOSED_SHELL_ZS if z > Z]
    near = ([below[-1]] if below else []) + ([above[0]] if above else [])
    raise DomainError(
        f"Z={Z} is not a closed-shell value; nearest closed shells: "
        + ", ".join(str(z) for z in near)
    )


def shells_for(Z_closed: int, spin_doubling: bool = False) -> ShellConfig:
    return ShellConfig.closed(n_max_for(Z_closed), spin_doubling=spin_doubling)
