"""Simulation configuration and its TOML schema.

Every field of :class:`SimConfig` maps to one ``section.key`` in the config
file. Required keys have no default; everything else falls back to the
values below. Example::

    [cm_grid]
    x_min = -16.0
    x_max = 16.0
    n_x = 128

    [r_grid]
    rho_min = -8.0
    rho_max = 8.0
    n_rho = 32

    [masses]
    cm = 20.0
    r = 1.0

    [time]
    dt = 0.005
    total = 4.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from atomsg.errors import ConfigError, StabilityError

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

MIN_GRID = 16
STABILITY_LIMIT = 0.5
COUPLING_SOURCES = ("closed-form", "asymptotic")


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n: int

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def points(self) -> np.ndarray:
        # periodic grid: the upper end is identified with the lower one
        return self.lo + self.step * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.step)


@dataclass(frozen=True)
class Coupling:
    enabled: bool = False
    weight: float = 0.5
    offset: float = 0.0
    source: str = "closed-form"
    Z: int = 10
    strength: float = 1.0
    softening: float = 1.0


@dataclass(frozen=True)
class Packet:
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    cm_grid: Grid
    r_grid: Grid
    mass_cm: float
    mass_r: float
    dt: float
    total_time: float
    field_gradient: float = 0.0
    mu_b: float = 1.0
    omega_r: float = 1.0
    coupling: Coupling = field(default_factory=Coupling)
    packet: Packet = field(default_factory=Packet)
    spin: tuple = (1 / math.sqrt(2), 1 / math.sqrt(2))
    snapshot_stride: int = 10
    hbar: float = 1.0
    dump_states: bool = False

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.dt))

    @property
    def max_kinetic_rate(self) -> float:
        """Largest kinetic eigenvalue divided by hbar."""
        kx = math.pi / self.cm_grid.step
        kr = math.pi / self.r_grid.step
        return self.hbar * (kx * kx / (2 * self.mass_cm) + kr * kr / (2 * self.mass_r))

    def validate(self) -> "SimConfig":
        for name, g in (("cm_grid", self.cm_grid), ("r_grid", self.r_grid)):
            if g.n < MIN_GRID:
                raise ConfigError(f"{name} needs at least {MIN_GRID} points, got {g.n}", name)
            if g.hi <= g.lo:
                raise ConfigError(f"{name} upper bound must exceed lower bound", name)
        for key, val in (("masses.cm", self.mass_cm), ("masses.r", self.mass_r),
                         ("time.dt", self.dt), ("time.total", self.total_time),
                         ("r_potential.omega", self.omega_r), ("packet.width", self.packet.width),
                         ("units.hbar", self.hbar)):
            if not val > 0:
                raise ConfigError(f"{key} must be positive", key)
        if self.snapshot_stride < 1:
            raise ConfigError("time.snapshot_stride must be >= 1", "time.snapshot_stride")
        if self.coupling.source not in COUPLING_SOURCES:
            raise ConfigError(f"coupling.source must be one of {COUPLING_SOURCES}", "coupling.source")
        spin = np.asarray(self.spin, dtype=complex)
        if spin.shape != (2,) or np.linalg.norm(spin) == 0:
            raise ConfigError("spin must be a nonzero 2-vector", "spin")
        rate = self.dt * self.max_kinetic_rate
        if rate >= STABILITY_LIMIT:
            raise StabilityError(
                f"dt * max kinetic eigenvalue = {rate:.3g} >= {STABILITY_LIMIT}; reduce time.dt",
                "time.dt",
            )
        return self

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


# -- TOML schema ------------------------------------------------------------------

REQUIRED = object()

SCHEMA = {
    "cm_grid": {"x_min": REQUIRED, "x_max": REQUIRED, "n_x": REQUIRED},
    "r_grid": {"rho_min": REQUIRED, "rho_max": REQUIRED, "n_rho": REQUIRED},
    "masses": {"cm": REQUIRED, "r": REQUIRED},
    "time": {"dt": REQUIRED, "total": REQUIRED, "snapshot_stride": 10},
    "field": {"gradient": 0.0, "mu_b": 1.0},
    "r_potential": {"omega": 1.0},
    "coupling": {f.name: f.default for f in fields(Coupling)},
    "packet": {f.name: f.default for f in fields(Packet)},
    "spin": {"up": [1.0, 0.0], "down": [1.0, 0.0]},
    "units": {"hbar": 1.0},
    "output": {"dump_states": False},
}


def _complex(value, key):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{key} must be a number or [re, im]", key)


def config_from_mapping(data: dict) -> SimConfig:
    unknown = set(data) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}", sorted(unknown)[0])
    vals = {}
    for section, keys in SCHEMA.items():
        given = data.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"[{section}] must be a table", section)
        extra = set(given) - set(keys)
        if extra:
            key = f"{section}.{sorted(extra)[0]}"
            raise ConfigError(f"unknown key {key}", key)
        for key, default in keys.items():
            if key in given:
                vals[(section, key)] = given[key]
            elif default is REQUIRED:
                raise ConfigError(f"missing required key {section}.{key}", f"{section}.{key}")
            else:
                vals[(section, key)] = default

    def num(sec, key, kind=float):
        v = vals[(sec, key)]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{sec}.{key} must be numeric", f"{sec}.{key}")
        if kind is int and int(v) != v:
            raise ConfigError(f"{sec}.{key} must be an integer", f"{sec}.{key}")
        return kind(v)

    spin = (_complex(vals[("spin", "up")], "spin.up"), _complex(vals[("spin", "down")], "spin.down"))
    norm = math.sqrt(abs(spin[0]) ** 2 + abs(spin[1]) ** 2)
    if norm == 0:
        raise ConfigError("spin state must be nonzero", "spin")
    spin = (spin[0] / norm, spin[1] / norm)

    enabled = vals[("coupling", "enabled")]
    if not isinstance(enabled, bool):
        raise ConfigError("coupling.enabled must be true/false", "coupling.enabled")
    source = vals[("coupling", "source")]
    if source not in COUPLING_SOURCES:
        raise ConfigError(f"coupling.source must be one of {COUPLING_SOURCES}", "coupling.source")
    coupling = Coupling(
        enabled=enabled,
        weight=num("coupling", "weight"),
        offset=num("coupling", "offset"),
        source=source,
        Z=num("coupling", "Z", int),
        strength=num("coupling", "strength"),
        softening=num("coupling", "softening"),
    )
    packet = Packet(num("packet", "center"), num("packet", "width"), num("packet", "momentum"))
    cfg = SimConfig(
        cm_grid=Grid(num("cm_grid", "x_min"), num("cm_grid", "x_max"), num("cm_grid", "n_x", int)),
        r_grid=Grid(num("r_grid", "rho_min"), num("r_grid", "rho_max"), num("r_grid", "n_rho", int)),
        mass_cm=num("masses", "cm"),
        mass_r=num("masses", "r"),
        dt=num("time", "dt"),
        total_time=num("time", "total"),
        field_gradient=num("field", "gradient"),
        mu_b=num("field", "mu_b"),
        omega_r=num("r_potential", "omega"),
        coupling=coupling,
        packet=packet,
        spin=spin,
        snapshot_stride=num("time", "snapshot_stride", int),
        hbar=num("units", "hbar"),
        dump_states=bool(vals[("output", "dump_states")]),
    )
    return cfg.validate()


def load_config(path) -> SimConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_mapping(data)


def config_to_mapping(cfg: SimConfig) -> dict:
    """Inverse of :func:`config_from_mapping`, used for manifests."""
    c = cfg.coupling
    return {
        "cm_grid": {"x_min": cfg.cm_grid.lo, "x_max": cfg.cm_grid.hi, "n_x": cfg.cm_grid.n},
        "r_grid": {"rho_min": cfg.r_grid.lo, "rho_max": cfg.r_grid.hi, "n_rho": cfg.r_grid.n},
        "masses": {"cm": cfg.mass_cm, "r": cfg.mass_r},
        "time": {"dt": cfg.dt, "total": cfg.total_time, "snapshot_stride": cfg.snapshot_stride},
        "field": {"gradient": cfg.field_gradient, "mu_b": cfg.mu_b},
        "r_potential": {"omega": cfg.omega_r},
        "coupling": {"enabled": c.enabled, "weight": c.weight, "offset": c.offset, "source": c.source,
                     "Z": c.Z, "strength": c.strength, "softening": c.softening},
        "packet": {"center": cfg.packet.center, "width": cfg.packet.width, "momentum": cfg.packet.momentum},
        "spin": {"up": [cfg.spin[0].real, cfg.spin[0].imag], "down": [cfg.spin[1].real, cfg.spin[1].imag]},
        "units": {"hbar": cfg.hbar},
        "output": {"dump_states": cfg.dump_states},
    }
