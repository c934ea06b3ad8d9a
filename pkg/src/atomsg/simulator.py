"""Reduced Stern-Gerlach model: one CM axis, one relative coordinate, spin 1/2.

Hamiltonian (hbar = 1 by default)::

    H = p_x^2 / 2M + p_rho^2 / 2mu + mu omega_R^2 rho^2 / 2
        + mu_B b' x sigma_z + g V(|x + lambda rho - offset|)

``sigma_z`` has eigenvalues +1 (spin index 0) and -1 (spin index 1), and V
is the electron-mediated CM-R interaction. Evolution is Strang splitting
with exact FFT kinetic propagation on periodic grids.

Amplitudes are stored discretely normalized (``sum |psi|^2 = 1``), i.e. with
the grid weights ``sqrt(dx drho)`` absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from atomsg.core import NATURAL_UNITS, shells_for
from atomsg.errors import DomainError, NumericalBlowupError
from atomsg.interaction import PotentialProfile, beta, closed_form_profile
from atomsg.simconfig import SimConfig

SPIN_SIGN = np.array([1.0, -1.0])
NORM_TOL = 1e-8


@dataclass
class CompositeState:
    amplitudes: np.ndarray  # (n_x, n_rho, 2) complex
    time: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass
class Trajectory:
    config: SimConfig
    snapshots: list = field(default_factory=list)
    r_ground: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> CompositeState:
        return self.snapshots[-1]


# -- potentials ---------------------------------------------------------------------


def coupling_profile(cfg: SimConfig, omega_max: float, points: int = 4096) -> PotentialProfile:
    c = cfg.coupling
    grid = np.linspace(0.0, omega_max, points)
    return closed_form_profile(c.Z, grid, shells_for(c.Z), NATURAL_UNITS)


def coupling_potential(cfg: SimConfig, profile: PotentialProfile | None = None) -> np.ndarray:
    """``g V(|x + lambda rho - offset|)`` on the (x, rho) grid."""
    c = cfg.coupling
    x = cfg.cm_grid.points[:, None]
    rho = cfg.r_grid.points[None, :]
    omega = np.abs(x + c.weight * rho - c.offset)
    if c.source == "asymptotic":
        b = beta(c.Z).beta
        return c.strength * b * c.Z / np.sqrt(omega ** 2 + c.softening ** 2)
    if profile is None:
        profile = coupling_profile(cfg, float(omega.max()) * 1.01 + 1e-9)
    return c.strength * profile(omega)


def r_potential(cfg: SimConfig) -> np.ndarray:
    rho = cfg.r_grid.points
    return 0.5 * cfg.mass_r * cfg.omega_r ** 2 * rho ** 2


def total_potential(cfg: SimConfig, profile: PotentialProfile | None = None) -> np.ndarray:
    x = cfg.cm_grid.points
    V = np.zeros((cfg.cm_grid.n, cfg.r_grid.n, 2))
    V += (cfg.mu_b * cfg.field_gradient * x)[:, None, None] * SPIN_SIGN[None, None, :]
    V += r_potential(cfg)[None, :, None]
    if cfg.coupling.enabled:
        V += coupling_potential(cfg, profile)[:, :, None]
    return V


def kinetic_energy(cfg: SimConfig) -> np.ndarray:
    kx = cfg.cm_grid.wavenumbers
    kr = cfg.r_grid.wavenumbers
    h2 = cfg.hbar ** 2
    return h2 * kx[:, None] ** 2 / (2 * cfg.mass_cm) + h2 * kr[None, :] ** 2 / (2 * cfg.mass_r)


# -- initial state ------------------------------------------------------------------


def _r_split_step(cfg: SimConfig) -> np.ndarray:
    """Dense one-step Strang propagator of the uncoupled R system."""
    n = cfg.r_grid.n
    F = np.fft.fft(np.eye(n), axis=0)
    Finv = np.fft.ifft(np.eye(n), axis=0)
    kr = cfg.r_grid.wavenumbers
    half_v = np.exp(-0.5j * cfg.dt * r_potential(cfg) / cfg.hbar)
    kin = np.exp(-1j * cfg.dt * cfg.hbar * kr ** 2 / (2 * cfg.mass_r))
    return half_v[:, None] * (Finv @ (kin[:, None] * F)) * half_v[None, :]


def r_ground_state(cfg: SimConfig) -> np.ndarray:
    """Ground state of R, taken as a stationary state of the discrete propagator.

    The grid Hamiltonian's ground state is found first; the eigenvector of
    the Strang step with the largest overlap then replaces it, so that the
    uncoupled R factor is stationary to rounding error.
    """
    n = cfg.r_grid.n
    F = np.fft.fft(np.eye(n), axis=0)
    Finv = np.fft.ifft(np.eye(n), axis=0)
    kr = cfg.r_grid.wavenumbers
    T = (Finv @ ((cfg.hbar ** 2 * kr ** 2 / (2 * cfg.mass_r))[:, None] * F))
    H = 0.5 * (T + T.conj().T) + np.diag(r_potential(cfg))
    _, vecs = np.linalg.eigh(H)
    g0 = vecs[:, 0]
    _, uvecs = np.linalg.eig(_r_split_step(cfg))
    overlaps = np.abs(uvecs.conj().T @ g0)
    g = uvecs[:, int(np.argmax(overlaps))]
    g = g / np.linalg.norm(g)
    k = int(np.argmax(np.abs(g)))
    return g * (abs(g[k]) / g[k])


def cm_packet(cfg: SimConfig) -> np.ndarray:
    x = cfg.cm_grid.points
    p = cfg.packet
    psi = np.exp(-((x - p.center) ** 2) / (4 * p.width ** 2) + 1j * p.momentum * x / cfg.hbar)
    return psi / np.linalg.norm(psi)


def initial_state(cfg: SimConfig, r_state: np.ndarray | None = None) -> CompositeState:
    r_state = r_ground_state(cfg) if r_state is None else r_state
    spin = np.asarray(cfg.spin, dtype=complex)
    spin = spin / np.linalg.norm(spin)
    amps = cm_packet(cfg)[:, None, None] * r_state[None, :, None] * spin[None, None, :]
    return CompositeState(amps.astype(complex), 0.0)


# -- evolution ----------------------------------------------------------------------


def evolve(cfg: SimConfig, state: CompositeState | None = None, profile: PotentialProfile | None = None) -> Trajectory:
    """Propagate to ``cfg.total_time``, recording every ``snapshot_stride`` steps.

    Raises :class:`~atomsg.errors.StabilityError` before stepping when the time
    step violates the kinetic guard, and :class:`NumericalBlowupError` (with
    the last finite snapshot) if non-finite amplitudes appear.
    """
    cfg.validate()
    r0 = r_ground_state(cfg)
    psi_state = initial_state(cfg, r0) if state is None else state
    psi = psi_state.amplitudes.astype(complex, copy=True)
    V = total_potential(cfg, profile)
    half = np.exp(-0.5j * cfg.dt * V / cfg.hbar)
    full = half * half
    kin = np.exp(-1j * cfg.dt * kinetic_energy(cfg) / cfg.hbar)[:, :, None]

    traj = Trajectory(cfg, [CompositeState(psi.copy(), psi_state.time)], r0)
    t0 = psi_state.time
    steps = cfg.n_steps
    done = 0
    while done < steps:
        seg = min(cfg.snapshot_stride, steps - done)
        psi = half * psi
        for j in range(seg):
            psi = np.fft.ifft2(kin * np.fft.fft2(psi, axes=(0, 1)), axes=(0, 1))
            psi = (full if j < seg - 1 else half) * psi
        done += seg
        if not np.all(np.isfinite(psi)):
            raise NumericalBlowupError(f"non-finite amplitudes at step {done}", traj.snapshots[-1])
        traj.snapshots.append(CompositeState(psi.copy(), t0 + done * cfg.dt))
    return traj


def energy(cfg: SimConfig, state: CompositeState, V: np.ndarray | None = None) -> float:
    psi = state.amplitudes
    V = total_potential(cfg) if V is None else V
    pk = np.fft.fft2(psi, axes=(0, 1), norm="ortho")
    kin = float(np.sum(kinetic_energy(cfg)[:, :, None] * np.abs(pk) ** 2))
    pot = float(np.sum(V * np.abs(psi) ** 2))
    return kin + pot


# -- reduced description ------------------------------------------------------------


def _trace_norm_offdiag(a_plus: np.ndarray, a_minus: np.ndarray) -> float:
    """Trace norm of ``a_plus @ a_minus^dagger`` via thin QR factors."""
    _, rp = np.linalg.qr(a_plus)
    _, rm = np.linalg.qr(a_minus)
    return float(np.sum(np.linalg.svd(rp @ rm.conj().T, compute_uv=False)))


@dataclass
class ReducedDensityMatrix:
    """CM+S state after tracing out R.

    Rows/columns are ordered (x, spin) with spin fastest. ``factor`` is the
    ``(2 n_x) x n_rho`` matrix A with ``rho = A A^dagger``.
    """

    factor: np.ndarray
    n_x: int
    purity: float
    branch_overlap: float
    weights: tuple

    @property
    def rho(self) -> np.ndarray:
        return self.factor @ self.factor.conj().T

    def spin_block(self, s: int, s2: int) -> np.ndarray:
        r = self.rho
        return r[s::2, s2::2]

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.factor) ** 2))


def branch_overlap(psi: np.ndarray) -> float:
    """Overlap of the R states conditioned on the two spin projections.

    Computed as the Uhlmann fidelity of the spin-conditioned R density
    matrices, which for pure branches reduces to ``|<1|2>_R|`` and equals the
    normalized trace norm of the CM off-diagonal spin block.
    """
    a_p, a_m = psi[:, :, 0], psi[:, :, 1]
    p_p = float(np.sum(np.abs(a_p) ** 2))
    p_m = float(np.sum(np.abs(a_m) ** 2))
    if p_p < 1e-300 or p_m < 1e-300:
        return math.nan
    return _trace_norm_offdiag(a_p, a_m) / math.sqrt(p_p * p_m)


def reduce(state: CompositeState, tol: float = NORM_TOL) -> ReducedDensityMatrix:
    psi = state.amplitudes
    if abs(state.norm - 1.0) > tol:
        raise DomainError(f"state is not normalized (norm = {state.norm!r})")
    n_x, n_rho, _ = psi.shape
    A = np.transpose(psi, (0, 2, 1)).reshape(2 * n_x, n_rho)
    gram = A.conj().T @ A
    purity = float(np.sum(np.abs(gram) ** 2))
    w = (float(np.sum(np.abs(psi[:, :, 0]) ** 2)), float(np.sum(np.abs(psi[:, :, 1]) ** 2)))
    return ReducedDensityMatrix(A, n_x, purity, branch_overlap(psi), w)


# -- metrics ------------------------------------------------------------------------

METRIC_COLUMNS = ("time", "branch_overlap", "purity", "separation", "x_plus", "x_minus", "norm")


@dataclass
class MetricSeries:
    time: np.ndarray
    branch_overlap: np.ndarray
    purity: np.ndarray
    separation: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    norm: np.ndarray

    def rows(self):
        cols = [getattr(self, c) for c in METRIC_COLUMNS]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.time))]


def branch_centroids(cfg: SimConfig, psi: np.ndarray) -> tuple[float, float]:
    x = cfg.cm_grid.points
    out = []
    for s in (0, 1):
        dens = np.sum(np.abs(psi[:, :, s]) ** 2, axis=1)
        p = dens.sum()
        out.append(float(np.dot(x, dens) / p) if p > 0 else math.nan)
    return out[0], out[1]


def decoherence_metrics(traj: Trajectory) -> MetricSeries:
    if len(traj.snapshots) < 2:
        raise DomainError("need at least two snapshots")
    cols = {c: [] for c in METRIC_COLUMNS}
    for snap in traj.snapshots:
        psi = snap.amplitudes
        nrm = snap.norm
        red = reduce(snap, tol=max(NORM_TOL, 10 * abs(nrm - 1.0)))
        xp, xm = branch_centroids(traj.config, psi)
        cols["time"].append(snap.time)
        cols["branch_overlap"].append(red.branch_overlap)
        cols["purity"].append(red.purity)
        cols["separation"].append(abs(xp - xm))
        cols["x_plus"].append(xp)
        cols["x_minus"].append(xm)
        cols["norm"].append(nrm)
    return MetricSeries(**{k: np.array(v) for k, v in cols.items()})


@dataclass
class RecurrenceReport:
    revived: bool
    revival_time: float | None
    revival_amplitude: float
    min_overlap: float
    min_time: float
    threshold: float


def recurrence_probe(series: MetricSeries | Trajectory, threshold: float = 1e-3) -> RecurrenceReport:
    """Detect any rise of the branch overlap above its running minimum.

    A revival is reported when the overlap climbs more than ``threshold``
    above the lowest value reached so far. No decoherence or recurrence time
    scale is inferred from this.
    """
    if isinstance(series, Trajectory):
        series = decoherence_metrics(series)
    ov = series.branch_overlap
    t = series.time
    running_min = np.minimum.accumulate(ov)
    rise = ov - running_min
    k = int(np.argmin(ov))
    hits = np.nonzero(rise > threshold)[0]
    return RecurrenceReport(
        revived=bool(hits.size),
        revival_time=float(t[hits[0]]) if hits.size else None,
        revival_amplitude=float(rise.max()),
        min_overlap=float(ov[k]),
        min_time=float(t[k]),
        threshold=threshold,
    )


def state_distance(a: CompositeState, b: CompositeState) -> float:
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def convergence_order(cfg: SimConfig, dt: float | None = None) -> float:
    """Observed temporal order from runs at dt, dt/2 and dt/4."""
    dt = cfg.dt if dt is None else dt
    finals = []
    for k in range(3):
        c = cfg.with_(dt=dt / 2 ** k, snapshot_stride=10 ** 9)
        finals.append(evolve(c).final)
    e1 = state_distance(finals[0], finals[1])
    e2 = state_distance(finals[1], finals[2])
    return math.log2(e1 / e2)
