"""Brute-force evaluations of the effective interaction.

Neither path touches the coefficient table or the incomplete-gamma code:

* :func:`radial_oracle` integrates the angular-reduced radial form with
  adaptive quadrature, split at the kink ``xi = Omega``;
* :func:`mc_oracle` samples electron positions from ``|phi_nlm|^2`` in three
  dimensions and averages the bare Coulomb kernel.

Only :class:`~atomsg.special.RadialFunction` is shared with the rest of the
package.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import lpmv

from atomsg.core import NATURAL_UNITS, ShellConfig, UnitSystem
from atomsg.errors import ConvergenceError, DomainError
from atomsg.interaction import PotentialProfile, potential_closed_form
from atomsg.special import RadialFunction

TRUNCATION_RATIO = 1e-18


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("ATOMSG_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class QuadratureConfig:
    method: str = "adaptive"  # or "gauss"
    abs_tol: float = 1e-15
    rel_tol: float = 1e-12
    max_subdivisions: int = 200
    gauss_panels: int = 400
    gauss_order: int = 16

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.method not in ("adaptive", "gauss"):
            raise DomainError(f"unknown quadrature method {self.method!r}")


@dataclass(frozen=True)
class McConfig:
    sample_count: int = 1_000_000
    seed: int = 20080101
    batch_size: int = 100_000

    def __post_init__(self):
        if self.sample_count < 10_000:
            raise DomainError("Monte-Carlo sample_count must be >= 1e4")


class QuadEstimate(NamedTuple):
    value: float
    error: float
    remainder_bound: float


@lru_cache(maxsize=512)
def truncation_radius(rf: RadialFunction) -> float:
    """Radius beyond which ``R^2 xi^2`` stays below ``1e-18`` of its peak."""
    q = rf.scale
    x = np.linspace(0.0, 400.0, 40001)
    dens = rf(x / q) ** 2 * (x / q) ** 2
    peak = dens.max()
    above = np.nonzero(dens >= TRUNCATION_RATIO * peak)[0]
    return float(x[above[-1] + 1] / q)


def _tail_bound(rf: RadialFunction, r_cut: float, power: int) -> float:
    """Bound on ``int_{r_cut}^inf R^2 xi^power``: integrand ~ xi^p exp(-q xi)."""
    q = rf.scale
    p = 2 * (rf.n - 1) + power
    f = rf(r_cut) ** 2 * r_cut ** power
    slack = q - p / r_cut
    return float(f / slack) if slack > 0 else math.inf


def _integrate(f, a, b, qc: QuadratureConfig):
    if b <= a:
        return 0.0, 0.0
    if qc.method == "gauss":
        nodes, weights = np.polynomial.legendre.leggauss(qc.gauss_order)
        edges = np.linspace(a, b, qc.gauss_panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        pts = mid + half * nodes[None, :]
        val = float(np.sum(half * weights[None, :] * f(pts)))
        coarse_nodes, coarse_w = np.polynomial.legendre.leggauss(qc.gauss_order // 2)
        cpts = mid + half * coarse_nodes[None, :]
        err = abs(val - float(np.sum(half * coarse_w[None, :] * f(cpts))))
        return val, err
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, a, b, epsabs=qc.abs_tol, epsrel=qc.rel_tol, limit=qc.max_subdivisions, full_output=1
        )
    val, err = out[0], out[1]
    if len(out) > 3 and err > max(qc.abs_tol, 1e3 * qc.rel_tol * abs(val)):
        raise ConvergenceError(f"quadrature on [{a}, {b}] did not converge: {out[3]}", val, err)
    return val, err


def orbital_radial_terms(rf: RadialFunction, omega: float, qc: QuadratureConfig, split: float | None = None):
    """``(Omega^-1 int_0^Omega R^2 xi^2 + int_Omega^inf R^2 xi)`` with error and tail bound."""
    r_cut = truncation_radius(rf)
    inner_f = lambda r: rf(r) ** 2 * r ** 2  # noqa: E731
    outer_f = lambda r: rf(r) ** 2 * r  # noqa: E731
    err = 0.0
    inner = 0.0
    if omega > 0:
        b = min(omega, r_cut)
        cuts = [0.0] + ([split] if split is not None and 0 < split < b else []) + [b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            v, e = _integrate(inner_f, lo, hi, qc)
            inner += v
            err += e / omega
        if omega > r_cut:
            # the density beyond r_cut is below the truncation ratio; count it as inside
            inner += _tail_bound(rf, r_cut, 2)
        inner /= omega
    outer, e = _integrate(outer_f, omega, max(omega, r_cut), qc)
    err += e
    bound = _tail_bound(rf, max(omega, r_cut), 1)
    return inner + outer, err, bound


def radial_oracle_detailed(
    Z: int, shells: ShellConfig, omega: float, qc: QuadratureConfig | None = None,
    u: UnitSystem = NATURAL_UNITS, split: float | None = None,
) -> QuadEstimate:
    qc = qc or QuadratureConfig()
    if omega < 0:
        raise DomainError("omega must be >= 0")
    total, err, bound = [], 0.0, 0.0
    for orb in shells:
        rf = RadialFunction(orb.n, orb.l, Z, u.a_mu)
        v, e, b = orbital_radial_terms(rf, float(omega), qc, split)
        m = shells.multiplicity(orb)
        total.append(m * v)
        err += m * e
        bound += m * b
    scale = u.k * Z
    return QuadEstimate(scale * math.fsum(total), scale * err, scale * bound)


def radial_oracle(Z: int, shells: ShellConfig, omega: float, qc: QuadratureConfig | None = None,
                  u: UnitSystem = NATURAL_UNITS) -> float:
    return radial_oracle_detailed(Z, shells, omega, qc, u).value


def quadrature_profile(Z: int, shells: ShellConfig, omega, qc: QuadratureConfig | None = None,
                       u: UnitSystem = NATURAL_UNITS) -> PotentialProfile:
    omega = np.asarray(omega, dtype=float)
    vals = np.array([radial_oracle(Z, shells, w, qc, u) for w in omega])
    return PotentialProfile(Z, shells, omega, vals, "radial-quadrature", units=u)


# -- Monte Carlo --------------------------------------------------------------------


class McEstimate(NamedTuple):
    value: float
    stderr: float
    per_orbital: dict  # (n, l, m) -> (mean of 1/|xi - Omega|, stderr)


class _InverseCdf:
    def __init__(self, x, density):
        cdf = integrate.cumulative_simpson(density, x=x, initial=0.0)
        cdf = np.maximum.accumulate(cdf)
        self.total = cdf[-1]
        self.cdf = cdf / cdf[-1]
        self.x = x

    def __call__(self, u):
        return np.interp(u, self.cdf, self.x)


def _radial_sampler(rf: RadialFunction) -> _InverseCdf:
    r_cut = truncation_radius(rf)
    r = np.linspace(0.0, r_cut, 40001)
    return _InverseCdf(r, rf(r) ** 2 * r ** 2)


def _polar_sampler(l: int, m: int) -> _InverseCdf:  # noqa: E741
    c = np.linspace(-1.0, 1.0, 20001)
    return _InverseCdf(c, lpmv(abs(m), l, c) ** 2)


def _orbital_batch(r_samp, c_samp, omega_vec, count, rng):
    r = r_samp(rng.random(count))
    c = c_samp(rng.random(count))
    phi = rng.random(count) * (2 * np.pi)
    s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    pts = np.stack([r * s * np.cos(phi), r * s * np.sin(phi), r * c], axis=1)
    inv = 1.0 / np.linalg.norm(pts - omega_vec[None, :], axis=1)
    return float(inv.sum()), float((inv * inv).sum()), count


def mc_oracle(Z: int, shells: ShellConfig, omega_vec, mc: McConfig | None = None,
              u: UnitSystem = NATURAL_UNITS) -> McEstimate:
    """Monte-Carlo estimate of the interaction at displacement ``omega_vec``.

    Each spatial orbital (n, l, m) gets an equal share of the samples; its
    electron position is drawn from ``|R_nl|^2 xi^2`` (inverse CDF) times
    ``|Y_lm|^2`` in angle, so the angular closed-shell reduction is not assumed.
    Batches use seeds spawned from ``mc.seed``, making the result independent
    of the thread count.
    """
    mc = mc or McConfig()
    omega_vec = np.asarray(omega_vec, dtype=float).reshape(3)
    spatial = [(o, m) for o in shells for m in range(-o.l, o.l + 1)]
    base, extra = divmod(mc.sample_count, len(spatial))
    jobs = []
    root = np.random.SeedSequence(mc.seed)
    orb_seqs = root.spawn(len(spatial))
    for i, ((orb, m), seq) in enumerate(zip(spatial, orb_seqs)):
        n_i = base + (1 if i < extra else 0)
        n_batches = max(1, math.ceil(n_i / mc.batch_size))
        sizes = [n_i // n_batches + (1 if j < n_i % n_batches else 0) for j in range(n_batches)]
        for sub, size in zip(seq.spawn(n_batches), sizes):
            jobs.append((i, size, sub))

    samplers = {}
    for i, (orb, m) in enumerate(spatial):
        rf = RadialFunction(orb.n, orb.l, Z, u.a_mu)
        samplers[i] = (_radial_sampler(rf), _polar_sampler(orb.l, m))

    def run(job):
        i, size, seq = job
        r_s, c_s = samplers[i]
        return i, _orbital_batch(r_s, c_s, omega_vec, size, np.random.default_rng(seq))

    workers = thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    acc = {}
    for i, (s1, s2, cnt) in results:
        a = acc.setdefault(i, [0.0, 0.0, 0])
        a[0] += s1
        a[1] += s2
        a[2] += cnt
    per_orbital = {}
    means, variances = [], []
    for i, (orb, m) in enumerate(spatial):
        s1, s2, cnt = acc[i]
        mean = s1 / cnt
        var = max(s2 / cnt - mean * mean, 0.0) * cnt / (cnt - 1)
        se = math.sqrt(var / cnt)
        per_orbital[(orb.n, orb.l, m)] = (mean, se)
        w = 2 if shells.spin_doubling else 1
        means.append(w * mean)
        variances.append((w * se) ** 2)
    scale = u.k * Z
    return McEstimate(scale * math.fsum(means), scale * math.sqrt(math.fsum(variances)), per_orbital)


# -- cross validation ---------------------------------------------------------------

DEFAULT_DIRECTION = np.array([1.0, 2.0, 3.0]) / math.sqrt(14.0)


class CrossRow(NamedTuple):
    omega: float
    closed: float
    quad: float
    mc: float
    mc_stderr: float
    rel_dev: float


@dataclass
class CrossReport:
    Z: int
    rows: list
    tolerance: float
    mc_sigmas: float = 3.0

    @property
    def max_rel_dev(self) -> float:
        return max(r.rel_dev for r in self.rows)

    @property
    def mc_max_z(self) -> float:
        zs = [abs(r.mc - r.closed) / r.mc_stderr for r in self.rows if not math.isnan(r.mc)]
        return max(zs) if zs else 0.0

    @property
    def passed(self) -> bool:
        return self.max_rel_dev <= self.tolerance and self.mc_max_z <= self.mc_sigmas


def default_tolerance(shells: ShellConfig) -> float:
    return 1e-8 if shells.n_max <= 2 else 1e-6


def cross_validate(
    Z: int, shells: ShellConfig, grid, qc: QuadratureConfig | None = None,
    mc: McConfig | None = None, mc_indices=None, tolerance: float | None = None,
    u: UnitSystem = NATURAL_UNITS,
) -> CrossReport:
    """Closed form vs radial quadrature on ``grid``; Monte Carlo at ``mc_indices``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("cross-validation grid is empty")
    closed = potential_closed_form(Z, shells, grid, u)
    mc_idx = set() if mc is None else set(mc_indices if mc_indices is not None else _spread(len(grid), 5))
    rows = []
    for i, w in enumerate(grid):
        q = radial_oracle(Z, shells, w, qc, u)
        m, se = math.nan, math.nan
        if i in mc_idx:
            est = mc_oracle(Z, shells, w * DEFAULT_DIRECTION, mc, u)
            m, se = est.value, est.stderr
        rows.append(CrossRow(float(w), float(closed[i]), q, m, se, abs(closed[i] - q) / abs(q)))
    tol = default_tolerance(shells) if tolerance is None else tolerance
    return CrossReport(Z, rows, tol)


def _spread(n: int, k: int) -> list[int]:
    if n <= k:
        return list(range(n))
    return sorted({round(i * (n - 1) / (k - 1)) for i in range(k)})
