"""Special-function primitives.

Exact integer/rational combinatorics, integer-order incomplete gamma
functions by finite sums, hydrogen-like radial functions, and numerical
checks of the spherical-harmonic machinery (angular selection rule,
addition theorem).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.special import sph_harm_y

from atomsg.errors import DomainError

# Above this argument exp(-x) is treated as exactly zero.
EXP_UNDERFLOW_X = 700.0

_FACT_TABLE_SIZE = 128
_FACTORIALS = tuple(math.factorial(i) for i in range(_FACT_TABLE_SIZE))


def factorial(n: int) -> int:
    if n < 0:
        raise DomainError(f"factorial of negative integer {n}")
    if n < _FACT_TABLE_SIZE:
        return _FACTORIALS[n]
    return math.factorial(n)


def binom(n: int, k: int) -> int:
    """Exact binomial coefficient; zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def rational(num, den=1) -> Fraction:
    return Fraction(num, den)


# -- incomplete gamma, integer order --------------------------------------------


def _check_gamma_args(n, x):
    if int(n) != n or n < 0:
        raise DomainError(f"order n must be a non-negative integer, got {n}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("incomplete gamma argument must be >= 0")
    return int(n), x


def _exp_partial_sum(n: int, x: np.ndarray) -> np.ndarray:
    """``exp(-x) * sum_{m=0..n} x^m / m!``, all terms positive."""
    big = x > EXP_UNDERFLOW_X
    xs = np.where(big, 0.0, x)
    term = np.exp(-xs)
    total = term.copy()
    for m in range(1, n + 1):
        term = term * xs / m
        total = total + term
    return np.where(big, 0.0, total)


def _exp_tail_sum(n: int, x: np.ndarray, max_terms: int = 400) -> np.ndarray:
    """``exp(-x) * sum_{m>n} x^m / m!``; used where 1 - partial sum would cancel."""
    term = np.exp(-x) * np.ones_like(x)
    for m in range(1, n + 2):
        term = term * x / m
    total = term.copy()
    m = n + 1
    for _ in range(max_terms):
        m += 1
        term = term * x / m
        total = total + term
        if np.all(term <= 1e-18 * total):
            break
    return total


def _as_output(v, x):
    return float(v) if np.ndim(x) == 0 else v


def upper_gamma_int(n: int, x):
    """Upper incomplete gamma ``Gamma(1+n, x) = n! e^-x sum_{m<=n} x^m/m!``."""
    n, xa = _check_gamma_args(n, x)
    return _as_output(float(factorial(n)) * _exp_partial_sum(n, xa), x)


def lower_gamma_int(n: int, x):
    """Lower incomplete gamma ``gamma(1+n, x) = n! [1 - e^-x sum_{m<=n} x^m/m!]``.

    For ``x < n + 1`` the bracket is evaluated as the convergent tail
    ``e^-x sum_{m>n} x^m/m!`` to avoid cancellation; elsewhere the finite sum is
    subtracted from one directly.
    """
    n, xa = _check_gamma_args(n, x)
    nf = float(factorial(n))
    small = xa < n + 1
    out = np.empty_like(xa)
    if np.any(small):
        out[small] = nf * _exp_tail_sum(n, xa[small])
    if np.any(~small):
        out[~small] = nf * (1.0 - _exp_partial_sum(n, xa[~small]))
    return _as_output(out, x)


# -- hydrogen-like radial functions ----------------------------------------------


def laguerre(k: int, alpha: float, x):
    """Generalized Laguerre polynomial ``L_k^alpha(x)`` by three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def laguerre_coefficients(k: int, alpha: int) -> list[Fraction]:
    """Exact monomial coefficients of ``L_k^alpha`` (integer alpha)."""
    return [Fraction((-1) ** i * binom(k + alpha, k - i), factorial(i)) for i in range(k + 1)]


@dataclass(frozen=True)
class RadialFunction:
    """Normalized hydrogen-like radial function ``R_nl`` for charge ``Z_eff``."""

    n: int
    l: int  # noqa: E741
    Z_eff: float = 1.0
    a_mu: float = 1.0

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.l < self.n:
            raise DomainError(f"invalid quantum numbers n={self.n}, l={self.l}")
        if self.Z_eff <= 0 or self.a_mu <= 0:
            raise DomainError("Z_eff and a_mu must be positive")

    @property
    def scale(self) -> float:
        """Inverse length multiplying xi in the dimensionless argument."""
        return 2.0 * self.Z_eff / (self.n * self.a_mu)

    @property
    def norm(self) -> float:
        n, l = self.n, self.l
        log_ratio = math.lgamma(n - l) - math.lgamma(n + l + 1)
        return math.sqrt(self.scale ** 3 * math.exp(log_ratio) / (2 * n))

    def __call__(self, xi):
        return radial_eval(self, xi)


def radial_eval(rf: RadialFunction, xi):
    xa = np.asarray(xi, dtype=float)
    if np.any(xa < 0):
        raise DomainError("radial coordinate must be >= 0")
    x = rf.scale * xa
    val = rf.norm * np.exp(-x / 2) * x ** rf.l * laguerre(rf.n - rf.l - 1, 2 * rf.l + 1, x)
    return float(val) if np.ndim(xi) == 0 else val


# -- angular machinery ------------------------------------------------------------

GL_NODES = 64
PHI_NODES = 128


def _sphere_grid(n_theta=GL_NODES, n_phi=PHI_NODES):
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(u)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    w = np.outer(wu, np.full(n_phi, 2 * np.pi / n_phi))
    T, P = np.meshgrid(theta, phi, indexing="ij")
    return T, P, w


def angular_selection_sum(l: int, s: int, m_s: int) -> float:  # noqa: E741
    """``sum_m int Y_l^m Y_l^m* Y_s^{m_s} dOmega`` by product quadrature.

    For a filled subshell this is ``(2l+1)/sqrt(4 pi)`` when ``s = m_s = 0``
    and zero otherwise. Returns the real part; the imaginary part vanishes to
    quadrature accuracy.
    """
    if s < 0 or abs(m_s) > s or l < 0:
        raise DomainError(f"invalid angular indices l={l}, s={s}, m_s={m_s}")
    T, P, w = _sphere_grid()
    shell = np.zeros_like(T)
    for m in range(-l, l + 1):
        shell += np.abs(sph_harm_y(l, m, T, P)) ** 2
    val = np.sum(w * shell * sph_harm_y(s, m_s, T, P))
    return float(val.real)


class AdditionResult(NamedTuple):
    value: float
    terms: np.ndarray
    slow_convergence: bool


def _spherical_angles(v):
    r = float(np.linalg.norm(v))
    if r == 0:
        return r, 0.0, 0.0
    return r, math.acos(max(-1.0, min(1.0, v[2] / r))), math.atan2(v[1], v[0])


def addition_theorem_check(xi_vec, tau_vec, s_max: int) -> AdditionResult:
    """Partial sum of the multipole expansion of ``1/|xi - tau|`` up to ``s_max``.

    Each multipole uses the explicit spherical-harmonic sum, not the Legendre
    shortcut, so the result exercises the harmonics themselves.
    """
    xi_vec = np.asarray(xi_vec, dtype=float)
    tau_vec = np.asarray(tau_vec, dtype=float)
    r_xi, th_xi, ph_xi = _spherical_angles(xi_vec)
    r_tau, th_tau, ph_tau = _spherical_angles(tau_vec)
    slow = math.isclose(r_xi, r_tau, rel_tol=1e-12)
    if slow:
        warnings.warn("|xi| == |tau|: multipole series converges slowly", RuntimeWarning, stacklevel=2)
    r_lt, r_gt = min(r_xi, r_tau), max(r_xi, r_tau)
    if r_gt == 0:
        raise DomainError("both vectors at the origin")
    terms = np.empty(s_max + 1)
    for s in range(s_max + 1):
        ms = np.arange(-s, s + 1)
        ang = np.sum(np.conj(sph_harm_y(s, ms, th_tau, ph_tau)) * sph_harm_y(s, ms, th_xi, ph_xi))
        terms[s] = (r_lt ** s / r_gt ** (s + 1)) * (4 * np.pi / (2 * s + 1)) * ang.real
    return AdditionResult(float(math.fsum(terms)), terms, slow)
