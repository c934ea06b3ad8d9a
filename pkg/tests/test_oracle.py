import math

import numpy as np
import pytest

from atomsg.core import ShellConfig, shells_for
from atomsg.errors import ConvergenceError, DomainError
from atomsg.interaction import potential_closed_form
from atomsg.oracle import (
    DEFAULT_DIRECTION,
    McConfig,
    QuadratureConfig,
    cross_validate,
    default_tolerance,
    mc_oracle,
    quadrature_profile,
    radial_oracle,
    radial_oracle_detailed,
    truncation_radius,
)
from atomsg.special import RadialFunction


def _one_s(Z, omega):
    # textbook potential of a hydrogenic 1s cloud, k = a_mu = 1
    return Z * (1 / omega - math.exp(-2 * Z * omega) * (Z + 1 / omega))


@pytest.mark.parametrize("Z", [2, 10, 28])
@pytest.mark.parametrize("omega", [0.0, 0.05, 0.7, 3.0, 25.0])
def test_quadrature_matches_closed_form(Z, omega):
    sh = shells_for(Z)
    assert radial_oracle(Z, sh, omega) == pytest.approx(potential_closed_form(Z, sh, omega), rel=1e-10)


def test_quadrature_one_s_textbook():
    # one spatial orbital per (n, l, m); spin doubling is off by default
    for w in (0.1, 0.5, 1.5, 4.0):
        assert radial_oracle(2, shells_for(2), w) == pytest.approx(_one_s(2, w), rel=1e-12)


@pytest.mark.parametrize("omega", [0.3, 1.0, 4.0])
def test_split_invariance(omega):
    sh = shells_for(28)
    a = radial_oracle_detailed(28, sh, omega)
    b = radial_oracle_detailed(28, sh, omega, split=omega / 3)
    assert b.value == pytest.approx(a.value, rel=1e-12)


def test_gauss_rule_agrees():
    sh = shells_for(10)
    qc = QuadratureConfig(method="gauss")
    for w in (0.2, 2.0, 10.0):
        assert radial_oracle(10, sh, w, qc) == pytest.approx(radial_oracle(10, sh, w), rel=1e-10)


def test_remainder_bound_small():
    est = radial_oracle_detailed(60, shells_for(60), 2.0)
    assert 0 <= est.remainder_bound < 1e-12 * est.value
    assert est.error < 1e-8 * est.value


def test_truncation_radius():
    rf = RadialFunction(1, 0, 1.0)
    r = truncation_radius(rf)
    # R^2 r^2 = 4 r^2 exp(-2r); 1e-18 of the peak sits near r = 27
    assert 24 < r < 30
    assert 4 * r * r * math.exp(-2 * r) < 1e-18 * 4 * math.exp(-2) * 1.01


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(method="simpson")
    with pytest.raises(DomainError):
        radial_oracle(10, shells_for(10), -1.0)


def test_quadrature_nonconvergence_reported():
    qc = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-15, max_subdivisions=1)
    with pytest.raises(ConvergenceError) as info:
        radial_oracle(182, shells_for(182), 7.3, qc)
    assert info.value.exit_code == 3


def test_quadrature_profile():
    prof = quadrature_profile(10, shells_for(10), [0.0, 1.0])
    assert prof.source == "radial-quadrature"
    assert prof.values[0] == pytest.approx(200.0, rel=1e-6)


# -- Monte Carlo --------------------------------------------------------------------


def test_mc_sample_floor():
    with pytest.raises(DomainError):
        McConfig(sample_count=1000)


@pytest.mark.parametrize("Z", [2, 10])
def test_mc_one_s_at_three_over_z(Z):
    sh = ShellConfig.closed(1)
    w = 3.0 / Z
    est = mc_oracle(Z, sh, w * DEFAULT_DIRECTION, McConfig(sample_count=200_000, seed=7))
    assert abs(est.value - _one_s(Z, w)) < 4 * est.stderr


def test_mc_agrees_with_closed_form():
    sh = shells_for(10)
    for w in (0.0, 0.4, 2.0):
        est = mc_oracle(10, sh, w * DEFAULT_DIRECTION, McConfig(sample_count=200_000, seed=11))
        assert abs(est.value - potential_closed_form(10, sh, w)) < 4 * est.stderr


def test_mc_isotropy():
    sh = shells_for(10)
    mc = McConfig(sample_count=200_000, seed=3)
    w = 0.5
    dirs = [np.array([1.0, 0, 0]), np.array([0, 0, 1.0]), np.array([1.0, -1.0, 1.0]) / math.sqrt(3)]
    ests = [mc_oracle(10, sh, w * d, mc) for d in dirs]
    for a in ests[1:]:
        assert abs(a.value - ests[0].value) < 4 * math.hypot(a.stderr, ests[0].stderr)


def test_mc_stderr_scaling():
    sh = shells_for(2)
    ns = np.array([10_000, 40_000, 160_000, 640_000])
    se = [mc_oracle(2, sh, 0.3 * DEFAULT_DIRECTION, McConfig(sample_count=int(n), seed=5)).stderr for n in ns]
    slope = np.polyfit(np.log(ns), np.log(se), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_mc_deterministic_across_threads(monkeypatch):
    sh = shells_for(10)
    mc = McConfig(sample_count=50_000, seed=99, batch_size=7_000)
    monkeypatch.setenv("ATOMSG_THREADS", "1")
    a = mc_oracle(10, sh, DEFAULT_DIRECTION, mc)
    monkeypatch.setenv("ATOMSG_THREADS", "4")
    b = mc_oracle(10, sh, DEFAULT_DIRECTION, mc)
    assert a.value == b.value and a.stderr == b.stderr
    c = mc_oracle(10, sh, DEFAULT_DIRECTION, McConfig(sample_count=50_000, seed=100))
    assert c.value != a.value


def test_mc_per_orbital_keys():
    est = mc_oracle(10, shells_for(10), DEFAULT_DIRECTION, McConfig(sample_count=10_000))
    assert set(est.per_orbital) == {(1, 0, 0), (2, 0, 0), (2, 1, -1), (2, 1, 0), (2, 1, 1)}


# -- cross validation ---------------------------------------------------------------


def test_cross_validate_small():
    rep = cross_validate(10, shells_for(10), np.linspace(0, 50, 21),
                         mc=McConfig(sample_count=100_000), mc_indices=[0, 10])
    assert rep.tolerance == 1e-8
    assert rep.max_rel_dev < 1e-8
    assert rep.mc_max_z < 4
    assert sum(not math.isnan(r.mc) for r in rep.rows) == 2


def test_cross_validate_without_mc():
    rep = cross_validate(28, shells_for(28), [0.5, 1.0])
    assert all(math.isnan(r.mc) for r in rep.rows)
    assert rep.mc_max_z == 0.0 and rep.passed


def test_default_tolerance():
    assert default_tolerance(shells_for(10)) == 1e-8
    assert default_tolerance(shells_for(182)) == 1e-6


def test_empty_grid():
    with pytest.raises(DomainError):
        cross_validate(10, shells_for(10), [])
