import math
from fractions import Fraction

import numpy as np
import pytest

from atomsg.core import CLOSED_SHELL_ZS, ShellConfig, UnitSystem, shells_for
from atomsg.errors import CapabilityError, DomainError
from atomsg.interaction import (
    PotentialProfile,
    beta,
    build_coefficients,
    closed_form_profile,
    coefficient,
    linear_fit,
    loglog_slope,
    pointer_basis_diagnostic,
    potential_closed_form,
    z_scaling_report,
)

# Z = 10 closed shell, k = a_mu = 1; 40-digit mpmath quadrature of the radial form
FROZEN_Z10 = {
    0.5: 89.853941774804873837,
    1.0: 49.825664042985159702,
    2.0: 24.999974606587371111,
    5.0: 9.999999999999999986921,
}


def test_single_coefficients():
    assert coefficient(1, 0, 0, 0) == Fraction(1, 2)
    tab = build_coefficients(ShellConfig.closed(2))
    assert tab.orbital_sum(2, 1) == 3
    assert tab.orbital_sum(1, 0) == 1


@pytest.mark.parametrize("n", range(1, 8))
def test_exact_normalization_identity(n):
    tab = build_coefficients(ShellConfig.closed(n))
    for l in range(n):  # noqa: E741
        assert tab.orbital_sum(n, l) == 2 * l + 1


def test_entries_reproduce_orbital_sums():
    tab = build_coefficients(ShellConfig.closed(5))
    for (n, l), per_t in tab.by_orbital.items():
        direct = [Fraction(0)] * len(per_t)
        for e in tab.entries:
            if (e.n, e.l) == (n, l):
                direct[e.t] += e.C
        assert tuple(direct) == per_t


@pytest.mark.parametrize("Z", [2, 10, 28, 60, 110, 182])
def test_beta_exact(Z):
    res = beta(Z)
    assert res.beta_exact == Fraction(Z, 2)
    assert res.beta_over_k == Z / 2


def test_beta_spin_doubling_and_units():
    assert beta(10, spin_doubling=True).beta_exact == 10
    assert beta(28, UnitSystem(k=3.0)).beta == pytest.approx(42.0)


def test_beta_rejects_open_shell():
    with pytest.raises(DomainError):
        beta(11)


def test_beta_linear_fit():
    Zs = [10, 28, 60, 110, 182]
    fit = linear_fit(Zs, [beta(Z).beta_over_k for Z in Zs])
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-10)
    assert fit.r_squared >= 0.999


def test_capability_limit():
    from atomsg.core import Orbital

    with pytest.raises(CapabilityError):
        build_coefficients(ShellConfig((Orbital(13, 0),)))
    with pytest.raises(DomainError):
        ShellConfig.closed(13)


def test_condition_number_grows():
    tab = build_coefficients(ShellConfig.closed(6))
    assert tab.condition_number(1, 0) == 1.0
    assert tab.condition_number(6, 0) > tab.condition_number(4, 0) > 1


@pytest.mark.parametrize("omega, ref", sorted(FROZEN_Z10.items()))
def test_frozen_values(omega, ref):
    assert potential_closed_form(10, shells_for(10), omega) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("Z", CLOSED_SHELL_ZS[:6])
def test_origin_value(Z):
    sh = shells_for(Z)
    assert potential_closed_form(Z, sh, 0.0) == pytest.approx(Z * Z * sh.n_max, rel=1e-10)
    # continuity into the Omega > 0 branch
    assert potential_closed_form(Z, sh, 1e-9) == pytest.approx(Z * Z * sh.n_max, rel=1e-6)


@pytest.mark.parametrize("Z", [10, 28, 60, 110, 182])
def test_large_separation_limit(Z):
    assert 50.0 * potential_closed_form(Z, shells_for(Z), 50.0) == pytest.approx(Z * Z / 2, rel=1e-5)


def test_units_scale():
    sh = shells_for(10)
    u = UnitSystem(k=2.0, a_mu=0.5)
    # V(Omega; k, a) = (k / a) V(Omega / a; 1, 1)
    assert potential_closed_form(10, sh, 1.0, u) == pytest.approx(4.0 * potential_closed_form(10, sh, 2.0), rel=1e-13)


@pytest.mark.parametrize("Z", [2, 10, 28, 60, 110, 182])
def test_positive_and_monotone(Z):
    prof = closed_form_profile(Z, np.linspace(0, 50, 200))
    assert prof.is_positive()
    assert prof.is_monotone()


def test_vectorized_matches_scalar():
    sh = shells_for(28)
    om = np.array([0.0, 0.1, 3.0, 40.0])
    vec = potential_closed_form(28, sh, om)
    assert vec.shape == (4,)
    for w, v in zip(om, vec):
        assert potential_closed_form(28, sh, w) == v


def test_negative_omega_rejected():
    with pytest.raises(DomainError):
        potential_closed_form(10, shells_for(10), -0.1)


def test_profile_interpolation_tail():
    prof = closed_form_profile(10, np.linspace(0, 10, 101))
    assert prof(20.0) == pytest.approx(prof.values[-1] / 2)
    assert prof(5.0) == pytest.approx(prof.values[50])
    with pytest.raises(DomainError):
        PotentialProfile(10, shells_for(10), [0.0], [1.0], source="guess")


def test_z_scaling_flags():
    rows = z_scaling_report([2, 10, 28, 60], 5.0)
    assert not rows[0].asymptotic and rows[1].asymptotic
    assert z_scaling_report([2], 1.0)[0].exponential_significant
    assert rows[3].rel_dev <= 1e-3 and not rows[3].exponential_significant


def test_loglog_slope():
    assert loglog_slope([28, 60, 110, 182], 5.0) == pytest.approx(2.0, abs=0.05)
    with pytest.raises(DomainError):
        z_scaling_report([10], 0.0)


def test_pointer_basis():
    prof = closed_form_profile(28, np.linspace(0, 20, 50))
    rep = pointer_basis_diagnostic(prof, packet_width=0.5)
    assert rep.position_offdiag_max == 0.0
    # off-diagonal packet element tracks the bare overlap for a slowly varying V
    assert rep.packet_offdiag_ratio == pytest.approx(rep.packet_overlap, rel=0.05)
    assert rep.packet_overlap == pytest.approx(math.exp(-9 / 8), rel=1e-6)
    # finite difference of the profile over one width
    V = potential_closed_form(28, shells_for(28), np.array([4.5, 5.0, 5.5]))
    assert rep.variation == pytest.approx(abs(V[2] - V[0]) / V[1], rel=1e-12)
    narrow = pointer_basis_diagnostic(prof, packet_width=0.05)
    assert narrow.variation < rep.variation
    with pytest.raises(DomainError):
        pointer_basis_diagnostic(prof, packet_width=0.0)


def test_interpolated_profile_pointer():
    grid = np.linspace(0, 20, 2001)
    exact = closed_form_profile(10, grid)
    interp = PotentialProfile(10, exact.shells, grid, exact.values, "radial-quadrature")
    a = pointer_basis_diagnostic(exact, 1.0)
    b = pointer_basis_diagnostic(interp, 1.0)
    assert b.packet_offdiag_ratio == pytest.approx(a.packet_offdiag_ratio, rel=1e-4)
