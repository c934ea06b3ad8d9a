import numpy as np
import pytest

from atomsg.simconfig import Coupling, Grid, Packet, SimConfig


def make_config(enabled=False, **overrides):
    base = dict(
        cm_grid=Grid(-16.0, 16.0, 128),
        r_grid=Grid(-8.0, 8.0, 32),
        mass_cm=20.0,
        mass_r=1.0,
        dt=0.005,
        total_time=4.0,
        field_gradient=1.0,
        omega_r=1.0,
        coupling=Coupling(enabled=enabled, weight=0.5, offset=-4.0, Z=10),
        packet=Packet(0.0, 1.0, 0.0),
        snapshot_stride=20,
    )
    base.update(overrides)
    return SimConfig(**base).validate()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register their outcome here; printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
