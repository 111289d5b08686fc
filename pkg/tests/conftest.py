"""Shared fixtures: small desk systems, cached eigenbases."""

import math

import numpy as np
import pytest

from wedge_echo import (
    BilliardSpec,
    PerturbationSpec,
    build_potential,
    dimensionless,
    harmonic_potential,
)
from wedge_echo.quantum import design_grid, discretize, eigenstates


@pytest.fixture(scope="session")
def units():
    return dimensionless()


@pytest.fixture(scope="session")
def hard_spec(units):
    return BilliardSpec(alpha=math.radians(52.5), units=units)


@pytest.fixture(scope="session")
def hard_spec_mixed(units):
    return BilliardSpec(alpha=math.radians(31.0), units=units)


@pytest.fixture(scope="session")
def sheet_spec(units):
    return BilliardSpec(
        alpha=math.radians(52.5),
        wall_model="gaussian_sheet",
        wall_width=1.0,
        trap_depth=15.0,
        sheet_length=24.0,
        units=units,
    )


# A small but fully quantum wedge: ~20 states, 64x64 grid.  Session
# scoped because the eigensolve dominates the functional tests.
MINI = {"kT": 0.8, "e_clip": 6.5, "e_top": 8.8, "k": 22, "nx": 128, "nz": 128}


@pytest.fixture(scope="session")
def mini_system(sheet_spec):
    grid, conf = design_grid(sheet_spec, MINI["e_top"], MINI["nx"], MINI["nz"], pad=3.0)
    h_dn = discretize(build_potential(sheet_spec, PerturbationSpec(0.0), "down"),
                      grid, conf)
    basis_dn = eigenstates(h_dn, MINI["k"])
    return {
        "spec": sheet_spec,
        "grid": grid,
        "conf": conf,
        "h_dn": h_dn,
        "basis_dn": basis_dn,
        **MINI,
    }


@pytest.fixture(scope="session")
def mini_up(mini_system):
    eps = 0.1
    h_up = discretize(
        build_potential(mini_system["spec"], PerturbationSpec(eps), "up"),
        mini_system["grid"],
        mini_system["conf"],
    )
    basis_up = eigenstates(h_up, 40)
    return {"eps": eps, "h_up": h_up, "basis_up": basis_up}


@pytest.fixture(scope="session")
def harmonic_field(units):
    return harmonic_potential(1.0, units)
