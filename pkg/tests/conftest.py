import sys

import numpy as np
import pytest

from greenbvp import BoundaryConditionSet, Circle, Helmholtz1D, Interval, Laplace2D, Local1D, LocalField2D
from greenbvp import ModifiedHelmholtz1D, discretize_boundary

DIRICHLET = (Local1D(a0=1.0), Local1D(b0=1.0))
PERIODIC = (Local1D(a0=1.0, b0=-1.0), Local1D(a1=1.0, b1=-1.0))
ROBIN = (Local1D(a0=1.0, a1=-1.0), Local1D(b0=1.0, b1=1.0))


@pytest.fixture
def unit_bd():
    return discretize_boundary(Interval(0.0, 1.0))


@pytest.fixture
def helm():
    return Helmholtz1D(1.0).fundamental()


@pytest.fixture
def dirichlet_case(helm, unit_bd):
    return helm, BoundaryConditionSet(DIRICHLET), unit_bd


@pytest.fixture
def periodic_case(helm, unit_bd):
    return helm, BoundaryConditionSet(PERIODIC), unit_bd


@pytest.fixture
def robin_case(unit_bd):
    return ModifiedHelmholtz1D(1.0).fundamental(), BoundaryConditionSet(ROBIN), unit_bd


@pytest.fixture(scope="session")
def disk_bd():
    return discretize_boundary(Circle(), 128)


@pytest.fixture(scope="session")
def disk_case(disk_bd):
    return Laplace2D().fundamental(), BoundaryConditionSet((LocalField2D(1.0, 0.0),)), disk_bd


def grid_pairs(n=9, lo=0.1, hi=0.9):
    g = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return X.ravel(), Y.ravel()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
