import numpy as np
import pytest

from greenbvp.boundary import (
    BoundaryConditionSet,
    BoundaryFunction,
    Local1D,
    LocalField2D,
    NonlocalKernel,
    SpinorBoundaryFunction,
    apply_B,
    apply_B_adjoint_dagger,
    constant_kernel,
    cosine_kernel,
    default_adjoint,
    trace_E,
)
from greenbvp.errors import PointOnBoundary, ShapeMismatch
from greenbvp.fundamental import Helmholtz1D, Laplace2D, Laplace2D as L2
from greenbvp.geometry import Circle, Interval, discretize_boundary


def test_local1d_row_acts_on_channels(unit_bd):
    bcs = BoundaryConditionSet((Local1D(a0=2.0, a1=-1.0), Local1D(b0=1.0, b1=3.0)))
    # u = x^2: u(0)=0, u'(0)=0, u(1)=1, u'(1)=2
    f = BoundaryFunction(unit_bd, [0.0, 1.0], [0.0, 2.0])
    out = apply_B(bcs, f).flat()
    assert np.allclose(out, [0.0, 1.0 + 6.0])


def test_periodic_rows(unit_bd):
    bcs = BoundaryConditionSet((Local1D(a0=1, b0=-1), Local1D(a1=1, b1=-1)))
    f = BoundaryFunction(unit_bd, [0.3, 0.3], [1.0, 1.0])
    assert np.allclose(apply_B(bcs, f).flat(), 0.0)


def test_zero_coefficients_rejected():
    with pytest.raises(ValueError):
        Local1D()
    with pytest.raises(ValueError):
        LocalField2D(0.0, 0.0)


def test_adjoint_dagger_is_weighted_adjoint():
    # <B f, phi>_spinor = <f, B^dagger phi>_trace for random data
    bd = discretize_boundary(Circle(), 16)
    rng = np.random.default_rng(3)
    bcs = BoundaryConditionSet((LocalField2D(1.0, 0.5 + 0.2j, (0.0, np.pi)),
                                LocalField2D(0.3, 1.0, (np.pi, 2 * np.pi))))
    dc = bcs.discretize(bd)
    f = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    phi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    lhs = np.sum(dc.row_weights * np.conj(dc.B @ f) * phi)
    rhs = np.sum(dc.trace_weights * np.conj(f) * (dc.dagger("direct") @ phi))
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_apply_B_adjoint_dagger_shape_check(unit_bd):
    bcs = BoundaryConditionSet((Local1D(a0=1.0), Local1D(b0=1.0)))
    with pytest.raises(ShapeMismatch):
        apply_B_adjoint_dagger(bcs, SpinorBoundaryFunction(unit_bd, ([1.0],)))
    out = apply_B_adjoint_dagger(bcs, SpinorBoundaryFunction(unit_bd, ([1.0], [2.0])))
    assert np.allclose(out.values, [1.0, 2.0]) and np.allclose(out.derivatives, 0.0)


def test_supports_must_cover_boundary():
    bd = discretize_boundary(Circle(), 16)
    with pytest.raises(ShapeMismatch):
        BoundaryConditionSet((LocalField2D(1.0, 0.0, (0.0, np.pi)),)).discretize(bd)


def test_adjoint_support_mismatch():
    bd = discretize_boundary(Circle(), 16)
    bcs = BoundaryConditionSet((LocalField2D(1.0, 0.0, (0.0, np.pi)), LocalField2D(1.0, 0.0, (np.pi, 2 * np.pi))),
                               (LocalField2D(1.0, 0.0, (0.0, 1.0)), LocalField2D(1.0, 0.0, (1.0, 2 * np.pi))))
    with pytest.raises(ShapeMismatch):
        bcs.discretize(bd)


def test_nonlocal_kernel_integrates():
    bd = discretize_boundary(Circle(), 32)
    bcs = BoundaryConditionSet((constant_kernel(bd, 1.0),))
    dc = bcs.discretize(bd)
    t = bd.params
    vals = np.cos(t) ** 2
    # int cos^2 ds over the unit circle = pi
    assert np.allclose(dc.B[:, :32] @ vals, np.pi)


def test_cosine_kernel_projects_mode():
    bd = discretize_boundary(Circle(), 32)
    K = cosine_kernel(bd, 2.0, 3)
    dc = BoundaryConditionSet((K,)).discretize(bd)
    t = bd.params
    out = dc.B[:, :32] @ np.cos(3 * t)
    assert np.allclose(out, 2.0 * np.pi * np.cos(3 * t))


def test_kernel_outside_support_rejected():
    bd = discretize_boundary(Circle(), 8)
    K = np.ones((4, 8))
    with pytest.raises(ShapeMismatch):
        BoundaryConditionSet((NonlocalKernel(K, (0.0, np.pi)), LocalField2D(1.0, 0.0, (np.pi, 2 * np.pi)))).discretize(bd)


def test_default_adjoint_requires_real_self_adjoint():
    rows = (Local1D(a0=1.0, a1=1j), Local1D(b0=1.0))
    with pytest.raises(ValueError):
        default_adjoint(rows, Helmholtz1D(1.0))
    with pytest.raises(ValueError):
        default_adjoint((Local1D(a0=1.0),), Helmholtz1D(1.0 + 0.1j))
    assert default_adjoint((LocalField2D(1.0, 0.0),), L2()) == [LocalField2D(1.0, 0.0)]


def test_trace_E_rejects_boundary_point(unit_bd):
    fs = Helmholtz1D(1.0).fundamental()
    with pytest.raises(PointOnBoundary):
        trace_E(fs, unit_bd, 1.0)


def test_trace_E_2d_normal_derivative():
    bd = discretize_boundary(Circle(), 16)
    fs = Laplace2D().fundamental()
    tr = trace_E(fs, bd, [0.0, 0.0])
    # E(., 0) = ln r / 2pi: zero on the unit circle, normal derivative 1/2pi
    assert np.allclose(tr.values, 0.0, atol=1e-15)
    assert np.allclose(tr.derivatives, 1 / (2 * np.pi))


def test_swapped_and_permuted():
    a, b = Local1D(a0=1.0), Local1D(b0=1.0, b1=2.0)
    bcs = BoundaryConditionSet((a, b), (a, b.conjugate()))
    assert bcs.swapped().conditions == (a, b.conjugate())
    assert bcs.permuted([1, 0]).conditions == (b, a)
