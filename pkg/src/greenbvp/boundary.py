"""Boundary operators, their adjoints and discrete boundary functions.

A boundary trace is stored as two channels over the boundary nodes: values
and (first-argument / outward normal) derivatives.  A condition b_j becomes
a matrix acting on the stacked 2N-vector ``[values, derivatives]``; its
output rows are the components of a spinor-valued boundary function.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PointOnBoundary, ShapeMismatch
from .geometry import as_points

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Local1D:
    """a0 u(a) + a1 u'(a) + b0 u(b) + b1 u'(b)."""

    a0: complex = 0.0
    a1: complex = 0.0
    b0: complex = 0.0
    b1: complex = 0.0

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a0 == self.a1 == self.b0 == self.b1 == 0:
            raise ValueError("Local1D needs at least one nonzero coefficient")

    @property
    def coefficients(self):
        return np.array([self.a0, self.a1, self.b0, self.b1])

    def conjugate(self):
        return Local1D(*np.conj(self.coefficients))


@dataclass(frozen=True)
class LocalField2D:
    """dirichlet_coeff u + neumann_coeff du/dn, pointwise on its support.

    ``support`` is None (whole curve), an arc ``(t0, t1)`` in curve parameter,
    or an explicit sequence of node indices.
    """

    dirichlet_coeff: complex = 1.0
    neumann_coeff: complex = 0.0
    support: object = None

    def __post_init__(self):
        object.__setattr__(self, "dirichlet_coeff", complex(self.dirichlet_coeff))
        object.__setattr__(self, "neumann_coeff", complex(self.neumann_coeff))
        if self.dirichlet_coeff == 0 and self.neumann_coeff == 0:
            raise ValueError("LocalField2D needs a nonzero coefficient")

    def conjugate(self):
        return LocalField2D(np.conj(self.dirichlet_coeff), np.conj(self.neumann_coeff), self.support)


@dataclass(frozen=True, eq=False)
class NonlocalKernel:
    """Integral kernel b(x, x1) sampled on the nodes: rows over the support, columns over all nodes."""

    kernel: np.ndarray
    support: object = None

    def __post_init__(self):
        k = np.array(self.kernel, dtype=complex)
        if k.ndim != 2:
            raise ShapeMismatch("kernel must be a matrix")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    def conjugate(self):
        return NonlocalKernel(np.conj(self.kernel), self.support)


def _support_indices(support, bd):
    n = bd.n
    if support is None:
        return np.arange(n)
    if isinstance(support, tuple) and len(support) == 2 and all(isinstance(v, float) for v in support):
        return bd.arc_indices(*support)
    idx = np.asarray(support, dtype=int).reshape(-1)
    if idx.size == 0 or idx.min() < 0 or idx.max() >= n:
        raise ShapeMismatch("support indices out of range")
    return idx


@dataclass(frozen=True)
class DiscreteCondition:
    """Matrix of one condition over the 2N trace channels, with row weights."""

    matrix: np.ndarray
    row_weights: np.ndarray
    support: np.ndarray
    local: bool


def discretize_condition(cond, bd):
    n = bd.n
    w = bd.weights
    if isinstance(cond, Local1D):
        if bd.dim != 1:
            raise ShapeMismatch("Local1D rows need an interval boundary")
        row = np.array([[cond.a0, cond.b0, cond.a1, cond.b1]])
        return DiscreteCondition(row, np.ones(1), np.arange(n), True)
    if isinstance(cond, LocalField2D):
        if bd.dim != 2:
            raise ShapeMismatch("LocalField2D needs a closed-curve boundary")
        idx = _support_indices(cond.support, bd)
        mat = np.zeros((len(idx), 2 * n), dtype=complex)
        mat[np.arange(len(idx)), idx] = cond.dirichlet_coeff
        mat[np.arange(len(idx)), n + idx] = cond.neumann_coeff
        return DiscreteCondition(mat, w[idx].copy(), idx, True)
    if isinstance(cond, NonlocalKernel):
        K = cond.kernel
        if bd.dim == 1:
            if K.shape[1] != n:
                raise ShapeMismatch("1D kernels need one column per endpoint")
            mat = np.zeros((K.shape[0], 2 * n), dtype=complex)
            mat[:, :n] = K * w[None, :]
            return DiscreteCondition(mat, np.ones(K.shape[0]), np.arange(n), False)
        idx = _support_indices(cond.support, bd)
        if K.shape == (len(idx), len(idx)):
            full = np.zeros((len(idx), n), dtype=complex)
            full[:, idx] = K
            K = full
        if K.shape != (len(idx), n):
            raise ShapeMismatch(f"kernel shape {cond.kernel.shape} does not match support "
                                f"({len(idx)} nodes) x boundary ({n} nodes)")
        outside = np.setdiff1d(np.arange(n), idx)
        if outside.size and np.any(K[:, outside] != 0):
            raise ShapeMismatch("kernel must vanish outside its support")
        mat = np.zeros((len(idx), 2 * n), dtype=complex)
        mat[:, :n] = K * w[None, :]
        rw = np.ones(len(idx)) if bd.dim == 1 else w[idx].copy()
        return DiscreteCondition(mat, rw, idx, False)
    raise TypeError(f"unknown boundary condition {cond!r}")


def default_adjoint(conditions, operator):
    """b^a_j := b_j for self-adjoint operators with real coefficients."""
    if not operator.self_adjoint:
        raise ValueError("operator is not self-adjoint; give the adjoint conditions explicitly")
    for c in conditions:
        if isinstance(c, Local1D):
            real = np.all(np.imag(c.coefficients) == 0)
        elif isinstance(c, LocalField2D):
            real = c.dirichlet_coeff.imag == 0 and c.neumann_coeff.imag == 0
        else:
            real = np.all(np.imag(c.kernel) == 0)
        if not real:
            raise ValueError("complex boundary coefficients: give the adjoint conditions explicitly")
    return list(conditions)


@dataclass(frozen=True)
class BoundaryConditionSet:
    conditions: tuple
    adjoint_conditions: tuple = None

    def __post_init__(self):
        conds = tuple(self.conditions)
        adj = conds if self.adjoint_conditions is None else tuple(self.adjoint_conditions)
        if len(conds) == 0:
            raise ValueError("need at least one boundary condition")
        if len(adj) != len(conds):
            raise ShapeMismatch(f"{len(conds)} conditions but {len(adj)} adjoint conditions")
        object.__setattr__(self, "conditions", conds)
        object.__setattr__(self, "adjoint_conditions", adj)

    @classmethod
    def with_default_adjoint(cls, conditions, operator):
        return cls(tuple(conditions), tuple(default_adjoint(conditions, operator)))

    @property
    def m(self):
        return len(self.conditions)

    def swapped(self):
        """The condition set of the adjoint problem (B^a, with B as its adjoint set)."""
        return BoundaryConditionSet(self.adjoint_conditions, self.conditions)

    def permuted(self, order):
        order = list(order)
        return BoundaryConditionSet(tuple(self.conditions[i] for i in order),
                                    tuple(self.adjoint_conditions[i] for i in order))

    def discretize(self, bd):
        return DiscreteConditionSet.build(self, bd)


@dataclass(frozen=True, eq=False)
class DiscreteConditionSet:
    """Stacked condition matrices B (direct) and Ba (adjoint), condition-major."""

    bd: object
    direct: tuple
    adjoint: tuple
    sizes: tuple
    row_weights: np.ndarray
    B: np.ndarray
    Ba: np.ndarray
    trace_weights: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, bcs, bd):
        direct = tuple(discretize_condition(c, bd) for c in bcs.conditions)
        adjoint = tuple(discretize_condition(c, bd) for c in bcs.adjoint_conditions)
        for j, (d, a) in enumerate(zip(direct, adjoint)):
            if d.matrix.shape != a.matrix.shape or not np.allclose(d.row_weights, a.row_weights):
                raise ShapeMismatch(f"condition {j + 1} and its adjoint act on different supports")
        covered = np.unique(np.concatenate([d.support for d in direct]))
        if covered.size != bd.n:
            raise ShapeMismatch("condition supports do not cover the boundary")
        return cls(
            bd, direct, adjoint,
            tuple(d.matrix.shape[0] for d in direct),
            np.concatenate([d.row_weights for d in direct]),
            np.vstack([d.matrix for d in direct]),
            np.vstack([a.matrix for a in adjoint]),
            np.concatenate([bd.weights, bd.weights]),
        )

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def block(self, j):
        o = self.offsets
        return slice(o[j], o[j + 1])

    def dagger(self, which="adjoint"):
        """Weighted adjoint W_t^{-1} M^H W_s of B or Ba (spinor -> trace-shaped density)."""
        M = self.Ba if which == "adjoint" else self.B
        return (M.conj().T * self.row_weights[None, :]) / self.trace_weights[:, None]


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    bd: object
    values: np.ndarray
    derivatives: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.shape[0] != self.bd.n:
            raise ShapeMismatch(f"boundary function has {v.shape[0]} values for {self.bd.n} nodes")
        object.__setattr__(self, "values", v)
        if self.derivatives is not None:
            d = np.asarray(self.derivatives, dtype=complex).reshape(-1)
            if d.shape != v.shape:
                raise ShapeMismatch("derivative channel length differs from values")
            object.__setattr__(self, "derivatives", d)

    def channels(self):
        d = np.zeros_like(self.values) if self.derivatives is None else self.derivatives
        return np.concatenate([self.values, d])

    @classmethod
    def from_channels(cls, bd, vec):
        vec = np.asarray(vec, dtype=complex)
        return cls(bd, vec[: bd.n], vec[bd.n:])


@dataclass(frozen=True, eq=False)
class SpinorBoundaryFunction:
    bd: object
    components: tuple

    def __post_init__(self):
        comps = tuple(np.atleast_1d(np.asarray(c, dtype=complex)) for c in self.components)
        object.__setattr__(self, "components", comps)

    @property
    def m(self):
        return len(self.components)

    def flat(self):
        return np.concatenate(self.components)

    @classmethod
    def from_flat(cls, bd, vec, sizes):
        off = np.concatenate([[0], np.cumsum(sizes)])
        return cls(bd, tuple(vec[off[j]:off[j + 1]] for j in range(len(sizes))))

    def inner(self, other, row_weights):
        return np.sum(row_weights * np.conj(self.flat()) * other.flat())


def apply_B(bcs, f, which="direct"):
    """Spinor of condition values B f (or Ba f) for a boundary function f."""
    if which not in ("direct", "adjoint"):
        raise ValueError("which must be 'direct' or 'adjoint'")
    dc = bcs.discretize(f.bd)
    M = dc.B if which == "direct" else dc.Ba
    return SpinorBoundaryFunction.from_flat(f.bd, M @ f.channels(), dc.sizes)


def apply_B_adjoint_dagger(bcs, phi, which="adjoint"):
    """(B^a)^dagger phi: spinor -> boundary density with value and derivative channels."""
    dc = bcs.discretize(phi.bd)
    if phi.m != bcs.m or tuple(len(c) for c in phi.components) != dc.sizes:
        raise ShapeMismatch(f"spinor components {tuple(len(c) for c in phi.components)} "
                            f"do not match condition sizes {dc.sizes}")
    return BoundaryFunction.from_channels(phi.bd, dc.dagger(which) @ phi.flat())


def trace_matrix(fs, bd, xp):
    """Columns [E(xbar_i, x'); dE(xbar_i, x')] for each source x', shape (2N, K)."""
    xp = as_points(xp, bd.dim)
    dist = bd.domain.distance_to_boundary(xp)
    if np.any(dist < BOUNDARY_TOL):
        raise PointOnBoundary("source point lies on the boundary")
    if bd.dim == 1:
        xb = bd.nodes[:, 0]
        vals = fs.kernel(xb, xp[:, 0])
        ders = fs.kernel(xb, xp[:, 0], d1=1)
    else:
        vals = fs.kernel(bd.nodes, xp)
        ders = fs.normal_first(bd.nodes, xp, bd.normals)
    return np.vstack([vals, ders])


def trace_E(fs, bd, xp):
    """Restriction of E(., x') to the boundary, with its derivative channel."""
    col = trace_matrix(fs, bd, xp)
    if col.shape[1] != 1:
        raise ShapeMismatch("trace_E takes a single source point")
    return BoundaryFunction.from_channels(bd, col[:, 0])


def constant_kernel(bd, c, support=None):
    idx = _support_indices(support, bd)
    K = np.zeros((len(idx), bd.n), dtype=complex)
    K[:, idx] = c
    return NonlocalKernel(K, support)


def cosine_kernel(bd, c, mode, support=None):
    """Separable kernel c cos(mode t) cos(mode t1) in curve parameter."""
    idx = _support_indices(support, bd)
    t = bd.params
    K = np.zeros((len(idx), bd.n), dtype=complex)
    K[:, idx] = c * np.outer(np.cos(mode * t[idx]), np.cos(mode * t[idx]))
    return NonlocalKernel(K, support)
