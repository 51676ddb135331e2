"""Boundary-response matrix and the Green function built from it.

Discrete objects (N boundary nodes, P = 2N trace channels, M spinor rows):

* ``T``  (P x P): traces (value, derivative) of boundary potentials; the
  potential of a density J is  sum_l w_l [E(x, xl) J_v,l + d2E(x, xl) J_d,l].
* ``B``, ``Ba`` (M x P): stacked direct / adjoint condition matrices.
* g = B T Ba^dagger, the boundary-response matrix (weights folded into columns).

The Green function is  G(x, x') = E(x, x') - e(x) . Ba^dagger g^{-1} B t(x')
where e(x) is the potential row and t(x') the boundary trace of E(., x').

When g is rank deficient but every right-hand side it meets lies in its
range, the least-squares solution still yields the (unique) Green function;
this happens for the unit circle (zero logarithmic capacity mode) and when E
itself already satisfies the conditions.  Only an inconsistent system is
reported as ill-posed.
"""

import numpy as np
import scipy.linalg as sla

from .boundary import BoundaryConditionSet, BoundaryFunction, Local1D, LocalField2D, trace_matrix
from .errors import IllPosed, ShapeMismatch, SingularMatrix
from .geometry import as_points, periodic_derivative_matrix, periodic_log_weights

ILL_POSED_THRESHOLD = 1e12
RANK_TOL = 1e-12
CONSISTENCY_TOL = 1e-8
# probe sources sit well inside the domain; this bounds their quadrature error
PROBE_TOL = 1e-6


class LayerOperators:
    """Potentials of E against boundary densities, for one (fs, bd) pair."""

    def __init__(self, fs, bd):
        if fs.dim != bd.dim:
            raise ShapeMismatch("operator and domain dimensions differ")
        self.fs = fs
        self.bd = bd
        self._T = None

    @property
    def dim(self):
        return self.bd.dim

    def E(self, x, xp):
        if self.dim == 1:
            return self.fs.kernel(as_points(x, 1)[:, 0], as_points(xp, 1)[:, 0])
        return self.fs.kernel(x, xp)

    def dE(self, x, xp, side=None):
        """First-argument derivative matrix (1D only)."""
        return self.fs.kernel(as_points(x, 1)[:, 0], as_points(xp, 1)[:, 0], d1=1, zero_sign=side)

    def right_rows(self, x):
        """Rows e(x) with e(x) . J = potential of density J at x, shape (K, 2N)."""
        bd = self.bd
        w = bd.weights
        if self.dim == 1:
            x = as_points(x, 1)[:, 0]
            xb = bd.nodes[:, 0]
            side = bd.domain.inward_sign(x)
            vals = self.fs.kernel(x, xb, zero_sign=side)
            ders = self.fs.kernel(x, xb, d2=1, zero_sign=side)
        else:
            x = as_points(x, 2)
            vals = self.fs.kernel(x, bd.nodes)
            ders = self.fs.normal_second(x, bd.nodes, bd.normals)
        return np.hstack([vals * w, ders * w])

    def right_rows_d1(self, x, side=None):
        """First-argument derivative of right_rows (1D only)."""
        if self.dim != 1:
            raise NotImplementedError("interior gradients are only provided in 1D")
        bd = self.bd
        w = bd.weights
        x = as_points(x, 1)[:, 0]
        xb = bd.nodes[:, 0]
        zs = bd.domain.inward_sign(x) if side is None else side
        vals = self.fs.kernel(x, xb, d1=1, zero_sign=zs)
        ders = self.fs.kernel(x, xb, d1=1, d2=1, zero_sign=zs)
        return np.hstack([vals * w, ders * w])

    def traces(self, xp):
        return trace_matrix(self.fs, self.bd, xp)

    @property
    def T(self):
        """Interior-limit traces of boundary potentials, shape (2N, 2N)."""
        if self._T is None:
            if self.dim == 1:
                nodes = self.bd.nodes
                T = np.vstack([self.right_rows(nodes), self.right_rows_d1(nodes)])
            else:
                T = _laplace_boundary_operator(self.bd)
            T.setflags(write=False)
            self._T = T
        return self._T


def _laplace_boundary_operator(bd):
    n = bd.n
    t = bd.params
    x = bd.nodes
    nrm = bd.normals
    w = bd.weights
    speed = bd.speed
    d = x[:, None, :] - x[None, :, :]
    r2 = np.sum(d * d, axis=-1)
    off = ~np.eye(n, dtype=bool)
    # log kernel: periodic log part by product weights, smooth remainder by trapezoid
    M = np.empty((n, n))
    M[off] = 0.5 * np.log(r2[off] / (4.0 * np.sin(0.5 * (t[:, None] - t[None, :])[off]) ** 2))
    M[~off] = np.log(speed)
    R = periodic_log_weights(n)
    S = (0.5 * R + (2.0 * np.pi / n) * M) * speed[None, :] / (2.0 * np.pi)
    safe = np.where(off, r2, 1.0)
    dl = np.where(off, -np.einsum("ijk,jk->ij", d, nrm) / safe, 0.0)
    adl = np.where(off, np.einsum("ijk,ik->ij", d, nrm) / safe, 0.0)
    dl[~off] = 0.5 * bd.curvature
    adl[~off] = 0.5 * bd.curvature
    D = dl * w[None, :] / (2.0 * np.pi)
    Dp = adl * w[None, :] / (2.0 * np.pi)
    Ds = periodic_derivative_matrix(n) / speed[:, None]
    H = Ds @ S @ Ds
    eye = np.eye(n)
    return np.block([[S, D + 0.5 * eye], [Dp - 0.5 * eye, H]]).astype(complex)


def condition_1norm(A):
    with np.errstate(all="ignore"):
        try:
            c = np.linalg.cond(A, 1)
        except np.linalg.LinAlgError:
            return float("inf")
    return float(np.real(c)) if np.isfinite(c) else float("inf")


def relative_condition(A, scale):
    """cond_1(A), inflated when A is small against the magnitude of the terms it sums.

    A 1x1 stage kernel has cond 1 even when it has cancelled to round-off; the
    factor scale / ||A||_1 catches that.
    """
    anorm = np.linalg.norm(A, 1)
    if anorm == 0:
        return float("inf")
    return max(1.0, condition_1norm(A) * max(1.0, scale / anorm))


class ConsistentSolver:
    """Solve A c = r by LU when A is well conditioned, else by truncated SVD.

    In the truncated branch every right-hand side must lie in the numerical
    range of A (residual below CONSISTENCY_TOL times its scale), otherwise
    ``error_factory(cond)`` is raised.
    """

    def __init__(self, A, scale, error_factory=None, force_svd=False):
        self.A = A
        self.scale = scale
        self.tol = CONSISTENCY_TOL
        square = A.shape[0] == A.shape[1]
        self.condition_estimate = relative_condition(A, scale) if square else float("nan")
        self.error_factory = error_factory or (lambda c: IllPosed(
            f"boundary-response matrix is singular on the data (condition estimate {c:.3e})", c))
        self.rank_deficient = force_svd or not square or self.condition_estimate > ILL_POSED_THRESHOLD
        if self.rank_deficient:
            U, s, Vh = np.linalg.svd(A, full_matrices=False)
            keep = s > RANK_TOL * scale
            self.rank = int(np.count_nonzero(keep))
            self._svd = (U[:, keep], s[keep], Vh[keep])
        else:
            self.rank = A.shape[0]
            self._lu = sla.lu_factor(A)

    @property
    def nullity(self):
        return min(self.A.shape) - self.rank

    def solve(self, rhs, rhs_scale=None):
        rhs = np.asarray(rhs, dtype=complex)
        if not self.rank_deficient:
            return sla.lu_solve(self._lu, rhs)
        U, s, Vh = self._svd
        coef = U.conj().T @ rhs
        c = Vh.conj().T @ (coef / (s[:, None] if rhs.ndim == 2 else s))
        resid = rhs - self.A @ c
        rn = np.linalg.norm(resid, axis=0)
        ref = np.linalg.norm(rhs, axis=0) if rhs_scale is None else np.asarray(rhs_scale)
        if np.any(rn > self.tol * ref):
            raise self.error_factory(self.condition_estimate)
        return c


class GMatrix:
    """Boundary-response matrix g with its factorization and diagnostics."""

    def __init__(self, matrix, sizes, row_weights, scale, error_factory=None):
        self.matrix = matrix
        self.sizes = tuple(sizes)
        self.row_weights = row_weights
        self.solver = ConsistentSolver(matrix, scale, error_factory)

    @property
    def condition_estimate(self):
        return self.solver.condition_estimate

    @property
    def rank_deficient(self):
        return self.solver.rank_deficient

    @property
    def m(self):
        return len(self.sizes)

    @property
    def blocks(self):
        off = np.concatenate([[0], np.cumsum(self.sizes)])
        return [[self.matrix[off[i]:off[i + 1], off[j]:off[j + 1]] for j in range(self.m)]
                for i in range(self.m)]

    def dagger(self):
        """Adjoint in the weighted spinor inner product, W^-1 g^H W."""
        w = self.row_weights
        return (self.matrix.conj().T * w[None, :]) / w[:, None]

    def solve(self, rhs, rhs_scale=None):
        return self.solver.solve(rhs, rhs_scale)


def _rhs_scale(dc, traces):
    return np.linalg.norm(np.abs(dc.B) @ np.abs(traces), axis=0)


def _fail_factory(what):
    def fail(c):
        cls = SingularMatrix if not np.isfinite(c) else IllPosed
        return cls(f"{what} is not invertible for this problem (condition estimate {c:.3e}); "
                   f"the boundary value problem is ill-posed", c)
    return fail


def _g_scale(B, T, Bad):
    return np.linalg.norm(np.abs(B) @ np.abs(T) @ np.abs(Bad), 2)


def _probe(gm, layers, B, rows=None):
    """Consistency of a rank-deficient g on sources well inside the domain."""
    tr = layers.traces(layers.bd.domain.probe_points())
    if rows is not None:
        tr = tr[rows]
    rhs = B @ tr
    gm.solver.tol = PROBE_TOL
    try:
        gm.solve(rhs, np.linalg.norm(np.abs(B) @ np.abs(tr), axis=0))
    finally:
        gm.solver.tol = CONSISTENCY_TOL


def _build_gmatrix(layers, dc, probe=True):
    T = layers.T
    Bad = dc.dagger("adjoint")
    g = dc.B @ T @ Bad
    gm = GMatrix(g, dc.sizes, dc.row_weights, _g_scale(dc.B, T, Bad),
                 _fail_factory("boundary-response matrix g"))
    if probe and gm.rank_deficient:
        _probe(gm, layers, dc.B)
    return gm


def assemble_g(fs, bcs, bd):
    """Assemble g = B T Ba^dagger; raises IllPosed/SingularMatrix when it cannot be used."""
    return _build_gmatrix(LayerOperators(fs, bd), bcs.discretize(bd))


def _compose_density(Bad, coefficients):
    return Bad @ coefficients


class GreenOperator:
    """G(x, x') = E(x, x') - e(x) . J(x'),  J(x') = Ba^dagger g^{-1} B t(x').

    If g is rank deficient but passed the consistency probe, densities are
    taken as the minimum-norm solution of B T J = B t(x') over the full
    trace space instead; for a well-posed problem the resulting G is the same.
    """

    def __init__(self, fs, bcs, bd):
        self.fs = fs
        self.bcs = bcs
        self.bd = bd
        self.layers = LayerOperators(fs, bd)
        self.dc = bcs.discretize(bd)
        self.B = self.dc.B
        self.Bad = self.dc.dagger("adjoint")
        self.gmat = _build_gmatrix(self.layers, self.dc)
        self._fallback = None

    @property
    def dim(self):
        return self.bd.dim

    @property
    def condition_estimate(self):
        return self.gmat.condition_estimate

    def _solve_density(self, rhs, rhs_scale):
        if not self.gmat.rank_deficient:
            return _compose_density(self.Bad, self.gmat.solve(rhs))
        if self._fallback is None:
            BT = self.B @ self.layers.T
            self._fallback = ConsistentSolver(BT, _g_scale(self.B, self.layers.T, np.eye(BT.shape[1])),
                                              _fail_factory("boundary trace operator B T"), force_svd=True)
        return self._fallback.solve(rhs, rhs_scale)

    def densities(self, xp):
        """Boundary densities J(x') as columns, shape (2N, K)."""
        tr = self.layers.traces(xp)
        return self._solve_density(self.B @ tr, _rhs_scale(self.dc, tr))

    def data_density(self, phi_flat):
        """Density J_Phi whose potential carries boundary data Phi (flattened spinor)."""
        phi_flat = np.asarray(phi_flat, dtype=complex)
        if phi_flat.shape[0] != self.B.shape[0]:
            raise ShapeMismatch(f"boundary data has {phi_flat.shape[0]} rows, conditions need "
                                f"{self.B.shape[0]}")
        return self._solve_density(phi_flat, np.linalg.norm(phi_flat, axis=0))

    def matrix(self, x, xp):
        """G(x_i, x'_j) for all pairs, shape (len(x), len(xp))."""
        J = self.densities(xp)
        return self.layers.E(x, xp) - self.layers.right_rows(x) @ J

    def d1_matrix(self, x, xp, side=None):
        """First-argument derivative of G (1D); ``side`` resolves x == x'."""
        J = self.densities(xp)
        return self.layers.dE(x, xp, side=side) - self.layers.right_rows_d1(x, side=side) @ J

    def __call__(self, x, xp):
        return eval_G(self, x, xp)

    def boundary_traces(self, xp):
        """Trace channels of G(., x'), shape (2N, K)."""
        return self.layers.traces(xp) - self.layers.T @ self.densities(xp)

    def bc_residual(self, xp):
        """max |B trace(G(., x'))| over rows and sources."""
        return float(np.max(np.abs(self.B @ self.boundary_traces(xp))))


class DirichletGreenOperator(GreenOperator):
    """Pure Dirichlet problem: g is the boundary restriction of E itself."""

    def __init__(self, fs, bd):
        if bd.dim == 1:
            conds = (Local1D(a0=1.0), Local1D(b0=1.0))
        else:
            conds = (LocalField2D(1.0, 0.0),)
        self.fs = fs
        self.bcs = BoundaryConditionSet(conds, conds)
        self.bd = bd
        self.layers = LayerOperators(fs, bd)
        self.dc = self.bcs.discretize(bd)
        n = bd.n
        self.B = np.hstack([np.eye(n), np.zeros((n, n))]).astype(complex)
        self.Bad = self.B.T.copy()
        g = np.array(self.layers.T[:n, :n])
        self.gmat = GMatrix(g, self.dc.sizes, self.dc.row_weights, np.linalg.norm(np.abs(g), 2),
                            _fail_factory("Dirichlet boundary operator"))
        self._fallback = None
        if self.gmat.rank_deficient:
            _probe(self.gmat, self.layers, self.B)


def dirichlet_green(fs, bd):
    return DirichletGreenOperator(fs, bd)


def _paired(gop, x, xp):
    dim = gop.dim
    X = as_points(x, dim)
    Y = as_points(xp, dim)
    if len(X) != len(Y):
        if len(X) == 1:
            X = np.repeat(X, len(Y), axis=0)
        elif len(Y) == 1:
            Y = np.repeat(Y, len(X), axis=0)
        else:
            raise ShapeMismatch("x and xp must pair up elementwise")
    single = np.ndim(x) <= dim - 1 and np.ndim(xp) <= dim - 1
    return X, Y, single


def eval_G(gop, x, xp):
    """G(x, x') elementwise over paired points (scalar for a single pair)."""
    X, Y, single = _paired(gop, x, xp)
    J = gop.densities(Y)
    if gop.dim == 1:
        e = gop.layers.fs.kernel(X[:, 0], Y[:, 0])
    else:
        e = gop.layers.E(X, Y)
    E = np.diagonal(e) if len(X) > 1 else e[0]
    vals = E - np.einsum("kp,pk->k", gop.layers.right_rows(X), J)
    return vals[0] if single else vals


def eval_dG(gop, x, xp, side=None):
    """First-argument derivative of G (1D).  ``side`` = +1/-1 picks x -> x'+/x'-."""
    X, Y, single = _paired(gop, x, xp)
    J = gop.densities(Y)
    zs = None if side is None else np.full(len(X), float(side))
    dE = np.diagonal(gop.layers.dE(X, Y, side=zs)) if len(X) > 1 else gop.layers.dE(X, Y, side=zs)[0]
    vals = dE - np.einsum("kp,pk->k", gop.layers.right_rows_d1(X, side=zs), J)
    return vals[0] if single else vals


def eval_G_adjoint(gop, x, xp):
    """G^a(x, x') = conj(G(x', x))."""
    return np.conj(eval_G(gop, xp, x))


def boundary_density(gop, xp):
    """J(x') = Ba^dagger g^{-1} B t(x') as a boundary function with derivative channel."""
    xp = as_points(xp, gop.dim)
    if len(xp) != 1:
        raise ShapeMismatch("boundary_density takes a single source point")
    return BoundaryFunction.from_channels(gop.bd, gop.densities(xp)[:, 0])


def adjoint_green(gop):
    """Independently assembled Green operator of the adjoint problem (E^a, conditions Ba, adjoint set B)."""
    return GreenOperator(gop.fs.adjoint(), gop.bcs.swapped(), gop.bd)


def assemble_h(fs, bcs, bd):
    """h = Ba T^a B^dagger, the adjoint problem's boundary-response matrix."""
    return assemble_g(fs.adjoint(), bcs.swapped(), bd)


def _source_limit_traces(gop, xbar_idx):
    """1D: trace channels of E(., x') and of d/dx' E(., x') as x' -> node from inside."""
    bd = gop.bd
    fs = gop.layers.fs
    xb = bd.nodes[:, 0]
    y = xb[xbar_idx]
    # x' approaches from the interior, so sign(xbar - x') at coincidence is minus the inward sign
    zs = -bd.domain.inward_sign(np.full(len(xb), y))
    zs = np.where(xb == y, zs, np.nan)
    t0 = np.concatenate([fs.kernel(xb, [y]), fs.kernel(xb, [y], d1=1, zero_sign=zs)])
    t1 = np.concatenate([fs.kernel(xb, [y], d2=1, zero_sign=zs), fs.kernel(xb, [y], d1=1, d2=1)])
    return t0.ravel(), t1.ravel()


def verify_right_action(gop, x, xbar_index=None):
    """Residual of the adjoint conditions applied to G(x, .) in its second argument.

    1D: G(x, x') and d/dx' G are taken as genuine limits x' -> endpoint from
    the interior and combined with the conjugated adjoint coefficients.
    2D: the discrete right action e_G(x) . Ba^dagger on node rows.
    """
    layers = gop.layers
    dc = gop.dc
    X = as_points(x, gop.dim)
    if gop.dim == 1:
        n = gop.bd.n
        vals = np.zeros((len(X), n), dtype=complex)
        ders = np.zeros((len(X), n), dtype=complex)
        xb = gop.bd.nodes[:, 0]
        for i in range(n):
            t0, t1 = _source_limit_traces(gop, i)
            J0 = gop._solve_density(gop.B @ t0[:, None], _rhs_scale(dc, t0[:, None]))
            J1 = gop._solve_density(gop.B @ t1[:, None], _rhs_scale(dc, t1[:, None]))
            rows = layers.right_rows(X)
            e0 = layers.fs.kernel(X[:, 0], [xb[i]])[:, 0]
            e1 = layers.fs.kernel(X[:, 0], [xb[i]], d2=1)[:, 0]
            vals[:, i] = e0 - rows @ J0[:, 0]
            ders[:, i] = e1 - rows @ J1[:, 0]
        chans = np.hstack([vals, ders])
        res = chans @ dc.Ba.conj().T
    else:
        rows = layers.right_rows(X)
        RG = rows - rows @ gop._solve_density(gop.B @ layers.T, _rhs_scale(dc, layers.T))
        res = RG @ gop.Bad
        if xbar_index is not None:
            keep = np.concatenate([d.support for d in dc.direct]) == xbar_index
            res = res[:, keep]
    return float(np.max(np.abs(res))) if res.size else 0.0
