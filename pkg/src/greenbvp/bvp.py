"""Inhomogeneous problems L u = f, B u = Phi through the Green function.

    u(x) = int_Omega G(x, x1) f(x1) dV + e(x) . J_Phi,

with J_Phi the density whose potential carries the boundary data.  Writing
G = E - e(x) J(x1), the volume term splits into a free-space part with the
kink (1D) or log singularity (2D) at x1 = x, and a smooth correction
e(x) . sum_i w_i f_i J(x_i) whose density moment is computed once.
"""

from dataclasses import dataclass, field

import numpy as np

from .assembly import eval_G
from .errors import ShapeMismatch
from .geometry import as_points


class SourceField:
    """Right-hand side f, callable on (K, dim) point arrays."""

    def __call__(self, x):
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, c):
        return Scaled(self, complex(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Zero(SourceField):
    def __call__(self, x):
        return np.zeros(len(np.atleast_2d(x)) if np.ndim(x) > 1 else np.size(x), dtype=complex)


@dataclass(frozen=True)
class Constant(SourceField):
    c: complex = 1.0

    def __call__(self, x):
        n = len(x) if np.ndim(x) > 1 else np.size(x)
        return np.full(n, complex(self.c))


@dataclass(frozen=True)
class Sine(SourceField):
    """amplitude * sin(k . x + phase); ``wavenumber`` is a scalar in 1D, a pair in 2D."""

    amplitude: complex = 1.0
    wavenumber: object = 1.0
    phase: float = 0.0

    def __call__(self, x):
        k = np.atleast_1d(np.asarray(self.wavenumber, dtype=float))
        pts = as_points(x, len(k))
        return complex(self.amplitude) * np.sin(pts @ k + self.phase)


@dataclass(frozen=True)
class Polynomial(SourceField):
    """sum_i c_i x^i in 1D; sum_ij c_ij x^i y^j in 2D (2D coefficient array)."""

    coeffs: tuple = (0.0,)

    def __call__(self, x):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            return np.polynomial.polynomial.polyval(as_points(x, 1)[:, 0], c)
        pts = as_points(x, 2)
        return np.polynomial.polynomial.polyval2d(pts[:, 0], pts[:, 1], c)


@dataclass(frozen=True)
class Gaussian(SourceField):
    center: object = 0.0
    width: float = 1.0
    amplitude: complex = 1.0

    def __call__(self, x):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        pts = as_points(x, len(c))
        r2 = np.sum((pts - c) ** 2, axis=1)
        return complex(self.amplitude) * np.exp(-0.5 * r2 / self.width**2)


@dataclass(frozen=True)
class Callable(SourceField):
    fn: object = None
    dim: int = 1

    def __call__(self, x):
        pts = as_points(x, self.dim)
        arg = pts[:, 0] if self.dim == 1 else pts
        return np.asarray(self.fn(arg), dtype=complex) * np.ones(len(pts))


@dataclass(frozen=True)
class Sum(SourceField):
    terms: tuple = ()

    def __call__(self, x):
        return sum(t(x) for t in self.terms)


@dataclass(frozen=True)
class Scaled(SourceField):
    inner: SourceField = None
    c: complex = 1.0

    def __call__(self, x):
        return self.c * self.inner(x)


def as_source(f, dim=1):
    if f is None:
        return Zero()
    if isinstance(f, SourceField):
        return f
    if callable(f):
        return Callable(f, dim)
    return Constant(complex(f))


@dataclass(frozen=True)
class BoundaryData:
    """Phi: one entry per condition, a constant or a vector over that condition's rows."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def zeros(cls, m):
        return cls((0.0,) * m)

    @property
    def m(self):
        return len(self.components)

    def flat(self, sizes):
        if len(sizes) != self.m:
            raise ShapeMismatch(f"boundary data has {self.m} components, there are {len(sizes)} conditions")
        out = []
        for j, (c, n) in enumerate(zip(self.components, sizes)):
            v = np.asarray(c, dtype=complex).reshape(-1)
            if v.size == 1:
                v = np.full(n, v[0])
            elif v.size != n:
                raise ShapeMismatch(f"component {j + 1} has {v.size} values, condition has {n} rows")
            out.append(v)
        return np.concatenate(out)

    def __add__(self, other):
        if self.m != other.m:
            raise ShapeMismatch("boundary data with different component counts")
        return BoundaryData(tuple(np.asarray(a, dtype=complex) + np.asarray(b, dtype=complex)
                                  for a, b in zip(self.components, other.components)))


@dataclass(eq=False)
class FieldSolution:
    """u(x) as an evaluator, with cached sample values and metadata."""

    gop: object
    vq: object
    f: SourceField
    phi: BoundaryData
    density: np.ndarray
    fvals: np.ndarray
    moment: np.ndarray = None
    metadata: dict = field(default_factory=dict)
    samples: tuple = None

    @property
    def dim(self):
        return self.gop.dim

    def _free_volume(self, X):
        """sum_i w_i E(x, x_i) f(x_i) with the rule adapted to each target."""
        layers = self.gop.layers
        out = np.empty(len(X), dtype=complex)
        for k, x in enumerate(X):
            if self.dim == 1:
                q = self.vq.split(x[0])
                fv = self.f(q.nodes)
                out[k] = np.sum(q.weights * layers.E(x, q.nodes)[0] * fv)
            else:
                keep = np.any(self.vq.nodes != x, axis=1)
                out[k] = np.sum(self.vq.weights[keep] * layers.E(x, self.vq.nodes[keep])[0]
                                * self.fvals[keep])
        return out

    def _direct_volume(self, X):
        """sum_i w_i G(x, x_i) f(x_i), evaluating G at the (split) nodes."""
        out = np.empty(len(X), dtype=complex)
        for k, x in enumerate(X):
            if self.dim == 1:
                q = self.vq.split(x[0])
                out[k] = np.sum(q.weights * eval_G(self.gop, np.full(len(q.nodes), x[0]), q.nodes[:, 0])
                                * self.f(q.nodes))
            else:
                keep = np.any(self.vq.nodes != x, axis=1)
                G = self.gop.matrix(x[None, :], self.vq.nodes[keep])[0]
                out[k] = np.sum(self.vq.weights[keep] * G * self.fvals[keep])
        return out

    def __call__(self, x):
        scalar = np.ndim(x) <= self.dim - 1
        X = as_points(x, self.dim)
        rows = self.gop.layers.right_rows(X)
        u = rows @ self.density
        if np.any(self.fvals != 0):
            if self.moment is not None:
                u = u + self._free_volume(X) - rows @ self.moment
            else:
                u = u + self._direct_volume(X)
        return u[0] if scalar else u

    def boundary_traces(self):
        """Trace channels of u on the boundary nodes."""
        layers = self.gop.layers
        tr = layers.T @ self.density
        if np.any(self.fvals != 0):
            nodes = self.vq.nodes
            w = self.vq.weights * self.fvals
            tr = tr + layers.traces(nodes) @ w - layers.T @ (self.gop.densities(nodes) @ w)
        return tr


def solve_bvp(gop, vq, f=None, phi=None, cache_g=True, sample_grid=None):
    """Solve L u = f, B u = Phi with the Green operator ``gop`` (direct or recursive).

    ``cache_g`` precomputes the density moment sum_i w_i f_i J(x_i) once; with
    ``cache_g=False`` G itself is evaluated at the volume nodes for every target.
    """
    dim = gop.dim
    f = as_source(f, dim)
    m = gop.bcs.m
    phi = BoundaryData.zeros(m) if phi is None else phi
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(tuple(phi))
    phi_flat = phi.flat(gop.dc.sizes)
    density = gop.data_density(phi_flat)
    fvals = f(vq.nodes)
    moment = None
    if cache_g and np.any(fvals != 0):
        moment = gop.densities(vq.nodes) @ (vq.weights * fvals)
    meta = {
        "method": type(gop).__name__,
        "boundary_nodes": int(gop.bd.n),
        "volume_nodes": int(len(vq.nodes)),
        "condition_estimate": float(gop.condition_estimate),
    }
    sol = FieldSolution(gop, vq, f, phi, density, fvals, moment, meta)
    if sample_grid is not None:
        pts = as_points(sample_grid, dim)
        sol.samples = (pts, sol(pts))
    return sol


def residual_report(sol, gop=None, f=None, phi=None, h=1e-3, grid=None):
    """Interior finite-difference residual of L u - f and boundary residual |B u - Phi|."""
    gop = gop or sol.gop
    f = as_source(f, gop.dim) if f is not None else sol.f
    phi = phi if phi is not None else sol.phi
    if grid is None:
        grid = sol.samples[0] if sol.samples is not None else _default_grid(gop.bd.domain, h)
    pts = as_points(grid, gop.dim)
    margin = gop.bd.domain.distance_to_boundary(pts)
    pts = pts[margin > 2 * h]
    if len(pts):
        fs = gop.layers.fs
        if gop.dim == 1:
            Lu = fs.apply_operator(lambda s: sol(s), pts[:, 0], h)
        else:
            Lu = fs.apply_operator(lambda s: sol(s), pts, h)
        pde = float(np.max(np.abs(Lu - f(pts))))
    else:
        pde = 0.0
    bres = gop.B @ sol.boundary_traces() - phi.flat(gop.dc.sizes)
    per = [float(np.max(np.abs(bres[gop.dc.block(j)]))) for j in range(gop.bcs.m)]
    return {"pde_residual": pde, "boundary_residual": max(per), "boundary_residual_per_condition": per}


def _default_grid(domain, h):
    if domain.dim == 1:
        return np.linspace(domain.a, domain.b, 11)[1:-1]
    return domain.probe_points()
