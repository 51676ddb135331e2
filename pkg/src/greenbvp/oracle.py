"""Independent references: closed-form Green functions, a finite-difference
BVP solver, and a jump-condition checker.

Nothing here uses the boundary-response machinery, so these can judge it.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .boundary import Local1D
from .errors import EigenvalueParameters, SingularSystem
from .geometry import as_points

_EIG_TOL = 1e-10


@dataclass(frozen=True)
class DirichletHelmholtz1D:
    k: complex = 1.0
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if abs(np.sin(self.k * (self.b - self.a))) < _EIG_TOL:
            raise EigenvalueParameters(f"k^2 = {self.k**2} is a Dirichlet eigenvalue of ({self.a}, {self.b})")

    def __call__(self, x, xp):
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        lo = np.minimum(x, xp)
        hi = np.maximum(x, xp)
        k = self.k
        return -np.sin(k * (lo - self.a)) * np.sin(k * (self.b - hi)) / (k * np.sin(k * (self.b - self.a))) + 0j


@dataclass(frozen=True)
class PeriodicHelmholtz1D:
    k: complex = 1.0
    L: float = 1.0

    def __post_init__(self):
        if abs(np.sin(0.5 * self.k * self.L)) < _EIG_TOL:
            raise EigenvalueParameters(f"k L = {self.k * self.L} is a multiple of 2 pi")

    def __call__(self, x, xp):
        s = np.abs(np.asarray(x, dtype=float) - np.asarray(xp, dtype=float))
        k = self.k
        return np.cos(k * (s - 0.5 * self.L)) / (2.0 * k * np.sin(0.5 * k * self.L)) + 0j


@dataclass(frozen=True)
class DiskDirichletLaplace:
    """G for the Laplacian on the disk |x| < radius (centered at the origin), by images."""

    radius: float = 1.0

    def __call__(self, x, xp):
        X = as_points(x, 2)
        Y = as_points(xp, 2)
        R = self.radius
        d = np.hypot(*(X - Y).T)
        ry = np.hypot(*Y.T)
        with np.errstate(divide="ignore", invalid="ignore"):
            img = Y * (R**2 / np.where(ry > 0, ry, 1.0) ** 2)[:, None]
            far = np.where(ry > 0, ry * np.hypot(*(X - img).T) / R, R)
        out = (np.log(d) - np.log(far)) / (2.0 * np.pi) + 0j
        return out[0] if np.ndim(x) == 1 and np.ndim(xp) == 1 else out


def analytic_G(ref, x, xp):
    return ref(x, xp)


@dataclass(frozen=True)
class FdSolver1D:
    """u'' + c u = f on (a, b) with two Local1D rows; c is the operator's zeroth-order coefficient."""

    zeroth_order: complex
    a: float
    b: float
    rows: tuple
    n: int = 2000

    def __post_init__(self):
        if self.n < 100:
            raise ValueError("FdSolver1D needs N >= 100")
        if len(self.rows) != 2 or not all(isinstance(r, Local1D) for r in self.rows):
            raise ValueError("FdSolver1D takes exactly two Local1D rows")

    @classmethod
    def for_operator(cls, operator, interval, rows, n=2000):
        return cls(operator.zeroth_order, interval.a, interval.b, tuple(rows), n)

    @property
    def grid(self):
        return np.linspace(self.a, self.b, self.n + 1)


def fd_solve(solver, f, phi):
    """Second-order finite differences; rows use one-sided second-order derivatives.

    Returns (grid, u).  ``f`` is callable on arrays; ``phi`` holds the two row values.
    """
    n = solver.n
    x = solver.grid
    h = (solver.b - solver.a) / n
    A = sp.lil_matrix((n + 1, n + 1), dtype=complex)
    rhs = np.zeros(n + 1, dtype=complex)
    i = np.arange(1, n)
    A[i, i - 1] = 1.0 / h**2
    A[i, i] = -2.0 / h**2 + solver.zeroth_order
    A[i, i + 1] = 1.0 / h**2
    fx = np.asarray(f(x.reshape(-1, 1)), dtype=complex) * np.ones(n + 1)
    rhs[1:n] = fx[1:n]
    da = np.array([-3.0, 4.0, -1.0]) / (2 * h)
    db = np.array([1.0, -4.0, 3.0]) / (2 * h)
    vals = np.asarray([complex(p) for p in (phi.components if hasattr(phi, "components") else phi)])
    for r, (row, value) in zip((0, n), zip(solver.rows, vals)):
        coeff = np.zeros(n + 1, dtype=complex)
        coeff[0] += row.a0
        coeff[n] += row.b0
        coeff[:3] += row.a1 * da
        coeff[n - 2:] += row.b1 * db
        nz = np.flatnonzero(coeff)
        A[r, nz] = coeff[nz]
        rhs[r] = value
    A = A.tocsc()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystem(f"finite-difference system is singular: {exc}") from exc
    u = lu.solve(rhs)
    if not np.all(np.isfinite(u)):
        raise SingularSystem("finite-difference solve produced non-finite values")
    # residual guards against a numerically singular factorization
    if np.linalg.norm(A @ u - rhs) > 1e-6 * max(1.0, np.linalg.norm(rhs)):
        raise SingularSystem("finite-difference system is numerically singular")
    return x, u


def jump_check(G, xp, h=1e-5):
    """|dG/dx(xp+) - dG/dx(xp-) - 1| from one-sided second-order differences."""
    def g(x):
        return complex(np.asarray(G(x, xp)).reshape(-1)[0])

    right = (-3.0 * g(xp) + 4.0 * g(xp + h) - g(xp + 2 * h)) / (2 * h)
    left = (3.0 * g(xp) - 4.0 * g(xp - h) + g(xp - 2 * h)) / (2 * h)
    return abs(right - left - 1.0)
