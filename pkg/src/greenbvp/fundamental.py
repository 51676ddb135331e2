"""Free-space fundamental solutions and their derivatives.

Operators and the fundamental solutions used for them:

* ``Helmholtz1D``  L = d^2/dx^2 + k^2,  E = exp(ik|s|)/(2ik)  (outgoing branch)
* ``ModifiedHelmholtz1D``  L = d^2/dx^2 - kappa^2,  E = -exp(-kappa|s|)/(2 kappa)
* ``Laplace2D``  L = Laplacian,  E = ln|s| / (2 pi)

with s = x - x'.  Alternative members of the fundamental-solution class are
available through ``branch``; they differ from the default by a homogeneous
solution and lead to the same Green function.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularEvaluation, Unsupported
from .geometry import as_points

INV_TWO_PI = 1.0 / (2.0 * np.pi)


@dataclass(frozen=True)
class Helmholtz1D:
    k: complex = 1.0
    branch: str = "outgoing"

    dim = 1

    def __post_init__(self):
        object.__setattr__(self, "k", complex(self.k))
        if self.k == 0:
            raise ValueError("Helmholtz1D needs k != 0")
        if self.branch not in ("outgoing", "incoming", "standing"):
            raise ValueError(f"unknown Helmholtz1D branch {self.branch!r}")

    @property
    def self_adjoint(self):
        return (self.k**2).imag == 0.0

    @property
    def zeroth_order(self):
        return self.k**2

    def fundamental(self):
        k = self.k
        if self.branch == "outgoing":
            prof = (lambda r: np.exp(1j * k * r) / (2j * k),
                    lambda r: 0.5 * np.exp(1j * k * r),
                    lambda r: 0.5j * k * np.exp(1j * k * r))
        elif self.branch == "incoming":
            prof = (lambda r: np.exp(-1j * k * r) / (-2j * k),
                    lambda r: 0.5 * np.exp(-1j * k * r),
                    lambda r: -0.5j * k * np.exp(-1j * k * r))
        else:
            prof = (lambda r: np.sin(k * r) / (2 * k),
                    lambda r: 0.5 * np.cos(k * r) + 0j,
                    lambda r: -0.5 * k * np.sin(k * r))
        return RadialFundamental1D(self, *prof)


@dataclass(frozen=True)
class ModifiedHelmholtz1D:
    kappa: float = 1.0
    branch: str = "decaying"

    dim = 1

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        if not self.kappa > 0:
            raise ValueError("ModifiedHelmholtz1D needs kappa > 0")
        if self.branch not in ("decaying", "sinh"):
            raise ValueError(f"unknown ModifiedHelmholtz1D branch {self.branch!r}")

    self_adjoint = True

    @property
    def zeroth_order(self):
        return -self.kappa**2 + 0j

    def fundamental(self):
        q = self.kappa
        if self.branch == "decaying":
            prof = (lambda r: -np.exp(-q * r) / (2 * q) + 0j,
                    lambda r: 0.5 * np.exp(-q * r) + 0j,
                    lambda r: -0.5 * q * np.exp(-q * r) + 0j)
        else:
            prof = (lambda r: np.sinh(q * r) / (2 * q) + 0j,
                    lambda r: 0.5 * np.cosh(q * r) + 0j,
                    lambda r: 0.5 * q * np.sinh(q * r) + 0j)
        return RadialFundamental1D(self, *prof)


@dataclass(frozen=True)
class Laplace2D:
    dim = 2
    self_adjoint = True

    def fundamental(self):
        return LaplaceFundamental2D(self)


@dataclass(frozen=True)
class Helmholtz2D:
    """Part of the operator grammar; needs Hankel kernels, which are not provided."""

    k: complex = 1.0

    dim = 2

    def __post_init__(self):
        raise Unsupported("2D Helmholtz fundamental solutions are not implemented")


class RadialFundamental1D:
    """E(x, x') = phi(|x - x'|) given the profile phi and its first two derivatives.

    Derivatives at coincident arguments are one-sided; ``zero_sign`` gives
    sign(x - x') to use there (+1 when x sits just right of x').
    """

    def __init__(self, operator, phi, dphi, ddphi, adjoint_of=None):
        self.operator = operator
        self.phi, self.dphi, self.ddphi = phi, dphi, ddphi
        self._adjoint_of = adjoint_of

    dim = 1

    @property
    def is_adjoint(self):
        return self._adjoint_of is not None

    def adjoint(self):
        """Fundamental solution of the adjoint operator, E^a(x, x') = conj(E(x', x))."""
        if self._adjoint_of is not None:
            return self._adjoint_of
        return RadialFundamental1D(
            self.operator,
            lambda r: np.conj(self.phi(r)),
            lambda r: np.conj(self.dphi(r)),
            lambda r: np.conj(self.ddphi(r)),
            adjoint_of=self,
        )

    @property
    def zeroth_order(self):
        c = self.operator.zeroth_order
        return np.conj(c) if self.is_adjoint else c

    def kernel(self, x, y, d1=0, d2=0, zero_sign=None):
        """Matrix of d1/d2-fold derivatives of E between targets x and sources y."""
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        s = x[:, None] - y[None, :]
        r = np.abs(s)
        if d1 == 0 and d2 == 0:
            return self.phi(r)
        if d1 and d2:
            return -self.ddphi(r)
        sg = np.sign(s)
        coincide = s == 0
        if np.any(coincide):
            zs = np.broadcast_to(np.nan if zero_sign is None else zero_sign, x.shape)
            sg = np.where(coincide, zs[:, None], sg)
            if np.any(np.isnan(sg)):
                raise SingularEvaluation("first derivative of E is undefined at x = x'")
        return self.dphi(r) * sg if d1 else -self.dphi(r) * sg

    def apply_operator(self, u, x, h=1e-3):
        """Central-difference approximation of L u at points x."""
        x = np.asarray(x, dtype=float)
        return (u(x + h) - 2.0 * u(x) + u(x - h)) / h**2 + self.zeroth_order * u(x)


class LaplaceFundamental2D:
    dim = 2

    def __init__(self, operator):
        self.operator = operator

    is_adjoint = False

    def adjoint(self):
        return self

    def kernel(self, x, y):
        x = as_points(x, 2)
        y = as_points(y, 2)
        r = np.hypot(x[:, None, 0] - y[None, :, 0], x[:, None, 1] - y[None, :, 1])
        if np.any(r == 0):
            raise SingularEvaluation("ln|x - x'| is singular at x = x'")
        return INV_TWO_PI * np.log(r) + 0j

    def grad_first(self, x, y):
        """Gradient in the first argument, shape (len(x), len(y), 2)."""
        x = as_points(x, 2)
        y = as_points(y, 2)
        d = x[:, None, :] - y[None, :, :]
        r2 = np.sum(d * d, axis=-1)
        if np.any(r2 == 0):
            raise SingularEvaluation("grad ln|x - x'| is singular at x = x'")
        return INV_TWO_PI * d / r2[..., None]

    def normal_first(self, x, y, nx):
        """d/dn_x E(x, y) with unit normals nx attached to the targets."""
        g = self.grad_first(x, y)
        return np.einsum("ijk,ik->ij", g, np.asarray(nx, dtype=float)) + 0j

    def normal_second(self, x, y, ny):
        """d/dn_y E(x, y) with unit normals ny attached to the sources."""
        g = self.grad_first(x, y)
        return -np.einsum("ijk,jk->ij", g, np.asarray(ny, dtype=float)) + 0j

    def apply_operator(self, u, x, h=1e-3):
        x = as_points(x, 2)
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        return (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - 4.0 * u(x)) / h**2


def _pairs(fs, x, xp):
    X = as_points(x, fs.dim)
    Y = as_points(xp, fs.dim)
    if len(X) != len(Y):
        if len(X) == 1:
            X = np.repeat(X, len(Y), axis=0)
        elif len(Y) == 1:
            Y = np.repeat(Y, len(X), axis=0)
        else:
            raise ValueError("x and xp must pair up elementwise")
    scalar = np.ndim(x) <= (0 if fs.dim == 1 else 1) and np.ndim(xp) <= (0 if fs.dim == 1 else 1)
    return X, Y, scalar


def _out(vals, scalar):
    return vals[0] if scalar else vals


def eval_E(fs, x, xp):
    """E(x, x'); elementwise over paired points."""
    X, Y, scalar = _pairs(fs, x, xp)
    if fs.dim == 1:
        vals = fs.phi(np.abs(X[:, 0] - Y[:, 0]))
    else:
        r = np.hypot(*(X - Y).T)
        if np.any(r == 0):
            raise SingularEvaluation("ln|x - x'| is singular at x = x'")
        vals = INV_TWO_PI * np.log(r) + 0j
    return _out(np.asarray(vals, dtype=complex), scalar)


def eval_E_adjoint(fs, x, xp):
    """E^a(x, x') = conj(E(x', x))."""
    return np.conj(eval_E(fs, xp, x))


def eval_dE(fs, x, xp, arg="first"):
    """Derivative of E in its first or second argument (gradient in 2D)."""
    if arg not in ("first", "second"):
        raise ValueError("arg must be 'first' or 'second'")
    X, Y, scalar = _pairs(fs, x, xp)
    if fs.dim == 1:
        s = X[:, 0] - Y[:, 0]
        if np.any(s == 0):
            raise SingularEvaluation("dE is undefined at x = x'")
        vals = fs.dphi(np.abs(s)) * np.sign(s)
        if arg == "second":
            vals = -vals
        return _out(np.asarray(vals, dtype=complex), scalar)
    d = X - Y
    r2 = np.sum(d * d, axis=1)
    if np.any(r2 == 0):
        raise SingularEvaluation("dE is undefined at x = x'")
    g = INV_TWO_PI * d / r2[:, None]
    if arg == "second":
        g = -g
    return g[0] if scalar else g
