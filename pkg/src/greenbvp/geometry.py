"""Domains, boundary discretizations and quadrature rules.

One-dimensional domains are intervals whose boundary is the two-point set
{a, b} carrying counting measure.  Two-dimensional domains are bounded by a
smooth closed curve from a small analytic catalog, discretized with
equispaced parameter nodes (periodic trapezoid rule).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDomain, ShapeMismatch

TWO_PI = 2.0 * np.pi


def as_points(x, dim):
    """Coerce ``x`` to a float array of shape (K, dim)."""
    pts = np.asarray(x, dtype=float)
    if dim == 1:
        pts = pts.reshape(-1, 1)
    else:
        if pts.ndim == 1:
            if pts.shape[0] != dim:
                raise ShapeMismatch(f"expected points of dimension {dim}, got shape {pts.shape}")
            pts = pts.reshape(1, dim)
        elif pts.ndim != 2 or pts.shape[1] != dim:
            raise ShapeMismatch(f"expected points of dimension {dim}, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    dim = 1

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise InvalidDomain(f"interval needs finite a < b, got ({self.a}, {self.b})")

    @property
    def measure(self):
        return self.b - self.a

    def distance_to_boundary(self, x):
        x = as_points(x, 1)[:, 0]
        return np.minimum(np.abs(x - self.a), np.abs(x - self.b))

    def contains(self, x):
        x = as_points(x, 1)[:, 0]
        return (x > self.a) & (x < self.b)

    def inward_sign(self, x):
        """+1 at a, -1 at b, nan elsewhere: the side an endpoint is approached from."""
        x = np.asarray(x, dtype=float).reshape(-1)
        return np.where(x == self.a, 1.0, np.where(x == self.b, -1.0, np.nan))

    def probe_points(self):
        fr = np.array([0.137, 0.382, 0.618, 0.851])
        return (self.a + fr * (self.b - self.a)).reshape(-1, 1)


class ClosedCurve:
    """Smooth, positively oriented closed curve parametrized on [0, 2*pi)."""

    dim = 2
    period = TWO_PI

    def gamma(self, t):
        raise NotImplementedError

    def dgamma(self, t):
        raise NotImplementedError

    def ddgamma(self, t):
        raise NotImplementedError

    def level(self, x):
        """Signed implicit function: negative inside, zero on the curve."""
        raise NotImplementedError

    def contains(self, x):
        return self.level(as_points(x, 2)) < 0.0


@dataclass(frozen=True)
class Circle(ClosedCurve):
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.center))
        if len(c) != 2 or not np.all(np.isfinite(c)):
            raise InvalidDomain(f"circle center must be two finite numbers, got {self.center!r}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise InvalidDomain(f"circle radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self.center[0] + self.radius * np.cos(t),
                         self.center[1] + self.radius * np.sin(t)], axis=-1)

    def dgamma(self, t):
        t = np.asarray(t, dtype=float)
        return self.radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def ddgamma(self, t):
        t = np.asarray(t, dtype=float)
        return -self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def level(self, x):
        x = as_points(x, 2)
        return np.hypot(x[:, 0] - self.center[0], x[:, 1] - self.center[1]) - self.radius

    def distance_to_boundary(self, x):
        return np.abs(self.level(x))

    @property
    def length(self):
        return TWO_PI * self.radius

    @property
    def measure(self):
        return np.pi * self.radius**2

    def probe_points(self):
        r = self.radius
        c = np.asarray(self.center)
        return c + r * np.array([[0.0, 0.0], [0.21, -0.08], [-0.17, 0.24], [0.04, -0.33]])


@dataclass(frozen=True)
class Ellipse(ClosedCurve):
    center: tuple = (0.0, 0.0)
    semi_axes: tuple = (1.0, 1.0)

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.center))
        ax = tuple(float(v) for v in np.ravel(self.semi_axes))
        if len(c) != 2 or not np.all(np.isfinite(c)):
            raise InvalidDomain(f"ellipse center must be two finite numbers, got {self.center!r}")
        if len(ax) != 2 or not all(np.isfinite(v) and v > 0 for v in ax):
            raise InvalidDomain(f"ellipse semi-axes must be two positive numbers, got {self.semi_axes!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "semi_axes", ax)

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        p, q = self.semi_axes
        return np.stack([self.center[0] + p * np.cos(t), self.center[1] + q * np.sin(t)], axis=-1)

    def dgamma(self, t):
        t = np.asarray(t, dtype=float)
        p, q = self.semi_axes
        return np.stack([-p * np.sin(t), q * np.cos(t)], axis=-1)

    def ddgamma(self, t):
        t = np.asarray(t, dtype=float)
        p, q = self.semi_axes
        return np.stack([-p * np.cos(t), -q * np.sin(t)], axis=-1)

    def level(self, x):
        x = as_points(x, 2)
        p, q = self.semi_axes
        u = (x[:, 0] - self.center[0]) / p
        v = (x[:, 1] - self.center[1]) / q
        return np.hypot(u, v) - 1.0

    def distance_to_boundary(self, x):
        # first-order estimate |F| / |grad F|, exact on the curve's zero set
        x = as_points(x, 2)
        p, q = self.semi_axes
        u = (x[:, 0] - self.center[0]) / p
        v = (x[:, 1] - self.center[1]) / q
        rho = np.hypot(u, v)
        safe = np.where(rho > 0, rho, 1.0)
        grad = np.hypot(u / (p * safe), v / (q * safe))
        return np.where(rho > 0, np.abs(rho - 1.0) / grad, min(p, q))

    @property
    def measure(self):
        return np.pi * self.semi_axes[0] * self.semi_axes[1]

    def probe_points(self):
        c = np.asarray(self.center)
        ax = np.asarray(self.semi_axes)
        return c + ax * np.array([[0.0, 0.0], [0.21, -0.08], [-0.17, 0.24], [0.04, -0.33]])


@dataclass(frozen=True, eq=False)
class BoundaryDiscretization:
    """Quadrature nodes and surface-measure weights on the boundary.

    In 2D the derived arrays ``speed`` (|gamma'|) and ``curvature`` are kept for
    the singular boundary quadratures.
    """

    domain: object
    nodes: np.ndarray
    weights: np.ndarray
    params: np.ndarray = None
    normals: np.ndarray = None
    speed: np.ndarray = None
    curvature: np.ndarray = None

    @property
    def n(self):
        return self.nodes.shape[0]

    @property
    def dim(self):
        return self.domain.dim

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def arc_indices(self, t0, t1):
        """Indices of nodes with parameter in the half-open arc [t0, t1) (mod 2*pi)."""
        if self.params is None:
            raise InvalidDomain("arc supports exist only on closed curves")
        span = (t1 - t0) % TWO_PI
        if span == 0 and t1 != t0:
            span = TWO_PI
        rel = (self.params - t0) % TWO_PI
        return np.flatnonzero(rel < span - 1e-14)


def discretize_boundary(domain, n_nodes=2):
    if n_nodes < 2:
        raise ValueError("n_nodes must be >= 2")
    if isinstance(domain, Interval):
        return BoundaryDiscretization(domain, _frozen([[domain.a], [domain.b]]), _frozen([1.0, 1.0]))
    if not isinstance(domain, ClosedCurve):
        raise InvalidDomain(f"unknown domain {domain!r}")
    if n_nodes % 2:
        raise ValueError("closed curves need an even number of boundary nodes")
    t = TWO_PI * np.arange(n_nodes) / n_nodes
    d1 = domain.dgamma(t)
    d2 = domain.ddgamma(t)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    normals = np.stack([d1[:, 1], -d1[:, 0]], axis=-1) / speed[:, None]
    curvature = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    return BoundaryDiscretization(
        domain,
        _frozen(domain.gamma(t)),
        _frozen(speed * TWO_PI / n_nodes),
        params=_frozen(t),
        normals=_frozen(normals),
        speed=_frozen(speed),
        curvature=_frozen(curvature),
    )


@dataclass(frozen=True, eq=False)
class VolumeQuadrature:
    domain: object
    nodes: np.ndarray
    weights: np.ndarray
    order: int = field(default=0)

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def split(self, x):
        """Interval rules only: the same Gauss order on [a, x] and [x, b].

        Integrands with a kink at ``x`` (the Green function in its second
        argument) stay spectrally accurate on each piece.
        """
        if not isinstance(self.domain, Interval):
            raise InvalidDomain("split is only defined for interval rules")
        a, b = self.domain.a, self.domain.b
        if not a < x < b:
            return self
        xg, wg = np.polynomial.legendre.leggauss(self.order)
        left = 0.5 * (x - a) * (xg + 1.0) + a
        right = 0.5 * (b - x) * (xg + 1.0) + x
        nodes = np.concatenate([left, right]).reshape(-1, 1)
        weights = np.concatenate([0.5 * (x - a) * wg, 0.5 * (b - x) * wg])
        return VolumeQuadrature(self.domain, nodes, weights, self.order)


def discretize_volume(domain, n_nodes):
    """Gauss-Legendre on intervals; polar tensor rule mapped from the unit disk in 2D.

    In 2D ``n_nodes`` is the count per axis (radial Gauss points and angular
    trapezoid points).
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be >= 2")
    if isinstance(domain, Interval):
        xg, wg = np.polynomial.legendre.leggauss(n_nodes)
        h = 0.5 * (domain.b - domain.a)
        return VolumeQuadrature(domain, _frozen((h * (xg + 1.0) + domain.a).reshape(-1, 1)),
                                _frozen(h * wg), n_nodes)
    if isinstance(domain, Circle):
        c, sx, sy = domain.center, domain.radius, domain.radius
    elif isinstance(domain, Ellipse):
        c, (sx, sy) = domain.center, domain.semi_axes
    else:
        raise InvalidDomain(f"no volume rule for {domain!r}")
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    r = 0.5 * (xg + 1.0)
    wr = 0.5 * wg * r
    th = TWO_PI * (np.arange(n_nodes) + 0.5) / n_nodes
    R, TH = np.meshgrid(r, th, indexing="ij")
    W = np.outer(wr, np.full(n_nodes, TWO_PI / n_nodes)) * sx * sy
    pts = np.stack([c[0] + sx * R * np.cos(TH), c[1] + sy * R * np.sin(TH)], axis=-1)
    return VolumeQuadrature(domain, _frozen(pts.reshape(-1, 2)), _frozen(W.ravel()), n_nodes)


def periodic_log_weights(n_nodes):
    """Weights R_j with sum_j R_j f(t_j) ~ int_0^{2pi} ln(4 sin^2((t_0 - s)/2)) f(s) ds.

    Returned as the full circulant matrix R[i, j] for equispaced nodes; exact
    for trigonometric polynomials of degree < n_nodes/2.
    """
    n = n_nodes // 2
    d = TWO_PI * np.arange(n_nodes) / n_nodes
    m = np.arange(1, n)
    col = -(TWO_PI / n_nodes) * 2.0 * np.sum(np.cos(np.outer(d, m)) / m, axis=1) \
        - (np.pi / n**2) * np.cos(n * d)
    idx = (np.arange(n_nodes)[:, None] - np.arange(n_nodes)[None, :]) % n_nodes
    return col[idx]


def periodic_derivative_matrix(n_nodes):
    """Spectral d/dt on n_nodes equispaced points of [0, 2*pi); n_nodes even."""
    h = TWO_PI / n_nodes
    k = np.arange(n_nodes)
    diff = (k[:, None] - k[None, :]) % n_nodes
    with np.errstate(divide="ignore"):
        D = 0.5 * (-1.0) ** diff / np.tan(0.5 * diff * h)
    D[diff == 0] = 0.0
    return D
