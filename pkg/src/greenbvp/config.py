"""TOML problem configuration: parsing, validation, canonical serialization.

Complex numbers are written either as plain numbers or as ``[re, im]`` pairs.
See README.md for a complete example of each section.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import tomli
import tomli_w

from .boundary import BoundaryConditionSet, Local1D, LocalField2D, NonlocalKernel, constant_kernel, cosine_kernel
from .bvp import BoundaryData, Constant, Gaussian, Polynomial, Sine, Zero
from .errors import ConfigError
from .fundamental import Helmholtz1D, Helmholtz2D, Laplace2D, ModifiedHelmholtz1D
from .geometry import Circle, Ellipse, Interval, discretize_boundary, discretize_volume

OPERATORS = ("helmholtz1d", "modified_helmholtz1d", "laplace2d", "helmholtz2d")
DOMAINS = ("interval", "circle", "ellipse")
METHODS = ("direct", "recursive")


def _complex(v, where):
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool)
                                                   for p in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def _real(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a real number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    return float(v)


def _int(v, where, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{where}: must be >= {lo}")
    return v


def _cpair(z):
    z = complex(z)
    return [z.real, z.imag]


def _allowed(table, keys, where):
    extra = set(table) - set(keys)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return table[key]


def _points(v, dim, where):
    """Grid/point spec: a list of points, or {start, stop, num} in 1D."""
    if isinstance(v, dict):
        if dim != 1:
            raise ConfigError(f"{where}: linspace grids are only available in 1D")
        _allowed(v, ("start", "stop", "num"), where)
        num = _int(_require(v, "num", where), f"{where}.num", 0)
        return np.linspace(_real(_require(v, "start", where), f"{where}.start"),
                           _real(_require(v, "stop", where), f"{where}.stop"), num).reshape(-1, 1)
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list of points")
    if dim == 1:
        return np.array([_real(p, f"{where}[{i}]") for i, p in enumerate(v)], dtype=float).reshape(-1, 1)
    pts = []
    for i, p in enumerate(v):
        if not (isinstance(p, list) and len(p) == 2):
            raise ConfigError(f"{where}[{i}]: expected an [x, y] point")
        pts.append([_real(p[0], f"{where}[{i}][0]"), _real(p[1], f"{where}[{i}][1]")])
    return np.array(pts, dtype=float).reshape(-1, 2)


def _points_out(v):
    if isinstance(v, dict):
        return dict(v)
    return v


@dataclass
class ProblemConfig:
    operator: dict
    domain: dict
    bc: list
    adjoint_bc: list = None
    source: dict = field(default_factory=lambda: {"type": "zero"})
    boundary_data: list = None
    discretization: dict = field(default_factory=dict)
    method: str = "direct"
    green: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    # construction of library objects

    @property
    def dim(self):
        return 1 if self.domain["type"] == "interval" else 2

    def build_operator(self):
        op = self.operator
        t = op["type"]
        if t == "helmholtz1d":
            return Helmholtz1D(op["k"], op.get("branch", "outgoing"))
        if t == "modified_helmholtz1d":
            return ModifiedHelmholtz1D(op["kappa"], op.get("branch", "decaying"))
        if t == "laplace2d":
            return Laplace2D()
        return Helmholtz2D(op["k"])

    def build_domain(self):
        d = self.domain
        if d["type"] == "interval":
            return Interval(d["a"], d["b"])
        if d["type"] == "circle":
            return Circle(tuple(d["center"]), d["radius"])
        return Ellipse(tuple(d["center"]), tuple(d["semi_axes"]))

    def build_boundary(self, domain=None):
        domain = domain or self.build_domain()
        return discretize_boundary(domain, self.discretization.get("boundary_nodes", 2 if self.dim == 1 else 64))

    def build_volume(self, domain=None):
        domain = domain or self.build_domain()
        return discretize_volume(domain, self.discretization.get("volume_nodes", 32 if self.dim == 1 else 24))

    def _conditions(self, specs, bd):
        return tuple(_build_condition(s, bd, f"bc[{i}]") for i, s in enumerate(specs))

    def build_conditions(self, bd, operator):
        conds = self._conditions(self.bc, bd)
        if self.adjoint_bc is not None:
            return BoundaryConditionSet(conds, self._conditions(self.adjoint_bc, bd))
        try:
            return BoundaryConditionSet.with_default_adjoint(conds, operator)
        except ValueError as exc:
            raise ConfigError(f"adjoint_bc: {exc}") from exc

    def build_source(self):
        return _build_source(self.source, self.dim)

    def build_boundary_data(self, bd, bcs):
        if self.boundary_data is None:
            return BoundaryData.zeros(bcs.m)
        if len(self.boundary_data) != bcs.m:
            raise ConfigError(f"boundary_data: {len(self.boundary_data)} entries for {bcs.m} conditions")
        dc = bcs.discretize(bd)
        comps = []
        for j, spec in enumerate(self.boundary_data):
            comps.append(_build_data(spec, bd, dc.direct[j], f"boundary_data[{j}]"))
        return BoundaryData(tuple(comps))

    def green_sources(self):
        return _points(self.green.get("sources", []), self.dim, "green.sources")

    def green_grid(self):
        return _points(self.green.get("grid", []), self.dim, "green.grid")

    def output_grid(self):
        return _points(self.output.get("grid", []), self.dim, "output.grid")

    # serialization

    def to_dict(self):
        out = {"method": self.method, "operator": _canon_operator(self.operator),
               "domain": dict(self.domain), "bc": [_canon_bc(b) for b in self.bc]}
        if self.adjoint_bc is not None:
            out["adjoint_bc"] = [_canon_bc(b) for b in self.adjoint_bc]
        out["source"] = _canon_source(self.source)
        if self.boundary_data is not None:
            out["boundary_data"] = [_canon_data(b) for b in self.boundary_data]
        if self.discretization:
            out["discretization"] = dict(self.discretization)
        if self.green:
            out["green"] = {k: _points_out(v) for k, v in self.green.items()}
        if self.output:
            out["output"] = {k: _points_out(v) for k, v in self.output.items()}
        return out

    def dumps(self):
        return tomli_w.dumps(self.to_dict())


# ---- sections ----

def _parse_operator(t):
    where = "operator"
    if not isinstance(t, dict):
        raise ConfigError("operator: expected a table")
    typ = _require(t, "type", where)
    if typ not in OPERATORS:
        raise ConfigError(f"operator.type: expected one of {OPERATORS}, got {typ!r}")
    out = {"type": typ}
    if typ in ("helmholtz1d", "helmholtz2d"):
        _allowed(t, ("type", "k", "branch"), where)
        out["k"] = _complex(_require(t, "k", where), "operator.k")
        if typ == "helmholtz1d":
            out["branch"] = t.get("branch", "outgoing")
            if out["branch"] not in ("outgoing", "incoming", "standing"):
                raise ConfigError(f"operator.branch: unknown branch {out['branch']!r}")
    elif typ == "modified_helmholtz1d":
        _allowed(t, ("type", "kappa", "branch"), where)
        out["kappa"] = _real(_require(t, "kappa", where), "operator.kappa")
        if out["kappa"] <= 0:
            raise ConfigError("operator.kappa: must be positive")
        out["branch"] = t.get("branch", "decaying")
        if out["branch"] not in ("decaying", "sinh"):
            raise ConfigError(f"operator.branch: unknown branch {out['branch']!r}")
    else:
        _allowed(t, ("type",), where)
    return out


def _canon_operator(op):
    out = dict(op)
    if "k" in out:
        out["k"] = _cpair(out["k"])
    return out


def _parse_domain(t):
    where = "domain"
    if not isinstance(t, dict):
        raise ConfigError("domain: expected a table")
    typ = _require(t, "type", where)
    if typ == "interval":
        _allowed(t, ("type", "a", "b"), where)
        a = _real(_require(t, "a", where), "domain.a")
        b = _real(_require(t, "b", where), "domain.b")
        if not a < b:
            raise ConfigError("domain: need a < b")
        return {"type": typ, "a": a, "b": b}
    if typ in ("circle", "ellipse"):
        keys = ("type", "center", "radius") if typ == "circle" else ("type", "center", "semi_axes")
        _allowed(t, keys, where)
        c = t.get("center", [0.0, 0.0])
        if not (isinstance(c, list) and len(c) == 2):
            raise ConfigError("domain.center: expected [x, y]")
        out = {"type": typ, "center": [_real(c[0], "domain.center[0]"), _real(c[1], "domain.center[1]")]}
        if typ == "circle":
            out["radius"] = _real(_require(t, "radius", where), "domain.radius")
            if out["radius"] <= 0:
                raise ConfigError("domain.radius: must be positive")
        else:
            ax = _require(t, "semi_axes", where)
            if not (isinstance(ax, list) and len(ax) == 2):
                raise ConfigError("domain.semi_axes: expected [p, q]")
            out["semi_axes"] = [_real(ax[0], "domain.semi_axes[0]"), _real(ax[1], "domain.semi_axes[1]")]
            if min(out["semi_axes"]) <= 0:
                raise ConfigError("domain.semi_axes: must be positive")
        return out
    raise ConfigError(f"domain.type: expected one of {DOMAINS}, got {typ!r}")


BC_KEYS = {
    "local1d": ("type", "a0", "a1", "b0", "b1"),
    "field2d": ("type", "dirichlet", "neumann", "support"),
    "kernel": ("type", "kernel", "c", "mode", "support", "matrix"),
}


def _parse_bc(t, where):
    if not isinstance(t, dict):
        raise ConfigError(f"{where}: expected a table")
    typ = _require(t, "type", where)
    if typ not in BC_KEYS:
        raise ConfigError(f"{where}.type: expected one of {tuple(BC_KEYS)}, got {typ!r}")
    _allowed(t, BC_KEYS[typ], where)
    out = {"type": typ}
    if typ == "local1d":
        for k in ("a0", "a1", "b0", "b1"):
            out[k] = _complex(t.get(k, 0.0), f"{where}.{k}")
        if all(out[k] == 0 for k in ("a0", "a1", "b0", "b1")):
            raise ConfigError(f"{where}: all coefficients are zero")
    elif typ == "field2d":
        out["dirichlet"] = _complex(t.get("dirichlet", 0.0), f"{where}.dirichlet")
        out["neumann"] = _complex(t.get("neumann", 0.0), f"{where}.neumann")
        if "support" in t:
            out["support"] = _support(t["support"], f"{where}.support")
    else:
        if "matrix" in t:
            m = t["matrix"]
            if not (isinstance(m, list) and m and all(isinstance(r, list) for r in m)):
                raise ConfigError(f"{where}.matrix: expected a list of rows")
            out["matrix"] = [[_complex(v, f"{where}.matrix[{i}][{j}]") for j, v in enumerate(r)]
                             for i, r in enumerate(m)]
        else:
            kind = t.get("kernel", "constant")
            if kind not in ("constant", "cosine"):
                raise ConfigError(f"{where}.kernel: expected 'constant' or 'cosine'")
            out["kernel"] = kind
            out["c"] = _complex(t.get("c", 1.0), f"{where}.c")
            if kind == "cosine":
                out["mode"] = _int(t.get("mode", 1), f"{where}.mode", 0)
        if "support" in t:
            out["support"] = _support(t["support"], f"{where}.support")
    return out


def _support(v, where):
    if isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool)
                                                   for p in v):
        return [float(v[0]), float(v[1])]
    raise ConfigError(f"{where}: expected an arc [t0, t1] in curve parameter")


def _canon_bc(b):
    out = {}
    for k, v in b.items():
        if k in ("a0", "a1", "b0", "b1", "dirichlet", "neumann", "c"):
            out[k] = _cpair(v)
        elif k == "matrix":
            out[k] = [[_cpair(z) for z in r] for r in v]
        else:
            out[k] = v
    return out


def _build_condition(spec, bd, where):
    typ = spec["type"]
    try:
        if typ == "local1d":
            if bd.dim != 1:
                raise ConfigError(f"{where}: local1d rows need an interval domain")
            return Local1D(spec["a0"], spec["a1"], spec["b0"], spec["b1"])
        if typ == "field2d":
            if bd.dim != 2:
                raise ConfigError(f"{where}: field2d rows need a closed-curve domain")
            sup = tuple(spec["support"]) if "support" in spec else None
            return LocalField2D(spec["dirichlet"], spec["neumann"], sup)
        if "matrix" in spec:
            return NonlocalKernel(np.array(spec["matrix"], dtype=complex),
                                  tuple(spec["support"]) if "support" in spec else None)
        sup = tuple(spec["support"]) if "support" in spec else None
        if spec["kernel"] == "constant":
            return constant_kernel(bd, spec["c"], sup)
        return cosine_kernel(bd, spec["c"], spec["mode"], sup)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


SOURCE_KEYS = {
    "zero": ("type",),
    "constant": ("type", "value"),
    "sine": ("type", "amplitude", "wavenumber", "phase"),
    "polynomial": ("type", "coeffs"),
    "gaussian": ("type", "center", "width", "amplitude"),
}


def _coeff_array(c, dim, where):
    """1D: list of complex coefficients; 2D: list of rows c[i][j] multiplying x^i y^j."""
    if not isinstance(c, list) or not c:
        raise ConfigError(f"{where}: expected a non-empty list")
    if dim == 1:
        return [_complex(v, f"{where}[{i}]") for i, v in enumerate(c)]
    if not all(isinstance(r, list) and r for r in c) or len({len(r) for r in c}) != 1:
        raise ConfigError(f"{where}: expected a rectangular list of rows")
    return [[_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(c)]


def _parse_source(t, dim):
    where = "source"
    if not isinstance(t, dict):
        raise ConfigError("source: expected a table")
    typ = t.get("type", "zero")
    if typ not in SOURCE_KEYS:
        raise ConfigError(f"source.type: expected one of {tuple(SOURCE_KEYS)}, got {typ!r}")
    _allowed(t, SOURCE_KEYS[typ], where)
    out = {"type": typ}
    if typ == "constant":
        out["value"] = _complex(t.get("value", 1.0), "source.value")
    elif typ == "sine":
        out["amplitude"] = _complex(t.get("amplitude", 1.0), "source.amplitude")
        wn = t.get("wavenumber", 1.0)
        out["wavenumber"] = ([_real(w, "source.wavenumber") for w in wn] if isinstance(wn, list)
                             else _real(wn, "source.wavenumber"))
        out["phase"] = _real(t.get("phase", 0.0), "source.phase")
    elif typ == "polynomial":
        out["coeffs"] = _coeff_array(_require(t, "coeffs", where), dim, "source.coeffs")
    elif typ == "gaussian":
        ctr = t.get("center", 0.0)
        out["center"] = [_real(v, "source.center") for v in ctr] if isinstance(ctr, list) \
            else _real(ctr, "source.center")
        out["width"] = _real(t.get("width", 1.0), "source.width")
        if out["width"] <= 0:
            raise ConfigError("source.width: must be positive")
        out["amplitude"] = _complex(t.get("amplitude", 1.0), "source.amplitude")
    return out


def _canon_source(s):
    out = {}
    for k, v in s.items():
        if k in ("value", "amplitude"):
            out[k] = _cpair(v)
        elif k == "coeffs":
            out[k] = [[_cpair(z) for z in r] if isinstance(r, list) else _cpair(r) for r in v]
        else:
            out[k] = v
    return out


def _build_source(s, dim):
    typ = s["type"]
    if typ == "zero":
        return Zero()
    if typ == "constant":
        return Constant(s["value"])
    if typ == "sine":
        return Sine(s["amplitude"], s["wavenumber"], s["phase"])
    if typ == "polynomial":
        c = s["coeffs"]
        if isinstance(c[0], list):
            if dim != 2:
                raise ConfigError("source.coeffs: 2D coefficient arrays need a 2D domain")
            return Polynomial(tuple(tuple(r) for r in c))
        return Polynomial(tuple(c))
    return Gaussian(s["center"], s["width"], s["amplitude"])


def _parse_data(t, where):
    """Entry: {value = z} | {values = [z, ...]} | {polynomial = c[i][j]} evaluated on the support nodes."""
    if isinstance(t, (int, float)) and not isinstance(t, bool):
        return {"value": complex(t)}
    if not isinstance(t, dict):
        raise ConfigError(f"{where}: expected a table with 'value', 'values' or 'polynomial'")
    _allowed(t, ("value", "values", "polynomial"), where)
    if len(t) != 1:
        raise ConfigError(f"{where}: give exactly one of 'value', 'values', 'polynomial'")
    if "value" in t:
        return {"value": _complex(t["value"], f"{where}.value")}
    if "values" in t:
        v = t["values"]
        if not isinstance(v, list):
            raise ConfigError(f"{where}.values: expected a list")
        return {"values": [_complex(z, f"{where}.values[{i}]") for i, z in enumerate(v)]}
    return {"polynomial": _coeff_array(t["polynomial"], 2, f"{where}.polynomial")}


def _canon_data(d):
    if "value" in d:
        return {"value": _cpair(d["value"])}
    if "values" in d:
        return {"values": [_cpair(z) for z in d["values"]]}
    c = d["polynomial"]
    return {"polynomial": [[_cpair(z) for z in r] for r in c]}


def _build_data(spec, bd, cond, where):
    if "value" in spec:
        return spec["value"]
    if "values" in spec:
        v = np.array(spec["values"], dtype=complex)
        if v.size != cond.matrix.shape[0]:
            raise ConfigError(f"{where}.values: {v.size} values for {cond.matrix.shape[0]} condition rows")
        return v
    c = np.array(spec["polynomial"], dtype=complex)
    if bd.dim == 1:
        raise ConfigError(f"{where}.polynomial: only available on closed curves")
    pts = bd.nodes[cond.support]
    return np.polynomial.polynomial.polyval2d(pts[:, 0], pts[:, 1], c)


def _parse_discretization(t):
    if not isinstance(t, dict):
        raise ConfigError("discretization: expected a table")
    _allowed(t, ("boundary_nodes", "volume_nodes"), "discretization")
    out = {}
    if "boundary_nodes" in t:
        out["boundary_nodes"] = _int(t["boundary_nodes"], "discretization.boundary_nodes", 2)
    if "volume_nodes" in t:
        out["volume_nodes"] = _int(t["volume_nodes"], "discretization.volume_nodes", 2)
    return out


def _parse_section_points(t, name, keys, dim):
    if not isinstance(t, dict):
        raise ConfigError(f"{name}: expected a table")
    _allowed(t, keys, name)
    out = {}
    for k, v in t.items():
        if k in ("sources", "grid"):
            _points(v, dim, f"{name}.{k}")
            out[k] = _canon_points(v, dim)
        else:
            if not isinstance(v, str):
                raise ConfigError(f"{name}.{k}: expected a string path")
            out[k] = v
    return out


def _canon_points(v, dim):
    if isinstance(v, dict):
        return {"start": float(v["start"]), "stop": float(v["stop"]), "num": int(v["num"])}
    if dim == 1:
        return [float(p) for p in v]
    return [[float(p[0]), float(p[1])] for p in v]


TOP_KEYS = ("method", "operator", "domain", "bc", "adjoint_bc", "source", "boundary_data",
            "discretization", "green", "output")


def from_dict(d):
    _allowed(d, TOP_KEYS, "config")
    operator = _parse_operator(_require(d, "operator", "config"))
    domain = _parse_domain(_require(d, "domain", "config"))
    dim = 1 if domain["type"] == "interval" else 2
    if (operator["type"] in ("laplace2d", "helmholtz2d")) != (dim == 2):
        raise ConfigError("operator and domain dimensions differ")
    bcs = _require(d, "bc", "config")
    if not isinstance(bcs, list) or not bcs:
        raise ConfigError("bc: need a non-empty list of [[bc]] tables")
    bc = [_parse_bc(b, f"bc[{i}]") for i, b in enumerate(bcs)]
    adj = d.get("adjoint_bc")
    if adj is not None:
        if not isinstance(adj, list) or len(adj) != len(bc):
            raise ConfigError(f"adjoint_bc: need exactly {len(bc)} entries")
        adj = [_parse_bc(b, f"adjoint_bc[{i}]") for i, b in enumerate(adj)]
    method = d.get("method", "direct")
    if method not in METHODS:
        raise ConfigError(f"method: expected one of {METHODS}, got {method!r}")
    data = d.get("boundary_data")
    if data is not None:
        if not isinstance(data, list):
            raise ConfigError("boundary_data: expected a list")
        data = [_parse_data(t, f"boundary_data[{i}]") for i, t in enumerate(data)]
        if dim == 1 and any("polynomial" in e for e in data):
            raise ConfigError("boundary_data: polynomial data is only available on closed curves")
    return ProblemConfig(
        operator=operator,
        domain=domain,
        bc=bc,
        adjoint_bc=adj,
        source=_parse_source(d.get("source", {"type": "zero"}), dim),
        boundary_data=data,
        discretization=_parse_discretization(d.get("discretization", {})),
        method=method,
        green=_parse_section_points(d.get("green", {}), "green", ("sources", "grid"), dim),
        output=_parse_section_points(d.get("output", {}), "output", ("path", "grid", "residuals"), dim),
    )


def loads(text):
    try:
        d = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc
    return from_dict(d)


def load(path):
    try:
        with open(path, "rb") as fh:
            d = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from exc
    return from_dict(d)
