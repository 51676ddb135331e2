from pathlib import Path

import numpy as np
import pytest

from greenbvp import config
from greenbvp.errors import ConfigError

CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.toml"))

MINIMAL = """
[operator]
type = "helmholtz1d"
k = 1.0

[domain]
type = "interval"
a = 0.0
b = 1.0

[[bc]]
type = "local1d"
a0 = 1.0

[[bc]]
type = "local1d"
b0 = 1.0
"""


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    cfg = config.load(path)
    again = config.loads(cfg.dumps())
    assert again.to_dict() == cfg.to_dict()


def test_complex_values_round_trip():
    text = MINIMAL.replace("a0 = 1.0", "a0 = 1.0\na1 = [0.4, 0.3]") + (
        '\n[[adjoint_bc]]\ntype = "local1d"\na0 = 1.0\na1 = [0.4, -0.3]\n'
        '\n[[adjoint_bc]]\ntype = "local1d"\nb0 = 1.0\n'
        '\n[source]\ntype = "sine"\namplitude = [1.0, -2.0]\nwavenumber = 3.0\n')
    cfg = config.loads(text)
    assert config.loads(cfg.dumps()).to_dict() == cfg.to_dict()
    src = cfg.build_source()
    assert src.amplitude == 1.0 - 2.0j
    bd = cfg.build_boundary()
    bcs = cfg.build_conditions(bd, cfg.build_operator())
    assert bcs.conditions[0].a1 == 0.4 + 0.3j
    assert bcs.adjoint_conditions[0].a1 == 0.4 - 0.3j
    # complex rows need explicit adjoint rows; this surfaces when the conditions are built
    bare = config.loads(MINIMAL.replace("a0 = 1.0", "a0 = 1.0\na1 = [0.4, 0.3]"))
    with pytest.raises(ConfigError, match="adjoint"):
        bare.build_conditions(bare.build_boundary(), bare.build_operator())


def test_point_ranges():
    cfg = config.loads(MINIMAL + "\n[green]\nsources = [0.5]\ngrid = { start = 0.1, stop = 0.9, num = 9 }\n")
    assert np.allclose(cfg.green_grid()[:, 0], np.linspace(0.1, 0.9, 9))
    assert len(cfg.output_grid()) == 0


@pytest.mark.parametrize(
    "mutation, field",
    [
        (lambda t: t.replace('"helmholtz1d"', '"wave"'), "operator.type"),
        (lambda t: t.replace("b = 1.0", "b = -1.0"), "domain"),
        (lambda t: t.replace("a0 = 1.0", 'a0 = "x"'), "bc[0].a0"),
        (lambda t: t.replace("k = 1.0", "k = 1.0\nspeed = 2"), "operator"),
        (lambda t: t.replace("b0 = 1.0", "b0 = 0.0"), "bc[1]"),
        (lambda t: 'method = "magic"\n' + t, "method"),
        (lambda t: t.replace('type = "interval"\na = 0.0\nb = 1.0', 'type = "circle"\nradius = 1.0'), "dimensions"),
        (lambda t: t + "\n[[boundary_data]]\nvalue = 1.0\nvalues = [1.0]\n", "boundary_data[0]"),
        (lambda t: t + "\n[discretization]\nboundary_nodes = 1\n", "discretization.boundary_nodes"),
    ],
)
def test_errors_name_the_field(mutation, field):
    with pytest.raises(ConfigError) as info:
        cfg = config.loads(mutation(MINIMAL))
        cfg.build_conditions(cfg.build_boundary(), cfg.build_operator())
    assert field in str(info.value)


def test_syntax_error_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        config.loads("[operator\n")
    with pytest.raises(ConfigError):
        config.load(tmp_path / "missing.toml")


def test_disk_polynomial_data():
    cfg = config.load(next(p for p in CONFIGS if p.name == "disk_harmonic.toml"))
    bd = cfg.build_boundary()
    bcs = cfg.build_conditions(bd, cfg.build_operator())
    phi = cfg.build_boundary_data(bd, bcs)
    assert np.allclose(phi.flat(bcs.discretize(bd).sizes), bd.nodes[:, 0] * bd.nodes[:, 1])
