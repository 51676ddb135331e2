"""Pinned-size invariant suites behind ``greenbvp verify``.

Each check returns a row (suite, name, max_error, tolerance, passed).  Sizes
and sample points are fixed so that runs are deterministic.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import GreenOperator, adjoint_green, assemble_g, assemble_h, dirichlet_green, eval_G
from .boundary import BoundaryConditionSet, Local1D, LocalField2D
from .bvp import BoundaryData, Constant, Polynomial, solve_bvp, residual_report
from .errors import IllPosed
from .fundamental import Helmholtz1D, Laplace2D, ModifiedHelmholtz1D
from .geometry import Circle, Interval, discretize_boundary, discretize_volume
from .oracle import DirichletHelmholtz1D, DiskDirichletLaplace, FdSolver1D, PeriodicHelmholtz1D, fd_solve, jump_check
from .recursive import BlockMatrix2x2, block_inverse, recursive_green

SUITES = ("assembly", "recursive", "bvp")


@dataclass(frozen=True)
class CheckRow:
    suite: str
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.max_error) and self.max_error < self.tolerance)


UNIT = Interval(0.0, 1.0)
DIRICHLET = (Local1D(a0=1.0), Local1D(b0=1.0))
PERIODIC = (Local1D(a0=1.0, b0=-1.0), Local1D(a1=1.0, b1=-1.0))
ROBIN = (Local1D(a0=1.0, a1=-1.0), Local1D(b0=1.0, b1=1.0))


def grid_pairs(n=9, lo=0.1, hi=0.9):
    g = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return X.ravel(), Y.ravel()


def disk_points():
    th = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    src = np.concatenate([np.c_[r * np.cos(th + r), r * np.sin(th + r)] for r in (0.0, 0.35, 0.7)])
    fld = np.concatenate([np.c_[r * np.cos(th + 0.3), r * np.sin(th + 0.3)] for r in (0.2, 0.5, 0.9)])
    return src[7:], fld


def case_1d(name):
    bd = discretize_boundary(UNIT)
    if name == "dirichlet":
        return Helmholtz1D(1.0).fundamental(), BoundaryConditionSet(DIRICHLET), bd
    if name == "periodic":
        return Helmholtz1D(1.0).fundamental(), BoundaryConditionSet(PERIODIC), bd
    if name == "robin":
        return ModifiedHelmholtz1D(1.0).fundamental(), BoundaryConditionSet(ROBIN), bd
    raise KeyError(name)


def complex_robin_case():
    """Non-self-adjoint-coefficient Robin rows; the adjoint rows are the conjugates."""
    rows = (Local1D(a0=1.0, a1=0.4 + 0.3j), Local1D(b0=1.0, b1=-0.2 + 0.5j))
    bcs = BoundaryConditionSet(rows, tuple(r.conjugate() for r in rows))
    return Helmholtz1D(1.3).fundamental(), bcs, discretize_boundary(UNIT)


def assembly_checks():
    rows = []
    X, Y = grid_pairs()
    fs, bcs, bd = case_1d("dirichlet")
    gop = GreenOperator(fs, bcs, bd)
    ref = DirichletHelmholtz1D(1.0)(X, Y)
    rows.append(CheckRow("assembly", "dirichlet_helmholtz_vs_oracle", float(np.max(np.abs(eval_G(gop, X, Y) - ref))), 1e-12))
    rows.append(CheckRow("assembly", "dirichlet_specialized_vs_general",
                         float(np.max(np.abs(eval_G(dirichlet_green(fs, bd), X, Y) - eval_G(gop, X, Y)))), 1e-12))
    fs, bcs, bd = case_1d("periodic")
    gper = GreenOperator(fs, bcs, bd)
    ref = PeriodicHelmholtz1D(1.0, 1.0)(X, Y)
    rows.append(CheckRow("assembly", "periodic_helmholtz_vs_oracle", float(np.max(np.abs(eval_G(gper, X, Y) - ref))), 1e-12))
    rows.append(CheckRow("assembly", "jump_condition_periodic",
                         jump_check(lambda x, xp: eval_G(gper, x, xp), 0.3), 1e-7))
    for name in ("dirichlet", "periodic", "robin"):
        g = GreenOperator(*case_1d(name))
        rows.append(CheckRow("assembly", f"bc_residual_{name}", g.bc_residual(np.linspace(0.1, 0.9, 5)), 1e-10))
    # branch independence
    bd = discretize_boundary(UNIT)
    gin = GreenOperator(Helmholtz1D(1.0, "incoming").fundamental(), BoundaryConditionSet(DIRICHLET), bd)
    rows.append(CheckRow("assembly", "branch_independence",
                         float(np.max(np.abs(eval_G(gin, X, Y) - eval_G(gop, X, Y)))), 1e-10))
    # adjoint path and h = g^dagger
    fs, bcs, bd = complex_robin_case()
    g = GreenOperator(fs, bcs, bd)
    ga = adjoint_green(g)
    rows.append(CheckRow("assembly", "reciprocity_adjoint_path",
                         float(np.max(np.abs(eval_G(ga, X, Y) - np.conj(eval_G(g, Y, X))))), 1e-10))
    h = assemble_h(fs, bcs, bd)
    rows.append(CheckRow("assembly", "h_equals_g_dagger",
                         float(np.max(np.abs(h.matrix - assemble_g(fs, bcs, bd).dagger()))), 1e-12))
    # disk
    bd2 = discretize_boundary(Circle(), 128)
    gd = GreenOperator(Laplace2D().fundamental(), BoundaryConditionSet((LocalField2D(1.0, 0.0),)), bd2)
    src, fld = disk_points()
    oracle = DiskDirichletLaplace(1.0)
    ref = np.array([[oracle(x, y) for y in src] for x in fld])
    err = np.max(np.abs(gd.matrix(fld, src) - ref))
    rows.append(CheckRow("assembly", "disk_dirichlet_vs_images", float(err), 1e-6))
    rows.append(CheckRow("assembly", "disk_bc_residual", gd.bc_residual(src), 1e-5))
    # failure detection
    try:
        GreenOperator(Helmholtz1D(np.pi).fundamental(), BoundaryConditionSet(DIRICHLET), discretize_boundary(UNIT))
        detected = 1.0
    except IllPosed:
        detected = 0.0
    rows.append(CheckRow("assembly", "eigenvalue_k_pi_detected", detected, 0.5))
    return rows


def recursive_checks():
    rows = []
    X, Y = grid_pairs(10)
    for name in ("dirichlet", "periodic", "robin"):
        fs, bcs, bd = case_1d(name)
        d = eval_G(GreenOperator(fs, bcs, bd), X, Y)
        r = eval_G(recursive_green(fs, bcs, bd), X, Y)
        p = eval_G(recursive_green(fs, bcs.permuted([1, 0]), bd), X, Y)
        rows.append(CheckRow("recursive", f"direct_vs_recursive_{name}", float(np.max(np.abs(d - r))), 1e-10))
        rows.append(CheckRow("recursive", f"permutation_{name}", float(np.max(np.abs(d - p))), 1e-10))
    bd2 = discretize_boundary(Circle(), 128)
    arcs = BoundaryConditionSet((LocalField2D(1.0, 0.0, (0.0, np.pi)), LocalField2D(1.0, 0.0, (np.pi, 2 * np.pi))))
    fs2 = Laplace2D().fundamental()
    src, fld = disk_points()
    d = GreenOperator(fs2, arcs, bd2).matrix(fld, src)
    r = recursive_green(fs2, arcs, bd2).matrix(fld, src)
    p = recursive_green(fs2, arcs.permuted([1, 0]), bd2).matrix(fld, src)
    rows.append(CheckRow("recursive", "direct_vs_recursive_disk_arcs", float(np.max(np.abs(d - r))), 1e-5))
    rows.append(CheckRow("recursive", "permutation_disk_arcs", float(np.max(np.abs(d - p))), 1e-5))
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 13))
        k = int(rng.integers(1, n))
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + n * np.eye(n)
        inv = block_inverse(BlockMatrix2x2.split(M, k))
        worst = max(worst, float(np.max(np.abs(inv @ M - np.eye(n)))))
    rows.append(CheckRow("recursive", "block_inverse_random", worst, 1e-10))
    return rows


def bvp_checks():
    rows = []
    fs, bcs, bd = case_1d("dirichlet")
    gop = GreenOperator(fs, bcs, bd)
    vq = discretize_volume(UNIT, 32)
    sol = solve_bvp(gop, vq, Constant(1.0))
    exact = 1.0 + (np.cos(1.0) - 1.0) / np.sin(1.0) * np.sin(0.5) - np.cos(0.5)
    rows.append(CheckRow("bvp", "dirichlet_f1_closed_form", abs(sol(0.5) - exact), 1e-12))
    rep = residual_report(sol, h=1e-3)
    rows.append(CheckRow("bvp", "dirichlet_f1_pde_residual", rep["pde_residual"], 1e-5))
    fs, bcs, bd = case_1d("robin")
    gop = GreenOperator(fs, bcs, bd)
    f = Polynomial((1.0, 0.0, 1.0))
    phi = BoundaryData((0.5, -0.25))
    sol = solve_bvp(gop, vq, f, phi)
    xg, u = fd_solve(FdSolver1D(-1.0, 0.0, 1.0, ROBIN, 4000), f, phi)
    idx = 200 * np.arange(1, 21) - 100
    rows.append(CheckRow("bvp", "robin_vs_fd", float(np.max(np.abs(sol(xg[idx]) - u[idx]))), 5e-6))
    rows.append(CheckRow("bvp", "robin_boundary_residual", residual_report(sol)["boundary_residual"], 1e-10))
    bd2 = discretize_boundary(Circle(), 128)
    gd = GreenOperator(Laplace2D().fundamental(), BoundaryConditionSet((LocalField2D(1.0, 0.0),)), bd2)
    phi = BoundaryData((bd2.nodes[:, 0] * bd2.nodes[:, 1],))
    sol = solve_bvp(gd, discretize_volume(Circle(), 16), None, phi)
    _, fld = disk_points()
    rows.append(CheckRow("bvp", "disk_harmonic_xy", float(np.max(np.abs(sol(fld) - fld[:, 0] * fld[:, 1]))), 1e-5))
    return rows


def run_suite(suite="all"):
    if suite not in SUITES + ("all",):
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    chosen = SUITES if suite == "all" else (suite,)
    table = {"assembly": assembly_checks, "recursive": recursive_checks, "bvp": bvp_checks}
    rows = []
    for s in chosen:
        rows.extend(table[s]())
    return rows


__all__ = ["CheckRow", "SUITES", "run_suite"]
