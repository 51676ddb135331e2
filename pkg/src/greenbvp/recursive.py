"""Block inversion and the condition-by-condition construction of G.

Starting from G^(0) = E, stage j subtracts

    G_j = G^(j-1) (b^a_j)^dagger g_j^{-1} b_j G^(j-1),   g_j = b_j G^(j-1) (b^a_j)^dagger,

so that G^(j) satisfies conditions 1..j.  Discretely every G^(j) has the form
E(x, x') - e(x) C_j t(x') (same notation as :mod:`assembly`), and the trace
operator of G^(j) in both arguments is T_j = T - T C_j T.  The recursion is

    C_j = C_{j-1} + (I - C_{j-1} T) Ba_j^dagger g_j^{-1} B_j (I - T C_{j-1}).

For local conditions g_j only involves the trace channels on the support of
condition j, so it is formed from a slice of T_{j-1} instead of full products.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .assembly import (
    CONSISTENCY_TOL,
    ILL_POSED_THRESHOLD,
    PROBE_TOL,
    ConsistentSolver,
    LayerOperators,
    _rhs_scale,
    eval_G,
)
from .errors import ShapeMismatch, SingularBlock, StageSingular

BLOCK_COND_LIMIT = 1e12


@dataclass(frozen=True)
class BlockMatrix2x2:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (np.atleast_2d(np.asarray(v, dtype=complex)) for v in (self.A, self.B, self.C, self.D))
        if A.shape[0] != A.shape[1] or D.shape[0] != D.shape[1]:
            raise ShapeMismatch("diagonal blocks must be square")
        if B.shape != (A.shape[0], D.shape[0]) or C.shape != (D.shape[0], A.shape[0]):
            raise ShapeMismatch("off-diagonal block shapes do not match the diagonal blocks")
        for name, v in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, v)

    @classmethod
    def split(cls, M, k):
        M = np.asarray(M)
        return cls(M[:k, :k], M[:k, k:], M[k:, :k], M[k:, k:])

    def assemble(self):
        return np.block([[self.A, self.B], [self.C, self.D]])


def _checked_inverse(M, which):
    with np.errstate(all="ignore"):
        try:
            c = np.linalg.cond(M)
        except np.linalg.LinAlgError:
            c = np.inf
    if not np.isfinite(c) or c > BLOCK_COND_LIMIT:
        raise SingularBlock(which)
    return sla.inv(M)


def block_inverse(bm):
    """Inverse of [[A, B], [C, D]] through A^{-1} and R = (D - C A^{-1} B)^{-1}."""
    Ai = _checked_inverse(bm.A, "A")
    AiB = Ai @ bm.B
    CAi = bm.C @ Ai
    R = _checked_inverse(bm.D - bm.C @ AiB, "Schur complement D - C A^-1 B")
    return np.block([[Ai + AiB @ R @ CAi, -AiB @ R], [-R @ CAi, R]])


@dataclass
class Stage:
    index: int
    g: np.ndarray
    solver: ConsistentSolver

    @property
    def condition_estimate(self):
        return self.solver.condition_estimate


class RecursiveState:
    """G^(j) after ``stage`` conditions have been peeled off.

    ``C`` maps trace channels of E(., x') to the correcting density, ``Tj`` is
    the two-sided trace matrix of G^(stage).
    """

    def __init__(self, fs, bcs, bd):
        self.fs = fs
        self.bcs = bcs
        self.bd = bd
        self.layers = LayerOperators(fs, bd)
        self.dc = bcs.discretize(bd)
        self.B = self.dc.B
        self.Bad = self.dc.dagger("adjoint")
        P = self.layers.T.shape[0]
        self.C = np.zeros((P, P), dtype=complex)
        self.Tj = np.array(self.layers.T)
        self.stages = []
        self._probe_tr = self.layers.traces(bd.domain.probe_points())

    @property
    def stage(self):
        return len(self.stages)

    @property
    def m(self):
        return self.bcs.m

    def _local_columns(self, j):
        d = self.dc.direct[j]
        a = self.dc.adjoint[j]
        if not (d.local and a.local):
            return None
        cols = np.flatnonzero(np.any(d.matrix != 0, axis=0) | np.any(a.matrix != 0, axis=0))
        return cols

    def advance(self):
        j = self.stage
        if j >= self.m:
            raise ValueError("all conditions have been applied")
        rows = self.dc.block(j)
        Bj = self.B[rows]
        Badj = self.Bad[:, rows]
        cols = self._local_columns(j)
        # measured against free-space traces, so cancellation in Tj shows up
        T0 = self.layers.T
        if cols is not None:
            # only the support channels of condition j enter g_j
            Tsub = self.Tj[np.ix_(cols, cols)]
            gj = Bj[:, cols] @ Tsub @ Badj[cols]
            scale = np.linalg.norm(np.abs(Bj[:, cols]) @ np.abs(T0[np.ix_(cols, cols)]) @ np.abs(Badj[cols]), 2)
        else:
            gj = Bj @ self.Tj @ Badj
            scale = np.linalg.norm(np.abs(Bj) @ np.abs(T0) @ np.abs(Badj), 2)
        stage_no = j + 1
        solver = ConsistentSolver(gj, scale, lambda c: StageSingular(stage_no, c))
        T = self.layers.T
        left = Bj - Bj @ T @ self.C               # B_j (I - T C)
        right = Badj - self.C @ T @ Badj          # (I - C T) Ba_j^dagger
        if solver.rank_deficient:
            solver.tol = PROBE_TOL
            solver.solve(left @ self._probe_tr, _rhs_scale(self.dc, self._probe_tr))
            solver.tol = CONSISTENCY_TOL
            # pseudo-inverse applied to the full trace space; consistency was probed above
            U, s, Vh = solver._svd
            ginv = Vh.conj().T @ (U.conj().T / s[:, None])
        else:
            ginv = sla.lu_solve(solver._lu, np.eye(gj.shape[0], dtype=complex))
        self.C = self.C + right @ ginv @ left
        self.Tj = T - T @ self.C @ T
        self.stages.append(Stage(stage_no, gj, solver))
        return self

    def run(self, upto=None):
        upto = self.m if upto is None else upto
        while self.stage < upto:
            self.advance()
        return self

    def densities(self, xp):
        return self.C @ self.layers.traces(xp)

    def traces(self, xp):
        """Trace channels of G^(stage)(., x')."""
        return self.layers.traces(xp) - self.layers.T @ self.densities(xp)


class RecursiveGreen:
    """Evaluator for G from a completed recursion, interchangeable with GreenOperator."""

    def __init__(self, state):
        if state.stage != state.m:
            raise ValueError("recursion is not complete")
        self.state = state
        self.fs = state.fs
        self.bcs = state.bcs
        self.bd = state.bd
        self.layers = state.layers
        self.dc = state.dc
        self.B = state.B
        self._fallback = None

    @property
    def dim(self):
        return self.bd.dim

    @property
    def condition_estimate(self):
        return max(s.condition_estimate for s in self.state.stages)

    @property
    def rank_deficient(self):
        return any(s.solver.rank_deficient for s in self.state.stages)

    def densities(self, xp):
        return self.state.densities(xp)

    def data_density(self, phi_flat):
        """Density whose potential carries boundary data, built stage by stage."""
        phi_flat = np.asarray(phi_flat, dtype=complex)
        if phi_flat.shape[0] != self.B.shape[0]:
            raise ShapeMismatch(f"boundary data has {phi_flat.shape[0]} rows, conditions need "
                                f"{self.B.shape[0]}")
        T = self.layers.T
        if self.rank_deficient:
            # a singular stage cannot carry its own data; solve B T J = Phi directly
            if self._fallback is None:
                BT = self.B @ T
                self._fallback = ConsistentSolver(BT, np.linalg.norm(np.abs(self.B) @ np.abs(T), 2),
                                                  lambda c: StageSingular(self.state.m, c), force_svd=True)
            return self._fallback.solve(phi_flat, np.linalg.norm(phi_flat, axis=0))
        P = T.shape[0]
        J = np.zeros((P,) + phi_flat.shape[1:], dtype=complex)
        # replay: stage j fixes condition j with a correction invisible to conditions < j
        C = np.zeros((P, P), dtype=complex)
        Bad = self.state.Bad
        for k, st in enumerate(self.state.stages):
            rows = self.dc.block(k)
            Bj = self.B[rows]
            r = phi_flat[rows] - Bj @ T @ J
            if st.solver.rank_deficient:
                U, s, Vh = st.solver._svd
                c = Vh.conj().T @ ((U.conj().T @ r) / (s[:, None] if r.ndim == 2 else s))
            else:
                c = sla.lu_solve(st.solver._lu, r)
            right = Bad[:, rows] - C @ T @ Bad[:, rows]
            J = J + right @ c
            left = Bj - Bj @ T @ C
            C = C + right @ self._stage_inverse(st) @ left
        return J

    @staticmethod
    def _stage_inverse(st):
        if st.solver.rank_deficient:
            U, s, Vh = st.solver._svd
            return Vh.conj().T @ (U.conj().T / s[:, None])
        return sla.lu_solve(st.solver._lu, np.eye(st.g.shape[0], dtype=complex))

    def matrix(self, x, xp):
        return self.layers.E(x, xp) - self.layers.right_rows(x) @ self.densities(xp)

    def d1_matrix(self, x, xp, side=None):
        return self.layers.dE(x, xp, side=side) - self.layers.right_rows_d1(x, side=side) @ self.densities(xp)

    def __call__(self, x, xp):
        return eval_G(self, x, xp)

    def boundary_traces(self, xp):
        return self.state.traces(xp)

    def bc_residual(self, xp):
        return float(np.max(np.abs(self.B @ self.boundary_traces(xp))))


def recursive_state(fs, bcs, bd, upto=None):
    return RecursiveState(fs, bcs, bd).run(upto)


def recursive_green(fs, bcs, bd):
    """G built by peeling off one condition at a time; raises StageSingular(j)."""
    return RecursiveGreen(recursive_state(fs, bcs, bd))


def stage_residual(state, j, xp):
    """max |b_j trace(G^(stage)(., x'))| for condition j (1-based)."""
    if not 1 <= j <= state.m:
        raise ValueError(f"condition index must be in 1..{state.m}")
    rows = state.dc.block(j - 1)
    return float(np.max(np.abs(state.B[rows] @ state.traces(xp))))


__all__ = [
    "BlockMatrix2x2",
    "ILL_POSED_THRESHOLD",
    "RecursiveGreen",
    "RecursiveState",
    "block_inverse",
    "recursive_green",
    "recursive_state",
    "stage_residual",
]
