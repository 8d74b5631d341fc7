"""Lax pair, hierarchy Hamiltonians and the resolvent-residue calculus.

The Lax matrix of the Gibbons-Hermsen system is

    L_ii = -p_i,   L_ik = -(b_i^T a_k)/(x_i - x_k)   (i != k),

with auxiliary matrix M_ik = 2 (b_i^T a_k)/(x_i - x_k)^2 (zero diagonal).
The conserved Hamiltonians are H_m = tr L^m. Residues at infinity of the
resolvent (zI - L)^-1 are evaluated exactly as matrix polynomials; a numeric
contour integrator is kept alongside as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollidingPoles, DimensionMismatch
from .phase import EPS_COLL, PhaseState


@dataclass(frozen=True)
class LaxData:
    """Matrices derived from a phase point: L, M, X = diag(x) and the
    pairing matrix R with R_ij = b_i^T a_j, which satisfies R = I + [L, X]."""

    L: np.ndarray
    M: np.ndarray
    X: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class Gradient:
    """Holomorphic partial derivatives of a scalar with respect to every
    phase variable; shapes match the generating PhaseState."""

    dx: np.ndarray
    dp: np.ndarray
    da: np.ndarray
    db: np.ndarray

    def max_abs(self):
        return max(
            float(np.max(np.abs(f))) for f in (self.dx, self.dp, self.da, self.db)
        )


def _pair_diff(x, eps_coll):
    """Pairwise differences x_i - x_k with a guarded unit diagonal."""
    n = x.shape[0]
    d = x[:, None] - x[None, :]
    off = ~np.eye(n, dtype=bool)
    if n > 1 and np.min(np.abs(d[off])) <= eps_coll:
        raise CollidingPoles("pole separation below collision floor")
    d[np.diag_indices(n)] = 1.0
    return d, off


def build_lax(state: PhaseState, eps_coll=EPS_COLL) -> LaxData:
    """Assemble L, M, X, R from a phase point."""
    d, off = _pair_diff(state.x, eps_coll)
    R = state.spin_pairings()
    L = np.where(off, -R / d, 0.0).astype(complex)
    np.fill_diagonal(L, -state.p)
    M = np.where(off, 2.0 * R / d**2, 0.0).astype(complex)
    return LaxData(L=L, M=M, X=np.diag(state.x), R=R)


def hamiltonian(state: PhaseState, m: int) -> complex:
    """H_m = tr L^m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    L = build_lax(state).L
    return complex(np.trace(np.linalg.matrix_power(L, m)))


def hamiltonians(state: PhaseState, kmax: int = 5) -> np.ndarray:
    """[H_1, ..., H_kmax] from one pass of repeated multiplication."""
    L = build_lax(state).L
    out = np.empty(kmax, dtype=complex)
    P = L.copy()
    for k in range(kmax):
        out[k] = np.trace(P)
        if k + 1 < kmax:
            P = P @ L
    return out


def hamiltonian_h2_direct(state: PhaseState) -> complex:
    """H_2 written directly in phase variables:
    sum_i p_i^2 - sum_{i != k} (b_i^T a_k)(b_k^T a_i)/(x_i - x_k)^2."""
    d, off = _pair_diff(state.x, EPS_COLL)
    R = state.spin_pairings()
    inter = np.where(off, R * R.T / d**2, 0.0)
    return complex(np.sum(state.p**2) - np.sum(inter))


def grad_hamiltonian(state: PhaseState, m: int) -> Gradient:
    """Analytic gradient of H_m = tr L^m by the chain rule
    d tr L^m = m tr(L^{m-1} dL), exploiting the sparsity of dL/dq:
    dL/dp_i = -E_ii, dL/dx_i = [E_ii, M]/2, and dL/da_i, dL/db_i touch
    only column i / row i off-diagonal entries."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lax = build_lax(state)
    L, M = lax.L, lax.M
    n = state.n_particles
    Lm1 = np.linalg.matrix_power(L, m - 1)
    d, off = _pair_diff(state.x, EPS_COLL)

    dp = -m * np.diag(Lm1)
    dx = 0.5 * m * np.diag(M @ Lm1 - Lm1 @ M)
    # dH/da_i^g = -m sum_{j != i} (L^{m-1})_{ij} b_j^g / (x_j - x_i)
    Wa = np.where(off, -m * Lm1 / (-d), 0.0)  # x_j - x_i = -(x_i - x_j)
    da = Wa @ state.b
    # dH/db_i^g = -m sum_{j != i} (L^{m-1})_{ji} a_j^g / (x_i - x_j)
    Wb = np.where(off, -m * Lm1.T / d, 0.0)
    db = Wb @ state.a
    assert da.shape == (n, state.spin_dim)
    return Gradient(dx=dx, dp=dp, da=da, db=db)


def poisson_bracket(state: PhaseState, f_grad: Gradient, g_grad: Gradient) -> complex:
    """Canonical bracket {f, g} = sum_i (f_x g_p - f_p g_x)
    + sum_{i,alpha} (f_a g_b - f_b g_a), complex-bilinear."""
    for g in (f_grad, g_grad):
        if g.dx.shape != state.x.shape or g.da.shape != state.a.shape:
            raise DimensionMismatch("gradient shapes do not match the state")
    def one_sided(f: Gradient, g: Gradient) -> complex:
        return complex(np.sum(f.dx * g.dp) + np.sum(f.da * g.db))

    # antisymmetrized evaluation: {f, f} vanishes identically instead of
    # accumulating last-ulp rounding noise from the two multiplication orders
    return one_sided(f_grad, g_grad) - one_sided(g_grad, f_grad)


def resolvent_residue(L, m: int, A=None):
    """Residues at z = infinity of the resolvent, evaluated exactly.

    Without A:   res_inf z^m (zI - L)^-1            = L^m.
    With A:      res_inf z^m (zI - L)^-1 A (zI - L)^-1
                 = sum_{j=0}^{m-1} L^j A L^{m-1-j}   (zero for m = 0).
    """
    L = np.asarray(L, dtype=complex)
    if m < 0:
        raise ValueError("m must be >= 0")
    if A is None:
        return np.linalg.matrix_power(L, m)
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(L)
    left = np.eye(L.shape[0], dtype=complex)  # L^j
    for j in range(m):
        out += left @ A @ np.linalg.matrix_power(L, m - 1 - j)
        left = left @ L
    return out


def contour_residue(L, m: int, A=None, nodes: int = 256, radius_factor: float = 2.0):
    """Trapezoid-rule contour oracle for :func:`resolvent_residue`.

    Integrates over the circle of radius radius_factor * (||L||_inf + 1),
    which encloses the spectrum since the spectral radius is bounded by any
    induced norm. Exponentially accurate in the node count.
    """
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    I = np.eye(n, dtype=complex)
    r = radius_factor * (np.linalg.norm(L, np.inf) + 1.0)
    acc = np.zeros((n, n), dtype=complex)
    for k in range(nodes):
        z = r * np.exp(2j * np.pi * k / nodes)
        G = np.linalg.inv(z * I - L)
        f = G if A is None else G @ A @ G
        # dz/(2 pi i) on the circle contributes z / nodes per node
        acc += (z ** (m + 1) / nodes) * f
    return acc
