"""Built-in benchmark problems and the seeded instance generator.

Randomness comes from splitmix64 (the published 0x9E3779B97F4A7C15 /
0xBF58476D1CE4E5B9 / 0x94D049BB133111EB constants), so a seed reproduces the
same instance on any platform; uniform draws scale the top 53 bits of the
state into [0, 1).
"""

from dataclasses import dataclass

import numpy as np

from . import symkernel
from .model import NsdpProblem

Array = np.ndarray

_MASK = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator; uniform variates via 53-bit scaling."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform on [0, 1)."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniform_pm1(self) -> float:
        """Uniform on [-1, 1)."""
        return 2.0 * self.uniform() - 1.0

    def matrix(self, rows: int, cols: int) -> Array:
        out = np.empty((rows, cols))
        for i in range(rows):
            for j in range(cols):
                out[i, j] = self.uniform_pm1()
        return out

    def vector(self, size: int) -> Array:
        return self.matrix(1, size)[0]


def problem_no_kkt() -> NsdpProblem:
    """minimize 2x subject to [[0, -x], [-x, 1]] PSD.

    The feasible set is {0}; the minimizer x = 0 admits no KKT multiplier,
    which makes the instance a stress test for multiplier-free convergence.
    """
    a1 = np.array([[0.0, -1.0], [-1.0, 0.0]])

    def eval_X(x):
        return np.array([[0.0, -x[0]], [-x[0], 1.0]])

    return NsdpProblem(
        n=1,
        m=0,
        d=2,
        eval_f=lambda x: 2.0 * x[0],
        eval_grad_f=lambda x: np.array([2.0]),
        eval_g=lambda x: np.zeros(0),
        eval_jac_g=lambda x: np.zeros((1, 0)),
        eval_X=eval_X,
        eval_A=lambda x, j: a1.copy(),
        eval_hess_lagrangian=lambda x, y, Z: np.zeros((1, 1)),
        name="no-kkt",
    )


@dataclass(frozen=True)
class DegenerateInstance:
    """Seeded cost matrix for the degenerate family; every |C_ij| <= 1."""

    n_mat: int
    seed: int
    C: Array


def degenerate_instance(n_mat: int, seed: int) -> DegenerateInstance:
    rng = SplitMix64(seed)
    c = symkernel.symmetrize(rng.matrix(n_mat, n_mat))
    return DegenerateInstance(n_mat=n_mat, seed=seed, C=c)


def problem_degenerate(n_mat: int, seed: int) -> NsdpProblem:
    """minimize <C, X> s.t. X_ii = 1, <J, X> = 0, X PSD, in x = svec(X).

    J is the all-ones matrix, so e^T X e = 0 with unit diagonal forces X
    singular: no strictly feasible point exists and Slater's condition fails
    by design.  All constraints are affine in the svec coordinates.
    """
    if n_mat < 2:
        raise ValueError(f"problem_degenerate: n_mat must be >= 2, got {n_mat}")
    inst = degenerate_instance(n_mat, seed)
    d = n_mat
    n = d * (d + 1) // 2
    m = d + 1
    c_vec = symkernel.svec(inst.C)

    jac = np.empty((n, m))
    for i in range(d):
        e_ii = np.zeros((d, d))
        e_ii[i, i] = 1.0
        jac[:, i] = symkernel.svec(e_ii)
    jac[:, d] = symkernel.svec(np.ones((d, d)))
    rhs = np.concatenate([np.ones(d), [0.0]])

    basis = np.empty((n, d, d))
    for j in range(n):
        e_j = np.zeros(n)
        e_j[j] = 1.0
        basis[j] = symkernel.smat(e_j)

    return NsdpProblem(
        n=n,
        m=m,
        d=d,
        eval_f=lambda x: float(c_vec @ x),
        eval_grad_f=lambda x: c_vec.copy(),
        eval_g=lambda x: jac.T @ x - rhs,
        eval_jac_g=lambda x: jac.copy(),
        eval_X=lambda x: symkernel.smat(np.asarray(x, dtype=float)),
        eval_A=lambda x, j: basis[j].copy(),
        eval_hess_lagrangian=lambda x, y, Z: np.zeros((n, n)),
        name=f"degenerate-n{n_mat}-seed{seed}",
    )


def problem_random_smooth(n: int, m: int, d: int, seed: int) -> NsdpProblem:
    """Convex quadratic objective, affine g and affine X, strictly feasible x0.

    X(x0) = I + E with ||E||_2 <= 0.4, so lambda_min(X(x0)) >= 0.6; x0 is
    recorded on the returned problem as ``x_ref``.  Draw order is fixed, so a
    seed fully determines the instance.
    """
    if n < 1 or m < 1 or d < 1:
        raise ValueError("problem_random_smooth: n, m, d must all be >= 1")
    if m > n:
        raise ValueError(f"problem_random_smooth: m = {m} may not exceed n = {n}")
    rng = SplitMix64(seed)
    r = rng.matrix(n, n)
    q_mat = symkernel.symmetrize(r.T @ r / n) + 0.1 * np.eye(n)
    q_lin = rng.vector(n)
    x0 = rng.vector(n)
    jac = rng.matrix(n, m)
    e = symkernel.symmetrize(rng.matrix(d, d))
    snorm = float(np.max(np.abs(symkernel.eig_sym(e).eigenvalues)))
    e = e * (0.4 / max(0.4, snorm))
    x_base = np.eye(d) + e
    stack = np.empty((n, d, d))
    for j in range(n):
        stack[j] = symkernel.symmetrize(rng.matrix(d, d))

    def eval_X(x):
        out = x_base.copy()
        dx = np.asarray(x, dtype=float) - x0
        for j in range(n):
            out = out + dx[j] * stack[j]
        return symkernel.symmetrize(out)

    return NsdpProblem(
        n=n,
        m=m,
        d=d,
        eval_f=lambda x: 0.5 * float(x @ (q_mat @ x)) + float(q_lin @ x),
        eval_grad_f=lambda x: q_mat @ x + q_lin,
        eval_g=lambda x: jac.T @ (np.asarray(x, dtype=float) - x0),
        eval_jac_g=lambda x: jac.copy(),
        eval_X=eval_X,
        eval_A=lambda x, j: stack[j].copy(),
        eval_hess_lagrangian=lambda x, y, Z: q_mat.copy(),
        name=f"random-n{n}-m{m}-d{d}-seed{seed}",
        x_ref=x0.copy(),
    )
