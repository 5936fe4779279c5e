"""Nonlinear SDP problem abstraction.

A problem is an oracle bundle for

    minimize f(x)  subject to  g(x) = 0,  X(x) PSD,

with f: R^n -> R, g: R^n -> R^m (m may be 0) and X: R^n -> S^d.  The solver
only sees the oracles; they must be pure (same input, same output) and are
treated as read-only, so independent solves can share a problem object.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import symkernel
from .exceptions import ConfigurationError, DimensionError

Array = np.ndarray


@dataclass
class NsdpProblem:
    """Oracle bundle for one nonlinear SDP instance.

    ``eval_jac_g`` returns the transposed Jacobian (n x m, column i is the
    gradient of g_i).  ``eval_A(x, j)`` is the partial derivative of X with
    respect to x_j (0-based j); outputs must be exactly symmetric.
    ``eval_hess_lagrangian(x, y, Z)`` is optional; see hessian_or_approx.
    ``x_ref`` optionally records a strictly feasible point when one is known
    by construction (used by generated test instances).
    """

    n: int
    m: int
    d: int
    eval_f: Callable[[Array], float]
    eval_grad_f: Callable[[Array], Array]
    eval_g: Callable[[Array], Array]
    eval_jac_g: Callable[[Array], Array]
    eval_X: Callable[[Array], Array]
    eval_A: Callable[[Array, int], Array]
    eval_hess_lagrangian: Optional[Callable[[Array, Array, Array], Array]] = None
    name: str = "problem"
    x_ref: Optional[Array] = None

    def constraint_grad_stack(self, x: Array) -> Array:
        """All A_j(x) as an (n, d, d) stack."""
        out = np.empty((self.n, self.d, self.d))
        for j in range(self.n):
            out[j] = self.eval_A(x, j)
        return out


@dataclass(frozen=True)
class MultiplierPair:
    """Equality multipliers y (length m) and conic multiplier Z (d x d symmetric)."""

    y: Array
    Z: Array


def _check_x(p: NsdpProblem, x: Array) -> Array:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.n:
        raise DimensionError(f"{p.name}: x has length {x.shape[0]}, expected {p.n}")
    return x


def apply_A(p: NsdpProblem, x: Array, u: Array) -> Array:
    """A(x)u = u_1 A_1(x) + ... + u_n A_n(x)."""
    x = _check_x(p, x)
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != p.n:
        raise DimensionError(f"{p.name}: u has length {u.shape[0]}, expected {p.n}")
    out = np.zeros((p.d, p.d))
    for j in range(p.n):
        if u[j] != 0.0:
            out += u[j] * p.eval_A(x, j)
    return 0.5 * (out + out.T)


def apply_A_adjoint(p: NsdpProblem, x: Array, U: Array) -> Array:
    """A*(x)U = (<A_1(x), U>, ..., <A_n(x), U>)."""
    x = _check_x(p, x)
    U = np.asarray(U, dtype=float)
    if U.shape != (p.d, p.d):
        raise DimensionError(f"{p.name}: U has shape {U.shape}, expected ({p.d}, {p.d})")
    out = np.empty(p.n)
    for j in range(p.n):
        out[j] = float(np.tensordot(p.eval_A(x, j), U))
    return out


def lagrangian_value(p: NsdpProblem, x: Array, y: Array, Z: Array) -> float:
    """L(x, y, Z) = f(x) - <g(x), y> - <X(x), Z>."""
    x = _check_x(p, x)
    return (
        float(p.eval_f(x))
        - float(np.dot(p.eval_g(x), y))
        - float(np.tensordot(p.eval_X(x), Z))
    )


def lagrangian_grad(p: NsdpProblem, x: Array, y: Array, Z: Array) -> Array:
    """grad_x L = grad f(x) - grad g(x) y - A*(x) Z."""
    x = _check_x(p, x)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != p.m:
        raise DimensionError(f"{p.name}: y has length {y.shape[0]}, expected {p.m}")
    out = np.asarray(p.eval_grad_f(x), dtype=float).copy()
    if p.m:
        out -= p.eval_jac_g(x) @ y
    out -= apply_A_adjoint(p, x, Z)
    return out


@dataclass(frozen=True)
class HessianPolicy:
    """How to supply and regularize H in the subproblem quadratic.

    The returned H satisfies lambda_min(H + (1/sigma) Jg Jg^T) >= nu1 (via the
    smallest nonnegative diagonal shift) and lambda_max(H) <= nu2 (eigenvalue
    clip).  When the problem has no Hessian oracle, the identity is used if
    ``identity_fallback`` is set, otherwise the call is a configuration error.
    """

    nu1: float = 1e-8
    nu2: float = 1e8
    identity_fallback: bool = True


DEFAULT_HESSIAN_POLICY = HessianPolicy()


def hessian_or_approx(
    p: NsdpProblem,
    x: Array,
    y: Array,
    Z: Array,
    sigma: float,
    policy: HessianPolicy = DEFAULT_HESSIAN_POLICY,
) -> Array:
    """Regularized Lagrangian Hessian (or identity fallback) for the subproblem."""
    if not sigma > 0.0:
        raise ValueError(f"hessian_or_approx: sigma must be positive, got {sigma}")
    x = _check_x(p, x)
    if p.eval_hess_lagrangian is not None:
        h = symkernel.symmetrize(np.asarray(p.eval_hess_lagrangian(x, y, Z), dtype=float))
        if h.shape != (p.n, p.n):
            raise DimensionError(
                f"{p.name}: Hessian has shape {h.shape}, expected ({p.n}, {p.n})"
            )
    elif policy.identity_fallback:
        h = np.eye(p.n)
    else:
        raise ConfigurationError(
            f"{p.name}: no Lagrangian Hessian oracle and identity fallback is disabled"
        )
    jac = np.asarray(p.eval_jac_g(x), dtype=float).reshape(p.n, p.m)
    gram = (jac @ jac.T) / sigma if p.m else np.zeros((p.n, p.n))
    lam_min = float(symkernel.eig_sym(h + symkernel.symmetrize(gram)).eigenvalues[0])
    delta = max(0.0, policy.nu1 - lam_min)
    if delta > 0.0:
        h = h + delta * np.eye(p.n)
    w, pv = symkernel.eig_sym(h)
    if w[-1] > policy.nu2:
        h = symkernel.symmetrize((pv * np.minimum(w, policy.nu2)) @ pv.T)
        # clipping can in principle re-break the lower bound; assert per call
        w_new = symkernel.eig_sym(h + symkernel.symmetrize(gram)).eigenvalues
        if w_new[0] < policy.nu1 - 1e-10 * max(1.0, abs(w_new[0])):
            raise AssertionError(
                f"{p.name}: Hessian regularization bounds are inconsistent "
                f"(lambda_min = {w_new[0]:.3e} < nu1 after the nu2 clip)"
            )
    return h


@dataclass(frozen=True)
class DerivativeCheck:
    """Max relative errors of the analytic oracles against central differences."""

    grad_f_error: float
    jac_g_error: float
    constraint_grad_error: float
    tolerance: float
    flagged: tuple = ()

    @property
    def passed(self) -> bool:
        return (
            self.grad_f_error <= self.tolerance
            and self.jac_g_error <= self.tolerance
            and self.constraint_grad_error <= self.tolerance
        )

    def max_error(self) -> float:
        return max(self.grad_f_error, self.jac_g_error, self.constraint_grad_error)


def check_derivatives(p: NsdpProblem, x: Array, tolerance: float = 1e-6) -> DerivativeCheck:
    """Compare gradient oracles against central finite differences at x.

    Step per coordinate: 1e-6 max(1, |x_j|).  Relative errors are measured
    against max(1, |analytic|) entrywise; entries above the tolerance are
    listed in ``flagged`` as (oracle name, index) pairs.
    """
    x = _check_x(p, x)
    flagged = []

    def fd(oracle, j, h):
        e = np.zeros(p.n)
        e[j] = h
        return (np.asarray(oracle(x + e), dtype=float) - np.asarray(oracle(x - e), dtype=float)) / (2 * h)

    grad_f = np.asarray(p.eval_grad_f(x), dtype=float)
    jac_g = np.asarray(p.eval_jac_g(x), dtype=float).reshape(p.n, p.m)
    err_f = 0.0
    err_g = 0.0
    err_a = 0.0
    for j in range(p.n):
        h = 1e-6 * max(1.0, abs(x[j]))
        df = float(fd(p.eval_f, j, h))
        e = abs(df - grad_f[j]) / max(1.0, abs(grad_f[j]))
        if e > tolerance:
            flagged.append(("grad_f", j))
        err_f = max(err_f, e)
        if p.m:
            dg = fd(p.eval_g, j, h)
            rel = np.abs(dg - jac_g[j]) / np.maximum(1.0, np.abs(jac_g[j]))
            for i in np.nonzero(rel > tolerance)[0]:
                flagged.append(("jac_g", (j, int(i))))
            err_g = max(err_g, float(rel.max()))
        da = fd(p.eval_X, j, h)
        aj = np.asarray(p.eval_A(x, j), dtype=float)
        rel = np.abs(da - aj) / np.maximum(1.0, np.abs(aj))
        if float(rel.max()) > tolerance:
            flagged.append(("A", j))
        err_a = max(err_a, float(rel.max()))
    return DerivativeCheck(err_f, err_g, err_a, tolerance, tuple(flagged))
