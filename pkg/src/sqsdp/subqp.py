"""Stabilized quadratic-SDP subproblem solver.

The subproblem at an iterate (x, y, Z) with penalty sigma is

    minimize_(xi, Sigma)  <c, xi> + <M xi, xi>/2 + sigma ||Sigma||_F^2 / 2
    subject to            A(x) xi + sigma (Sigma - T) PSD,

with c = grad f - grad g s, s = y - g/sigma, T = Z - X/sigma and
M = H + grad g grad g^T / sigma positive definite.  For fixed xi the optimal
Sigma has the closed form [T - A(x) xi / sigma]_+, which reduces the problem
to an unconstrained, C^1, strongly convex function of xi alone:

    theta(xi) = <c, xi> + <M xi, xi>/2 + sigma ||[T - A(x) xi / sigma]_+||_F^2 / 2.

theta is minimized by a damped semismooth Newton method whose generalized
Jacobian M + A* DPi A / sigma is positive definite (DPi is the projection
derivative).  The reduction is exercised against an independent
projected-gradient oracle on the original (xi, Sigma) formulation in the
test suite.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import symkernel
from .exceptions import SubproblemError
from .model import NsdpProblem

Array = np.ndarray

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SubproblemData:
    """Frozen per-iterate quantities defining one subproblem.

    ``G`` is the svec matrix of the constraint derivatives (q x n, column j
    is svec(A_j)), so svec(A(x)u) = G u and A*(x)U = G^T svec(U).
    """

    c: Array
    M: Array
    sigma: float
    T: Array
    A_stack: Array
    G: Array
    s: Array
    g_x: Array
    jac_g: Array
    Z: Array

    @property
    def n(self) -> int:
        return self.c.shape[0]


def build_subproblem_data(
    p: NsdpProblem, x: Array, y: Array, Z: Array, sigma: float, H: Array
) -> SubproblemData:
    """Assemble c, M, s, T and the constraint svec matrix at (x, y, Z, sigma)."""
    if not sigma > 0.0:
        raise ValueError(f"subproblem: sigma must be positive, got {sigma}")
    g_x = np.asarray(p.eval_g(x), dtype=float).reshape(p.m)
    jac_g = np.asarray(p.eval_jac_g(x), dtype=float).reshape(p.n, p.m)
    s = y - g_x / sigma if p.m else np.zeros(0)
    T = symkernel.symmetrize(Z - p.eval_X(x) / sigma)
    M = H + symkernel.symmetrize(jac_g @ jac_g.T) / sigma if p.m else H
    c = np.asarray(p.eval_grad_f(x), dtype=float) - (jac_g @ s if p.m else 0.0)
    stack = p.constraint_grad_stack(x)
    G = np.stack([symkernel.svec(stack[j]) for j in range(p.n)], axis=1)
    return SubproblemData(
        c=c, M=symkernel.symmetrize(M), sigma=sigma, T=T, A_stack=stack,
        G=G, s=s, g_x=g_x, jac_g=jac_g, Z=np.asarray(Z, dtype=float),
    )


@dataclass(frozen=True)
class SubproblemSolution:
    """Minimizer (xi, Sigma), trial multipliers and the KKT residuals.

    ``kkt_residual`` is the stationarity norm ||c + M xi - A* Sigma||; the
    remaining three residuals measure projection consistency, cone violation
    of the slack A xi + sigma (Sigma - T), and complementarity.
    """

    xi: Array
    Sigma: Array
    y_trial: Array
    Z_trial: Array
    kkt_residual: float
    projection_residual: float
    cone_residual: float
    complementarity_residual: float
    newton_iters: int
    theta_trace: tuple = ()


def _inner_matrix(T: Array, G: Array, sigma: float, xi: Array) -> Array:
    """W(xi) = T - A(x) xi / sigma in matrix form."""
    d = T.shape[0]
    return T - symkernel.smat(G @ xi) / sigma if xi.shape[0] else T.copy().reshape(d, d)


def reduced_objective(data: SubproblemData, xi: Array) -> tuple:
    """theta(xi) and its gradient c + M xi - A* [T - A xi / sigma]_+."""
    xi = np.asarray(xi, dtype=float).reshape(data.n)
    w, pv = symkernel.eig_sym(_inner_matrix(data.T, data.G, data.sigma, xi))
    sv = symkernel.svec(symkernel.psd_from_eig(w, pv))
    value = float(data.c @ xi) + 0.5 * float(xi @ (data.M @ xi)) + 0.5 * data.sigma * float(sv @ sv)
    grad = data.c + data.M @ xi - data.G.T @ sv
    return value, grad


def _theta_value(data: SubproblemData, xi: Array) -> float:
    sv = symkernel.svec(symkernel.psd_project(_inner_matrix(data.T, data.G, data.sigma, xi)))
    return float(data.c @ xi) + 0.5 * float(xi @ (data.M @ xi)) + 0.5 * data.sigma * float(sv @ sv)


def _solve_newton_system(J: Array, rhs: Array) -> Array:
    """Solve J p = rhs for PD J, escalating a tiny ridge if Cholesky balks."""
    n = J.shape[0]
    ridge = 0.0
    scale = max(1.0, float(np.trace(J)) / n)
    for _ in range(6):
        try:
            np.linalg.cholesky(J + ridge * np.eye(n) if ridge else J)
        except np.linalg.LinAlgError:
            ridge = max(ridge * 100.0, 1e-14 * scale)
            continue
        return np.linalg.solve(J + ridge * np.eye(n) if ridge else J, rhs)
    return rhs.copy()  # caller falls back to the gradient direction


def _finalize(data: SubproblemData, xi: Array, Sigma: Array, gnorm: float, iters: int,
              theta_trace: tuple = ()):
    sigma = data.sigma
    y_trial = data.s - (data.jac_g.T @ xi) / sigma if data.s.shape[0] else np.zeros(0)
    W = _inner_matrix(data.T, data.G, sigma, xi)
    proj_res = float(np.linalg.norm(Sigma - symkernel.psd_project(W)))
    slack = symkernel.symmetrize(symkernel.smat(data.G @ xi) + sigma * (Sigma - data.T))
    lam_min = float(symkernel.eig_sym(slack).eigenvalues[0])
    return SubproblemSolution(
        xi=xi,
        Sigma=Sigma,
        y_trial=y_trial,
        Z_trial=Sigma,
        kkt_residual=gnorm,
        projection_residual=proj_res,
        cone_residual=max(0.0, -lam_min),
        complementarity_residual=abs(float(np.tensordot(Sigma, slack))),
        newton_iters=iters,
        theta_trace=theta_trace,
    )


def solve_subproblem(
    data: SubproblemData, tol: float = 1e-10, max_iter: int = 100
) -> SubproblemSolution:
    """Minimize theta by damped semismooth Newton from xi = 0.

    Stops when the stationarity norm falls below ``tol`` or below the
    floating-point floor of the gradient evaluation (the residual is a
    difference of terms that can be many orders larger than the target, so an
    absolute tolerance alone is unattainable at stiff penalties).  Raises
    SubproblemError carrying the best iterate if the budget runs out.
    """
    n = data.n
    sigma = data.sigma
    try:
        np.linalg.cholesky(data.M)
    except np.linalg.LinAlgError as exc:
        raise ValueError("subproblem: M is not positive definite") from exc

    xi = np.zeros(n)
    best = None
    best_gnorm = np.inf
    c_norm = float(np.linalg.norm(data.c))
    g_opnorm = float(np.linalg.norm(data.G, 2))
    iters = 0
    thetas = []
    for _ in range(max_iter + 1):
        W = _inner_matrix(data.T, data.G, sigma, xi)
        w, pv = symkernel.eig_sym(W)
        Sigma = symkernel.psd_from_eig(w, pv)
        sv = symkernel.svec(Sigma)
        grad = data.c + data.M @ xi - data.G.T @ sv
        gnorm = float(np.linalg.norm(grad))
        theta_here = float(data.c @ xi) + 0.5 * float(xi @ (data.M @ xi)) + 0.5 * sigma * float(sv @ sv)
        thetas.append(theta_here)
        if gnorm < best_gnorm:
            best = (xi.copy(), Sigma, gnorm)
            best_gnorm = gnorm
        # Achievable accuracy of the gradient evaluation: the projection
        # inherits the eigensolver's backward error, proportional to ||W||.
        floor = 8.0 * _EPS * (
            1.0 + c_norm + float(np.linalg.norm(data.M @ xi))
            + g_opnorm * (float(np.linalg.norm(sv)) + float(np.linalg.norm(W)))
        )
        if gnorm <= max(tol, floor):
            return _finalize(data, xi, Sigma, gnorm, iters, tuple(thetas))
        if iters == max_iter:
            break
        J = symkernel.symmetrize(
            data.M + symkernel.loewner_gram(w, pv, data.A_stack) / sigma
        )
        theta0 = theta_here
        # Damped Newton with Levenberg retries: the generalized Jacobian can
        # mix curvature scales nu1 .. 1/sigma, and at stiff penalties the
        # unregularized direction may make no measurable progress.
        accepted = False
        mu = 0.0
        mu_base = 1e-8 * max(1.0, float(np.trace(J)) / n)
        for _ in range(8):
            p_dir = _solve_newton_system(J + mu * np.eye(n) if mu else J, -grad)
            slope = float(grad @ p_dir)
            if not slope < 0.0:
                p_dir = -grad
                slope = -gnorm * gnorm
            # Full step first, accepted on residual contraction.  Near the
            # minimizer the per-step decrease of theta falls below its own
            # floating-point noise, so a merit-only test stalls; the gradient
            # evaluation stays accurate there.
            xi_trial = xi + p_dir
            _, grad_trial = reduced_objective(data, xi_trial)
            if float(np.linalg.norm(grad_trial)) <= 0.9 * gnorm:
                accepted = True
                break
            step = 1.0
            for _ in range(30):
                xi_trial = xi + step * p_dir
                if _theta_value(data, xi_trial) <= theta0 + 1e-4 * step * slope:
                    accepted = True
                    break
                step *= 0.5
            if accepted:
                break
            mu = max(30.0 * mu, mu_base)
        if not accepted:
            break
        xi = xi_trial
        iters += 1

    xi_b, Sigma_b, gnorm_b = best
    raise SubproblemError(
        f"subproblem Newton stalled at ||grad theta|| = {gnorm_b:.3e} > tol = {tol:.1e} "
        f"after {iters} steps",
        best=_finalize(data, xi_b, Sigma_b, gnorm_b, iters, tuple(thetas)),
    )


class DescentCheck(NamedTuple):
    passed: bool
    slack: float


def descent_check(
    data: SubproblemData, solution: SubproblemSolution, merit_gradient: Array
) -> DescentCheck:
    """Verify <grad F, xi> <= -<M xi, xi> - sigma ||Sigma - Z||_F^2.

    The inequality is checked with additive slack 1e-8 (1 + ||xi||^2); the
    returned slack is the margin including that allowance (nonnegative iff
    the check passes).
    """
    xi = solution.xi
    lhs = float(merit_gradient @ xi)
    diff = symkernel.svec(solution.Sigma - data.Z)
    rhs = -float(xi @ (data.M @ xi)) - data.sigma * float(diff @ diff)
    allowance = 1e-8 * (1.0 + float(xi @ xi))
    slack = rhs + allowance - lhs
    return DescentCheck(passed=slack >= 0.0, slack=slack)


def descent_check_projected(
    data: SubproblemData, solution: SubproblemSolution, merit_gradient: Array
) -> DescentCheck:
    """Variant of descent_check measured against [T]_+ instead of Z.

    This form follows from stationarity c + M xi = A* Sigma and firm
    nonexpansiveness of the projection, so it holds at every exact optimum
    regardless of the incoming multiplier; the Z form coincides with it only
    when Z = [T]_+ and can fail otherwise.
    """
    xi = solution.xi
    lhs = float(merit_gradient @ xi)
    diff = symkernel.svec(solution.Sigma - symkernel.psd_project(data.T))
    rhs = -float(xi @ (data.M @ xi)) - data.sigma * float(diff @ diff)
    allowance = 1e-8 * (1.0 + float(xi @ xi))
    slack = rhs + allowance - lhs
    return DescentCheck(passed=slack >= 0.0, slack=slack)
