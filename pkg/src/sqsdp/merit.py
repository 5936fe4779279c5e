"""Augmented-Lagrangian merit function and the feasibility measure.

    F(x; sigma, y, Z) = f(x) + ||sigma y - g(x)||^2 / (2 sigma)
                             + ||[sigma Z - X(x)]_+||_F^2 / (2 sigma)

    P(x) = ||g(x)||^2 / 2 + ||[-X(x)]_+||_F^2 / 2

F is C^1 because w -> ||[w]_+||^2 / 2 is, with gradient [w]_+; no smoothing
is applied.  Matrix norms go through svec so the kernel isometry is the only
norm code path.
"""

from dataclasses import dataclass

import numpy as np

from . import symkernel
from .model import NsdpProblem, apply_A_adjoint

Array = np.ndarray


@dataclass(frozen=True)
class MeritParams:
    """Fixed (sigma, y, Z) against which the merit is evaluated in x."""

    sigma: float
    y: Array
    Z: Array

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"MeritParams: sigma must be positive, got {self.sigma}")


def merit_value(p: NsdpProblem, x: Array, mp: MeritParams) -> float:
    val = float(p.eval_f(x))
    sigma = mp.sigma
    if p.m:
        rv = sigma * mp.y - np.asarray(p.eval_g(x), dtype=float)
        val += float(rv @ rv) / (2.0 * sigma)
    proj = symkernel.psd_project(sigma * mp.Z - p.eval_X(x))
    s = symkernel.svec(proj)
    val += float(s @ s) / (2.0 * sigma)
    return val


def merit_grad(p: NsdpProblem, x: Array, mp: MeritParams) -> Array:
    """grad F = grad f - grad g (y - g/sigma) - A* [Z - X/sigma]_+."""
    sigma = mp.sigma
    out = np.asarray(p.eval_grad_f(x), dtype=float).copy()
    if p.m:
        out -= p.eval_jac_g(x) @ (mp.y - np.asarray(p.eval_g(x), dtype=float) / sigma)
    proj = symkernel.psd_project(mp.Z - p.eval_X(x) / sigma)
    out -= apply_A_adjoint(p, x, proj)
    return out


def feasibility_P(p: NsdpProblem, x: Array) -> float:
    val = 0.0
    if p.m:
        g = np.asarray(p.eval_g(x), dtype=float)
        val += 0.5 * float(g @ g)
    s = symkernel.svec(symkernel.psd_project(-p.eval_X(x)))
    val += 0.5 * float(s @ s)
    return val


def feasibility_P_grad(p: NsdpProblem, x: Array) -> Array:
    """grad P = grad g(x) g(x) - A*(x) [-X(x)]_+."""
    out = np.zeros(p.n)
    if p.m:
        out += p.eval_jac_g(x) @ np.asarray(p.eval_g(x), dtype=float)
    out -= apply_A_adjoint(p, x, symkernel.psd_project(-p.eval_X(x)))
    return out
