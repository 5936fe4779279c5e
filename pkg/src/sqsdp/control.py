"""Residual measures, the V/O/M/F multiplier update, and the penalty rule.

The distance-to-KKT functions are

    r_V(x)       = ||g(x)|| + [lambda_max(-X(x))]_+
    r_O(x, y, Z) = ||grad_x L(x, y, Z)|| + ||X(x) Z||_F          (plain product)
    Phi = r_V + kappa r_O,   Psi = kappa r_V + r_O,   r = r_V + r_O.

Each outer iteration is tagged V, O, M or F by the update cascade: adopt the
trial multipliers when Phi (resp. Psi) halves below its budget, else run an
augmented-Lagrangian multiplier update with box/spectral clamping when the
merit gradient is small, else change nothing.
"""

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import symkernel
from .model import MultiplierPair, NsdpProblem, lagrangian_grad

Array = np.ndarray


@dataclass(frozen=True)
class ControlParams:
    """kappa in (0,1) and the multiplier clamp bounds."""

    kappa: float = 1e-5
    y_max: float = 1e6
    z_max: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not (self.y_max > 0.0 and self.z_max > 0.0):
            raise ValueError("y_max and z_max must be positive")


@dataclass(frozen=True)
class ControlState:
    """Budgets (phi, psi, gamma) and the penalty sigma; all strictly positive."""

    phi: float
    psi: float
    gamma: float
    sigma: float

    def __post_init__(self):
        for name in ("phi", "psi", "gamma", "sigma"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"ControlState.{name} must be positive")


class StepTag(NamedTuple):
    """Branch taken at one outer iteration: kind in {V, O, M, F}."""

    kind: str
    k: int


def r_V(p: NsdpProblem, x: Array) -> float:
    """Feasibility violation ||g(x)|| + [lambda_max(-X(x))]_+."""
    val = float(np.linalg.norm(p.eval_g(x))) if p.m else 0.0
    lam_max = float(symkernel.eig_sym(-p.eval_X(x)).eigenvalues[-1])
    return val + max(0.0, lam_max)


def r_O(p: NsdpProblem, x: Array, y: Array, Z: Array) -> float:
    """Optimality violation ||grad_x L|| + ||X(x) Z||_F."""
    stat = float(np.linalg.norm(lagrangian_grad(p, x, y, Z)))
    return stat + float(np.linalg.norm(p.eval_X(x) @ Z))


def r_total(p: NsdpProblem, x: Array, y: Array, Z: Array) -> float:
    return r_V(p, x) + r_O(p, x, y, Z)


def phi_psi(p: NsdpProblem, x: Array, y: Array, Z: Array, cp: ControlParams) -> tuple:
    rv = r_V(p, x)
    ro = r_O(p, x, y, Z)
    return rv + cp.kappa * ro, cp.kappa * rv + ro


def cakkt_residual(p: NsdpProblem, x: Array, Z: Array) -> float:
    """||X(x) o Z||_F under the Jordan product."""
    X = p.eval_X(x)
    return float(np.linalg.norm(symkernel.jordan_product(X, symkernel.symmetrize(Z))))


def takkt_residual(p: NsdpProblem, x: Array, Z: Array) -> float:
    """|<X(x), Z>|."""
    return abs(float(np.tensordot(p.eval_X(x), Z)))


def procedure_update(
    p: NsdpProblem,
    x_next: Array,
    trial: MultiplierPair,
    current: MultiplierPair,
    state: ControlState,
    merit_grad_norm_at_next: float,
    cp: ControlParams,
    k: int = 0,
) -> tuple:
    """One pass of the V/O/M/F cascade; returns (pair, state, tag).

    The returned state leaves sigma untouched (the penalty has its own rule,
    see penalty_update).
    """
    phi, psi = phi_psi(p, x_next, trial.y, trial.Z, cp)
    if phi <= 0.5 * state.phi:
        return trial, replace(state, phi=0.5 * state.phi), StepTag("V", k)
    if psi <= 0.5 * state.psi:
        return trial, replace(state, psi=0.5 * state.psi), StepTag("O", k)
    if merit_grad_norm_at_next <= state.gamma:
        if p.m:
            y_new = np.clip(
                current.y - np.asarray(p.eval_g(x_next), dtype=float) / state.sigma,
                -cp.y_max,
                cp.y_max,
            )
        else:
            y_new = np.zeros(0)
        # deliberately a double projection: the box clamp composes with [.]_+
        z_new = symkernel.box_project_spectral(
            symkernel.psd_project(current.Z - p.eval_X(x_next) / state.sigma), cp.z_max
        )
        pair = MultiplierPair(y=y_new, Z=z_new)
        return pair, replace(state, gamma=0.5 * state.gamma), StepTag("M", k)
    return current, state, StepTag("F", k)


def penalty_update(
    state: ControlState,
    merit_grad_norm_at_next: float,
    r_next: float,
    sigma_min: float = 1e-10,
) -> float:
    """sigma <- max(sigma_min, min(sigma/2, r_next^(3/2))) when the merit
    gradient at the new point is within gamma; otherwise sigma is kept.

    sigma_min > 0 prevents exact division by zero downstream; set it to 0 to
    recover the unfloored rule.
    """
    if merit_grad_norm_at_next <= state.gamma:
        return max(sigma_min, min(0.5 * state.sigma, r_next ** 1.5))
    return state.sigma

