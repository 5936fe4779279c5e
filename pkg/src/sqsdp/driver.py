"""Outer loop of the stabilized SQSDP method.

Per iteration: stopping tests on r = r_V + r_O, on gamma, and on the
iteration budget; a shortcut that skips the subproblem when the merit
gradient already (nearly) vanishes; otherwise subproblem solve, Armijo
backtracking on the augmented-Lagrangian merit, the V/O/M/F multiplier
update, and the penalty update.  Every run is recorded as a trace of
per-iteration rows; identical options, problem and seed reproduce the trace
bit for bit.
"""

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional

import numpy as np

from . import control, subqp, symkernel
from .control import ControlParams, ControlState
from .exceptions import LineSearchError, SolveAborted, SubproblemError
from .merit import MeritParams, merit_grad, merit_value
from .model import HessianPolicy, MultiplierPair, NsdpProblem, hessian_or_approx

Array = np.ndarray


class SolveStatus(str, Enum):
    RESIDUAL_CONVERGED = "ResidualConverged"
    GAMMA_CONVERGED = "GammaConverged"
    MAX_ITERATIONS = "MaxIterations"
    SUBPROBLEM_FAILED = "SubproblemFailed"
    LINE_SEARCH_FAILED = "LineSearchFailed"


@dataclass(frozen=True)
class SolverOptions:
    """All tunables; defaults follow the reference experiment setup."""

    tau: float = 1e-4
    omega: float = 1e-4
    beta: float = 0.5
    kappa: float = 1e-5
    y_max: float = 1e6
    z_max: float = 1e6
    epsilon: float = 1e-4
    k_max: int = 200
    phi0: float = 1e3
    psi0: float = 1e3
    gamma0: float = 0.1
    sigma0: float = 0.1
    grad_F_zero_tol: float = 1e-4
    subproblem_tol: float = 1e-10
    subproblem_max_iter: int = 100
    sigma_min: float = 1e-10
    ell_max: int = 60
    nu1: float = 1e-8
    nu2: float = 1e8
    hessian_identity_fallback: bool = True

    def __post_init__(self):
        for name in ("tau", "omega", "beta", "kappa"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"SolverOptions.{name} must lie in (0, 1)")
        for name in ("y_max", "z_max", "epsilon", "phi0", "psi0", "gamma0",
                     "sigma0", "subproblem_tol", "nu1", "nu2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SolverOptions.{name} must be positive")
        for name in ("grad_F_zero_tol", "sigma_min"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"SolverOptions.{name} must be nonnegative")
        for name in ("k_max", "subproblem_max_iter", "ell_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"SolverOptions.{name} must be nonnegative")

    def control_params(self) -> ControlParams:
        return ControlParams(kappa=self.kappa, y_max=self.y_max, z_max=self.z_max)

    def initial_state(self) -> ControlState:
        return ControlState(phi=self.phi0, psi=self.psi0, gamma=self.gamma0, sigma=self.sigma0)

    def hessian_policy(self) -> HessianPolicy:
        return HessianPolicy(
            nu1=self.nu1, nu2=self.nu2, identity_fallback=self.hessian_identity_fallback
        )


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class Iterate:
    """Full algorithm state after k completed iterations."""

    k: int
    x: Array
    y: Array
    Z: Array
    control: ControlState


@dataclass(frozen=True)
class TraceRow:
    """State at the start of iteration k plus what the iteration then did.

    ``step_tag``/``ell``/``xi_norm`` are empty on the final row (the stopping
    test fired before any step was taken).  ``ell`` is None also on shortcut
    iterations, which take no line-search step.
    """

    k: int
    r: float
    r_V: float
    r_O: float
    phi: float
    psi: float
    gamma: float
    sigma: float
    step_tag: str
    ell: Optional[int]
    xi_norm: Optional[float]
    cakkt: float


@dataclass
class SolveReport:
    status: SolveStatus
    iterations: int
    final_r: float
    final_r_V: float
    final_r_O: float
    final_cakkt: float
    final_grad_F_norm: float
    final: Iterate
    trace: List[TraceRow]
    prop1_margins: List[float] = field(default_factory=list)
    prop1_margins_ref: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    problem_name: str = ""

    def to_dict(self) -> dict:
        return {
            "problem": self.problem_name,
            "status": self.status.value,
            "iterations": self.iterations,
            "final_r": self.final_r,
            "final_r_V": self.final_r_V,
            "final_r_O": self.final_r_O,
            "final_cakkt": self.final_cakkt,
            "final_grad_F_norm": self.final_grad_F_norm,
            "x": self.final.x.tolist(),
            "y": self.final.y.tolist(),
            "Z": self.final.Z.tolist(),
            "sigma": self.final.control.sigma,
            "gamma": self.final.control.gamma,
            "step_tags": "".join(row.step_tag for row in self.trace),
            "wall_time": self.wall_time,
        }


def line_search(
    p: NsdpProblem,
    x: Array,
    p_dir: Array,
    mp: MeritParams,
    merit_gradient: Array,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> tuple:
    """Armijo backtracking: smallest ell with
    F(x + beta^ell p) <= F(x) + tau beta^ell Delta,
    Delta = max(<grad F, p>, -omega ||p||^2) < 0.

    Returns (alpha, ell, accepted merit value).
    """
    delta = max(float(merit_gradient @ p_dir), -opts.omega * float(p_dir @ p_dir))
    if not delta < 0.0:
        raise LineSearchError(
            f"nonpositive-curvature precondition violated: Delta = {delta!r} >= 0"
        )
    f0 = merit_value(p, x, mp)
    samples = []
    for ell in range(opts.ell_max + 1):
        alpha = opts.beta ** ell
        f_trial = merit_value(p, x + alpha * p_dir, mp)
        samples.append((ell, alpha, f_trial))
        if f_trial <= f0 + opts.tau * alpha * delta:
            return alpha, ell, f_trial
    raise LineSearchError(
        f"no Armijo step within {opts.ell_max} halvings (F0 = {f0!r}, Delta = {delta!r})",
        samples=samples,
    )


def _grad_identity_check(gradF: Array, grad_theta0: Array, c: Array) -> None:
    # grad theta(0) must coincide with grad F algebraically; the tolerance is
    # scaled because both sides are differences of potentially huge terms.
    scale = max(1.0, float(np.linalg.norm(gradF)), float(np.linalg.norm(c)),
                float(np.linalg.norm(grad_theta0)))
    err = float(np.linalg.norm(grad_theta0 - gradF))
    if err > 1e-12 * scale:
        raise AssertionError(
            f"grad theta(0) != grad F: error {err:.3e} exceeds 1e-12 * {scale:.3e}"
        )


def solve(
    p: NsdpProblem,
    x0: Array,
    y0: Optional[Array] = None,
    Z0: Optional[Array] = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> SolveReport:
    """Run the outer loop from (x0, y0, Z0); returns the solve report.

    Raises SolveAborted (carrying the partial report) if the subproblem or
    the line search fails.
    """
    t0 = time.perf_counter()
    x = np.asarray(x0, dtype=float).reshape(p.n).copy()
    y = np.zeros(p.m) if y0 is None else np.asarray(y0, dtype=float).reshape(p.m).copy()
    Z = np.zeros((p.d, p.d)) if Z0 is None else symkernel.symmetrize(Z0)
    state = opts.initial_state()
    cp = opts.control_params()
    policy = opts.hessian_policy()
    trace: List[TraceRow] = []
    prop1: List[float] = []
    prop1_ref: List[float] = []
    k = 0

    def final_report(status, rv, ro, r, cak):
        trace.append(TraceRow(k, r, rv, ro, state.phi, state.psi, state.gamma,
                              state.sigma, "", None, None, cak))
        grad_norm = float(np.linalg.norm(merit_grad(p, x, MeritParams(state.sigma, y, Z))))
        return SolveReport(
            status=status, iterations=k, final_r=r, final_r_V=rv, final_r_O=ro,
            final_cakkt=cak, final_grad_F_norm=grad_norm,
            final=Iterate(k=k, x=x, y=y, Z=Z, control=state),
            trace=trace, prop1_margins=prop1, prop1_margins_ref=prop1_ref,
            wall_time=time.perf_counter() - t0, problem_name=p.name,
        )

    while True:
        rv = control.r_V(p, x)
        ro = control.r_O(p, x, y, Z)
        r = rv + ro
        cak = control.cakkt_residual(p, x, Z)
        # Step 1: stopping tests
        if r <= opts.epsilon:
            return final_report(SolveStatus.RESIDUAL_CONVERGED, rv, ro, r, cak)
        if state.gamma <= opts.epsilon:
            return final_report(SolveStatus.GAMMA_CONVERGED, rv, ro, r, cak)
        if k == opts.k_max:
            return final_report(SolveStatus.MAX_ITERATIONS, rv, ro, r, cak)

        mp = MeritParams(state.sigma, y, Z)
        gradF = merit_grad(p, x, mp)
        ell: Optional[int] = None
        xi_norm: Optional[float] = None
        if float(np.linalg.norm(gradF)) <= opts.grad_F_zero_tol:
            # Step 2: merit-stationary shortcut; trial pair without clamping
            x_next = x
            y_trial = y - np.asarray(p.eval_g(x), dtype=float) / state.sigma if p.m else np.zeros(0)
            Z_trial = symkernel.psd_project(Z - p.eval_X(x) / state.sigma)
        else:
            # Steps 3-4: subproblem, then Armijo on the merit function
            try:
                H = hessian_or_approx(p, x, y, Z, state.sigma, policy)
                data = subqp.build_subproblem_data(p, x, y, Z, state.sigma, H)
                _grad_identity_check(gradF, subqp.reduced_objective(data, np.zeros(p.n))[1], data.c)
                sol = subqp.solve_subproblem(data, opts.subproblem_tol, opts.subproblem_max_iter)
            except SubproblemError as exc:
                raise SolveAborted(
                    f"iteration {k}: {exc}",
                    report=final_report(SolveStatus.SUBPROBLEM_FAILED, rv, ro, r, cak),
                ) from exc
            # Diagnostics, never aborts: the Z-measured inequality can fail
            # at exact optima whenever [T]_+ differs from Z, so only the
            # [T]_+-measured variant is a soundness signal.
            prop1.append(subqp.descent_check(data, sol, gradF).slack)
            prop1_ref.append(subqp.descent_check_projected(data, sol, gradF).slack)
            xi_norm = float(np.linalg.norm(sol.xi))
            if xi_norm == 0.0:
                x_next = x
            else:
                try:
                    alpha, ell, _ = line_search(p, x, sol.xi, mp, gradF, opts)
                except LineSearchError as exc:
                    raise SolveAborted(
                        f"iteration {k}: {exc}",
                        report=final_report(SolveStatus.LINE_SEARCH_FAILED, rv, ro, r, cak),
                    ) from exc
                x_next = x + alpha * sol.xi
            y_trial = sol.y_trial
            Z_trial = sol.Z_trial

        # Steps 5-6: multiplier update, then penalty update (both gated on
        # the merit gradient at x_{k+1} with the old sigma_k, y_k, Z_k)
        grad_next_norm = float(np.linalg.norm(merit_grad(p, x_next, mp)))
        pair, state_new, tag = control.procedure_update(
            p, x_next, MultiplierPair(y_trial, Z_trial), MultiplierPair(y, Z),
            state, grad_next_norm, cp, k,
        )
        r_next = control.r_total(p, x_next, pair.y, pair.Z)
        sigma_next = control.penalty_update(state, grad_next_norm, r_next, opts.sigma_min)

        trace.append(TraceRow(k, r, rv, ro, state.phi, state.psi, state.gamma,
                              state.sigma, tag.kind, ell, xi_norm, cak))
        x = x_next
        y = pair.y
        Z = pair.Z
        state = replace(state_new, sigma=sigma_next)
        k += 1
