"""Residuals, distance functions, the V/O/M/F cascade, and the penalty rule."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sqsdp import control, corpus, driver, model, symkernel as sk
from sqsdp.control import ControlParams, ControlState
from sqsdp.model import MultiplierPair

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _toy_two_equalities():
    """m=2 with constant g = (3, 4); X = I so the conic part never violates."""
    return model.NsdpProblem(
        n=1, m=2, d=2,
        eval_f=lambda x: 0.0,
        eval_grad_f=lambda x: np.zeros(1),
        eval_g=lambda x: np.array([3.0, 4.0]),
        eval_jac_g=lambda x: np.zeros((1, 2)),
        eval_X=lambda x: np.eye(2),
        eval_A=lambda x, j: np.zeros((2, 2)),
    )


def _kkt_instance():
    """min (x-1)^2 with X(x) = [[x]]: KKT holds at (1, Z=0)."""
    return model.NsdpProblem(
        n=1, m=0, d=1,
        eval_f=lambda x: float((x[0] - 1.0) ** 2),
        eval_grad_f=lambda x: np.array([2.0 * (x[0] - 1.0)]),
        eval_g=lambda x: np.zeros(0),
        eval_jac_g=lambda x: np.zeros((1, 0)),
        eval_X=lambda x: np.array([[x[0]]]),
        eval_A=lambda x, j: np.eye(1),
    )


class TestResiduals:
    def test_rv_feasible(self):
        assert control.r_V(corpus.problem_no_kkt(), np.array([0.0])) == 0.0

    def test_rv_no_kkt_at_one(self):
        assert_allclose(control.r_V(corpus.problem_no_kkt(), np.array([1.0])), GOLDEN, rtol=1e-14)

    def test_rv_norm_arithmetic(self):
        assert_allclose(control.r_V(_toy_two_equalities(), np.zeros(1)), 5.0, atol=0)

    def test_ro_kkt_point(self):
        p = _kkt_instance()
        assert control.r_O(p, np.array([1.0]), np.zeros(0), np.zeros((1, 1))) == 0.0

    def test_ro_no_kkt_origin(self):
        p = corpus.problem_no_kkt()
        assert_allclose(control.r_O(p, np.array([0.0]), np.zeros(0), np.zeros((2, 2))), 2.0, atol=0)

    def test_ro_frobenius_term(self):
        """Z = I, X = diag(1,2): ||X Z||_F = sqrt(5)."""
        p = model.NsdpProblem(
            n=1, m=0, d=2,
            eval_f=lambda x: 0.0,
            eval_grad_f=lambda x: np.zeros(1),
            eval_g=lambda x: np.zeros(0),
            eval_jac_g=lambda x: np.zeros((1, 0)),
            eval_X=lambda x: np.diag([1.0, 2.0]),
            eval_A=lambda x, j: np.zeros((2, 2)),
        )
        out = control.r_O(p, np.zeros(1), np.zeros(0), np.eye(2))
        assert_allclose(out, np.sqrt(5.0), rtol=1e-15)


class TestPhiPsi:
    def test_direct_formula(self):
        p = corpus.problem_no_kkt()
        cp = ControlParams(kappa=1e-5)
        phi, psi = control.phi_psi(p, np.array([0.0]), np.zeros(0), np.zeros((2, 2)), cp)
        assert_allclose(phi, 2e-5, rtol=1e-12)  # r_V = 0, r_O = 2
        assert_allclose(psi, 2.0, rtol=1e-12)

    def test_kkt_point_gives_zero(self):
        p = _kkt_instance()
        cp = ControlParams()
        phi, psi = control.phi_psi(p, np.array([1.0]), np.zeros(0), np.zeros((1, 1)), cp)
        assert phi == 0.0 and psi == 0.0

    def test_sum_identity(self):
        p = corpus.problem_no_kkt()
        cp = ControlParams(kappa=0.3)
        x = np.array([0.7])
        z = sk.symmetrize(np.random.default_rng(0).uniform(-1, 1, (2, 2)))
        rv = control.r_V(p, x)
        ro = control.r_O(p, x, np.zeros(0), z)
        phi, psi = control.phi_psi(p, x, np.zeros(0), z, cp)
        assert_allclose(phi + psi, (1.0 + cp.kappa) * (rv + ro), rtol=1e-12)


class TestProcedureUpdate:
    def _state(self, **kw):
        defaults = dict(phi=1e3, psi=1e3, gamma=0.1, sigma=0.1)
        defaults.update(kw)
        return ControlState(**defaults)

    def test_v_branch_adopts_trial(self):
        p = _kkt_instance()
        trial = MultiplierPair(np.zeros(0), np.zeros((1, 1)))
        current = MultiplierPair(np.zeros(0), np.ones((1, 1)))
        pair, state, tag = control.procedure_update(
            p, np.array([1.0]), trial, current, self._state(),
            merit_grad_norm_at_next=1.0, cp=ControlParams(), k=3,
        )
        assert tag.kind == "V" and tag.k == 3
        assert state.phi == 500.0 and state.psi == 1e3 and state.gamma == 0.1
        assert pair is trial

    def test_m_branch_clamps(self):
        """Step 3: y = Pi_C(y - g/sigma) hits the 1e6 box bound."""
        p = model.NsdpProblem(
            n=1, m=1, d=1,
            eval_f=lambda x: 0.0,
            eval_grad_f=lambda x: np.ones(1),  # keeps Phi/Psi large
            eval_g=lambda x: np.array([-2e5]),
            eval_jac_g=lambda x: np.ones((1, 1)),
            eval_X=lambda x: np.eye(1),
            eval_A=lambda x, j: np.zeros((1, 1)),
        )
        trial = MultiplierPair(np.zeros(1), np.zeros((1, 1)))
        current = MultiplierPair(np.zeros(1), np.zeros((1, 1)))
        pair, state, tag = control.procedure_update(
            p, np.zeros(1), trial, current, self._state(phi=1e-12, psi=1e-12),
            merit_grad_norm_at_next=0.0, cp=ControlParams(), k=0,
        )
        assert tag.kind == "M"
        assert state.gamma == 0.05
        assert_allclose(pair.y, [1e6], atol=0)  # 0 - (-2e5)/0.1 = 2e6, clamped

    def test_m_branch_spectral_clamp(self):
        p = _kkt_instance()
        current = MultiplierPair(np.zeros(0), np.array([[5e6]]))
        trial = MultiplierPair(np.zeros(0), np.zeros((1, 1)))
        pair, _, tag = control.procedure_update(
            p, np.array([-1.0]), trial, current, self._state(phi=1e-12, psi=1e-12),
            merit_grad_norm_at_next=0.0, cp=ControlParams(), k=0,
        )
        assert tag.kind == "M"
        # [Z - X/sigma]_+ = 5e6 + 10 then clamped to z_max
        assert_allclose(pair.Z, [[1e6]], atol=0)

    def test_f_branch_keeps_everything(self):
        p = _kkt_instance()
        current = MultiplierPair(np.zeros(0), np.full((1, 1), 0.25))
        trial = MultiplierPair(np.zeros(0), np.zeros((1, 1)))
        state = self._state(phi=1e-12, psi=1e-12)
        pair, state_out, tag = control.procedure_update(
            p, np.array([-1.0]), trial, current, state,
            merit_grad_norm_at_next=10.0, cp=ControlParams(), k=2,
        )
        assert tag.kind == "F"
        assert state_out == state
        assert pair is current


class TestPenaltyUpdate:
    def test_three_halves_power(self):
        state = ControlState(phi=1, psi=1, gamma=0.1, sigma=0.1)
        out = control.penalty_update(state, merit_grad_norm_at_next=0.05, r_next=0.04)
        assert_allclose(out, 0.008, rtol=1e-15)  # min(0.05, 0.04^1.5)

    def test_frozen_when_gradient_large(self):
        state = ControlState(phi=1, psi=1, gamma=0.1, sigma=0.1)
        assert control.penalty_update(state, 0.2, 0.04) == 0.1

    def test_floor(self):
        state = ControlState(phi=1, psi=1, gamma=0.1, sigma=0.1)
        assert control.penalty_update(state, 0.0, 0.0, sigma_min=1e-12) == 1e-12

    def test_never_increases(self):
        rng = np.random.default_rng(2)
        state = ControlState(phi=1, psi=1, gamma=0.1, sigma=0.1)
        for _ in range(200):
            out = control.penalty_update(
                state, float(rng.uniform(0, 0.3)), float(rng.uniform(0, 2.0))
            )
            assert out <= state.sigma


class TestComplementarityResiduals:
    def test_cakkt_zero_multiplier(self):
        p = corpus.problem_no_kkt()
        assert control.cakkt_residual(p, np.array([0.3]), np.zeros((2, 2))) == 0.0

    def test_cakkt_complementary_eigenspaces(self):
        p = model.NsdpProblem(
            n=1, m=0, d=2,
            eval_f=lambda x: 0.0, eval_grad_f=lambda x: np.zeros(1),
            eval_g=lambda x: np.zeros(0), eval_jac_g=lambda x: np.zeros((1, 0)),
            eval_X=lambda x: np.diag([1.0, 0.0]),
            eval_A=lambda x, j: np.zeros((2, 2)),
        )
        assert control.cakkt_residual(p, np.zeros(1), np.diag([0.0, 5.0])) == 0.0

    def test_cakkt_hand_value(self):
        """X(0) = diag(0,1), Z = [[t,-1],[-1,1/t]]: ||X o Z||_F = sqrt(1/2 + 1/t^2)."""
        p = corpus.problem_no_kkt()
        for t in (2.0, 10.0, 1e3):
            z = np.array([[t, -1.0], [-1.0, 1.0 / t]])
            expected = np.sqrt(0.5 + 1.0 / t ** 2)
            assert_allclose(control.cakkt_residual(p, np.array([0.0]), z), expected, rtol=1e-12)

    def test_takkt_examples(self):
        p = model.NsdpProblem(
            n=1, m=0, d=2,
            eval_f=lambda x: 0.0, eval_grad_f=lambda x: np.zeros(1),
            eval_g=lambda x: np.zeros(0), eval_jac_g=lambda x: np.zeros((1, 0)),
            eval_X=lambda x: np.diag([1.0, 2.0]),
            eval_A=lambda x, j: np.zeros((2, 2)),
        )
        assert control.takkt_residual(p, np.zeros(1), np.zeros((2, 2))) == 0.0
        assert_allclose(control.takkt_residual(p, np.zeros(1), np.eye(2)), 3.0, atol=0)

    def test_takkt_bounded_by_cakkt(self):
        """|tr(X o Z)| <= sqrt(d) ||X o Z||_F (Cauchy-Schwarz)."""
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = int(rng.integers(1, 6))
            x_mat = sk.symmetrize(rng.uniform(-1, 1, (d, d)))
            z = sk.symmetrize(rng.uniform(-1, 1, (d, d)))
            p = model.NsdpProblem(
                n=1, m=0, d=d,
                eval_f=lambda x: 0.0, eval_grad_f=lambda x: np.zeros(1),
                eval_g=lambda x: np.zeros(0), eval_jac_g=lambda x: np.zeros((1, 0)),
                eval_X=lambda x, xm=x_mat: xm,
                eval_A=lambda x, j: np.zeros((d, d)),
            )
            takkt = control.takkt_residual(p, np.zeros(1), z)
            cakkt = control.cakkt_residual(p, np.zeros(1), z)
            assert takkt <= np.sqrt(d) * cakkt + 1e-12


class TestTraceBookkeeping:
    def test_budgets_halve_only_on_their_tags(self):
        rep = driver.solve(corpus.problem_degenerate(3, 1), x0=np.zeros(6))
        rows = rep.trace
        for prev, cur in zip(rows, rows[1:]):
            tag = prev.step_tag
            assert cur.phi == (0.5 * prev.phi if tag == "V" else prev.phi)
            assert cur.psi == (0.5 * prev.psi if tag == "O" else prev.psi)
            assert cur.gamma == (0.5 * prev.gamma if tag == "M" else prev.gamma)
            assert cur.sigma <= prev.sigma
        assert all(r.step_tag in ("V", "O", "M", "F") for r in rows[:-1])
        assert rows[-1].step_tag == ""
