import math

import numpy as np
import pytest

from decluster.controls import ControlPolicy, zero_policy
from decluster.core import (
    Configuration,
    ControlVector,
    StiffnessError,
    constant_kernel,
    inverse_generator,
    power_kernel,
    step_kernel,
)
from decluster.dynamics import (
    IntegratorSettings,
    MergeEvent,
    barycenter,
    hk_rhs,
    simulate,
    step,
)
from decluster.functionals import generalized_entropy, min_pairwise_distance, variance

A1 = constant_kernel(1.0)
G = inverse_generator()


def rand_config(rng, n_max=10, d_max=2, min_sep=0.3, box=5.0):
    while True:
        n = int(rng.integers(2, n_max + 1))
        d = int(rng.integers(1, d_max + 1))
        c = Configuration(rng.uniform(-box, box, size=(n, d)))
        if min_pairwise_distance(c) > min_sep:
            return c


class TestRhs:
    def test_consensus_fixed_point(self):
        c = Configuration([[2.0]], multiplicities=[3])
        assert np.all(hk_rhs(c, A1) == 0.0)

    def test_symmetric_pair_inverse_square(self):
        c = Configuration([[0.0], [2.0]])
        v = hk_rhs(c, power_kernel(-2.0))
        assert v[0, 0] == pytest.approx(0.25)
        assert v[1, 0] == pytest.approx(-0.25)

    def test_three_agents_uniform_kernel(self):
        c = Configuration([[0.0], [1.0], [3.0]])
        v = hk_rhs(c, A1).ravel()
        assert v == pytest.approx([4 / 3, 1 / 3, -5 / 3])
        # weighted velocity sum vanishes
        assert float(c.multiplicities @ v) == pytest.approx(0.0, abs=1e-14)

    def test_multiplicity_weighting(self):
        # merged pair acts like two coincident agents
        full = Configuration([[0.0], [0.0], [3.0]])
        merged = Configuration([[0.0], [3.0]], multiplicities=[2, 1])
        v_full = hk_rhs(full, A1)
        v_merged = hk_rhs(merged, A1)
        assert v_merged[0, 0] == pytest.approx(v_full[0, 0])
        assert v_merged[1, 0] == pytest.approx(v_full[2, 0])


class TestStep:
    def test_pure_control_motion(self):
        # kernel vanishes at these distances, so motion is the control alone
        c = Configuration([[0.0, 0.0], [5.0, 0.0]])
        u = ControlVector([[1.0, 0.0], [0.0, 0.0]])
        s = IntegratorSettings(dt=0.25, t_final=1.0)
        out = step(c, step_kernel(1.0), u, s)
        assert out.positions[0] == pytest.approx([0.25, 0.0])
        assert out.positions[1] == pytest.approx([5.0, 0.0])

    def test_exponential_pair_accuracy(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.01, t_final=1.0)
        out = step(c, A1, ControlVector.zero(2, 1), s)
        d = out.positions[1, 0] - out.positions[0, 0]
        assert d == pytest.approx(2 * math.exp(-0.01), rel=1e-10)

    def test_consensus_fixed_point(self):
        c = Configuration([[1.0], [1.0]], multiplicities=[1, 1])
        # coincident agents: a(0) = 0 keeps them fixed
        out = step(c, A1, ControlVector.zero(2, 1), IntegratorSettings())
        assert np.all(out.positions == 1.0)

    def test_negative_step_reverses(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.01, t_final=1.0)
        fwd = step(c, A1, ControlVector.zero(2, 1), s, h=0.01)
        back = step(fwd, A1, ControlVector.zero(2, 1), s, h=-0.01)
        assert np.allclose(back.positions, c.positions, atol=1e-12)

    def test_stiffness_error_when_halvings_exhausted(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.5, t_final=1.0, rhs_cap=1e-9, max_halvings=0)
        with pytest.raises(StiffnessError):
            step(c, A1, ControlVector.zero(2, 1), s)


class TestSimulate:
    def test_two_agent_exponential_decay(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.01, t_final=5.0)
        traj = simulate(c, A1, zero_policy(), s)
        assert traj.min_dist[-1] == pytest.approx(2 * math.exp(-5.0), rel=1e-6)

    def test_finite_time_merge_inverse_square(self):
        # dV/dt = -(1/N^2) sum a D^2 = -1/4 here, so extinction at t = V0/0.25
        c = Configuration([[0.0], [0.1]])
        v0 = variance(c)
        bound = v0 / 0.25
        s = IntegratorSettings(dt=0.001, t_final=0.05)
        traj = simulate(c, power_kernel(-2.0), zero_policy(), s)
        merges = traj.merge_events
        assert len(merges) == 1
        assert merges[0].time <= bound + 1e-6
        assert traj.configurations[-1].n_effective == 1

    def test_merged_system_is_fixed_point(self):
        c = Configuration([[1.0]], multiplicities=[2])
        traj = simulate(c, power_kernel(-2.0), zero_policy(), IntegratorSettings(dt=0.01, t_final=1.0))
        assert traj.configurations[-1].positions[0, 0] == 1.0

    def test_mean_conservation(self):
        rng = np.random.default_rng(11)
        for kernel in (A1, power_kernel(-0.5)):
            for _ in range(5):
                c = rand_config(rng)
                traj = simulate(c, kernel, zero_policy(), IntegratorSettings(dt=0.02, t_final=10.0))
                drift = np.linalg.norm(barycenter(traj.configurations[-1]) - barycenter(c))
                assert drift <= 1e-8

    def test_uncontrolled_variance_contractive(self):
        rng = np.random.default_rng(12)
        for kernel in (A1, power_kernel(-0.5), power_kernel(-2.0)):
            c = rand_config(rng, min_sep=0.5)
            traj = simulate(c, kernel, zero_policy(), IntegratorSettings(dt=0.01, t_final=3.0))
            assert np.all(np.diff(traj.variance) <= 1e-10)

    def test_variance_continuous_across_merges(self):
        # multiplicity-weighted merge changes V by at most ~merge_tol^2
        tol = 1e-8
        c = Configuration([[0.0], [tol], [3.0]])
        merged = c.merge(0, 1)
        assert abs(variance(merged) - variance(c)) <= tol**2

    def test_records_and_events_shape(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.01, t_final=1.0, record_every=10)
        traj = simulate(c, A1, zero_policy(), s)
        assert len(traj.times) == len(traj.variance) == len(traj.min_dist)
        assert np.all(np.diff(traj.times) > 0)

    def test_stop_condition(self):
        c = Configuration([[0.0], [2.0]])
        s = IntegratorSettings(dt=0.01, t_final=50.0)
        traj = simulate(c, A1, zero_policy(), s, stop_condition=lambda t, st: min_pairwise_distance(st) < 1.0)
        assert traj.times[-1] < 2.0


class TestDerivativeIdentities:
    def test_variance_derivative_matches_finite_difference(self):
        from decluster.controls import random_feasible_control, variance_derivative

        rng = np.random.default_rng(13)
        kernels = [A1, power_kernel(-2.0), power_kernel(-0.5)]
        h = 1e-4
        for trial in range(30):
            c = rand_config(rng)
            kernel = kernels[trial % 3]
            u = random_feasible_control(c.n_effective, c.d, 1.0, trial)
            s = IntegratorSettings(dt=h, t_final=1.0)
            plus = step(c, kernel, u, s, h=h)
            minus = step(c, kernel, u, s, h=-h)
            fd = (variance(plus) - variance(minus)) / (2 * h)
            analytic = variance_derivative(c, kernel, u)
            assert fd == pytest.approx(analytic, rel=1e-4, abs=1e-10)

    def test_entropy_derivative_matches_finite_difference(self):
        from decluster.controls import entropy_derivative, random_feasible_control

        rng = np.random.default_rng(14)
        kernels = [A1, power_kernel(-2.0), power_kernel(-0.5)]
        h = 1e-4
        for trial in range(30):
            c = rand_config(rng)
            kernel = kernels[trial % 3]
            u = random_feasible_control(c.n_effective, c.d, 1.0, 1000 + trial)
            s = IntegratorSettings(dt=h, t_final=1.0)
            plus = step(c, kernel, u, s, h=h)
            minus = step(c, kernel, u, s, h=-h)
            fd = (generalized_entropy(plus, G) - generalized_entropy(minus, G)) / (2 * h)
            analytic = entropy_derivative(c, kernel, G, u)
            assert fd == pytest.approx(analytic, rel=1e-4, abs=1e-10)

    def test_uncontrolled_variance_derivative_pair_formula(self):
        # the inner-product form equals the pairwise-sum form
        from decluster.controls import variance_derivative

        rng = np.random.default_rng(15)
        for kernel in (A1, power_kernel(-0.5)):
            c = rand_config(rng)
            n = c.n_original
            total = 0.0
            for i in range(c.n_effective):
                for j in range(i + 1, c.n_effective):
                    dij = np.linalg.norm(c.positions[i] - c.positions[j])
                    total += (
                        c.multiplicities[i]
                        * c.multiplicities[j]
                        * float(kernel.evaluate(dij))
                        * dij**2
                    )
            expected = -total / n**2
            u = ControlVector.zero(c.n_effective, c.d)
            assert variance_derivative(c, kernel, u) == pytest.approx(expected, rel=1e-12)


class TestEvents:
    def test_budget_saturation_recorded_once(self):
        from decluster.dynamics import BudgetSaturationEvent

        c = Configuration([[0.0], [2.0], [5.0]])
        pol = ControlPolicy(tag="variance_max", M=0.5, g=None)
        traj = simulate(c, A1, pol, IntegratorSettings(dt=0.01, t_final=0.5))
        sat = [e for e in traj.events if isinstance(e, BudgetSaturationEvent)]
        assert len(sat) == 1 and sat[0].time == 0.0

    def test_halving_events_near_collision(self):
        from decluster.dynamics import HalvingEvent

        c = Configuration([[0.0], [0.05]])
        traj = simulate(c, power_kernel(-2.0), zero_policy(), IntegratorSettings(dt=0.001, t_final=0.01))
        assert traj.merge_events
        assert any(isinstance(e, HalvingEvent) for e in traj.events)
