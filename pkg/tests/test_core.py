import math

import numpy as np
import pytest

from decluster.core import (
    Configuration,
    ConfigError,
    ControlBudget,
    ControlVector,
    constant_kernel,
    inverse_generator,
    invert_sa_on_bracket,
    power_kernel,
    shifted_inverse_generator,
    shifted_kernel,
    step_kernel,
    validate_control,
)

ALL_KERNELS = [
    power_kernel(-2.0),
    power_kernel(-0.5),
    power_kernel(-1.0),
    constant_kernel(1.0),
    constant_kernel(2.5),
    shifted_kernel(),
    step_kernel(1.0),
]

ALL_GENERATORS = [inverse_generator(), shifted_inverse_generator(0.0025), shifted_inverse_generator(1.0)]


class TestConfiguration:
    def test_basic(self):
        c = Configuration([[0.0, 1.0], [2.0, 3.0]])
        assert c.n_effective == 2 and c.n_original == 2 and c.d == 2

    def test_1d_promotion(self):
        c = Configuration([0.0, 1.0, 3.0])
        assert c.positions.shape == (3, 1)

    def test_multiplicity_sum(self):
        c = Configuration([[0.0], [1.0]], multiplicities=[3, 2])
        assert c.n_original == 5 and c.n_effective == 2

    def test_invalid(self):
        with pytest.raises(ConfigError):
            Configuration([[np.inf]])
        with pytest.raises(ConfigError):
            Configuration([[0.0]], multiplicities=[0])
        with pytest.raises(ConfigError):
            Configuration(np.empty((0, 1)))

    def test_merge_weighted_mean(self):
        c = Configuration([[0.0], [3.0], [10.0]], multiplicities=[2, 1, 1])
        m = c.merge(0, 1)
        assert m.n_effective == 2
        assert m.multiplicities[0] == 3
        assert m.positions[0, 0] == pytest.approx(1.0)  # (2*0 + 1*3)/3

    def test_immutable(self):
        c = Configuration([[0.0], [1.0]])
        with pytest.raises(ValueError):
            c.positions[0, 0] = 5.0


class TestValidateControl:
    def test_zero_control_any_budget(self):
        assert validate_control(ControlVector.zero(3, 2), 1e-9)

    def test_boundary_sum_equals_budget(self):
        u = ControlVector([[1.0, 0.0], [0.0, 0.0]])
        assert validate_control(u, 1.0)
        assert validate_control(u, ControlBudget(1.0))

    def test_over_budget(self):
        # direct norm-sum oracle: 1 + 0.5 = 1.5 > 1
        u = ControlVector([[1.0, 0.0], [0.5, 0.0]])
        assert u.norm_sum == pytest.approx(1.5)
        assert not validate_control(u, 1.0)

    def test_budget_positive(self):
        with pytest.raises(ConfigError):
            ControlBudget(0.0)


class TestKernels:
    def test_a_of_zero_is_zero(self):
        for k in ALL_KERNELS:
            assert k.evaluate(0.0) == 0.0

    def test_nonnegative(self):
        s = np.geomspace(1e-8, 1e8, 200)
        for k in ALL_KERNELS:
            assert np.all(k.evaluate(s) >= 0)

    def test_limit_classification_matches_samples(self):
        # sampled s*a(s) at 1e-6 / 1e6 agrees with the declared limits
        for k in ALL_KERNELS:
            for s, limit in ((1e-6, k.alpha0), (1e6, k.alpha_inf)):
                val = float(k.sa(s))
                if limit.kind == "infinite":
                    assert val > 1e2, (k.label(), s, val)
                elif limit.kind == "zero":
                    assert val < 1e-2, (k.label(), s, val)
                else:
                    assert val == pytest.approx(limit.value, rel=1e-3), (k.label(), s)

    def test_power_threshold_closed_forms(self):
        k = power_kernel(-2.0)  # s*a(s) = 1/s
        assert k.epsilon_of(2.0) == pytest.approx(0.5)
        assert k.mu_of(0.1) == pytest.approx(10.0)
        k = power_kernel(-0.5)  # s*a(s) = sqrt(s)
        assert k.delta_of(0.05) == pytest.approx(0.0025)
        assert k.basin_mu_of(2.0) == pytest.approx(4.0)

    def test_shifted_kernel_thresholds(self):
        k = shifted_kernel()  # s*a(s) = s + 1/s, min 2 at s=1
        assert k.epsilon_of(1.5) == math.inf
        eps = k.epsilon_of(2.5)
        assert float(k.sa(eps)) == pytest.approx(2.5)
        assert eps < 1.0
        mu = k.basin_mu_of(2.5)
        assert float(k.sa(mu)) == pytest.approx(2.5)
        assert mu > 1.0

    def test_bisection_matches_closed_form(self):
        k = power_kernel(-2.0)
        root = invert_sa_on_bracket(k, 2.0, 1e-6, 1e3)
        assert root == pytest.approx(k.epsilon_of(2.0), rel=1e-10)
        k2 = power_kernel(-0.5)
        root = invert_sa_on_bracket(k2, 0.05, 1e-9, 1.0)
        assert root == pytest.approx(k2.delta_of(0.05), rel=1e-10)


class TestGenerators:
    def test_monotone_and_inverse_roundtrip(self):
        # Round-trip tolerance: 1e-12 where float64 can represent g(s) at
        # all; near the supremum the output loses the low bits of 1/s, so
        # the attainable relative error grows like eps * (1 + m*s).
        s = np.geomspace(1e-8, 1e8, 10_000)
        for g in ALL_GENERATORS:
            vals = g.evaluate(s)
            assert np.all(np.diff(vals) > 0), g.name
            sub = s[::97]
            back = np.array([g.inverse(float(v)) for v in vals[::97]])
            tol = np.maximum(1e-12, 8 * np.finfo(float).eps * (1.0 + g.m * sub))
            assert np.all(np.abs(back - sub) <= tol * sub), g.name

    def test_divergence_at_zero(self):
        for g in ALL_GENERATORS:
            assert g.evaluate(np.array([1e-8]))[0] < -1e6

    def test_supremum(self):
        # strictly below m mathematically; float64 may saturate at m
        s = np.geomspace(1e-8, 1e12, 1000)
        for g in ALL_GENERATORS:
            assert np.all(g.evaluate(s) <= g.m)

    def test_shifted_inverse_vanishes_at_delta_sq(self):
        g = shifted_inverse_generator(0.0025)
        assert g.evaluate(np.array([0.0025**2]))[0] == pytest.approx(0.0, abs=1e-12)
        assert g.m == pytest.approx(1 / 0.0025**2)
