import math

import numpy as np
import pytest

from mincopy import povm_search, problems, states
from mincopy.exceptions import DomainError, InvalidSupportError
from mincopy.povm_search import (
    Condition,
    CostDensity,
    build_cost_density,
    build_povm,
    find_optimal_support,
    integral_value,
)
from mincopy.value import ValueFunction, theta_grid

T = 1801
THETA = theta_grid(T)
DTHETA = math.pi / T


def quadratic_density():
    return CostDensity(THETA, 24 / math.pi**3 * (THETA - math.pi / 2) ** 2)


def wavy_density(sign):
    return CostDensity(THETA, (2 + np.sin(4 * THETA) + sign * np.sin(6 * THETA)) / math.pi)


class TestWorkedExamples:
    def test_quadratic_two_point(self):
        sup = find_optimal_support(quadratic_density())
        assert sup.condition == Condition.TWO_POINT
        assert sup.support[0] == pytest.approx(math.pi / 4, abs=2 * DTHETA)
        assert sup.support[1] == pytest.approx(3 * math.pi / 4, abs=2 * DTHETA)

    def test_wavy_minus_three_point(self):
        sup = find_optimal_support(wavy_density(-1))
        assert sup.condition == Condition.THREE_POINT
        for got, want in zip(sup.support, (0.163, 1.236, 2.528)):
            assert got == pytest.approx(want, abs=2 * DTHETA)

    def test_wavy_plus_three_point(self):
        sup = find_optimal_support(wavy_density(+1))
        assert sup.condition == Condition.THREE_POINT
        for got, want in zip(sup.support, (0.957, 1.734, 2.807)):
            assert got == pytest.approx(want, abs=2 * DTHETA)

    def test_certificate_minimizers(self):
        for g in (quadratic_density(), wavy_density(-1), wavy_density(+1)):
            sup = find_optimal_support(g)
            tilted = g.values + sup.tilt_a * np.cos(2 * THETA) + sup.tilt_b * np.sin(2 * THETA)
            m = tilted.min()
            scale = g.values.max() - g.values.min()
            for angle in sup.support:
                idx = int(round(angle / DTHETA))
                assert tilted[idx] - m <= 1e-8 * scale


class TestCostDensity:
    def test_constant_value_function_recovers_constant(self):
        p = problems.fig1_problem()
        vf = ValueFunction(np.full(201, 3.0), epsilon=0.0)
        g = build_cost_density(0.4, p.rho0, p.rho1, vf, THETA)
        m = build_povm(find_optimal_support(g))
        assert integral_value(g, m) == pytest.approx(3.0, abs=1e-9)

    def test_symmetric_problem_symmetric_density(self):
        p = problems.pure_problem(math.pi / 6, 0.05)
        vf = ValueFunction(np.abs(np.linspace(0, 1, 301) - 0.5) * 4 + 1, epsilon=0.05)
        g = build_cost_density(0.5, p.rho0, p.rho1, vf, THETA)
        # symmetry about theta = pi/2 (grid has no exact mirror points, so
        # compare against the interpolated reflection)
        mirrored = np.interp(
            (math.pi - THETA) % math.pi, THETA, g.values, period=math.pi
        )
        assert np.abs(g.values - mirrored).max() < 1e-6

    def test_spot_values_against_scalar_formula(self):
        p = problems.fig1_problem()
        rng = np.random.default_rng(5)
        values = np.abs(np.linspace(0, 1, 501) - 0.5) * 6 + 1
        vf = ValueFunction(values, epsilon=0.0)
        q = 0.37
        g = build_cost_density(q, p.rho0, p.rho1, vf, THETA)
        for idx in rng.integers(0, T, size=10):
            th = THETA[idx]
            v = states.ket(th)
            a = float(v @ p.rho0.matrix @ v)
            b = float(v @ p.rho1.matrix @ v)
            pk = q * a + (1 - q) * b
            qk = q * a / pk
            expected = pk * np.interp(qk, vf.q_grid, vf.values)
            assert g.values[idx] == pytest.approx(expected, rel=1e-12)

    def test_rejects_nonuniform_grid(self):
        with pytest.raises(DomainError):
            CostDensity(np.array([0.0, 0.1, 0.3]), np.zeros(3))

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            CostDensity(THETA, np.full(T, np.nan))


class TestBuildPovm:
    def test_two_point_exact_completeness(self):
        sup = find_optimal_support(quadratic_density())
        m = build_povm(sup)
        total = sum(op for op, _ in m.elements)
        assert np.abs(total - np.eye(2)).max() < 1e-15

    def test_trine_support(self):
        m = states.three_element_povm((0.0, math.pi / 3, 2 * math.pi / 3))
        assert m.weights == pytest.approx((2 / 3, 2 / 3, 2 / 3))
        total = sum(op for op, _ in m.elements)
        assert np.abs(total - np.eye(2)).max() < 1e-10

    def test_three_point_completeness_residual(self):
        sup = find_optimal_support(wavy_density(-1))
        m = build_povm(sup)
        total = sum(op for op, _ in m.elements)
        assert np.abs(total - np.eye(2)).max() < 1e-10

    def test_invalid_support_raises(self):
        with pytest.raises(InvalidSupportError):
            states.three_element_povm((0.0, 0.3, 0.6))  # span below pi/2


class TestIntegralValue:
    def test_quadratic_value(self):
        g = quadratic_density()
        m = build_povm(find_optimal_support(g))
        # two points at the quarter angles, each 24/pi^3 * (pi/4)^2
        assert integral_value(g, m) == pytest.approx(3.0 / math.pi, abs=1e-4)

    def test_perturbed_supports_cost_more(self):
        g = wavy_density(-1)
        sup = find_optimal_support(g)
        best = integral_value(g, build_povm(sup))
        t1, t2, t3 = sup.support
        for d1, d3 in ((0.02, -0.01), (-0.015, 0.02), (0.03, 0.03)):
            cand = (t1 + d1, t2, t3 + d3)
            try:
                m = states.three_element_povm(cand)
            except InvalidSupportError:
                continue
            assert integral_value(g, m) >= best - 1e-9

    def test_rejects_two_copy_measurement(self):
        g = quadratic_density()
        with pytest.raises(DomainError):
            integral_value(g, states.collective_measurement(0.1))


class TestDegenerate:
    def test_flat_density(self):
        g = CostDensity(THETA, np.full(T, 2.5))
        sup = find_optimal_support(g)
        assert sup.condition == Condition.TWO_POINT
        assert sup.support[0] == pytest.approx(0.0, abs=DTHETA)
        assert sup.support[1] == pytest.approx(math.pi / 2, abs=DTHETA)
        assert integral_value(g, build_povm(sup)) == pytest.approx(5.0)


def lp_optimum(g: CostDensity) -> float:
    """Independent oracle: grid LP over support masses with moment constraints."""
    linprog = pytest.importorskip("scipy.optimize").linprog
    th = g.theta_grid
    A_eq = np.stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    res = linprog(
        c=g.values,
        A_eq=A_eq,
        b_eq=np.array([2.0, 0.0, 0.0]),
        bounds=(0, None),
        method="highs",
    )
    assert res.success
    return float(res.fun)


class TestAgainstLP:
    def test_worked_examples_match_lp(self):
        for g in (quadratic_density(), wavy_density(-1), wavy_density(+1)):
            sup = find_optimal_support(g)
            mine = integral_value(g, build_povm(sup))
            ref = lp_optimum(g)
            scale = g.values.max() - g.values.min()
            assert mine == pytest.approx(ref, abs=2e-5 * scale + 1e-9)

    def test_random_smooth_densities_match_lp(self):
        rng = np.random.default_rng(11)
        th = theta_grid(601)
        for _ in range(12):
            coeffs = rng.normal(size=4) * np.array([1.0, 0.6, 0.4, 0.25])
            phases = rng.uniform(0, 2 * math.pi, size=4)
            vals = np.ones_like(th) * 2.0
            for k, (c, ph) in enumerate(zip(coeffs, phases)):
                vals += c * np.sin(2 * (k + 1) * th + ph)
            vals -= vals.min() - 0.05
            g = CostDensity(th, vals)
            sup = find_optimal_support(g)
            mine = integral_value(g, build_povm(sup))
            ref = lp_optimum(g)
            scale = vals.max() - vals.min()
            assert mine <= ref + 3e-4 * scale + 1e-9
            assert mine >= ref - 1e-9
