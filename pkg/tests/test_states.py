import math

import numpy as np
import pytest

from mincopy import states
from mincopy.exceptions import ArityError, DimensionError, DomainError


def test_make_state_basis():
    s = states.make_state(0.0, 0.0)
    assert np.allclose(s.matrix, np.diag([1.0, 0.0]))


def test_make_state_fig1_rho0():
    # (1-d)|v><v| + d/2 I at x = pi/12, d = 0.01
    s = states.make_state(math.pi / 12, 0.01)
    v = np.array([math.cos(math.pi / 12), math.sin(math.pi / 12)])
    expected = 0.99 * np.outer(v, v) + 0.005 * np.eye(2)
    assert np.allclose(s.matrix, expected, atol=1e-15)
    assert abs(np.trace(s.matrix) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(s.matrix).min() >= -1e-12


def test_full_depolarization_kills_angle():
    a = states.make_state(math.pi / 4, 1.0)
    b = states.make_state(0.3, 1.0)
    assert np.allclose(a.matrix, np.eye(2) / 2)
    assert np.allclose(a.matrix, b.matrix)


def test_make_state_rejects_bad_depolarization():
    with pytest.raises(DomainError):
        states.make_state(0.0, -0.1)
    with pytest.raises(DomainError):
        states.make_state(0.0, 1.5)


def test_from_matrix_round_trip():
    s = states.make_state(0.7, 0.2)
    r = states.QubitState.from_matrix(s.matrix)
    assert np.allclose(r.matrix, s.matrix)
    assert abs(r.depolarization - 0.2) < 1e-12


def test_mixture_state_matches_direct_sum():
    m = states.mixture_state(0.05, 0.0, math.pi / 12)
    direct = 0.95 * states.projector(0.0) + 0.05 * states.projector(math.pi / 12)
    assert np.allclose(m.matrix, direct)


def test_tensor_power_basics():
    s = states.make_state(0.0, 0.0)
    t = states.tensor_power(s, 2)
    assert np.allclose(t.matrix, np.diag([1.0, 0, 0, 0]))
    mixed = states.make_state(0.0, 1.0)
    t2 = states.tensor_power(mixed, 2)
    assert np.allclose(t2.matrix, np.eye(4) / 4)


def test_tensor_power_rank_one():
    s = states.make_state(math.pi / 12, 0.0)
    t = states.tensor_power(s, 2)
    v = np.kron(states.ket(math.pi / 12), states.ket(math.pi / 12))
    assert np.allclose(t.matrix, np.outer(v, v), atol=1e-14)
    evals = np.linalg.eigvalsh(t.matrix)
    assert np.sum(evals > 1e-10) == 1


def test_tensor_power_rejects_bad_arity():
    s = states.make_state(0.0, 0.0)
    with pytest.raises(ArityError):
        states.tensor_power(s, 3)
    with pytest.raises(ArityError):
        states.tensor_power(s, 0)


def test_born_probability_trivial():
    rho = np.diag([1.0, 0.0])
    assert states.born_probability(states.projector(0.0), rho) == pytest.approx(1.0)
    assert states.born_probability(np.eye(2) / 2, rho) == pytest.approx(0.5)


def test_born_probability_collective_aligned():
    # the first collective basis vector is the doubled |theta+>; a product
    # state aligned with it gives probability one
    theta = math.pi / 12
    bases = states.collective_bases(theta)
    elem = np.outer(bases[0], bases[0])
    v = np.kron(states.ket(theta), states.ket(theta))
    assert states.born_probability(elem, np.outer(v, v)) == pytest.approx(1.0, abs=1e-12)


def test_born_probability_dimension_mismatch():
    with pytest.raises(DimensionError):
        states.born_probability(np.eye(2), np.eye(4) / 4)


def test_posterior_orthogonal_states():
    r0 = states.make_state(0.0, 0.0)
    r1 = states.make_state(math.pi / 2, 0.0)
    m = states.projective_pair(0.0)
    ups = states.posterior(0.5, r0, r1, m)
    probs = sorted(u.probability for u in ups)
    assert probs == pytest.approx([0.5, 0.5])
    posts = sorted(u.posterior_q for u in ups)
    assert posts == pytest.approx([0.0, 1.0])


def test_posterior_symmetry_fixes_midpoint():
    x = math.pi / 5
    r0 = states.make_state(x / 2, 0.0)
    r1 = states.make_state(-x / 2, 0.0)
    m = states.projective_pair(0.0)
    ups = states.posterior(0.5, r0, r1, m)
    for u in ups:
        assert u.posterior_q == pytest.approx(0.5, abs=1e-12)


def test_posterior_cross_checked_closed_form():
    # independent scalar formula q_k = q a_k / (q a_k + (1-q) b_k) with
    # a_k, b_k evaluated from explicit trigonometry
    q = 0.3
    theta = math.pi / 4
    r0 = states.make_state(math.pi / 12, 0.01)
    r1 = states.make_state(-math.pi / 12, 0.001)
    m = states.projective_pair(theta)
    ups = states.posterior(q, r0, r1, m)

    def trace_at(angle, x, d):
        pure = math.cos(angle - x) ** 2
        return (1 - d) * pure + d / 2

    for u, angle in zip(ups, (theta, theta + math.pi / 2)):
        a = trace_at(angle, math.pi / 12, 0.01)
        b = trace_at(angle, -math.pi / 12, 0.001)
        expected = q * a / (q * a + (1 - q) * b)
        assert u.posterior_q == pytest.approx(expected, abs=1e-12)


def test_posterior_martingale_and_normalization():
    rng = np.random.default_rng(7)
    for _ in range(25):
        q = rng.uniform(0.01, 0.99)
        r0 = states.make_state(rng.uniform(-1.5, 1.5), rng.uniform(0, 1))
        r1 = states.make_state(rng.uniform(-1.5, 1.5), rng.uniform(0, 1))
        m = states.three_element_povm((0.2, 1.1, 2.2))
        ups = states.posterior(q, r0, r1, m)
        total_p = sum(u.probability for u in ups)
        total_pq = sum(u.probability * u.posterior_q for u in ups)
        assert total_p == pytest.approx(1.0, abs=1e-10)
        assert total_pq == pytest.approx(q, abs=1e-10)


def test_posterior_zero_probability_flagged():
    r0 = states.make_state(0.0, 0.0)
    r1 = states.make_state(0.0, 0.0)
    # the element orthogonal to both states never fires
    m = states.projective_pair(0.0)
    ups = states.posterior(0.4, r0, r1, m)
    flagged = [u for u in ups if u.zero_probability]
    assert len(flagged) == 1
    assert flagged[0].probability < 1e-14


def test_collective_bases_theta_zero():
    b = states.collective_bases(0.0)
    # |theta+> = |0>, |theta-> = -|1> at theta = 0
    assert np.allclose(b[0], [1, 0, 0, 0])
    assert np.allclose(np.abs(b[3]), [0, 0, 0, 1])
    assert np.allclose(np.abs(b[1]), [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])
    assert np.allclose(np.abs(b[2]), [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])


def test_collective_bases_gram_identity():
    for theta in (0.0, math.pi / 4, 0.3, -0.1):
        b = states.collective_bases(theta)
        assert np.allclose(b @ b.T, np.eye(4), atol=1e-12)


def test_singlet_is_theta_independent():
    ref = states.collective_bases(0.0)[2]
    for theta in np.linspace(-0.3, 1.2, 7):
        v = states.collective_bases(theta)[2]
        assert abs(np.dot(v, ref)) == pytest.approx(1.0, abs=1e-12)


def test_singlet_vanishes_on_pure_products():
    rng = np.random.default_rng(3)
    for _ in range(10):
        angle = rng.uniform(-1.5, 1.5)
        v = states.ket(angle)
        product = np.outer(np.kron(v, v), np.kron(v, v))
        elem = states.collective_bases(rng.uniform(-0.5, 0.5))[2]
        p = states.born_probability(np.outer(elem, elem), product)
        assert abs(p) < 1e-10


def test_measurement_completeness():
    for m in (
        states.projective_pair(0.37),
        states.three_element_povm((0.0, math.pi / 3, 2 * math.pi / 3)),
        states.collective_measurement(0.21),
    ):
        dim = 2 if m.copy_cost == 1 else 4
        total = sum(op for op, _ in m.elements)
        assert np.abs(total - np.eye(dim)).max() < 1e-10


def test_trine_weights_equal():
    w = states.triple_weights(0.0, math.pi / 3, 2 * math.pi / 3)
    assert w == pytest.approx((2 / 3, 2 / 3, 2 / 3))
