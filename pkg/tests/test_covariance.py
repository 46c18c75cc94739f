"""Covariance module tests: estimators, RIP oracles, RE verification."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from subweibull import covariance as cv
from subweibull import samplers as sp


def _matrix(values):
    values = np.asarray(values, dtype=float)
    law = sp.IidCoordinates(sp.Gaussian(1.0), values.shape[1])
    return sp.DataMatrix(values.shape[0], values.shape[1], values, law)


def test_gram_examples():
    assert np.array_equal(
        cv.gram(_matrix([[1.0, 0.0], [0.0, 1.0]])), np.diag([0.5, 0.5])
    )
    x = np.array([[2.0, -1.0]])
    assert np.array_equal(cv.gram(_matrix(x)), np.outer(x[0], x[0]))
    assert np.array_equal(cv.gram(_matrix(np.zeros((3, 2)))), np.zeros((2, 2)))


def test_centered_cov_examples():
    assert np.array_equal(
        cv.centered_cov(_matrix([[1.0, 2.0], [1.0, 2.0]])), np.zeros((2, 2))
    )
    assert np.array_equal(cv.centered_cov(_matrix([[1.0], [-1.0]])), [[1.0]])
    x = np.array([[1.0, 4.0], [2.0, 6.0], [3.0, 8.0]])
    shifted = _matrix(x + 1000.0)
    assert np.array_equal(cv.centered_cov(_matrix(x)), cv.centered_cov(shifted))
    with pytest.raises(ValueError):
        cv.centered_cov(_matrix([[1.0, 2.0]]))


def test_max_elementwise_error():
    a = np.diag([1.0, 1.0])
    assert cv.max_elementwise_error(a, a) == 0.0
    assert cv.max_elementwise_error(a, np.diag([0.5, 1.0])) == 0.5
    # only the upper triangle is scanned
    perturbation = np.array([[0.0, 0.3], [-0.3, 0.0]])
    assert cv.max_elementwise_error(a, a - perturbation) == 0.3
    with pytest.raises(ValueError):
        cv.max_elementwise_error(a, np.eye(3))
    with pytest.raises(ValueError):
        cv.max_elementwise_error(np.zeros((2, 3)), np.zeros((2, 3)))


def test_delta_bound_values():
    threshold, prob = cv.delta_bound(0.0, 0.0, 100, 10, 1.0, 2.0)
    assert threshold == 0.0
    assert prob == pytest.approx(3.0 * math.exp(-2.0))
    threshold, _ = cv.delta_bound(1.0, 1.0, 100, 1, 1.0, 0.0)
    assert threshold == 0.0  # both addends vanish at p = 1, t = 0
    threshold, prob = cv.delta_bound(1.0, 0.0, 400, 100, 1.0, 0.0)
    assert threshold == pytest.approx(1.0621989905696023, rel=1e-12)
    assert prob == 1.0  # 3 e^0 clamps
    _, centered_prob = cv.delta_bound(0.0, 0.0, 100, 10, 1.0, 2.0, centered=True)
    assert centered_prob == pytest.approx(6.0 * math.exp(-2.0))
    with pytest.raises(ValueError):
        cv.delta_bound(1.0, 1.0, 100, 10, 2.5, 1.0)


def test_delta_bound_second_term():
    # alpha = 2: c * k^2 * log(2n) * (t + 2 log p) / n on top of the sqrt term
    n, p, t = 50, 4, 1.5
    u = t + 2.0 * math.log(p)
    threshold, _ = cv.delta_bound(0.0, 2.0, n, p, 2.0, t)
    assert threshold == pytest.approx(4.0 * math.log(2.0 * n) * u / n, rel=1e-12)


def test_hard_threshold():
    m = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert np.array_equal(cv.hard_threshold(m, 0.5), np.eye(2))
    assert np.array_equal(cv.hard_threshold(m, 0.0), m)
    assert np.array_equal(cv.hard_threshold(m, 2.0), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        cv.hard_threshold(np.array([[1.0, 0.2], [0.1, 1.0]]), 0.5)


def test_gram_pair_validation():
    with pytest.raises(ValueError):
        cv.GramPair(np.array([[1.0, 0.2], [0.1, 1.0]]), np.eye(2))
    with pytest.raises(ValueError):
        cv.GramPair(np.diag([1.0, -1.0]), np.eye(2))
    pair = cv.GramPair(np.eye(2), np.eye(2), centered=True)
    assert pair.centered


def test_rip_exact_examples():
    r = cv.rip_exact(np.diag([0.5, -0.2]), 1)
    assert r.value == 0.5
    assert r.method is cv.RipMethod.EXACT
    assert r.supports_evaluated == 2
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert cv.rip_exact(flip, 2).value == pytest.approx(1.0)
    assert cv.rip_exact(flip, 1).value == 0.0
    with pytest.raises(ValueError):
        cv.rip_exact(np.eye(3), 4)
    with pytest.raises(ValueError):
        cv.rip_exact(np.eye(100), 8)  # beyond the enumeration cap


def test_rip_exact_monotone_in_k():
    gen = np.random.default_rng(7)
    for _ in range(20):
        d = gen.standard_normal((8, 8))
        d = (d + d.T) / 2.0
        values = [cv.rip_exact(d, k).value for k in range(1, 5)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_rip_exact_random_search_oracle():
    # 1e6 random 3-sparse unit directions never beat the enumeration,
    # and an eigensolver-free power method over all supports agrees
    gen = np.random.default_rng(42)
    d = gen.standard_normal((8, 8))
    d = (d + d.T) / 2.0
    exact = cv.rip_exact(d, 3).value
    m = 10**6
    supports = np.argsort(gen.random((m, 8)), axis=1)[:, :3]
    directions = gen.standard_normal((m, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    blocks = d[supports[:, :, None], supports[:, None, :]]
    searched = float(
        np.max(np.abs(np.einsum("mi,mij,mj->m", directions, blocks, directions)))
    )
    assert searched <= exact + 1e-12
    assert searched >= exact - 1e-3
    refined = 0.0
    for s in itertools.combinations(range(8), 3):
        block = d[np.ix_(s, s)]
        squared = block @ block
        w = np.ones(3) / math.sqrt(3.0)
        for _ in range(300):
            step = squared @ w
            w = step / np.linalg.norm(step)
        refined = max(refined, math.sqrt(float(w @ squared @ w)))
    assert refined == pytest.approx(exact, abs=1e-6)


def test_sphere_net_covering():
    gen = np.random.default_rng(1)
    sizes = {}
    for k in (1, 2, 3, 4):
        mesh = cv._sphere_net(k)
        sizes[k] = mesh.shape[0]
        assert np.allclose(np.linalg.norm(mesh, axis=1), 1.0, atol=1e-12)
        x = gen.standard_normal((20000, k))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        nearest = np.sqrt(np.maximum(2.0 - 2.0 * (x @ mesh.T).max(axis=1), 0.0))
        assert float(nearest.max()) <= 0.25
    assert sizes[1] == 2 and sizes[2] == 25 and sizes[3] == 525
    for k in (1, 2, 3):
        assert sizes[k] <= 9**k
    with pytest.raises(ValueError):
        cv._sphere_net(5)


def test_quarter_net_structure():
    net = cv.quarter_net(1, 3, 100, sp.RngStream(0, 0))
    assert net.exhaustive and net.supports_evaluated == 3
    rows = {tuple(row) for row in net.vectors}
    expected = {tuple(s * e) for s in (1.0, -1.0) for e in np.eye(3)}
    assert rows == expected
    single = cv.quarter_net(2, 2, 100, sp.RngStream(0, 0))
    assert single.supports_evaluated == 1
    example = cv.quarter_net(2, 6, 10**6, sp.RngStream(0, 0))
    assert example.exhaustive
    assert len(example) <= 15 * 81  # cardinality accounting upper bound
    # sampled mode: binomial(30, 3) = 4060 supports, cap forces sampling
    sampled = cv.quarter_net(3, 30, 50, sp.RngStream(5, 1))
    assert not sampled.exhaustive
    assert sampled.supports_evaluated <= 50
    assert np.allclose(np.linalg.norm(sampled.vectors, axis=1), 1.0)
    assert int(np.max(np.count_nonzero(sampled.vectors, axis=1))) <= 3
    again = cv.quarter_net(3, 30, 50, sp.RngStream(5, 1))
    assert np.array_equal(sampled.vectors, again.vectors)


def test_quarter_net_covers_sparse_sphere():
    net = cv.quarter_net(3, 5, 100, sp.RngStream(0, 0))
    assert net.exhaustive
    gen = np.random.default_rng(3)
    supports = np.argsort(gen.random((5000, 5)), axis=1)[:, :3]
    x = np.zeros((5000, 5))
    direction = gen.standard_normal((5000, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    np.put_along_axis(x, supports, direction, axis=1)
    nearest = np.sqrt(np.maximum(2.0 - 2.0 * (x @ net.vectors.T).max(axis=1), 0.0))
    assert float(nearest.max()) <= 0.25


def test_rip_net_examples():
    net = cv.quarter_net(2, 4, 100, sp.RngStream(0, 0))
    zero = cv.rip_net(np.zeros((4, 4)), 2, net)
    assert zero.value == 0.0
    assert zero.method is cv.RipMethod.QUARTER_NET
    assert zero.net_size == len(net)
    identity = cv.rip_net(np.eye(4), 2, net)
    assert identity.value == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        cv.rip_net(np.eye(5), 2, net)
    bad = cv.QuarterNet(2.0 * net.vectors, 2, True, net.supports_evaluated)
    with pytest.raises(ValueError):
        cv.rip_net(np.eye(4), 2, bad)


def test_rip_net_certifies_exact():
    # exact <= 2 * net value on every random instance
    gen = np.random.default_rng(11)
    for trial in range(25):
        p, k = (10, 2) if trial % 2 == 0 else (8, 3)
        d = gen.standard_normal((p, p))
        d = (d + d.T) / 2.0
        net = cv.quarter_net(k, p, 10**6, sp.RngStream(13, trial))
        exact = cv.rip_exact(d, k).value
        certified = cv.rip_net(d, k, net).value
        assert exact <= 2.0 * certified + 1e-12
        assert certified <= exact + 1e-12  # net never exceeds the sup


def test_upsilon_estimate():
    net = cv.quarter_net(1, 2, 10, sp.RngStream(0, 0))
    constant_rows = _matrix(np.ones((50, 2)))
    assert cv.upsilon_estimate(constant_rows, 1, net) == 0.0
    x = np.array([[0.5], [-1.5], [2.5], [0.0]])
    net1 = cv.quarter_net(1, 1, 10, sp.RngStream(0, 0))
    assert cv.upsilon_estimate(_matrix(x), 1, net1) == pytest.approx(
        float(np.var(x[:, 0] ** 2))
    )
    law = sp.IidCoordinates(sp.Gaussian(1.0), 3)
    sample = sp.draw_matrix(law, 2 * 10**5, sp.RngStream(2, 0))
    net3 = cv.quarter_net(1, 3, 100, sp.RngStream(2, 1))
    assert cv.upsilon_estimate(sample, 1, net3) == pytest.approx(2.0, rel=0.05)
    with pytest.raises(ValueError):
        cv.upsilon_estimate(sample, 2, net3)


def test_upsilon_iid_closed_form():
    # Gaussian: m4 = 3 m2^2, variance of a unit projection squared is 2 m2^2
    assert cv.upsilon_iid(1.0, 3.0, 1) == 2.0
    assert cv.upsilon_iid(1.0, 3.0, 7) == 2.0
    # heavy fourth moment concentrates on a coordinate vector
    assert cv.upsilon_iid(2.0, 24.0, 3) == pytest.approx(24.0 - 4.0)
    # light fourth moment spreads out
    assert cv.upsilon_iid(1.0, 1.0, 2) == pytest.approx(-2.0 / 2.0 + 2.0)
    with pytest.raises(ValueError):
        cv.upsilon_iid(1.0, 3.0, 0)


def test_xi_bound_values():
    zero = cv.RsConvexityParams(0.0, 0.0, 100, 10, 2, 1.0)
    assert cv.xi_bound(zero) == 0.0
    example = cv.RsConvexityParams(1.0, 0.0, 10**4, 100, 5, 1.0)
    assert cv.xi_bound(example) == pytest.approx(1.7591929827228483, rel=1e-12)
    # joint form drops the extra factor k on the polynomial term
    params = cv.RsConvexityParams(0.5, 1.2, 500, 40, 4, 1.0, c_alpha=2.0)
    marginal = cv.xi_bound(params, joint=False)
    joint = cv.xi_bound(params, joint=True)
    assert joint <= marginal
    log_ratio = math.log(36.0 * 500 * 40 / 4)
    first = 14.0 * math.sqrt(2.0) * math.sqrt(0.5 * 4 * log_ratio / 500)
    poly = 2.0 * 1.2**2 * math.log(1000.0) ** 2 * (4 * log_ratio) ** 2 / 500
    assert marginal == pytest.approx(first + 4.0 * poly, rel=1e-12)
    assert joint == pytest.approx(first + poly, rel=1e-12)
    with pytest.raises(ValueError):
        cv.xi_bound(cv.RsConvexityParams(1.0, 1.0, 10, 5, 7, 1.0))
    with pytest.raises(ValueError):
        cv.RsConvexityParams(1.0, 1.0, 10, 5, 2, 2.5)


def test_re_check_examples():
    report = cv.re_check(np.eye(3), 0.0, 2)
    assert report.satisfied and report.gamma_n == 0.5
    assert report.lambda_min == pytest.approx(1.0)
    report = cv.re_check(np.eye(3), 1.0, 2)
    assert not report.satisfied and report.gamma_n == 0.0
    report = cv.re_check(np.diag([2.0, 3.0]), 0.001, 1)
    assert report.satisfied and report.gamma_n == 1.0
    with pytest.raises(ValueError):
        cv.re_check(np.array([[1.0, 0.5], [0.0, 1.0]]), 0.0, 1)


def test_rsc_lower_examples():
    theta = np.array([1.0, -2.0])
    assert cv.rsc_lower(theta, 1.5, 0.0, 2) == pytest.approx(1.5 * 5.0)
    assert cv.rsc_lower(np.zeros(3), 1.0, 0.5, 2) == 0.0
    assert cv.rsc_lower(np.array([1.0]), 1.0, 0.01, 1) == pytest.approx(0.19)


def test_cone_min_oracle():
    assert cv.cone_min_oracle(
        np.eye(4), [0, 1], 3.0, 50, sp.RngStream(3, 1)
    ) == pytest.approx(1.0, rel=1e-12)
    # diag(1, 0) with S = {0}: cone floor is 1/(1 + delta^2) = 0.1
    value = cv.cone_min_oracle(np.diag([1.0, 0.0]), [0], 3.0, 2000, sp.RngStream(3, 0))
    assert 0.1 <= value <= 0.12
    with pytest.raises(ValueError):
        cv.cone_min_oracle(np.eye(2), [], 3.0, 10, sp.RngStream(0, 0))
    with pytest.raises(ValueError):
        cv.cone_min_oracle(np.eye(2), [0], 0.5, 10, sp.RngStream(0, 0))


def test_re_verdicts_never_falsified():
    # satisfied => gamma_n = lambda_min / 2, while every Rayleigh ratio
    # is at least lambda_min, so the cone search cannot go below gamma_n
    gen = np.random.default_rng(17)
    for trial in range(5):
        x = gen.standard_normal((60, 5))
        sigma_hat = x.T @ x / 60.0
        report = cv.re_check(sigma_hat, 1e-6, 2)
        assert report.satisfied
        floor = cv.cone_min_oracle(
            sigma_hat, [0, 1], 3.0, 400, sp.RngStream(23, trial)
        )
        assert floor >= report.gamma_n


def test_delta_star_decomposition():
    # centered error <= gram-at-true-mean error + ||mean drift||_inf^2
    laws = [
        sp.IidCoordinates(sp.SymmetricWeibull(1.0), 4),
        sp.LinearMap(np.array([[1.0, 0.0], [1.0, 1.0]]), sp.SymmetricWeibull(1.0)),
        sp.IdenticalCoordinates(sp.Gaussian(1.0), 3),
    ]
    targets = [
        np.diag(np.full(4, 2.0)),
        2.0 * np.array([[1.0, 1.0], [1.0, 2.0]]),
        np.ones((3, 3)),
    ]
    for i, (law, sigma_star) in enumerate(zip(laws, targets)):
        for rep in range(10):
            x = sp.draw_matrix(law, 80, sp.RngStream(29, 10 * i + rep))
            lhs = cv.max_elementwise_error(cv.centered_cov(x), sigma_star)
            drift = float(np.max(np.abs(x.values.mean(axis=0))))
            rhs = cv.max_elementwise_error(cv.gram(x), sigma_star) + drift**2
            assert lhs <= rhs + 1e-12


def test_threshold_support_rule():
    # lam just above the observed error wipes every true zero entry
    law = sp.IidCoordinates(sp.SymmetricWeibull(1.0), 5)
    sigma_star = np.diag(np.full(5, 2.0))
    for rep in range(10):
        x = sp.draw_matrix(law, 200, sp.RngStream(31, rep))
        estimate = cv.centered_cov(x)
        delta_star = cv.max_elementwise_error(estimate, sigma_star)
        kept = cv.hard_threshold(estimate, delta_star * (1.0 + 1e-9))
        assert np.all(kept[sigma_star == 0.0] == 0.0)


def test_csv_roundtrip(tmp_path):
    gen = np.random.default_rng(5)
    matrix = gen.standard_normal((4, 4))
    path = tmp_path / "m.csv"
    cv.save_matrix_csv(matrix, path)
    assert np.array_equal(cv.load_matrix_csv(path), matrix)
    cv.save_matrix_csv(np.array([2.5]), path)
    assert cv.load_matrix_csv(path).shape == (1, 1)
