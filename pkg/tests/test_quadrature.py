import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phfock import quadrature as quad
from phfock.errors import QuadratureError


@pytest.mark.parametrize("n,D,level", [(1, 16, (128, 128)), (2, 6, (32, 20))])
def test_polydisk_rule_reproduces_gaussian_moments(n, D, level):
    alpha = 1.0
    rule = quad.polydisk_rule(n, quad.gaussian_reach(alpha, 2 * D), *level)
    assert quad.validate_rule(rule, alpha, 2 * D) < 1e-9


def test_polydisk_rule_other_alpha():
    alpha = 2.5
    rule = quad.polydisk_rule(1, quad.gaussian_reach(alpha, 24), 128, 96)
    assert quad.validate_rule(rule, alpha, 24) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_rule_volume_and_moments(n):
    r = 1.7
    rule = quad.ball_rule(n, r, 10, 8)
    vol = math.pi ** n * r ** (2 * n) / math.factorial(n)
    assert np.sum(rule.weights) == pytest.approx(vol, rel=1e-12)
    # int_B |z_1|^2 dA = pi^n r^{2n+2} / (n+1)!
    val = np.sum(rule.weights * np.abs(rule.nodes[:, 0]) ** 2)
    assert val == pytest.approx(math.pi ** n * r ** (2 * n + 2) / math.factorial(n + 1), rel=1e-12)
    assert np.all(np.sum(np.abs(rule.nodes - 0) ** 2, axis=1) <= r * r * (1 + 1e-12))


def test_ball_rule_center():
    c = np.array([1.0 + 2.0j])
    rule = quad.ball_rule(1, 0.5, 12, 12, c)
    assert np.sum(rule.weights * rule.nodes[:, 0]) == pytest.approx(c[0] * math.pi * 0.25)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sphere_rule_is_normalized(n):
    rule = quad.sphere_rule(n, 2.0, 12, 16)
    assert np.sum(rule.weights) == pytest.approx(1.0, rel=1e-13)
    assert np.allclose(np.sum(np.abs(rule.nodes) ** 2, axis=1), 4.0)
    # mean of |z_1|^2 over the sphere of radius R in C^n is R^2 / n
    assert np.sum(rule.weights * np.abs(rule.nodes[:, 0]) ** 2) == pytest.approx(4.0 / n)


def test_disk_rule_area():
    _, weights = quad.disk_rule_1d(3.0, 32, 32)
    assert np.sum(weights) == pytest.approx(9 * math.pi, rel=1e-13)


def test_size_cap():
    with pytest.raises(QuadratureError):
        quad.polydisk_rule(3, 5.0, 400, 400)


def test_levels_are_increasing():
    for n in (1, 2, 3):
        lv = quad.levels(n)
        assert len(lv) >= 2
        sizes = [(r * a) ** n for r, a in lv]
        assert sizes == sorted(sizes) and sizes[-1] <= quad.MAX_NODES


def test_refine_converges_and_reports():
    calls = []

    def evaluate(r, a):
        calls.append(r)
        return 1.0 + 2.0 ** -r, 1.0

    value, err, level = quad.refine(evaluate, [(k, 0) for k in range(1, 60)], 1e-6)
    assert err <= 1e-6 and abs(value - 1.0) < 1e-5
    assert level[0] == calls[-1]


def test_refine_failure_carries_estimates():
    with pytest.raises(QuadratureError) as info:
        quad.refine(lambda r, a: (float(r), 1.0), [(1, 1), (2, 2), (3, 3)], 1e-9, "toy")
    assert info.value.estimates[0] == 2.0 and info.value.estimates[1] == 3.0


def test_refine_absolute_floor():
    value, _, _ = quad.refine(lambda r, a: (1e-120 * r, 1e-120), [(1, 1), (2, 2)], 1e-12,
                              atol=1e-15)
    assert value == 2e-120


@settings(max_examples=25)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=3), st.floats(0.2, 5.0))
def test_gaussian_moment_closed_form(m, alpha):
    expected = (alpha * math.pi) ** len(m)
    for v in m:
        expected *= alpha ** v * math.factorial(v)
    assert quad.gaussian_moment(np.array(m), alpha) == pytest.approx(expected, rel=1e-12)


def test_gauss_legendre_unit_interval():
    x, w = quad._gauss_legendre01(20)
    assert np.all((x > 0) & (x < 1))
    assert np.sum(w) == pytest.approx(1.0)
    assert np.sum(w * x ** 7) == pytest.approx(1 / 8)
