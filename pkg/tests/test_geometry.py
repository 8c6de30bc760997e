import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphere_entropy.geometry import (FaceChart, ShiftError, charts, classify_point,
                                     lift_points, mazur_map, project_hyperplane, shift_amount,
                                     shift_amounts, shift_to_sphere)
from sphere_entropy.norms import Lorentz, Lp, Orlicz, PowerLog, PowerWeight

PP = FaceChart((1, 1), 1)


def test_charts_enumeration():
    cs = list(charts(3))
    assert len(cs) == 2 ** 3 * 3
    assert cs[0] == FaceChart((1, 1, 1), 0)
    assert len(set(cs)) == len(cs)


def test_chart_validation():
    with pytest.raises(ValueError):
        FaceChart((1, 0), 0)
    with pytest.raises(ValueError):
        FaceChart((1, 1), 2)


def test_classify_point():
    assert tuple(classify_point([0.5, 0], PP)) == (True, True, True)
    m = classify_point([0.5, 0.6], FaceChart((1, 1), 0))
    assert m.in_orthant and not m.in_face and m.in_cone
    assert not classify_point([-0.5, 0], PP).in_orthant


def test_project_hyperplane():
    np.testing.assert_array_equal(project_hyperplane([1.0, 2.0, 3.0], 0), [0, 2, 3])
    np.testing.assert_array_equal(project_hyperplane([1.0, 2.0], 1), [1, 0])
    x = np.array([1.0, 0.0, 3.0])
    np.testing.assert_array_equal(project_hyperplane(x, 1), x)


def test_shift_l1_origin():
    res = shift_amount(Lp(1, 3), FaceChart((1, 1, 1), 2), [0, 0, 0])
    assert res.s == pytest.approx(1 / 3, abs=1e-12)
    np.testing.assert_allclose(shift_to_sphere(Lp(1, 3), FaceChart((1, 1, 1), 2), [0, 0, 0]),
                               [1 / 3] * 3, atol=1e-12)


def test_shift_on_sphere_is_zero():
    assert shift_amount(Lp(2, 2), PP, [1, 0]).s == 0.0


def test_shift_l2_quadratic():
    # (0.5 + s)^2 + s^2 = 1  =>  s = (sqrt(7) - 1) / 4
    s = (math.sqrt(7) - 1) / 4
    for method in ("falsi", "bisect"):
        res = shift_amount(Lp(2, 2), PP, [0.5, 0], method=method)
        assert res.s == pytest.approx(s, abs=1e-9)
        assert res.residual <= 1e-10
    np.testing.assert_allclose(shift_to_sphere(Lp(2, 2), PP, [0.5, 0]), [0.5 + s, s], atol=1e-9)


def test_shift_linf():
    # max(0.2 + s, s) = 1  =>  s = 0.8
    np.testing.assert_allclose(shift_to_sphere(Lp("inf", 2), PP, [0.2, 0]), [1.0, 0.8], atol=1e-12)


def test_shift_negative_orthant():
    chart = FaceChart((-1, 1, -1), 1)
    # 2 (0.25 + s) + s = 1  =>  s = 1/6
    y = shift_to_sphere(Lp(1, 3), chart, [-0.25, 0, -0.25])
    np.testing.assert_allclose(y, [-0.25 - 1 / 6, 1 / 6, -0.25 - 1 / 6], atol=1e-12)


def test_shift_rejects_points_off_the_face():
    with pytest.raises(ValueError):
        shift_amount(Lp(2, 2), PP, [0.5, 0.1])
    with pytest.raises(ValueError):
        shift_amount(Lp(2, 2), PP, [-0.5, 0])
    with pytest.raises(ValueError):
        shift_amount(Lp(2, 3), PP, [0.5, 0, 0])


def test_shift_detects_unnormalized_norm():
    class Shrunk(Lp):
        def level(self, X):
            return 0.1 * super().level(X)
    with pytest.raises(ShiftError):
        shift_amounts(Shrunk(2, 2), PP, np.array([[0.5, 0.0]]))


def test_flat_flag_false_for_strictly_increasing():
    assert not shift_amount(Lp(2, 2), PP, [0.5, 0]).flat


@pytest.mark.parametrize("spec", [Lp(0.5, 4), Lp(1, 4), Lp(2, 4), Lp("inf", 4),
                                  Lorentz(1, PowerWeight(-0.5), 4), Orlicz(PowerLog(2, 1), 4)])
def test_lift_lands_on_sphere_in_cone(spec):
    rng = np.random.default_rng(11)
    chart = FaceChart((1, -1, 1, -1), 2)
    X = rng.random((500, 4))
    X[:, 2] = 0
    X /= np.maximum(spec.norm(X), 1.0)[:, None]
    X *= chart.signs
    Y = lift_points(spec, chart, X)
    np.testing.assert_allclose(spec.norm(Y), 1.0, atol=1e-10)
    assert np.all(np.abs(Y[:, 2])[:, None] <= np.abs(Y) + 1e-9)
    assert np.all(Y * chart.signs >= -1e-15)


@pytest.mark.parametrize("spec", [Lp(0.5, 3), Lorentz(1, PowerWeight(-0.5), 3),
                                  Orlicz(PowerLog(2, 1), 3)])
def test_falsi_agrees_with_bisection(spec):
    rng = np.random.default_rng(12)
    chart = FaceChart((1, 1, 1), 0)
    X = rng.random((400, 3))
    X[:, 0] = 0
    X /= np.maximum(spec.norm(X), 1.0)[:, None]
    a = shift_amounts(spec, chart, X)
    b = shift_amounts(spec, chart, X, method="bisect")
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_mazur_examples():
    x = np.array([0.6, -0.8])
    np.testing.assert_allclose(mazur_map(2, x), x)
    np.testing.assert_allclose(mazur_map(1, [math.sqrt(2) / 2, -math.sqrt(2) / 2]), [0.5, -0.5])
    np.testing.assert_allclose(mazur_map(0.5, [1, 0]), [1, 0])


def test_mazur_rejects_off_sphere():
    with pytest.raises(ValueError):
        mazur_map(1, [1.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3), st.sampled_from([0.5, 1.0, 1.5, 3.0]))
def test_mazur_roundtrip(v, p):
    x = np.array(v) / np.linalg.norm(v)
    y = mazur_map(p, x)
    assert float(Lp(p, 3).norm(y)) == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(mazur_map(2, y, source=p), x, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_shift_monotone_in_dominated_pairs(a, b, u):
    spec = Lp(0.7, 3)
    chart = FaceChart((1, 1, 1), 1)
    y = np.array([a, 0.0, b])
    y /= max(float(spec.norm(y)), 1.0)
    x = u * y
    sx = shift_amount(spec, chart, x).s
    sy = shift_amount(spec, chart, y).s
    assert sy <= sx + 1e-9
    assert sx <= sy + np.max(np.abs(x - y)) + 1e-9
