import itertools
import math

import numpy as np
import pytest

from sphere_entropy.covering import (Ball, Covering, Face, Sphere, ball_cell_count,
                                     cover_ball_grid, cover_face_grid, face_cell_count,
                                     lift_sphere_cover, lifted_cardinality, sample_set,
                                     verify_covering)
from sphere_entropy.geometry import FaceChart
from sphere_entropy.norms import ExpInvSquare, Lorentz, Lp, Orlicz, PowerLog, PowerWeight

PP = FaceChart((1, 1), 1)


def brute_cells(spec, free, eps):
    # every lattice cell whose lower corner lies in the ball, by full enumeration
    h = 2 * eps
    m = math.ceil(1 / h)
    J = np.array(list(itertools.product(range(m), repeat=free)), dtype=float)
    P = np.zeros((len(J), spec.dim))
    P[:, :free] = h * J
    return int(np.sum(spec.norm(P) <= 1 + 1e-12))


@pytest.mark.parametrize("spec", [Lp(0.5, 3), Lp(1, 3), Lp(2, 4), Lp("inf", 3),
                                  Lorentz(1, PowerWeight(-0.5), 3), Orlicz(PowerLog(2, 1), 3)])
@pytest.mark.parametrize("eps", [0.5, 0.25, 0.125, 0.07])
def test_cell_counts_match_brute_force(spec, eps):
    assert face_cell_count(spec, eps) == brute_cells(spec, spec.dim - 1, eps)
    assert ball_cell_count(spec, eps) == brute_cells(spec, spec.dim, eps)


def test_face_grid_linf_quarter():
    cover = cover_face_grid(Lp("inf", 2), PP, 0.25)
    np.testing.assert_allclose(cover.centers, [[0.25, 0], [0.75, 0]])
    assert cover.radius == 0.25


def test_face_grid_l1_half():
    cover = cover_face_grid(Lp(1, 2), PP, 0.5)
    np.testing.assert_allclose(cover.centers, [[0.5, 0]])
    t = np.linspace(0, 1, 1001)
    assert np.max(np.abs(t - 0.5)) <= cover.radius


@pytest.mark.parametrize("spec", [Lp(0.5, 3), Orlicz(ExpInvSquare(), 2)])
def test_face_grid_eps_one(spec):
    chart = FaceChart((1,) * spec.dim, 0)
    assert len(cover_face_grid(spec, chart, 1.0)) == 1


def test_face_grid_small_p_corner_cells_keep_cover():
    # for p < 1 some boundary cells have their centre outside the ball;
    # those fall back to the lower corner with a larger radius
    spec = Lp(0.5, 3)
    chart = FaceChart((1, -1, 1), 0)
    cover = cover_face_grid(spec, chart, 0.125)
    assert cover.meta["corner_cells"] > 0
    assert cover.radius <= 0.25
    rep = verify_covering(cover, Face(spec, chart), 20_000, 1)
    assert rep.passed


def test_lift_linf_quarter():
    cover = lift_sphere_cover(Lp("inf", 2), 0.25)
    assert len(cover) <= 16
    assert cover.radius == 0.5
    np.testing.assert_allclose(np.max(np.abs(cover.centers), axis=1), 1.0)
    rep = verify_covering(cover, Sphere(Lp("inf", 2)), 100_000, 0)
    assert rep.max_gap <= 0.5


def test_lift_eps_one_single_centre_per_chart():
    for spec in (Lp(1, 3), Lorentz(1, PowerWeight(-0.5), 3)):
        cover = lift_sphere_cover(spec, 1.0)
        assert len(cover) <= 2 ** 3 * 3
        assert cover.radius == 2.0


def test_lift_l1_d3_quarter_count():
    cover = lift_sphere_cover(Lp(1, 3), 0.25)
    assert lifted_cardinality(Lp(1, 3), 0.25) <= 96
    assert len(cover) <= 96
    assert verify_covering(cover, Sphere(Lp(1, 3)), 50_000, 2).passed


def test_ball_grid_covers():
    spec = Lp(0.5, 2)
    cover = cover_ball_grid(spec, 0.1)
    assert verify_covering(cover, Ball(spec), 50_000, 3).passed


def test_verify_single_centre_ball():
    cover = Covering(2.0, Lp("inf", 2), np.zeros((1, 2)), "manual")
    rep = verify_covering(cover, Ball(Lp(2, 2)), 1000, 0)
    assert rep.max_gap <= 1 and rep.passed


def test_verify_empty_cover_fails():
    cover = Covering(1.0, Lp("inf", 2), np.zeros((0, 2)), "manual")
    rep = verify_covering(cover, Sphere(Lp(2, 2)), 100, 0)
    assert rep.covered_fraction == 0 and not rep.passed


def test_verify_detects_gap():
    cover = Covering(0.1, Lp("inf", 2), np.array([[1.0, 0.0]]), "manual")
    assert not verify_covering(cover, Sphere(Lp(2, 2)), 1000, 0).passed


def test_sample_set_shapes():
    S = sample_set(Sphere(Lp(1, 3)), 10, 0)
    np.testing.assert_allclose(np.abs(S).sum(axis=1), 1, atol=1e-12)
    B = sample_set(Ball(Lp(0.5, 3)), 500, 0)
    assert np.all(Lp(0.5, 3).norm(B) <= 1 + 1e-12)
    F = sample_set(Face(Lp(2, 2), PP), 5, 0)
    assert np.all(F[:, 1] == 0) and np.all(F[:, 0] >= 0)


def test_sampling_is_seeded():
    a = sample_set(Sphere(Lp(2, 3)), 50, 9)
    b = sample_set(Sphere(Lp(2, 3)), 50, 9)
    np.testing.assert_array_equal(a, b)


def test_covering_serialization_roundtrip():
    cover = lift_sphere_cover(Lp(0.5, 2), 0.25)
    again = Covering.from_json(cover.to_json())
    np.testing.assert_array_equal(again.centers, cover.centers)
    assert again.radius == cover.radius
    assert again.meta["target_norm"] == Lp(0.5, 2).to_dict()
    lines = cover.to_csv().splitlines()
    assert lines[0] == "x0,x1" and len(lines) == len(cover) + 1


def test_invalid_eps():
    with pytest.raises(ValueError):
        cover_face_grid(Lp(1, 2), PP, 0.0)
    with pytest.raises(ValueError):
        lift_sphere_cover(Lp(1, 2), 1.5)
