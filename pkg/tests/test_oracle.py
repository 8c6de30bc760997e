import itertools
import math

import numpy as np
import pytest

from sphere_entropy.covering import Ball, Sphere
from sphere_entropy.norms import Lp
from sphere_entropy.oracle import (OracleError, covering_number_oracle, greedy_packing,
                                   packing_oracle, solve_set_cover, sublattice_packing,
                                   target_points)


def brute_set_cover(M):
    for r in range(1, M.shape[0] + 1):
        for rows in itertools.combinations(range(M.shape[0]), r):
            if M[list(rows)].any(axis=0).all():
                return r
    raise AssertionError("not coverable")


def test_interval_third():
    T = Ball(Lp("inf", 1))
    assert covering_number_oracle(T, 1 / 3) == 3
    assert covering_number_oracle(T, 0.3333) == 3
    assert packing_oracle(T, 1 / 3) == 3


def test_square_half():
    assert covering_number_oracle(Ball(Lp("inf", 2)), 0.5, 64) == 4


def test_eps_at_least_one():
    assert covering_number_oracle(Ball(Lp(2, 2)), 1.0) == 1
    assert packing_oracle(Ball(Lp("inf", 1)), 1.0) == 1


def test_packing_below_covering_linf_sphere():
    T = Sphere(Lp("inf", 2))
    assert packing_oracle(T, 0.25, 64) <= covering_number_oracle(T, 0.25, 64)


@pytest.mark.parametrize("target, eps, res", [
    (Ball(Lp(1, 2)), 0.3, 16), (Ball(Lp(0.5, 2)), 0.2, 16), (Sphere(Lp(1, 2)), 0.2, 24),
    (Ball(Lp(2, 1)), 0.15, 41),
])
def test_sandwich_packing_exact_greedy(target, eps, res):
    p = packing_oracle(target, eps, res)
    exact = covering_number_oracle(target, eps, res, "exact")
    greedy = covering_number_oracle(target, eps, res, "greedy")
    assert p <= exact <= greedy
    assert greedy <= exact * (math.log(len(target_points(target, res))) + 1)


def test_exact_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(25):
        M = rng.random((9, 12)) < 0.3
        M[rng.integers(0, 9, 12), np.arange(12)] = True
        assert len(solve_set_cover(M, "exact")) == brute_set_cover(M)
        assert len(solve_set_cover(M, "greedy")) >= brute_set_cover(M)


def test_greedy_packing_separation():
    rng = np.random.default_rng(6)
    P = rng.random((400, 2))
    K = greedy_packing(P, 0.1)
    D = np.max(np.abs(K[:, None] - K[None]), axis=2) + np.eye(len(K)) * 9
    assert D.min() > 0.1
    # maximality: every point is within the separation of a kept one
    assert np.all(np.min(np.max(np.abs(P[:, None] - K[None]), axis=2), axis=1) <= 0.1)


def test_sublattice_packing_separation():
    P = target_points(Ball(Lp(1, 2)), 33)
    h = 2 / 32
    K = sublattice_packing(P, h, 4)
    D = np.max(np.abs(K[:, None] - K[None]), axis=2) + np.eye(len(K)) * 9
    assert D.min() >= 4 * h - 1e-12


def test_target_points_sorted_and_inside():
    P = target_points(Ball(Lp(0.5, 2)), 21)
    assert np.all(Lp(0.5, 2).norm(P) <= 1 + 1e-12)
    assert np.all(np.lexsort(P.T[::-1]) == np.arange(len(P)))
    S = target_points(Sphere(Lp(2, 2)), 21)
    np.testing.assert_allclose(Lp(2, 2).norm(S), 1, atol=1e-11)


def test_guards():
    with pytest.raises(OracleError):
        covering_number_oracle(Ball(Lp(2, 4)), 0.5)
    with pytest.raises(OracleError):
        covering_number_oracle(Ball(Lp(2, 2)), 0.5, 1000)
    with pytest.raises(OracleError):
        covering_number_oracle(Ball(Lp(2, 2)), -1)
