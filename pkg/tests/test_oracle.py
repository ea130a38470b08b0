from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from fitchain import errors
from fitchain.fit_core import FitParams, build_transition_matrix, four_branch_params
from fitchain.mixing import FitChain, distance_curve, return_time_mean
from fitchain.oracle import (
    exact_curve,
    exact_return_time_mean,
    exact_stationary,
    exact_tv,
    exact_tv_by_subsets,
)
from strategies import fit_params, rational_pair

F = Fraction
FIVE = FitParams(2, (2, 1, 2), (F(1, 2), F(1, 2)), F(1, 10))


def test_two_point_subset_tv():
    assert exact_tv_by_subsets([F(7, 10), F(3, 10)], [F(2, 5), F(3, 5)]) == F(3, 10)


def test_subset_scan_limit():
    with pytest.raises(errors.TooLarge):
        exact_tv_by_subsets([F(1, 17)] * 17, [F(1, 17)] * 17)


def test_subset_scan_equals_half_l1():
    rng = np.random.default_rng(3)
    for dim in range(1, 9):
        for _ in range(20):
            mu, nu = rational_pair(rng, dim)
            assert exact_tv_by_subsets(mu, nu) == exact_tv(mu, nu)


def test_five_state_stationary():
    pi = exact_stationary(FIVE)
    assert pi == [F(22, 31891), F(198, 31891), F(1782, 31891), F(2187, 31891), F(27702, 31891)]
    assert pi[-1] >= F(4, 5)


@given(fit_params(max_k=3, max_len=5, exact=True))
def test_exact_stationary_zero_residue(p):
    pi = exact_stationary(p)
    rows = build_transition_matrix(p, exact=True).rows
    out = [F(0)] * len(pi)
    for x, row in enumerate(rows):
        for y, v in row:
            out[y] += pi[x] * v
    assert out == pi
    assert sum(pi) == 1


def test_five_state_return_time():
    value = exact_return_time_mean(FIVE)
    assert value == F(31891, 27702)
    assert value * exact_stationary(FIVE)[-1] == 1
    assert return_time_mean(FIVE.to_float()) == pytest.approx(float(value), rel=1e-13)


def test_five_state_curve_agrees_with_float_engine():
    ex = exact_curve(FIVE, 50)
    fl = distance_curve(FIVE.to_float(), 50)
    assert np.abs(np.array(ex.floats) - fl.distances).max() <= 1e-10


def test_curve_at_zero():
    ex = exact_curve(FIVE, 0)
    assert ex.distances[0] == 1 - min(ex.pi)


def test_epsilon_scaling_on_five_state():
    gaps = []
    for eps in (F(1, 10), F(1, 100)):
        ex = exact_curve(FIVE.with_epsilon(eps), 6)
        gaps.append(max(abs(d - f) for d, f in zip(ex.distances, ex.reference)))
    assert 5 <= gaps[0] / gaps[1] <= 20


def test_limit_mode_curve():
    p = FitParams(2, (2, 1, 2), (F(1, 2), F(1, 2)), 0, limit_mode=True)
    assert exact_curve(p, 4).distances == [1, 1, 1, F(1, 2), 0]


def test_limits():
    with pytest.raises(errors.TooLarge):
        exact_curve(FIVE, 201)
    big = FitParams(2, (20, 5, 12), (F(1, 2), F(1, 2)), F(1, 10))
    with pytest.raises(errors.TooLarge):
        exact_curve(big, 5)
    with pytest.raises(errors.ValidationError):
        exact_curve(FIVE.to_float(), 5)


def test_json_output_uses_rational_strings():
    doc = exact_curve(FIVE, 2).to_json_dict()
    assert doc["pi"][-1] == "27702/31891"
    assert doc["curve"][0]["d"] == "31869/31891"
    assert doc["curve"][0]["worst_state"] == "x0"


def test_four_branch_exact_vs_float():
    p = four_branch_params(epsilon=F(1, 100))
    ex = exact_curve(p, 40)
    fl = distance_curve(FitChain(p.to_float()), 40)
    assert np.abs(np.array(ex.floats) - fl.distances).max() <= 1e-10
    assert [str(w) for w in ex.worst_start] == [str(w) for w in fl.worst_start]
