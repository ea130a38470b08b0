import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import poisson

from fitchain import errors
from fitchain.fit_core import FitParams, four_branch_params
from fitchain.mixing import FitChain
from fitchain.poissonize import (
    ct_curve,
    ct_distance,
    ct_profile_curve,
    ct_profile_eval,
    event_window,
    poisson_weights,
)
from fitchain.profiles import logistic_profile, window_half_width
from strategies import fit_params

FIVE_01 = FitParams(2, (2, 1, 2), (0.5, 0.5), 0.01)
FIVE_1 = FitParams(2, (2, 1, 2), (0.5, 0.5), 0.1)


def test_weight_at_zero():
    tr = poisson_weights(1.0, 1e-12)
    assert abs(tr.weight(0) - math.exp(-1)) <= 1e-15
    assert tr.left == 0


def test_window_for_t_100():
    tr = poisson_weights(100.0, 1e-10)
    assert tr.left <= 30 and tr.right >= 170
    assert tr.weights.sum() >= 1 - 1e-10
    assert tr.tail_mass <= 1e-10
    # against an independent pmf
    ref = poisson.pmf(np.arange(tr.left, tr.right + 1), 100.0)
    assert np.allclose(tr.weights, ref, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("t", [-1.0, float("nan")])
def test_negative_time_rejected(t):
    with pytest.raises(ValueError):
        poisson_weights(t, 1e-10)


def test_time_zero_is_point_mass():
    tr = poisson_weights(0.0, 1e-10)
    assert (tr.left, tr.right, tr.tail_mass) == (0, 0, 0.0)
    assert tr.weights.tolist() == [1.0]


def test_bad_tolerance():
    with pytest.raises(ValueError):
        poisson_weights(1.0, 0.0)
    with pytest.raises(errors.ToleranceUnreachable):
        poisson_weights(1e4, 1e-14)


@given(st.floats(0.01, 5000), st.sampled_from([1e-6, 1e-8, 1e-10, 1e-12]))
def test_truncation_invariants(t, tol):
    tr = poisson_weights(t, tol)
    assert tr.tail_mass <= tol
    assert tr.weights.sum() + tr.tail_mass == pytest.approx(1.0, abs=1e-14)
    assert tr.left <= math.floor(t) <= tr.right
    assert len(tr) == len(tr.weights)


def test_large_time_is_mixed():
    assert ct_distance(FIVE_1, 50.0 * 4, 1e-10, "exact") <= 0.01


def _taylor_expm(q, t, depth):
    out = np.eye(len(q))
    term = np.eye(len(q))
    for j in range(1, depth):
        term = term @ (t * q) / j
        out = out + term
    return out


def test_matches_matrix_exponential():
    chain = FitChain(FIVE_01)
    q = chain.matrix.to_dense() - np.eye(chain.space.size)
    shallow, deep = _taylor_expm(q, 3.0, 35), _taylor_expm(q, 3.0, 60)
    assert np.abs(shallow - deep).max() <= 1e-9
    assert np.abs(deep - expm(3.0 * q)).max() <= 1e-12
    expected = (0.5 * np.abs(deep - chain.pi).sum(axis=1)).max()
    assert ct_distance(FIVE_01, 3.0, 1e-12, "exact") == pytest.approx(expected, abs=1e-8)
    assert ct_distance(FIVE_01, 3.0, 1e-12, "exact") == pytest.approx(0.535264173288329, abs=1e-10)


def test_half_trunk_lower_bound():
    p = four_branch_params(epsilon=1e-2)
    t = p.l0 / 2
    bound = 1 - 2 * 1e-2 - poisson.sf(p.l0, t)
    assert ct_distance(p, t, 1e-12, "root") >= bound


@given(fit_params(max_k=3, max_len=6), st.floats(0.5, 40))
def test_truncation_self_consistent(p, t):
    a = ct_distance(p, t, 1e-8, "exact")
    b = ct_distance(p, t, 1e-10, "exact")
    assert abs(a - b) <= 1e-8


@given(fit_params(max_k=3, max_len=6))
def test_ct_curve_monotone(p):
    times = np.linspace(0.5, 40, 25)
    values = ct_curve(p, times, 1e-11, "exact")
    assert np.all(np.diff(values) <= 1e-11)


def test_ct_exact_cap():
    with pytest.raises(errors.StateSpaceTooLarge):
        ct_curve(four_branch_params(), [1.0], 1e-10, "exact", cap=5)


def test_event_window():
    assert event_window(1024, 64) == pytest.approx(math.sqrt(64 * 32))


def test_profile_tails():
    p = logistic_profile()
    t_n, w_n, n = 256, 28, 256
    v_n = window_half_width(t_n, w_n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        left, right = ct_profile_curve(p, t_n, w_n, n, [-v_n / w_n, v_n / w_n], 1e-10)
    assert left.distance >= 1 - 2 * math.exp(-n) - 1e-10 - poisson.sf(t_n - v_n, left.t)
    assert right.distance <= 0.2


def test_profile_center_n1024():
    n = 1024
    w_n = math.ceil(n**0.6)
    pt = ct_profile_eval(logistic_profile(), n, w_n, n, 0.0, 1e-10)
    assert abs(pt.distance - 0.5) <= 0.05
    assert pt.u_n == pytest.approx(math.sqrt(w_n * math.sqrt(n)))


def test_profile_warns_on_narrow_window():
    with pytest.warns(UserWarning):
        ct_profile_eval(logistic_profile(), 400, 20, 10, 0.0, 1e-8)
