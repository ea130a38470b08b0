import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fitchain import errors
from fitchain.fit_core import validate_params
from fitchain.gallery import (
    deinterleave,
    dense_exact,
    dense_family,
    dense_member,
    interleave,
    nested_increments,
    nested_limit,
    nested_windows_params,
    rational,
    sup_distance,
    uncountable_windows_params,
    verify_report,
)
from fitchain.profiles import ProfileSpec


def test_uncountable_n2000():
    gp = uncountable_windows_params(2000)
    assert gp.params.k == 2
    assert gp.params.lengths == (2000, 12, 158)
    assert gp.params.epsilon == Fraction(1, 2**40)
    assert not gp.flags["repaired"]


def test_uncountable_k_override():
    gp = uncountable_windows_params(2000, k_override=4)
    assert gp.params.lengths == (2000, 4, 20, 95, 437)
    assert gp.params.weights == (Fraction(1, 4),) * 4


def test_uncountable_k_too_small():
    with pytest.raises(errors.KTooSmall):
        uncountable_windows_params(100)


def test_uncountable_small_n_repair():
    gp = uncountable_windows_params(8, k_override=6)
    lengths = gp.params.lengths[1:]
    assert all(a < b for a, b in zip(lengths, lengths[1:]))
    assert gp.flags["repaired"]
    assert gp.params.epsilon == Fraction(1, 256)


@given(st.integers(8, 5000), st.integers(2, 6))
def test_uncountable_always_valid(n, k):
    gp = uncountable_windows_params(n, k_override=k)
    assert validate_params(gp.params.to_json_dict()) == gp.params
    if n >= 1000 and k <= 3:
        assert not gp.flags["repaired"]


def test_nested_n2000():
    gp = nested_windows_params(2000)
    p = gp.params
    assert p.k == 8 and p.l0 == 4000
    assert p.lengths[1:] == (1908, 1931, 1954, 1977, 2023, 2046, 2069, 2092)
    assert gp.flags["covered_indices"] == [1, 2]
    assert gp.flags["extended_indices"] == [3, 4]


def test_nested_symmetry():
    p = nested_windows_params(2000).params
    half = p.k // 2
    for i in range(1, half + 1):
        assert p.lengths[half + i] + p.lengths[half + 1 - i] == 2 * 2000


def test_nested_overlap_goes_to_smaller_q():
    incs, flags = nested_increments(10**12, 3)
    # L = 3: q = 2 covers 2..3, q = 3 covers 1..1
    assert flags["covered_indices"] == [1, 2, 3]
    assert incs[1] == math.ceil(10**6 / 2)
    assert incs[0] == math.ceil(10**4 / 4)
    _, flags4 = nested_increments(10**12, 4)
    # L = 4: q = 2 covers 2..4, q = 3 covers 1..2, q = 4 covers 1..1
    assert flags4["overlaps"] == [2, 1]


def test_nested_l_too_small():
    with pytest.raises(errors.LTooSmall):
        nested_windows_params(1000)


@pytest.mark.parametrize("c, value", [(-2, 2), (-1, 2), (-0.5, 1.5), (0, 0), (0.5, -1.5), (1, -2), (3, -2)])
def test_nested_limit(c, value):
    assert nested_limit(c) == value


def test_interleave_first_steps():
    assert [interleave(s) for s in (1, 2, 3)] == [(1, 1), (1, 2), (2, 1)]


def test_interleave_bijective():
    seen = {interleave(s) for s in range(1, 10_001)}
    assert len(seen) == 10_000
    assert all(deinterleave(*interleave(s)) == s for s in range(1, 2000))


@given(st.integers(1, 50))
def test_interleave_rows_increasing(m):
    steps = [deinterleave(m, n) for n in range(1, 30)]
    assert steps == sorted(steps)
    assert all(interleave(s)[0] == m for s in steps)


def test_rational_enumeration():
    assert [rational(j) for j in range(7)] == [0, 1, -1, Fraction(1, 2), Fraction(-1, 2), 2, -2]
    firsts = {rational(j) for j in range(5000)}
    assert len(firsts) == 5000


def test_dense_member_shape():
    for index in range(200):
        p = dense_family(index)
        k, qs, _ = dense_member(index)
        assert isinstance(p, ProfileSpec)
        assert list(qs) == sorted(qs)
        assert p(float(qs[0]) - 1) == 1.0
        assert p(float(qs[-1])) == 0.0
        assert p(float(qs[-1]) + 1) == 0.0
        values = p(np.linspace(-10, 10, 401))
        assert np.all(np.diff(values) <= 1e-15)


def test_dense_one_segment_members():
    k, qs, _ = dense_member(0)
    assert k == 1 and len(qs) == 2
    a = dense_exact(0)
    mid = (qs[0] + qs[1]) / 2
    assert a(qs[0]) == 1 and a(mid) == Fraction(1, 2) and a(qs[1]) == 0


def test_dense_deterministic_and_injective():
    first = [dense_member(i) for i in range(10_001)]
    again = [dense_member(i) for i in range(0, 10_001, 97)]
    assert again == first[::97]
    keys = {(k, qs) for k, qs, _ in first}
    assert len(keys) == len(first)


def test_dense_refinements_are_skipped():
    # (-1, 0, 1) with two segments is the same function as (-1, 1) with one
    members = [dense_member(i)[:2] for i in range(300)]
    assert (2, (Fraction(-1), Fraction(0), Fraction(1))) in members
    assert (1, (Fraction(-1), Fraction(1))) not in members


def test_dense_family_is_dense_enough():
    def logistic(c):
        return 1 / (1 + math.exp(c))

    best = min(sup_distance(dense_family(i), logistic, steps=801) for i in range(10_001))
    assert best <= 0.1


def test_uncountable_report():
    report = verify_report("uncountable", [2000], [-1, 0.5, 1, 2], [0.5], k_override=4)
    eps = 2.0**-40
    assert report.max_gap <= 10 * eps + 1 / 4
    for m in report.measured:
        assert 0 <= m["value"] <= 1
        if m["c"] <= 0:
            assert m["value"] >= 1 - 2 * eps
    provs = {p["provenance"] for p in report.predicted}
    assert provs == {"finite-n F", "limit"}


def test_nested_report_center():
    report = verify_report("nested", [2000], [0], [2])
    assert abs(report.measured[0]["value"]) <= 0.1
    assert report.flags["2000"]["interpretation"] == "x := c"


def test_dense_report_json():
    report = verify_report("dense", [256], [-1, 0, 1], [0, 3])
    doc = report.to_json_dict()
    assert set(doc) >= {"name", "params", "grid", "predicted", "measured", "max_gap", "flags"}
    assert report.max_gap <= 0.05


def test_report_threads_do_not_change_output():
    a = verify_report("uncountable", [1700, 2000], [-1, 1], [0.5], k_override=3, threads=1)
    b = verify_report("uncountable", [1700, 2000], [-1, 1], [0.5], k_override=3, threads=2)
    assert a.to_json() == b.to_json()


def test_unknown_gallery():
    with pytest.raises(errors.ValidationError):
        verify_report("spiral", [10], [0], [1])
