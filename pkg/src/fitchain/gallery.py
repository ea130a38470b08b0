"""Pathological examples: many windows, nested windows, a dense profile family.

Each generator returns parameters together with a ``flags`` dict recording any
repair or convention applied at desk-scale ``n``. :func:`verify_report`
evaluates the distance at the relevant time points (root start) and compares
it with both the finite-``n`` truth (the deterministic-limit curve ``F``) and
the asymptotic limit.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import KTooSmall, LTooSmall, ValidationError
from .fit_core import FitParams
from .mixing import FitChain, WorstStartMode, distance_curve
from .profiles import ProfileSpec, build_profile_chain, fgF_from_params

EPS_EXPONENT_CAP = 40
# wide windows so the whole profile support fits at desk-scale n
DENSE_V_EXPONENT = 0.5


class GalleryParams(NamedTuple):
    params: FitParams
    flags: dict


def _clamped_epsilon(n: int) -> Fraction:
    return Fraction(1, 2 ** min(n, EPS_EXPONENT_CAP))


def _iroot_floor(value: int, root: int) -> int:
    """Largest ``m`` with ``m**root <= value`` (exact integer arithmetic)."""
    if value < 2:
        return value
    m = int(round(value ** (1.0 / root)))
    while m**root > value:
        m -= 1
    while (m + 1) ** root <= value:
        m += 1
    return m


def _log_log_floor(n: int) -> int:
    return math.floor(math.log(math.log(n)))


# -- many windows -------------------------------------------------------------


def uncountable_windows_params(n: int, k_override: int | None = None) -> GalleryParams:
    """Trunk ``n``, ``k`` branches of lengths ``floor(n**(i/(k+1)))``, equal weights.

    Floor collisions (small ``n``) are repaired by bumping to the next free
    length; ``flags["repaired"]`` records it.
    """
    if n < 8:
        raise ValidationError(f"n must be >= 8, got {n}")
    k = k_override if k_override is not None else _log_log_floor(n)
    if k < 2:
        raise KTooSmall(f"floor(ln ln {n}) = {k} < 2; pass k_override or use n >= 1619")
    raw = [_iroot_floor(n**i, k + 1) for i in range(1, k + 1)]
    lengths, repaired = [], []
    for i, li in enumerate(raw, start=1):
        li = max(li, 1, lengths[-1] + 1 if lengths else 1)
        if li != raw[i - 1]:
            repaired.append(i)
        lengths.append(li)
    params = FitParams(
        k=k,
        lengths=(n, *lengths),
        weights=(Fraction(1, k),) * k,
        epsilon=_clamped_epsilon(n),
    )
    flags = {"repaired": bool(repaired), "repaired_indices": repaired, "k_override": k_override}
    return GalleryParams(params, flags)


# -- nested windows -----------------------------------------------------------


def nested_increments(n: int, big_l: int) -> tuple[list[int], dict]:
    """Increments ``m_1 .. m_{k/2}`` with the conventions for uncovered indices."""
    half = 2**big_l
    m: dict[int, int] = {}
    overlaps = []
    # smaller q first: it wins on a shared endpoint
    for q in range(2, big_l + 1):
        lo = math.ceil(Fraction(big_l, 2 ** (q - 1)))
        hi = math.floor(Fraction(big_l * 4, 2**q))
        value = math.ceil(n ** (1 / q) * 2 ** (1 - q))
        for i in range(max(lo, 1), hi + 1):
            if i in m:
                overlaps.append(i)
            else:
                m[i] = value
    covered = sorted(m)
    extended = [i for i in range(1, half + 1) if i not in m]
    last = m[covered[-1]]
    for i in extended:
        m[i] = last
    flags = {"covered_indices": covered, "extended_indices": extended, "overlaps": overlaps}
    return [m[i] for i in range(1, half + 1)], flags


def nested_windows_params(n: int) -> GalleryParams:
    """Trunk ``2n`` and ``2**(L+1)`` branches placed symmetrically around ``n``."""
    if n < 8:
        raise ValidationError(f"n must be >= 8, got {n}")
    big_l = _log_log_floor(n)
    if big_l < 2:
        raise LTooSmall(f"floor(ln ln {n}) = {big_l} < 2; need n >= 1619")
    k = 2 ** (big_l + 1)
    incs, flags = nested_increments(n, big_l)
    partial = [sum(incs[:i]) for i in range(1, k // 2 + 1)]
    upper = [n + s for s in partial]
    lower = [n - s for s in partial][::-1]
    if lower[0] < 1:
        raise ValidationError(f"n={n} too small: shortest branch would be {lower[0]}")
    params = FitParams(
        k=k,
        lengths=(2 * n, *lower, *upper),
        weights=(Fraction(1, k),) * k,
        epsilon=_clamped_epsilon(n),
    )
    flags = dict(flags, L=big_l, interpretation="x := c")
    return GalleryParams(params, flags)


def nested_limit(c: float) -> float:
    """Limit of ``2**q (d - 1/2)`` at ``3n + c n**(1/q)``, reading the free symbol as ``c``."""
    if c <= -1:
        return 2.0
    if c < 0:
        return 1.0 - c
    if c == 0:
        return 0.0
    if c < 1:
        return -1.0 - c
    return -2.0


# -- dense family -------------------------------------------------------------


def interleave(step: int) -> tuple[int, int]:
    """Anti-diagonal pairing of positive integers: 1 -> (1,1), 2 -> (1,2), 3 -> (2,1)."""
    if step < 1:
        raise ValidationError(f"step must be >= 1, got {step}")
    # diagonal s holds the s - 1 pairs with m + n = s
    s = math.isqrt(8 * step) // 2 + 1
    while (s - 1) * (s - 2) // 2 >= step:
        s -= 1
    while s * (s - 1) // 2 < step:
        s += 1
    pos = step - (s - 1) * (s - 2) // 2
    return pos, s - pos


def deinterleave(m: int, n: int) -> int:
    s = m + n
    return (s - 1) * (s - 2) // 2 + m


def _calkin_wilf(j: int) -> Fraction:
    """``j``-th positive rational (1-based) in breadth-first Calkin-Wilf order."""
    # walk the binary expansion of j below its leading bit
    a, b = 1, 1
    for bit in bin(j)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


@lru_cache(maxsize=None)
def rational(j: int) -> Fraction:
    """Bijection N -> Q: 0, 1, -1, 1/2, -1/2, 2, -2, 1/3, ..."""
    if j == 0:
        return Fraction(0)
    cw = _calkin_wilf((j + 1) // 2)
    return cw if j % 2 else -cw


def _colex_unrank(rank: int, size: int) -> list[int]:
    out = []
    for i in range(size, 0, -1):
        if rank == 0:
            # the remaining elements are the smallest ones
            out.extend(range(i - 1, -1, -1))
            break
        c = i - 1
        while math.comb(c + 1, i) <= rank:
            c += 1
        rank -= math.comb(c, i)
        out.append(c)
    return out[::-1]


@lru_cache(maxsize=None)
def _rational_pair(j: int) -> tuple[float, int, int]:
    r = rational(j)
    # the float is only a sort key: small-denominator rationals have distinct doubles
    return float(r), r.numerator, r.denominator


def _canonical(pairs: Sequence[tuple[int, int]]) -> tuple:
    """Breakpoints ``(q_i, i)`` of a sorted tuple with the non-kinks removed.

    The value steps are uniform, so the slope changes at ``q_i`` exactly when the
    spacing does. Rationals are ``(num, den)`` pairs to keep this in integers.
    """
    k = len(pairs) - 1
    gaps = [(n2 * d1 - n1 * d2, d1 * d2) for (n1, d1), (n2, d2) in zip(pairs, pairs[1:])]
    keep = [0]
    for i in range(1, k):
        (a, b), (c, d) = gaps[i - 1], gaps[i]
        if a * d != b * c:
            keep.append(i)
    keep.append(k)
    # value 1 - i/k as the reduced pair (k - i, k)
    return tuple((pairs[i], (k - i) // math.gcd(k - i, k), k // math.gcd(k - i, k)) for i in keep)


@dataclass
class _DenseEnumeration:
    seen: set = field(default_factory=set)
    members: list = field(default_factory=list)
    step: int = 0

    def extend_to(self, index: int):
        while len(self.members) <= index:
            self.step += 1
            k, b = interleave(self.step)
            ranked = sorted(_rational_pair(j) for j in _colex_unrank(b - 1, k + 1))
            pairs = tuple((num, den) for _, num, den in ranked)
            key = _canonical(pairs)
            # a uniform refinement of an earlier tuple is the same function
            if key in self.seen:
                continue
            self.seen.add(key)
            self.members.append((k, pairs, self.step))


_DENSE = _DenseEnumeration()


def dense_member(index: int) -> tuple[int, tuple[Fraction, ...], int]:
    """``(k, (q_0..q_k), pairing step)`` of the ``index``-th family member."""
    if index < 0:
        raise ValidationError(f"index must be >= 0, got {index}")
    _DENSE.extend_to(index)
    k, pairs, step = _DENSE.members[index]
    return k, tuple(Fraction(num, den) for num, den in pairs), step


def dense_family(index: int) -> ProfileSpec:
    """``index``-th piecewise-affine profile: value ``1 - i/k`` at ``q_i``, linear between.

    Members are enumerated by pairing a segment count ``k`` with the colex rank
    of a ``(k+1)``-subset of the rationals; tuples describing a function that
    was already listed are skipped, so distinct indices give distinct functions.
    """
    k, qs, _ = dense_member(index)
    return ProfileSpec(tuple((float(q), 1.0 - i / k) for i, q in enumerate(qs)))


def dense_exact(index: int):
    """Exact evaluator ``x -> a(x)`` of a family member (Fractions in, Fractions out)."""
    k, qs, _ = dense_member(index)

    def a(x):
        x = Fraction(x)
        if x < qs[0]:
            return Fraction(1)
        if x >= qs[-1]:
            return Fraction(0)
        for i in range(k):
            if qs[i] <= x < qs[i + 1]:
                return 1 - Fraction(i, k) - Fraction(1, k) * (x - qs[i]) / (qs[i + 1] - qs[i])
        raise AssertionError("unreachable")

    return a


def sup_distance(p: ProfileSpec, target, lo: float = -12.0, hi: float = 12.0, steps: int = 4801) -> float:
    """Sup-norm distance on a fine grid plus the breakpoints of ``p``."""
    grid = np.union1d(np.linspace(lo, hi, steps), p.cs)
    ours = p(grid)
    theirs = np.array([target(float(c)) for c in grid])
    return float(np.abs(ours - theirs).max())


# -- reports ------------------------------------------------------------------


@dataclass
class GalleryReport:
    name: str
    params: list
    grid: dict
    predicted: list
    measured: list
    max_gap: float
    gap_by_n: dict
    flags: dict

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "grid": self.grid,
            "predicted": self.predicted,
            "measured": self.measured,
            "max_gap": self.max_gap,
            "gap_by_n": self.gap_by_n,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _root_distances(params: FitParams, times: Sequence[int]) -> dict[int, float]:
    curve = distance_curve(FitChain(params), times=times, mode=WorstStartMode.ROOT)
    return dict(zip(curve.times.tolist(), curve.distances.tolist()))


def _evaluate_n(name, n, c_grid, param_grid, k_override) -> dict:
    """All grid points of one size ``n``."""
    predicted, measured, params_out, flags, gaps = [], [], [], {}, []
    if name in ("uncountable", "nested"):
        jobs = []
        if name == "uncountable":
            gp = uncountable_windows_params(n, k_override)
            for alpha in param_grid:
                for c in c_grid:
                    t = math.floor(n + c * n**alpha)
                    limit = 1.0 if c <= 0 else 1.0 - alpha
                    jobs.append((alpha, c, t, limit, lambda d: d))
        else:
            gp = nested_windows_params(n)
            for q in param_grid:
                for c in c_grid:
                    t = math.floor(3 * n + c * n ** (1 / q))
                    jobs.append((q, c, t, nested_limit(c), lambda d, q=q: 2**q * (d - 0.5)))
        params = gp.params
        flags[str(n)] = gp.flags
        params_out.append({"n": n, **params.to_json_dict()})
        profile = fgF_from_params(params).F
        dist = _root_distances(params, sorted({j[2] for j in jobs}))
        for key, c, t, limit, scale in jobs:
            truth = scale(float(profile(t)))
            value = scale(dist[t])
            predicted.append(
                {"n": n, "param": key, "c": c, "t": t, "value": truth, "provenance": "finite-n F"}
            )
            predicted.append({"n": n, "param": key, "c": c, "t": t, "value": limit, "provenance": "limit"})
            measured.append({"n": n, "param": key, "c": c, "t": t, "value": value})
            gaps.append(abs(value - truth))
    elif name == "dense":
        w = math.ceil(math.sqrt(n))
        for index in param_grid:
            p = dense_family(index)
            built = build_profile_chain(p, n, w, n, v_exponent=DENSE_V_EXPONENT)
            params_out.append({"n": n, "index": index, **built.params.to_json_dict()})
            flags[f"{n}/{index}"] = {"synthetic_midpoint": built.step.synthetic_midpoint}
            # only window positions that land on integer times
            times = sorted({int(t) for c in c_grid if (t := n + c * w) == int(t) and t >= 0})
            dist = _root_distances(built.params, times)
            for t in times:
                c = (t - n) / w
                target = p(c)
                predicted.append(
                    {"n": n, "param": index, "c": c, "t": t, "value": target, "provenance": "profile"}
                )
                measured.append({"n": n, "param": index, "c": c, "t": t, "value": dist[t]})
                gaps.append(abs(dist[t] - target))
    else:
        raise ValidationError(f"unknown gallery {name!r}")
    return {
        "predicted": predicted,
        "measured": measured,
        "params": params_out,
        "flags": flags,
        "gap": max(gaps) if gaps else 0.0,
    }


def verify_report(
    name: str,
    n_grid: Sequence[int],
    c_grid: Sequence[float],
    param_grid: Sequence,
    *,
    k_override: int | None = None,
    threads: int = 1,
) -> GalleryReport:
    """Measure the distance at the example's time points and compare with predictions.

    ``name`` is ``"uncountable"`` (``param_grid`` holds exponents ``alpha``),
    ``"nested"`` (``param_grid`` holds scales ``q``) or ``"dense"``
    (``param_grid`` holds family indices; each member is realized with
    ``t_n = n``, ``w_n = ceil(sqrt(n))``). ``max_gap`` compares against the
    finite-``n`` truth; the asymptotic limits are reported alongside.
    Sizes are evaluated on up to ``threads`` workers; the output order does
    not depend on it.
    """
    if name not in ("uncountable", "nested", "dense"):
        raise ValidationError(f"unknown gallery {name!r}")
    if name == "dense":
        # fill the shared enumeration before any worker reads it
        dense_member(max(param_grid, default=0))

    def job(n):
        return _evaluate_n(name, n, c_grid, param_grid, k_override)

    if threads > 1 and len(n_grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, n_grid))
    else:
        parts = [job(n) for n in n_grid]
    predicted, measured, params_out, flags, gap_by_n = [], [], [], {}, {}
    for n, part in zip(n_grid, parts):
        predicted += part["predicted"]
        measured += part["measured"]
        params_out += part["params"]
        flags.update(part["flags"])
        gap_by_n[str(n)] = part["gap"]
    return GalleryReport(
        name=name,
        params=params_out,
        grid={"n": list(n_grid), "c": list(c_grid), "param": list(param_grid)},
        predicted=predicted,
        measured=measured,
        max_gap=max(gap_by_n.values()) if gap_by_n else 0.0,
        gap_by_n=gap_by_n,
        flags=flags,
    )
