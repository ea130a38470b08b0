"""Exact rational reference for small chains.

Everything here runs on :class:`fractions.Fraction`. Propagation is done on
integers: with every transition probability written as ``A[x, y] / D`` for one
common denominator ``D``, the law after ``t`` steps is ``v_t / D**t`` where
``v_t`` is an integer vector, so no gcd work happens inside the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NotIrreducible, TooLarge, ValidationError
from .fit_core import FitParams, State, StateSpace, build_transition_matrix, format_number
from .profiles import fgF_from_params

MAX_STATES = 30
MAX_T = 200
MAX_SUBSET_DIM = 16


def _exact_matrix(params: FitParams) -> tuple[StateSpace, list[list[tuple[int, Fraction]]]]:
    if not params.is_exact:
        raise ValidationError("the oracle needs rational weights and epsilon")
    space = StateSpace(params)
    if space.size > MAX_STATES:
        raise TooLarge(f"{space.size} states exceed the oracle limit of {MAX_STATES}")
    matrix = build_transition_matrix(params, exact=True, space=space)
    return space, matrix.rows


def exact_stationary(params: FitParams) -> list[Fraction]:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by Gauss-Jordan elimination over Q."""
    if params.epsilon == 0:
        raise NotIrreducible("limit-mode chains have no unique positive stationary law")
    space, rows = _exact_matrix(params)
    n = space.size
    # unknowns pi_0..pi_{n-1}; equations sum_x pi_x (P[x,y] - [x==y]) = 0, last one replaced
    a = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for x, row in enumerate(rows):
        for y, p in row:
            a[y][x] += p
        a[x][x] -= 1
    a[n - 1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise NotIrreducible("balance equations are singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def exact_mean_hitting_times(params: FitParams) -> list[Fraction]:
    """``E_x[T_z]`` for every state (0 at the fruit)."""
    space, rows = _exact_matrix(params)
    if params.epsilon == 0:
        raise NotIrreducible("mean hitting times need epsilon > 0")
    z = space.fruit
    idx = [i for i in range(space.size) if i != z]
    pos = {s: j for j, s in enumerate(idx)}
    m = len(idx)
    a = [[Fraction(0)] * (m + 1) for _ in range(m)]
    for j, x in enumerate(idx):
        a[j][j] += 1
        a[j][m] = Fraction(1)
        for y, p in rows[x]:
            if y != z:
                a[j][pos[y]] -= p
    for col in range(m):
        piv = next(r for r in range(col, m) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    out = [Fraction(0)] * space.size
    for j, x in enumerate(idx):
        out[x] = a[j][m]
    return out


def exact_return_time_mean(params: FitParams) -> Fraction:
    space, rows = _exact_matrix(params)
    h = exact_mean_hitting_times(params)
    z = space.fruit
    return 1 + sum(p * h[y] for y, p in rows[z] if y != z)


def _common_denominator(rows) -> int:
    d = 1
    for row in rows:
        for _, p in row:
            d = d * p.denominator // math.gcd(d, p.denominator)
    return d


def exact_tv(mu: Sequence[Fraction], nu: Sequence[Fraction]) -> Fraction:
    if len(mu) != len(nu):
        raise ValidationError(f"dimensions {len(mu)} and {len(nu)} differ")
    return sum((abs(Fraction(a) - Fraction(b)) for a, b in zip(mu, nu)), Fraction(0)) / 2


def exact_tv_by_subsets(mu: Sequence, nu: Sequence) -> Fraction:
    """``max_A |mu(A) - nu(A)|`` by scanning all ``2**dim`` subsets.

    Subset sums are built incrementally (each mask extends the mask without its
    lowest bit), so the scan costs one addition per subset.
    """
    if len(mu) != len(nu):
        raise ValidationError(f"dimensions {len(mu)} and {len(nu)} differ")
    dim = len(mu)
    if dim > MAX_SUBSET_DIM:
        raise TooLarge(f"subset scan limited to dimension {MAX_SUBSET_DIM}, got {dim}")
    diff = [Fraction(a) - Fraction(b) for a, b in zip(mu, nu)]
    sums = [Fraction(0)] * (1 << dim)
    best = Fraction(0)
    for mask in range(1, 1 << dim):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + diff[low.bit_length() - 1]
        if abs(sums[mask]) > best:
            best = abs(sums[mask])
    return best


@dataclass
class ExactCurve:
    """Exact worst-case distance curve with its stationary law."""

    params: FitParams
    times: list[int]
    distances: list[Fraction]
    reference: list[Fraction]
    worst_start: list[State]
    pi: list[Fraction]

    @property
    def floats(self) -> list[float]:
        return [float(d) for d in self.distances]

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "pi": [format_number(p) for p in self.pi],
            "curve": [
                {
                    "t": t,
                    "d": format_number(d),
                    "d_float": float(d),
                    "F": format_number(Fraction(f)),
                    "worst_state": str(w),
                }
                for t, d, f, w in zip(self.times, self.distances, self.reference, self.worst_start)
            ],
        }


def exact_curve(params: FitParams, t_max: int) -> ExactCurve:
    """Exact ``d(t)`` for ``t = 0..t_max``, maximized over every start.

    Limit-mode input (``epsilon == 0``) is compared against the point mass at
    the fruit.
    """
    if t_max < 0:
        raise ValidationError("t_max must be >= 0")
    if t_max > MAX_T:
        raise TooLarge(f"t_max={t_max} exceeds the oracle limit of {MAX_T}")
    space, rows = _exact_matrix(params)
    n = space.size
    if params.epsilon == 0:
        pi = [Fraction(0)] * n
        pi[space.fruit] = Fraction(1)
    else:
        pi = exact_stationary(params)
    d = _common_denominator(rows)
    int_rows = [[(y, int(p * d)) for y, p in row] for row in rows]
    q = math.lcm(*(p.denominator for p in pi))
    pi_int = [p.numerator * (q // p.denominator) for p in pi]
    profile = fgF_from_params(params).F

    # one integer vector per start; law at time t is v / d**t
    vecs = [[1 if y == x else 0 for y in range(n)] for x in range(n)]
    scale = 1
    distances, worst = [], []
    for t in range(t_max + 1):
        if t > 0:
            scale *= d
            new = []
            for v in vecs:
                w = [0] * n
                for x, vx in enumerate(v):
                    if vx:
                        for y, a in int_rows[x]:
                            w[y] += vx * a
                new.append(w)
            vecs = new
        # 2 * scale * q * TV is an integer
        best, arg = -1, 0
        for x, v in enumerate(vecs):
            num = sum(abs(vy * q - py * scale) for vy, py in zip(v, pi_int))
            if num > best:
                best, arg = num, x
        distances.append(Fraction(best, 2 * scale * q))
        worst.append(space.label(arg))
    times = list(range(t_max + 1))
    return ExactCurve(
        params=params,
        times=times,
        distances=distances,
        reference=[profile(t) for t in times],
        worst_start=worst,
        pi=pi,
    )
