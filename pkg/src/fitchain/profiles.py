"""Step profiles, the forward map params -> F, and its inverse.

The forward map sends ``(k, lengths, weights)`` to the deterministic-limit
distance curve ``F = 1 - G``, where ``G`` accumulates mass ``rho_i`` at the
arrival times ``l0 + l_i``. The inverse reads a class-B step function back into
parameters, and :func:`build_profile_chain` composes it with a windowed
discretization of a target profile ``p``.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NotClassA, NotClassB, ValidationError, WindowTooWide
from .fit_core import FitParams

QUANT_DIGITS = 12
EPS_FLOOR = 2.0**-40
DEFAULT_V_EXPONENT = 1 / 8


@dataclass(frozen=True)
class StepProfile:
    """Weakly decreasing ``f: N -> [0, 1]`` stored as breakpoints.

    ``breakpoints[i] = (t, value)`` means ``f = value`` on ``[t, next t)``.
    ``f = 1`` before the first breakpoint; the last value holds forever.
    """

    breakpoints: tuple[tuple[int, object], ...]
    synthetic_midpoint: bool = False

    def __post_init__(self):
        bps = tuple((int(t), v) for t, v in self.breakpoints)
        ts = [t for t, _ in bps]
        vs = [v for _, v in bps]
        if any(a >= b for a, b in zip(ts, ts[1:])):
            raise ValidationError("breakpoint times must be strictly increasing")
        if ts and ts[0] < 0:
            raise ValidationError("breakpoint times must be non-negative")
        if any(not 0 <= v <= 1 for v in vs):
            raise ValidationError("profile values must lie in [0, 1]")
        if any(a <= b for a, b in zip(vs, vs[1:])):
            raise ValidationError("breakpoint values must be strictly decreasing")
        if vs and vs[0] == 1:
            bps = bps[1:]
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def from_values(cls, values: Sequence, synthetic_midpoint: bool = False) -> "StepProfile":
        """Compress ``f(0), f(1), ...`` (last value extends) into breakpoints."""
        bps = []
        prev = 1
        for t, v in enumerate(values):
            if v > prev:
                raise ValidationError(f"values increase at t={t}")
            if v != prev:
                bps.append((t, v))
                prev = v
        return cls(tuple(bps), synthetic_midpoint)

    def __call__(self, t: int):
        i = bisect.bisect_right(self._times, t) - 1
        return 1 if i < 0 else self.breakpoints[i][1]

    @property
    def _times(self) -> list[int]:
        return [t for t, _ in self.breakpoints]

    def values(self, t_max: int) -> list:
        return [self(t) for t in range(t_max + 1)]

    @property
    def image(self) -> set:
        out = {v for _, v in self.breakpoints}
        if not self.breakpoints or self.breakpoints[0][0] > 0:
            out.add(1)
        return out


def profile_stats(f: StepProfile) -> tuple[int, int, int]:
    """``(L, M, W)``: last time at 1, last positive time, and window ``M - L``."""
    img = f.image
    interior = [v for v in img if 0 < v < 1]
    if 1 not in img or 0 not in img or not interior:
        raise NotClassA("image must contain 0, 1 and at least one value in (0, 1)")
    first_t = f.breakpoints[0][0]
    zero_t = f.breakpoints[-1][0]
    big_l = first_t - 1
    big_m = zero_t - 1
    return big_l, big_m, big_m - big_l


def is_class_b(f: StepProfile) -> bool:
    try:
        big_l, _, big_w = profile_stats(f)
    except NotClassA:
        return False
    return big_w <= big_l


@dataclass(frozen=True)
class ForwardProfile:
    """``g`` (point masses at the jump times), ``G`` and ``F = 1 - G``."""

    jump_times: tuple[int, ...]
    g: dict
    F: StepProfile

    def G(self, x):
        return 1 - self.F(math.floor(x))


def fgF_from_params(params: FitParams) -> ForwardProfile:
    times = params.jump_times
    weights = params.weights
    g = dict(zip(times, weights))
    bps = []
    acc = 0
    for i, (t, r) in enumerate(zip(times, weights)):
        acc += r
        # the weights sum to 1, so the last value is exactly 0
        value = r * 0 if i == len(times) - 1 else 1 - acc
        bps.append((t, value))
    return ForwardProfile(jump_times=times, g=g, F=StepProfile(tuple(bps)))


def params_from_step(f: StepProfile) -> FitParams:
    """Read a class-B step function back into parameters with ``F = f``.

    The trunk is ``L(f)``, branch ``i`` ends where ``f`` first takes its
    ``i``-th value, and its weight is the size of that drop. The result is the
    deterministic limit (``epsilon = 0``); attach a drift with
    :meth:`FitParams.with_epsilon`. On the boundary ``W(f) == L(f)`` the last
    branch is one step longer than the trunk, flagged by ``trunk_overhang``.
    """
    big_l, _, big_w = profile_stats(f)
    if big_w > big_l:
        raise NotClassB(f"W(f)={big_w} exceeds L(f)={big_l}")
    levels = [1] + [v for _, v in f.breakpoints]
    l0 = big_l
    lengths = [l0] + [t - l0 for t, _ in f.breakpoints]
    masses = [levels[i - 1] - levels[i] for i in range(1, len(levels))]
    return FitParams(
        k=len(masses),
        lengths=tuple(lengths),
        weights=tuple(masses),
        epsilon=0,
        limit_mode=True,
        trunk_overhang=lengths[-1] > l0,
    )


@dataclass(frozen=True)
class ProfileSpec:
    """Target profile as a table of ``(c, p)`` samples with linear interpolation.

    Outside the sampled range the profile is 1 on the left and 0 on the right.
    """

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        samples = tuple((float(c), float(p)) for c, p in self.samples)
        if not samples:
            raise ValidationError("profile needs at least one sample")
        cs = [c for c, _ in samples]
        ps = [p for _, p in samples]
        if any(a >= b for a, b in zip(cs, cs[1:])):
            raise ValidationError("profile c values must be strictly increasing")
        if any(a < b for a, b in zip(ps, ps[1:])):
            raise ValidationError("profile p values must be weakly decreasing")
        if any(not 0 <= p <= 1 for p in ps):
            raise ValidationError("profile p values must lie in [0, 1]")
        object.__setattr__(self, "samples", samples)

    @property
    def cs(self) -> np.ndarray:
        return np.array([c for c, _ in self.samples])

    @property
    def ps(self) -> np.ndarray:
        return np.array([p for _, p in self.samples])

    def __call__(self, c):
        out = np.interp(c, self.cs, self.ps, left=1.0, right=0.0)
        return float(out) if np.ndim(out) == 0 else out

    @classmethod
    def from_function(cls, fn: Callable[[float], float], cs: Sequence[float]) -> "ProfileSpec":
        return cls(tuple((float(c), float(fn(c))) for c in cs))

    @classmethod
    def from_csv(cls, text: str) -> "ProfileSpec":
        reader = csv.reader(io.StringIO(text))
        rows = [r for r in reader if r and any(x.strip() for x in r)]
        if rows and rows[0][0].strip().lower() == "c":
            rows = rows[1:]
        try:
            return cls(tuple((float(r[0]), float(r[1])) for r in rows))
        except (IndexError, ValueError) as exc:
            raise ValidationError(f"malformed profile CSV: {exc}") from exc

    def to_csv(self) -> str:
        lines = ["c,p"] + [f"{c!r},{p!r}" for c, p in self.samples]
        return "\n".join(lines) + "\n"


def logistic_profile(lo: float = -8.0, hi: float = 8.0, step: float = 0.25) -> ProfileSpec:
    """``p(c) = 1 / (1 + e^c)`` sampled on a regular grid."""
    count = int(round((hi - lo) / step))
    cs = [lo + i * step for i in range(count + 1)]
    return ProfileSpec.from_function(lambda c: 1.0 / (1.0 + math.exp(c)), cs)


def quantize(value: float, digits: int = QUANT_DIGITS) -> Fraction:
    scale = 10**digits
    return Fraction(round(value * scale), scale)


def window_step_function(
    p: ProfileSpec | Callable, t_n: int, w_n: float, v_n: float
) -> StepProfile:
    """Discretize ``p`` on the window ``(t_n - v_n, t_n + v_n)``.

    ``f = 1`` up to ``t_n - v_n``, ``p((t - t_n) / w_n)`` inside, 0 from
    ``t_n + v_n``. Values are quantized to 12 decimals (exact Fractions) so the
    distinct-value classes are well defined. If no value falls strictly between
    0 and 1, a synthetic value 1/2 is placed at the first zero time and the
    result is flagged.
    """
    if w_n <= 0:
        raise ValidationError("window size w_n must be positive")
    if v_n > t_n / 3:
        raise WindowTooWide(f"v_n={v_n} exceeds t_n/3={t_n / 3}")
    end = math.ceil(t_n + v_n)
    values = []
    for t in range(end + 1):
        if t <= t_n - v_n:
            values.append(Fraction(1))
        elif t < t_n + v_n:
            values.append(quantize(float(p((t - t_n) / w_n))))
        else:
            values.append(Fraction(0))
    synthetic = False
    if not any(0 < v < 1 for v in values):
        first_zero = values.index(0)
        values[first_zero] = Fraction(1, 2)
        values.append(Fraction(0))
        synthetic = True
    return StepProfile.from_values(values, synthetic_midpoint=synthetic)


def window_half_width(t_n: float, w_n: float, v_exponent: float = DEFAULT_V_EXPONENT) -> float:
    """``v_n = w_n (t_n / w_n)^a``: wide against ``w_n``, narrow against ``t_n``."""
    return w_n * (t_n / w_n) ** v_exponent


def default_epsilon(n: int) -> float:
    return max(math.exp(-n), EPS_FLOOR)


class ProfileChain(NamedTuple):
    params: FitParams
    epsilon: float
    step: StepProfile
    v_n: float


def build_profile_chain(
    p: ProfileSpec | Callable,
    t_n: int,
    w_n: float,
    n: int,
    eps_override: float | None = None,
    *,
    v_exponent: float = DEFAULT_V_EXPONENT,
    limit_mode: bool = False,
) -> ProfileChain:
    """FIT chain whose deterministic-limit curve is the windowed ``p``."""
    if w_n > t_n / 10:
        warnings.warn(f"w_n={w_n} is not small against t_n={t_n}", stacklevel=2)
    v_n = window_half_width(t_n, w_n, v_exponent)
    step = window_step_function(p, t_n, w_n, v_n)
    base = params_from_step(step)
    eps = default_epsilon(n) if eps_override is None else eps_override
    params = base.with_epsilon(eps, limit_mode=limit_mode)
    return ProfileChain(params=params, epsilon=params.epsilon, step=step, v_n=v_n)
