"""Continuous-time FIT chains by uniformization.

The rate-1 continuous-time chain jumps at the times of a Poisson process and
each jump applies the discrete kernel (which already has self-loops), so
``mu_t = sum_j Poisson(t)[j] * mu_0 P^j``. The Poisson weights are generated by
a two-sided recurrence from the mode and renormalized, then restricted to the
narrowest mode-centred window whose excluded mass is within the tolerance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StateSpaceTooLarge, ToleranceUnreachable
from .fit_core import FitParams
from .mixing import DEFAULT_EXACT_CAP, FitChain, WorstStartMode, _mode
from .profiles import DEFAULT_V_EXPONENT, ProfileSpec, build_profile_chain

_NEGLIGIBLE = 1e-30


@dataclass(frozen=True)
class PoissonTruncation:
    t: float
    left: int
    right: int
    weights: np.ndarray
    tail_mass: float

    def __len__(self):
        return self.right - self.left + 1

    def weight(self, j: int) -> float:
        return float(self.weights[j - self.left]) if self.left <= j <= self.right else 0.0


def poisson_weights(t: float, tol: float) -> PoissonTruncation:
    """Poisson(``t``) pmf on a window ``[left, right]`` with tail mass ``<= tol``.

    The window is the narrowest one symmetric about the mode (clipped at 0).
    """
    if not t >= 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if not 0 < tol < 1:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    if t == 0:
        return PoissonTruncation(t=0.0, left=0, right=0, weights=np.ones(1), tail_mass=0.0)
    mode = int(math.floor(t))
    right_vals = [1.0]
    j = mode
    while right_vals[-1] > _NEGLIGIBLE or t / (j + 1) > 0.5:
        right_vals.append(right_vals[-1] * t / (j + 1))
        j += 1
    left_vals = []
    w = 1.0
    j = mode
    while j > 0 and w > _NEGLIGIBLE:
        w = w * j / t
        left_vals.append(w)
        j -= 1
    lo = mode - len(left_vals)
    raw = np.array(left_vals[::-1] + right_vals)
    probs = raw / raw.sum()

    # narrowest window symmetric about the mode whose excluded mass is <= tol
    from_left = np.cumsum(probs)
    from_right = np.cumsum(probs[::-1])[::-1]
    m_idx = mode - lo
    i_lo = i_hi = m_idx
    for a in range(len(probs)):
        i_lo = max(0, m_idx - a)
        i_hi = min(len(probs) - 1, m_idx + a)
        removed_lo = from_left[i_lo - 1] if i_lo > 0 else 0.0
        removed_hi = from_right[i_hi + 1] if i_hi + 1 < len(probs) else 0.0
        if removed_lo + removed_hi <= tol:
            break
    weights = probs[i_lo : i_hi + 1]
    floor = 1e-15 * len(weights)
    if tol < floor:
        raise ToleranceUnreachable(f"tol={tol} is below the rounding floor {floor:.3g}")
    return PoissonTruncation(
        t=float(t),
        left=lo + i_lo,
        right=lo + i_hi,
        weights=weights,
        tail_mass=float(removed_lo + removed_hi),
    )


def ct_distributions(
    chain: FitChain, times: Sequence[float], tol: float, starts: np.ndarray
) -> list[np.ndarray]:
    """Uniformized laws at each time, one column per start column of ``starts``."""
    truncs = [poisson_weights(t, tol) for t in times]
    horizon = max(tr.right for tr in truncs)
    pt = chain.matrix.csr_t
    acc = [np.zeros_like(starts) for _ in truncs]
    state = starts.copy()
    for j in range(horizon + 1):
        for a, tr in zip(acc, truncs):
            if tr.left <= j <= tr.right:
                a += tr.weights[j - tr.left] * state
        if j < horizon:
            state = pt @ state
    return acc


def ct_curve(
    params: FitParams | FitChain,
    times: Sequence[float],
    tol: float = 1e-10,
    mode=WorstStartMode.ROOT,
    *,
    cap: int = DEFAULT_EXACT_CAP,
) -> np.ndarray:
    """Continuous-time distance to stationarity at each of ``times``.

    One propagation is shared by all times. Truncation error is at most ``tol``.
    """
    chain = params if isinstance(params, FitChain) else FitChain(params)
    mode = _mode(mode)
    n = chain.space.size
    if mode is WorstStartMode.EXACT:
        if n > cap:
            raise StateSpaceTooLarge(f"{n} states exceed the exact-mode cap of {cap}")
        starts = np.eye(n)
    else:
        starts = chain.delta(0)[:, None]
    pi = chain.pi
    out = []
    for mu in ct_distributions(chain, times, tol, starts):
        out.append(float((0.5 * np.abs(mu - pi[:, None]).sum(axis=0)).max()))
    return np.array(out)


def ct_distance(
    params: FitParams | FitChain, t: float, tol: float = 1e-10, mode=WorstStartMode.ROOT
) -> float:
    return float(ct_curve(params, [t], tol, mode)[0])


def event_window(t_n: float, w_n: float) -> float:
    """``u_n = sqrt(w_n sqrt(t_n))``: sits between the Poisson spread and the window."""
    return math.sqrt(w_n * math.sqrt(t_n))


@dataclass(frozen=True)
class CtProfilePoint:
    c: float
    t: float
    distance: float
    target: float
    u_n: float

    @property
    def gap(self) -> float:
        return abs(self.distance - self.target)


def ct_profile_curve(
    p: ProfileSpec,
    t_n: float,
    w_n: float,
    n: int,
    cs: Sequence[float],
    tol: float = 1e-10,
    *,
    v_exponent: float = DEFAULT_V_EXPONENT,
    eps_override: float | None = None,
) -> list[CtProfilePoint]:
    """Evaluate the continuous-time chain built for ``floor(t_n)`` at ``t_n + c w_n``."""
    if w_n < 2 * math.sqrt(t_n):
        warnings.warn(
            f"w_n={w_n} is not large against sqrt(t_n)={math.sqrt(t_n):.3g}", stacklevel=2
        )
    built = build_profile_chain(
        p, math.floor(t_n), w_n, n, eps_override, v_exponent=v_exponent
    )
    chain = FitChain(built.params)
    times = [t_n + c * w_n for c in cs]
    dists = ct_curve(chain, times, tol, WorstStartMode.ROOT)
    u_n = event_window(t_n, w_n)
    return [
        CtProfilePoint(c=float(c), t=float(t), distance=float(d), target=float(p(c)), u_n=u_n)
        for c, t, d in zip(cs, times, dists)
    ]


def ct_profile_eval(
    p: ProfileSpec,
    t_n: float,
    w_n: float,
    n: int,
    c: float,
    tol: float = 1e-10,
    *,
    v_exponent: float = DEFAULT_V_EXPONENT,
) -> CtProfilePoint:
    return ct_profile_curve(p, t_n, w_n, n, [c], tol, v_exponent=v_exponent)[0]
