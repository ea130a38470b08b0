"""Discrete-time mixing: propagation, stationary law, TV distances, hitting times.

Distributions are plain float ``ndarray`` vectors indexed in the canonical
state order of :class:`~fitchain.fit_core.StateSpace`.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimensionMismatch,
    NotIrreducible,
    SolveFailed,
    StateSpaceTooLarge,
)
from .fit_core import (
    FitParams,
    State,
    StateSpace,
    TransitionMatrix,
    build_transition_matrix,
    parse_state,
    trunk,
)
from .profiles import fgF_from_params

DEFAULT_EXACT_CAP = 2000
DEFAULT_HORIZON_CAP = 100_000
STATIONARY_RESIDUAL_TOL = 1e-12


class WorstStartMode(str, enum.Enum):
    EXACT = "exact"
    ROOT = "root"


def _mode(mode) -> WorstStartMode:
    return mode if isinstance(mode, WorstStartMode) else WorstStartMode(str(mode).lower())


def propagate(matrix: TransitionMatrix, dist, steps: int) -> np.ndarray:
    """Return ``dist @ P**steps`` by repeated sparse products."""
    dist = np.asarray(dist, dtype=float)
    if dist.shape[0] != matrix.dimension:
        raise DimensionMismatch(
            f"distribution has {dist.shape[0]} entries, matrix has dimension {matrix.dimension}"
        )
    pt = matrix.csr_t
    out = dist.copy()
    for _ in range(steps):
        out = pt @ out
    return out


def tv_distance(mu, nu) -> float:
    """Half the L1 distance between two probability vectors."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise DimensionMismatch(f"shapes {mu.shape} and {nu.shape} differ")
    return float(0.5 * np.abs(mu - nu).sum())


def _power_iteration(matrix: TransitionMatrix, max_iter: int, tol: float = 1e-14) -> np.ndarray:
    pt = matrix.csr_t
    v = np.full(matrix.dimension, 1.0 / matrix.dimension)
    for _ in range(max_iter):
        nxt = pt @ v
        nxt /= nxt.sum()
        if np.abs(nxt - v).sum() <= tol:
            return nxt
        v = nxt
    raise SolveFailed(f"power iteration did not converge in {max_iter} iterations")


def stationary(
    matrix: TransitionMatrix, max_iter: int = 1_000_000, pin: int | None = None
) -> np.ndarray:
    """Stationary distribution of an irreducible aperiodic chain.

    Direct sparse LU on the balance equations with ``pi[pin] = 1`` fixed (the
    last state by default), then normalized. Pinning one state instead of
    adding a dense normalization row keeps the factorization sparse. Falls back
    to power iteration if the residual is too big.
    """
    n = matrix.dimension
    diag = matrix.csr.diagonal()
    if np.any(diag >= 1.0):
        raise NotIrreducible("chain has an absorbing state (limit mode?)")
    pin = n - 1 if pin is None else pin
    keep = np.array([i for i in range(n) if i != pin], dtype=np.int64)
    pt = matrix.csr_t
    a = (sp.identity(n, format="csr") - pt)[keep][:, keep].tocsc()
    b = pt[keep][:, [pin]].toarray().ravel()
    pi = None
    try:
        x = spla.splu(a, permc_spec="MMD_AT_PLUS_A").solve(b) if n > 1 else np.zeros(0)
        pi = np.empty(n)
        pi[keep] = x
        pi[pin] = 1.0
    except RuntimeError:
        pi = None
    if pi is not None and np.all(np.isfinite(pi)):
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        if np.abs(pt @ pi - pi).sum() <= STATIONARY_RESIDUAL_TOL:
            return pi
    pi = _power_iteration(matrix, max_iter)
    if np.abs(pt @ pi - pi).sum() > STATIONARY_RESIDUAL_TOL:
        raise SolveFailed("stationary residual above tolerance")
    return pi


class FitChain:
    """A FIT chain with its state space, matrix and stationary law built lazily."""

    def __init__(self, params: FitParams):
        self.params = params
        self.space = StateSpace(params)

    @cached_property
    def matrix(self) -> TransitionMatrix:
        return build_transition_matrix(self.params, exact=False, space=self.space)

    @cached_property
    def pi(self) -> np.ndarray:
        if self.params.epsilon == 0:
            # deterministic limit: the fruit absorbs everything
            pi = np.zeros(self.space.size)
            pi[self.space.fruit] = 1.0
            return pi
        eps = float(self.params.epsilon)
        cap = int(min(10 * self.params.l0 / eps, 1e7))
        return stationary(self.matrix, max_iter=max(cap, 1000))

    def delta(self, state: State | str | int) -> np.ndarray:
        idx = state if isinstance(state, (int, np.integer)) else self.space.index(state)
        v = np.zeros(self.space.size)
        v[idx] = 1.0
        return v

    def reference(self, times) -> np.ndarray:
        """Deterministic-limit distance ``F(t)`` at the given integer times."""
        profile = fgF_from_params(self.params).F
        return np.array([float(profile(int(t))) for t in times])


@dataclass
class MixingCurve:
    times: np.ndarray
    distances: np.ndarray
    reference: np.ndarray
    worst_start: list[State] = field(default_factory=list)
    mode: WorstStartMode = WorstStartMode.EXACT

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.distances - self.reference)

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if len(self.times) else 0.0

    def is_monotone(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.distances) <= tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "d", "F", "gap", "worst_state"])
        for i, t in enumerate(self.times):
            writer.writerow(
                [
                    int(t),
                    f"{self.distances[i]:.17g}",
                    f"{self.reference[i]:.17g}",
                    f"{self.gaps[i]:.17g}",
                    str(self.worst_start[i]) if self.worst_start else "x0",
                ]
            )
        return buf.getvalue()


def default_horizon(params: FitParams, cap: int = DEFAULT_HORIZON_CAP) -> int:
    eps = max(float(params.epsilon), 1e-6)
    return min(params.l0 + params.lengths[-1] + math.ceil(20 / eps), cap)


def distance_curve(
    params: FitParams | FitChain,
    t_max: int | None = None,
    mode=WorstStartMode.EXACT,
    *,
    times: Sequence[int] | None = None,
    cap: int = DEFAULT_EXACT_CAP,
) -> MixingCurve:
    """Worst-case distance to stationarity ``d(t)`` for ``t = 0..t_max``.

    In ``exact`` mode every start is propagated (one dense column per state)
    and the argmax start is recorded; ``root`` mode follows ``x_0`` only.
    ``times`` restricts the evaluated times (propagation still runs to the
    largest one).
    """
    chain = params if isinstance(params, FitChain) else FitChain(params)
    mode = _mode(mode)
    n = chain.space.size
    if mode is WorstStartMode.EXACT and n > cap:
        raise StateSpaceTooLarge(f"{n} states exceed the exact-mode cap of {cap}")
    if times is None:
        if t_max is None:
            t_max = default_horizon(chain.params)
        times = range(t_max + 1)
    wanted = sorted(set(int(t) for t in times))
    pi = chain.pi
    pt = chain.matrix.csr_t
    labels = chain.space.states if mode is WorstStartMode.EXACT else None

    if mode is WorstStartMode.EXACT:
        state = np.eye(n)
    else:
        state = chain.delta(0)[:, None]
    out_d, out_w = [], []
    t = 0
    for target in wanted:
        while t < target:
            state = pt @ state
            t += 1
        per_start = 0.5 * np.abs(state - pi[:, None]).sum(axis=0)
        j = int(np.argmax(per_start))
        out_d.append(float(per_start[j]))
        out_w.append(labels[j] if labels is not None else trunk(0))
    tarr = np.array(wanted, dtype=np.int64)
    return MixingCurve(
        times=tarr,
        distances=np.array(out_d),
        reference=chain.reference(tarr),
        worst_start=out_w,
        mode=mode,
    )


@dataclass
class HittingDistribution:
    """Law of the hitting time of the fruit, truncated at ``horizon``.

    ``pmf[t]`` is the probability of first arrival exactly at step ``t``.
    """

    start: State
    pmf: np.ndarray
    tail_mass: float

    @property
    def horizon(self) -> int:
        return len(self.pmf) - 1

    def __getitem__(self, t: int) -> float:
        return float(self.pmf[t]) if 0 <= t < len(self.pmf) else 0.0

    def mean(self) -> float:
        """Mean of the truncated law (ignores ``tail_mass``)."""
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))


def _absorbing_at_fruit(chain: FitChain) -> sp.csr_matrix:
    p = chain.matrix.csr.tolil(copy=True)
    z = chain.space.fruit
    p.rows[z] = [z]
    p.data[z] = [1.0]
    return p.tocsr()


def hitting_distribution(
    params: FitParams | FitChain, start: State | str, horizon: int
) -> HittingDistribution:
    chain = params if isinstance(params, FitChain) else FitChain(params)
    if isinstance(start, str):
        start = parse_state(start)
    idx = chain.space.index(start)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    pt = _absorbing_at_fruit(chain).T.tocsr()
    z = chain.space.fruit
    v = chain.delta(idx)
    absorbed = np.empty(horizon + 1)
    absorbed[0] = v[z]
    for t in range(1, horizon + 1):
        v = pt @ v
        absorbed[t] = v[z]
    pmf = np.diff(absorbed, prepend=0.0)
    pmf[pmf < 0] = 0.0  # float noise once absorbed mass has saturated
    return HittingDistribution(start=start, pmf=pmf, tail_mass=float(1.0 - pmf.sum()))


def mean_hitting_times(params: FitParams | FitChain) -> np.ndarray:
    """``E_x[T_z]`` for every state, by solving ``(I - Q) h = 1`` on non-fruit states."""
    chain = params if isinstance(params, FitChain) else FitChain(params)
    if chain.params.epsilon == 0:
        raise NotIrreducible("mean hitting times need epsilon > 0")
    z = chain.space.fruit
    n = chain.space.size
    keep = np.array([i for i in range(n) if i != z])
    q = chain.matrix.csr[keep][:, keep]
    a = (sp.identity(n - 1, format="csc") - q).tocsc()
    try:
        h = spla.splu(a, permc_spec="MMD_AT_PLUS_A").solve(np.ones(n - 1))
    except RuntimeError as exc:
        raise SolveFailed(str(exc)) from exc
    out = np.zeros(n)
    out[keep] = h
    return out


def return_time_mean(params: FitParams | FitChain) -> float:
    """``E_z[T_z^+]``: one step out of the fruit row, then the mean hitting time back."""
    chain = params if isinstance(params, FitChain) else FitChain(params)
    h = mean_hitting_times(chain)
    z = chain.space.fruit
    return 1.0 + sum(p * h[c] for c, p in chain.matrix.row(z) if c != z)

