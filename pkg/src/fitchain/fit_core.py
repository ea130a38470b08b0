"""FIT chains: parameters, state space and transition matrix.

A chain is described by a trunk ``x_0 .. x_{l0}``, ``k`` branches
``y^i_{l0+1} .. y^i_{l0+l_i-1}`` that all end in a single absorbing-ish state
``z`` (the fruit), forward drift ``1 - eps`` and backward rate ``eps``.

Two arithmetic modes are supported. When every weight and ``epsilon`` is a
:class:`fractions.Fraction` the parameters are *exact* and the matrix keeps
rational entries alongside the float CSR arrays; otherwise everything is float.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterator, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    BranchCountTooSmall,
    EpsilonOutOfRange,
    LengthsNotStrictlyIncreasing,
    TrunkNotMaximal,
    UnknownState,
    ValidationError,
    WeightsInvalid,
)

WEIGHT_SUM_TOL = 1e-12


def parse_number(value):
    """Parse a JSON-ish number: ``"3/7"`` and other strings become exact
    Fractions, ints become Fractions, floats stay floats."""
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
    raise ValidationError(f"not a number: {value!r}")


def format_number(value):
    """Inverse of :func:`parse_number` for JSON output."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


@dataclass(frozen=True)
class FitParams:
    """The tuple ``(k, lengths, weights)`` plus the drift parameter ``epsilon``.

    ``lengths`` is the full ``(l0, l1, ..., lk)`` tuple. ``limit_mode`` permits
    ``epsilon == 0`` (the deterministic limit, where the fruit is absorbing).
    ``trunk_overhang`` permits ``lk == l0 + 1``, which is what the inverse
    construction produces on the class-B boundary ``W(f) == L(f)``.
    """

    k: int
    lengths: tuple[int, ...]
    weights: tuple
    epsilon: object
    limit_mode: bool = False
    trunk_overhang: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(x) for x in self.lengths))
        weights = tuple(parse_number(w) for w in self.weights)
        object.__setattr__(self, "epsilon", parse_number(self.epsilon))
        _check_structure(self.k, self.lengths, self.trunk_overhang)
        object.__setattr__(self, "weights", _check_weights(self.k, weights))
        _check_epsilon(self.epsilon, self.limit_mode)

    @property
    def l0(self) -> int:
        return self.lengths[0]

    @property
    def branch_lengths(self) -> tuple[int, ...]:
        return self.lengths[1:]

    @property
    def is_exact(self) -> bool:
        return isinstance(self.epsilon, Fraction) and all(
            isinstance(w, Fraction) for w in self.weights
        )

    @property
    def jump_times(self) -> tuple[int, ...]:
        """Arrival times ``l0 + l_i`` of the deterministic walk from the root."""
        return tuple(self.l0 + li for li in self.branch_lengths)

    @property
    def n_states(self) -> int:
        return (self.l0 + 1) + sum(li - 1 for li in self.branch_lengths) + 1

    def with_epsilon(self, epsilon, limit_mode: bool | None = None) -> "FitParams":
        return FitParams(
            self.k,
            self.lengths,
            self.weights,
            epsilon,
            self.limit_mode if limit_mode is None else limit_mode,
            self.trunk_overhang,
        )

    def to_float(self) -> "FitParams":
        return FitParams(
            self.k,
            self.lengths,
            tuple(float(w) for w in self.weights),
            float(self.epsilon),
            self.limit_mode,
            self.trunk_overhang,
        )

    def to_json_dict(self) -> dict:
        doc = {
            "k": self.k,
            "lengths": list(self.lengths),
            "weights": [format_number(w) for w in self.weights],
            "epsilon": format_number(self.epsilon),
            "limit_mode": self.limit_mode,
        }
        if self.trunk_overhang:
            doc["trunk_overhang"] = True
        return doc


def _check_structure(k, lengths, trunk_overhang):
    if k < 2:
        raise BranchCountTooSmall(f"need k >= 2 branches, got k={k}")
    if len(lengths) != k + 1:
        raise ValidationError(f"expected {k + 1} lengths (l0..lk), got {len(lengths)}")
    branch = lengths[1:]
    if branch[0] < 1 or any(a >= b for a, b in zip(branch, branch[1:])):
        raise LengthsNotStrictlyIncreasing(
            f"branch lengths must satisfy 1 <= l1 < ... < lk, got {branch}"
        )
    slack = 1 if trunk_overhang else 0
    if lengths[0] + slack < max(branch):
        raise TrunkNotMaximal(f"l0={lengths[0]} is smaller than max branch length {max(branch)}")


def _check_weights(k, weights):
    if len(weights) != k:
        raise WeightsInvalid(f"expected {k} weights, got {len(weights)}")
    if any(w <= 0 for w in weights):
        raise WeightsInvalid(f"weights must be positive, got {weights}")
    if all(isinstance(w, Fraction) for w in weights):
        if sum(weights) != 1:
            raise WeightsInvalid(f"weights sum to {sum(weights)}, not exactly 1")
        return weights
    total = sum(float(w) for w in weights)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightsInvalid(f"weights sum to {total!r}, not 1 within {WEIGHT_SUM_TOL}")
    if total == 1.0:
        return tuple(float(w) for w in weights)
    return tuple(float(w) / total for w in weights)


def _check_epsilon(eps, limit_mode):
    if eps < 0 or eps >= Fraction(1, 2):
        raise EpsilonOutOfRange(f"epsilon must lie in [0, 1/2), got {eps}")
    if eps == 0 and not limit_mode:
        raise EpsilonOutOfRange("epsilon = 0 requires limit_mode")


def validate_params(raw, *, limit_mode: bool | None = None) -> FitParams:
    """Build a :class:`FitParams` from a JSON-style mapping (or pass one through).

    Raises a :class:`ValidationError` subclass naming the violated clause.
    """
    if isinstance(raw, FitParams):
        raw = raw.to_json_dict()
    if not isinstance(raw, dict):
        raise ValidationError("parameter document must be a JSON object")
    try:
        k = raw["k"]
        lengths = raw["lengths"]
        weights = raw["weights"]
        eps = raw["epsilon"]
    except KeyError as exc:
        raise ValidationError(f"missing field {exc.args[0]!r}") from exc
    if not isinstance(k, int) or isinstance(k, bool):
        raise ValidationError(f"k must be an integer, got {k!r}")
    if any(not isinstance(x, int) or isinstance(x, bool) for x in lengths):
        raise ValidationError(f"lengths must be integers, got {lengths!r}")
    mode = bool(raw.get("limit_mode", False)) if limit_mode is None else limit_mode
    return FitParams(
        k,
        tuple(lengths),
        tuple(weights),
        eps,
        limit_mode=mode,
        trunk_overhang=bool(raw.get("trunk_overhang", False)),
    )


class State(NamedTuple):
    """State label. ``kind`` is ``"x"`` (trunk), ``"y"`` (branch) or ``"z"``."""

    kind: str
    branch: int
    level: int

    def __str__(self):
        if self.kind == "x":
            return f"x{self.level}"
        if self.kind == "y":
            return f"y{self.level}^{self.branch}"
        return "z"

    @property
    def is_root(self) -> bool:
        return self.kind == "x" and self.level == 0


FRUIT = State("z", 0, 0)


def trunk(j: int) -> State:
    return State("x", 0, j)


def branch(i: int, j: int) -> State:
    return State("y", i, j)


_LABEL_RE = re.compile(r"^(?:x_?\{?(\d+)\}?|y_?\{?(\d+)\}?\^\{?(\d+)\}?|z)$")


def parse_state(text: str) -> State:
    """Parse ``"x3"``, ``"y7^1"`` (also ``"y_{7}^{1}"``) or ``"z"``."""
    m = _LABEL_RE.match(text.strip())
    if not m:
        raise UnknownState(f"cannot parse state label {text!r}")
    if m.group(1) is not None:
        return trunk(int(m.group(1)))
    if m.group(2) is not None:
        return branch(int(m.group(3)), int(m.group(2)))
    return FRUIT


class StateSpace:
    """Canonical enumeration: trunk ``x_0..x_{l0}``, then each branch by
    ascending level, then the fruit. Indices are computed arithmetically, so
    large chains never materialize label objects unless asked to."""

    def __init__(self, params: FitParams):
        self.params = params
        l0 = params.l0
        offsets = []
        pos = l0 + 1
        for li in params.branch_lengths:
            offsets.append(pos)
            pos += li - 1
        self._offsets = tuple(offsets)
        self.size = pos + 1
        self.fruit = pos

    def __len__(self):
        return self.size

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)

    @cached_property
    def states(self) -> list[State]:
        return [self.label(i) for i in range(self.size)]

    def index(self, state: State | str) -> int:
        if isinstance(state, str):
            state = parse_state(state)
        p = self.params
        if state.kind == "x" and 0 <= state.level <= p.l0:
            return state.level
        if state.kind == "z":
            return self.fruit
        if state.kind == "y" and 1 <= state.branch <= p.k:
            li = p.lengths[state.branch]
            if p.l0 + 1 <= state.level <= p.l0 + li - 1:
                return self._offsets[state.branch - 1] + state.level - p.l0 - 1
        raise UnknownState(f"{state} is not a state of this chain")

    def label(self, idx: int) -> State:
        p = self.params
        if not 0 <= idx < self.size:
            raise UnknownState(f"index {idx} out of range")
        if idx <= p.l0:
            return trunk(idx)
        if idx == self.fruit:
            return FRUIT
        for i in range(p.k, 0, -1):
            off = self._offsets[i - 1]
            if idx >= off and p.lengths[i] > 1:
                return branch(i, p.l0 + 1 + idx - off)
        raise AssertionError("unreachable")

    def branch_top(self, i: int) -> int:
        """Index of the state from which branch ``i`` enters the fruit."""
        p = self.params
        if p.lengths[i] == 1:
            return p.l0
        return self._offsets[i - 1] + p.lengths[i] - 2

    def branch_bottom(self, i: int) -> int:
        p = self.params
        if p.lengths[i] == 1:
            return self.fruit
        return self._offsets[i - 1]


def enumerate_states(params: FitParams) -> StateSpace:
    return StateSpace(params)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Sparse row-major transition matrix.

    ``indptr``/``indices``/``data`` are CSR arrays; ``exact`` holds the same
    entries as Fractions when the chain was built in rational mode.
    """

    dimension: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    exact: tuple | None = field(default=None, repr=False)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.data, self.indices, self.indptr), shape=(self.dimension, self.dimension)
        )

    @cached_property
    def csr_t(self) -> sp.csr_matrix:
        """Transpose in CSR form: ``mu @ P`` is computed as ``P.T @ mu``."""
        return self.csr.T.tocsr()

    def row(self, i: int, exact: bool = False) -> list[tuple[int, object]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        values = self.exact[lo:hi] if exact else self.data[lo:hi].tolist()
        return list(zip(self.indices[lo:hi].tolist(), values))

    @property
    def rows(self) -> list[list[tuple[int, object]]]:
        return [self.row(i, exact=self.exact is not None) for i in range(self.dimension)]

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.data, self.indptr[:-1]) if len(self.data) else np.zeros(0)

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()


def _transition_entries(params: FitParams, space: StateSpace, eps, one):
    """Yield ``(row, col, prob)`` following the chain's definition clause by clause.

    Zero entries (limit mode) are skipped by the caller.
    """
    fwd = one - eps
    l0 = params.l0
    masses = params.weights if isinstance(one, Fraction) else tuple(float(w) for w in params.weights)
    # trunk: x_j <-> x_{j+1}, lazy root
    yield 0, 0, eps
    for j in range(l0):
        yield j, j + 1, fwd
        yield j + 1, j, eps
    # branches
    for i in range(1, params.k + 1):
        li = params.lengths[i]
        r = masses[i - 1]
        if li == 1:
            # only the shortest branch can have length 1
            yield l0, space.fruit, fwd * r
            yield space.fruit, l0, eps * r
            continue
        bottom = space.branch_bottom(i)
        top = space.branch_top(i)
        yield l0, bottom, fwd * r
        yield bottom, l0, eps
        for idx in range(bottom, top):
            yield idx, idx + 1, fwd
            yield idx + 1, idx, eps
        yield top, space.fruit, fwd
        yield space.fruit, top, eps * r
    yield space.fruit, space.fruit, fwd


def build_transition_matrix(
    params: FitParams, exact: bool | None = None, space: StateSpace | None = None
) -> TransitionMatrix:
    """Materialize the transition matrix as sparse rows.

    ``exact`` defaults to ``params.is_exact``; exact mode additionally keeps
    Fraction entries. ``epsilon == 0`` (limit mode) drops the zero entries, so
    the fruit becomes absorbing.
    """
    if exact is None:
        exact = params.is_exact
    if exact and not params.is_exact:
        raise ValidationError("exact matrix requires rational weights and epsilon")
    space = space or StateSpace(params)
    if exact:
        one, eps = Fraction(1), params.epsilon
    else:
        one, eps = 1.0, float(params.epsilon)
    n = space.size
    rows: list[list[tuple[int, object]]] = [[] for _ in range(n)]
    for r, c, v in _transition_entries(params, space, eps, one):
        if v != 0:
            rows[r].append((c, v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    values = []
    for r, entries in enumerate(rows):
        entries.sort()
        indptr[r + 1] = indptr[r] + len(entries)
        for c, v in entries:
            indices.append(c)
            values.append(v)
    data = np.array([float(v) for v in values], dtype=float)
    return TransitionMatrix(
        dimension=n,
        indptr=indptr,
        indices=np.array(indices, dtype=np.int64),
        data=data,
        exact=tuple(values) if exact else None,
    )


def is_strongly_connected(matrix: TransitionMatrix, root: int) -> bool:
    """BFS from ``root`` along forward and along reversed edges."""
    n = matrix.dimension
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for r in range(n):
        for c in matrix.indices[matrix.indptr[r] : matrix.indptr[r + 1]].tolist():
            fwd[r].append(c)
            bwd[c].append(r)

    def reach(adj):
        seen = [False] * n
        seen[root] = True
        stack = [root]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)

    return reach(fwd) and reach(bwd)


def four_branch_params(epsilon=0.01, weights: Sequence | None = None) -> FitParams:
    """The four-branch example with trunk 6 and branch lengths (2, 3, 4, 6)."""
    weights = weights or (Fraction(1, 4),) * 4
    return FitParams(4, (6, 2, 3, 4, 6), tuple(weights), epsilon)
