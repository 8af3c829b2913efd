"""Fast/slow classification and the limiting jump matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import EmptySlowSpace, ZeroSlowExitRate
from .expr import limit_at_infinity
from .model import ParamCtmc


@dataclass(frozen=True)
class Partition:
    """Fast states ``fast`` (A) and slow states ``slow`` (B).

    ``perm[k]`` is the original index of the state at position ``k`` of the
    relabeled order, which lists A first and then B.
    """

    fast: Tuple[str, ...]
    slow: Tuple[str, ...]
    perm: Tuple[int, ...]

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.fast + self.slow

    @property
    def n_fast(self) -> int:
        return len(self.fast)

    def to_relabeled(self, x):
        """Reorder a vector (or both axes of a matrix) from original to A,B order."""
        x = np.asarray(x)
        p = np.asarray(self.perm, dtype=int)
        if x.ndim == 1:
            return x[p]
        return x[np.ix_(p, p)]

    def to_original(self, x):
        x = np.asarray(x)
        inv = np.argsort(np.asarray(self.perm, dtype=int))
        if x.ndim == 1:
            return x[inv]
        return x[np.ix_(inv, inv)]

    @classmethod
    def from_sets(cls, states, fast) -> "Partition":
        fast_set = set(fast)
        a = tuple(s for s in states if s in fast_set)
        b = tuple(s for s in states if s not in fast_set)
        index = {s: k for k, s in enumerate(states)}
        return cls(a, b, tuple(index[s] for s in a + b))


@dataclass(frozen=True, eq=False)
class LimitData:
    """Limits of the jump matrix and of the slow rows of the generator.

    All arrays use the relabeled (A then B) order of ``labels``.
    """

    labels: Tuple[str, ...]
    n_fast: int
    omega: np.ndarray
    q_BA: np.ndarray
    q_BB: np.ndarray

    @property
    def omega_AA(self) -> np.ndarray:
        k = self.n_fast
        return self.omega[:k, :k]

    @property
    def omega_AB(self) -> np.ndarray:
        k = self.n_fast
        return self.omega[:k, k:]

    @property
    def slow_labels(self) -> Tuple[str, ...]:
        return self.labels[self.n_fast:]


def classify_states(m: ParamCtmc) -> Partition:
    """A state is fast iff its exact exit rate tends to infinity."""
    fast = []
    zero = []
    for s in m.states:
        lim = limit_at_infinity(m.exit_rate(s))
        if lim.is_infinite:
            fast.append(s)
        elif lim.value == 0:
            zero.append(s)
    if len(fast) == m.size:
        raise EmptySlowSpace("every state is fast; the slow state space is empty")
    if zero:
        raise ZeroSlowExitRate("slow states with zero limiting exit rate: " + ", ".join(zero))
    return Partition.from_sets(m.states, fast)


def limit_jump_matrix(m: ParamCtmc, p: Partition) -> LimitData:
    labels = p.labels
    n = len(labels)
    k = p.n_fast
    omega = np.zeros((n, n))
    for r, i in enumerate(labels):
        total = m.exit_rate(i)
        for c, j in enumerate(labels):
            if c == r or (i, j) not in m.rates:
                continue
            omega[r, c] = float(limit_at_infinity(m.rates[(i, j)] / total))
    q_slow = np.zeros((n - k, n))
    for r, i in enumerate(labels[k:]):
        for c, j in enumerate(labels):
            if j != i and (i, j) in m.rates:
                q_slow[r, c] = float(limit_at_infinity(m.rates[(i, j)]))
        q_slow[r, k + r] = -q_slow[r].sum()
    return LimitData(labels, k, omega, q_slow[:, :k].copy(), q_slow[:, k:].copy())
