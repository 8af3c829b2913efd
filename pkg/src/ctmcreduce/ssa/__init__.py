"""Exact stochastic simulation (Gillespie) of chains at fixed lambda.

The hot loops live in a compiled extension when it was built; otherwise the
pure-Python kernels are used. Set ``CTMCREDUCE_PURE_PYTHON=1`` to force the
fallback. Both produce identical output for identical seeds.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .. import graph
from ..classify import Partition, classify_states
from ..errors import LabelMismatch, PathBudgetExceeded, ReducedChainUndefined
from ..model import Generator, ParamCtmc, generator_at
from ..reduce import Distribution, jump_matrix
from . import _kernels_py

try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

if _kernels_c is not None and os.environ.get("CTMCREDUCE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    kernels = _kernels_c
    BACKEND = "cython"
else:
    kernels = _kernels_py
    BACKEND = "python"

DEFAULT_JUMP_BUDGET = 10**6
MASK64 = (1 << 64) - 1


def get_kernels(name: str):
    """Kernel module by name ('python' or 'cython')."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _kernels_c is None:
            raise ImportError("compiled SSA kernels are not built")
        return _kernels_c
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True, eq=False)
class PathSample:
    """Jump times (``times[0] == 0``) and the states entered at them."""

    times: Tuple[float, ...]
    states: Tuple[str, ...]
    horizon: float
    seed: int
    absorbed: bool = False

    def state_at(self, t: float) -> str:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.states[k]

    @property
    def holding_times(self) -> np.ndarray:
        return np.diff(np.asarray(self.times))


@dataclass(frozen=True, eq=False)
class FirstPassageSample:
    hitting: Distribution
    stderr: np.ndarray
    quantiles: Dict[float, float]
    taus: np.ndarray


def _cumulative(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    c = np.cumsum(p, axis=-1)
    if c.ndim == 1:
        pos = np.flatnonzero(p > 0)
        if len(pos):
            c[pos[-1]:] = 1.0
        return c
    for r in range(c.shape[0]):
        pos = np.flatnonzero(p[r] > 0)
        if len(pos):
            c[r, pos[-1]:] = 1.0
    return np.ascontiguousarray(c)


def _tables(g: Generator, pi: Distribution):
    if pi.labels != g.labels:
        if set(pi.labels) != set(g.labels):
            raise LabelMismatch("initial law and generator have different states")
        pi = pi.reordered(g.labels)
    q = np.ascontiguousarray(g.exit_rates.clip(min=0.0))
    return _cumulative(pi.probs), q, _cumulative(jump_matrix(g))


def _seed(seed: int) -> int:
    return int(seed) & MASK64


def simulate_path(g: Generator, pi: Distribution, T: float, seed: int, backend=None) -> PathSample:
    """One exact path on [0, T].

    A path that enters a state with zero exit rate stays there until ``T``
    and is flagged ``absorbed``.
    """
    if not T > 0:
        raise ValueError("horizon T must be positive")
    k = get_kernels(backend) if backend else kernels
    cum_pi, q, rows = _tables(g, pi)
    times, states, absorbed = k.simulate_path(cum_pi, q, rows, float(T), _seed(seed))
    return PathSample(
        tuple(float(t) for t in times),
        tuple(g.labels[s] for s in states),
        float(T),
        int(seed),
        bool(absorbed),
    )


def endpoint_counts(g: Generator, pi: Distribution, t: float, n_paths: int, seed: int, backend=None) -> np.ndarray:
    k = get_kernels(backend) if backend else kernels
    cum_pi, q, rows = _tables(g, pi)
    ends = np.asarray(k.endpoint_states(cum_pi, q, rows, float(t), int(n_paths), _seed(seed)), dtype=np.int64)
    return np.bincount(ends, minlength=g.size)


def empirical_distribution(g: Generator, pi: Distribution, t: float, n_paths: int, seed: int, backend=None):
    """Fraction of ``n_paths`` simulated paths in each state at ``t``, with binomial standard errors."""
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    if t < 0:
        raise ValueError("t must be nonnegative")
    counts = endpoint_counts(g, pi, t, n_paths, seed, backend)
    phat = counts / n_paths
    stderr = np.sqrt(phat * (1.0 - phat) / n_paths)
    return Distribution(g.labels, phat), stderr


def sample_first_passage(
    m: ParamCtmc,
    lam: float,
    pi: Distribution,
    p: Partition = None,
    n_paths: int = 10000,
    seed: int = 0,
    budget: int = DEFAULT_JUMP_BUDGET,
    backend=None,
) -> FirstPassageSample:
    """Simulate the chain at ``lam`` until it enters the slow states.

    Returns the empirical law of the entry state, its standard errors, the
    0.5/0.9/0.99 quantiles of the entry time and the raw entry times.
    """
    p = p if p is not None else classify_states(m)
    g = generator_at(m, lam)
    is_slow = np.array([s in set(p.slow) for s in g.labels])
    if p.n_fast and not graph.every_node_reaches(jump_matrix(g) > 0, is_slow):
        raise ReducedChainUndefined(f"some fast states never reach the slow space at lambda={lam}")
    k = get_kernels(backend) if backend else kernels
    cum_pi, q, rows = _tables(g, pi)
    taus, hits, exceeded = k.first_passage(cum_pi, q, rows, is_slow.astype(np.uint8), int(n_paths), _seed(seed), int(budget))
    if exceeded:
        raise PathBudgetExceeded(f"{exceeded} paths did not reach the slow states within {budget} jumps")
    hits = np.asarray(hits, dtype=np.int64)
    taus = np.asarray(taus, dtype=float)
    counts = np.bincount(hits, minlength=g.size)
    slow_idx = [g.labels.index(s) for s in p.slow]
    phat = counts[slow_idx] / n_paths
    stderr = np.sqrt(phat * (1.0 - phat) / n_paths)
    quant = {qq: float(np.quantile(taus, qq)) for qq in (0.5, 0.9, 0.99)}
    return FirstPassageSample(Distribution(p.slow, phat), stderr, quant, taus)
