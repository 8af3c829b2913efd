"""Transient and stationary solvers, total variation and lambda sweeps."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import graph
from .classify import Partition, classify_states, limit_jump_matrix
from .errors import LabelMismatch, NonFiniteResult, NotIrreducible, SingularSystem
from .model import Generator, ParamCtmc, generator_at
from .reduce import (
    Distribution,
    ReducedChain,
    collapse_distribution,
    reduced_generator,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    labels: Tuple[str, ...]
    times: np.ndarray
    probs: np.ndarray  # one row per time

    @property
    def dists(self) -> List[Distribution]:
        return [Distribution(self.labels, row) for row in self.probs]

    def column(self, label: str) -> np.ndarray:
        return self.probs[:, self.labels.index(label)]


@dataclass
class SweepResult:
    lambdas: List[float]
    sup_tv: List[float]
    argmax_t: List[float]
    grid: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "sup_tv", "argmax_t"])
        for row in zip(self.lambdas, self.sup_tv, self.argmax_t):
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def fmt(x: float) -> str:
    """Decimal text with 12 significant digits."""
    return format(float(x), ".12g")


def _clean(v: np.ndarray) -> np.ndarray:
    if not np.isfinite(v).all():
        raise NonFiniteResult(f"non-finite probabilities: {v}")
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def _check_labels(g: Generator, pi: Distribution) -> np.ndarray:
    if pi.labels != g.labels:
        if set(pi.labels) != set(g.labels):
            raise LabelMismatch("distribution and generator have different states")
        pi = pi.reordered(g.labels)
    return np.asarray(pi.probs)


def transition_matrix(g: Generator, t: float) -> np.ndarray:
    """exp(t G) by scaling-and-squaring Pade (scipy)."""
    p = scipy.linalg.expm(np.asarray(g.entries) * t)
    if not np.isfinite(p).all():
        raise NonFiniteResult(f"expm overflowed at t={t}")
    return p


def transient_distribution(g: Generator, pi: Distribution, t: float) -> Distribution:
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = _check_labels(g, pi)
    if t == 0:
        return Distribution(g.labels, v)
    return Distribution(g.labels, _clean(v @ transition_matrix(g, t)))


def grid_times(t0: float, T: float, step: float) -> np.ndarray:
    """The grid t0, t0+step, ... up to T (T included when it lands on the grid)."""
    if not (0 <= t0 < T) or step <= 0:
        raise ValueError("need 0 <= t0 < T and step > 0")
    n = int(np.floor((T - t0) / step + 1e-9)) + 1
    return t0 + step * np.arange(n)


def transient_trajectory(g: Generator, pi: Distribution, times: Sequence[float]) -> Trajectory:
    """Distributions on an increasing time list.

    Uniform grids reuse a single step matrix; other spacings fall back to one
    exponential per gap.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] < 0 or (np.diff(times) <= 0).any():
        raise ValueError("times must be a nonempty increasing list starting at t >= 0")
    v = _check_labels(g, pi)
    out = np.empty((len(times), g.size))
    cur = _clean(v @ transition_matrix(g, times[0])) if times[0] > 0 else v.copy()
    out[0] = cur
    gaps = np.diff(times)
    uniform = len(gaps) > 0 and np.allclose(gaps, gaps[0], rtol=1e-9, atol=0)
    step_mat = transition_matrix(g, gaps[0]) if uniform else None
    for k, h in enumerate(gaps, start=1):
        mat = step_mat if uniform else transition_matrix(g, h)
        cur = _clean(cur @ mat)
        out[k] = cur
    return Trajectory(g.labels, times, out)


def stationary_distribution(g: Generator) -> Distribution:
    """Solve mu Q^c = (0,...,0,1) where Q^c is G with its last column set to ones."""
    a = np.asarray(g.entries)
    off = a - np.diag(np.diag(a))
    if not graph.strongly_connected(off > 0):
        raise NotIrreducible("generator support is not strongly connected")
    qc = a.copy()
    qc[:, -1] = 1.0
    rhs = np.zeros(g.size)
    rhs[-1] = 1.0
    try:
        lu = scipy.linalg.lu_factor(qc.T)
        mu = scipy.linalg.lu_solve(lu, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from None
    if not np.isfinite(mu).all():
        raise SingularSystem("stationary system is singular")
    return Distribution(g.labels, _clean(mu))


def tv_distance(mu: Distribution, nu: Distribution) -> float:
    if set(mu.labels) != set(nu.labels) or len(mu.labels) != len(nu.labels):
        raise LabelMismatch("distributions live on different state sets")
    if nu.labels != mu.labels:
        nu = nu.reordered(mu.labels)
    return float(min(1.0, 0.5 * np.abs(mu.probs - nu.probs).sum()))


def embed_slow_distribution(d: Distribution, p: Partition, labels: Sequence[str] = None) -> Distribution:
    """Extend a law on the slow states by zeros on the fast states.

    The result uses ``labels`` (default: fast then slow order).
    """
    labels = tuple(labels) if labels is not None else p.labels
    slow = set(p.slow)
    if not set(d.labels) <= slow:
        raise LabelMismatch("distribution has mass outside the slow states")
    if set(labels) != set(p.labels):
        raise LabelMismatch("target labels do not match the partition")
    return Distribution(labels, np.array([d[s] if s in d.labels else 0.0 for s in labels]))


def _embed_rows(probs: np.ndarray, src: Sequence[str], dst: Sequence[str]) -> np.ndarray:
    out = np.zeros((probs.shape[0], len(dst)))
    for k, s in enumerate(src):
        out[:, dst.index(s)] = probs[:, k]
    return out


def _reduction(m: ParamCtmc):
    p = classify_states(m)
    ld = limit_jump_matrix(m, p)
    return p, ld, reduced_generator(ld, p)


def _initial_laws(m: ParamCtmc, pi: Distribution, p: Partition, ld, y_init):
    """Initial law of X on S and of Y on B."""
    if set(pi.labels) == set(m.states) and len(pi.labels) == m.size:
        x0 = pi.reordered(m.states)
        if y_init is None:
            y_init = collapse_distribution(x0, ld, p)
    elif set(pi.labels) <= set(p.slow):
        full = embed_slow_distribution(pi, p, m.states)
        x0 = full
        if y_init is None:
            y_init = Distribution(p.slow, np.array([full[s] for s in p.slow]))
    else:
        raise LabelMismatch("initial law must live on all states or on the slow states")
    return x0, y_init.reordered(p.slow)


def _tv_curve(m, lam, rc, x0, y0, times):
    gx = generator_at(m, lam)
    tx = transient_trajectory(gx, x0, times)
    ty = transient_trajectory(rc.gamma, y0, times)
    ty_full = _embed_rows(ty.probs, list(ty.labels), list(tx.labels))
    return 0.5 * np.abs(tx.probs - ty_full).sum(axis=1)


def sup_tv_on_grid(
    m: ParamCtmc,
    lam: float,
    rc: Optional[ReducedChain],
    pi: Distribution,
    t0: float,
    T: float,
    step: float,
    y_init: Optional[Distribution] = None,
) -> Tuple[float, float]:
    """Grid maximum of the TV gap between X at ``lam`` and the reduced chain Y.

    ``pi`` may live on the slow states (X starts from its embedding, Y from
    ``pi``) or on all states (Y starts from the collapsed law unless
    ``y_init`` is given). Not a certified bound between grid points.
    """
    p = classify_states(m)
    ld = limit_jump_matrix(m, p)
    if rc is None:
        rc = reduced_generator(ld, p)
    x0, y0 = _initial_laws(m, pi, p, ld, y_init)
    times = grid_times(t0, T, step)
    tv = _tv_curve(m, lam, rc, x0, y0, times)
    k = int(np.argmax(tv))
    return float(min(1.0, tv[k])), float(times[k])


def lambda_sweep(
    m: ParamCtmc,
    pi: Distribution,
    t0: float,
    T: float,
    step: Optional[float],
    lambdas: Sequence[float],
    y_init: Optional[Distribution] = None,
    workers: int = 1,
) -> SweepResult:
    lambdas = [float(x) for x in lambdas]
    if any(x <= 0 for x in lambdas) or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be positive and increasing")
    step = step if step is not None else (T - t0) / 2000
    p, ld, rc = _reduction(m)
    x0, y0 = _initial_laws(m, pi, p, ld, y_init)
    times = grid_times(t0, T, step)

    def one(lam):
        tv = _tv_curve(m, lam, rc, x0, y0, times)
        k = int(np.argmax(tv))
        return float(min(1.0, tv[k])), float(times[k])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, lambdas))
    else:
        results = [one(lam) for lam in lambdas]
    return SweepResult(
        lambdas,
        [r[0] for r in results],
        [r[1] for r in results],
        {"t0": t0, "T": T, "step": step, "points": len(times)},
    )
