"""The reduced chain on the slow states and the collapsed initial law."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import graph
from .classify import LimitData, Partition, classify_states
from .errors import LabelMismatch, ReducedChainUndefined, SingularSystem
from .model import Generator, ParamCtmc, generator_at

_COND_LIMIT = 1e14


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over labeled states.

    Rounding noise up to 1e-9 (negative entries, total mass) is accepted and
    removed; anything larger is rejected.
    """

    labels: Tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (len(self.labels),):
            raise LabelMismatch(f"{p.shape[0] if p.ndim else 0} probabilities for {len(self.labels)} labels")
        if not np.isfinite(p).all() or (p < -1e-9).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"not a probability vector: {p}")
        p = np.clip(p, 0.0, None)
        p /= p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", p)

    @classmethod
    def delta(cls, labels: Sequence[str], state: str) -> "Distribution":
        labels = tuple(labels)
        if state not in labels:
            raise LabelMismatch(f"unknown state {state!r}")
        p = np.zeros(len(labels))
        p[labels.index(state)] = 1.0
        return cls(labels, p)

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "Distribution":
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    @classmethod
    def from_mapping(cls, labels: Sequence[str], mapping: Mapping[str, float]) -> "Distribution":
        labels = tuple(labels)
        unknown = set(mapping) - set(labels)
        if unknown:
            raise LabelMismatch(f"unknown states {sorted(unknown)}")
        return cls(labels, np.array([float(mapping.get(s, 0.0)) for s in labels]))

    def __getitem__(self, label: str) -> float:
        return float(self.probs[self.labels.index(label)])

    def as_dict(self):
        return {s: float(v) for s, v in zip(self.labels, self.probs)}

    def reordered(self, labels: Sequence[str]) -> "Distribution":
        labels = tuple(labels)
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise LabelMismatch("label sets differ")
        return Distribution(labels, np.array([self[s] for s in labels]))

    def concentrated_on(self, labels: Sequence[str]) -> bool:
        keep = set(labels)
        return all(v == 0 for s, v in zip(self.labels, self.probs) if s not in keep)


@dataclass(frozen=True, eq=False)
class ReducedChain:
    labels: Tuple[str, ...]
    gamma: Generator


def check_slow_reachability(ld: LimitData, p: Partition) -> bool:
    """Every fast state reaches a slow state in the support digraph of the limit jump matrix."""
    if p.n_fast == 0:
        return True
    is_slow = np.zeros(len(ld.labels), dtype=bool)
    is_slow[ld.n_fast:] = True
    return graph.every_node_reaches(ld.omega > 0, is_slow)


def _absorption_matrix(omega_AA: np.ndarray, omega_AB: np.ndarray) -> np.ndarray:
    """Solve (I - omega_AA) X = omega_AB by LU."""
    k = omega_AA.shape[0]
    if k == 0:
        return np.zeros((0, omega_AB.shape[1]))
    lhs = np.eye(k) - omega_AA
    try:
        lu = scipy.linalg.lu_factor(lhs, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from None
    diag = np.abs(np.diag(lu[0]))
    if diag.min() == 0 or np.linalg.cond(lhs, 1) > _COND_LIMIT:
        raise SingularSystem("I - Omega_AA is numerically singular")
    return scipy.linalg.lu_solve(lu, omega_AB)


def reduced_generator(ld: LimitData, p: Partition) -> ReducedChain:
    if not check_slow_reachability(ld, p):
        raise ReducedChainUndefined("some fast states never reach the slow space in the limit jump chain")
    x = _absorption_matrix(ld.omega_AA, ld.omega_AB)
    gamma = ld.q_BB + ld.q_BA @ x
    return ReducedChain(p.slow, Generator(p.slow, gamma))


def _split(pi: Distribution, p: Partition):
    if set(pi.labels) != set(p.labels):
        raise LabelMismatch("distribution labels do not match the state space")
    return np.array([pi[s] for s in p.fast]), np.array([pi[s] for s in p.slow])


def collapse_distribution(pi: Distribution, ld: LimitData, p: Partition) -> Distribution:
    """Where the limit jump chain started from ``pi`` first lands in the slow space."""
    if not check_slow_reachability(ld, p):
        raise ReducedChainUndefined("some fast states never reach the slow space in the limit jump chain")
    pi_a, pi_b = _split(pi, p)
    out = pi_b.copy()
    if p.n_fast and pi_a.any():
        out = out + pi_a @ _absorption_matrix(ld.omega_AA, ld.omega_AB)
    return Distribution(p.slow, out / out.sum())


def jump_matrix(g: Generator) -> np.ndarray:
    """Embedded jump chain of ``g``; absorbing rows stay put."""
    a = np.array(g.entries, dtype=float)
    q = -np.diag(a).copy()
    np.fill_diagonal(a, 0.0)
    out = np.zeros_like(a)
    live = q > 0
    out[live] = a[live] / q[live, None]
    out[~live, np.flatnonzero(~live)] = 1.0
    return out


def first_passage_distribution(m: ParamCtmc, lam: float, pi: Distribution, p: Partition = None) -> Distribution:
    """Law of the state by which the chain at ``lam`` first enters the slow space."""
    p = p if p is not None else classify_states(m)
    pi_a, pi_b = _split(pi, p)
    if p.n_fast == 0 or not pi_a.any():
        return Distribution(p.slow, pi_b)
    omega = p.to_relabeled(jump_matrix(generator_at(m, lam)))
    k = p.n_fast
    is_slow = np.zeros(len(p.labels), dtype=bool)
    is_slow[k:] = True
    if not graph.every_node_reaches(omega > 0, is_slow):
        raise ReducedChainUndefined(f"some fast states never reach the slow space at lambda={lam}")
    out = pi_b + pi_a @ _absorption_matrix(omega[:k, :k], omega[:k, k:])
    return Distribution(p.slow, out / out.sum())


def reduced_irreducible(rc: ReducedChain) -> bool:
    """Strong connectivity of the support of the reduced generator (one state counts as irreducible)."""
    a = rc.gamma.entries
    off = a - np.diag(np.diag(a))
    return graph.strongly_connected(off > 0)


def sufficient_condition(ld: LimitData) -> bool:
    """Positive slow-to-slow limit rates alone connect the slow space."""
    off = ld.q_BB - np.diag(np.diag(ld.q_BB))
    return graph.strongly_connected(off > 0)
