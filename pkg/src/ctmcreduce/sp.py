"""Singularly perturbed chains, Q(lambda) = lambda * Q_tilde + Q_hat.

This path derives the partition and the reduced generator from the two
constant matrices alone. It shares no intermediate with the general
reduction so that the two can be compared.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import graph
from .classify import Partition
from .errors import FastRecurrentClass, NotSingularlyPerturbed, SingularSystem
from .expr import affine_decompose
from .model import Generator, ParamCtmc
from .reduce import Distribution, ReducedChain
from .solve import transient_distribution


@dataclass(frozen=True, eq=False)
class SpDecomposition:
    labels: Tuple[str, ...]
    tilde: np.ndarray
    hat: np.ndarray

    def at(self, lam: float) -> np.ndarray:
        return lam * self.tilde + self.hat


def sp_decompose(m: ParamCtmc) -> SpDecomposition:
    n = m.size
    idx = {s: k for k, s in enumerate(m.states)}
    tilde = np.zeros((n, n))
    hat = np.zeros((n, n))
    non_affine, negative = [], []
    for (i, j), e in m.rates.items():
        parts = affine_decompose(e)
        key = f"{i}->{j}"
        if parts is None:
            non_affine.append(key)
            continue
        a, b = parts
        if a < 0 or b < 0:
            negative.append(key)
        tilde[idx[i], idx[j]] = float(a)
        hat[idx[i], idx[j]] = float(b)
    if non_affine:
        raise NotSingularlyPerturbed(non_affine)
    if negative:
        raise NotSingularlyPerturbed(negative, "lambda-coefficient or constant part is negative")
    np.fill_diagonal(tilde, -tilde.sum(axis=1))
    np.fill_diagonal(hat, -hat.sum(axis=1))
    return SpDecomposition(m.states, tilde, hat)


def sp_classify(d: SpDecomposition) -> Partition:
    """Slow states are the absorbing states of Q_tilde; the rest must be transient."""
    exit_tilde = -np.diag(d.tilde)
    fast = [s for s, q in zip(d.labels, exit_tilde) if q > 0]
    adj = (d.tilde - np.diag(np.diag(d.tilde))) > 0
    for comp in graph.closed_components(adj):
        if len(comp) >= 2:
            raise FastRecurrentClass([d.labels[k] for k in comp])
    return Partition.from_sets(d.labels, fast)


def sp_reduced_generator(d: SpDecomposition, p: Partition) -> ReducedChain:
    """Gamma = Qhat_BB + Qhat_BA (-Qtilde_AA)^{-1} Qtilde_AB."""
    a = [d.labels.index(s) for s in p.fast]
    b = [d.labels.index(s) for s in p.slow]
    hat_bb = d.hat[np.ix_(b, b)]
    if not a:
        return ReducedChain(p.slow, Generator(p.slow, hat_bb))
    tilde_aa = d.tilde[np.ix_(a, a)]
    tilde_ab = d.tilde[np.ix_(a, b)]
    hat_ba = d.hat[np.ix_(b, a)]
    try:
        absorb = np.linalg.solve(-tilde_aa, tilde_ab)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Q_tilde_AA is singular: {exc}") from None
    return ReducedChain(p.slow, Generator(p.slow, hat_bb + hat_ba @ absorb))


def sp_collapse(d: SpDecomposition, p: Partition, pi: Distribution) -> Distribution:
    """pi_B + pi_A (-Qtilde_AA)^{-1} Qtilde_AB."""
    a = [d.labels.index(s) for s in p.fast]
    b = [d.labels.index(s) for s in p.slow]
    probs = np.array([pi[s] for s in d.labels])
    out = probs[b].copy()
    if a:
        out += probs[a] @ np.linalg.solve(-d.tilde[np.ix_(a, a)], d.tilde[np.ix_(a, b)])
    return Distribution(p.slow, out / out.sum())


def outer_expansion(rc: ReducedChain, gamma_pi: Distribution, t: float) -> Distribution:
    """Zero-order outer expansion on the slow states at time ``t``."""
    return transient_distribution(rc.gamma, gamma_pi, t)
