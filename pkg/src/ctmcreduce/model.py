"""Parameterized chains: loading, validation and numeric generators."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import graph
from .errors import (
    DuplicateState,
    EventuallyNegative,
    ExprSyntaxError,
    FormatError,
    NegativeRate,
    PoleAtLambda,
    UnknownStateInRateKey,
)
from .expr import RationalExpr, evaluate, limit_at_infinity, parse

VALIDATION_SAMPLES = (1, 10, 1000, 10**6)


@dataclass(frozen=True, eq=False)
class Generator:
    """Dense transition rate matrix with state labels."""

    labels: Tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != len(self.labels):
            raise ValueError(f"generator shape {a.shape} does not match {len(self.labels)} labels")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def exit_rates(self) -> np.ndarray:
        return -np.diag(self.entries).copy()

    def index(self, label) -> int:
        return self.labels.index(label)

    def check(self, tol: float = 1e-12) -> None:
        """Raise ValueError unless off-diagonals are >= 0 and rows sum to 0.

        ``tol`` is relative to the largest exit rate of the row.
        """
        a = self.entries
        off = a - np.diag(np.diag(a))
        scale = np.maximum(1.0, np.abs(np.diag(a)))
        if (off < -tol * scale[:, None]).any():
            raise ValueError("negative off-diagonal rate")
        if (np.abs(a.sum(axis=1)) > tol * scale).any():
            raise ValueError("row sums are not zero")


def from_rates(labels: Sequence[str], offdiag) -> Generator:
    """Build a generator from off-diagonal rates, deriving the diagonal."""
    a = np.array(offdiag, dtype=float)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -a.sum(axis=1))
    return Generator(tuple(labels), a)


@dataclass(frozen=True, eq=False)
class ParamCtmc:
    """Finite chain whose rates are rational functions of lambda.

    ``rates`` maps ``(src, dst)`` to an expression; absent pairs have rate 0.
    """

    states: Tuple[str, ...]
    rates: Mapping[Tuple[str, str], RationalExpr]
    name: str = ""
    initial: Optional[Mapping[str, float]] = None

    def __post_init__(self):
        states = tuple(self.states)
        if len(states) < 2:
            raise FormatError("a model needs at least two states")
        seen = set()
        for s in states:
            if s in seen:
                raise DuplicateState(f"duplicate state {s!r}")
            seen.add(s)
        rates = {}
        for (i, j), e in self.rates.items():
            if i not in seen or j not in seen:
                raise UnknownStateInRateKey(f"rate key {i}->{j} names an unknown state")
            if i == j:
                raise FormatError(f"self-loop {i}->{j} is not allowed")
            if not e.is_zero:
                rates[(i, j)] = e
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "_exit_cache", {})

    @property
    def size(self) -> int:
        return len(self.states)

    def rate(self, i: str, j: str) -> RationalExpr:
        return self.rates.get((i, j), RationalExpr.const(0))

    def exit_rate(self, i: str) -> RationalExpr:
        """Exact total exit rate of ``i`` as an expression."""
        cached = self._exit_cache.get(i)
        if cached is None:
            cached = RationalExpr.const(0)
            for j in self.states:
                if j != i and (i, j) in self.rates:
                    cached = cached + self.rates[(i, j)]
            self._exit_cache[i] = cached
        return cached

    def support(self) -> np.ndarray:
        idx = {s: k for k, s in enumerate(self.states)}
        adj = np.zeros((self.size, self.size), dtype=bool)
        for i, j in self.rates:
            adj[idx[i], idx[j]] = True
        return adj

    def rescaled(self, c) -> "ParamCtmc":
        """Same chain with ``c*lambda`` substituted for lambda."""
        return ParamCtmc(
            self.states,
            {k: e.rescaled(c) for k, e in self.rates.items()},
            self.name,
            self.initial,
        )


def _parse_key(key: str) -> Tuple[str, str]:
    parts = key.split("->")
    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
        raise FormatError(f"rate key {key!r} is not of the form 'src->dst'")
    return parts[0].strip(), parts[1].strip()


def load_model(document) -> ParamCtmc:
    """Build a chain from a model document (JSON text or decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FormatError(f"model is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise FormatError("model document must be a JSON object")
    states = document.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise FormatError("'states' must be an array of strings")
    raw = document.get("rates")
    if not isinstance(raw, dict):
        raise FormatError("'rates' must be an object")
    known = set(states)
    if len(known) != len(states):
        dup = next(s for s in states if states.count(s) > 1)
        raise DuplicateState(f"duplicate state {dup!r}")
    rates: Dict[Tuple[str, str], RationalExpr] = {}
    for key, text in raw.items():
        i, j = _parse_key(key)
        if i == j:
            raise FormatError(f"self-loop {key!r} is not allowed")
        if i not in known or j not in known:
            raise UnknownStateInRateKey(f"rate key {key!r} names an unknown state")
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = repr(text)
        if not isinstance(text, str):
            raise FormatError(f"rate {key!r} must be an expression string")
        try:
            e = parse(text)
        except ExprSyntaxError as exc:
            raise ExprSyntaxError(f"in rate {key!r}: {exc.reason}", exc.position, exc.expected, text) from None
        if (i, j) in rates:
            raise FormatError(f"rate {key!r} given twice")
        rates[(i, j)] = e
    initial = document.get("initial")
    if initial is not None:
        if not isinstance(initial, dict):
            raise FormatError("'initial' must be an object")
        for s, p in initial.items():
            if s not in known:
                raise UnknownStateInRateKey(f"initial distribution names unknown state {s!r}")
            if not isinstance(p, (int, float)) or p < 0:
                raise FormatError(f"initial probability of {s!r} must be a nonnegative number")
        if abs(sum(initial.values()) - 1.0) > 1e-9:
            raise FormatError("initial distribution must sum to 1")
    name = document.get("name", "")
    if not isinstance(name, str):
        raise FormatError("'name' must be a string")
    return ParamCtmc(tuple(states), rates, name, initial)


def load_model_file(path) -> ParamCtmc:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def dump_model(m: ParamCtmc) -> dict:
    doc = {
        "name": m.name,
        "states": list(m.states),
        "rates": {f"{i}->{j}": str(e) for (i, j), e in m.rates.items()},
    }
    if m.initial is not None:
        doc["initial"] = dict(m.initial)
    return doc


def generator_at(m: ParamCtmc, lam: float) -> Generator:
    idx = {s: k for k, s in enumerate(m.states)}
    a = np.zeros((m.size, m.size))
    for (i, j), e in m.rates.items():
        v = evaluate(e, lam)
        if v < 0 or not math.isfinite(v):
            raise NegativeRate((i, j), lam, v)
        a[idx[i], idx[j]] = v
    return from_rates(m.states, a)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)
    fast: List[str] = field(default_factory=list)
    slow: List[str] = field(default_factory=list)
    nonnegativity: str = "sampled"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "nonnegativity": self.nonnegativity,
            "samples": list(VALIDATION_SAMPLES),
            "fast": self.fast,
            "slow": self.slow,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def validate_model(m: ParamCtmc) -> ValidationReport:
    """Check the standing assumptions; never raises for a loaded model.

    Nonnegativity is checked exactly at a few sample values of lambda and
    through the sign of the leading coefficient, not certified for all
    lambda > 0.
    """
    report = ValidationReport()
    bad = []
    for (i, j), e in m.rates.items():
        for lam in VALIDATION_SAMPLES:
            try:
                v = e.exact_value(lam)
            except PoleAtLambda:
                bad.append(f"{i}->{j} has a pole at lambda={lam}")
                continue
            if v < 0:
                bad.append(f"{i}->{j} is negative at lambda={lam}")
        try:
            limit_at_infinity(e)
        except EventuallyNegative:
            bad.append(f"{i}->{j} is negative as lambda->inf")
    report.checks.append(Check("nonnegative_rates", not bad, "; ".join(bad)))

    connected = graph.strongly_connected(m.support())
    report.checks.append(
        Check("irreducible", connected, "" if connected else "support digraph is not strongly connected")
    )

    zero_exit = []
    for s in m.states:
        try:
            lim = limit_at_infinity(m.exit_rate(s))
        except EventuallyNegative:
            lim = None
        if lim is not None and lim.is_infinite:
            report.fast.append(s)
        else:
            report.slow.append(s)
            if lim is not None and lim.value == 0:
                zero_exit.append(s)
    report.checks.append(
        Check("slow_space_nonempty", bool(report.slow), "" if report.slow else "B is empty: every state is fast")
    )
    report.checks.append(
        Check(
            "slow_exit_positive",
            not zero_exit,
            "" if not zero_exit else "slow states with zero limiting exit rate: " + ", ".join(zero_exit),
        )
    )
    return report
