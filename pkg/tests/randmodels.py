"""Random model generators shared by the property tests."""
import numpy as np

import ctmcreduce as cr
from ctmcreduce.errors import CtmcError


def _const(rng):
    return f"{rng.integers(1, 40) / 8:g}"


RATE_TEMPLATES = {
    "const": lambda r: _const(r),
    "linear": lambda r: f"{_const(r)}*lambda",
    "affine": lambda r: f"{_const(r)}*lambda + {_const(r)}",
    "inverse": lambda r: f"{_const(r)}/lambda",
    "shifted": lambda r: f"{_const(r)}/(lambda + {_const(r)})",
    "quadratic": lambda r: f"({_const(r)}*lambda*lambda + {_const(r)})/(lambda + {_const(r)})",
    "saturating": lambda r: f"({_const(r)}*lambda + 1)/(lambda + {_const(r)})",
}


def random_document(rng, n=None, kinds=None, density=0.5):
    kinds = list(kinds or RATE_TEMPLATES)
    n = n or int(rng.integers(2, 9))
    states = [f"s{k}" for k in range(n)]
    edges = set()
    order = rng.permutation(n)
    for a, b in zip(order, np.roll(order, -1)):
        edges.add((int(a), int(b)))
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                edges.add((i, j))
    rates = {}
    for i, j in sorted(edges):
        kind = kinds[int(rng.integers(len(kinds)))]
        rates[f"{states[i]}->{states[j]}"] = RATE_TEMPLATES[kind](rng)
    return {"name": "random", "states": states, "rates": rates}


def random_reducible_models(rng, count, kinds=None, n=None, require=None, max_tries=100000):
    """Random valid models whose reduced chain exists.

    ``require`` is an optional predicate on (model, partition, limit data, reduced chain).
    """
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not generate enough random models")
        m = cr.load_model(random_document(rng, n=n, kinds=kinds))
        if not cr.validate_model(m).passed:
            continue
        try:
            p = cr.classify_states(m)
            ld = cr.limit_jump_matrix(m, p)
            rc = cr.reduced_generator(ld, p)
        except CtmcError:
            continue
        if require is not None and not require(m, p, ld, rc):
            continue
        out.append((m, p, ld, rc))
    return out
