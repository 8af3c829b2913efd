"""Reduction of two-time-scale continuous-time Markov chains.

Rates are rational functions of a scale parameter ``lambda``. States whose
exit rate diverges as ``lambda -> inf`` are fast; the rest are slow. The
package computes the limiting chain on the slow states and the numerical
tools used to compare it with the original chain at finite ``lambda``.
"""
from importlib import resources

from .classify import LimitData, Partition, classify_states, limit_jump_matrix
from .errors import *  # noqa: F401,F403
from .expr import LimitValue, RationalExpr, affine_decompose, evaluate, limit_at_infinity, parse
from .model import Generator, ParamCtmc, generator_at, load_model, load_model_file, validate_model
from .reduce import (
    Distribution,
    ReducedChain,
    check_slow_reachability,
    collapse_distribution,
    first_passage_distribution,
    reduced_generator,
    reduced_irreducible,
    sufficient_condition,
)
from .solve import (
    SweepResult,
    Trajectory,
    embed_slow_distribution,
    lambda_sweep,
    stationary_distribution,
    sup_tv_on_grid,
    transient_distribution,
    transient_trajectory,
    tv_distance,
)
from .sp import outer_expansion, sp_classify, sp_decompose, sp_reduced_generator

BUNDLED_MODELS = ("counterexample", "mwc", "three_state")

__version__ = "0.1.0"


def load_bundled(name: str) -> ParamCtmc:
    """One of the example models shipped with the package."""
    if name not in BUNDLED_MODELS:
        raise ValueError(f"no bundled model {name!r}; choose from {BUNDLED_MODELS}")
    text = resources.files(__package__).joinpath("models", f"{name}.json").read_text(encoding="utf-8")
    return load_model(text)
