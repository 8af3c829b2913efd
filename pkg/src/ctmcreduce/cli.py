"""Command-line front end: ``ctmc-reduce <subcommand> --model PATH ...``.

Exit codes: 0 success, 1 validation failure, 2 a reduction assumption
fails, 3 I/O or format error. Errors are reported as one JSON object on
stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import BUNDLED_MODELS, load_bundled, ssa
from .classify import classify_states, limit_jump_matrix
from .errors import AssumptionError, CtmcError, FormatError, PathBudgetExceeded, ValidationFailure
from .model import ParamCtmc, generator_at, load_model_file, validate_model
from .reduce import (
    Distribution,
    collapse_distribution,
    first_passage_distribution,
    reduced_generator,
    reduced_irreducible,
    sufficient_condition,
)
from .solve import (
    fmt,
    grid_times,
    lambda_sweep,
    stationary_distribution,
    sup_tv_on_grid,
    transient_trajectory,
)
from .sp import sp_classify, sp_decompose, sp_reduced_generator

SUBCOMMANDS = (
    "validate",
    "classify",
    "reduce",
    "stationary",
    "transient",
    "compare",
    "sweep",
    "simulate",
    "firstpassage",
    "sp",
)
TABULAR = {"transient", "compare", "sweep", "simulate", "firstpassage"}


@dataclass
class RunConfig:
    subcommand: str
    model: str
    lam: Optional[float] = None
    lambdas: Optional[List[float]] = None
    pi: Optional[str] = None
    t0: float = 0.0
    T: float = 20.0
    step: Optional[float] = None
    seed: int = 0
    paths: int = 10000
    output: Optional[str] = None
    format: Optional[str] = None
    quiet: bool = False
    chain: str = "x"

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise FormatError(f"unknown subcommand {self.subcommand!r}")
        if self.lam is not None and not self.lam > 0:
            raise FormatError("--lambda must be positive")
        if self.lambdas is not None and any(not x > 0 for x in self.lambdas):
            raise FormatError("--lambdas must all be positive")
        if self.step is not None and not self.step > 0:
            raise FormatError("--step must be positive")
        if self.paths < 1:
            raise FormatError("--paths must be at least 1")
        if self.format is None:
            self.format = "csv" if self.subcommand in TABULAR else "json"
        if self.format == "csv" and self.subcommand not in TABULAR:
            raise FormatError(f"{self.subcommand} only emits json")


# ---------------------------------------------------------------------------
# helpers

def _load(source: str) -> ParamCtmc:
    if not os.path.exists(source) and source in BUNDLED_MODELS:
        return load_bundled(source)
    try:
        return load_model_file(source)
    except OSError as exc:
        raise FormatError(f"cannot read model {source!r}: {exc.strerror}") from None


def _initial(cfg: RunConfig, m: ParamCtmc) -> Distribution:
    source = cfg.pi
    if source is None:
        if m.initial is not None:
            return Distribution.from_mapping(m.states, m.initial)
        return Distribution.uniform(m.states)
    if source == "uniform":
        return Distribution.uniform(m.states)
    if source in m.states:
        return Distribution.delta(m.states, source)
    try:
        with open(source, encoding="utf-8") as fh:
            mapping = json.load(fh)
    except OSError:
        raise FormatError(f"--pi {source!r} is neither a state, 'uniform', nor a readable file") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"--pi file is not valid JSON: {exc}") from None
    if not isinstance(mapping, dict):
        raise FormatError("--pi file must hold an object mapping states to probabilities")
    try:
        return Distribution.from_mapping(m.states, mapping)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _require_valid(m: ParamCtmc):
    report = validate_model(m)
    if not report.passed:
        raise ValidationFailure("; ".join(f"{c.name}: {c.detail}" for c in report.failures()))


def _need_lambda(cfg: RunConfig) -> float:
    if cfg.lam is None:
        raise FormatError(f"{cfg.subcommand} requires --lambda")
    return cfg.lam


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _matrix(a) -> list:
    return [[float(x) for x in row] for row in np.asarray(a)]


def _reduction(m):
    p = classify_states(m)
    ld = limit_jump_matrix(m, p)
    return p, ld, reduced_generator(ld, p)


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, text)

def _cmd_validate(cfg, m):
    report = validate_model(m)
    return (0 if report.passed else 1), _json(report.to_dict())


def _cmd_classify(cfg, m):
    _require_valid(m)
    p = classify_states(m)
    return 0, _json({"fast": list(p.fast), "slow": list(p.slow)})


def _cmd_reduce(cfg, m):
    _require_valid(m)
    p, ld, rc = _reduction(m)
    gpi = collapse_distribution(_initial(cfg, m), ld, p)
    return 0, _json(
        {
            "fast": list(p.fast),
            "slow": list(p.slow),
            "gamma": _matrix(rc.gamma.entries),
            "gamma_pi": gpi.as_dict(),
            "irreducible": reduced_irreducible(rc),
            "sufficient_condition": sufficient_condition(ld),
        }
    )


def _cmd_stationary(cfg, m):
    _require_valid(m)
    out = {}
    if cfg.lam is not None:
        out["lambda"] = cfg.lam
        out["mu_lambda"] = stationary_distribution(generator_at(m, cfg.lam)).as_dict()
    _, _, rc = _reduction(m)
    out["reduced_irreducible"] = reduced_irreducible(rc)
    out["mu_B"] = stationary_distribution(rc.gamma).as_dict() if out["reduced_irreducible"] else None
    return 0, _json(out)


def _window(cfg):
    step = cfg.step if cfg.step is not None else (cfg.T - cfg.t0) / 2000
    return cfg.t0, cfg.T, step


def _cmd_transient(cfg, m):
    _require_valid(m)
    t0, T, step = _window(cfg)
    times = grid_times(t0, T, step)
    pi = _initial(cfg, m)
    if cfg.chain == "y":
        p, ld, rc = _reduction(m)
        traj = transient_trajectory(rc.gamma, collapse_distribution(pi, ld, p), times)
    else:
        traj = transient_trajectory(generator_at(m, _need_lambda(cfg)), pi, times)
    if cfg.format == "json":
        return 0, _json(
            {"labels": list(traj.labels), "times": [float(t) for t in traj.times], "probs": _matrix(traj.probs)}
        )
    header = ["t"] + [f"state_{s}" for s in traj.labels]
    return 0, _table(header, ([float(t)] + [float(v) for v in row] for t, row in zip(traj.times, traj.probs)))


def _cmd_compare(cfg, m):
    _require_valid(m)
    lam = _need_lambda(cfg)
    t0, T, step = _window(cfg)
    sup, arg = sup_tv_on_grid(m, lam, None, _initial(cfg, m), t0, T, step)
    if cfg.format == "json":
        return 0, _json({"lambda": lam, "sup_tv": sup, "argmax_t": arg, "t0": t0, "T": T, "step": step})
    return 0, _table(["lambda", "sup_tv", "argmax_t"], [[float(lam), sup, arg]])


def _cmd_sweep(cfg, m):
    _require_valid(m)
    if not cfg.lambdas:
        raise FormatError("sweep requires --lambdas")
    t0, T, step = _window(cfg)
    res = lambda_sweep(m, _initial(cfg, m), t0, T, step, cfg.lambdas)
    if cfg.format == "json":
        return 0, _json({"lambdas": res.lambdas, "sup_tv": res.sup_tv, "argmax_t": res.argmax_t, "grid": res.grid})
    return 0, res.to_csv()


def _cmd_simulate(cfg, m):
    _require_valid(m)
    g = generator_at(m, _need_lambda(cfg))
    pi = _initial(cfg, m)
    dist, err = ssa.empirical_distribution(g, pi, cfg.T, cfg.paths, cfg.seed)
    if cfg.format == "json":
        return 0, _json({"t": cfg.T, "paths": cfg.paths, "seed": cfg.seed,
                         "probability": dist.as_dict(), "stderr": dict(zip(g.labels, map(float, err)))})
    return 0, _table(["state", "probability", "stderr"],
                     ([s, float(v), float(e)] for s, v, e in zip(g.labels, dist.probs, err)))


def _cmd_firstpassage(cfg, m):
    _require_valid(m)
    lam = _need_lambda(cfg)
    pi = _initial(cfg, m)
    p = classify_states(m)
    formula = first_passage_distribution(m, lam, pi, p)
    sample = ssa.sample_first_passage(m, lam, pi, p, cfg.paths, cfg.seed)
    if cfg.format == "json":
        return 0, _json({
            "lambda": lam, "paths": cfg.paths, "seed": cfg.seed,
            "formula": formula.as_dict(), "empirical": sample.hitting.as_dict(),
            "stderr": dict(zip(p.slow, map(float, sample.stderr))),
            "tau_quantiles": {str(k): v for k, v in sample.quantiles.items()},
        })
    rows = [[s, float(formula[s]), float(sample.hitting[s]), float(e)] for s, e in zip(p.slow, sample.stderr)]
    return 0, _table(["state", "formula", "empirical", "stderr"], rows)


def _cmd_sp(cfg, m):
    _require_valid(m)
    d = sp_decompose(m)
    sp_part = sp_classify(d)
    gamma_sp = sp_reduced_generator(d, sp_part).gamma.entries
    p, _, rc = _reduction(m)
    diff = float(np.max(np.abs(gamma_sp - rc.gamma.entries))) if gamma_sp.size else 0.0
    return 0, _json({
        "labels": list(d.labels),
        "q_tilde": _matrix(d.tilde),
        "q_hat": _matrix(d.hat),
        "sp_fast": list(sp_part.fast),
        "sp_slow": list(sp_part.slow),
        "classification_agrees": sp_part.fast == p.fast and sp_part.slow == p.slow,
        "gamma_sp": _matrix(gamma_sp),
        "gamma_general": _matrix(rc.gamma.entries),
        "max_abs_diff": diff,
        "agree": diff <= 1e-10,
    })


_COMMANDS = {name: globals()[f"_cmd_{name}"] for name in SUBCOMMANDS}


def _report_error(stream, name, message, code):
    stream.write(json.dumps({"error": name, "message": message, "exit_code": code}) + "\n")


def run_command(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        m = _load(cfg.model)
        code, text = _COMMANDS[cfg.subcommand](cfg, m)
    except (CtmcError, OSError) as exc:
        if isinstance(exc, ValidationFailure):
            code = 1
        elif isinstance(exc, (AssumptionError, PathBudgetExceeded)):
            code = 2
        else:
            code = 3
        _report_error(stderr, type(exc).__name__, str(exc), code)
        return code
    if cfg.output:
        try:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            _report_error(stderr, "OSError", str(exc), 3)
            return 3
    elif not cfg.quiet:
        stdout.write(text)
    return code


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the format-error code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _report_error(sys.stderr, "UsageError", message, 3)
        sys.exit(3)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", required=True,
                        help="model JSON file, or a bundled model: " + ", ".join(BUNDLED_MODELS))
    lam = common.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float)
    lam.add_argument("--lambdas", type=_floats)
    common.add_argument("--pi", help="initial law: a state label, 'uniform', or a JSON file")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--T", type=float, default=20.0, help="time horizon (simulate: observation time)")
    common.add_argument("--step", type=float, help="grid step (default (T - t0)/2000)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--paths", type=int, default=10000)
    common.add_argument("--output")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--chain", choices=("x", "y"), default="x",
                        help="transient: original chain at lambda (x) or reduced chain (y)")

    parser = _Parser(prog="ctmc-reduce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            subcommand=args.subcommand, model=args.model, lam=args.lam, lambdas=args.lambdas,
            pi=args.pi, t0=args.t0, T=args.T, step=args.step, seed=args.seed, paths=args.paths,
            output=args.output, format=args.format, quiet=args.quiet, chain=args.chain,
        )
    except FormatError as exc:
        _report_error(sys.stderr, type(exc).__name__, str(exc), 3)
        return 3
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
