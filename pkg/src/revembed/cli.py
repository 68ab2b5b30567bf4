"""Command-line interface.

Subcommands::

    revembed check    MATRIX            validation, reversibility, spectrum
    revembed embed    MATRIX | --batch DIR
    revembed estimate TRAJECTORY... --interval T
    revembed simulate MATRIX (--steps N | --ctmc --horizon H --interval T)

Matrix files are CSV (one row per line, comma separated) or JSON
(``{"matrix": [[...], ...]}``); trajectory files hold one 0-based state
index per line. Reports are JSON on standard output, diagnostics go to
standard error. Exit status is 0 for an embeddable matrix (or passing
``check``), 1 for any negative verdict and 2 for errors.
"""

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .chain import (
    DEFAULT_TOL,
    invariant_distribution,
    is_irreducible,
    is_reversible,
    restrict_to_largest_closed_class,
    validate_generator,
    validate_stochastic,
)
from .embedding import (
    EIGENVALUE_THRESHOLD,
    Verdict,
    check_positive_spectrum,
    reversible_embedding,
    spectral_decompose,
)
from .errors import EmbeddingError, IndexOutOfRange, NotSquare, ParseError
from .estimation import Trajectory, estimate_generator
from .simulation import sample_skeleton, simulate_ctmc, simulate_dtmc

log = logging.getLogger("revembed")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2
DEFAULT_MAX_DIM = 64


@dataclass
class RunConfig:
    subcommand: str
    inputs: list
    output: Optional[str] = None
    tol: float = DEFAULT_TOL
    format: Optional[str] = None
    interval: Optional[float] = None
    steps: Optional[int] = None
    horizon: Optional[float] = None
    seed: int = 0
    index: int = 0
    initial: int = 0
    ctmc: bool = False
    restrict: bool = False
    pseudocount: float = 0.0
    states: Optional[int] = None
    max_dim: int = DEFAULT_MAX_DIM
    batch: Optional[str] = None
    generator_out: Optional[str] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        if self.interval is not None and not self.interval > 0:
            raise ValueError("--interval must be positive")
        if self.pseudocount < 0:
            raise ValueError("--pseudocount must be nonnegative")


# -- parsing -----------------------------------------------------------------

def _infer_format(path, fmt):
    if fmt:
        return fmt
    return "json" if str(path).lower().endswith(".json") else "csv"


def parse_matrix_text(text, fmt="csv"):
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(doc, dict) or "matrix" not in doc:
            raise ParseError('expected an object with key "matrix"')
        rows = doc["matrix"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError('"matrix" must be an array of arrays')
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ParseError(f"matrix[{i}][{j}] is not a number: {x!r}")
        values = [[float(x) for x in row] for row in rows]
    elif fmt == "csv":
        values = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            row = []
            for col, cell in enumerate(line.split(","), start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise ParseError(f"not a number: {cell.strip()!r}", lineno, col) from None
            values.append(row)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    if not values:
        raise ParseError("empty matrix")
    width = len(values[0])
    for i, row in enumerate(values):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", line=i + 1)
    if width != len(values):
        raise NotSquare(f"matrix is {len(values)}x{width}")
    return np.array(values, dtype=float)


def parse_matrix_file(path, fmt=None):
    """Read an n x n matrix from a CSV or JSON file (format from the
    extension when not given)."""
    return parse_matrix_text(Path(path).read_text(), _infer_format(path, fmt))


def format_matrix(A, fmt="csv"):
    A = np.asarray(A, dtype=float)
    if fmt == "json":
        return json.dumps({"matrix": A.tolist()}) + "\n"
    return "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in A)


def write_matrix_file(path, A, fmt=None):
    Path(path).write_text(format_matrix(A, _infer_format(path, fmt)))


def parse_trajectory_text(text, interval=1.0, n_states=None):
    states = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            x = int(s)
        except ValueError:
            raise ParseError(f"not an integer state index: {s!r}", lineno) from None
        if x < 0:
            raise ParseError(f"negative state index {x}", lineno)
        if n_states is not None and x >= n_states:
            raise IndexOutOfRange(lineno, x, n_states)
        states.append(x)
    if len(states) < 2:
        raise ParseError(f"trajectory has {len(states)} observations, need at least 2")
    return Trajectory(np.array(states), interval, n_states)


def parse_trajectory_file(path, interval=1.0, n_states=None):
    """Read one 0-based state index per line."""
    return parse_trajectory_text(Path(path).read_text(), interval, n_states)


def write_trajectory_file(path, traj):
    Path(path).write_text("".join(f"{int(s)}\n" for s in traj.states))


# -- reports ------------------------------------------------------------------

def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _vec(v):
    return None if v is None else [_num(x) for x in np.asarray(v, dtype=float)]


def _entries(entries):
    return [{"i": i, "j": j, "value": _num(v)} for i, j, v in entries]


def report_to_dict(report):
    spec = report.spectral
    distinct = None
    if spec is not None:
        distinct = [{"value": _num(g), "multiplicity": int(m)}
                    for g, m in zip(spec.gammas, spec.multiplicities)]
    warnings = list(report.warnings)
    if report.coefficients is not None and report.coefficients.condition_estimate > 1e12:
        warnings.append(f"Vandermonde condition estimate {report.coefficients.condition_estimate:.3e}")
    return {
        "n": report.n,
        "verdict": report.verdict.value,
        "reasons": list(report.reasons),
        "method": report.method,
        "invariant_distribution": _vec(report.mu),
        "eigenvalues": _vec(report.eigenvalues),
        "distinct_eigenvalues": distinct,
        "coefficients": None if report.coefficients is None else _vec(report.coefficients.k),
        "generator": None if report.generator is None else report.generator.matrix.tolist(),
        "failing_entries": _entries(report.failing_entries),
        "marginal_entries": _entries(report.marginal_entries),
        "residual_expm": _num(report.residual_expm),
        "crosscheck_gap": _num(report.crosscheck_gap),
        "interval": report.interval,
        "state_map": None if report.state_map is None else list(report.state_map),
        "warnings": warnings,
    }


def emit_report(report, fmt="json"):
    """Serialize a report. Floats use Python's shortest round-trip repr, so
    re-parsing reproduces every value bit for bit."""
    if fmt != "json":
        raise ValueError(f"unsupported report format {fmt!r}")
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def exit_code(report):
    return EXIT_OK if report.verdict is Verdict.EMBEDDABLE else EXIT_NEGATIVE


# -- subcommands --------------------------------------------------------------

def _load_stochastic(path, cfg):
    raw = parse_matrix_file(path, cfg.format)
    if raw.shape[0] > cfg.max_dim:
        raise EmbeddingError(f"dimension {raw.shape[0]} exceeds --max-dim {cfg.max_dim}")
    P = validate_stochastic(raw, cfg.tol)
    state_map = None
    if cfg.restrict and not is_irreducible(P.matrix):
        P, keep = restrict_to_largest_closed_class(P.matrix)
        state_map = [int(i) for i in keep]
        log.info("restricted to closed class %s", state_map)
    return P, state_map


def run_check(cfg, path):
    P, state_map = _load_stochastic(path, cfg)
    out = {"n": P.n, "state_map": state_map, "irreducible": False, "reversible": None,
           "positive_spectrum": None, "invariant_distribution": None, "eigenvalues": None,
           "verdict": None, "conditions_hold": False}
    if not is_irreducible(P.matrix):
        out["verdict"] = Verdict.NOT_IRREDUCIBLE.value
        return out, EXIT_NEGATIVE
    out["irreducible"] = True
    mu = invariant_distribution(P.matrix)
    out["invariant_distribution"] = _vec(mu)
    out["reversible"] = is_reversible(P.matrix, mu, cfg.tol)
    if not out["reversible"]:
        out["verdict"] = Verdict.NOT_REVERSIBLE.value
        return out, EXIT_NEGATIVE
    spec = spectral_decompose(P.matrix, mu)
    out["eigenvalues"] = _vec(spec.lambdas)
    out["positive_spectrum"] = check_positive_spectrum(spec, EIGENVALUE_THRESHOLD)
    if not out["positive_spectrum"]:
        out["verdict"] = Verdict.NONPOSITIVE_EIGENVALUE.value
        return out, EXIT_NEGATIVE
    out["conditions_hold"] = True
    return out, EXIT_OK


def run_embed(cfg, path):
    P, state_map = _load_stochastic(path, cfg)
    report = reversible_embedding(P, cfg.tol)
    if state_map is not None:
        report = replace(report, state_map=tuple(state_map))
    return report


def run_estimate(cfg):
    interval = cfg.interval if cfg.interval is not None else 1.0
    trajs = [parse_trajectory_file(p, interval, cfg.states) for p in cfg.inputs]
    n = cfg.states if cfg.states is not None else max(t.n_states for t in trajs)
    if n > cfg.max_dim:
        raise EmbeddingError(f"dimension {n} exceeds --max-dim {cfg.max_dim}")
    trajs = [t if t.n_states == n else Trajectory(t.states, interval, n) for t in trajs]
    return estimate_generator(trajs, cfg.tol, restrict=cfg.restrict, pseudocount=cfg.pseudocount)


def run_simulate(cfg, path):
    raw = parse_matrix_file(path, cfg.format)
    if cfg.ctmc:
        if cfg.horizon is None:
            raise EmbeddingError("--ctmc needs --horizon")
        Q = validate_generator(raw, cfg.tol)
        jump = simulate_ctmc(Q.matrix, cfg.horizon, cfg.initial, cfg.seed, cfg.index)
        return sample_skeleton(jump, cfg.interval or 1.0, Q.n)
    if cfg.steps is None:
        raise EmbeddingError("simulate needs --steps (or --ctmc --horizon)")
    P = validate_stochastic(raw, cfg.tol)
    return simulate_dtmc(P.matrix, cfg.steps, cfg.initial, cfg.seed, cfg.index)


def _write(cfg, text):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _embed_one(cfg, path):
    try:
        report = run_embed(cfg, path)
        return report_to_dict(report), exit_code(report)
    except (EmbeddingError, ValueError, OSError) as exc:
        return {"error": str(exc)}, EXIT_ERROR


def run_batch(cfg):
    files = sorted(p for p in Path(cfg.batch).iterdir()
                   if p.is_file() and p.suffix.lower() in (".csv", ".json"))
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda p: _embed_one(cfg, p), files))
    codes = [code for _, code in results] or [EXIT_OK]
    doc = {p.name: body for p, (body, _) in zip(files, results)}
    return doc, max(codes)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="revembed",
        description="Reversible embedding of stochastic matrices and generator estimation. "
                    "All state indices are 0-based.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("csv", "json"), help="input matrix format")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
        p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
        p.add_argument("--restrict", action="store_true",
                       help="restrict to the largest closed class (matrices) "
                            "or drop unvisited states (trajectories)")

    p = sub.add_parser("check", help="validation, irreducibility, reversibility, spectrum")
    p.add_argument("inputs", nargs=1, metavar="MATRIX")
    common(p)

    p = sub.add_parser("embed", help="decide reversible embeddability and compute the generator")
    p.add_argument("inputs", nargs="?", metavar="MATRIX")
    p.add_argument("--batch", metavar="DIR", help="process every .csv/.json file in DIR")
    p.add_argument("--generator-out", metavar="PATH", help="also write the generator matrix")
    common(p)

    p = sub.add_parser("estimate", help="estimate a reversible generator from trajectories")
    p.add_argument("inputs", nargs="+", metavar="TRAJECTORY")
    p.add_argument("--interval", type=float, default=1.0, help="sampling period T")
    p.add_argument("--states", type=int, help="state-space size (default: 1 + max index)")
    p.add_argument("--pseudocount", type=float, default=0.0)
    p.add_argument("--generator-out", metavar="PATH")
    common(p)

    p = sub.add_parser("simulate", help="write a simulated trajectory")
    p.add_argument("inputs", nargs=1, metavar="MATRIX")
    p.add_argument("--steps", type=int)
    p.add_argument("--ctmc", action="store_true", help="MATRIX is a generator; sample its skeleton")
    p.add_argument("--horizon", type=float)
    p.add_argument("--interval", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0, help="stream index for independent runs")
    p.add_argument("--initial", type=int, default=0)
    common(p)
    return parser


def config_from_args(args):
    inputs = args.inputs
    if inputs is None:
        inputs = []
    elif isinstance(inputs, str):
        inputs = [inputs]
    fields = {k: v for k, v in vars(args).items()
              if k in RunConfig.__dataclass_fields__ and k not in ("inputs", "subcommand")}
    return RunConfig(subcommand=args.subcommand, inputs=inputs, **fields)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        if cfg.subcommand == "check":
            doc, code = run_check(cfg, cfg.inputs[0])
            _write(cfg, json.dumps(doc, indent=2) + "\n")
            return code
        if cfg.subcommand == "embed" and cfg.batch:
            doc, code = run_batch(cfg)
            _write(cfg, json.dumps(doc, indent=2) + "\n")
            return code
        if cfg.subcommand in ("embed", "estimate"):
            if cfg.subcommand == "embed":
                if not cfg.inputs:
                    raise EmbeddingError("embed needs MATRIX or --batch DIR")
                report = run_embed(cfg, cfg.inputs[0])
            else:
                report = run_estimate(cfg)
            _write(cfg, emit_report(report))
            if cfg.generator_out and report.generator is not None:
                write_matrix_file(cfg.generator_out, report.generator.matrix)
            for w in report.warnings:
                log.warning(w)
            return exit_code(report)
        if cfg.subcommand == "simulate":
            traj = run_simulate(cfg, cfg.inputs[0])
            _write(cfg, "".join(f"{int(s)}\n" for s in traj.states))
            return EXIT_OK
    except (EmbeddingError, ValueError, OSError) as exc:
        print(f"revembed: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    parser.error(f"unknown subcommand {args.subcommand}")


if __name__ == "__main__":
    sys.exit(main())
