"""Benchmark runner: ``adafw-bench --algorithm adapfw --problem l1_logistic ...``.

Writes one CSV row per iteration and prints a one-line summary. Exit codes:
0 success, 1 I/O failure, 2 invalid benchmark spec, 3 backtracking failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .algorithms import lipschitz_stats, solve
from .core import ContractError, SolverConfig
from .datasets import ParseError, ratings_shape, read_libsvm, read_ratings, synth_problem
from .linesearch import BacktrackingError
from .objectives import InputError, huber_matrix, logistic_l2
from .oracles import DegradedLMO, L1BallLMO, MatchingPursuitLMO, NuclearBallLMO, SimplexLMO

ALGORITHMS = {"adafw": "fw", "adaafw": "afw", "adapfw": "pfw", "adamp": "mp", "fixedfw": "fw"}
PROBLEMS = ("l1_logistic", "nuclear_huber", "simplex_quadratic", "mp_leastsquares")
TRACE_COLUMNS = (
    "iter", "elapsed_s", "objective", "gap", "dual_gap", "step_size", "lipschitz",
    "step_type", "n_backtracks", "good_steps", "avg_lipschitz", "max_lipschitz",
)

EXIT_OK, EXIT_IO, EXIT_SPEC, EXIT_BACKTRACK = 0, 1, 2, 3


class SpecError(ValueError):
    pass


@dataclass
class BenchmarkSpec:
    algorithm: str
    problem: str
    data: Optional[str] = None
    dim: int = 50
    n_samples: int = 200
    radius: float = 1.0
    config: SolverConfig = field(default_factory=SolverConfig)
    out: str = "-"
    trace_every: int = 1
    fixed_lipschitz: Optional[float] = None

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise SpecError(f"unknown algorithm {self.algorithm!r}")
        if self.problem not in PROBLEMS:
            raise SpecError(f"unknown problem {self.problem!r}")
        if self.algorithm in ("adaafw", "adapfw") and self.problem == "nuclear_huber":
            raise SpecError(f"{self.algorithm} needs a finite atom set; nuclear_huber has none")
        if self.data is not None and self.problem not in ("l1_logistic", "nuclear_huber"):
            raise SpecError(f"--data is not supported for {self.problem}")
        if not self.radius > 0:
            raise SpecError("radius must be positive")
        if self.trace_every < 1:
            raise SpecError("--trace-every must be >= 1")
        if self.fixed_lipschitz is not None and not self.fixed_lipschitz > 0:
            raise SpecError("--fixed-L must be positive")


def build_objective(spec: BenchmarkSpec):
    if spec.data is None:
        return synth_problem(spec.problem, spec.dim, spec.n_samples, spec.config.rng_seed).objective
    if spec.problem == "l1_logistic":
        A, b = read_libsvm(spec.data)
        return logistic_l2(A, b, 1.0 / A.shape[0])
    triplets = read_ratings(spec.data)
    return huber_matrix(triplets, ratings_shape(triplets), 1.0)


def build_oracle(spec: BenchmarkSpec):
    variant = ALGORITHMS[spec.algorithm]
    seed = spec.config.rng_seed
    if variant == "mp":
        base = NuclearBallLMO(1.0, seed=seed) if spec.problem == "nuclear_huber" else 1.0
        lmo = MatchingPursuitLMO(base)
    elif spec.problem == "simplex_quadratic":
        lmo = SimplexLMO()
    elif spec.problem == "nuclear_huber":
        lmo = NuclearBallLMO(spec.radius, seed=seed)
    else:
        lmo = L1BallLMO(spec.radius)
    delta = spec.config.lmo_quality
    if delta < 1 and variant in ("fw", "mp"):
        lmo = DegradedLMO(lmo, delta, matching_pursuit=variant == "mp")
    return lmo


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def write_trace(trace, fh, every: int = 1) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    last = len(trace) - 1
    for k, r in enumerate(trace):
        if r.iter % every and k != last:
            continue
        writer.writerow([
            r.iter, _fmt(r.elapsed), _fmt(r.objective), _fmt(r.gap), _fmt(r.dual_gap),
            _fmt(r.step_size), _fmt(r.lipschitz), r.step_type, r.n_backtracks, r.good_steps,
            _fmt(r.avg_lipschitz), _fmt(r.max_lipschitz),
        ])


def summarize(result, known_L: Optional[float]) -> str:
    trace = result.trace
    steps = result.iterations
    bad = result.bad_steps()
    parts = [f"iterations={steps}", f"reason={result.reason}"]
    if trace:
        parts.append(f"final_gap={trace[-1].gap:.6e}")
        parts.append(f"objective={trace[-1].objective:.12e}")
    try:
        avg, _ = lipschitz_stats(trace)
        if known_L:
            parts.append(f"Lbar/L={avg / known_L:.4e}")
        else:
            parts.append(f"Lbar={avg:.4e}")
    except ValueError:
        pass
    parts.append(f"bad_fraction={bad / steps if steps else 0.0:.3e}")
    return " ".join(parts)


def run_benchmark(spec: BenchmarkSpec, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        spec.validate()
    except SpecError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SPEC
    try:
        objective = build_objective(spec)
        lmo = build_oracle(spec)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    except (InputError, ContractError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SPEC

    variant = ALGORITHMS[spec.algorithm]
    fixed = None
    if spec.algorithm == "fixedfw":
        fixed = spec.fixed_lipschitz or objective.lipschitz
    code = EXIT_OK
    try:
        result = solve(objective, lmo, spec.config, variant, fixed_lipschitz=fixed)
    except BacktrackingError as exc:
        print(f"error: {exc}", file=stderr)
        result = exc.result
        code = EXIT_BACKTRACK
    except ContractError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SPEC

    try:
        if spec.out == "-":
            write_trace(result.trace, stdout, spec.trace_every)
            summary_fh = stderr
        else:
            with open(spec.out, "w", newline="") as fh:
                write_trace(result.trace, fh, spec.trace_every)
            summary_fh = stdout
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    print(summarize(result, objective.lipschitz), file=summary_fh)
    return code


def _sweep_out(out: str, radius: float) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}_r{radius:g}{p.suffix}"))


def run_sweep(spec: BenchmarkSpec, radii, workers: int = 4) -> int:
    """Run ``spec`` once per radius on a thread pool; returns the worst exit code."""
    if spec.out == "-":
        print("error: --sweep needs --out", file=sys.stderr)
        return EXIT_SPEC
    specs = [replace(spec, radius=r, out=_sweep_out(spec.out, r)) for r in radii]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(_run_quiet, specs))
    for s, (code, text) in zip(specs, codes):
        print(f"radius={s.radius:g} exit={code} {text}")
    return max(code for code, _ in codes)


def _run_quiet(spec):
    out, err = io.StringIO(), io.StringIO()
    code = run_benchmark(spec, out, err)
    return code, (out.getvalue() + err.getvalue()).strip()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adafw-bench", description=__doc__.splitlines()[0])
    p.add_argument("--algorithm", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    p.add_argument("--data", help="libsvm file (l1_logistic) or ratings file (nuclear_huber)")
    p.add_argument("--dim", type=int, default=50, help="synthetic problem dimension")
    p.add_argument("--n-samples", type=int, default=200, help="synthetic problem samples")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=1.0, help="oracle quality in (0, 1]")
    p.add_argument("--eta", type=float, default=0.9)
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--init-L", type=float, default=None, help="initial Lipschitz estimate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="trace CSV path ('-' for stdout)")
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--fixed-L", type=float, default=None, help="Lipschitz constant for fixedfw")
    p.add_argument("--no-warm-start", action="store_true", help="start each search at eta * L_prev")
    p.add_argument("--sweep", help="comma-separated radii, one run per radius")
    p.add_argument("--workers", type=int, default=4)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    try:
        config = SolverConfig(
            max_iter=args.max_iter, tol=args.tol, lmo_quality=args.delta, tau=args.tau,
            eta=args.eta, init_lipschitz=args.init_L, rng_seed=args.seed,
            warm_start=not args.no_warm_start,
        )
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    spec = BenchmarkSpec(
        algorithm=args.algorithm, problem=args.problem, data=args.data, dim=args.dim,
        n_samples=args.n_samples, radius=args.radius, config=config, out=args.out,
        trace_every=args.trace_every, fixed_lipschitz=args.fixed_L,
    )
    if args.sweep:
        try:
            radii = [float(r) for r in args.sweep.split(",") if r.strip()]
        except ValueError:
            print("error: --sweep expects comma-separated numbers", file=sys.stderr)
            return EXIT_SPEC
        return run_sweep(spec, radii, args.workers)
    return run_benchmark(spec)


if __name__ == "__main__":
    sys.exit(main())
