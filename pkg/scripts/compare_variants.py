"""Run every solver on the synthetic benchmarks and write one trace per run.

    python scripts/compare_variants.py --out-dir runs --max-iter 2000
"""

import argparse
import io
from pathlib import Path

from adafw.cli import BenchmarkSpec, run_benchmark
from adafw.core import SolverConfig

RUNS = {
    "l1_logistic": ["adafw", "adaafw", "adapfw", "fixedfw"],
    "nuclear_huber": ["adafw", "fixedfw", "adamp"],
    "simplex_quadratic": ["adafw", "adaafw", "adapfw", "fixedfw"],
    "mp_leastsquares": ["adamp"],
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=2.0)
    args = p.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    print(f"{'problem':<18} {'algorithm':<9} summary")
    for problem, algorithms in RUNS.items():
        for algo in algorithms:
            spec = BenchmarkSpec(
                algo, problem, radius=args.radius,
                config=SolverConfig(max_iter=args.max_iter, rng_seed=args.seed),
                out=str(out_dir / f"{problem}_{algo}.csv"),
            )
            buf = io.StringIO()
            code = run_benchmark(spec, buf, buf)
            print(f"{problem:<18} {algo:<9} exit={code} {buf.getvalue().strip()}")


if __name__ == "__main__":
    main()
