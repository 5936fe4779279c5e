"""Command-line front end: single solves and the degenerate benchmark suite.

    sqsdp solve --problem no-kkt --out-trace trace.csv --out-report report.json
    sqsdp bench --n-mat 5 --count 10 --seed 1 --jobs 4

Solver option defaults can be overridden per run with flags, or globally with
a key=value file named by the SQSDP_DEFAULTS environment variable (flags
win).  Exit codes: 0 converged, 2 iteration budget exhausted, 1 solver
error, 64 usage error.
"""

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import corpus
from .driver import SolveReport, SolverOptions, SolveStatus, solve
from .exceptions import SolveAborted
from .model import NsdpProblem

CSV_HEADER = "k,r,rV,rO,phi,psi,gamma,sigma,step_tag,ell,xi_norm,cakkt"

_OPTION_FIELDS = {f.name: f.type for f in dataclasses.fields(SolverOptions)}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One resolved solve request: problem selector plus solver options."""

    selector: str
    options: SolverOptions
    out_trace: Optional[Path] = None
    out_report: Optional[Path] = None
    verbose: bool = False


def trace_csv(report: SolveReport) -> str:
    """Render the iteration trace; floats use repr so reruns are byte-identical."""
    lines = [CSV_HEADER]
    for row in report.trace:
        lines.append(
            ",".join(
                (
                    str(row.k),
                    repr(row.r),
                    repr(row.r_V),
                    repr(row.r_O),
                    repr(row.phi),
                    repr(row.psi),
                    repr(row.gamma),
                    repr(row.sigma),
                    row.step_tag,
                    "" if row.ell is None else str(row.ell),
                    "" if row.xi_norm is None else repr(row.xi_norm),
                    repr(row.cakkt),
                )
            )
        )
    return "\n".join(lines) + "\n"


def report_json(report: SolveReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def build_problem(selector: str, seed: Optional[int] = None) -> NsdpProblem:
    """Parse 'no-kkt' | 'degenerate:n_mat[:seed]' | 'random:n:m:d[:seed]'.

    A seed embedded in the selector wins; --seed fills in when omitted.
    """
    parts = selector.split(":")
    kind = parts[0]
    try:
        if kind == "no-kkt" and len(parts) == 1:
            return corpus.problem_no_kkt()
        if kind == "degenerate" and len(parts) in (2, 3):
            n_mat = int(parts[1])
            s = int(parts[2]) if len(parts) == 3 else (1 if seed is None else seed)
            return corpus.problem_degenerate(n_mat, s)
        if kind == "random" and len(parts) in (4, 5):
            n, m, d = (int(t) for t in parts[1:4])
            s = int(parts[4]) if len(parts) == 5 else (1 if seed is None else seed)
            return corpus.problem_random_smooth(n, m, d, s)
    except ValueError as exc:
        raise UsageError(f"bad problem selector {selector!r}: {exc}") from exc
    raise UsageError(
        f"bad problem selector {selector!r}; expected no-kkt, "
        "degenerate:n_mat[:seed], or random:n:m:d[:seed]"
    )


def _coerce(name: str, text: str):
    kind = _OPTION_FIELDS[name]
    if kind is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"option {name}: expected a boolean, got {text!r}")
    try:
        return kind(text)
    except ValueError as exc:
        raise UsageError(f"option {name}: {exc}") from exc


def load_defaults_file(path: str) -> dict:
    """Parse a key=value file with '#' comments; keys are SolverOptions fields."""
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _OPTION_FIELDS:
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        overrides[key] = _coerce(key, value.strip())
    return overrides


def make_options(args: argparse.Namespace) -> SolverOptions:
    overrides = {}
    defaults_path = os.environ.get("SQSDP_DEFAULTS")
    if defaults_path:
        overrides.update(load_defaults_file(defaults_path))
    for flag in ("k_max", "epsilon", "sigma0", "gamma0"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = value
    try:
        return SolverOptions(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _print_summary(report: SolveReport, out=sys.stdout):
    final = report.final
    x_norm = float(max(abs(final.x))) if final.x.size else 0.0
    print(
        f"{report.problem_name}: status={report.status.value} "
        f"iterations={report.iterations} r={report.final_r:.6e} "
        f"cakkt={report.final_cakkt:.6e} max|x|={x_norm:.6e} "
        f"time={report.wall_time:.3f}s",
        file=out,
    )


def _write_outputs(report: SolveReport, out_trace, out_report):
    if out_trace:
        Path(out_trace).write_text(trace_csv(report))
    if out_report:
        Path(out_report).write_text(report_json(report))


_EXIT_BY_STATUS = {
    SolveStatus.RESIDUAL_CONVERGED: 0,
    SolveStatus.GAMMA_CONVERGED: 0,
    SolveStatus.MAX_ITERATIONS: 2,
}


def cmd_solve(args: argparse.Namespace) -> int:
    problem = build_problem(args.problem, args.seed)
    config = RunConfig(
        selector=args.problem,
        options=make_options(args),
        out_trace=Path(args.out_trace) if args.out_trace else None,
        out_report=Path(args.out_report) if args.out_report else None,
        verbose=args.verbose,
    )
    try:
        report = solve(problem, x0=[0.0] * problem.n, opts=config.options)
    except SolveAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            _write_outputs(exc.report, config.out_trace, config.out_report)
            _print_summary(exc.report, out=sys.stderr)
        return 1
    _write_outputs(report, config.out_trace, config.out_report)
    if config.verbose:
        sys.stdout.write(trace_csv(report))
    _print_summary(report)
    return _EXIT_BY_STATUS.get(report.status, 1)


def _bench_one(task):
    n_mat, seed, opts = task
    problem = corpus.problem_degenerate(n_mat, seed)
    try:
        return seed, solve(problem, x0=[0.0] * problem.n, opts=opts), None
    except SolveAborted as exc:
        return seed, exc.report, str(exc)


def cmd_bench(args: argparse.Namespace) -> int:
    opts = make_options(args)
    seeds = list(range(args.seed if args.seed is not None else 1,
                       (args.seed if args.seed is not None else 1) + args.count))
    tasks = [(args.n_mat, s, opts) for s in seeds]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]

    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    good = []
    failures = []
    for seed, report, error in results:
        if out_dir and report is not None:
            stem = out_dir / f"degenerate-n{args.n_mat}-seed{seed}"
            _write_outputs(report, f"{stem}.trace.csv", f"{stem}.report.json")
        if error is None:
            good.append(report)
            if args.verbose:
                _print_summary(report)
        else:
            failures.append((seed, error))
            print(f"seed {seed}: {error}", file=sys.stderr)

    print(f"degenerate benchmark: n_mat={args.n_mat}, instances={len(seeds)}, "
          f"seeds={seeds[0]}..{seeds[-1]}, solved={len(good)}, failed={len(failures)}")
    if good:
        finals = [r.final_r for r in good]
        iters = [r.iterations for r in good]
        print(f"  average iterations  {sum(iters) / len(iters):.1f}")
        print(f"  average r           {sum(finals) / len(finals):.2e}")
        print(f"  maximum r           {max(finals):.2e}")
        print(f"  minimum r           {min(finals):.2e}")
    return 1 if failures else 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(64)


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--k-max", dest="k_max", type=int, default=None,
                     help="outer iteration budget")
    sub.add_argument("--epsilon", type=float, default=None,
                     help="stopping tolerance on r and gamma")
    sub.add_argument("--sigma0", type=float, default=None, help="initial penalty")
    sub.add_argument("--gamma0", type=float, default=None, help="initial merit-gradient budget")
    sub.add_argument("--seed", type=int, default=None, help="instance seed (or bench seed base)")
    sub.add_argument("-v", "--verbose", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqsdp",
                     description="Stabilized sequential quadratic SDP solver")
    commands = parser.add_subparsers(dest="command", required=True)

    p_solve = commands.add_parser("solve", help="solve one problem instance")
    p_solve.add_argument("--problem", required=True,
                         help="no-kkt | degenerate:n_mat[:seed] | random:n:m:d[:seed]")
    p_solve.add_argument("--out-trace", default=None, help="write the iteration trace CSV here")
    p_solve.add_argument("--out-report", default=None, help="write the JSON report here")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_bench = commands.add_parser("bench", help="run the seeded degenerate benchmark")
    p_bench.add_argument("--n-mat", dest="n_mat", type=int, default=5,
                         help="matrix order of the degenerate family")
    p_bench.add_argument("--count", type=int, default=10, help="number of seeded instances")
    p_bench.add_argument("--jobs", type=int, default=1, help="solve instances in parallel")
    p_bench.add_argument("--out-dir", default=None,
                         help="write per-instance trace CSVs and reports here")
    _add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sqsdp: error: {exc}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
