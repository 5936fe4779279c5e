"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Times the hot symmetric-matrix kernels over a range of matrix orders, then an
end-to-end solve per backend (in subprocesses, since the backend is chosen at
import time via SQSDP_KERNEL).

    python benchmarks/bench_kernels.py [--repeats 2000] [--skip-solves]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from sqsdp import symkernel as sk

DIMS = (2, 5, 10, 20)

SOLVE_SNIPPET = """
import time
import numpy as np
from sqsdp import corpus, driver, symkernel

t0 = time.perf_counter()
rep = driver.solve(corpus.problem_no_kkt(), x0=[0.0])
t1 = time.perf_counter()
p = corpus.problem_degenerate(5, 1)
rep2 = driver.solve(p, x0=np.zeros(p.n))
t2 = time.perf_counter()
print(f"{symkernel.backend_name()} {t1 - t0:.4f} {t2 - t1:.4f} "
      f"{rep.iterations} {rep2.iterations}")
"""


def _sym(rng, d):
    return sk.symmetrize(rng.uniform(-1.0, 1.0, (d, d)))


def time_kernel(fn, args, repeats):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_kernels(repeats):
    backends = sk.available_backends()
    names = sorted(backends)
    print(f"kernel micro-benchmarks ({repeats} repeats, times in us)")
    header = f"{'kernel':<18}{'d':>4}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    rng = np.random.default_rng(1)
    for d in DIMS:
        a = _sym(rng, d)
        b = _sym(rng, d)
        v = backends[names[0]].svec(a)
        w, p = backends[names[0]].eig_sym(a)
        stack = np.ascontiguousarray(np.stack([_sym(rng, d) for _ in range(d)]))
        cases = [
            ("svec", lambda m: (m.svec, (a,))),
            ("smat", lambda m: (m.smat, (v, d))),
            ("eig_sym", lambda m: (m.eig_sym, (a,))),
            ("psd_project", lambda m: (m.psd_project, (a,))),
            ("jordan_product", lambda m: (m.jordan_product, (a, b))),
            ("dpsd_apply", lambda m: (m.dpsd_apply, (w, p, b))),
            ("loewner_gram", lambda m: (m.loewner_gram, (w, p, stack))),
        ]
        for label, make in cases:
            row = f"{label:<18}{d:>4}"
            times = []
            for name in names:
                fn, args = make(backends[name])
                us = time_kernel(fn, args, repeats) * 1e6
                times.append(us)
                row += f"{us:>12.2f}"
            if len(times) == 2:
                row += f"{times[1] / times[0]:>9.1f}x" if names == ["c", "python"] else ""
            print(row)
        print()


def bench_solves():
    print("end-to-end solves per backend (no-kkt, degenerate n=5 seed 1)")
    print(f"{'backend':<10}{'no-kkt (s)':>12}{'degenerate (s)':>16}{'iters':>14}")
    for name in sorted(sk.available_backends()):
        env = dict(os.environ, SQSDP_KERNEL=name)
        out = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET], env=env,
            capture_output=True, text=True, check=True,
        ).stdout.split()
        print(f"{out[0]:<10}{float(out[1]):>12.4f}{float(out[2]):>16.4f}"
              f"{out[3] + '/' + out[4]:>14}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--skip-solves", action="store_true")
    args = parser.parse_args()
    print(f"active backend: {sk.backend_name()}; built: {sorted(sk.available_backends())}\n")
    bench_kernels(args.repeats)
    if not args.skip_solves:
        bench_solves()


if __name__ == "__main__":
    main()
