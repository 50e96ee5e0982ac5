"""Benchmark: compiled possibility kernel vs the pure-Python fallback.

Times the hot kernel on representative workloads and, when the compiled
extension is available, reports the end-to-end certification speed for one
d=11 state under each backend (via subprocesses, since the backend is
selected at import).

Usage:  python benchmarks/bench_backends.py
"""

import os
import random
import subprocess
import sys
import time

import numpy as np

from stabctx import _kernel_py
from stabctx.kernel import coerce_point, coerce_table
from stabctx.phase_space import enumerate_contexts
from stabctx.states import PhaseFunctionState
from stabctx.zmod import Modulus, ZdPoly

try:
    from stabctx import _kernel
except ImportError:
    _kernel = None


def instances(d, count, seed=0):
    rng = random.Random(seed)
    m = Modulus(d)
    contexts = enumerate_contexts(m, 2)
    out = []
    for _ in range(count):
        coeffs = {(rng.randrange(4), rng.randrange(4)): rng.randrange(d)
                  for _ in range(5)}
        st = PhaseFunctionState(m, 2, ZdPoly(m, 2, coeffs))
        ctx = contexts[rng.randrange(len(contexts))]
        b1, b2 = ctx.canonical_basis
        out.append((coerce_table(st.phi_table()),
                    coerce_point(b1.coords), coerce_point(b2.coords),
                    rng.randrange(d), rng.randrange(d)))
    return out


def time_backend(impl, d, work, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for tab, u, v, a, b in work:
            impl.first_possible_ket(d, tab, u, v, a, b)
        best = min(best, time.perf_counter() - t0)
    return best / len(work)


def decide_elapsed(pure: bool) -> float:
    env = dict(os.environ)
    if pure:
        env["STABCTX_PURE_PYTHON"] = "1"
    else:
        env.pop("STABCTX_PURE_PYTHON", None)
    code = (
        "import time\n"
        "from stabctx.zmod import Modulus, ZdPoly\n"
        "from stabctx.states import PhaseFunctionState\n"
        "from stabctx.hidden_vars import decide_strong_contextuality\n"
        "m = Modulus(11)\n"
        "st = PhaseFunctionState(m, 2, ZdPoly(m, 2, {(2,1): 1, (1,2): 7}))\n"
        "t0 = time.perf_counter()\n"
        "cert = decide_strong_contextuality(st)\n"
        "assert cert.strongly_contextual\n"
        "print(time.perf_counter() - t0)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    print(f"numpy {np.__version__}; compiled kernel "
          f"{'available' if _kernel else 'NOT built'}")
    print()
    print(f"{'workload':<22} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for d, count in ((5, 200), (7, 100), (11, 50)):
        work = instances(d, count)
        t_py = time_backend(_kernel_py, d, work, repeats=3)
        row = f"kernel d={d:<2} ({count} calls)"
        if _kernel:
            t_c = time_backend(_kernel, d, work, repeats=3)
            print(f"{row:<22} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
                  f"{t_py / t_c:>8.1f}x")
        else:
            print(f"{row:<22} {t_py * 1e6:>10.1f}us {'-':>12} {'-':>9}")
    print()
    t_pure = decide_elapsed(pure=True)
    line = f"certify one d=11 state: python {t_pure:.2f}s"
    if _kernel:
        t_fast = decide_elapsed(pure=False)
        line += f", compiled {t_fast:.2f}s ({t_pure / t_fast:.1f}x)"
    print(line)


if __name__ == "__main__":
    main()
