"""Time the TTD delay search: compiled extension vs the numpy reference.

    python benchmarks/bench_search.py [--repeat 5]

Runs both backends on the same random problems (desk and paper sizes) and
checks that they return the same grid indices.
"""

import argparse
import time

import numpy as np

from ttdbf import _search

try:
    from ttdbf import _search_ext
except ImportError:
    _search_ext = None

CASES = {
    # name: (subcarriers, TTDs per chain, grid points)
    "desk": (5, 8, 1000),
    "paper": (10, 32, 1000),
}


def _problem(M, Q, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((M, Q)) + 1j * rng.standard_normal((M, Q))
    freqs = 100e9 + (np.arange(M) - (M - 1) / 2) * (10e9 / M)
    return psi, freqs


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(repeat=5):
    step = 80e-12 / 999
    rows = []
    for name, (M, Q, U) in CASES.items():
        psi, freqs = _problem(M, Q, 0)
        for wiring, label in ((1, "serial"), (3, "hybrid")):
            for kernel in ("coordinate_descent", "chain_optimum"):
                times, results = {}, {}
                for backend, mod in (("python", _search), ("cython", _search_ext)):
                    if mod is None:
                        continue
                    fn = getattr(mod, kernel)

                    def call():
                        idx = np.zeros(Q, np.int64)
                        if kernel == "coordinate_descent":
                            fn(psi, freqs, idx, step, U, wiring, 1e-10, 200)
                        else:
                            fn(psi, freqs, idx, step, U, wiring)
                        return idx
                    times[backend], results[backend] = _time(call, repeat)
                same = len(results) < 2 or np.array_equal(results["python"], results["cython"])
                rows.append((name, label, kernel, times.get("python"), times.get("cython"), same))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _search_ext is None:
        print("compiled extension not built; timing the numpy reference only")
    print(f"{'case':<6} {'wiring':<7} {'kernel':<19} {'numpy ms':>9} {'cython ms':>10} "
          f"{'speedup':>8}  same")
    for name, label, kernel, tp, tc, same in run(args.repeat):
        sc = f"{tc * 1e3:10.2f}" if tc else f"{'-':>10}"
        sp = f"{tp / tc:8.1f}" if tc else f"{'-':>8}"
        print(f"{name:<6} {label:<7} {kernel:<19} {tp * 1e3:9.2f} {sc} {sp}  {same}")


if __name__ == "__main__":
    main()
