"""Wall-clock comparison of the numpy and the compiled kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

from henle import _backend, presets
from henle.characteristics import picard_solve
from henle.grid import Grid1D, run
from henle.model import Params


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    p = Params(eps=0.05)
    d = presets.smooth(p)
    for N in (200, 800):
        g = Grid1D.from_params(p, N)
        for model in ("full", "reduced"):
            yield f"grid {model:7s} N={N}", lambda b, g=g, m=model: run(p, d, g, model=m, backend=b)
    g = Grid1D.from_params(p, 100)
    yield "picard        N=100", lambda b: picard_solve(d, p, g, backend=b)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    print(f"{'case':22s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases():
        ts = [best_of(lambda b=b: fn(b), args.repeat) for b in backends]
        line = f"{name:22s}" + "".join(f"{t * 1e3:10.2f}ms" for t in ts)
        if len(ts) > 1:
            line += f"{ts[0] / ts[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
