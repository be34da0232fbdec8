"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each kernel is run on identical inputs with both backends; the table lists
the best wall time of N repeats, the speed-up and the largest difference in
the results.
"""

import argparse
import timeit

import numpy as np

from lenscope import _pykernels

try:
    from lenscope import _ckernels
except ImportError:
    _ckernels = None


def cases():
    atol = (1e-13, 1e-13, 1e-13, 1e-13)
    zs = np.linspace(-10.0, 10.0, 200)[1:]
    x = np.linspace(0.0, 40.0, 2000)
    f = np.cos(np.linspace(0.0, 20.0, 4097))
    return {
        "dopri_model (Glaser, 199 planes)": lambda k: k.dopri_model(
            _pykernels.GLASER, (1.5, 2.0), -10.0, zs, 1e-10, atol)[0],
        "series_0f1 (2000 points)": lambda k: np.stack(k.series_0f1(5.0 / 6.0, x, 1e-14, 200)[:2]),
        "cumulative_integral (4097 samples)": lambda k: k.cumulative_integral(f, 20.0 / 4096),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled backend not built; only the Python backend is available")
    print(f"{'kernel':40s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s} {'max diff':>10s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:40s} {t_py:12.3f} {'-':>12s} {'-':>9s} {'-':>10s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        diff = float(np.max(np.abs(np.asarray(fn(_pykernels)) - np.asarray(fn(_ckernels)))))
        print(f"{name:40s} {t_py:12.3f} {t_c:12.3f} {t_py / t_c:9.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
