"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, size) with the best-of-repeat time for each
implementation and the speedup. Both versions are checked to agree first.
"""

import argparse
import timeit

import numpy as np

from ballspec import _kernels_py

try:
    from ballspec import _kernels as _compiled
except ImportError:
    _compiled = None


def _cases():
    rng = np.random.default_rng(0)
    for n, npts in ((32, 64), (256, 512), (1024, 2048)):
        z = np.cos(np.linspace(0.0, np.pi, npts))
        yield f"jacobi_table n={n} pts={npts}", "jacobi_table", (n, 0.5, 2.5, z)
    for n in (256, 4096, 65536):
        offsets = np.array([-1, 0, 1, 2])
        data = rng.standard_normal((offsets.size, n))
        yield f"banded_matvec n={n} bands=4", "banded_matvec", (offsets, data, rng.standard_normal(n), n)


def _best(func, args, repeat):
    number = max(1, int(0.05 / max(min(timeit.repeat(lambda: func(*args), number=1, repeat=3)), 1e-7)))
    return min(timeit.repeat(lambda: func(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _compiled is None:
        print("compiled kernels are not built; only the fallback is available")
    print(f"{'case':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, name, kargs in _cases():
        py = getattr(_kernels_py, name)
        t_py = _best(py, kargs, args.repeat) * 1e3
        if _compiled is None:
            print(f"{label:34s} {t_py:12.4f} {'-':>12s} {'-':>8s}")
            continue
        cy = getattr(_compiled, name)
        np.testing.assert_allclose(cy(*kargs), py(*kargs), rtol=1e-13, atol=1e-300)
        t_cy = _best(cy, kargs, args.repeat) * 1e3
        print(f"{label:34s} {t_py:12.4f} {t_cy:12.4f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
