"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from eetsim._core import available_backends


def workloads(rng):
    n = 19
    h = np.diag(np.full(n - 1, 0.5), 1)
    h = h + h.T + 20.0 * np.eye(n)
    a = rng.normal(size=(40, 40))
    c0 = np.zeros(n, complex)
    c0[n // 2] = 1.0
    omega = np.full(n, 20.0)
    b = np.diag(omega) + (h - 20.0 * np.eye(n))
    t = np.linspace(0.0, 2.0, 11)
    return {
        "jacobi_eigh 40x40": lambda m: m.jacobi_eigh(a + a.T),
        "bessel_miller x=50 n=100": lambda m: m.bessel_miller(50.0, 100, 400),
        "rk4_propagate 19 sites, 2000 steps": lambda m: m.rk4_propagate(h, c0, t, 0.0, 1e-3),
        "verlet_propagate 19 sites, 2000 steps":
            lambda m: m.verlet_propagate(omega, b, c0.real, c0.imag, t, 0.0, 1e-3),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = available_backends()
    rng = np.random.default_rng(0)
    names = sorted(backends)
    print(f"{'kernel':<40s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in workloads(rng).items():
        best = {}
        for name in names:
            mod = backends[name]
            number = 1 if name == "python" else 20
            best[name] = min(timeit.repeat(lambda: fn(mod), number=number,
                                           repeat=args.repeat)) / number
        row = f"{label:<40s}" + "".join(f"{best[n] * 1e3:10.3f}ms" for n in names)
        if "cython" in best:
            row += f"  {best['python'] / best['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
