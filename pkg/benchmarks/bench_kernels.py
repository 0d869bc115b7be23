"""Time the jitted kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--units 25] [--step 0.01] [--repeat 50]

The first jitted call (compilation) is excluded.
"""
import argparse
import timeit

import numpy as np

from sfcgame import _kernels as K
from sfcgame.game import price_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--units", type=int, default=25)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--points", type=int, default=1000)
    a = ap.parse_args()

    rng = np.random.default_rng(0)
    k = rng.uniform(90, 150, a.units)
    g = np.full(a.units, 10.0)
    m = np.zeros(a.units)
    prices = price_grid(8.45, 60.0, a.step)
    price = 30.0
    e_star = np.clip(k / price - 1, m, g)

    cases = {
        "sweep": (K.sweep_jit, K.sweep_np, (prices, k, g, m, 500.0, 60.0, 30000.0)),
        "follower_gain": (K.follower_gain_jit, K.follower_gain_np, (k, g, m, e_star, price, a.points)),
    }
    print(f"backend flag: {K.backend()}  units={a.units} grid={prices.size} points={a.points}")
    print(f"{'kernel':<15}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (jit, npy, args) in cases.items():
        if K.HAVE_NUMBA:
            jit(*args)
        t_jit = min(timeit.repeat(lambda: jit(*args), number=1, repeat=a.repeat)) * 1e3
        t_np = min(timeit.repeat(lambda: npy(*args), number=1, repeat=a.repeat)) * 1e3
        print(f"{name:<15}{t_jit:>12.3f}{t_np:>12.3f}{t_np / t_jit:>10.1f}x")


if __name__ == "__main__":
    main()
