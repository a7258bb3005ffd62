"""Time the trace-constrained PSD projection for both strategies."""
import argparse
import time

import numpy as np

from rdmfix.specproj import STRATEGIES, project_psd_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 32, 128, 276])
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for n in args.sizes:
        mats = []
        for _ in range(args.repeats):
            a = rng.normal(size=(n, n))
            m = 0.5 * (a + a.T)
            mats.append((m, float(rng.uniform(0.1, 2) * np.linalg.norm(m))))
        line = [f"n={n:4d}"]
        outs = {}
        for strategy in STRATEGIES:
            t0 = time.perf_counter()
            outs[strategy] = [project_psd_trace(m, t, strategy) for m, t in mats]
            line.append(f"{strategy} {1e3 * (time.perf_counter() - t0) / args.repeats:8.3f} ms")
        gap = max(np.linalg.norm(x - y) for x, y in zip(*outs.values()))
        line.append(f"max gap {gap:.1e}")
        print("  ".join(line))


if __name__ == "__main__":
    main()
