"""Picket-fence scan: exact, pCCD and fixed energies plus cost functions.

    python3 scripts/picket_sweep.py --gmin -0.6 --gmax 0 --steps 25 --csv attractive.csv
    python3 scripts/picket_sweep.py --gmin 0 --gmax 0.6 --csv repulsive.csv
"""
import argparse
import time

from rdmfix.cli import SweepSpec, run_sweep, write_sweep_csv
from rdmfix.fixer import FixConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=12)
    ap.add_argument("--pairs", type=int, default=6)
    ap.add_argument("--gmin", type=float, default=-0.6)
    ap.add_argument("--gmax", type=float, default=0.0)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--mode", choices=("doci", "regular"), default="doci")
    ap.add_argument("--csv")
    args = ap.parse_args()

    spec = SweepSpec(args.levels, args.pairs, 1.0, args.gmin, args.gmax, args.steps, args.mode)
    t0 = time.perf_counter()
    rows = run_sweep(spec, FixConfig())
    print(f"{'g':>7} {'E_exact':>12} {'E_pccd':>12} {'E_fixed':>12} {'resp-fix':>10} {'resp-ex':>10} {'fix-ex':>10} sweeps")
    for r in rows:
        print(
            f"{r.g:7.3f} {r.E_exact:12.6f} {r.E_pccd:12.6f} {r.E_fixed:12.6f} "
            f"{r.cost_resp_vs_fixed:10.2e} {r.cost_resp_vs_exact:10.2e} {r.cost_fixed_vs_exact:10.2e} {r.sweeps_used:6d}"
            + ("" if r.pccd_converged else "  pCCD not converged")
        )
    print(f"{len(rows)} points in {time.perf_counter() - t0:.1f}s")
    if args.csv:
        write_sweep_csv(args.csv, rows)


if __name__ == "__main__":
    main()
