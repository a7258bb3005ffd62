"""Command-line entry points: ``rdmfix {fix,validate,sweep,gen}``.

Exit codes: 0 success, 1 input error, 2 not converged / violations found.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .fixer import FixConfig, cost_doci, cost_regular, fix_doci, fix_regular, violation_measure
from .io import RdmFormatError, read_rdm, write_rdm
from .pairing import (
    PairingModel,
    PccdState,
    exact_doci_rdms,
    exact_ground,
    pairing_energy_from_rdm,
    pccd_solve,
    response_doci_rdms,
)
from .rdm.doci import Doci2RDM, embed
from .rdm.spin import Spin2RDM, energy, reduced_hamiltonian
from .rdm.validate import validate
from .specproj import STRATEGIES

log = logging.getLogger("rdmfix")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2
SWEEP_VERSION = "# rdmfix sweep v1"


# ---------------------------------------------------------------- sweep


@dataclass
class SweepRow:
    g: float
    E_exact: float
    E_pccd: float
    pccd_converged: bool
    E_fixed: float
    fixer_converged: bool
    cost_resp_vs_fixed: float
    cost_resp_vs_exact: float
    cost_fixed_vs_exact: float
    violation_initial: float
    sweeps_used: int
    pccd_residual: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_list(self) -> list[str]:
        out = []
        for v in astuple(self):
            if isinstance(v, bool):
                out.append(str(int(v)))
            elif isinstance(v, float):
                out.append("%.12g" % v)
            else:
                out.append(str(v))
        return out


@dataclass(frozen=True)
class SweepSpec:
    levels: int = 12
    pairs: int = 6
    spacing: float = 1.0
    gmin: float = -0.6
    gmax: float = 0.0
    steps: int = 25
    mode: str = "doci"

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.gmin])
        return np.linspace(self.gmin, self.gmax, self.steps)


def continuation_order(gs: np.ndarray) -> list[int]:
    """Visit g points outward from the one closest to zero.

    pCCD is exact at g = 0, so amplitudes are carried from weak to strong
    coupling on both sides.
    """
    return sorted(range(len(gs)), key=lambda i: (abs(gs[i]), gs[i]))


def solve_along(models: list[PairingModel]) -> list[PccdState]:
    """pCCD at every model, warm-started from the nearest already converged point
    on the same side of g = 0; a cold start from c = 0 is tried when that fails."""
    gs = np.array([m.g for m in models])
    states: list[PccdState | None] = [None] * len(models)
    last = {-1: None, 1: None}
    for i in continuation_order(gs):
        side = -1 if gs[i] < 0 else 1
        guess = last[side]
        state = pccd_solve(models[i], guess=guess)
        if not state.converged and guess is not None:
            cold = pccd_solve(models[i])
            if cold.converged or cold.residual_norm < state.residual_norm:
                state = cold
        if state.converged:
            last[side] = state.amplitudes
            if gs[i] == 0:
                last[-side] = state.amplitudes
        states[i] = state
    return states


def _spin_energy(m: PairingModel, g2: Spin2RDM) -> float:
    h, v = m.spin_orbital_hamiltonian()
    return energy(g2, reduced_hamiltonian(h, v, m.N))


def sweep_point(m: PairingModel, state: PccdState, mode: str, cfg: FixConfig) -> SweepRow:
    e_exact, _ = exact_ground(m)
    exact = exact_doci_rdms(m)
    nan = float("nan")
    row = SweepRow(m.g, e_exact, state.energy, state.converged, nan, False, nan, nan, nan, nan, 0, state.residual_norm)
    if not state.converged:
        return row
    resp = response_doci_rdms(m, state=state)
    if mode == "doci":
        fixed, rep = fix_doci(resp.rdm, cfg)
        row.E_fixed = pairing_energy_from_rdm(m, fixed)
        row.cost_resp_vs_fixed = cost_doci(resp.rdm, fixed)
        row.cost_resp_vs_exact = cost_doci(resp.rdm, exact)
        row.cost_fixed_vs_exact = cost_doci(fixed, exact)
        row.violation_initial = violation_measure(resp.rdm)
    else:
        resp_s, exact_s = embed(resp.rdm), embed(exact)
        fixed, rep = fix_regular(resp_s, cfg)
        row.E_fixed = _spin_energy(m, fixed)
        row.cost_resp_vs_fixed = cost_regular(resp_s, fixed)
        row.cost_resp_vs_exact = cost_regular(resp_s, exact_s)
        row.cost_fixed_vs_exact = cost_regular(fixed, exact_s)
        row.violation_initial = violation_measure(resp_s)
    row.fixer_converged = rep.converged and resp.converged
    row.sweeps_used = rep.sweeps_used
    return row


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RDMFIX_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(spec: SweepSpec, cfg: FixConfig | None = None) -> list[SweepRow]:
    """One row per g, in grid order; deterministic for given arguments."""
    cfg = cfg or FixConfig()
    if spec.mode not in ("doci", "regular"):
        raise ValueError(f"unknown mode {spec.mode!r}")
    models = [PairingModel.picket_fence(spec.levels, spec.pairs, g, spec.spacing) for g in spec.grid()]
    states = solve_along(models)
    jobs = list(zip(models, states))
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda job: sweep_point(job[0], job[1], spec.mode, cfg), jobs))


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SWEEP_VERSION + "\n")
        w = csv.writer(fh)
        w.writerow(SweepRow.header())
        for r in rows:
            w.writerow(r.as_list())


# ---------------------------------------------------------------- gen


def seniority_noise(r: Doci2RDM, scale: float, rng: np.random.Generator) -> Doci2RDM:
    """Add symmetric Gaussian noise of standard deviation ``scale`` to Pi and D."""
    def sym(shape):
        x = rng.normal(scale=scale, size=shape)
        return np.triu(x) + np.triu(x, 1).T

    d = sym((r.L, r.L))
    np.fill_diagonal(d, 0.0)
    return r.replace(Pi=r.Pi + sym((r.L, r.L)), D=r.D + d)


def generate(kind: str, m: PairingModel, noise: float = 1e-3, seed: int = 0) -> Doci2RDM:
    if kind == "exact":
        return exact_doci_rdms(m)
    if kind == "response":
        res = response_doci_rdms(m)
        if not res.converged:
            raise NumericalError(f"pCCD did not converge at g={m.g}")
        return res.rdm
    if kind == "noisy":
        return seniority_noise(exact_doci_rdms(m), noise, np.random.default_rng(seed))
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------- commands


def _config(args) -> FixConfig:
    return FixConfig(
        tol_trace=args.tol_trace,
        tol_eig=args.tol,
        max_sweeps=args.max_sweeps,
        order=tuple(args.order.upper()),
        strategy=args.strategy,
    )


def cmd_fix(args) -> int:
    x = read_rdm(args.input)
    cfg = _config(args)
    if args.mode == "doci":
        if not isinstance(x, Doci2RDM):
            raise DomainError("--mode doci needs a DOCI file")
        fixed, rep = fix_doci(x, cfg)
    else:
        if not isinstance(x, Spin2RDM):
            raise DomainError("--mode regular needs a SPIN file")
        fixed, rep = fix_regular(x, cfg)
    write_rdm(args.output, fixed)
    before, after = validate(x), validate(fixed)
    doc = {
        "mode": args.mode,
        "input": str(args.input),
        "output": str(args.output),
        **rep.as_dict(),
        "cost": rep.final_cost,
        "violation_measure_before": violation_measure(x),
        "violation_measure_after": violation_measure(fixed),
        "violations_before": before.violations,
        "violations_after": after.violations,
    }
    text = json.dumps(doc, indent=2, sort_keys=False)
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_validate(args) -> int:
    rep = validate(read_rdm(args.input))
    print(rep.format(args.tol))
    return EXIT_OK if rep.ok(args.tol) else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.levels, args.pairs, args.spacing, args.gmin, args.gmax, args.steps, args.mode)
    if spec.steps < 1:
        raise DomainError("--steps must be at least 1")
    PairingModel.picket_fence(spec.levels, spec.pairs, 0.0)
    rows = run_sweep(spec, _config(args))
    write_sweep_csv(args.csv, rows)
    log.info("wrote %d rows to %s", len(rows), args.csv)
    return EXIT_OK


def cmd_gen(args) -> int:
    m = PairingModel.picket_fence(args.levels, args.pairs, args.g, args.spacing)
    r = generate(args.kind, m, args.noise, args.seed)
    write_rdm(args.output, embed(r) if args.repr == "spin" else r)
    return EXIT_OK


def _add_fix_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-8, help="eigenvalue / inter-sweep tolerance")
    p.add_argument("--tol-trace", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--order", default="PQG", help="permutation of P, Q, G")
    p.add_argument("--strategy", choices=STRATEGIES, default="bisection")


def _add_model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", "-L", type=int, default=12)
    p.add_argument("--pairs", "-n", type=int, default=6)
    p.add_argument("--spacing", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rdmfix", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fix", help="restore N-representability of an RDM file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=("regular", "doci"), default="doci")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    _add_fix_options(p)
    p.set_defaults(func=cmd_fix)

    p = sub.add_parser("validate", help="check an RDM file against all conditions")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="picket-fence scan over g, written as CSV")
    _add_model_options(p)
    p.add_argument("--gmin", type=float, default=-0.6)
    p.add_argument("--gmax", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--mode", choices=("regular", "doci"), default="doci")
    p.add_argument("--csv", required=True)
    _add_fix_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write exact, pCCD-response or noisy pairing RDMs")
    p.add_argument("--kind", choices=("exact", "response", "noisy"), default="exact")
    _add_model_options(p)
    p.add_argument("--g", type=float, default=-0.2)
    p.add_argument("--noise", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repr", choices=("doci", "spin"), default="doci")
    p.add_argument("output")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RdmFormatError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, DimensionError, DomainError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
