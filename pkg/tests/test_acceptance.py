"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import time

import numpy as np
import pytest

import fock
from rdmfix.cli import SweepSpec, run_sweep, solve_along, sweep_point
from rdmfix.fixer import FixConfig, cost_doci, cost_regular, fix_doci, fix_regular
from rdmfix.pairing import (
    PairingModel,
    exact_doci_rdms,
    exact_ground,
    pairing_energy_from_rdm,
    pccd_solve,
    response_doci_rdms,
)
from rdmfix.rdm import Spin2RDM, embed, g_from_p, q_from_p, seniority_off_block_sum
from rdmfix.cli import seniority_noise
from rdmfix.specproj import project_psd_trace, shift_function, shift_root


def grid_oracle(m, trace, levels=60, points=41):
    """Projection built from a sigma found by repeated grid refinement.

    f(sigma) = sum(max(lam - sigma, 0)) is piecewise linear, so once the
    bracket sits inside one linear piece the root follows by interpolation.
    """
    lam, u = np.linalg.eigh(0.5 * (m + m.T))
    f = lambda s: np.maximum(lam[:, None] - np.atleast_1d(s)[None, :], 0).sum(axis=0)
    lo, hi = lam.min() - trace / lam.size - 1.0, lam.max()
    for _ in range(levels):
        s = np.linspace(lo, hi, points)
        vals = f(s)
        k = np.nonzero(vals >= trace)[0][-1]
        lo, hi = s[k], s[min(k + 1, points - 1)]
        if hi - lo < 1e-15 * max(1.0, abs(lo)):
            break
    flo, fhi = f(lo)[0], f(hi)[0]
    sigma = lo if flo == fhi else lo + (flo - trace) * (hi - lo) / (flo - fhi)
    return (u * np.maximum(lam - sigma, 0)) @ u.T


def test_criterion_1_projection_oracle(verdict):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst_d = worst_eig = worst_tr = 0.0
    for _ in range(200):
        a = rng.normal(size=(8, 8))
        m = 0.5 * (a + a.T)
        trace = float(rng.uniform(0, 2 * np.linalg.norm(m)))
        if trace == 0.0:
            continue
        out = project_psd_trace(m, trace)
        ref = grid_oracle(m, trace)
        worst_d = max(worst_d, abs(np.linalg.norm(out - m) - np.linalg.norm(ref - m)), np.linalg.norm(out - ref))
        worst_eig = min(worst_eig, np.linalg.eigvalsh(out)[0])
        worst_tr = max(worst_tr, abs(np.trace(out) - trace))
    dt = time.perf_counter() - t0
    ok = worst_d <= 1e-8 and worst_eig >= -1e-10 and worst_tr <= 1e-10 and dt < 5
    assert verdict("1 projection oracle", ok, f"dist {worst_d:.1e}, min eig {worst_eig:.1e}, trace {worst_tr:.1e}, {dt:.2f}s")


def test_criterion_2_shift_root(verdict):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    worst, monotone = 0.0, True
    for _ in range(100):
        lam = rng.normal(scale=rng.uniform(0.1, 10), size=rng.integers(1, 20))
        trace = float(rng.uniform(0, 2 * np.abs(lam).sum() + 1e-3))
        res = shift_root(lam, trace)
        worst = max(worst, abs(shift_function(lam, res.sigma0) - trace))
        grid = np.sort(rng.uniform(lam.min() - 5, lam.max() + 5, 200))
        monotone &= bool(np.all(np.diff(shift_function(lam, grid)) <= 0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and monotone and dt < 1
    assert verdict("2 shift root", ok, f"|f(s0)-T| {worst:.1e}, monotone {monotone}, {dt:.2f}s")


def test_criterion_3_exact_rdms_untouched(verdict):
    t0 = time.perf_counter()
    worst, sweeps = 0.0, set()
    for g in (-0.3, -0.1, 0.1, 0.3):
        r = exact_doci_rdms(PairingModel.picket_fence(12, 6, g))
        out, rep = fix_doci(r)
        worst = max(worst, cost_doci(r, out))
        sweeps.add((rep.sweeps_used, rep.converged))
        s = embed(r)
        out_s, rep_s = fix_regular(s)
        worst = max(worst, cost_regular(s, out_s))
        sweeps.add((rep_s.sweeps_used, rep_s.converged))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and sweeps == {(1, True)} and dt < 10
    assert verdict("3 exact RDMs pass unchanged", ok, f"max cost {worst:.1e}, sweeps {sorted(sweeps)}, {dt:.2f}s")


def test_criterion_4_one_pair_exact(verdict):
    t0 = time.perf_counter()
    de = drdm = 0.0
    for L in (4, 8):
        for g in (-0.5, 0.5):
            m = PairingModel.picket_fence(L, 1, g)
            ex = exact_doci_rdms(m)
            state = pccd_solve(m)
            res = response_doci_rdms(m, state=state)
            de = max(de, abs(state.energy - exact_ground(m)[0]))
            drdm = max(drdm, np.abs(res.rdm.Pi - ex.Pi).max(), np.abs(res.rdm.D - ex.D).max())
    dt = time.perf_counter() - t0
    ok = de <= 1e-10 and drdm <= 1e-6 and dt < 10
    assert verdict("4 pCCD exact for one pair", ok, f"|dE| {de:.1e}, |dRDM| {drdm:.1e}, {dt:.2f}s")


@pytest.fixture(scope="module")
def picket_sweep():
    t0 = time.perf_counter()
    rows = run_sweep(SweepSpec(levels=12, pairs=6, spacing=1.0, gmin=-0.6, gmax=0.0, steps=25))
    return rows, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_5_breakdown(picket_sweep, verdict):
    rows, dt = picket_sweep
    weak = [abs(r.E_pccd - r.E_exact) for r in rows if r.g >= -0.2 - 1e-12]
    a = max(weak) <= 1e-2
    b = any((r.E_pccd < r.E_exact or not r.pccd_converged) for r in rows if r.g <= -0.35 + 1e-12)
    conv = [r for r in rows if r.pccd_converged and r.fixer_converged]
    c = bool(conv) and all(r.E_fixed >= r.E_exact - 1e-8 for r in conv)
    failed = [round(r.g, 3) for r in rows if not r.pccd_converged]
    ok = a and b and c and dt < 300
    detail = f"(a) max|dE| {max(weak):.1e}, (b) {b}, (c) {c} on {len(conv)} points, pCCD unconverged at {failed}, {dt:.1f}s"
    assert verdict("5 pCCD breakdown", ok, detail)


def test_criterion_6_cost_growth(verdict):
    t0 = time.perf_counter()
    models = [PairingModel.picket_fence(12, 6, g) for g in (-0.05, -0.15, -0.25, -0.35)]
    states = solve_along(models)
    cfg = FixConfig()
    rows = [sweep_point(m, s, "doci", cfg) for m, s in zip(models, states)]
    resp_fixed = [r.cost_resp_vs_fixed for r in rows]
    mono = all(b >= a - 1e-6 for a, b in zip(resp_fixed, resp_fixed[1:]))
    ratios = [r.cost_resp_vs_exact / r.cost_fixed_vs_exact for r in rows]
    overlap = all(0.5 <= q <= 2.0 for q in ratios)
    dt = time.perf_counter() - t0
    ok = mono and overlap and all(r.fixer_converged for r in rows) and dt < 120
    detail = "resp/fixed " + ", ".join(f"{c:.2e}" for c in resp_fixed)
    detail += "; ratios " + ", ".join(f"{q:.2f}" for q in ratios) + f", {dt:.1f}s"
    assert verdict("6 cost growth", ok, detail)


def test_criterion_7_seniority_preserved(verdict):
    t0 = time.perf_counter()
    exact = exact_doci_rdms(PairingModel.picket_fence(6, 3, -0.3))
    worst, conv = 0.0, True
    for seed in range(3):
        noisy = embed(seniority_noise(exact, 1e-3, np.random.default_rng(100 + seed)))
        out, rep = fix_regular(noisy)
        conv &= rep.converged
        worst = max(worst, seniority_off_block_sum(out))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 60
    assert verdict("7 DOCI structure kept by regular fixer", ok, f"off-block sum {worst:.1e}, converged {conv}, {dt:.1f}s")


def test_criterion_8_trace_identities(verdict):
    rng = np.random.default_rng(108)
    t0 = time.perf_counter()
    worst = build = 0.0
    for i in range(50):
        L = 3 if i % 2 else 2
        M = 2 * L
        N = int(rng.integers(2, M))
        dm = fock.random_ensemble(M, N, rng)
        g2 = Spin2RDM.from_tensor(L, N, fock.two_rdm(dm, M))
        t1 = time.perf_counter()
        tq = q_from_p(g2).trace()
        tg = g_from_p(g2).trace()
        build += time.perf_counter() - t1
        # operator-level traces from the Fock oracle
        tq_op = np.einsum("abab->", fock.q_tensor(dm, M))
        tg_op = np.einsum("abab->", fock.g_tensor(dm, M))
        want_q = (2 * L - N) * (2 * L - N - 1)
        want_g = N * (2 * L - N + 1)
        worst = max(worst, abs(tq - want_q), abs(tg - want_g), abs(tq_op - want_q), abs(tg_op - want_g))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and build < 5
    assert verdict("8 trace identities", ok, f"max error {worst:.1e}, maps {build:.2f}s, with oracle {dt:.2f}s")


def test_criterion_9_energy_increase(verdict):
    changes = []
    for g in (-0.4, -0.5):
        m = PairingModel.picket_fence(12, 6, g)
        res = response_doci_rdms(m)
        fixed, rep = fix_doci(res.rdm)
        e_resp = pairing_energy_from_rdm(m, res.rdm)
        e_fixed = pairing_energy_from_rdm(m, fixed)
        changes.append((g, e_fixed - e_resp, rep.converged))
    ok = any(d >= -1e-8 for _, d, _ in changes)
    detail = "; ".join(f"g={g}: dE={d:+.3e} ({'up' if d >= 0 else 'down'})" for g, d, _ in changes)
    assert verdict("9 energy increase on fixing", ok, detail)
