"""Iterative restoration of N-representability by alternating projections.

Both loops repeatedly map the current 2-RDM to a condition matrix, replace
that matrix by its nearest PSD matrix with the prescribed trace, and map
back.  A sweep visits the three groups of conditions (P, Q, G) in
``FixConfig.order``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError
from .rdm.doci import Doci2RDM, g2x2_blocks, g_pi, invert_g2x2, invert_g_pi, invert_q_d, invert_q_pi, q_d, q_pi
from .rdm.spin import (
    Spin2RDM,
    condition_matrices,
    contract_one_rdm,
    g_from_p,
    p_from_g,
    p_from_q,
    q_from_p,
    trace_target,
)
from .specproj import STRATEGIES, project_psd_trace, project_simplex

log = logging.getLogger(__name__)

GROUPS = ("P", "Q", "G")


@dataclass(frozen=True)
class FixConfig:
    tol_trace: float = 1e-10
    tol_eig: float = 1e-8
    max_sweeps: int = 500
    order: tuple[str, ...] = GROUPS
    strategy: str = "bisection"
    enforce_rho_consistency: bool = False
    g2x2_sequential: bool = False

    def __post_init__(self):
        if not (self.tol_trace > 0 and self.tol_eig > 0):
            raise ValueError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        order = tuple(str(x).upper() for x in self.order)
        if sorted(order) != sorted(GROUPS):
            raise ValueError(f"order must be a permutation of {GROUPS}, got {self.order}")
        object.__setattr__(self, "order", order)
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")


@dataclass
class SweepRecord:
    sweep: int
    trace_errors: dict[str, float]
    min_eigenvalues: dict[str, float]
    change: float


@dataclass
class FixReport:
    sweeps_used: int
    records: list[SweepRecord] = field(default_factory=list)
    converged: bool = False
    final_cost: float = float("nan")

    @property
    def final(self) -> SweepRecord | None:
        return self.records[-1] if self.records else None

    def as_dict(self) -> dict:
        last = self.final
        return {
            "converged": self.converged,
            "sweeps_used": self.sweeps_used,
            "final_cost": self.final_cost,
            "trace_errors": dict(last.trace_errors) if last else {},
            "min_eigenvalues": dict(last.min_eigenvalues) if last else {},
            "last_change": last.change if last else None,
        }


# ---------------------------------------------------------------- costs


def cost_regular(a: Spin2RDM, b: Spin2RDM) -> float:
    """Mean squared difference over all ``(2L)^4`` four-index elements."""
    if a.matrix.shape != b.matrix.shape or a.L != b.L:
        raise DimensionError(f"cannot compare L={a.L} with L={b.L}")
    diff = a.matrix - b.matrix
    # every pair-basis entry stands for four signed tensor elements
    return float(4.0 * np.sum(diff * diff) / (2 * a.L) ** 4)


def cost_doci(a: Doci2RDM, b: Doci2RDM) -> float:
    if a.L != b.L:
        raise DimensionError(f"cannot compare L={a.L} with L={b.L}")
    return float((np.sum((a.Pi - b.Pi) ** 2) + np.sum((a.D - b.D) ** 2)) / (2 * a.L**2))


def negative_sum(values) -> float:
    """``sum |min(x, 0)|``."""
    v = np.asarray(values, dtype=float)
    return float(-np.minimum(v, 0.0).sum())


def _eigs(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))


def violation_measure(x: Spin2RDM | Doci2RDM) -> float:
    """Sum of the magnitudes of all negative eigenvalues of the condition matrices.

    For the DOCI form the entrywise conditions on D and Q^D count each level
    pair once.
    """
    if isinstance(x, Spin2RDM):
        return sum(negative_sum(_eigs(c.matrix)) for c in condition_matrices(x).values())
    if isinstance(x, Doci2RDM):
        r = x.symmetrized()
        a, b = np.triu_indices(r.L, k=1)
        total = sum(negative_sum(_eigs(m)) for m in (r.Pi, q_pi(r), g_pi(r)))
        if a.size:
            total += negative_sum(_eigs(g2x2_blocks(r)))
            total += negative_sum(r.D[a, b]) + negative_sum(q_d(r)[a, b])
        return total
    raise TypeError(f"unsupported type {type(x).__name__}")


# ---------------------------------------------------------------- regular


def _spin_status(g2: Spin2RDM) -> tuple[dict[str, float], dict[str, float]]:
    conds = condition_matrices(g2)
    errors = {k: abs(c.trace() - c.trace_target) for k, c in conds.items()}
    mins = {k: c.min_eigenvalue() for k, c in conds.items()}
    return errors, mins


def _feasible(errors: dict, mins: dict, cfg: FixConfig) -> bool:
    return max(errors.values(), default=0.0) <= cfg.tol_trace and min(mins.values(), default=0.0) >= -cfg.tol_eig


def _infeasibility(errors: dict, mins: dict) -> float:
    return max(max(errors.values(), default=0.0), -min(min(mins.values(), default=0.0), 0.0))


def _spin_step(group: str, g2: Spin2RDM, rho: np.ndarray, cfg: FixConfig) -> tuple[Spin2RDM, np.ndarray]:
    if group == "P":
        target = trace_target("P", g2.L, g2.N) / 2.0
        out = g2.with_matrix(project_psd_trace(g2.matrix, target, cfg.strategy))
        return out, contract_one_rdm(out) if g2.N >= 2 else rho
    if group == "Q":
        q = q_from_p(g2, rho)
        q = q.with_matrix(project_psd_trace(q.matrix, q.matrix_trace_target, cfg.strategy))
        return p_from_q(q, rho_fallback=rho)
    g = g_from_p(g2, rho)
    g = g.with_matrix(project_psd_trace(g.matrix, g.matrix_trace_target, cfg.strategy))
    return p_from_g(g)


def fix_regular(g2_in: Spin2RDM, cfg: FixConfig | None = None) -> tuple[Spin2RDM, FixReport]:
    """Restore symmetry, trace and P/Q/G positivity of a spin-orbital 2-RDM.

    Returns the last iterate when it converges, otherwise the iterate with
    the smallest infeasibility and ``converged=False``.
    """
    cfg = cfg or FixConfig()
    if g2_in.N % 2:
        raise DomainError(f"fix_regular expects an even electron count, got N={g2_in.N}")
    if g2_in.N < 2:
        raise DomainError("fix_regular needs at least two electrons")
    target = trace_target("P", g2_in.L, g2_in.N)
    if abs(g2_in.trace() - target) > 0.1 * target:
        raise DomainError(f"input trace {g2_in.trace():.6g} is more than 10% away from {target:.6g}")

    current = g2_in.with_matrix(0.5 * (g2_in.matrix + g2_in.matrix.T))
    report = FixReport(0)
    best, best_score = current, np.inf
    for sweep in range(1, cfg.max_sweeps + 1):
        prev = current
        x = current.with_matrix(0.5 * (current.matrix + current.matrix.T))
        rho = contract_one_rdm(x)
        for group in cfg.order:
            x, rho = _spin_step(group, x, rho, cfg)
        current = x
        errors, mins = _spin_status(current)
        change = float(np.linalg.norm(current.matrix - prev.matrix))
        report.records.append(SweepRecord(sweep, errors, mins, change))
        report.sweeps_used = sweep
        score = _infeasibility(errors, mins)
        if score < best_score:
            best, best_score = current, score
        if _feasible(errors, mins, cfg):
            report.converged = True
            best = current
            break
    else:
        log.info("fix_regular: no convergence in %d sweeps (infeasibility %.3e)", cfg.max_sweeps, best_score)
    report.final_cost = cost_regular(g2_in, best)
    return best, report


# ---------------------------------------------------------------- DOCI


def _project_d(r: Doci2RDM) -> Doci2RDM:
    """Nearest nonnegative D (off-diagonal) with the prescribed sum."""
    a, b = np.triu_indices(r.L, k=1)
    if a.size == 0:
        return r
    total = trace_target("D", r.L, r.N) / 2.0
    d = np.zeros((r.L, r.L))
    d[a, b] = d[b, a] = project_simplex(r.D[a, b], max(total, 0.0))
    return r.replace(D=d)


def _clamp_q_d(r: Doci2RDM) -> Doci2RDM:
    q = np.maximum(q_d(r), 0.0)
    return invert_q_d(q, r)


def _g2x2_sequential(r: Doci2RDM) -> Doci2RDM:
    """Project the 2x2 blocks one pair at a time, updating (Pi, D) in place.

    The block fixes ``Pi_ab`` and the two differences ``Pi_aa - D_ab``,
    ``Pi_bb - D_ab``; the remaining freedom is spent on the smallest change
    of ``(Pi_aa, Pi_bb, D_ab)`` (with D counted for both triangles).
    """
    pi = np.array(r.Pi)
    d = np.array(r.D)
    for a, b in zip(*np.triu_indices(r.L, k=1)):
        blk = np.array([[pi[a, a] - d[a, b], pi[a, b]], [pi[a, b], pi[b, b] - d[a, b]]])
        lam, u = np.linalg.eigh(blk)
        new = (u * np.maximum(lam, 0.0)) @ u.T
        d0, d1 = new[0, 0] - blk[0, 0], new[1, 1] - blk[1, 1]
        s = 0.5 * (d0 + d1)
        pi[a, a] += d0 - 0.5 * s
        pi[b, b] += d1 - 0.5 * s
        d[a, b] = d[b, a] = d[a, b] - 0.5 * s
        pi[a, b] = pi[b, a] = 0.5 * (new[0, 1] + new[1, 0])
    return r.replace(Pi=pi, D=d)


def _g2x2_parallel(r: Doci2RDM) -> Doci2RDM:
    blocks = g2x2_blocks(r)
    if len(blocks) == 0:
        return r
    lam, u = np.linalg.eigh(blocks)
    projected = np.einsum("kij,kj,klj->kil", u, np.maximum(lam, 0.0), u)
    return invert_g2x2(projected, r)


def _rho_consistency_step(r: Doci2RDM) -> Doci2RDM:
    """Shift each D row toward ``sum_b D_ab = (N/2 - 1) Pi_aa`` and re-symmetrise.

    The row defect ``r_a`` is spread evenly over the ``L - 1`` off-diagonal
    entries, so ``D_ab`` moves by ``(r_a + r_b) / (2 (L - 1))``.  When the
    traces of Pi and D are right the defects sum to zero and sum(D) is kept.
    """
    L, npair = r.L, r.n_pairs
    if npair < 2 or L < 2:
        return r
    defect = (npair - 1) * np.diag(r.Pi) - r.D.sum(axis=1)
    d = r.D + (defect[:, None] + defect[None, :]) / (2.0 * (L - 1))
    np.fill_diagonal(d, 0.0)
    return r.replace(D=d)


def _doci_step(group: str, r: Doci2RDM, cfg: FixConfig) -> Doci2RDM:
    L, N = r.L, r.N
    if group == "P":
        r = r.replace(Pi=project_psd_trace(r.Pi, trace_target("Pi", L, N), cfg.strategy))
        return _project_d(r)
    if group == "Q":
        r = invert_q_pi(project_psd_trace(q_pi(r), trace_target("QPi", L, N), cfg.strategy), r)
        return _clamp_q_d(r)
    r = invert_g_pi(project_psd_trace(g_pi(r), trace_target("GPi", L, N), cfg.strategy), r)
    return _g2x2_sequential(r) if cfg.g2x2_sequential else _g2x2_parallel(r)


def _doci_status(r: Doci2RDM) -> tuple[dict[str, float], dict[str, float]]:
    L, N = r.L, r.N
    a, b = np.triu_indices(L, k=1)
    errors = {
        "Pi": abs(float(np.trace(r.Pi)) - trace_target("Pi", L, N)),
        "D": abs(float(r.D.sum()) - trace_target("D", L, N)),
        "QPi": abs(float(np.trace(q_pi(r))) - trace_target("QPi", L, N)),
        "GPi": abs(float(np.trace(g_pi(r))) - trace_target("GPi", L, N)),
    }
    mins = {
        "Pi": float(_eigs(r.Pi)[0]),
        "QPi": float(_eigs(q_pi(r))[0]),
        "GPi": float(_eigs(g_pi(r))[0]),
    }
    if a.size:
        mins["D"] = float(r.D[a, b].min())
        mins["QD"] = float(q_d(r)[a, b].min())
        mins["G2x2"] = float(_eigs(g2x2_blocks(r))[:, 0].min())
    return errors, mins


def _doci_distance(x: Doci2RDM, y: Doci2RDM) -> float:
    return float(np.sqrt(np.sum((x.Pi - y.Pi) ** 2) + np.sum((x.D - y.D) ** 2)))


def fix_doci(r_in: Doci2RDM, cfg: FixConfig | None = None) -> tuple[Doci2RDM, FixReport]:
    """Restore the seniority-zero conditions on (Pi, D).

    Converged means the (Pi, D) change between consecutive sweeps is at most
    ``tol_eig`` and the iterate meets the trace and positivity tolerances.
    """
    cfg = cfg or FixConfig()
    target = trace_target("Pi", r_in.L, r_in.N)
    if abs(float(np.trace(r_in.Pi)) - target) > 0.1 * max(target, 1.0):
        raise DomainError(f"input Tr Pi = {np.trace(r_in.Pi):.6g} is more than 10% away from {target:.6g}")

    current = r_in.symmetrized()
    report = FixReport(0)
    best, best_score = current, np.inf
    for sweep in range(1, cfg.max_sweeps + 1):
        prev = current
        x = current.symmetrized()
        for group in cfg.order:
            x = _doci_step(group, x, cfg)
        if cfg.enforce_rho_consistency:
            x = _rho_consistency_step(x)
        current = x.symmetrized()
        errors, mins = _doci_status(current)
        change = _doci_distance(current, prev)
        report.records.append(SweepRecord(sweep, errors, mins, change))
        report.sweeps_used = sweep
        score = _infeasibility(errors, mins)
        if score < best_score:
            best, best_score = current, score
        if change <= cfg.tol_eig and _feasible(errors, mins, cfg):
            report.converged = True
            best = current
            break
    else:
        log.info("fix_doci: no convergence in %d sweeps (infeasibility %.3e)", cfg.max_sweeps, best_score)
    report.final_cost = cost_doci(r_in, best)
    return best, report
