"""Diagnostics against every implemented N-representability condition."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .doci import Doci2RDM, g2x2_blocks, g_pi, q_d, q_pi
from .spin import Spin2RDM, condition_matrices, contract_one_rdm, trace_target

DEFAULT_TOL = 1e-10


@dataclass
class ValidationReport:
    """Named violation amounts (0 means satisfied) plus raw diagnostics.

    ``violations`` maps each condition to a nonnegative number: absolute trace
    errors, ``max(0, -lambda_min)`` for positivity conditions, and distance
    outside the allowed interval for eigenvalue bounds.
    """

    representation: str
    violations: dict[str, float]
    diagnostics: dict[str, float | None] = field(default_factory=dict)

    def failed(self, tol: float = DEFAULT_TOL) -> list[str]:
        return [k for k, v in self.violations.items() if v > tol]

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        return not self.failed(tol)

    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)

    def as_dict(self) -> dict:
        return {
            "representation": self.representation,
            "violations": dict(self.violations),
            "diagnostics": dict(self.diagnostics),
        }

    def format(self, tol: float = DEFAULT_TOL) -> str:
        lines = [f"representation: {self.representation}"]
        for k, v in self.violations.items():
            flag = "FAIL" if v > tol else "ok"
            lines.append(f"  {k:<22s} {v:12.4e}  {flag}")
        for k, v in self.diagnostics.items():
            lines.append(f"  {k:<22s} {'n/a' if v is None else f'{v:12.6g}'}")
        failed = self.failed(tol)
        lines.append("all conditions satisfied" if not failed else "violated: " + ", ".join(failed))
        return "\n".join(lines)


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])


def _neg(x: float) -> float:
    return max(0.0, -x)


def validate_spin(g2: Spin2RDM) -> ValidationReport:
    mat = g2.matrix
    sym = float(np.abs(mat - mat.T).max()) if mat.size else 0.0
    conds = condition_matrices(g2)
    rho = contract_one_rdm(g2)
    rho_eigs = np.linalg.eigvalsh(rho)
    p_eigs = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    bound = g2.N if g2.N % 2 == 0 else g2.N - 1
    mins = {k: c.min_eigenvalue() for k, c in conds.items()}
    violations = {
        "symmetry": sym,
        "trace": abs(g2.trace() - trace_target("P", g2.L, g2.N)),
        "P": _neg(mins["P"]),
        "Q": _neg(mins["Q"]),
        "G": _neg(mins["G"]),
        # four-index eigenvalues are twice the pair-basis ones
        "P_upper_bound": max(0.0, 2.0 * float(p_eigs[-1]) - bound),
        "one_rdm_range": max(_neg(float(rho_eigs[0])), float(rho_eigs[-1]) - 1.0, 0.0),
    }
    diagnostics = {
        "trace": g2.trace(),
        "trace_Q": conds["Q"].trace(),
        "trace_G": conds["G"].trace(),
        "min_eig_P": mins["P"],
        "min_eig_Q": mins["Q"],
        "min_eig_G": mins["G"],
        "max_eig_P": 2.0 * float(p_eigs[-1]),
        "one_rdm_min": float(rho_eigs[0]),
        "one_rdm_max": float(rho_eigs[-1]),
    }
    return ValidationReport("SPIN", violations, diagnostics)


def validate_doci(r: Doci2RDM) -> ValidationReport:
    """DOCI-block conditions.  The Pi-diagonal / D-row-sum mismatch is only a
    diagnostic, since the fixer does not enforce it by default."""
    pi, d = r.Pi, r.D
    sym = max(float(np.abs(pi - pi.T).max()), float(np.abs(d - d.T).max()))
    rs = r.symmetrized()
    off = ~np.eye(r.L, dtype=bool)
    pi_eigs = np.linalg.eigvalsh(rs.Pi)
    blocks = g2x2_blocks(rs)
    g2x2_min = float(np.linalg.eigvalsh(blocks)[:, 0].min()) if len(blocks) else 0.0
    d_min = float(rs.D[off].min()) if r.L > 1 else 0.0
    qd = q_d(rs)
    qd_min = float(qd[off].min()) if r.L > 1 else 0.0
    rho = rs.one_rdm()
    # four-index eigenvalues of the embedded 2-RDM: twice those of Pi and of the D entries
    top = 2.0 * max(float(pi_eigs[-1]), float(rs.D.max()) if r.L > 1 else 0.0)
    consistency = rs.rho_consistency()
    violations = {
        "symmetry": sym,
        "trace_Pi": abs(float(np.trace(rs.Pi)) - trace_target("Pi", r.L, r.N)),
        "trace_D": abs(float(rs.D.sum()) - trace_target("D", r.L, r.N)),
        "Pi": _neg(float(pi_eigs[0])),
        "D_nonneg": _neg(d_min),
        "QPi": _neg(_min_eig(q_pi(rs))),
        "QD_nonneg": _neg(qd_min),
        "GPi": _neg(_min_eig(g_pi(rs))),
        "G2x2": _neg(g2x2_min),
        "P_upper_bound": max(0.0, top - r.N),
        "one_rdm_range": max(_neg(float(rho.min())), float(rho.max()) - 1.0, 0.0),
    }
    diagnostics = {
        "trace_Pi": float(np.trace(rs.Pi)),
        "trace_D": float(rs.D.sum()),
        "min_eig_Pi": float(pi_eigs[0]),
        "min_eig_QPi": _min_eig(q_pi(rs)),
        "min_eig_GPi": _min_eig(g_pi(rs)),
        "min_eig_G2x2": g2x2_min,
        "min_D": d_min,
        "min_QD": qd_min,
        "rho_consistency": consistency,
    }
    return ValidationReport("DOCI", violations, diagnostics)


def validate(x: Spin2RDM | Doci2RDM) -> ValidationReport:
    if isinstance(x, Doci2RDM):
        return validate_doci(x)
    if isinstance(x, Spin2RDM):
        return validate_spin(x)
    raise TypeError(f"cannot validate {type(x).__name__}")
