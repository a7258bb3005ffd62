"""Richardson pairing model: exact seniority-zero diagonalisation, pCCD, response RDMs.

Everything here works with a general seniority-zero Hamiltonian

    H = sum_ab A[a, b] S+_a S_b + sum_{a != b} B[a, b] n_a n_b,

where ``n_a`` is the pair occupation of level ``a``.  Its energy functional is
``E = sum(A * Pi) + sum(B * D)``, so ``A`` and ``B`` are exactly the reduced
Hamiltonian blocks K^Pi and K^D.  The pairing model has
``A = diag(2 eps) + g`` and ``B = 0``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from .errors import DomainError
from .rdm.doci import Doci2RDM

log = logging.getLogger(__name__)

MAX_DIM = 100_000


@dataclass(frozen=True)
class PairingModel:
    eps: np.ndarray
    g: float
    n_pairs: int

    def __post_init__(self):
        eps = np.array(self.eps, dtype=float).ravel()
        if not np.all(np.isfinite(eps)):
            raise DomainError("single-particle energies must be finite")
        if not 1 <= self.n_pairs <= eps.size:
            raise DomainError(f"need 1 <= n_pairs <= L, got n_pairs={self.n_pairs}, L={eps.size}")
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "g", float(self.g))

    @classmethod
    def picket_fence(cls, L: int, n_pairs: int, g: float, spacing: float = 1.0) -> "PairingModel":
        """Equally spaced levels ``eps_p = p * spacing``, ``p = 1..L``."""
        return cls(spacing * np.arange(1, L + 1), g, n_pairs)

    @property
    def L(self) -> int:
        return self.eps.size

    @property
    def N(self) -> int:
        return 2 * self.n_pairs

    def with_g(self, g: float) -> "PairingModel":
        return replace(self, g=g)

    def pair_hamiltonian(self) -> tuple[np.ndarray, np.ndarray]:
        """The ``(A, B)`` blocks, which double as K^Pi and K^D."""
        a = np.full((self.L, self.L), self.g) + np.diag(2.0 * self.eps)
        return a, np.zeros((self.L, self.L))

    def spin_orbital_hamiltonian(self) -> tuple[np.ndarray, np.ndarray]:
        """One- and two-electron integrals over spin orbitals (2a up, 2a+1 down)."""
        m = 2 * self.L
        h = np.diag(np.repeat(self.eps, 2))
        v = np.zeros((m,) * 4)
        up = 2 * np.arange(self.L)
        dn = up + 1
        v[up[:, None], dn[:, None], up[None, :], dn[None, :]] = self.g
        v[dn[:, None], up[:, None], dn[None, :], up[None, :]] = self.g
        return h, v


reduced_hamiltonian = PairingModel.pair_hamiltonian


@dataclass(frozen=True)
class DociBasis:
    """All ways of placing ``n_pairs`` pairs on ``L`` levels, ordered by bitmask."""

    L: int
    n_pairs: int

    def __post_init__(self):
        if not 0 <= self.n_pairs <= self.L:
            raise DomainError(f"need 0 <= n_pairs <= L, got {self.n_pairs}, {self.L}")
        if comb(self.L, self.n_pairs) > MAX_DIM:
            raise DomainError(f"C({self.L},{self.n_pairs}) exceeds the dense limit {MAX_DIM}")

    @cached_property
    def configurations(self) -> tuple[int, ...]:
        masks = (sum(1 << p for p in c) for c in combinations(range(self.L), self.n_pairs))
        return tuple(sorted(masks))

    @cached_property
    def index(self) -> dict[int, int]:
        return {k: i for i, k in enumerate(self.configurations)}

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, L) 0/1 matrix of pair occupations."""
        conf = np.array(self.configurations, dtype=np.int64)
        return ((conf[:, None] >> np.arange(self.L)) & 1).astype(float)

    @cached_property
    def hops(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All single pair moves ``q -> p``: (target index, source index, p, q)."""
        tgt, src, ps, qs = [], [], [], []
        for i, k in enumerate(self.configurations):
            occ = [p for p in range(self.L) if k >> p & 1]
            emp = [p for p in range(self.L) if not k >> p & 1]
            for q in occ:
                for p in emp:
                    tgt.append(self.index[(k & ~(1 << q)) | (1 << p)])
                    src.append(i)
                    ps.append(p)
                    qs.append(q)
        return tuple(np.array(x, dtype=np.int64) for x in (tgt, src, ps, qs))

    @property
    def dim(self) -> int:
        return len(self.configurations)


def build_pair_hamiltonian(basis: DociBasis, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    occ = basis.occupations
    b0 = np.array(b, dtype=float)
    np.fill_diagonal(b0, 0.0)
    diag = occ @ np.diag(a) + np.einsum("kp,pq,kq->k", occ, b0, occ)
    h = np.diag(diag)
    tgt, src, p, q = basis.hops
    h[tgt, src] = a[p, q]
    return h


def build_hamiltonian(m: PairingModel) -> np.ndarray:
    """Dense pairing Hamiltonian on the seniority-zero basis."""
    return build_pair_hamiltonian(DociBasis(m.L, m.n_pairs), *m.pair_hamiltonian())


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def exact_ground(m: PairingModel) -> tuple[float, np.ndarray]:
    h = build_hamiltonian(m)
    w, u = np.linalg.eigh(h)
    return float(w[0]), _fix_sign(u[:, 0])


def doci_rdms_from_ci(basis: DociBasis, vec: np.ndarray) -> Doci2RDM:
    """Pi and D of a seniority-zero CI vector (normalised internally)."""
    c = np.asarray(vec, dtype=float)
    c = c / np.linalg.norm(c)
    occ = basis.occupations
    w = c * c
    pi = np.zeros((basis.L, basis.L))
    tgt, src, p, q = basis.hops
    np.add.at(pi, (p, q), c[tgt] * c[src])
    pi[np.diag_indices(basis.L)] = occ.T @ w
    d = occ.T @ (w[:, None] * occ)
    np.fill_diagonal(d, 0.0)
    return Doci2RDM(basis.L, 2 * basis.n_pairs, pi, d)


def exact_doci_rdms(m: PairingModel) -> Doci2RDM:
    _, vec = exact_ground(m)
    return doci_rdms_from_ci(DociBasis(m.L, m.n_pairs), vec)


def pairing_energy_from_rdm(m: PairingModel, r: Doci2RDM) -> float:
    """``2 sum_a eps_a Pi_aa + g sum_ab Pi_ab``; D does not enter."""
    return float(2.0 * m.eps @ np.diag(r.Pi) + m.g * r.Pi.sum())


# ---------------------------------------------------------------- pCCD


@dataclass
class PccdState:
    occupied: np.ndarray
    virtual: np.ndarray
    amplitudes: np.ndarray = field(repr=False)
    energy: float
    converged: bool
    residual_norm: float
    iterations: int


def _blocks(a, b, occ, vir):
    a = np.asarray(a, dtype=float)
    b = np.array(b, dtype=float)
    np.fill_diagonal(b, 0.0)
    return a[np.ix_(occ, occ)], a[np.ix_(occ, vir)], a[np.ix_(vir, occ)], a[np.ix_(vir, vir)], b


def reference_energy(a, b, occ) -> float:
    b0 = np.array(b, dtype=float)
    np.fill_diagonal(b0, 0.0)
    return float(np.trace(a[np.ix_(occ, occ)]) + b0[np.ix_(occ, occ)].sum())


def pccd_energy(c, a, b, occ, vir) -> float:
    """Energy from projecting onto the reference: ``E_ref + sum_ia A[i, a] c[i, a]``."""
    return reference_energy(a, b, occ) + float(np.sum(np.asarray(a)[np.ix_(occ, vir)] * c))


def _excitation_diag(a, b, occ, vir) -> np.ndarray:
    """Diagonal energy change for moving the pair in ``i`` to ``a``."""
    b0 = np.array(b, dtype=float)
    np.fill_diagonal(b0, 0.0)
    da = np.diag(a)
    s_vir = b0[np.ix_(vir, occ)].sum(axis=1)  # sum_{q in occ} B[a, q]
    s_occ = b0[np.ix_(occ, occ)].sum(axis=1)  # sum_{q in occ} B[i, q]
    b_ai = b0[np.ix_(occ, vir)]  # B[i, a]
    return (da[vir][None, :] - da[occ][:, None]) + 2.0 * (s_vir[None, :] - b_ai - s_occ[:, None])


def pccd_residual(c, a, b, occ, vir) -> np.ndarray:
    """Projections ``<Phi_i^a| H - E |Psi>`` for all occupied ``i``, virtual ``a``."""
    a_oo, a_ov, a_vo, a_vv, _ = _blocks(a, b, occ, vir)
    c = np.asarray(c, dtype=float)
    diag_o = np.diag(a_oo)
    diag_v = np.diag(a_vv)
    x = a_ov * c
    xr = x.sum(axis=1)
    xc = x.sum(axis=0)
    return (
        a_vo.T
        + _excitation_diag(a, b, occ, vir) * c
        + c @ a_vv.T
        + a_oo.T @ c
        - (diag_v[None, :] + diag_o[:, None]) * c
        - 2.0 * c * (xr[:, None] + xc[None, :])
        + 2.0 * a_ov * c * c
        + c @ a_ov.T @ c
    )


def pccd_jacobian(c, a, b, occ, vir) -> np.ndarray:
    """Analytic derivative of :func:`pccd_residual`, shape (o*v, o*v)."""
    a_oo, a_ov, _, a_vv, _ = _blocks(a, b, occ, vir)
    c = np.asarray(c, dtype=float)
    no, nv = c.shape
    eo, ev = np.eye(no), np.eye(nv)
    x = a_ov * c
    xr = x.sum(axis=1)
    xc = x.sum(axis=0)
    diag = (
        _excitation_diag(a, b, occ, vir)
        - np.diag(a_vv)[None, :]
        - np.diag(a_oo)[:, None]
        - 2.0 * (xr[:, None] + xc[None, :])
        + 4.0 * a_ov * c
    )
    # J[i, a, k, b]
    j = np.einsum("ik,ab->iakb", eo, ev) * diag[:, :, None, None]
    j += np.einsum("ik,ab->iakb", eo, a_vv)
    j += np.einsum("ki,ab->iakb", a_oo, ev)
    j -= 2.0 * np.einsum("ia,ik,ib->iakb", c, eo, a_ov)
    j -= 2.0 * np.einsum("ia,ab,ka->iakb", c, ev, a_ov)
    j += np.einsum("ik,ba->iakb", eo, a_ov.T @ c)
    j += np.einsum("ab,ik->iakb", ev, c @ a_ov.T)
    return j.reshape(no * nv, no * nv)


def reference_levels(a: np.ndarray, n_pairs: int) -> np.ndarray:
    """The ``n_pairs`` levels with the lowest diagonal pair energy."""
    return np.sort(np.argsort(np.diag(a), kind="stable")[:n_pairs])


def solve_pccd(
    a,
    b,
    n_pairs: int,
    guess: np.ndarray | None = None,
    occupied: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 200,
    damping: float = 0.5,
    max_halvings: int = 30,
) -> PccdState:
    """Newton iteration on the pCCD amplitude equations for a general ``(A, B)``.

    A step that raises the residual norm is scaled by ``damping`` until it
    does not (or ``max_halvings`` is reached).  On failure the iterate with
    the smallest residual is returned with ``converged=False``.
    """
    a = np.asarray(a, dtype=float)
    L = a.shape[0]
    occ = reference_levels(a, n_pairs) if occupied is None else np.asarray(occupied)
    vir = np.setdiff1d(np.arange(L), occ)
    c = np.zeros((occ.size, vir.size)) if guess is None else np.array(guess, dtype=float)

    r = pccd_residual(c, a, b, occ, vir)
    nr = float(np.linalg.norm(r))
    best_c, best_nr = c, nr
    it = 0
    while nr > tol and it < max_iter:
        it += 1
        jac = pccd_jacobian(c, a, b, occ, vir)
        try:
            step = np.linalg.solve(jac, -r.ravel())
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r.ravel(), rcond=None)[0]
        step = step.reshape(c.shape)
        t = 1.0
        for _ in range(max_halvings):
            c_new = c + t * step
            r_new = pccd_residual(c_new, a, b, occ, vir)
            nr_new = float(np.linalg.norm(r_new))
            if np.isfinite(nr_new) and nr_new < nr:
                break
            t *= damping
        if not np.isfinite(nr_new):
            break
        c, r, nr = c_new, r_new, nr_new
        if nr < best_nr:
            best_c, best_nr = c, nr
    converged = best_nr <= tol
    if not converged:
        log.debug("pCCD not converged: residual %.3e after %d iterations", best_nr, it)
    return PccdState(
        occupied=occ,
        virtual=vir,
        amplitudes=best_c,
        energy=pccd_energy(best_c, a, b, occ, vir),
        converged=converged,
        residual_norm=best_nr,
        iterations=it,
    )


def pccd_solve(m: PairingModel, guess: np.ndarray | None = None, **kwargs) -> PccdState:
    """pCCD (AP1roG) for the pairing model, starting from ``c = 0`` by default."""
    a, b = m.pair_hamiltonian()
    return solve_pccd(a, b, m.n_pairs, guess=guess, **kwargs)


def pccd_wavefunction(state: PccdState, basis: DociBasis) -> np.ndarray:
    """Expand the pCCD state (intermediate normalisation) in the DOCI basis.

    The coefficient of a configuration with holes I and particles P is the
    permanent of ``c[I, P]``.
    """
    opos = {int(i): k for k, i in enumerate(state.occupied)}
    vpos = {int(a): k for k, a in enumerate(state.virtual)}
    out = np.zeros(basis.dim)
    for n, conf in enumerate(basis.configurations):
        holes = [opos[i] for i in state.occupied if not conf >> int(i) & 1]
        parts = [vpos[a] for a in state.virtual if conf >> int(a) & 1]
        if len(holes) != len(parts):
            continue
        out[n] = _permanent(state.amplitudes[np.ix_(holes, parts)]) if holes else 1.0
    return out


def _permanent(m: np.ndarray) -> float:
    """Ryser's formula; fine for the small blocks met here."""
    n = m.shape[0]
    total = 0.0
    for subset in range(1, 1 << n):
        cols = [j for j in range(n) if subset >> j & 1]
        total += (-1) ** len(cols) * np.prod(m[:, cols].sum(axis=1))
    return (-1) ** n * total


# ---------------------------------------------------------------- response


@dataclass
class ResponseRdms:
    rdm: Doci2RDM
    state: PccdState
    converged: bool
    failed: list[tuple[str, int, int]] = field(default_factory=list)


def response_from_hamiltonian(
    a: np.ndarray,
    b: np.ndarray,
    n_pairs: int,
    h: float = 1e-4,
    state: PccdState | None = None,
    **solver_kwargs,
) -> ResponseRdms:
    """Pi = dE/dA and D = dE/dB by central differences of the pCCD energy.

    Off-diagonal couplings are perturbed symmetrically, which yields the
    symmetrised response directly.  Every perturbed solve is warm-started from
    the unperturbed amplitudes and keeps the unperturbed reference.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    L = a.shape[0]
    if state is None:
        state = solve_pccd(a, b, n_pairs, **solver_kwargs)
    failed: list[tuple[str, int, int]] = []

    def energy_at(which: str, p: int, q: int, delta: float) -> float:
        aa, bb = a.copy(), b.copy()
        target = aa if which == "Pi" else bb
        target[p, q] += delta
        if p != q:
            target[q, p] += delta
        s = solve_pccd(aa, bb, n_pairs, guess=state.amplitudes, occupied=state.occupied, **solver_kwargs)
        if not s.converged:
            failed.append((which, p, q))
        return s.energy

    pi = np.zeros((L, L))
    d = np.zeros((L, L))
    for p in range(L):
        for q in range(p, L):
            dpi = (energy_at("Pi", p, q, h) - energy_at("Pi", p, q, -h)) / (2 * h)
            pi[p, q] = pi[q, p] = dpi if p == q else 0.5 * dpi
            if p != q and n_pairs > 1:
                dd = (energy_at("D", p, q, h) - energy_at("D", p, q, -h)) / (2 * h)
                d[p, q] = d[q, p] = 0.5 * dd
    rdm = Doci2RDM(L, 2 * n_pairs, pi, d)
    return ResponseRdms(rdm, state, state.converged and not failed, sorted(set(failed)))


def response_doci_rdms(m: PairingModel, h: float = 1e-4, state: PccdState | None = None, **solver_kwargs) -> ResponseRdms:
    """pCCD response Pi and D for the pairing model."""
    a, b = m.pair_hamiltonian()
    return response_from_hamiltonian(a, b, m.n_pairs, h=h, state=state, **solver_kwargs)
