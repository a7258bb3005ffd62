"""Seniority-zero (DOCI) 2-RDMs: pair matrix Pi and exchange matrix D.

``Pi[a, b] = <S+_a S_b>`` and, for ``a != b``, ``D[a, b] = Gamma[a b a b]``
(the same value for all four spin combinations); ``D[a, a] = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, DomainError
from .spin import ConditionMatrix, Spin2RDM, n_pairs, pair_index, trace_target

DOCI_KINDS = ("QPi", "QD", "GPi", "G2x2")


@dataclass(frozen=True)
class Doci2RDM:
    L: int
    N: int
    Pi: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.N % 2:
            raise DomainError(f"seniority-zero RDMs need an even electron count, got N={self.N}")
        if not 0 <= self.N <= 2 * self.L:
            raise DomainError(f"N={self.N} outside [0, {2 * self.L}]")
        pi = np.array(self.Pi, dtype=float)
        d = np.array(self.D, dtype=float)
        for name, a in (("Pi", pi), ("D", d)):
            if a.shape != (self.L, self.L):
                raise DimensionError(f"{name} must be {self.L}x{self.L}, got {a.shape}")
        np.fill_diagonal(d, 0.0)
        pi.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "Pi", pi)
        object.__setattr__(self, "D", d)

    @property
    def n_pairs(self) -> int:
        return self.N // 2

    def replace(self, Pi=None, D=None) -> "Doci2RDM":
        return Doci2RDM(self.L, self.N, self.Pi if Pi is None else Pi, self.D if D is None else D)

    def symmetrized(self) -> "Doci2RDM":
        return self.replace(0.5 * (self.Pi + self.Pi.T), 0.5 * (self.D + self.D.T))

    def one_rdm(self) -> np.ndarray:
        """Pair occupations ``rho_a = Pi[a, a]``."""
        return np.diag(self.Pi).copy()

    def one_rdm_from_d(self) -> np.ndarray | None:
        """``rho_a = sum_b D[a, b] / (N/2 - 1)``; undefined for a single pair."""
        if self.n_pairs < 2:
            return None
        return self.D.sum(axis=1) / (self.n_pairs - 1)

    def rho_consistency(self) -> float | None:
        """Norm of the mismatch between the two ways of getting the 1-RDM."""
        alt = self.one_rdm_from_d()
        if alt is None:
            return None
        return float(np.linalg.norm(self.one_rdm() - alt))

    def to_spin(self) -> Spin2RDM:
        return embed(self)


def q_pi(r: Doci2RDM) -> np.ndarray:
    return np.diag(1.0 - 2.0 * np.diag(r.Pi)) + r.Pi


def q_d(r: Doci2RDM) -> np.ndarray:
    p = np.diag(r.Pi)
    out = r.D + 1.0 - p[:, None] - p[None, :]
    np.fill_diagonal(out, 0.0)
    return out


def g_pi(r: Doci2RDM) -> np.ndarray:
    return r.D + np.diag(np.diag(r.Pi))


def g2x2_blocks(r: Doci2RDM) -> np.ndarray:
    """All ``[[Pi_aa - D_ab, Pi_ab], [Pi_ab, Pi_bb - D_ab]]`` for ``a < b``, shape (K, 2, 2)."""
    a, b = np.triu_indices(r.L, k=1)
    pi = 0.5 * (r.Pi + r.Pi.T)
    d = 0.5 * (r.D + r.D.T)
    blocks = np.empty((a.size, 2, 2))
    blocks[:, 0, 0] = pi[a, a] - d[a, b]
    blocks[:, 1, 1] = pi[b, b] - d[a, b]
    blocks[:, 0, 1] = blocks[:, 1, 0] = pi[a, b]
    return blocks


def doci_conditions(r: Doci2RDM) -> list[ConditionMatrix]:
    """Q^Pi, Q^D, G^Pi followed by one G2x2 block per level pair ``a < b``."""
    out = [
        ConditionMatrix("QPi", q_pi(r), trace_target("QPi", r.L, r.N), r.L, r.N),
        ConditionMatrix("QD", q_d(r), trace_target("QD", r.L, r.N), r.L, r.N),
        ConditionMatrix("GPi", g_pi(r), trace_target("GPi", r.L, r.N), r.L, r.N),
    ]
    a, b = np.triu_indices(r.L, k=1)
    for k, blk in enumerate(g2x2_blocks(r)):
        out.append(ConditionMatrix("G2x2", blk, None, r.L, r.N, pair=(int(a[k]), int(b[k]))))
    return out


def invert_q_pi(q: np.ndarray, r: Doci2RDM) -> Doci2RDM:
    q = np.asarray(q, dtype=float)
    pi = q.copy()
    np.fill_diagonal(pi, 1.0 - np.diag(q))
    return r.replace(Pi=pi)


def invert_q_d(q: np.ndarray, r: Doci2RDM) -> Doci2RDM:
    p = np.diag(r.Pi)
    d = np.asarray(q, dtype=float) - 1.0 + p[:, None] + p[None, :]
    return r.replace(D=d)


def invert_g_pi(g: np.ndarray, r: Doci2RDM) -> Doci2RDM:
    g = np.asarray(g, dtype=float)
    pi = np.array(r.Pi)
    np.fill_diagonal(pi, np.diag(g))
    return r.replace(Pi=pi, D=g)


def invert_g2x2(blocks: np.ndarray, r: Doci2RDM) -> Doci2RDM:
    """Merge per-pair 2x2 blocks back into (Pi, D).

    Each block proposes ``Pi_aa = X00 + D_ab`` and ``Pi_bb = X11 + D_ab``
    (with the incoming D); a diagonal entry takes the mean of its ``L - 1``
    proposals.  ``Pi_ab`` is read off directly and ``D_ab`` is the mean of
    ``Pi_aa - X00`` and ``Pi_bb - X11`` using the merged diagonal.
    """
    blocks = np.asarray(blocks, dtype=float)
    L = r.L
    a, b = np.triu_indices(L, k=1)
    if blocks.shape != (a.size, 2, 2):
        raise DimensionError(f"expected {a.size} 2x2 blocks, got {blocks.shape}")
    if L < 2:
        return r
    d_old = 0.5 * (r.D + r.D.T)
    x00, x11 = blocks[:, 0, 0], blocks[:, 1, 1]
    x01 = 0.5 * (blocks[:, 0, 1] + blocks[:, 1, 0])

    proposals = np.zeros(L)
    np.add.at(proposals, a, x00 + d_old[a, b])
    np.add.at(proposals, b, x11 + d_old[a, b])
    diag = proposals / (L - 1)

    pi = 0.5 * (r.Pi + r.Pi.T)
    pi[a, b] = pi[b, a] = x01
    np.fill_diagonal(pi, diag)
    d = np.zeros((L, L))
    d[a, b] = d[b, a] = 0.5 * ((diag[a] - x00) + (diag[b] - x11))
    return r.replace(Pi=pi, D=d)


def doci_invert(kind: str, c, context: Doci2RDM) -> Doci2RDM:
    """Map a (modified) DOCI condition matrix back to (Pi, D).

    ``c`` is a matrix (or a ConditionMatrix) for QPi/QD/GPi and a stack of
    2x2 blocks (or a list of G2x2 ConditionMatrix) for G2x2.
    """
    if kind == "G2x2":
        if isinstance(c, (list, tuple)):
            c = np.stack([x.matrix if isinstance(x, ConditionMatrix) else np.asarray(x) for x in c])
        return invert_g2x2(c, context)
    if isinstance(c, ConditionMatrix):
        c = c.matrix
    inverses = {"QPi": invert_q_pi, "QD": invert_q_d, "GPi": invert_g_pi}
    if kind not in inverses:
        raise ValueError(f"unknown DOCI condition kind {kind!r}")
    return inverses[kind](c, context)


def doci_energy(r: Doci2RDM, k_pi: np.ndarray, k_d: np.ndarray) -> float:
    """``E = sum_ab (K^Pi_ab Pi_ab + K^D_ab D_ab)``; the diagonal of K^D is ignored."""
    k_pi = np.asarray(k_pi, dtype=float)
    k_d = np.array(k_d, dtype=float)
    if k_pi.shape != (r.L, r.L) or k_d.shape != (r.L, r.L):
        raise DimensionError("reduced Hamiltonian blocks must be L x L")
    np.fill_diagonal(k_d, 0.0)
    return float(np.sum(k_pi * r.Pi) + np.sum(k_d * r.D))


def doci_reduced_hamiltonian(h: np.ndarray, v: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """K^Pi and K^D from spatial one- and two-electron integrals.

    ``v[a, b, c, d]`` is indexed like the spin-orbital two-electron tensor,
    restricted to spatial orbitals.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=float)
    L = h.shape[0]
    idx = np.arange(L)
    k_pi = np.array(v[idx[:, None], idx[:, None], idx[None, :], idx[None, :]])
    k_pi += np.diag(2.0 / (N - 1) * np.diag(h))
    hd = np.diag(h)
    k_d = 2.0 / (N - 1) * (hd[:, None] + hd[None, :])
    k_d += 2.0 * v[idx[:, None], idx[None, :], idx[:, None], idx[None, :]]
    k_d -= v[idx[:, None], idx[None, :], idx[None, :], idx[:, None]]
    np.fill_diagonal(k_d, 0.0)
    return k_pi, k_d


def _doci_positions(L: int):
    """Pair-basis positions holding Pi and D elements, with their (a, b) labels."""
    m = 2 * L
    pi_rows, pi_cols, pi_a, pi_b = [], [], [], []
    for a in range(L):
        for b in range(L):
            pi_rows.append(pair_index(m, 2 * a, 2 * a + 1))
            pi_cols.append(pair_index(m, 2 * b, 2 * b + 1))
            pi_a.append(a)
            pi_b.append(b)
    d_pos, d_a, d_b = [], [], []
    for a in range(L):
        for b in range(L):
            if a == b:
                continue
            for sa in (0, 1):
                for sb in (0, 1):
                    al, be = sorted((2 * a + sa, 2 * b + sb))
                    d_pos.append(pair_index(m, al, be))
                    d_a.append(a)
                    d_b.append(b)
    return (
        np.array(pi_rows), np.array(pi_cols), np.array(pi_a), np.array(pi_b),
        np.array(d_pos), np.array(d_a), np.array(d_b),
    )


def embed(r: Doci2RDM) -> Spin2RDM:
    """Spin-orbital 2-RDM whose only nonzero blocks are Pi and D."""
    L = r.L
    k = n_pairs(2 * L)
    mat = np.zeros((k, k))
    pr, pc, pa, pb, dp, da, db = _doci_positions(L)
    mat[pr, pc] = r.Pi[pa, pb]
    # Gamma[ab ab] sits on the pair-matrix diagonal with a + sign for any spin order
    mat[dp, dp] = r.D[da, db]
    return Spin2RDM(L, r.N, mat)


def extract(g2: Spin2RDM) -> Doci2RDM:
    """Read Pi and D back out of a spin-orbital 2-RDM (D averaged over spins)."""
    L = g2.L
    pr, pc, pa, pb, dp, da, db = _doci_positions(L)
    pi = np.zeros((L, L))
    pi[pa, pb] = g2.matrix[pr, pc]
    d = np.zeros((L, L))
    np.add.at(d, (da, db), g2.matrix[dp, dp])
    return Doci2RDM(L, g2.N, pi, d / 4.0)


def doci_mask(L: int) -> np.ndarray:
    """Boolean mask of pair-basis entries allowed to be nonzero for a DOCI state."""
    k = n_pairs(2 * L)
    mask = np.zeros((k, k), dtype=bool)
    pr, pc, _, _, dp, _, _ = _doci_positions(L)
    mask[pr, pc] = True
    mask[dp, dp] = True
    return mask


def seniority_off_block_sum(g2: Spin2RDM) -> float:
    """Sum of |Gamma| over elements that vanish for a seniority-zero state."""
    return float(np.abs(g2.matrix[~doci_mask(g2.L)]).sum())
