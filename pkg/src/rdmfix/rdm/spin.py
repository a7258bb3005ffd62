"""Spin-orbital 2-RDMs and the P, Q, G condition matrices.

Spin orbital ``2a`` is level ``a`` spin up, ``2a + 1`` is level ``a`` spin down.
A 2-RDM is stored as a matrix over ordered pairs ``alpha < beta``; the
four-index tensor ``Gamma[alpha, beta, gamma, delta]`` is recovered with
antisymmetry signs.  Traces quoted as targets use the four-index convention
(sum over all ``alpha, beta``), which is twice the packed-matrix trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import DimensionError, DomainError

PACKED_KINDS = ("P", "Q")
SPIN_KINDS = ("P", "Q", "G")


@lru_cache(maxsize=None)
def pair_indices(n_spin: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column arrays of the ordered pairs ``alpha < beta``."""
    i, j = np.triu_indices(n_spin, k=1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def n_pairs(n_spin: int) -> int:
    return n_spin * (n_spin - 1) // 2


def unpack(packed: np.ndarray, n_spin: int) -> np.ndarray:
    """Expand a pair-basis matrix into the antisymmetric four-index tensor."""
    k = n_pairs(n_spin)
    packed = np.asarray(packed, dtype=float)
    if packed.shape != (k, k):
        raise DimensionError(f"pair matrix for {n_spin} spin orbitals must be {k}x{k}, got {packed.shape}")
    i, j = pair_indices(n_spin)
    t = np.zeros((n_spin,) * 4)
    a, b = i[:, None], j[:, None]
    c, d = i[None, :], j[None, :]
    t[a, b, c, d] = packed
    t[b, a, c, d] = -packed
    t[a, b, d, c] = -packed
    t[b, a, d, c] = packed
    return t


def antisymmetrize(tensor: np.ndarray) -> np.ndarray:
    """Average the four sign-related entries of each index quadruple."""
    t = np.asarray(tensor, dtype=float)
    return 0.25 * (t - t.transpose(1, 0, 2, 3) - t.transpose(0, 1, 3, 2) + t.transpose(1, 0, 3, 2))


def pack(tensor: np.ndarray) -> np.ndarray:
    """Antisymmetrize a four-index tensor and restrict it to the pair basis."""
    t = np.asarray(tensor, dtype=float)
    m = t.shape[0]
    if t.shape != (m,) * 4:
        raise DimensionError(f"expected a (M, M, M, M) tensor, got {t.shape}")
    t = antisymmetrize(t)
    i, j = pair_indices(m)
    return t[i[:, None], j[:, None], i[None, :], j[None, :]]


@dataclass(frozen=True)
class Spin2RDM:
    """Two-electron RDM over ``2L`` spin orbitals, stored on the pair basis.

    ``matrix`` is normally symmetric; response RDMs may arrive unsymmetrized,
    which the fixer repairs in its first step.
    """

    L: int
    N: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        k = n_pairs(2 * self.L)
        if m.shape != (k, k):
            raise DimensionError(f"L={self.L} needs a {k}x{k} pair matrix, got {m.shape}")
        if self.N < 0 or self.N > 2 * self.L:
            raise DomainError(f"N={self.N} outside [0, {2 * self.L}]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_spin(self) -> int:
        return 2 * self.L

    @classmethod
    def from_tensor(cls, L: int, N: int, tensor: np.ndarray) -> "Spin2RDM":
        return cls(L, N, pack(tensor))

    def tensor(self) -> np.ndarray:
        return unpack(self.matrix, self.n_spin)

    def element(self, a: int, b: int, c: int, d: int) -> float:
        """``Gamma[a, b, c, d]`` with antisymmetry signs applied."""
        if a == b or c == d:
            return 0.0
        sign = 1.0
        if a > b:
            a, b, sign = b, a, -sign
        if c > d:
            c, d, sign = d, c, -sign
        return sign * float(self.matrix[pair_index(self.n_spin, a, b), pair_index(self.n_spin, c, d)])

    def trace(self) -> float:
        """Four-index trace ``sum_{ab} Gamma[a, b, a, b]``; N(N-1) when normalised."""
        return 2.0 * float(np.trace(self.matrix))

    def with_matrix(self, matrix: np.ndarray) -> "Spin2RDM":
        return Spin2RDM(self.L, self.N, matrix)


def pair_index(n_spin: int, a: int, b: int) -> int:
    """Position of the pair ``a < b`` in the pair basis."""
    return a * n_spin - a * (a + 1) // 2 + (b - a - 1)


def _check_rho(rho: np.ndarray, n_spin: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (n_spin, n_spin):
        raise DimensionError(f"1-RDM must be {n_spin}x{n_spin}, got {rho.shape}")
    return rho


def contract_one_rdm(g2: Spin2RDM) -> np.ndarray:
    """``rho[a, c] = sum_b Gamma[a, b, c, b] / (N - 1)``."""
    if g2.N < 2:
        raise DomainError("contraction to the 1-RDM needs N >= 2")
    t = g2.tensor()
    rho = np.einsum("abcb->ac", t) / (g2.N - 1)
    return 0.5 * (rho + rho.T)


def _q_shift(rho: np.ndarray) -> np.ndarray:
    """The 1-RDM dependent part of Q in terms of Gamma (four-index)."""
    m = rho.shape[0]
    eye = np.eye(m)
    return (
        np.einsum("bd,ag->abgd", eye, eye)
        - np.einsum("ad,bg->abgd", eye, eye)
        - np.einsum("bd,ag->abgd", eye, rho)
        + np.einsum("ad,bg->abgd", eye, rho)
        + np.einsum("bg,ad->abgd", eye, rho)
        - np.einsum("ag,bd->abgd", eye, rho)
    )


@dataclass(frozen=True)
class ConditionMatrix:
    """A P, Q, G or DOCI-block condition matrix.

    ``trace_target`` follows the four-index convention for the spin kinds; use
    :attr:`matrix_trace_target` for the trace of ``matrix`` itself.  ``pair``
    labels a ``G2x2`` block.
    """

    kind: str
    matrix: np.ndarray = field(repr=False)
    trace_target: float | None
    L: int
    N: int
    pair: tuple[int, int] | None = None

    @property
    def scale(self) -> float:
        return 2.0 if self.kind in PACKED_KINDS else 1.0

    @property
    def matrix_trace_target(self) -> float | None:
        return None if self.trace_target is None else self.trace_target / self.scale

    def trace(self) -> float:
        return self.scale * float(np.trace(self.matrix))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))[0])

    def with_matrix(self, matrix: np.ndarray) -> "ConditionMatrix":
        return ConditionMatrix(self.kind, np.asarray(matrix, dtype=float), self.trace_target, self.L, self.N, self.pair)


def trace_target(kind: str, L: int, N: int) -> float | None:
    """Normalisation of each condition matrix (four-index convention for P/Q/G)."""
    m = 2 * L
    targets = {
        "P": N * (N - 1),
        "Q": (m - N) * (m - N - 1),
        "G": N * (m - N + 1),
        "QPi": L - N / 2,
        "QD": (L - N / 2) * (L - N / 2 - 1),
        "GPi": N / 2,
        "Pi": N / 2,
        "D": (N / 2) * (N / 2 - 1),
        "G2x2": None,
    }
    if kind not in targets:
        raise ValueError(f"unknown condition kind {kind!r}")
    t = targets[kind]
    return None if t is None else float(t)


def p_matrix(g2: Spin2RDM) -> ConditionMatrix:
    return ConditionMatrix("P", np.array(g2.matrix), trace_target("P", g2.L, g2.N), g2.L, g2.N)


def q_from_p(g2: Spin2RDM, rho: np.ndarray | None = None) -> ConditionMatrix:
    """Two-hole matrix Q from Gamma and the 1-RDM (pair basis)."""
    if rho is None:
        rho = contract_one_rdm(g2)
    rho = _check_rho(rho, g2.n_spin)
    q = g2.tensor() + _q_shift(rho)
    return ConditionMatrix("Q", pack(q), trace_target("Q", g2.L, g2.N), g2.L, g2.N)


def g_tensor(g2: Spin2RDM, rho: np.ndarray) -> np.ndarray:
    """``G[a, b, c, d] = delta_bd rho[a, c] - Gamma[a, d, c, b]``."""
    eye = np.eye(g2.n_spin)
    return np.einsum("bd,ag->abgd", eye, rho) - g2.tensor().transpose(0, 3, 2, 1)


def g_from_p(g2: Spin2RDM, rho: np.ndarray | None = None) -> ConditionMatrix:
    """Particle-hole matrix G on the full ``(2L)^2`` composite index."""
    if rho is None:
        rho = contract_one_rdm(g2)
    rho = _check_rho(rho, g2.n_spin)
    m = g2.n_spin
    g = g_tensor(g2, rho).reshape(m * m, m * m)
    return ConditionMatrix("G", g, trace_target("G", g2.L, g2.N), g2.L, g2.N)


def p_from_q(q: ConditionMatrix, rho_fallback: np.ndarray | None = None) -> tuple[Spin2RDM, np.ndarray]:
    """Invert the Q map: recover the 1-RDM from the contraction of Q, then Gamma.

    Contracting the Q formula gives ``sum_b Q[a,b,c,b] = (2L-N-1)(delta_ac - rho_ac)``.
    When ``2L - N - 1 == 0`` that identity carries no information and
    ``rho_fallback`` (the latest particle-side 1-RDM) is used.
    """
    if q.kind != "Q":
        raise ValueError(f"expected a Q matrix, got {q.kind}")
    m = 2 * q.L
    tq = unpack(q.matrix, m)
    holes = m - q.N - 1
    if holes == 0:
        if rho_fallback is None:
            raise DomainError("2L - N - 1 = 0: the 1-RDM cannot be recovered from Q without a fallback")
        rho = _check_rho(rho_fallback, m)
    else:
        c = np.einsum("abcb->ac", tq)
        rho = np.eye(m) - c / holes
        rho = 0.5 * (rho + rho.T)
    gamma = tq - _q_shift(rho)
    return Spin2RDM.from_tensor(q.L, q.N, gamma), rho


def p_from_g(g: ConditionMatrix) -> tuple[Spin2RDM, np.ndarray]:
    """Invert the G map; the result is re-antisymmetrized.

    ``sum_b G[a,b,c,b] = (2L-N+1) rho[a,c]`` fixes the 1-RDM, and then
    ``Gamma[a,d,c,b] = delta_bd rho[a,c] - G[a,b,c,d]``.
    """
    if g.kind != "G":
        raise ValueError(f"expected a G matrix, got {g.kind}")
    m = 2 * g.L
    if g.matrix.shape != (m * m, m * m):
        raise DimensionError(f"G for L={g.L} must be {m * m}x{m * m}, got {g.matrix.shape}")
    tg = g.matrix.reshape(m, m, m, m)
    rho = np.einsum("abcb->ac", tg) / (m - g.N + 1)
    rho = 0.5 * (rho + rho.T)
    eye = np.eye(m)
    gamma = (np.einsum("bd,ag->abgd", eye, rho) - tg).transpose(0, 3, 2, 1)
    return Spin2RDM.from_tensor(g.L, g.N, gamma), rho


def condition_matrices(g2: Spin2RDM) -> dict[str, ConditionMatrix]:
    """P, Q and G with the 1-RDM recomputed from ``g2``."""
    rho = contract_one_rdm(g2)
    return {"P": p_matrix(g2), "Q": q_from_p(g2, rho), "G": g_from_p(g2, rho)}


def reduced_hamiltonian(h: np.ndarray, v: np.ndarray, N: int) -> np.ndarray:
    """``K[a,b,c,d] = (h[a,c] delta_bd + h[b,d] delta_ac) / (N - 1) + V[a,b,c,d]``."""
    h = np.asarray(h, dtype=float)
    m = h.shape[0]
    eye = np.eye(m)
    k = (np.einsum("ac,bd->abcd", h, eye) + np.einsum("bd,ac->abcd", h, eye)) / (N - 1)
    return k + np.asarray(v, dtype=float)


def energy(g2: Spin2RDM, k: np.ndarray) -> float:
    """``E = 1/2 sum Gamma[a,b,c,d] K[a,b,c,d]`` over all four indices."""
    k = np.asarray(k, dtype=float)
    m = g2.n_spin
    if k.shape != (m,) * 4:
        raise DimensionError(f"reduced Hamiltonian must be {(m,) * 4}, got {k.shape}")
    return 0.5 * float(np.einsum("abcd,abcd->", g2.tensor(), k))
