"""Plain-text RDM files.

::

    RDMFIX-1 SPIN <L> <N>
    <a> <b> <c> <d> <value>        # every a<b, c<d, (a,b) <= (c,d)

    RDMFIX-1 DOCI <L> <N>
    <L rows of Pi>
    <L rows of D>

Values are written with 17 significant digits so a round trip is exact.
Blank lines and lines starting with ``#`` are ignored.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .rdm.doci import Doci2RDM
from .rdm.spin import Spin2RDM, pair_indices

MAGIC = "RDMFIX-1"
REPRESENTATIONS = ("SPIN", "DOCI")


class RdmFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _fmt(x: float) -> str:
    return "%.17g" % x


def dumps(x: Spin2RDM | Doci2RDM) -> str:
    if isinstance(x, Doci2RDM):
        lines = [f"{MAGIC} DOCI {x.L} {x.N}"]
        for m in (x.Pi, x.D):
            lines.extend(" ".join(_fmt(v) for v in row) for row in m)
        return "\n".join(lines) + "\n"
    if isinstance(x, Spin2RDM):
        lines = [f"{MAGIC} SPIN {x.L} {x.N}"]
        a, b = pair_indices(x.n_spin)
        k = a.size
        rows, cols = np.triu_indices(k)
        for i, j in zip(rows, cols):
            lines.append(f"{a[i]} {b[i]} {a[j]} {b[j]} {_fmt(x.matrix[i, j])}")
        return "\n".join(lines) + "\n"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _content_lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            yield n, s


def _float(tok: str, n: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise RdmFormatError(f"not a number: {tok!r}", n) from None
    if not np.isfinite(v):
        raise RdmFormatError(f"non-finite value {tok!r}", n)
    return v


def _header(n: int, line: str) -> tuple[str, int, int]:
    tok = line.split()
    if len(tok) != 4 or tok[0] != MAGIC:
        raise RdmFormatError(f"expected header '{MAGIC} <SPIN|DOCI> <L> <N>', got {line!r}", n)
    if tok[1] not in REPRESENTATIONS:
        raise RdmFormatError(f"unknown representation tag {tok[1]!r}", n)
    try:
        L, N = int(tok[2]), int(tok[3])
    except ValueError:
        raise RdmFormatError("L and N must be integers", n) from None
    if L < 1 or not 0 <= N <= 2 * L:
        raise RdmFormatError(f"invalid sizes L={L}, N={N}", n)
    return tok[1], L, N


def loads(text: str) -> Spin2RDM | Doci2RDM:
    lines = list(_content_lines(text))
    if not lines:
        raise RdmFormatError("empty file", 1)
    rep, L, N = _header(*lines[0])
    body = lines[1:]
    last = lines[-1][0]
    try:
        if rep == "DOCI":
            return _load_doci(body, L, N, last)
        return _load_spin(body, L, N, last)
    except RdmFormatError:
        raise
    except ValueError as exc:
        raise RdmFormatError(str(exc), lines[0][0]) from exc


def _load_doci(body, L: int, N: int, last: int) -> Doci2RDM:
    if len(body) < 2 * L:
        raise RdmFormatError(f"truncated DOCI payload: expected {2 * L} rows, found {len(body)}", last + 1)
    if len(body) > 2 * L:
        raise RdmFormatError("unexpected extra data after D", body[2 * L][0])
    mats = np.empty((2 * L, L))
    for r, (n, s) in enumerate(body):
        tok = s.split()
        if len(tok) != L:
            raise RdmFormatError(f"expected {L} values, got {len(tok)}", n)
        mats[r] = [_float(t, n) for t in tok]
    return Doci2RDM(L, N, mats[:L], mats[L:])


def _load_spin(body, L: int, N: int, last: int) -> Spin2RDM:
    m = 2 * L
    a, b = pair_indices(m)
    k = a.size
    pos = {(int(a[i]), int(b[i])): i for i in range(k)}
    mat = np.zeros((k, k))
    seen = np.zeros((k, k), dtype=bool)
    for n, s in body:
        tok = s.split()
        if len(tok) != 5:
            raise RdmFormatError(f"expected 'a b c d value', got {s!r}", n)
        try:
            idx = [int(t) for t in tok[:4]]
        except ValueError:
            raise RdmFormatError("indices must be integers", n) from None
        i, j = pos.get((idx[0], idx[1])), pos.get((idx[2], idx[3]))
        if i is None or j is None or i > j:
            raise RdmFormatError(f"non-canonical index tuple {tuple(idx)}", n)
        if seen[i, j]:
            raise RdmFormatError(f"duplicate entry {tuple(idx)}", n)
        seen[i, j] = True
        mat[i, j] = mat[j, i] = _float(tok[4], n)
    expected = k * (k + 1) // 2
    found = int(seen.sum())
    if found != expected:
        raise RdmFormatError(f"truncated SPIN payload: expected {expected} entries, found {found}", last + 1)
    return Spin2RDM(L, N, mat)


def read_rdm(path) -> Spin2RDM | Doci2RDM:
    return loads(Path(path).read_text())


def write_rdm(path, x: Spin2RDM | Doci2RDM) -> None:
    Path(path).write_text(dumps(x))
