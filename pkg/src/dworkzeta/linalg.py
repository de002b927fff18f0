"""Matrices over the tower Z_q[pi] mod p^N.

A tower matrix is stored as d = (p-1)a coordinate matrices over Z/p^N
(python-flint ``fmpz_mod_mat``), one per basis element pi^j theta^i.
Products expand bilinearly through the structure constants of the tower.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import flint

from .padic import TowerElem, TowerParams, _mul_coords


@lru_cache(maxsize=None)
def _ctx(P: int):
    return flint.fmpz_mod_ctx(P)


@lru_cache(maxsize=None)
def structure_constants(T: TowerParams) -> tuple[tuple[tuple[tuple[int, int], ...], ...], ...]:
    """For basis indices k, l: the nonzero (m, c) with b_k b_l = sum c b_m."""
    d = T.d
    out = []
    for k in range(d):
        row = []
        for l in range(d):
            x = [0] * d
            y = [0] * d
            x[k] = 1
            y[l] = 1
            prod = _mul_coords(T, x, y)
            row.append(tuple((m, c if c <= T.P // 2 else c - T.P) for m, c in enumerate(prod) if c))
        out.append(tuple(row))
    return tuple(out)


class TowerMatrix:
    __slots__ = ("T", "nrows", "ncols", "coords")

    def __init__(self, T: TowerParams, nrows: int, ncols: int, coords: list):
        self.T = T
        self.nrows = nrows
        self.ncols = ncols
        self.coords = coords

    @classmethod
    def zeros(cls, T: TowerParams, nrows: int, ncols: int) -> "TowerMatrix":
        ctx = _ctx(T.P)
        return cls(T, nrows, ncols, [flint.fmpz_mod_mat(nrows, ncols, ctx) for _ in range(T.d)])

    @classmethod
    def identity(cls, T: TowerParams, n: int) -> "TowerMatrix":
        ctx = _ctx(T.P)
        eye = [0] * (n * n)
        for i in range(n):
            eye[i * n + i] = 1
        coords = [flint.fmpz_mod_mat(n, n, eye, ctx)]
        coords += [flint.fmpz_mod_mat(n, n, ctx) for _ in range(T.d - 1)]
        return cls(T, n, n, coords)

    @classmethod
    def from_entries(cls, T: TowerParams, nrows: int, ncols: int,
                     entries: Mapping[tuple[int, int], TowerElem] | Iterable) -> "TowerMatrix":
        items = entries.items() if isinstance(entries, Mapping) else entries
        flat = [[0] * (nrows * ncols) for _ in range(T.d)]
        for (r, c), x in items:
            pos = r * ncols + c
            for k, v in enumerate(x.c):
                if v:
                    flat[k][pos] = v
        ctx = _ctx(T.P)
        return cls(T, nrows, ncols, [flint.fmpz_mod_mat(nrows, ncols, f, ctx) for f in flat])

    @classmethod
    def from_rows(cls, T: TowerParams, rows: Sequence[Sequence[TowerElem]]) -> "TowerMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        return cls.from_entries(T, nrows, ncols,
                                {(i, j): x for i, r in enumerate(rows) for j, x in enumerate(r)})

    def _check(self, other: "TowerMatrix") -> None:
        if other.T is not self.T:
            raise ValueError("matrices over different towers")

    def __add__(self, other: "TowerMatrix") -> "TowerMatrix":
        self._check(other)
        return TowerMatrix(self.T, self.nrows, self.ncols, [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "TowerMatrix") -> "TowerMatrix":
        self._check(other)
        return TowerMatrix(self.T, self.nrows, self.ncols, [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "TowerMatrix":
        return TowerMatrix(self.T, self.nrows, self.ncols, [-a for a in self.coords])

    def scale(self, x: TowerElem | int) -> "TowerMatrix":
        if isinstance(x, int):
            return TowerMatrix(self.T, self.nrows, self.ncols, [a * x for a in self.coords])
        return TowerMatrix.diagonal_scalar(self.T, x, self.nrows) @ self

    @classmethod
    def diagonal_scalar(cls, T: TowerParams, x: TowerElem, n: int) -> "TowerMatrix":
        return cls.from_entries(T, n, n, {(i, i): x for i in range(n)})

    def __matmul__(self, other: "TowerMatrix") -> "TowerMatrix":
        self._check(other)
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        T = self.T
        C = structure_constants(T)
        ctx = _ctx(T.P)
        out = [flint.fmpz_mod_mat(self.nrows, other.ncols, ctx) for _ in range(T.d)]
        nz_self = [k for k, m in enumerate(self.coords) if _nonzero(m)]
        nz_other = [l for l, m in enumerate(other.coords) if _nonzero(m)]
        for k in nz_self:
            for l in nz_other:
                prod = self.coords[k] * other.coords[l]
                for m, c in C[k][l]:
                    out[m] = out[m] + (prod if c == 1 else prod * c)
        return TowerMatrix(T, self.nrows, other.ncols, out)

    __mul__ = __matmul__

    def entry(self, r: int, c: int) -> TowerElem:
        return TowerElem(self.T, tuple(int(m[r, c]) for m in self.coords))

    def to_rows(self) -> list[list[TowerElem]]:
        tables = [[int(x) for x in m.entries()] for m in self.coords]
        out = []
        for r in range(self.nrows):
            row = []
            for c in range(self.ncols):
                pos = r * self.ncols + c
                row.append(TowerElem(self.T, tuple(t[pos] for t in tables)))
            out.append(row)
        return out

    def trace(self) -> TowerElem:
        vals = [0] * self.T.d
        for k, m in enumerate(self.coords):
            s = 0
            for i in range(min(self.nrows, self.ncols)):
                s += int(m[i, i])
            vals[k] = s % self.T.P
        return TowerElem(self.T, tuple(vals))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "TowerMatrix":
        rows, cols = list(rows), list(cols)
        ctx = _ctx(self.T.P)
        coords = []
        for m in self.coords:
            ent = m.entries()
            nc = self.ncols
            flat = [int(ent[r * nc + c]) for r in rows for c in cols]
            coords.append(flint.fmpz_mod_mat(len(rows), len(cols), flat, ctx))
        return TowerMatrix(self.T, len(rows), len(cols), coords)

    def valuation_table(self) -> list[list[int]]:
        """Entry valuations in pi-units (capped at N(p-1))."""
        return [[x.val_units() for x in row] for row in self.to_rows()]

    def min_val_units(self) -> int:
        best = self.T.max_units
        for row in self.to_rows():
            for x in row:
                v = x.val_units()
                if v < best:
                    best = v
        return best

    def is_zero(self) -> bool:
        return not any(_nonzero(m) for m in self.coords)

    def change_precision(self, T2: TowerParams) -> "TowerMatrix":
        ctx = _ctx(T2.P)
        coords = [flint.fmpz_mod_mat(self.nrows, self.ncols, [int(x) % T2.P for x in m.entries()], ctx)
                  for m in self.coords]
        return TowerMatrix(T2, self.nrows, self.ncols, coords)


def _nonzero(m) -> bool:
    return any(int(x) for x in m.entries())


def block(T: TowerParams, blocks: Sequence[Sequence[TowerMatrix | None]],
          row_sizes: Sequence[int], col_sizes: Sequence[int]) -> TowerMatrix:
    """Assemble a block matrix; ``None`` stands for a zero block."""
    nrows, ncols = sum(row_sizes), sum(col_sizes)
    entries = {}
    r0 = 0
    for bi, brow in enumerate(blocks):
        c0 = 0
        for bj, blk in enumerate(brow):
            if blk is not None:
                for r, row in enumerate(blk.to_rows()):
                    for c, x in enumerate(row):
                        if not x.is_zero():
                            entries[(r0 + r, c0 + c)] = x
            c0 += col_sizes[bj]
        r0 += row_sizes[bi]
    return TowerMatrix.from_entries(T, nrows, ncols, entries)
