"""Exact arithmetic over a prime field GF(q).

Scalars are plain ints in ``[0, q)``; vectors and matrices are numpy arrays
whose entries are canonical representatives.  Arrays use ``int64`` while
products of two elements plus accumulation cannot overflow, and fall back to
``object`` (Python ints) for larger moduli.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from sympy import isprime

# int64 stays exact for sums of up to 2**15 products of two elements below this.
_INT64_LIMIT = 1 << 24


class FieldError(ValueError):
    pass


class ZeroInverseError(FieldError, ZeroDivisionError):
    pass


class SingularMatrixError(FieldError):
    pass


class DimensionError(FieldError):
    pass


@dataclass(frozen=True)
class ColumnSpaceSolver:
    """Linear form of a row reduction of ``M``.

    ``M @ x == y`` is solvable iff ``checks @ y == 0``; the solution with free
    variables set to zero is ``proj @ y``.
    """

    proj: np.ndarray
    checks: np.ndarray
    pivots: tuple[int, ...]
    q: int

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solve(self, y) -> Optional[np.ndarray]:
        y = np.asarray(y) % self.q
        if np.any(self.checks.dot(y) % self.q):
            return None
        return self.proj.dot(y) % self.q


@dataclass(frozen=True)
class PrimeField:
    q: int
    dtype: type = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or not isprime(int(self.q)):
            raise FieldError(f"modulus {self.q!r} is not prime")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "dtype", np.int64 if self.q < _INT64_LIMIT else object)

    def __call__(self, values) -> np.ndarray:
        """Canonical array of ``values`` reduced mod q."""
        if self.dtype is object:
            arr = np.array(values, dtype=object)
            return np.vectorize(lambda v: int(v) % self.q, otypes=[object])(arr) if arr.size else arr
        return np.asarray(values, dtype=np.int64) % self.q

    def zeros(self, shape) -> np.ndarray:
        out = np.zeros(shape, dtype=self.dtype)
        if self.dtype is object:
            out[...] = 0
        return out

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = 1
        return out

    def inv(self, a: int) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroInverseError(f"0 has no inverse mod {self.q}")
        return pow(a, -1, self.q)

    def power(self, a: int, e: int) -> int:
        return pow(int(a) % self.q, e, self.q)

    def matmul(self, a, b) -> np.ndarray:
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape[-1] != b.shape[0]:
            raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
        return a.dot(b) % self.q

    def row_reduce(self, m) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
        """Gauss-Jordan elimination of ``m`` with first-nonzero pivoting.

        Returns ``(rref, transform, pivots)`` with ``transform @ m == rref``.
        """
        m = self(m)
        if m.ndim != 2:
            raise DimensionError("row_reduce expects a matrix")
        rows, cols = m.shape
        aug = np.concatenate([m, self.identity(rows)], axis=1)
        pivots: list[int] = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nonzero = np.nonzero(aug[r:, c])[0]
            if nonzero.size == 0:
                continue
            p = r + int(nonzero[0])
            if p != r:
                aug[[r, p]] = aug[[p, r]]
            aug[r] = aug[r] * self.inv(aug[r, c]) % self.q
            factors = aug[:, c].copy()
            factors[r] = 0
            aug = (aug - np.outer(factors, aug[r])) % self.q
            pivots.append(c)
            r += 1
        return aug[:, :cols], aug[:, cols:], tuple(pivots)

    def mat_inv(self, m) -> np.ndarray:
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"cannot invert non-square shape {m.shape}")
        _, transform, pivots = self.row_reduce(m)
        if len(pivots) < m.shape[0]:
            raise SingularMatrixError(f"matrix is singular mod {self.q}")
        return transform

    def colspace_solver(self, m) -> ColumnSpaceSolver:
        m = np.asarray(m)
        _, transform, pivots = self.row_reduce(m)
        proj = self.zeros((m.shape[1], m.shape[0]))
        for i, c in enumerate(pivots):
            proj[c] = transform[i]
        return ColumnSpaceSolver(proj, transform[len(pivots):], pivots, self.q)

    def solve_in_colspace(self, m, y) -> Optional[np.ndarray]:
        """Some ``x`` with ``m @ x == y``, or None when ``y`` is outside the column space."""
        m = np.asarray(m)
        if m.shape[0] != len(y):
            raise DimensionError(f"matrix has {m.shape[0]} rows, vector has {len(y)}")
        return self.colspace_solver(m).solve(self(y))

    def vandermonde(self, points: Sequence[int], ncols: int) -> np.ndarray:
        return self([[pow(int(p), j, self.q) for j in range(ncols)] for p in points])
