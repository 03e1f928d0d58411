"""Container for the matrix coefficients of the vector three-term recurrence

    x_i p_n(x) = B_{n+1,i} p_{n+1}(x) + A_{n+1,i} p_n(x) + B_{n,i}^T p_{n-1}(x)

where p_n stacks an orthonormal basis of the exact-degree-n space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _copy_nested(tables):
    return [None if row is None else [np.array(m) for m in row] for row in tables]


@dataclass
class RecurrenceData:
    """Recurrence matrices through degree ``max_degree``.

    ``A[n][i]`` is the symmetric (r_{n-1}, r_{n-1}) coefficient of p_{n-1}
    and ``B[n][i]`` the (r_{n-1}, r_n) degree-raising coefficient, for
    n = 1..max_degree and coordinates i = 0..d-1 (entry 0 of each list is
    None).  ``lam[n]``, when present, is the diagonal of the stacked
    raising Gram sum_i B[n][i]^T B[n][i]; its presence marks canonical
    form (diagonal ordered non-increasing).  ``index_order[n]`` optionally
    records which multi-index labels each basis position (tensor-product
    construction only).
    """

    d: int
    max_degree: int
    A: list
    B: list
    lam: list | None = None
    index_order: list | None = field(default=None, repr=False)

    def r(self, n: int) -> int:
        if n < 0:
            return 0
        return math.comb(n + self.d - 1, n)

    @property
    def is_canonical(self) -> bool:
        return self.lam is not None

    def stacked_raising(self, n: int) -> np.ndarray:
        """Vertical stack of the d raising matrices at degree n, shape
        (d * r_{n-1}, r_n)."""
        return np.vstack(self.B[n])

    def raising_gram(self, n: int) -> np.ndarray:
        """sum_i B[n][i]^T B[n][i], the (r_n, r_n) stacked raising Gram."""
        out = np.zeros((self.r(n), self.r(n)))
        for mat in self.B[n]:
            out += mat.T @ mat
        return out

    def copy(self) -> "RecurrenceData":
        return RecurrenceData(
            d=self.d,
            max_degree=self.max_degree,
            A=_copy_nested(self.A),
            B=_copy_nested(self.B),
            lam=None if self.lam is None else [None if v is None else np.array(v)
                                               for v in self.lam],
            index_order=None if self.index_order is None
            else [np.array(v) for v in self.index_order],
        )

    def validate_shapes(self):
        if len(self.A) != self.max_degree + 1 or len(self.B) != self.max_degree + 1:
            raise ValueError("coefficient tables must have max_degree + 1 rows")
        for n in range(1, self.max_degree + 1):
            if len(self.A[n]) != self.d or len(self.B[n]) != self.d:
                raise ValueError(f"degree {n}: expected {self.d} coordinate matrices")
            for i in range(self.d):
                if self.A[n][i].shape != (self.r(n - 1), self.r(n - 1)):
                    raise ValueError(f"A[{n}][{i}] has shape {self.A[n][i].shape}")
                if self.B[n][i].shape != (self.r(n - 1), self.r(n)):
                    raise ValueError(f"B[{n}][{i}] has shape {self.B[n][i].shape}")
