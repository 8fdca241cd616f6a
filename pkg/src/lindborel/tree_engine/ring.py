"""Scalar rings for tree values.

Every value is an array whose leading axis runs over powers of eps.  In numeric
mode the axis has length one and ``eps_times`` multiplies by eta**2; in series
mode it has length K+1 and ``eps_times`` shifts by one order.
"""
from __future__ import annotations

import numpy as np


class Ring:
    def __init__(self, L: int, eps: float | None):
        self.L = L
        self.eps = eps

    @classmethod
    def numeric(cls, eta: float) -> "Ring":
        return cls(1, float(eta) ** 2)

    @classmethod
    def series(cls, K: int) -> "Ring":
        return cls(K + 1, None)

    @property
    def is_series(self) -> bool:
        return self.eps is None

    def const(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        out = np.zeros((self.L,) + a.shape, complex)
        out[0] = a
        return out

    def eps_times(self, A: np.ndarray) -> np.ndarray:
        if not self.is_series:
            return A * self.eps
        out = np.zeros_like(A)
        out[1:] = A[:-1]
        return out

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Elementwise product with broadcasting on trailing axes."""
        if self.L == 1:
            return A * B
        shape = np.broadcast_shapes(A.shape[1:], B.shape[1:])
        out = np.zeros((self.L,) + shape, complex)
        nzA = [i for i in range(self.L) if A[i].any()]
        nzB = [j for j in range(self.L) if B[j].any()]
        for i in nzA:
            for j in nzB:
                if i + j < self.L:
                    out[i + j] += A[i] * B[j]
        return out

    def matmul(self, G: np.ndarray, W: np.ndarray) -> np.ndarray:
        """Series matrix product ``G @ W``, W with one or two trailing axes."""
        if self.L == 1:
            return np.matmul(G, W) if W.ndim == 3 else np.einsum("lab,lb->la", G, W)
        out = np.zeros((self.L, G.shape[1]) + W.shape[2:], complex)
        nzG = [i for i in range(self.L) if G[i].any()]
        nzW = [j for j in range(self.L) if W[j].any()]
        for i in nzG:
            for j in nzW:
                if i + j < self.L:
                    out[i + j] += G[i] @ W[j]
        return out

    def inv(self, A: np.ndarray) -> np.ndarray:
        """Inverse of a matrix series with invertible constant term."""
        B0 = np.linalg.inv(A[0])
        out = np.zeros_like(A)
        out[0] = B0
        for n in range(1, self.L):
            acc = np.zeros_like(B0)
            for i in range(1, n + 1):
                acc += A[i] @ out[n - i]
            out[n] = -B0 @ acc
        return out

    def value(self, A: np.ndarray) -> np.ndarray:
        """Collapse to a number: the only entry in numeric mode, the coefficient list otherwise."""
        return A[0] if self.L == 1 else A
