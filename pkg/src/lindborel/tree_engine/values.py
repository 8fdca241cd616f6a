"""Tree values for a given propagator assignment.

The line leaving node v carries ``u_v = g(momentum) @ w_v`` with

    w_v = (1/p!) sum_{mu} c_{nu_v, mu} e^{i mu.beta0} (i kappa) prod_j (i kappa . u_j),

``kappa = (nu_v, mu)`` and ``u_j`` the values of the child lines.  The hole of a
self-energy cluster carries the identity, which turns values along the path
into matrices.
"""
from __future__ import annotations

import math

import numpy as np

from ..fourier_algebra import SystemSpec
from .ring import Ring
from .trees import ZERO, Node


class BarePropagators:
    """eps/x^2 on nonzero momenta, the constant zero-momentum block otherwise."""

    def __init__(self, sys: SystemSpec, ring: Ring):
        self.sys = sys
        self.ring = ring
        self._cache: dict = {}

    def __call__(self, nu) -> np.ndarray:
        nu = tuple(nu)
        g = self._cache.get(nu)
        if g is None:
            if nu == ZERO:
                g = self.ring.const(self.sys.g_minus1)
            else:
                x = float(self.sys.omega @ np.array(nu, float))
                g = self.ring.eps_times(self.ring.const(np.eye(self.sys.dim) / (x * x)))
            self._cache[nu] = g
        return g


class TreeEvaluator:
    """Memoized values of shared subtrees under one propagator assignment.

    ``propagator(nu)`` returns a ring array of shape (L, d, d).
    """

    def __init__(self, sys: SystemSpec, ring: Ring, propagator):
        self.sys = sys
        self.ring = ring
        self.propagator = propagator
        self._memo: dict[int, np.ndarray] = {}
        self._keep: list[Node] = []
        d = sys.dim
        self._hole = ring.const(np.eye(d))

    def node_factor(self, node: Node) -> np.ndarray:
        """w_v as a ring array of shape (L, d) or (L, d, d) when the hole is below."""
        ring = self.ring
        child_vals = [self.line_value(c) for c in node.children]
        inv_fact = 1.0 / math.factorial(node.p)
        out = None
        for ik, c in self.sys.node_table[node.mode]:
            prod = None
            for u in child_vals:
                s = np.einsum("ld...,d->l...", u, ik)
                prod = s if prod is None else ring.mul(prod, s)
            if prod is None:
                prod = ring.const(1.0)
            # (L, d, *hole) = (L, 1, *hole) * (d,)
            term = (c * inv_fact) * prod[:, None, ...] * ik.reshape((1, -1) + (1,) * (prod.ndim - 1))
            out = term if out is None else out + term
        return out

    def line_value(self, node: Node) -> np.ndarray:
        if node.mode is None:
            return self._hole
        key = id(node)
        v = self._memo.get(key)
        if v is None:
            w = self.node_factor(node)
            v = self.ring.matmul(self.propagator(node.momentum), w)
            self._memo[key] = v
            self._keep.append(node)
        return v

    def cluster_matrix(self, top: Node) -> np.ndarray:
        """Linear map from the hole to the factor of the topmost node (no exiting propagator)."""
        return self.node_factor(top)


def tree_value(node: Node, sys: SystemSpec, propagator=None, ring: Ring | None = None, eta=None) -> np.ndarray:
    """Value of one tree, a (2+s)-vector.

    Without a propagator the bare assignment is used; the result is then the
    coefficient of eps**order (``eta`` None) or the value at ``eta``.
    """
    if ring is None:
        ring = Ring.numeric(1.0 if eta is None else eta)
    if propagator is None:
        propagator = BarePropagators(sys, ring)
    return ring.value(TreeEvaluator(sys, ring, propagator).line_value(node))
