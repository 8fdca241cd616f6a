"""Self-energy clusters, self-energy matrices and dressed propagators.

A self-energy cluster for an entering momentum nu is stored as a tree whose
single distinguished leaf (the hole) stands for the entering line.  Its nodes
carry modes summing to zero, every internal line lies on a scale at most
``cap``, no line on the path from the hole to the top has zero momentum, and
it contains no smaller self-energy cluster.

Two dressing schemes are provided.

``"A"``
    a line of scale n gets ``eps (x^2 + M_n(x))^-1`` where ``M_n`` sums
    ``eps M0`` and the values of self-energy clusters with internal scales
    below n, each evaluated with the dressed propagators of its own lines.
``"B"``
    start from ``eps (x^2 + eps M0)^-1`` on every line and repeatedly rebuild
    all self-energy matrices from the previous propagators, until the
    iteration stops changing the matrices (it is stationary after as many
    steps as the scale of the line).
"""
from __future__ import annotations

import numpy as np

from ..fourier_algebra import SystemSpec
from ..freq_diophantine import ScaleSequence
from .ring import Ring
from .trees import ZERO, Node, ScaleMap, TreeEnumerator, _add
from .values import TreeEvaluator


class TruncationExceeded(ValueError):
    """Self-energy truncation below the first order at which clusters exist."""


class SingularDenominator(ArithmeticError):
    pass


class SelfEnergyClusters:
    """Enumeration of self-energy clusters by entering momentum, scale cap and order.

    The order of a cluster is its number of internal lines with nonzero
    momentum; its value is then of order eps**(order + 1).
    """

    def __init__(self, sys: SystemSpec, seq: ScaleSequence):
        self.sys = sys
        self.seq = seq
        self.scale_of = ScaleMap(sys, seq)
        self._hanging: dict[int, TreeEnumerator] = {}
        self._holetrees: dict[tuple, dict[tuple, list[Node]]] = {}
        self._tops: dict[tuple, list[Node]] = {}
        self._holes: dict[tuple, Node] = {}

    def hanging(self, cap: int) -> TreeEnumerator:
        en = self._hanging.get(cap)
        if en is None:
            en = TreeEnumerator(self.sys, "resummed", self.seq, max_scale=cap)
            self._hanging[cap] = en
        return en

    def hole(self, nu) -> Node:
        nu = tuple(nu)
        h = self._holes.get(nu)
        if h is None:
            h = Node(None, (), nu, 0, -1, -1, True)
            self._holes[nu] = h
        return h

    def _with_hole(self, nu, cap: int, j: int):
        """(hole child, regular forest, position) combinations with total order j."""
        en = self.hanging(cap)
        hole_children = [(0, [self.hole(nu)])]
        for jh in range(1, j + 1):
            sub = self.holetrees(nu, cap, jh)
            hole_children.append((jh, [t for k in sorted(sub) for t in sub[k]]))
        for jh, hs in hole_children:
            mr = j - jh
            for q in range(0, mr + 1):
                forest = en.forests(q, mr)
                if not forest:
                    continue
                for h in hs:
                    for trees, mom in forest:
                        base = _add(h.momentum, mom)
                        for pos in range(q + 1):
                            yield trees[:pos] + (h,) + trees[pos:], base

    def holetrees(self, nu, cap: int, j: int) -> dict[tuple, list[Node]]:
        """Path subtrees containing the hole, with j nonzero lines including their own."""
        key = (tuple(nu), cap, j)
        if key in self._holetrees:
            return self._holetrees[key]
        en = self.hanging(cap)
        out: dict[tuple, list[Node]] = {}
        for mode in en.node_modes:
            for children, mom in self._with_hole(nu, cap, j - 1):
                momentum = _add(mode, mom)
                if momentum == ZERO:
                    continue
                if mode == ZERO and len(children) == 1:
                    continue
                node = en.make_node(mode, children, momentum)
                if node is not None:
                    out.setdefault(momentum, []).append(node)
        self._holetrees[key] = out
        return out

    def clusters(self, nu, cap: int, j: int) -> list[Node]:
        """Top nodes of the self-energy clusters of order j (exit momentum equal to nu)."""
        nu = tuple(nu)
        key = (nu, cap, j)
        if key in self._tops:
            return self._tops[key]
        out = []
        if cap >= 0 and j >= 1 and nu != ZERO:
            n = self.scale_of(nu)
            for mode in sorted(self.sys.node_table):
                for children, mom in self._with_hole(nu, cap, j):
                    if _add(mode, mom) != nu:
                        continue
                    if mode == ZERO and len(children) == 1:
                        continue
                    out.append(Node(mode, children, nu, j, n, max(c.maxscale for c in children), True))
        self._tops[key] = out
        return out

    def count(self, nu, cap: int, jmax: int) -> int:
        return sum(len(self.clusters(nu, cap, j)) for j in range(1, jmax + 1))


def self_energy_value(top: Node, evaluator: TreeEvaluator) -> np.ndarray:
    """V_T = -eps * (map from the hole to the top node factor), shape (L, d, d)."""
    return -evaluator.ring.eps_times(evaluator.cluster_matrix(top))


class PropagatorTable:
    """Dressed propagators and self-energy matrices for one ring and scheme.

    Parameters
    ----------
    sys : SystemSpec
    seq : ScaleSequence
    ring : Ring
        ``Ring.numeric(eta)`` for values at fixed eta, ``Ring.series(K)`` for
        eps-expansions.
    scheme : {"A", "B"}
    K_se : int
        Highest eps order kept in a self-energy value (clusters with at most
        K_se - 1 internal nonzero lines).
    """

    def __init__(self, sys: SystemSpec, seq: ScaleSequence, ring: Ring, scheme: str = "A", K_se: int = 3,
                 clusters: SelfEnergyClusters | None = None, tol: float = 1e-14):
        scheme = scheme.upper()
        if scheme not in ("A", "B"):
            raise ValueError(f"unknown scheme {scheme!r}")
        if K_se < 2:
            raise TruncationExceeded("self-energy clusters start at order eps**2; K_se must be at least 2")
        self.sys = sys
        self.seq = seq
        self.ring = ring
        self.scheme = scheme
        self.K_se = K_se
        self.tol = tol
        self.clusters = clusters or SelfEnergyClusters(sys, seq)
        self.scale_of = self.clusters.scale_of
        self._eps_M0 = ring.eps_times(ring.const(sys.M0_full))
        self._gm1 = ring.const(sys.g_minus1)
        self._g: dict = {}
        self._M: dict = {}
        self._evaluators: dict = {}
        self.iterations: dict[tuple, int] = {}

    # -- helpers ---------------------------------------------------------
    def x(self, nu) -> float:
        return float(self.sys.omega @ np.array(nu, float))

    def _evaluator(self, key) -> TreeEvaluator:
        ev = self._evaluators.get(key)
        if ev is None:
            if key == "A":
                prop = self.g
            else:
                k = key[1]
                prop = lambda nu, k=k: self.g_step(nu, k)  # noqa: E731
            ev = TreeEvaluator(self.sys, self.ring, prop)
            self._evaluators[key] = ev
        return ev

    def _sum_clusters(self, nu, cap: int, evaluator: TreeEvaluator) -> np.ndarray:
        M = self._eps_M0.copy()
        for j in range(1, self.K_se):
            for top in self.clusters.clusters(nu, cap, j):
                M = M + self_energy_value(top, evaluator)
        return M

    def _dress(self, nu, M) -> np.ndarray:
        x = self.x(nu)
        d = self.sys.dim
        A = M.copy()
        A[0] = A[0] + x * x * np.eye(d)
        if not self.ring.is_series:
            det = abs(np.linalg.det(A[0]))
            if det < 1e-14 * abs(x) ** (2 * d):
                raise SingularDenominator(f"x^2 + M is singular at nu = {nu}")
        return self.ring.eps_times(self.ring.inv(A))

    # -- scheme A --------------------------------------------------------
    def build_M(self, nu, n: int | None = None) -> np.ndarray:
        """Scheme A matrix M_n(x) for the divisor of ``nu`` (n defaults to its scale)."""
        nu = tuple(nu)
        scale = self.scale_of(nu)
        n = scale if n is None else n
        if n > scale:
            raise ValueError(f"n = {n} exceeds the scale {scale} of nu = {nu}")
        key = ("A", nu, n)
        M = self._M.get(key)
        if M is None:
            M = self._sum_clusters(nu, n - 1, self._evaluator("A"))
            self._M[key] = M
        return M

    # -- scheme B --------------------------------------------------------
    def M_step(self, nu, k: int) -> np.ndarray:
        """Scheme B matrix after k rebuilds."""
        nu = tuple(nu)
        key = ("B", nu, k)
        M = self._M.get(key)
        if M is None:
            if k == 0:
                M = self._eps_M0
            else:
                M = self._sum_clusters(nu, self.scale_of(nu) - 1, self._evaluator(("B", k - 1)))
            self._M[key] = M
        return M

    def g_step(self, nu, k: int) -> np.ndarray:
        nu = tuple(nu)
        if nu == ZERO:
            return self._gm1
        k = min(k, self.depth(nu))
        key = ("gB", nu, k)
        g = self._g.get(key)
        if g is None:
            g = self._dress(nu, self.M_step(nu, k))
            self._g[key] = g
        return g

    def depth(self, nu) -> int:
        """Number of scheme B rebuilds used for ``nu``: stop at the scale or when stationary."""
        nu = tuple(nu)
        if nu in self.iterations:
            return self.iterations[nu]
        n = max(self.scale_of(nu), 0)
        k = 0
        while k < n:
            prev = self.M_step(nu, k)
            nxt = self.M_step(nu, k + 1)
            k += 1
            if np.max(np.abs(nxt - prev)) < self.tol * max(1.0, np.max(np.abs(nxt))):
                break
        self.iterations[nu] = k
        return k

    def M(self, nu) -> np.ndarray:
        """Self-energy matrix used on a line of momentum nu."""
        nu = tuple(nu)
        if self.scheme == "A":
            return self.build_M(nu)
        return self.M_step(nu, self.depth(nu))

    # -- propagators -----------------------------------------------------
    def g(self, nu) -> np.ndarray:
        """Dressed propagator on a line of momentum nu, shape (L, d, d)."""
        nu = tuple(nu)
        if nu == ZERO:
            return self._gm1
        if self.scheme == "B":
            return self.g_step(nu, self.depth(nu))
        g = self._g.get(nu)
        if g is None:
            g = self._dress(nu, self.build_M(nu))
            self._g[nu] = g
        return g

    __call__ = g


def build_M(sys: SystemSpec, seq: ScaleSequence, nu, eta: float, *, n: int | None = None, scheme: str = "A",
            k: int | None = None, K_se: int = 3) -> np.ndarray:
    """Self-energy matrix at fixed eta: scheme A ``M_n`` or scheme B after k rebuilds."""
    table = PropagatorTable(sys, seq, Ring.numeric(eta), scheme, K_se)
    if scheme.upper() == "A":
        return table.build_M(nu, n)[0]
    return table.M_step(nu, table.depth(nu) if k is None else k)[0]


def dressed_propagator(sys: SystemSpec, seq: ScaleSequence, nu, eta: float, *, scheme: str = "A",
                       K_se: int = 3, n: int | None = None) -> np.ndarray:
    """eta^2 (x^2 + M)^-1 at fixed eta for the line momentum nu."""
    table = PropagatorTable(sys, seq, Ring.numeric(eta), scheme, K_se)
    nu = tuple(nu)
    if nu == ZERO:
        return sys.g_minus1.copy()
    if n is not None and scheme.upper() == "A":
        return table._dress(nu, table.build_M(nu, n))[0]
    return table.g(nu)[0]
