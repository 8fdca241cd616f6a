"""Rooted trees with mode labels, their enumeration and their DAG representation.

A tree is built from :class:`Node` objects.  Each node carries a fast mode
``nu_v`` from the support of f and an ordered tuple of child subtrees; the line
leaving the node carries the momentum ``sum of nu_w`` over the subtree.
Subtrees are shared between trees, so the collection of all trees of a given
order is a DAG and values can be memoized per node.

The order of a tree is its number of lines with nonzero momentum, which is the
power of eps in its bare value.

Two families are produced:

``formal``
    every tree except those with a zero-mode leaf (its factor is the gradient
    of the averaged potential at the base point, i.e. zero) and those with a
    zero-mode node whose single child line has zero momentum (that term is
    moved into the zero-momentum propagator).
``resummed``
    additionally drops every zero-mode node with one child (absorbed by the
    ``eps M0`` part of the dressed propagators) and every tree containing a
    self-energy cluster.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..fourier_algebra import SystemSpec
from ..freq_diophantine import ScaleSequence, mode_scale

ZERO = (0, 0)


@dataclass(frozen=True, eq=False)
class Node:
    """Root node of a subtree together with the line leaving it.

    ``mode`` is None for the hole of a self-energy cluster: a placeholder leaf
    standing for the entering line.
    """

    mode: tuple[int, int] | None
    children: tuple["Node", ...]
    momentum: tuple[int, int]
    order: int
    scale: int
    maxscale: int
    hole: bool = False

    @property
    def p(self) -> int:
        return len(self.children)

    def walk(self):
        """Pre-order traversal of nodes (hole excluded)."""
        if self.mode is None:
            return
        yield self
        for c in self.children:
            yield from c.walk()

    def n_nodes(self) -> int:
        return sum(1 for _ in self.walk())


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


class ScaleMap:
    """Scale labels of momenta, or a flat labelling (0 / -1) when no sequence is given."""

    def __init__(self, sys: SystemSpec, seq: ScaleSequence | None):
        self.sys = sys
        self.seq = seq

    def __call__(self, nu) -> int:
        if nu == ZERO:
            return -1
        if self.seq is None:
            return 0
        return mode_scale(self.sys.freq, self.seq, nu)


def self_energy_below(node: Node, scale_of) -> bool:
    """True if some cluster exited by the line leaving ``node`` is a self-energy cluster.

    For each scale n below the scale of that line, collect the lines of scale
    <= n reachable downwards from ``node``.  When their largest scale is n they
    form a cluster of scale n.  It is a self-energy cluster when exactly one line
    enters it, that line carries the same momentum as the exiting one, and no
    zero-momentum line lies on the path joining them.  The hole of a cluster
    under construction counts as an entering line above every internal scale.
    """
    top = node.scale
    if top <= 0:
        return False
    for n in range(top):
        internal_max = -2
        entering = []
        # stack of (node, zero_on_path) for nodes inside the cluster
        stack = [(node, False)]
        while stack and len(entering) <= 1:
            v, zero_path = stack.pop()
            for c in v.children:
                if c.mode is None:
                    entering.append((c, zero_path))
                    continue
                if c.scale <= n:
                    internal_max = max(internal_max, c.scale)
                    stack.append((c, zero_path or c.momentum == ZERO))
                else:
                    entering.append((c, zero_path))
        if internal_max != n or len(entering) != 1:
            continue
        c, zero_path = entering[0]
        if c.momentum == node.momentum and not zero_path:
            return True
    return False


class TreeEnumerator:
    """Memoized generator of subtrees by order and root momentum.

    Parameters
    ----------
    sys : SystemSpec
    mode : {"formal", "resummed"}
    seq : ScaleSequence, optional
        Needed for scale labels; without it every nonzero line has scale 0 and
        the resummed family reduces to dropping one-child zero-mode nodes.
    max_scale : int, optional
        Discard subtrees containing a line above this scale.
    """

    def __init__(self, sys: SystemSpec, mode: str = "formal", seq: ScaleSequence | None = None,
                 max_scale: int | None = None):
        if mode not in ("formal", "resummed"):
            raise ValueError(f"unknown tree family {mode!r}")
        self.sys = sys
        self.mode = mode
        self.seq = seq
        self.max_scale = max_scale
        self.scale_of = ScaleMap(sys, seq)
        self.node_modes = sorted(sys.node_table)
        self._sub: dict[int, dict[tuple, list[Node]]] = {0: {}}
        self._forest: dict[tuple[int, int], list[tuple[tuple[Node, ...], tuple[int, int]]]] = {}

    def _admissible(self, mode, children, momentum) -> bool:
        if mode == ZERO:
            if not children:
                return False
            if len(children) == 1 and (self.mode == "resummed" or momentum == ZERO):
                return False
        return True

    def make_node(self, mode, children, momentum) -> Node | None:
        scale = self.scale_of(momentum)
        if self.max_scale is not None and scale > self.max_scale:
            return None
        order = sum(c.order for c in children) + (momentum != ZERO)
        maxscale = max([scale] + [c.maxscale for c in children])
        hole = any(c.hole for c in children)
        node = Node(mode, tuple(children), momentum, order, scale, maxscale, hole)
        if self.mode == "resummed" and self.seq is not None and self_energy_below(node, self.scale_of):
            return None
        return node

    def subtrees(self, m: int) -> dict[tuple[int, int], list[Node]]:
        """All subtrees of order exactly m, keyed by root momentum."""
        if m in self._sub:
            return self._sub[m]
        out: dict[tuple, list[Node]] = {}

        def emit(mode, children, momentum):
            if self._admissible(mode, children, momentum):
                node = self.make_node(mode, children, momentum)
                if node is not None:
                    out.setdefault(momentum, []).append(node)

        # nonzero root momentum: the children carry order m-1
        for mode in self.node_modes:
            for p in range(0, m):
                for children, mom in self.forests(p, m - 1):
                    momentum = _add(mode, mom)
                    if momentum != ZERO:
                        emit(mode, children, momentum)
        # zero root momentum: the children carry order m; a single child is
        # one of the nonzero-momentum subtrees just built
        single = [t for k in sorted(out) for t in out[k]]
        for mode in self.node_modes:
            for t in single:
                if _add(mode, t.momentum) == ZERO:
                    emit(mode, (t,), ZERO)
            for p in range(2, m + 1):
                for children, mom in self.forests(p, m):
                    if _add(mode, mom) == ZERO:
                        emit(mode, children, ZERO)
        self._sub[m] = out
        return out

    def forests(self, p: int, m: int):
        """Ordered p-tuples of subtrees with total order m, with their momentum sum."""
        key = (p, m)
        if key in self._forest:
            return self._forest[key]
        if p == 0:
            res = [((), ZERO)] if m == 0 else []
        else:
            res = []
            for m1 in range(1, m - (p - 1) + 1):
                firsts = [t for lst in self.subtrees(m1).values() for t in lst]
                rest = self.forests(p - 1, m - m1)
                for t in firsts:
                    for tail, mom in rest:
                        res.append(((t,) + tail, _add(t.momentum, mom)))
        self._forest[key] = res
        return res

    def trees(self, m: int, nu=None) -> list[Node]:
        sub = self.subtrees(m)
        if nu is None:
            return [t for k in sorted(sub) for t in sub[k]]
        return list(sub.get(tuple(nu), []))

    def momenta(self, m: int) -> list[tuple[int, int]]:
        return sorted(self.subtrees(m))


def symmetry_weight(node: Node) -> float:
    """Product of 1/p_v! over the nodes of a tree."""
    w = 1.0
    for v in node.walk():
        w /= math.factorial(v.p)
    return w


# ----------------------------------------------------------------------
# explicit labelled form


@dataclass
class DecoratedTree:
    """Flat labelled form of a tree.

    Nodes are listed in pre-order; ``parent[i]`` is the index of the node the
    line leaving node i points to (-1 for the root).  Line i is the line leaving
    node i; ``number[i]`` is its label in 1..n.  Component labels are contracted
    in the value, and ``root_gamma`` only selects the reported component.
    """

    modes: list[tuple[int, int]]
    parent: list[int]
    momentum: list[tuple[int, int]]
    scale: list[int]
    number: list[int]
    root_gamma: int | None = None
    children: list[list[int]] = field(default_factory=list)

    @property
    def n_lines(self) -> int:
        return len(self.modes)

    def to_json(self) -> dict:
        return {
            "modes": [list(m) for m in self.modes],
            "parent": self.parent,
            "momentum": [list(m) for m in self.momentum],
            "scale": self.scale,
            "number": self.number,
            "root_gamma": self.root_gamma,
        }

    def check_conservation(self) -> bool:
        for i in range(self.n_lines):
            total = self.modes[i]
            stack = list(self.children[i])
            while stack:
                j = stack.pop()
                total = _add(total, self.modes[j])
                stack.extend(self.children[j])
            if total != self.momentum[i]:
                return False
        return True


def flatten(node: Node, root_gamma: int | None = None) -> DecoratedTree:
    modes, parent, momentum, scale, children = [], [], [], [], []

    def visit(v: Node, par: int):
        i = len(modes)
        modes.append(v.mode)
        parent.append(par)
        momentum.append(v.momentum)
        scale.append(v.scale)
        children.append([])
        if par >= 0:
            children[par].append(i)
        for c in v.children:
            if c.mode is not None:
                visit(c, i)

    visit(node, -1)
    return DecoratedTree(modes, parent, momentum, scale, list(range(1, len(modes) + 1)), root_gamma, children)
