"""Scale labels and the nested cluster structure of a labelled tree."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..freq_diophantine import FrequencyVector, ScaleSequence, mode_scale
from .trees import ZERO, DecoratedTree


@dataclass
class Cluster:
    """Maximal connected set of lines on scales <= n containing a line of scale n.

    ``lines`` are indices of the lines (= index of the node each line leaves);
    ``entering`` lines have their upper end in the cluster, ``exiting`` is the
    line leaving the topmost node (None when the root line is inside).
    """

    scale: int
    lines: frozenset[int]
    nodes: frozenset[int]
    entering: tuple[int, ...]
    exiting: int | None
    parent: int | None = None


@dataclass
class ClusterDecomposition:
    tree: DecoratedTree
    clusters: list[Cluster] = field(default_factory=list)

    def depth(self) -> int:
        """Length of the longest chain of nested clusters."""
        best = 0
        for i in range(len(self.clusters)):
            d, j = 0, i
            while j is not None:
                d += 1
                j = self.clusters[j].parent
            best = max(best, d)
        return best

    def self_energies(self) -> list[Cluster]:
        return [c for c in self.clusters if is_self_energy(c, self.tree)]


def _find(par, i):
    while par[i] != i:
        par[i] = par[par[i]]
        i = par[i]
    return i


def assign_scales_and_clusters(theta: DecoratedTree, seq: ScaleSequence, freq: FrequencyVector) -> ClusterDecomposition:
    """Relabel line scales from ``seq`` and build all clusters with their nesting."""
    theta.scale = [-1 if m == ZERO else mode_scale(freq, seq, m) for m in theta.momentum]
    n_lines = theta.n_lines
    out = ClusterDecomposition(theta)
    top = max(theta.scale, default=-1)
    for n in range(0, top + 1):
        par = list(range(n_lines))
        inside = [i for i in range(n_lines) if theta.scale[i] <= n]
        for i in inside:
            if theta.parent[i] >= 0:
                a, b = _find(par, i), _find(par, theta.parent[i])
                if a != b:
                    par[a] = b
        groups: dict[int, list[int]] = {}
        for i in inside:
            groups.setdefault(_find(par, i), []).append(i)
        for lines in groups.values():
            if max(theta.scale[i] for i in lines) != n:
                continue
            lines_set = frozenset(lines)
            nodes = set(lines)
            nodes.update(theta.parent[i] for i in lines if theta.parent[i] >= 0)
            entering = tuple(sorted(j for j in range(n_lines) if j not in lines_set and theta.parent[j] in nodes))
            exiting = [i for i in nodes if i not in lines_set]
            out.clusters.append(Cluster(n, lines_set, frozenset(nodes), entering, exiting[0] if exiting else None))
    # nesting: the smallest enclosing cluster of higher scale
    for i, c in enumerate(out.clusters):
        best = None
        for j, d in enumerate(out.clusters):
            if d.scale > c.scale and c.lines <= d.lines:
                if best is None or d.scale < out.clusters[best].scale:
                    best = j
        c.parent = best
    return out


def is_self_energy(T: Cluster, theta: DecoratedTree) -> bool:
    """One entering and one exiting line of equal momentum, no zero momentum on the path between."""
    if len(T.entering) != 1 or T.exiting is None:
        return False
    e = T.entering[0]
    if theta.momentum[e] != theta.momentum[T.exiting] or theta.momentum[e] == ZERO:
        return False
    v = theta.parent[e]
    while v != T.exiting:
        if theta.momentum[v] == ZERO:
            return False
        v = theta.parent[v]
    return True
