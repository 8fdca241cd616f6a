"""Tree sums: bare eps-series, dressed approximants and their re-expansion in eps."""
from __future__ import annotations

import numpy as np

from ..fourier_algebra import EpsSeries, SystemSpec, TrigPoly
from ..freq_diophantine import ScaleSequence
from ..lindstedt_recursion import psi_grid
from .ring import Ring
from .selfenergy import PropagatorTable, SelfEnergyClusters
from .trees import TreeEnumerator
from .values import BarePropagators, TreeEvaluator


def formal_series(sys: SystemSpec, K: int, enumerator: TreeEnumerator | None = None) -> EpsSeries:
    """h through eps**K as a sum of bare values of formal trees."""
    en = enumerator or TreeEnumerator(sys, "formal")
    ring = Ring.numeric(1.0)
    ev = TreeEvaluator(sys, ring, BarePropagators(sys, ring))
    orders = [TrigPoly.zero(2, (sys.dim,))]
    for m in range(1, K + 1):
        terms = {}
        for nu, trees in sorted(en.subtrees(m).items()):
            acc = np.zeros(sys.dim, complex)
            for t in trees:
                acc += ev.line_value(t)[0]
            terms[nu] = acc
        orders.append(TrigPoly(terms, (sys.dim,), 2))
    return EpsSeries(orders, sys.dim)


def _resummed_modes(sys, seq, table: PropagatorTable, K: int, N: int | None):
    en = TreeEnumerator(sys, "resummed", seq, max_scale=N)
    ev = TreeEvaluator(sys, table.ring, table)
    out: dict[tuple, np.ndarray] = {}
    for m in range(1, K + 1):
        for nu, trees in sorted(en.subtrees(m).items()):
            for t in trees:
                v = ev.line_value(t)
                out[nu] = out[nu] + v if nu in out else v
    return out, en


def reexpand_in_eps(sys: SystemSpec, seq: ScaleSequence, K: int, scheme: str = "A", K_se: int | None = None,
                    clusters: SelfEnergyClusters | None = None) -> EpsSeries:
    """eps-expansion through eps**K of the dressed sum over resummed trees.

    With ``K_se >= K - 1`` (the default) every self-energy contribution that
    can reach order eps**K is kept and the result equals the bare series.
    """
    if K_se is None:
        K_se = max(K - 1, 2)
    ring = Ring.series(K)
    table = PropagatorTable(sys, seq, ring, scheme, K_se, clusters)
    vals, _ = _resummed_modes(sys, seq, table, K, None)
    orders = []
    for k in range(K + 1):
        terms = {nu: v[k] for nu, v in vals.items()}
        orders.append(TrigPoly(terms, (sys.dim,), 2))
    return EpsSeries(orders, sys.dim)


def approximant_h(sys: SystemSpec, seq: ScaleSequence, K: int, N: int, eta: float, scheme: str = "A",
                  K_se: int = 3, grid: int | None = 64, clusters: SelfEnergyClusters | None = None):
    """Dressed sum over resummed trees of order <= K with every line scale <= N.

    Returns the Fourier polynomial of h^(N) at ``eta`` and, when ``grid`` is
    given, its real samples on a grid x grid psi lattice (shape (grid, grid, d)).
    """
    if K < 1 or N < 0:
        raise ValueError("need K >= 1 and N >= 0")
    table = PropagatorTable(sys, seq, Ring.numeric(eta), scheme, K_se, clusters)
    vals, _ = _resummed_modes(sys, seq, table, K, N)
    poly = TrigPoly({nu: v[0] for nu, v in vals.items()}, (sys.dim,), 2)
    if grid is None:
        return poly, None
    return poly, np.real(poly.evaluate(psi_grid(grid)))
