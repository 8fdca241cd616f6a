"""Order-by-order solution of the homologic equation.

The conjugation h = (a, b) solves ``(omega . d_psi)**2 h = -eps grad f(psi + a, beta0 + b)``.
On fast modes nu != 0 this is a division by ``-(omega . nu)**2``; the zero mode of
``b`` is fixed one order later by requiring that the averaged slow force vanish,
which is a linear solve with ``M0 = -d^2 f0(beta0)``.  The zero mode of ``a`` is
set to zero (the phase of psi is free).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier_algebra import EpsSeries, SystemSpec, TrigPoly, compose_f

OBSTRUCTION_TOL = 1e-10


class ObstructionNonzero(ArithmeticError):
    """Averaged fast-angle force does not vanish; the order cannot be solved."""


@dataclass
class ConjugationSeries:
    """h through order K together with the force series of the truncated h.

    ``force[k]`` is the eps**k coefficient of grad f(psi + a, beta0 + b) where h
    is the stored series (all orders, including the zero mode of b at order K).
    """

    sys: SystemSpec
    h: EpsSeries
    force: list[TrigPoly] = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.h.K

    def a(self, k: int) -> TrigPoly:
        return self.h.orders[k].component(slice(0, 2))

    def b(self, k: int) -> TrigPoly:
        return self.h.orders[k].component(slice(2, None))

    def coefficient(self, k: int, nu, gamma: int) -> complex:
        return complex(self.h.orders[k].coef(tuple(nu))[gamma])

    def eta_coefficients(self) -> list[float]:
        """Norms of the eta-graded coefficients (odd slots are zero)."""
        out = []
        for k, p in enumerate(self.h.orders):
            out.append(p.wiener_norm())
            if k < self.K:
                out.append(0.0)
        return out


def _zero_conjugation(sys: SystemSpec) -> ConjugationSeries:
    h = EpsSeries.zeros(0, sys.dim)
    force = compose_f(sys, h, 0).orders
    return ConjugationSeries(sys, h, force)


def _linear_shift(sys: SystemSpec, delta: np.ndarray) -> TrigPoly:
    """Change of the force when h is shifted by a constant vector ``delta``, to first order."""
    out = TrigPoly.zero(2, (sys.dim,))
    for k, c in sys.f.terms.items():
        kappa = np.array(k, float)
        ik = 1j * kappa
        amp = complex(c) * np.exp(1j * kappa[2:] @ sys.beta0)
        out = out + TrigPoly({k[:2]: amp * ik * (ik @ delta)}, (sys.dim,), 2)
    return out


def solve_order(sys: SystemSpec, partial: ConjugationSeries) -> ConjugationSeries:
    """Extend a conjugation solved through order k-1 by order k."""
    k = partial.K + 1
    d = sys.dim
    src = partial.force[k - 1]
    zero = (0, 0)
    avg = src.coef(zero)
    if np.max(np.abs(avg[:2]), initial=0.0) > OBSTRUCTION_TOL:
        raise ObstructionNonzero(f"order {k}: averaged fast force {avg[:2].tolist()}")

    omega = sys.omega
    terms = {}
    for nu, v in src.terms.items():
        if nu == zero:
            continue
        x = omega[0] * nu[0] + omega[1] * nu[1]
        terms[nu] = v / (x * x)
    hk = TrigPoly(terms, (d,), 2)

    orders = list(partial.h.orders) + [hk]
    h = EpsSeries(orders, d)
    force_k = compose_f(sys, h, k).orders[k]

    if sys.s:
        slow_avg = force_k.coef(zero)[2:]
        b0 = np.linalg.solve(sys.M0, slow_avg)
        delta = np.zeros(d, complex)
        delta[2:] = b0
        orders[k] = hk + TrigPoly({zero: delta}, (d,), 2)
        force_k = force_k + _linear_shift(sys, delta)
        h = EpsSeries(orders, d)
    return ConjugationSeries(sys, h, list(partial.force) + [force_k])


def solve_up_to(sys: SystemSpec, K: int) -> ConjugationSeries:
    """h through eps**K, computed order by order."""
    if K < 1:
        raise ValueError("K must be at least 1")
    out = _zero_conjugation(sys)
    for _ in range(K):
        out = solve_order(sys, out)
    return out


def psi_grid(n: int = 64) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    A, B = np.meshgrid(t, t, indexing="ij")
    return np.stack([A, B], axis=-1)


def residual_field(sys: SystemSpec, h: EpsSeries, eta: float, psi) -> np.ndarray:
    """R(psi) = (omega . d)^2 h + eta^2 grad f(psi + a, beta0 + b), real part."""
    eps = eta * eta
    omega = sys.omega
    hv = np.zeros(psi.shape[:-1] + (sys.dim,), complex)
    lap = np.zeros_like(hv)
    for k, p in enumerate(h.orders):
        if p.is_zero():
            continue
        modes = np.array(list(p.terms.keys()), float)
        coefs = np.array(list(p.terms.values())) * eps**k
        x = modes @ omega
        phase = np.exp(1j * psi @ modes.T)
        hv += phase @ coefs
        lap += phase @ (coefs * (-(x * x))[:, None])
    hv = hv.real
    phi = np.concatenate([psi, np.broadcast_to(sys.beta0, psi.shape[:-1] + (sys.s,))], axis=-1) + hv
    return lap.real + eps * sys.grad_f(phi)


def residual(sys: SystemSpec, h: ConjugationSeries | EpsSeries, eta: float, n: int = 64) -> float:
    """Sup over an n x n psi grid of the homologic residual of the truncated series."""
    series = h.h if isinstance(h, ConjugationSeries) else h
    R = residual_field(sys, series, eta, psi_grid(n))
    return float(np.max(np.abs(R)))
