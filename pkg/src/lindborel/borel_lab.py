"""Borel transforms of eta-series, Laplace sums, vertical-line inversion and growth fits.

Series are graded in eta: ``sum_k a_k eta**k`` with ``a_0 = 0``.  The transform
maps ``eta**k`` to ``p**(k-1)/(k-1)!``, so a truncated series becomes a
:class:`BorelPoly` with the same coefficient list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss


class TailNotNegligible(ValueError):
    pass


class ContourTruncationTooSmall(ValueError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass
class BorelPoly:
    """``F_B(p) = sum_{k=1}^{K} c_k p**(k-1)/(k-1)!``; ``coeffs[k-1] = c_k``.

    Coefficients may carry trailing axes (vector-valued series).
    """

    coeffs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)

    @property
    def K(self) -> int:
        return len(self.coeffs)

    def __call__(self, p):
        """Evaluate at p (scalar or array) by Horner's rule in the factorial basis."""
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape + self.coeffs.shape[1:], dtype=np.result_type(self.coeffs, float))
        for k in range(self.K, 0, -1):
            out = out * (p / k).reshape(p.shape + (1,) * (self.coeffs.ndim - 1)) + self.coeffs[k - 1]
        return out

    def monomials(self) -> np.ndarray:
        """Coefficients in the power basis p**j."""
        fact = np.array([math.factorial(j) for j in range(self.K)], float)
        return self.coeffs / fact.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))

    def laplace_exact(self, eta: float):
        """Integral over the whole half-line: the original partial sum."""
        return sum(self.coeffs[k - 1] * eta**k for k in range(1, self.K + 1))


def borel_transform(series) -> BorelPoly:
    """Coefficient map for eta-coefficients ``series[k]`` of ``eta**k`` (series[0] must vanish)."""
    a = np.asarray(series)
    if len(a) == 0:
        return BorelPoly(np.zeros(0))
    if np.any(a[0] != 0):
        raise ValueError("the series must start at eta**1")
    return BorelPoly(a[1:].copy())


def borel_convolve(F: BorelPoly, G: BorelPoly) -> BorelPoly:
    """Transform of the product series, from ``(p^a/a!) * (p^b/b!) = p^(a+b+1)/(a+b+1)!``.

    Truncated where the product is fully determined: K = min(K_F, K_G) + 1.
    """
    K = min(F.K, G.K) + 1
    if F.K == 0 or G.K == 0:
        return BorelPoly(np.zeros(0))
    shape = np.broadcast_shapes(F.coeffs.shape[1:], G.coeffs.shape[1:])
    out = np.zeros((K,) + shape, dtype=np.result_type(F.coeffs, G.coeffs))
    # term c_k carries p^(k-1)/(k-1)!; a = i-1, b = j-1 gives index a+b+2 = i+j
    for i in range(1, F.K + 1):
        for j in range(1, G.K + 1):
            if i + j <= K:
                out[i + j - 1] += F.coeffs[i - 1] * G.coeffs[j - 1]
    return BorelPoly(out)


def series_product(a, b):
    """Cauchy product of two eta-coefficient lists, truncated at the shorter length."""
    n = min(len(a), len(b))
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]


# ----------------------------------------------------------------------
# Laplace sum


@dataclass
class LaplaceSum:
    value: complex
    p_max: float
    tail_bound: float
    quad_error: float

    def __float__(self):
        return float(np.real(self.value))

    def __complex__(self):
        return complex(self.value)


def _poly_bound(F: BorelPoly) -> tuple[float, float]:
    """(C, rho) with |F_B(p)| <= C e^(rho p) for p >= 0."""
    m = float(np.max(np.abs(F.coeffs))) if F.K else 0.0
    return m, 1.0


def laplace_sum(F, eta: float, p_max: float | None = None, *, bound: tuple[float, float] | None = None,
                tol: float = 1e-12, dps: int = 30) -> LaplaceSum:
    """``int_0^p_max exp(-p/eta) F_B(p) dp`` by tanh-sinh quadrature.

    Parameters
    ----------
    F : BorelPoly or callable
        Scalar Borel function.
    eta : float
    p_max : float, optional
        Upper limit; chosen from ``bound`` when omitted.
    bound : (C, rho), optional
        Growth bound ``|F_B(p)| <= C exp(rho p)``; derived automatically for a
        BorelPoly and required for callables.
    tol : float
        Admissible tail beyond p_max.

    Raises
    ------
    TailNotNegligible
        When the tail bound at p_max exceeds ``tol``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if bound is None:
        if isinstance(F, BorelPoly):
            bound = _poly_bound(F)
        else:
            raise ValueError("a growth bound (C, rho) is required for a callable integrand")
    C, rho = bound
    decay = 1.0 / eta - rho
    if decay <= 0:
        raise TailNotNegligible(f"growth rate {rho} is not below 1/eta = {1 / eta}")

    def tail(P):
        return C * math.exp(-decay * P) / decay if C > 0 else 0.0

    if p_max is None:
        p_max = eta
        while tail(p_max) >= tol:
            p_max *= 1.5
    if tail(p_max) >= tol:
        raise TailNotNegligible(f"tail bound {tail(p_max):.3e} at p_max = {p_max} exceeds {tol:.1e}")

    if isinstance(F, BorelPoly):
        mono = [complex(c) for c in F.monomials()]

        def fb(p):
            return mpmath.polyval(mono[::-1], p)
    else:
        fb = F
    with mpmath.workdps(dps):
        inv = 1 / mpmath.mpf(eta)
        pts = [mpmath.mpf(0)]
        step = mpmath.mpf(eta)
        while pts[-1] + step < p_max:
            pts.append(pts[-1] + step)
            step *= 2
        pts.append(mpmath.mpf(p_max))
        val, err = mpmath.quad(lambda p: mpmath.exp(-p * inv) * fb(p), pts, error=True)
        value = complex(val)
        qerr = float(abs(err))
    if abs(value.imag) < 1e-300:
        value = complex(value.real, 0.0)
    return LaplaceSum(value, float(p_max), tail(p_max), qerr)


# ----------------------------------------------------------------------
# vertical-line inversion


@dataclass
class ContourValue:
    value: float
    T_max: float
    truncation: float


def _as_vectorized(G):
    def call(z):
        try:
            out = np.asarray(G(z), dtype=complex)
            if out.shape == z.shape:
                return out
        except Exception:
            pass
        return np.array([complex(G(complex(v))) for v in z.ravel()]).reshape(z.shape)

    return call


def inverse_laplace_contour(F, rho_bar: float, p: float, T_max: float | None = None, *, tol: float = 1e-8,
                            nodes: int = 16) -> ContourValue:
    """Inverse Laplace transform of ``z -> F(1/z)`` at p along ``Re z = rho_bar``.

    The function F of eta must be real on the real axis so that the integrand is
    conjugate-symmetric; the integral over ``|Im z| <= T_max`` is done with
    Gauss-Legendre panels (widths growing from ``min(rho_bar, 1)/4`` to half a
    period of ``e^(ipy)``) and the remainder beyond ``T_max`` is replaced by two
    terms of its integration-by-parts expansion.  The size of the next term is
    reported as ``truncation``.

    Raises
    ------
    ContourTruncationTooSmall
        If that estimate exceeds ``tol`` at the given or largest tried T_max.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    G = _as_vectorized(lambda z: F(1.0 / z))

    def H(y):
        y = np.asarray(y, float)
        return G(rho_bar + 1j * y)

    def derivs(T):
        h = 1e-3 * max(T, 1.0)
        ys = T + h * np.arange(-2, 3)
        v = H(ys)
        d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
        d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
        return v[2], d1, d2

    def estimate(T):
        _, _, d2 = derivs(T)
        return float(np.exp(rho_bar * p) / np.pi * abs(d2) / p**3)

    if T_max is None:
        T_max = 32 * np.pi / p
        while estimate(T_max) > tol and T_max < 1e7:
            T_max *= 2
    trunc = estimate(T_max)
    if trunc > tol:
        raise ContourTruncationTooSmall(f"tail estimate {trunc:.2e} at T_max = {T_max:.3g} exceeds {tol:.1e}")

    x0, w0 = leggauss(nodes)
    width_cap = np.pi / p
    width = min(min(rho_bar, 1.0) / 4, width_cap)
    edges = [0.0]
    while edges[-1] < T_max:
        edges.append(min(edges[-1] + width, T_max))
        width = min(2 * width, width_cap)
    edges = np.array(edges)
    a, b = edges[:-1, None], edges[1:, None]
    ys = (0.5 * (b - a) * x0 + 0.5 * (a + b)).ravel()
    ws = (0.5 * (b - a) * w0).ravel()
    body = np.sum(ws * np.exp(1j * p * ys) * H(ys))
    h0, h1, _ = derivs(T_max)
    ip = 1j * p
    tail = np.exp(ip * T_max) * (-h0 / ip + h1 / ip**2)
    value = float(np.exp(rho_bar * p) / np.pi * np.real(body + tail))
    return ContourValue(value, float(T_max), trunc)


# ----------------------------------------------------------------------
# growth diagnostics


@dataclass
class GrowthFit:
    """Envelope ``|c_k| <= D C^k (k!)^tau_est`` over the fitted coefficients."""

    D: float
    C: float
    tau_est: float
    residual: float
    ks: list[int] = field(default_factory=list)

    def envelope(self, k) -> float:
        return self.D * self.C**k * math.factorial(k) ** self.tau_est

    def holds(self, coeffs) -> bool:
        return all(abs(c) <= self.envelope(k) * (1 + 1e-12) for k, c in enumerate(coeffs) if k >= 1 and c != 0)


def growth_fit(coeffs, tau_fixed: float | None = None) -> GrowthFit:
    """Least-squares fit of ``log|c_k| = log D + k log C + tau log k!`` over nonzero c_k, k >= 1.

    ``coeffs[k]`` is the coefficient of index k.  The prefactor is then raised
    until the envelope covers every fitted coefficient.
    """
    ks = [k for k, c in enumerate(coeffs) if k >= 1 and abs(c) > 0]
    need = 2 if tau_fixed is not None else 3
    if len(ks) < max(4, need):
        raise InsufficientData(f"{len(ks)} nonzero coefficients; at least 4 are needed")
    y = np.array([math.log(abs(coeffs[k])) for k in ks])
    lf = np.array([math.lgamma(k + 1) for k in ks])
    kk = np.array(ks, float)
    if tau_fixed is None:
        A = np.stack([np.ones_like(kk), kk, lf], axis=1)
        sol, *_ = np.linalg.lstsq(A, y, rcond=None)
        logD, logC, tau = sol
    else:
        tau = float(tau_fixed)
        A = np.stack([np.ones_like(kk), kk], axis=1)
        sol, *_ = np.linalg.lstsq(A, y - tau * lf, rcond=None)
        logD, logC = sol
    model = logD + kk * logC + tau * lf
    res = float(np.sqrt(np.mean((y - model) ** 2)))
    excess = float(np.max(y - model))
    if excess > 0:
        logD += excess
    return GrowthFit(float(math.exp(logD)), float(math.exp(logC)), float(tau), res, ks)
