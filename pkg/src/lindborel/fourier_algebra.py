"""Sparse trigonometric polynomials and graded series in eps = eta**2.

A :class:`TrigPoly` maps integer modes to small dense coefficient arrays.  For
the perturbation ``f`` the modes are ``(nu_1, nu_2, mu_1, ..., mu_s)`` (fast
then slow angles) and coefficients are scalars; for the conjugation ``h`` the
modes are fast-angle modes ``(nu_1, nu_2)`` and coefficients are vectors with
``2 + s`` components (two fast, then ``s`` slow).

Component labels are 0-based throughout: 0 and 1 are the fast angles, 2.. the
slow ones.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .freq_diophantine import FrequencyVector

log = logging.getLogger(__name__)

PRUNE_REL = 1e-16


class NotHyperbolic(ValueError):
    pass


class EquilibriumViolated(ValueError):
    pass


class TrigPoly:
    """Finite Fourier sum ``sum_k c_k exp(i k . theta)`` with array-valued ``c_k``."""

    __slots__ = ("terms", "shape", "nvars")

    def __init__(self, terms=None, shape=(), nvars=None):
        self.shape = tuple(shape)
        self.terms: dict[tuple, np.ndarray] = {}
        if terms:
            for k, v in terms.items():
                k = tuple(int(x) for x in k)
                self.terms[k] = np.asarray(v, dtype=complex).reshape(self.shape)
            nv = {len(k) for k in self.terms}
            if len(nv) > 1:
                raise ValueError("inconsistent mode lengths")
            if nvars is None:
                nvars = nv.pop()
        self.nvars = nvars
        self._prune()

    # ------------------------------------------------------------------
    @classmethod
    def zero(cls, nvars, shape=()):
        return cls({}, shape, nvars)

    @classmethod
    def constant(cls, value, nvars):
        value = np.asarray(value, dtype=complex)
        return cls({(0,) * nvars: value}, value.shape, nvars)

    def copy(self):
        out = TrigPoly.zero(self.nvars, self.shape)
        out.terms = {k: v.copy() for k, v in self.terms.items()}
        return out

    def _prune(self):
        if not self.terms:
            return
        mags = {k: float(np.max(np.abs(v))) if v.size else 0.0 for k, v in self.terms.items()}
        top = max(mags.values())
        cut = PRUNE_REL * top
        self.terms = {k: v for k, v in self.terms.items() if mags[k] > cut}

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def coef(self, mode) -> np.ndarray:
        v = self.terms.get(tuple(mode))
        return np.zeros(self.shape, complex) if v is None else v

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Max-norm of the fast-angle part of the support."""
        if not self.terms:
            return 0
        return max(max(abs(k[0]), abs(k[1])) for k in self.terms)

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.terms.values()), default=0.0)

    def wiener_norm(self) -> float:
        """sum over modes of the max component modulus (bounds the sup norm)."""
        return sum(float(np.max(np.abs(v))) for v in self.terms.values())

    # algebra -----------------------------------------------------------
    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return TrigPoly(out, np.broadcast_shapes(self.shape, other.shape), self.nvars or other.nvars)

    def __neg__(self):
        return TrigPoly({k: -v for k, v in self.terms.items()}, self.shape, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "TrigPoly":
        factor = np.asarray(factor, dtype=complex)
        shape = np.broadcast_shapes(self.shape, factor.shape)
        return TrigPoly({k: v * factor for k, v in self.terms.items()}, shape, self.nvars)

    def shift(self, mode) -> "TrigPoly":
        """Multiply by exp(i mode . theta)."""
        m = tuple(int(x) for x in mode)
        return TrigPoly({tuple(a + b for a, b in zip(k, m)): v for k, v in self.terms.items()}, self.shape, self.nvars)

    def component(self, index) -> "TrigPoly":
        return TrigPoly({k: v[index] for k, v in self.terms.items()}, np.empty(self.shape)[index].shape, self.nvars)

    def contract(self, vector) -> "TrigPoly":
        """Scalar poly sum_g vector[g] * self[g] for a vector-valued poly."""
        vector = np.asarray(vector, dtype=complex)
        return TrigPoly({k: v @ vector for k, v in self.terms.items()}, (), self.nvars)

    def restrict(self, keep) -> "TrigPoly":
        return TrigPoly({k: v for k, v in self.terms.items() if keep(k)}, self.shape, self.nvars)

    def conj_reflect(self) -> "TrigPoly":
        """The poly whose mode-k coefficient is conj(c_{-k})."""
        return TrigPoly({tuple(-x for x in k): np.conj(v) for k, v in self.terms.items()}, self.shape, self.nvars)

    def is_real(self, tol=1e-12) -> bool:
        scale = max(self.max_abs(), 1.0)
        return (self - self.conj_reflect()).max_abs() <= tol * scale

    # evaluation --------------------------------------------------------
    def evaluate(self, theta) -> np.ndarray:
        """Values at points ``theta`` of shape (..., nvars); returns (..., *shape)."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape[:-1] + self.shape, complex)
        if not self.terms:
            return out
        modes = np.array(list(self.terms.keys()), dtype=float)
        coefs = np.array(list(self.terms.values()))
        phase = np.exp(1j * (theta @ modes.T))
        return np.tensordot(phase, coefs, axes=([-1], [0]))

    def __repr__(self):
        return f"TrigPoly({len(self.terms)} terms, shape={self.shape}, nvars={self.nvars})"


def tp_mul(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    """Fourier convolution; coefficient arrays multiply with numpy broadcasting."""
    if a.is_zero() or b.is_zero():
        return TrigPoly.zero(a.nvars or b.nvars, np.broadcast_shapes(a.shape, b.shape))
    if a.nvars != b.nvars:
        raise ValueError("mode dimensions differ")
    out: dict[tuple, np.ndarray] = {}
    bitems = list(b.terms.items())
    for ka, va in a.terms.items():
        for kb, vb in bitems:
            k = tuple(x + y for x, y in zip(ka, kb))
            p = va * vb
            if k in out:
                out[k] += p
            else:
                out[k] = p.copy() if p is va or p is vb else p
    return TrigPoly(out, np.broadcast_shapes(a.shape, b.shape), a.nvars)


def tp_diff(a: TrigPoly, gamma: int) -> TrigPoly:
    """Derivative along angle ``gamma``: multiplication of mode k by i*k[gamma]."""
    if not 0 <= gamma < a.nvars:
        raise ValueError(f"component {gamma} out of range for {a.nvars} angles")
    return TrigPoly({k: v * (1j * k[gamma]) for k, v in a.terms.items() if k[gamma] != 0}, a.shape, a.nvars)


def omega_derivative(a: TrigPoly, omega, power: int = 1) -> TrigPoly:
    """(omega . d/dpsi)**power applied to a fast-angle poly."""
    omega = np.asarray(omega, float)
    return TrigPoly(
        {k: v * (1j * (omega[0] * k[0] + omega[1] * k[1])) ** power for k, v in a.terms.items()},
        a.shape,
        a.nvars,
    )


# ----------------------------------------------------------------------
# perturbation and system data


def close_conjugates(terms: dict) -> tuple[dict, bool]:
    """Make a scalar coefficient map real-symmetric; returns (terms, changed)."""
    out = {}
    changed = False
    for k, c in terms.items():
        kn = tuple(-x for x in k)
        c = complex(c)
        if kn in terms:
            want = 0.5 * (c + np.conj(complex(terms[kn])))
            if abs(want - c) > 1e-15 * max(abs(c), 1.0):
                changed = True
            out[k] = want
        else:
            out[k] = c
            out[kn] = np.conj(c)
            if k != kn:
                changed = True
    return out, changed


def parse_perturbation(entries, s: int) -> TrigPoly:
    """Build f from ``[{nu: [..], mu: [..], re, im}, ...]`` with conjugate closure."""
    raw: dict[tuple, complex] = {}
    for e in entries:
        nu = [int(x) for x in e["nu"]]
        mu = [int(x) for x in e.get("mu", [0] * s)]
        if len(nu) != 2 or len(mu) != s:
            raise ValueError(f"mode {nu}+{mu} does not match 2 fast and {s} slow angles")
        k = tuple(nu + mu)
        raw[k] = raw.get(k, 0) + complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
    closed, changed = close_conjugates(raw)
    if changed:
        log.warning("perturbation was not conjugate-closed; symmetrized to a real function")
    return TrigPoly(closed, (), 2 + s)


def cosine_perturbation(modes, s: int, amplitude=1.0) -> TrigPoly:
    """sum of amplitude*cos(k . phi) over the given full modes."""
    terms = {}
    for k in modes:
        k = tuple(int(x) for x in k)
        kn = tuple(-x for x in k)
        terms[k] = terms.get(k, 0) + amplitude / 2
        terms[kn] = terms.get(kn, 0) + amplitude / 2
    return TrigPoly(terms, (), 2 + s)


def effective_potential(f: TrigPoly) -> TrigPoly:
    """Average of f over the fast angles, as a poly in the slow angles only."""
    return TrigPoly({k[2:]: v for k, v in f.terms.items() if k[0] == 0 and k[1] == 0}, (), f.nvars - 2)


def gradient_at(f0: TrigPoly, beta0) -> np.ndarray:
    beta0 = np.asarray(beta0, float)
    g = np.zeros(f0.nvars)
    for k, c in f0.terms.items():
        k = np.array(k, float)
        g += np.real(complex(c) * 1j * k * np.exp(1j * k @ beta0))
    return g


def hessian_at(f0: TrigPoly, beta0) -> np.ndarray:
    """M0 = -d^2 f0 (beta0), symmetrized; raises NotHyperbolic unless positive definite."""
    beta0 = np.asarray(beta0, float)
    s = f0.nvars
    M = np.zeros((s, s))
    for k, c in f0.terms.items():
        k = np.array(k, float)
        M += np.real(complex(c) * np.outer(k, k) * np.exp(1j * k @ beta0))
    M = 0.5 * (M + M.T)
    if s and np.linalg.eigvalsh(M).min() <= 1e-10:
        raise NotHyperbolic(f"beta0 = {beta0.tolist()} is not a non-degenerate maximum of the averaged potential")
    return M


@dataclass
class SystemSpec:
    """Hamiltonian data: frequency, slow dimension, perturbation and the torus base point."""

    freq: FrequencyVector
    s: int
    f: TrigPoly
    beta0: np.ndarray
    eta0: float = 0.1
    name: str = "system"
    M0: np.ndarray = field(init=False)

    def __post_init__(self):
        self.beta0 = np.atleast_1d(np.asarray(self.beta0, float))
        if self.beta0.shape != (self.s,):
            raise ValueError("beta0 must have s components")
        if self.f.nvars not in (None, 2 + self.s):
            raise ValueError("perturbation modes must have 2 + s entries")
        if self.f.nvars is None:
            self.f = TrigPoly.zero(2 + self.s)
        f0 = effective_potential(self.f)
        grad = gradient_at(f0, self.beta0) if self.s else np.zeros(0)
        if np.max(np.abs(grad), initial=0.0) > 1e-12:
            raise EquilibriumViolated(f"beta0: averaged potential gradient {grad.tolist()} is not zero")
        self.M0 = hessian_at(f0, self.beta0) if self.s else np.zeros((0, 0))
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")

    @property
    def dim(self) -> int:
        return 2 + self.s

    @cached_property
    def omega(self) -> np.ndarray:
        return self.freq.omega_float

    @cached_property
    def M0_full(self) -> np.ndarray:
        """M0 embedded in the (2+s) x (2+s) block form (zero fast block)."""
        M = np.zeros((self.dim, self.dim))
        M[2:, 2:] = self.M0
        return M

    @cached_property
    def g_minus1(self) -> np.ndarray:
        """Zero-momentum propagator: zero fast block, (-d^2 f0)^-1 slow block."""
        G = np.zeros((self.dim, self.dim))
        if self.s:
            G[2:, 2:] = np.linalg.inv(self.M0)
        return G

    @cached_property
    def node_table(self) -> dict[tuple[int, int], list[tuple[np.ndarray, complex]]]:
        """Fast mode -> [(i*kappa, c * exp(i mu.beta0)), ...] with kappa = (nu, mu).

        The derivative tensor of f_nu at beta0 is sum over entries of
        coef * (i kappa) x ... x (i kappa).
        """
        table: dict[tuple[int, int], list] = {}
        for k, c in sorted(self.f.terms.items()):
            nu = (k[0], k[1])
            kappa = np.array(k, float)
            phase = np.exp(1j * kappa[2:] @ self.beta0)
            table.setdefault(nu, []).append((1j * kappa, complex(c) * phase))
        return table

    def node_tensor(self, nu, rank: int) -> np.ndarray:
        """Full derivative tensor d_{g0 g1 .. g_rank-1} f_nu(beta0) (for inspection and tests)."""
        T = np.zeros((self.dim,) * rank, complex)
        for ik, c in self.node_table.get(tuple(nu), []):
            t = np.array(c)
            for _ in range(rank):
                t = np.multiply.outer(t, ik)
            T += t
        return T

    def grad_f(self, phi) -> np.ndarray:
        """d_phi f at points phi of shape (..., 2+s), real."""
        phi = np.asarray(phi, float)
        if not self.f.terms:
            return np.zeros_like(phi)
        modes = np.array(list(self.f.terms.keys()), float)
        coefs = np.array([complex(v) for v in self.f.terms.values()])
        ph = np.exp(1j * phi @ modes.T) * coefs
        return np.real(1j * ph @ modes)

    def f_value(self, phi) -> np.ndarray:
        return np.real(self.f.evaluate(phi))


# ----------------------------------------------------------------------
# graded series


@dataclass
class EpsSeries:
    """sum_k eps**k * orders[k]; every order is a fast-angle vector poly."""

    orders: list[TrigPoly]
    dim: int

    @property
    def K(self) -> int:
        return len(self.orders) - 1

    @classmethod
    def zeros(cls, K: int, dim: int) -> "EpsSeries":
        return cls([TrigPoly.zero(2, (dim,)) for _ in range(K + 1)], dim)

    def truncate(self, K: int) -> "EpsSeries":
        return EpsSeries(self.orders[: K + 1], self.dim)

    def evaluate(self, psi, eps: float) -> np.ndarray:
        out = 0
        for k, p in enumerate(self.orders):
            out = out + eps**k * p.evaluate(psi)
        return out

    def to_rows(self):
        """(k, nu1, nu2, gamma, re, im) rows in a fixed order."""
        rows = []
        for k, p in enumerate(self.orders):
            for mode, v in p:
                for g in range(self.dim):
                    rows.append((k, mode[0], mode[1], g, float(v[g].real), float(v[g].imag)))
        return rows

    def sup_norms(self) -> list[float]:
        return [p.wiener_norm() for p in self.orders]

    def is_real(self, tol=1e-12) -> bool:
        return all(p.is_real(tol) for p in self.orders)


def series_mul(A: list[TrigPoly], B: list[TrigPoly]) -> list[TrigPoly]:
    """Cauchy product of two lists of polys, truncated at the shorter length."""
    K = min(len(A), len(B)) - 1
    out = []
    for n in range(K + 1):
        acc = None
        for i in range(n + 1):
            if A[i].is_zero() or B[n - i].is_zero():
                continue
            t = tp_mul(A[i], B[n - i])
            acc = t if acc is None else acc + t
        if acc is None:
            acc = TrigPoly.zero(A[0].nvars or B[0].nvars, np.broadcast_shapes(A[0].shape, B[0].shape))
        out.append(acc)
    return out


def exp_series(X: list[TrigPoly]) -> list[TrigPoly]:
    """exp of a series with zero constant term: E_n = (1/n) sum_j j X_j E_(n-j)."""
    K = len(X) - 1
    E = [TrigPoly.constant(1.0, 2)]
    for n in range(1, K + 1):
        acc = TrigPoly.zero(2)
        for j in range(1, n + 1):
            if X[j].is_zero() or E[n - j].is_zero():
                continue
            acc = acc + tp_mul(X[j], E[n - j]).scale(j / n)
        E.append(acc)
    return E


def compose_f(sys: SystemSpec, h: EpsSeries, K: int) -> EpsSeries:
    """Series of grad f(psi + a(psi), beta0 + b(psi)) through eps**K.

    ``h.orders[0]`` must vanish.  Each mode (nu, mu) of f contributes
    c exp(i mu.beta0) (i kappa) exp(i nu.psi) exp(i kappa . h).
    """
    if h.orders and not h.orders[0].is_zero():
        raise ValueError("the conjugation must vanish at order zero")
    d = sys.dim
    orders = [TrigPoly.zero(2, (d,)) for _ in range(K + 1)]
    hk = [h.orders[j] if j < len(h.orders) else TrigPoly.zero(2, (d,)) for j in range(K + 1)]
    for k, c in sorted(sys.f.terms.items()):
        kappa = np.array(k, float)
        ik = 1j * kappa
        amp = complex(c) * np.exp(1j * kappa[2:] @ sys.beta0)
        X = [TrigPoly.zero(2)] + [hk[j].contract(ik) for j in range(1, K + 1)]
        E = exp_series(X)
        for n in range(K + 1):
            if E[n].is_zero():
                continue
            orders[n] = orders[n] + E[n].shift(k[:2]).scale(amp * ik)
    return EpsSeries(orders, d)
