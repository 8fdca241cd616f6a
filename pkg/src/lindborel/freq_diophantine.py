"""Exact small-divisor arithmetic for two-dimensional quadratic-irrational frequencies.

Everything that decides a scale label or checks a Diophantine inequality is done
exactly in the field Q(sqrt d).  Floats are only used as prefilters whose error
is bounded far below the comparison margin; every borderline case is settled by
exact arithmetic.
"""
from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

PRECISION_BITS = 200
# Absolute slack for float prefilters; float error on omega.nu is ~1e-13 for |nu| <= 2**15.
_FLOAT_MARGIN = 1e-9


class SequenceInfeasible(RuntimeError):
    pass


class ScaleOutOfRange(ValueError):
    pass


def _squarefree_part(d: int) -> tuple[int, int]:
    """Return (k, m) with d = k**2 * m and m square-free."""
    k, m = 1, d
    f = 2
    while f * f <= m:
        while m % (f * f) == 0:
            m //= f * f
            k *= f
        f += 1
    return k, m


@functools.total_ordering
class QuadraticIrrational:
    """The number (a + b*sqrt(d)) / c, kept in canonical form.

    Rationals are stored with ``b = 0, d = 1`` so that equal values always have
    equal fields.  Arithmetic with ``int`` and ``Fraction`` operands is supported;
    mixing two different irrational fields raises ``ValueError``.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int = 0, c: int = 1, d: int = 1):
        if c == 0:
            raise ZeroDivisionError("denominator c must be nonzero")
        if d <= 0:
            raise ValueError("d must be a positive integer")
        k, d = _squarefree_part(int(d))
        a, b, c = int(a), int(b) * k, int(c)
        if d == 1:
            a, b = a + b, 0
        if b == 0:
            d = 1
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        self.a, self.b, self.c, self.d = a // g, b // g, c // g, d

    # construction helpers -------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "QuadraticIrrational":
        if isinstance(x, QuadraticIrrational):
            return x
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, Fraction):
            return cls(x.numerator, 0, x.denominator)
        raise TypeError(f"cannot convert {type(x).__name__} to QuadraticIrrational")

    @classmethod
    def from_fields(cls, fields: Sequence[int]) -> "QuadraticIrrational":
        a, b, c, d = fields
        return cls(a, b, c, d)

    def to_fields(self) -> list[int]:
        return [self.a, self.b, self.c, self.d]

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def _field_with(self, other: "QuadraticIrrational") -> int:
        if self.d == 1:
            return other.d
        if other.d == 1 or other.d == self.d:
            return self.d
        raise ValueError(f"incompatible quadratic fields Q(sqrt {self.d}) and Q(sqrt {other.d})")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            o = QuadraticIrrational.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field_with(o)
        return QuadraticIrrational(self.a * o.c + o.a * self.c, self.b * o.c + o.b * self.c, self.c * o.c, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.c, self.d)

    def __sub__(self, other):
        try:
            o = QuadraticIrrational.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QuadraticIrrational.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field_with(o)
        a = self.a * o.a + self.b * o.b * d
        b = self.a * o.b + self.b * o.a
        return QuadraticIrrational(a, b, self.c * o.c, d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a, -self.b, self.c, self.d)

    def norm(self) -> Fraction:
        """Field norm x * conj(x), a rational."""
        return Fraction(self.a * self.a - self.b * self.b * self.d, self.c * self.c)

    def __truediv__(self, other):
        try:
            o = QuadraticIrrational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * o.conjugate() * QuadraticIrrational(n.denominator, 0, n.numerator)

    def __rtruediv__(self, other):
        return QuadraticIrrational.coerce(other) / self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # exact ordering -------------------------------------------------------
    def sign(self) -> int:
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        s = a * a - b * b * d
        return (1 if a > 0 else -1) * ((s > 0) - (s < 0))

    def _key(self):
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other):
        try:
            o = QuadraticIrrational.coerce(other)
        except TypeError:
            return NotImplemented
        return self._key() == o._key()

    def __lt__(self, other):
        try:
            return (self - other).sign() < 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self._key())

    # floats ---------------------------------------------------------------
    def to_mpf(self, prec: int = PRECISION_BITS) -> mpmath.mpf:
        with mpmath.workprec(prec):
            return (mpmath.mpf(self.a) + self.b * mpmath.sqrt(self.d)) / self.c

    def __float__(self):
        return float(self.to_mpf(80))

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticIrrational({self.a}/{self.c})"
        return f"QuadraticIrrational(({self.a} + {self.b}*sqrt({self.d}))/{self.c})"


QI = QuadraticIrrational


def _floor_fraction(x: QuadraticIrrational, denominator: int = 10**12) -> Fraction:
    """Largest k/denominator that does not exceed x."""
    k = math.floor(float(x.to_mpf(128)) * denominator)
    q = Fraction(k, denominator)
    while q > x:
        k -= 1
        q = Fraction(k, denominator)
    while Fraction(k + 1, denominator) <= x:
        k += 1
        q = Fraction(k, denominator)
    return q


def _maxnorm(nu) -> int:
    return max(abs(int(n)) for n in nu)


@dataclass(frozen=True)
class FrequencyVector:
    """Rationally independent 2-vector with exact components.

    ``C0`` is the Diophantine constant used downstream (tau is fixed at 1).  When
    omitted it is estimated exhaustively at ``|nu| <= 2**15`` and rounded down to
    a rational.
    """

    omega: tuple[QuadraticIrrational, QuadraticIrrational]
    C0: Fraction | None = None
    tau: int = 1

    def __post_init__(self):
        om = tuple(QuadraticIrrational.coerce(w) for w in self.omega)
        if len(om) != 2:
            raise ValueError("only two-dimensional frequency vectors are supported")
        if self.tau != 1:
            raise ValueError("only tau = 1 is supported")
        object.__setattr__(self, "omega", om)
        if om[1].sign() == 0 or (om[0] / om[1]).is_rational:
            raise ValueError("frequency components are rationally dependent")
        if self.C0 is None:
            object.__setattr__(self, "C0", _floor_fraction(diophantine_constant(self, 2**15)))
        else:
            c0 = Fraction(self.C0)
            if c0 <= 0:
                raise ValueError("C0 must be positive")
            object.__setattr__(self, "C0", c0)

    def __hash__(self):
        return hash((self.omega, self.C0))

    def dot(self, nu) -> QuadraticIrrational:
        return self.omega[0] * int(nu[0]) + self.omega[1] * int(nu[1])

    @functools.cached_property
    def omega_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.omega])

    def to_json(self) -> list[list[int]]:
        return [w.to_fields() for w in self.omega]

    @classmethod
    def from_json(cls, data, C0=None) -> "FrequencyVector":
        return cls(tuple(QuadraticIrrational.from_fields(f) for f in data), C0=C0)


def golden_frequency(C0=None) -> FrequencyVector:
    """omega = (1, (sqrt5 - 1)/2)."""
    return FrequencyVector((QI(1), QI(-1, 1, 2, 5)), C0=C0)


def small_divisor(freq: FrequencyVector, nu) -> tuple[QuadraticIrrational, mpmath.mpf]:
    """Exact omega.nu together with its 200-bit float value."""
    x = freq.dot(nu)
    return x, x.to_mpf()


def _candidate_modes(omega_f: np.ndarray, nu_max: int, bound: float):
    """Yield nu with |nu|_inf <= nu_max, nu2 >= 0 (one per +-pair) and |omega.nu| < bound (float)."""
    w1, w2 = omega_f
    lead = abs(w1) >= abs(w2)
    wa, wb = (w1, w2) if lead else (w2, w1)
    half = bound / abs(wa) + 1e-9
    for j in range(0, nu_max + 1):
        centre = -wb * j / wa
        lo = max(-nu_max, math.ceil(centre - half))
        hi = min(nu_max, math.floor(centre + half))
        for i in range(lo, hi + 1):
            if j == 0 and i <= 0:
                continue
            yield (i, j) if lead else (j, i)


def diophantine_constant(freq: FrequencyVector, nu_max: int) -> QuadraticIrrational:
    """min over 0 < |nu|_inf <= nu_max of |omega.nu| * |nu|_inf, exactly.

    The search only visits nu whose float product can beat the current best, so
    the cost is linear in ``nu_max``.
    """
    if nu_max < 1:
        raise ValueError("nu_max must be >= 1")
    return _diophantine_constant_cached(freq.omega, int(nu_max))


@functools.lru_cache(maxsize=64)
def _diophantine_constant_cached(omega, nu_max: int) -> QuadraticIrrational:
    om_f = np.array([float(w) for w in omega])
    best = None
    best_f = math.inf
    seeds = [(1, 0), (0, 1)]
    for nu in seeds:
        v = abs(omega[0] * nu[0] + omega[1] * nu[1])
        if best is None or v < best:
            best, best_f = v, float(v)
    # |nu| >= 1, so any improvement needs |omega.nu| < best
    for nu in _candidate_modes(om_f, nu_max, best_f * (1 + 1e-9) + _FLOAT_MARGIN):
        n = _maxnorm(nu)
        xf = abs(om_f[0] * nu[0] + om_f[1] * nu[1])
        if xf * n > best_f + _FLOAT_MARGIN:
            continue
        v = abs(omega[0] * nu[0] + omega[1] * nu[1]) * n
        if v < best:
            best, best_f = v, float(v)
    return best


@dataclass
class ScaleSequence:
    """Thresholds gamma_0 > gamma_1 > ... > gamma_P separating the scales."""

    gammas: list[Fraction]
    C0: Fraction
    shift: int = 3
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def P(self) -> int:
        return len(self.gammas) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "numerator", "denominator", "gamma"])
        for p, g in enumerate(self.gammas):
            w.writerow([p, g.numerator, g.denominator, repr(float(g))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, C0, shift: int = 3) -> "ScaleSequence":
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda r: int(r["p"]))
        return cls([Fraction(int(r["numerator"]), int(r["denominator"])) for r in rows], Fraction(C0), shift)


def _window(C0: Fraction, p: int) -> tuple[Fraction, Fraction]:
    return C0 / 2 ** (p + 2), C0 / 2 ** (p + 1)


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def _inside(q: Fraction, lo, hi, lo_closed: bool) -> bool:
    return (q >= lo if lo_closed else q > lo) and q < hi


def _rational_between(lo: QuadraticIrrational, hi: QuadraticIrrational, lo_closed: bool) -> Fraction:
    with mpmath.workprec(PRECISION_BITS):
        mid = (lo.to_mpf() + hi.to_mpf()) / 2
    limit = 10**6
    while True:
        q = Fraction(str(mpmath.nstr(mid, 60))).limit_denominator(limit)
        if _inside(q, lo, hi, lo_closed):
            return q
        limit *= 1000


def build_scale_sequence(freq: FrequencyVector, P: int, *, C0=None, shift: int = 3) -> ScaleSequence:
    """Pick gamma_p in each dyadic window, away from the small divisors.

    Around every |omega.nu| with 0 < |nu| <= 2**(n - shift), n in [p, P], a closed
    interval of radius C0 * 2**-n is removed from the window
    C0 * [2**(-p-2), 2**(-p-1)); gamma_p is a rational close to the midpoint of the
    largest surviving gap.
    """
    if P < 0:
        raise ValueError("P must be >= 0")
    C0 = Fraction(freq.C0 if C0 is None else C0)
    nu_max = 2 ** (P - shift) if P >= shift else 0
    divisors: list[tuple[QuadraticIrrational, int]] = []
    if nu_max >= 1:
        bound = float(C0) * 1.5 + _FLOAT_MARGIN
        for nu in _candidate_modes(freq.omega_float, nu_max, bound):
            divisors.append((abs(freq.dot(nu)), _maxnorm(nu)))

    gammas = []
    for p in range(P + 1):
        lo, hi = _window(C0, p)
        intervals = []
        for x, n_nu in divisors:
            n = max(p, shift + _ceil_log2(n_nu))
            if n > P:
                continue
            r = C0 / 2**n
            left, right = x - r, x + r
            if right < lo or not left < hi:
                continue
            intervals.append((left, right))
        intervals.sort(key=functools.cmp_to_key(lambda u, v: (u[0] - v[0]).sign()))
        gaps = []
        cursor, cursor_closed = QI.coerce(lo), True
        for left, right in intervals:
            if cursor < left:
                gaps.append((cursor, left, cursor_closed))
            if right > cursor or (right == cursor and cursor_closed):
                cursor, cursor_closed = right, False
        hiq = QI.coerce(hi)
        if cursor < hiq:
            gaps.append((cursor, hiq, cursor_closed))
        if not gaps:
            raise SequenceInfeasible(f"window p={p} is fully excluded")
        best = gaps[0]
        for g in gaps[1:]:
            if (g[1] - g[0]) > (best[1] - best[0]):
                best = g
        gammas.append(_rational_between(best[0], best[1], best[2]))
    return ScaleSequence(gammas, C0, shift)


@dataclass
class ScaleReport:
    ok: bool
    first_violation: dict | None = None


def _modes_up_to(nu_max: int) -> np.ndarray:
    """All nu with 0 < |nu|_inf <= nu_max, one representative per +-pair."""
    r = np.arange(-nu_max, nu_max + 1)
    n1, n2 = np.meshgrid(r, np.arange(0, nu_max + 1), indexing="ij")
    n1, n2 = n1.ravel(), n2.ravel()
    keep = (n2 > 0) | (n1 > 0)
    return np.stack([n1[keep], n2[keep]], axis=1)


def verify_scale_sequence(seq: ScaleSequence, freq: FrequencyVector) -> ScaleReport:
    """Exhaustive check of the window, monotonicity, Diophantine and separation conditions."""
    C0 = seq.C0
    for p, g in enumerate(seq.gammas):
        lo, hi = _window(C0, p)
        if not (lo <= g < hi):
            return ScaleReport(False, {"kind": "window", "p": p, "gamma": str(g)})
    for p in range(1, len(seq.gammas)):
        if not seq.gammas[p] < seq.gammas[p - 1]:
            return ScaleReport(False, {"kind": "monotone", "p": p})
    P = seq.P
    if P < seq.shift:
        return ScaleReport(True)
    nu_max = 2 ** (P - seq.shift)
    modes = _modes_up_to(nu_max)
    norms = np.abs(modes).max(axis=1)
    xf = np.abs(modes @ freq.omega_float)

    # condition (1): |omega.nu| * |nu| >= C0
    c0f = float(C0)
    suspect = np.nonzero(xf * norms < c0f + _FLOAT_MARGIN)[0]
    for i in suspect:
        nu = tuple(int(v) for v in modes[i])
        if abs(freq.dot(nu)) * int(norms[i]) < C0:
            return ScaleReport(False, {"kind": "diophantine", "nu": list(nu)})

    # condition (2): for n >= p, |nu| <= 2**(n-shift): ||omega.nu| - gamma_p| > C0 2**-n
    gf = np.array([float(g) for g in seq.gammas])
    nmin = np.maximum(seq.shift + np.array([_ceil_log2(int(n)) for n in norms]), 0)
    for p in range(P + 1):
        # the binding n is the smallest admissible one, max(p, nmin)
        n_bind = np.maximum(nmin, p)
        active = n_bind <= P
        radius = c0f / np.exp2(n_bind)
        suspect = np.nonzero(active & (np.abs(xf - gf[p]) <= radius + _FLOAT_MARGIN))[0]
        for i in suspect:
            nu = tuple(int(v) for v in modes[i])
            n = int(n_bind[i])
            if not abs(abs(freq.dot(nu)) - seq.gammas[p]) > C0 / 2**n:
                return ScaleReport(False, {"kind": "separation", "n": n, "p": p, "nu": list(nu)})
    return ScaleReport(True)


def scale_of(x: QuadraticIrrational, seq: ScaleSequence, nu=None) -> int:
    """Scale label of a divisor: -1 for the zero mode, else p with gamma_p <= |x| < gamma_(p-1)."""
    if nu is not None and all(int(v) == 0 for v in nu):
        return -1
    x = abs(QI.coerce(x))
    if x.sign() == 0:
        return -1
    if x >= seq.gammas[0]:
        return 0
    for p in range(1, len(seq.gammas)):
        if x >= seq.gammas[p]:
            return p
    raise ScaleOutOfRange(f"|x| = {float(x):.3e} lies below gamma_P = {float(seq.gammas[-1]):.3e}")


def mode_scale(freq: FrequencyVector, seq: ScaleSequence, nu) -> int:
    """Memoized scale label of a momentum."""
    key = (int(nu[0]), int(nu[1]))
    cache = seq._cache
    try:
        return cache[key]
    except KeyError:
        s = scale_of(freq.dot(key), seq, key)
        cache[key] = s
        return s


def modes_on_scale(freq: FrequencyVector, seq: ScaleSequence, n: int, nu_max: int = 200) -> list[tuple[int, int]]:
    """Momenta (one per +-pair, sorted by norm) whose divisor lies on scale n."""
    if n == 0:
        bound = float("inf")
    else:
        bound = float(seq.gammas[n - 1]) + _FLOAT_MARGIN
    out = []
    if n == 0:
        cands: Iterable = [(1, 0), (0, 1)]
    else:
        cands = _candidate_modes(freq.omega_float, nu_max, bound)
    for nu in cands:
        try:
            if mode_scale(freq, seq, nu) == n:
                out.append(nu)
        except ScaleOutOfRange:
            continue
    out.sort(key=lambda v: (_maxnorm(v), v))
    return out
