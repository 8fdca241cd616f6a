"""Direct time integration of the equations of motion, for comparison with the series.

The flow is ``phi'' = -eta^2 grad f(phi)`` with energy
``E = |phi'|^2 / 2 + eta^2 f(phi)``.  The parametrization predicted by a
conjugation h is ``phi(t) = (psi0 + omega t, beta0) + h(psi0 + omega t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier_algebra import EpsSeries, SystemSpec
from .lindstedt_recursion import ConjugationSeries


class StepTooLarge(ValueError):
    pass


class GridMismatch(ValueError):
    pass


@dataclass
class TrajectorySample:
    times: np.ndarray
    phi: np.ndarray
    phidot: np.ndarray
    source: str

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if self.phi.shape != self.phidot.shape or self.phi.shape[0] != len(self.times):
            raise ValueError("inconsistent sample shapes")


def _series(h) -> EpsSeries:
    return h.h if isinstance(h, ConjugationSeries) else h


def _h_values(sys: SystemSpec, h, psi0, eta: float, times, derivative: bool = False):
    series = _series(h)
    psi = np.asarray(psi0, float)[None, :] + np.asarray(times, float)[:, None] * sys.omega[None, :]
    eps = eta * eta
    hv = np.zeros((len(times), sys.dim), complex)
    hd = np.zeros_like(hv)
    for k, p in enumerate(series.orders):
        if p.is_zero():
            continue
        modes = np.array(list(p.terms.keys()), float)
        coefs = np.array(list(p.terms.values())) * eps**k
        phase = np.exp(1j * psi @ modes.T)
        hv += phase @ coefs
        if derivative:
            hd += phase @ (coefs * (1j * (modes @ sys.omega))[:, None])
    return (hv.real, hd.real) if derivative else hv.real


def parametrized_trajectory(sys: SystemSpec, h, psi0, eta: float, times) -> TrajectorySample:
    """Samples of the parametrized torus motion and its exact time derivative."""
    times = np.asarray(times, float)
    psi = np.asarray(psi0, float)[None, :] + times[:, None] * sys.omega[None, :]
    hv, hd = _h_values(sys, h, psi0, eta, times, derivative=True)
    base = np.concatenate([psi, np.broadcast_to(sys.beta0, (len(times), sys.s))], axis=1)
    vel = np.concatenate([np.broadcast_to(sys.omega, (len(times), 2)), np.zeros((len(times), sys.s))], axis=1)
    return TrajectorySample(times, base + hv, vel + hd, "parametrized")


def energy(sys: SystemSpec, phi, phidot, eta: float) -> np.ndarray:
    return 0.5 * np.sum(np.asarray(phidot) ** 2, axis=-1) + eta * eta * sys.f_value(phi)


def integrate_ode(sys: SystemSpec, phi0, phidot0, eta: float, times, step: float) -> TrajectorySample:
    """Classical fixed-step RK4 from times[0], sampled at ``times``.

    Each sampling interval is split into the smallest number of equal substeps
    not longer than ``step``.  The state is integrated as the offset from the
    free motion ``phi0 + phidot0 (t - t0)``, which keeps the rounding of the
    growing fast angles out of the small displacements.  The energy drift is
    stored as ``sample.drift``.
    """
    if step > 1e-3 / eta:
        raise StepTooLarge(f"step {step} exceeds 1e-3/eta = {1e-3 / eta}")
    times = np.asarray(times, float)
    eps = eta * eta
    phi0 = np.asarray(phi0, float)
    v0 = np.asarray(phidot0, float)
    t0 = times[0]
    d = sys.dim

    def rhs(t, y):
        return np.concatenate([y[d:], -eps * sys.grad_f(phi0 + v0 * (t - t0) + y[:d])])

    y = np.zeros(2 * d)
    out = np.empty((len(times), 2 * d))
    out[0] = y
    for i in range(1, len(times)):
        dt_total = times[i] - times[i - 1]
        n = max(1, int(np.ceil(dt_total / step - 1e-12)))
        dt = dt_total / n
        for j in range(n):
            t = times[i - 1] + j * dt
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = rhs(t + dt, y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = y
    lin = phi0[None, :] + (times - t0)[:, None] * v0[None, :]
    sample = TrajectorySample(times, lin + out[:, :d], v0[None, :] + out[:, d:], "integrated")
    sample.offset = out[:, :d]
    E = energy(sys, sample.phi, sample.phidot, eta)
    sample.drift = float(np.max(np.abs(E - E[0])))
    return sample


@dataclass
class Deviation:
    sup: float
    rms: float
    per_component: list[float]


def compare(a: TrajectorySample, b: TrajectorySample) -> Deviation:
    """Sup and RMS distance of positions, with per-component sup."""
    if a.times.shape != b.times.shape or np.any(a.times != b.times):
        raise GridMismatch("samples are on different time grids")
    diff = a.phi - b.phi
    return Deviation(float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff**2))),
                     [float(v) for v in np.max(np.abs(diff), axis=0)])


def horizon(sys: SystemSpec, eta: float, factor: float = 0.5) -> float:
    """factor / (eta sqrt(|M0|)) with the spectral norm of M0."""
    return factor / (eta * np.sqrt(np.linalg.norm(sys.M0, 2)))


def torus_deviation(sys: SystemSpec, h, eta: float, psi0=(0.0, 0.0), T: float | None = None,
                    n_samples: int = 200, step: float | None = None, reference=None) -> tuple[Deviation, float]:
    """Compare the parametrization given by ``h`` with an integrated trajectory.

    The trajectory starts from the point and velocity of the parametrization
    given by ``reference`` (default: ``h`` itself).  Starting from ``h`` puts an
    initial velocity error of the size of the residual into the neutral fast
    directions, which then drifts linearly over the horizon; a reference of
    higher order removes that drift and isolates the error of ``h``.

    Returns the deviation and the energy drift of the integration.
    """
    T = horizon(sys, eta) if T is None else T
    times = np.linspace(0.0, T, n_samples + 1)
    par = parametrized_trajectory(sys, h, psi0, eta, times)
    start = par if reference is None else parametrized_trajectory(sys, reference, psi0, eta, times[:2])
    if step is None:
        step = min(1e-3 / eta, T / (20 * n_samples))
    sol = integrate_ode(sys, start.phi[0], start.phidot[0], eta, times, step)
    # positions relative to the free motion used by the integrator, formed
    # without subtracting large numbers
    base0 = np.concatenate([np.asarray(psi0, float), sys.beta0])
    vbase = np.concatenate([sys.omega, np.zeros(sys.s)])
    hv = _h_values(sys, h, psi0, eta, times)
    rel_par = (base0 - start.phi[0])[None, :] + times[:, None] * (vbase - start.phidot[0])[None, :] + hv
    diff = rel_par - sol.offset
    dev = Deviation(float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff**2))),
                    [float(v) for v in np.max(np.abs(diff), axis=0)])
    return dev, sol.drift


def instability_rate(sys: SystemSpec, eta: float, delta: float = 1e-8, T: float | None = None) -> float:
    """Growth rate of a small slow-angle displacement from the unperturbed torus.

    Uses the linearized flow around the torus over a few e-folds and returns the
    log-slope of the separation over the second half of the run.
    """
    T = 4.0 / (eta * np.sqrt(np.linalg.norm(sys.M0, 2))) if T is None else T
    times = np.linspace(0.0, T, 201)
    from .lindstedt_recursion import solve_up_to

    h = solve_up_to(sys, 2)
    par = parametrized_trajectory(sys, h, (0.0, 0.0), eta, times)
    w, V = np.linalg.eigh(sys.M0)
    kick = np.zeros(sys.dim)
    kick[2:] = V[:, -1] * delta
    step = min(1e-3 / eta, T / 2000)
    a = integrate_ode(sys, par.phi[0], par.phidot[0], eta, times, step)
    b = integrate_ode(sys, par.phi[0] + kick, par.phidot[0], eta, times, step)
    sep = np.linalg.norm(a.phi - b.phi, axis=1)
    half = len(times) // 2
    return float(np.polyfit(times[half:], np.log(sep[half:]), 1)[0])
