"""Brute-force references for the transported charge.

Nothing here uses the closed-form charge formula.  Wave functions at later
times come from exact free spectral evolution, evaluated at arbitrary points
by summing the momentum representation directly.

* :func:`integrated_charge` integrates the current at a probe over time with
  an ``exp(-eps t)`` damping and extrapolates ``eps -> 0``.
* :func:`depletion_charge` integrates the continuity equation over a space
  interval: what leaves the interval by ``t_final`` is the transported charge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec, simpson

from .core import PlaneWave, SpectralFunction, WaveFunction, dispersion, spectral_density, to_momentum
from .errors import AccuracyError, ConvergenceError

__all__ = [
    "CurrentSample",
    "IntegratedCharge",
    "DEFAULT_EPS",
    "evaluate",
    "current_components",
    "default_t_max",
    "integrated_charge",
    "depletion_charge",
]

DEFAULT_EPS = (0.08, 0.04, 0.02, 0.01)


@dataclass(frozen=True)
class CurrentSample:
    x: float
    t: float
    j_total: float
    j0: float
    j1: float
    jc: float


@dataclass(frozen=True)
class IntegratedCharge:
    """Abel-regularized time integral of ``j - j0`` at one or more probes."""

    value: np.ndarray
    spread: np.ndarray
    per_eps: np.ndarray
    eps: tuple[float, ...]
    t_max: float
    residual_density: float


def _basis(spec: SpectralFunction, x) -> np.ndarray:
    g = spec.grid
    hbar = g.units.hbar
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.exp(1j * np.outer(x, g.p) / hbar) * (g.dp / math.sqrt(2 * math.pi * hbar))


def evaluate(spec: SpectralFunction, x, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Free-evolved ``psi(x, t)`` and ``d psi / dx`` at arbitrary points."""
    g = spec.grid
    a = spec.samples * np.exp(-1j * dispersion(g.p, g.units) * t)
    basis = _basis(spec, x)
    return basis @ a, basis @ (1j * g.p / g.units.hbar * a)


def _currents(psi1, dpsi1, pw: PlaneWave | None, x, t, u):
    k = u.hbar / u.mass
    if pw is None:  # bare packet: no reference wave, no interference
        j1 = k * np.imag(np.conj(psi1) * dpsi1)
        return j1, j1, np.zeros_like(j1)
    ref = pw(x, t)
    dref = 1j * pw.p0 / u.hbar * ref
    j1 = k * np.imag(np.conj(psi1) * dpsi1)
    jc = k * np.imag(np.conj(ref) * dpsi1 + np.conj(psi1) * dref)
    full = ref + psi1
    j_total = k * np.imag(np.conj(full) * (dref + dpsi1))
    return j_total, j1, jc


def current_components(psi1: WaveFunction, pw: PlaneWave | None, x: float, t: float = 0.0) -> CurrentSample:
    """Current split at ``x`` for the excitation ``psi1`` given at time ``t``.

    The reference wave is taken at the same time ``t``.
    """
    spec = to_momentum(psi1)
    v, dv = evaluate(spec, [x])
    j_total, j1, jc = _currents(v, dv, pw, np.array([x]), t, spec.grid.units)
    return CurrentSample(float(x), float(t), float(j_total[0]), pw.current if pw is not None else 0.0, float(j1[0]), float(jc[0]))


def default_t_max(spec: SpectralFunction, probes) -> float:
    """Four times the time the slow edge of the spectrum needs to reach the farthest probe."""
    g = spec.grid
    rho_p = spectral_density(spec)
    norm = rho_p.sum()
    if norm == 0:
        return 0.0
    p_mean = float((g.p * rho_p).sum() / norm)
    p_std = math.sqrt(max(float(((g.p - p_mean) ** 2 * rho_p).sum() / norm), 0.0))
    # center of the packet from the position-space density of the same state
    psi, _ = evaluate(spec, g.x)
    rho_x = np.abs(psi) ** 2
    x_mean = float((g.x * rho_x).sum() / rho_x.sum())
    v_slow = max(abs(p_mean) - 3 * p_std, 0.1 * p_std) / g.units.mass
    distance = float(np.max(np.abs(np.atleast_1d(probes) - x_mean)))
    return 4.0 * distance / v_slow


def integrated_charge(
    psi1_0: WaveFunction,
    pw: PlaneWave | None,
    x_probe,
    t_max: float | None = None,
    eps_schedule=DEFAULT_EPS,
    *,
    tol: float = 1e-3,
    epsabs: float = 1e-10,
) -> IntegratedCharge:
    """``Q_d(x) = int_0^inf (j1 + jc)(x, t) dt`` by damped time quadrature.

    For each damping rate ``eps`` the integral of ``(j1 + jc) exp(-eps t)``
    over ``[0, t_max]`` is computed with adaptive Gauss-Kronrod quadrature.
    A quadratic least-squares fit in ``eps`` gives the ``eps -> 0`` value; the
    spread is its distance from the cubic interpolant through the same
    points.  A spread above ``tol`` raises ConvergenceError.  With
    ``pw=None`` the bare packet is treated (``jc = 0``).
    """
    probes = np.atleast_1d(np.asarray(x_probe, dtype=float))
    eps = tuple(float(e) for e in eps_schedule)
    if len(eps) < 3 or any(e <= 0 for e in eps) or len(set(eps)) != len(eps):
        raise ValueError("eps_schedule needs at least three distinct positive rates")
    spec = to_momentum(psi1_0)
    if not np.any(spec.samples):
        zeros = np.zeros(probes.size)
        return IntegratedCharge(zeros, zeros, np.zeros((len(eps), probes.size)), eps, 0.0, 0.0)
    if t_max is None:
        t_max = default_t_max(spec, probes)

    g = spec.grid
    basis = _basis(spec, probes)
    dbasis = basis * (1j * g.p / g.units.hbar)
    omega = dispersion(g.p, g.units)
    rates = np.asarray(eps)

    def integrand(t):
        a = spec.samples * np.exp(-1j * omega * t)
        _, j1, jc = _currents(basis @ a, dbasis @ a, pw, probes, t, g.units)
        return np.outer(np.exp(-rates * t), j1 + jc)

    per_eps, _ = quad_vec(integrand, 0.0, t_max, epsabs=epsabs, epsrel=1e-10, norm="max", limit=20_000)
    per_eps = np.asarray(per_eps).reshape(len(eps), probes.size)

    quad = np.polynomial.polynomial.polyfit(rates, per_eps, 2)[0]
    deg = min(len(eps) - 1, 3)
    interp = np.polynomial.polynomial.polyfit(rates, per_eps, deg)[0]
    spread = np.abs(quad - interp)
    if np.any(spread > tol):
        raise ConvergenceError(f"eps extrapolation spread {spread.max():.3e} exceeds {tol:.1e}")

    psi_end, _ = evaluate(spec, probes, t_max)
    return IntegratedCharge(quad, spread, per_eps, eps, float(t_max), float(np.max(np.abs(psi_end) ** 2)))


def depletion_charge(
    psi1_0: WaveFunction,
    pw: PlaneWave,
    x1: float,
    x2: float,
    t_final: float,
    *,
    residual_tol: float = 1e-3,
    points_per_cell: int = 4,
) -> float:
    """``int_{x1}^{x2} (rho(s, 0) - rho(s, t_final)) ds`` with ``rho = |Psi0 + Psi1|^2``.

    Equals the charge difference once the excitation has left the interval;
    raises AccuracyError when ``max |rho(., t_final) - 1|`` on the interval
    still exceeds ``residual_tol``.
    """
    if t_final == 0 or x1 == x2 or not np.any(psi1_0.samples):
        return 0.0
    spec = to_momentum(psi1_0)
    g = spec.grid
    lo, hi = min(x1, x2), max(x1, x2)
    m = max(int(math.ceil((hi - lo) / g.dx * points_per_cell)), 64)
    m += m % 2  # even number of panels
    xs = np.linspace(lo, hi, m + 1)

    def rho(t):
        psi, _ = evaluate(spec, xs, t)
        return np.abs(pw(xs, t) + psi) ** 2

    rho_end = rho(t_final)
    residual = float(np.max(np.abs(rho_end - 1.0)))
    if residual > residual_tol:
        raise AccuracyError(f"density residual {residual:.3e} at t_final exceeds {residual_tol:.1e}")
    out = float(simpson(rho(0.0) - rho_end, x=xs))
    return out if x2 >= x1 else -out
