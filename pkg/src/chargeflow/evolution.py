"""Free spectral propagation and minimal-coupling propagation through a laser pulse.

The pulse propagator discretizes ``H = (p - e A(x, t))^2 / (2 m)`` on a
three-point stencil with Peierls link phases

    (H psi)_k = -hbar^2 / (2 m dx^2) * [exp(-i th_{k+1/2}) psi_{k+1} - 2 psi_k
                                        + exp(+i th_{k-1/2}) psi_{k-1}],
    th_{k+1/2} = e A(x_{k+1/2}, t) dx / hbar,

which is Hermitian for any A, and advances it with Crank-Nicolson (midpoint
Hamiltonian).  Because the plane wave is an exact eigenvector of the free
stencil, the solver works with the deviation ``phi = psi - psi0_discrete``;
each step is a periodic tridiagonal solve, so the scheme is exactly the
Crank-Nicolson update of the full state on the periodic box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from scipy.optimize import minimize_scalar

from .core import ATOMIC, Grid, PlaneWave, SpectralFunction, UnitSystem, WaveFunction, dispersion, to_momentum, to_position
from .errors import AccuracyError, ConvergenceError, DomainError

__all__ = [
    "PulseParams",
    "SolverConfig",
    "PulseRun",
    "free_propagate",
    "free_propagate_spectrum",
    "vector_potential",
    "electric_field",
    "peak_field",
    "evolve_pulse",
    "extract_excitation",
    "pulse_grid",
]


@dataclass(frozen=True)
class PulseParams:
    """Vector potential ``A0 cos^2(pi (x - x0) / l) sin^2(pi t / tau) cos(omega0 t)``.

    Active for ``|x - x0| <= l / 2`` and ``-tau <= t <= 0``, zero elsewhere.
    ``width = inf`` gives a spatially uniform ``A(t)`` on the whole box.
    """

    a0: float
    omega0: float
    tau: float
    x_center: float
    width: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not self.omega0 >= 0:
            raise ValueError("omega0 must be non-negative")

    @property
    def region(self) -> tuple[float, float]:
        return self.x_center - self.width / 2, self.x_center + self.width / 2

    @classmethod
    def from_f0(cls, f0: float, omega0: float, tau: float, x_center: float, width: float) -> PulseParams:
        """Calibrate ``A0`` so that the peak of ``|E(x, t)|`` equals ``f0``."""
        unit = cls(1.0, omega0, tau, x_center, width)
        return replace(unit, a0=f0 / peak_field(unit))

    @classmethod
    def laser(cls, f0: float, wavelength_nm: float = 800.0, width_nm: float = 800.0,
              cycles: float = 4.0, x_center: float = 0.0, units: UnitSystem = ATOMIC) -> PulseParams:
        """Pulse from laboratory quantities; ``f0`` is in atomic field units."""
        omega0 = units.omega_from_wavelength(wavelength_nm)
        tau = 2 * math.pi * cycles / omega0
        return cls.from_f0(f0, omega0, tau, x_center, units.nm(width_nm))


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.1
    scheme: str = "crank_nicolson"
    convergence: float = 1e-8
    check_convergence: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme != "crank_nicolson":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if not self.convergence > 0:
            raise ValueError("convergence tolerance must be positive")


@dataclass(frozen=True)
class PulseRun:
    """Outcome of :func:`evolve_pulse`: the t = 0 state plus solver diagnostics."""

    psi: WaveFunction
    norm_drift: float
    steps: int
    dt: float
    dt_delta: float | None
    stability: float


# --- free evolution ----------------------------------------------------------

def free_propagate_spectrum(spec: SpectralFunction, t: float) -> SpectralFunction:
    g = spec.grid
    return SpectralFunction(g, spec.samples * np.exp(-1j * dispersion(g.p, g.units) * t))


def free_propagate(psi: WaveFunction, t: float) -> WaveFunction:
    """Exact free evolution by ``t`` (negative allowed) on the periodic box."""
    if t == 0:
        return psi
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return to_position(free_propagate_spectrum(to_momentum(psi), t))


# --- pulse ---------------------------------------------------------------------

def _envelope_x(pp: PulseParams, x):
    x = np.asarray(x, dtype=float)
    if math.isinf(pp.width):
        return np.ones_like(x)
    inside = np.abs(x - pp.x_center) <= pp.width / 2
    return np.where(inside, np.cos(np.pi * (x - pp.x_center) / pp.width) ** 2, 0.0)


def _active_t(pp: PulseParams, t):
    t = np.asarray(t, dtype=float)
    return (t >= -pp.tau) & (t <= 0)


def vector_potential(pp: PulseParams, x, t):
    t = np.asarray(t, dtype=float)
    temporal = np.where(_active_t(pp, t), np.sin(np.pi * t / pp.tau) ** 2 * np.cos(pp.omega0 * t), 0.0)
    out = pp.a0 * _envelope_x(pp, x) * temporal
    return float(out) if np.ndim(out) == 0 else out


def electric_field(pp: PulseParams, x, t):
    """``E = -dA/dt`` in closed form."""
    t = np.asarray(t, dtype=float)
    s = np.pi / pp.tau
    dtemporal = s * np.sin(2 * s * t) * np.cos(pp.omega0 * t) - pp.omega0 * np.sin(s * t) ** 2 * np.sin(pp.omega0 * t)
    out = -pp.a0 * _envelope_x(pp, x) * np.where(_active_t(pp, t), dtemporal, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def peak_field(pp: PulseParams) -> float:
    """``max |E(x, t)|`` over the pulse (attained at ``x = x_center``)."""
    ts = np.linspace(-pp.tau, 0.0, 4001)
    vals = np.abs(electric_field(pp, pp.x_center, ts))
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    res = minimize_scalar(lambda t: -abs(electric_field(pp, pp.x_center, t)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12 * pp.tau})
    return max(float(vals[i]), -float(res.fun))


def pulse_grid(pp: PulseParams, points: int = 1 << 15, span: float = 4.0, units: UnitSystem = ATOMIC) -> Grid:
    """Box of length ``span * width`` centered on the interaction region."""
    if math.isinf(pp.width):
        raise ValueError("a spatially uniform pulse has no natural box size")
    length = span * pp.width
    return Grid.from_bounds(pp.x_center - length / 2, length, points, units)


def _check_geometry(grid: Grid, pp: PulseParams) -> None:
    if math.isinf(pp.width):
        return
    left, right = pp.region
    if left - grid.x_min < pp.width or grid.x_max - right < pp.width:
        raise DomainError("interaction region must sit inside the box with a margin of at least one width")


@njit(cache=True)
def _cyclic_solve(sub, diag, sup, corner_lo, corner_hi, rhs):
    """Solve a periodic tridiagonal system (Sherman-Morrison around Thomas).

    ``sub[k]`` is M[k+1, k], ``sup[k]`` is M[k, k+1], ``corner_lo`` is
    M[n-1, 0] and ``corner_hi`` is M[0, n-1].
    """
    n = diag.size
    gamma = -diag[0]
    b = diag.copy()
    b[0] = diag[0] - gamma
    b[n - 1] = diag[n - 1] - corner_lo * corner_hi / gamma
    y = rhs.copy()
    z = np.zeros(n, dtype=np.complex128)
    z[0] = gamma
    z[n - 1] = corner_lo
    cp = np.empty(n, dtype=np.complex128)
    cp[0] = sup[0] / b[0]
    y[0] = y[0] / b[0]
    z[0] = z[0] / b[0]
    for k in range(1, n):
        denom = b[k] - sub[k - 1] * cp[k - 1]
        if k < n - 1:
            cp[k] = sup[k] / denom
        y[k] = (y[k] - sub[k - 1] * y[k - 1]) / denom
        z[k] = (z[k] - sub[k - 1] * z[k - 1]) / denom
    for k in range(n - 2, -1, -1):
        y[k] -= cp[k] * y[k + 1]
        z[k] -= cp[k] * z[k + 1]
    v_last = corner_hi / gamma
    fact = (y[0] + v_last * y[n - 1]) / (1.0 + z[0] + v_last * z[n - 1])
    return y - fact * z


@njit(cache=True)
def _cn_run(env, k0, c, h, hbar, tau, omega0, link_scale, plane, r, steps):
    n = plane.size
    nl = env.size
    alpha = 0.5j * h / hbar
    phi = np.zeros(n, dtype=np.complex128)
    upper = np.full(n, -c + 0j)
    diag = np.full(n, 1.0 + 2.0 * alpha * c)
    sub = np.empty(n - 1, dtype=np.complex128)
    sup = np.empty(n - 1, dtype=np.complex128)
    rhs = np.empty(n, dtype=np.complex128)
    for step in range(steps):
        m = steps - step
        t_mid = -tau + (step + 0.5) * h
        amp = link_scale * np.sin(np.pi * t_mid / tau) ** 2 * np.cos(omega0 * t_mid)
        for j in range(nl):
            upper[k0 + j] = -c * np.exp(-1j * amp * env[j])
        w0 = r ** (-m) + r ** (-(m - 1))
        for k in range(n):
            kp = k + 1 if k + 1 < n else 0
            km = k - 1 if k > 0 else n - 1
            hphi = 2.0 * c * phi[k] + upper[k] * phi[kp] + np.conj(upper[km]) * phi[km]
            rhs[k] = phi[k] - alpha * hphi
        for j in range(nl):
            k = k0 + j
            du = upper[k] + c
            if du != 0:
                kp = k + 1 if k + 1 < n else 0
                rhs[k] -= alpha * du * plane[kp] * w0
                rhs[kp] -= alpha * np.conj(du) * plane[k] * w0
        for k in range(n - 1):
            sup[k] = alpha * upper[k]
            sub[k] = alpha * np.conj(upper[k])
        phi = _cyclic_solve(sub, diag, sup, alpha * upper[n - 1], alpha * np.conj(upper[n - 1]), rhs)
    return phi


def _propagate(grid: Grid, pw: PlaneWave, pp: PulseParams, dt: float) -> tuple[np.ndarray, int, float]:
    units = grid.units
    hbar = units.hbar
    steps = max(1, math.ceil(pp.tau / dt - 1e-9))
    h = pp.tau / steps
    n, dx = grid.n, grid.dx
    x = grid.x
    c = hbar**2 / (2 * units.mass * dx**2)

    # Links k -> k+1 that can carry a nonzero Peierls phase.
    left, right = pp.region
    if math.isinf(pp.width):
        k0, k1 = 0, n  # every link, including the wrap-around one
    else:
        k0 = max(int(np.searchsorted(x, left)) - 2, 0)
        k1 = min(int(np.searchsorted(x, right)) + 2, n - 1)
    env = np.ascontiguousarray(_envelope_x(pp, x[k0:k1] + dx / 2))

    # Exact CN step factor of the plane wave under the free stencil.
    e_disc = 2 * c * (1 - math.cos(pw.p0 * dx / hbar))
    r = (1 - 0.5j * h * e_disc / hbar) / (1 + 0.5j * h * e_disc / hbar)
    plane = np.exp(1j * pw.p0 * x / hbar)
    link_scale = units.charge * pp.a0 * dx / hbar
    phi = _cn_run(env, k0, c, h, hbar, pp.tau, pp.omega0, link_scale, plane, r, steps)
    return phi, steps, h


def evolve_pulse(pw: PlaneWave, pp: PulseParams, cfg: SolverConfig, grid: Grid) -> PulseRun:
    """Propagate the plane wave from ``t = -tau`` to ``t = 0`` through the pulse.

    The initial state is the discrete plane wave whose phase is anchored so
    that it equals ``exp(i p0 x / hbar)`` at ``t = 0`` in the absence of the
    pulse.  With ``cfg.check_convergence`` the run is repeated at ``dt / 2``
    and a sup-norm change above ``cfg.convergence`` raises ConvergenceError.
    """
    _check_geometry(grid, pp)
    phi, steps, h = _propagate(grid, pw, pp, cfg.dt)
    delta = None
    if cfg.check_convergence:
        phi_half, _, _ = _propagate(grid, pw, pp, h / 2)
        delta = float(np.max(np.abs(phi_half - phi)))
        if delta > cfg.convergence:
            raise ConvergenceError(
                f"halving dt changed the state by {delta:.3e} (tolerance {cfg.convergence:.1e})"
            )
    units = grid.units
    psi = np.exp(1j * pw.p0 * grid.x / units.hbar) + phi
    norm0 = grid.n * grid.dx
    norm = float(np.sum(np.abs(psi) ** 2) * grid.dx)
    stability = h * 2 * units.hbar / (units.mass * grid.dx**2)
    return PulseRun(WaveFunction(grid, psi), abs(norm - norm0) / norm0, steps, h, delta, stability)


def extract_excitation(psi: WaveFunction, pw: PlaneWave, *, threshold: float = 1e-6) -> WaveFunction:
    """``Psi1 = Psi - exp(i p0 x / hbar)`` at t = 0, checked for localization."""
    g = psi.grid
    psi1 = psi.samples - np.exp(1j * pw.p0 * g.x / g.units.hbar)
    edge = max(abs(psi1[0]), abs(psi1[-1]))
    if edge > threshold:
        raise AccuracyError(f"excitation not localized: edge amplitude {edge:.3e} > {threshold:.1e}")
    return WaveFunction(g, psi1)
