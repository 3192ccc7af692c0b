"""Units, grids and position/momentum representations.

Fourier convention (symmetric, kernel ``exp(+i p x / hbar)`` for the inverse)::

    psi~(p) = (2 pi hbar)^(-1/2) * integral psi(x) exp(-i p x / hbar) dx
    psi(x)  = (2 pi hbar)^(-1/2) * integral psi~(p) exp(+i p x / hbar) dp

The discrete versions carry the ``dx``/``dp`` measures and the phase from the
box offset ``x_min`` so that continuum formulas hold on the lattice.  Momentum
samples are stored in ascending order, ``p_j = dp * (j - n // 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as _sc

__all__ = [
    "UnitSystem",
    "ATOMIC",
    "Grid",
    "WaveFunction",
    "SpectralFunction",
    "PlaneWave",
    "dispersion",
    "to_momentum",
    "to_position",
    "density",
    "spectral_density",
]


def _frozen(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class UnitSystem:
    """hbar and mass of the model plus SI -> atomic-unit conversion factors.

    The defaults are atomic units (hbar = m = e = 1).
    """

    hbar: float = 1.0
    mass: float = 1.0
    charge: float = 1.0
    bohr_per_nm: float = 1e-9 / _sc.physical_constants["atomic unit of length"][0]
    au_time_per_fs: float = 1e-15 / _sc.physical_constants["atomic unit of time"][0]
    au_field_per_v_per_m: float = 1.0 / _sc.physical_constants["atomic unit of electric field"][0]
    speed_of_light: float = 1.0 / _sc.fine_structure

    def __post_init__(self):
        for name in ("hbar", "mass", "bohr_per_nm", "au_time_per_fs",
                     "au_field_per_v_per_m", "speed_of_light"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def nm(self, value_nm: float) -> float:
        """Length in nm -> bohr."""
        return value_nm * self.bohr_per_nm

    def fs(self, value_fs: float) -> float:
        """Time in fs -> atomic time units."""
        return value_fs * self.au_time_per_fs

    def field_from_si(self, value_v_per_m: float) -> float:
        """Electric field in V/m -> atomic field units."""
        return value_v_per_m * self.au_field_per_v_per_m

    def field_to_si(self, value_au: float) -> float:
        return value_au / self.au_field_per_v_per_m

    def omega_from_wavelength(self, wavelength_nm: float) -> float:
        """Carrier angular frequency 2 pi c / lambda for a vacuum wavelength in nm."""
        return 2.0 * math.pi * self.speed_of_light / self.nm(wavelength_nm)


ATOMIC = UnitSystem()


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sampling ``x_k = x_min + k dx``, ``k = 0..n-1``."""

    x_min: float
    dx: float
    n: int
    units: UnitSystem = ATOMIC

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError("n must be an integer >= 8")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_bounds(cls, x_min: float, length: float, n: int, units: UnitSystem = ATOMIC) -> Grid:
        return cls(x_min=x_min, dx=length / n, n=n, units=units)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x_max(self) -> float:
        """Right end of the periodic box (exclusive)."""
        return self.x_min + self.length

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def dp(self) -> float:
        return 2.0 * math.pi * self.units.hbar / (self.n * self.dx)

    @property
    def p(self) -> np.ndarray:
        return self.dp * (np.arange(self.n) - self.n // 2)

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_min + (self.n - 1) * self.dx

    def lattice_index(self, p: float, rtol: float = 1e-9) -> int | None:
        """Index of ``p`` on the momentum lattice, or None when ``p`` is off-lattice."""
        j = p / self.dp
        jr = round(j)
        if abs(j - jr) > rtol * max(1.0, abs(j)):
            return None
        idx = jr + self.n // 2
        if not 0 <= idx < self.n:
            return None
        return int(idx)


@dataclass(frozen=True)
class WaveFunction:
    """Complex samples of a wave function in position representation."""

    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = _frozen(self.samples, complex)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("wave function contains non-finite samples")
        object.__setattr__(self, "samples", s)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dx)

    def __add__(self, other: WaveFunction) -> WaveFunction:
        if other.grid != self.grid:
            raise ValueError("grids differ")
        return WaveFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other: WaveFunction) -> WaveFunction:
        if other.grid != self.grid:
            raise ValueError("grids differ")
        return WaveFunction(self.grid, self.samples - other.samples)


@dataclass(frozen=True)
class SpectralFunction:
    """Complex samples on the momentum lattice ``grid.p`` (ascending)."""

    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = _frozen(self.samples, complex)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("spectral function contains non-finite samples")
        object.__setattr__(self, "samples", s)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dp)


@dataclass(frozen=True)
class PlaneWave:
    """Unit-amplitude reference wave ``exp(i (p0 x / hbar - omega(p0) t))``."""

    p0: float
    units: UnitSystem = ATOMIC

    def __post_init__(self):
        if not math.isfinite(self.p0) or self.p0 == 0:
            raise ValueError("plane-wave momentum p0 must be finite and nonzero")

    @property
    def omega(self) -> float:
        return dispersion(self.p0, self.units)

    @property
    def current(self) -> float:
        """Constant current density p0 / m carried by the plane wave."""
        return self.p0 / self.units.mass

    def __call__(self, x, t: float = 0.0):
        hbar = self.units.hbar
        return np.exp(1j * (self.p0 * np.asarray(x) / hbar - self.omega * t))

    def on(self, grid: Grid, t: float = 0.0) -> WaveFunction:
        return WaveFunction(grid, self(grid.x, t))

    def is_commensurate(self, grid: Grid) -> bool:
        return grid.lattice_index(self.p0) is not None


def dispersion(p, units: UnitSystem = ATOMIC):
    """Free-particle angular frequency ``p**2 / (2 m hbar)``."""
    return np.square(p) / (2.0 * units.mass * units.hbar)


def to_momentum(psi: WaveFunction) -> SpectralFunction:
    g = psi.grid
    hbar = g.units.hbar
    coeffs = np.fft.fftshift(np.fft.fft(psi.samples))
    phase = np.exp(-1j * g.p * g.x_min / hbar)
    return SpectralFunction(g, g.dx / math.sqrt(2 * math.pi * hbar) * phase * coeffs)


def to_position(spec: SpectralFunction) -> WaveFunction:
    g = spec.grid
    hbar = g.units.hbar
    shifted = np.fft.ifftshift(spec.samples * np.exp(1j * g.p * g.x_min / hbar))
    scale = g.dp * g.n / math.sqrt(2 * math.pi * hbar)
    return WaveFunction(g, scale * np.fft.ifft(shifted))


def density(psi: WaveFunction) -> np.ndarray:
    return np.abs(psi.samples) ** 2


def spectral_density(spec: SpectralFunction) -> np.ndarray:
    return np.abs(spec.samples) ** 2
