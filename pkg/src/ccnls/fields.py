"""Periodic grids and the sampled field containers built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus [-L/2, L/2)^d.

    Spectral arrays use the unshifted numpy FFT ordering, so the lattice
    frequency along each axis is ``2*pi*k/L`` with ``k = fftfreq(M) * M``.
    """

    d: int
    L: float
    M: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.d}")
        if not self.L > 0:
            raise ValueError(f"period L must be positive, got {self.L}")
        if not _is_power_of_two(int(self.M)) or int(self.M) != self.M:
            raise ValueError(f"M must be a power of two, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "L", float(self.L))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.d

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def weight(self) -> float:
        """Quadrature weight (L/M)^d of a single grid cell."""
        return self.dx ** self.d

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))

    @cached_property
    def k1d(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.M, d=self.dx)

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        """Frequency components on the full spectral lattice."""
        return tuple(np.meshgrid(*([self.k1d] * self.d), indexing="ij"))

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(k * k for k in self.xi)

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi2)

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        x1 = -self.L / 2 + self.dx * np.arange(self.M)
        return tuple(np.meshgrid(*([x1] * self.d), indexing="ij"))

    @property
    def xi_max(self) -> float:
        """Largest |xi| on the lattice (corner of the Nyquist box)."""
        return float(np.sqrt(self.d) * np.pi * self.M / self.L)

    @property
    def dealias_cutoff(self) -> float:
        """Radius kept by the 2/3 rule, 2*M*pi/(3L)."""
        return 2 * self.M * np.pi / (3 * self.L)

    def fft(self, a: np.ndarray) -> np.ndarray:
        return np.fft.fftn(a, axes=self.spatial_axes)

    def ifft(self, a: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(a, axes=self.spatial_axes)

    def to_dict(self) -> dict:
        return {"d": self.d, "L": self.L, "M": self.M}


@dataclass(frozen=True, eq=False)
class Field:
    """Complex vector field sampled on a grid.

    ``data`` has shape ``(ncomp, M, ..., M)``. When ``spectral`` is true it
    holds raw (unnormalized) FFT coefficients, otherwise point values.
    Fields built for the system carry ``grid.d`` components; scalar helper
    fields (divergences, dot products) carry one.
    """

    grid: Grid
    data: np.ndarray
    spectral: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim == self.grid.d:
            data = data[None]
        if data.shape[1:] != self.grid.shape:
            raise ValueError(f"data shape {data.shape} does not fit grid {self.grid.shape}")
        object.__setattr__(self, "data", data)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int | None = None) -> "Field":
        n = grid.d if ncomp is None else ncomp
        return cls(grid, np.zeros((n,) + grid.shape, dtype=np.complex128), spectral=True)

    @classmethod
    def from_function(cls, grid: Grid, fn, ncomp: int | None = None) -> "Field":
        """Sample ``fn(*x)``; a scalar result is copied into every component."""
        vals = np.asarray(fn(*grid.x), dtype=np.complex128)
        n = grid.d if ncomp is None else ncomp
        if vals.shape == grid.shape:
            vals = np.broadcast_to(vals, (n,) + grid.shape).copy()
        return cls(grid, vals, spectral=False)

    @classmethod
    def mode(cls, grid: Grid, k: tuple[int, ...] | int, amplitude=1.0, component: int | None = None,
             ncomp: int | None = None) -> "Field":
        """Pure lattice mode ``amplitude * exp(i xi_k . x)`` with integer index ``k``."""
        k = (k,) if np.isscalar(k) else tuple(k)
        n = grid.d if ncomp is None else ncomp
        data = np.zeros((n,) + grid.shape, dtype=np.complex128)
        idx = tuple(int(ki) % grid.M for ki in k)
        comps = range(n) if component is None else [component]
        for c in comps:
            # physical value at x uses the shifted origin -L/2
            phase = np.exp(-1j * sum(grid.k1d[i] * grid.L / 2 for i in idx))
            data[(c,) + idx] = amplitude * grid.M ** grid.d * phase
        return cls(grid, data, spectral=True)

    def to_spectral(self) -> "Field":
        if self.spectral:
            return self
        return Field(self.grid, self.grid.fft(self.data), spectral=True)

    def to_physical(self) -> "Field":
        if not self.spectral:
            return self
        return Field(self.grid, self.grid.ifft(self.data), spectral=False)

    @property
    def hat(self) -> np.ndarray:
        return self.data if self.spectral else self.grid.fft(self.data)

    @property
    def values(self) -> np.ndarray:
        return self.grid.ifft(self.data) if self.spectral else self.data

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values), spectral=False)

    def _check(self, other: "Field"):
        if self.grid != other.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        if self.spectral and other.spectral:
            return Field(self.grid, self.data + other.data, spectral=True)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return self + (-1.0) * other

    def __mul__(self, c) -> "Field":
        if isinstance(c, Field):
            raise TypeError("use pointwise helpers for field products")
        return Field(self.grid, c * self.data, spectral=self.spectral)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return (-1.0) * self

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy(), spectral=self.spectral)


@dataclass(frozen=True, eq=False)
class StateBundle:
    """The triple (u, v, w) at one time."""

    u: Field
    v: Field
    w: Field
    time: float = 0.0

    def __post_init__(self):
        g = self.u.grid
        if self.v.grid != g or self.w.grid != g:
            raise ValueError("u, v, w must share one grid")
        for name, f in zip("uvw", self.fields):
            if f.ncomp != g.d:
                raise ValueError(f"{name} has {f.ncomp} components, grid has d={g.d}")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def fields(self) -> tuple[Field, Field, Field]:
        return (self.u, self.v, self.w)

    def stacked_hat(self) -> np.ndarray:
        """Spectral data stacked to shape ``(3, d, M, ..., M)``."""
        return np.stack([f.hat for f in self.fields])

    @classmethod
    def from_stacked_hat(cls, grid: Grid, a: np.ndarray, time: float = 0.0) -> "StateBundle":
        return cls(*(Field(grid, a[i], spectral=True) for i in range(3)), time=time)

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "StateBundle":
        return cls(Field.zeros(grid), Field.zeros(grid), Field.zeros(grid), time)

    def map(self, fn) -> "StateBundle":
        return StateBundle(*(fn(f) for f in self.fields), time=self.time)

    def __sub__(self, other: "StateBundle") -> "StateBundle":
        return StateBundle(self.u - other.u, self.v - other.v, self.w - other.w, self.time)

    def __add__(self, other: "StateBundle") -> "StateBundle":
        return StateBundle(self.u + other.u, self.v + other.v, self.w + other.w, self.time)

    def scaled(self, c) -> "StateBundle":
        return self.map(lambda f: c * f)


@dataclass(frozen=True, eq=False)
class SpaceTimeSample:
    """Field values on a uniform (t, x) lattice.

    ``values`` has shape ``(Q, ncomp, M, ..., M)`` in physical space.
    """

    grid: Grid
    t0: float
    dt: float
    values: np.ndarray
    window: dict | None = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim == self.grid.d + 1:
            vals = vals[:, None]
        if vals.shape[2:] != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not fit grid {self.grid.shape}")
        if vals.shape[0] < 2:
            raise ValueError("a space-time sample needs Q >= 2 times")
        if not self.dt > 0:
            raise ValueError("time step must be positive")
        object.__setattr__(self, "values", vals)

    @property
    def Q(self) -> int:
        return self.values.shape[0]

    @property
    def ncomp(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.Q)

    @property
    def tau(self) -> np.ndarray:
        """Temporal frequency lattice of the rectangular-window DFT."""
        return 2 * np.pi * np.fft.fftfreq(self.Q, d=self.dt)

    def with_values(self, values: np.ndarray, window: dict | None = None) -> "SpaceTimeSample":
        return SpaceTimeSample(self.grid, self.t0, self.dt, values, window if window is not None else self.window)

    @classmethod
    def from_function(cls, grid: Grid, times: np.ndarray, fn, ncomp: int = 1) -> "SpaceTimeSample":
        """Sample ``fn(t, *x)`` at uniform ``times``."""
        times = np.asarray(times, dtype=float)
        dts = np.diff(times)
        if len(times) < 2 or not np.allclose(dts, dts[0], rtol=1e-10, atol=0):
            raise ValueError("times must be uniform with at least two entries")
        vals = np.stack([np.broadcast_to(np.asarray(fn(t, *grid.x), dtype=np.complex128),
                                         (ncomp,) + grid.shape) for t in times])
        return cls(grid, float(times[0]), float(dts[0]), vals)
