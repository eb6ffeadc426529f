"""Grids, fields, transforms and the basic L2 geometry.

Everything lives on a square torus of side ``L`` discretized by ``n`` points
per side (``n`` a power of two).  Frequencies are stored in centered order,
``j/L`` with integer ``j`` running over ``-n/2 .. n/2 - 1`` along each axis.

Conventions (all other modules inherit them):

* forward transform   ``F(j/L) = h^2 * sum_x f(x) exp(-2 pi i x . j/L)``
* inverse transform   ``f(x)   = L^-2 * sum_j F(j/L) exp(+2 pi i x . j/L)``
* Laplacian symbol    ``-4 pi^2 |j/L|^2``

All operations are pure functions of immutable values; nothing here keeps
global mutable state beyond a read-only cache of frequency meshes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

TWO_PI = 2.0 * np.pi

PHYSICAL = "physical"
SPECTRAL = "spectral"


class GridMismatchError(ValueError):
    """Two fields do not share a grid or a representation."""


class NyquistError(ValueError):
    """A multiplier's support is not representable on the grid."""


class AliasingError(ValueError):
    """The cubic term of a truncated flow would alias on this grid."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""


class GeometryError(ValueError):
    """A cutoff or interval construction does not fit the torus."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Square torus of physical side ``side`` with ``n`` points per side."""

    side: float
    n: int

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"side must be positive, got {self.side}")
        if not (_is_pow2(self.n) and self.n >= 8):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return self.side / self.n

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude along an axis."""
        return (self.n / 2) / self.side

    def axis_points(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def axis_freqs(self) -> np.ndarray:
        """Centered frequency axis, -n/2 .. n/2-1 over L."""
        return (np.arange(self.n) - self.n // 2) / self.side


# Frequency meshes are cached per (n, side); entries are treated as read-only.
# Plain dict plus GIL atomicity suffices: a racing recompute is harmless.
_MESH_CACHE: dict[tuple[int, float], dict[str, np.ndarray]] = {}


def freq_mesh(grid: GridSpec) -> dict[str, np.ndarray]:
    key = (grid.n, grid.side)
    mesh = _MESH_CACHE.get(key)
    if mesh is None:
        ax = grid.axis_freqs()
        xi1, xi2 = np.meshgrid(ax, ax, indexing="ij")
        sq = xi1 * xi1 + xi2 * xi2
        mesh = {
            "xi1": xi1,
            "xi2": xi2,
            "abs": np.sqrt(sq),
            "sq": sq,
        }
        for a in mesh.values():
            a.setflags(write=False)
        _MESH_CACHE[key] = mesh
    return mesh


@dataclass(frozen=True)
class Field:
    """Complex scalar field on a grid, in physical or spectral representation."""

    grid: GridSpec
    values: np.ndarray
    rep: str = PHYSICAL

    def __post_init__(self):
        if self.rep not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {self.rep!r}")
        v = np.asarray(self.values)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"values shape {v.shape} does not match grid n={self.grid.n}"
            )
        if v.dtype != np.complex128:
            v = v.astype(np.complex128)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class DiagnosticSeries:
    """Scalar time series attached to a run (drifts, masses, ...)."""

    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values)
        if t.ndim != 1 or v.shape[:1] != t.shape:
            raise ValueError("times and values must be 1-d and equal length")
        if t.size >= 2 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


# -- transforms ---------------------------------------------------------------

def spectral_from_physical_array(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft2(values)) * (grid.h ** 2)


def physical_from_spectral_array(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.fft.ifft2(np.fft.ifftshift(values)) / (grid.h ** 2)


def to_spectral(f: Field) -> Field:
    if f.rep == SPECTRAL:
        return f
    return Field(f.grid, spectral_from_physical_array(f.values, f.grid), SPECTRAL)


def to_physical(f: Field) -> Field:
    if f.rep == PHYSICAL:
        return f
    return Field(f.grid, physical_from_spectral_array(f.values, f.grid), PHYSICAL)


def ensure_rep(f: Field, rep: str) -> Field:
    return to_spectral(f) if rep == SPECTRAL else to_physical(f)


def same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


# -- inner products and norms -------------------------------------------------

def inner_product(f: Field, g: Field) -> complex:
    """L2 pairing, conjugate-linear in the first argument."""
    same_grid(f, g)
    if f.rep != g.rep:
        raise GridMismatchError("representations differ; convert one side first")
    raw = np.vdot(f.values, g.values)
    if f.rep == PHYSICAL:
        return complex(raw * f.grid.h ** 2)
    return complex(raw / f.grid.side ** 2)


def symplectic_form(f: Field, g: Field) -> float:
    """omega(f, g) = -Im <f, g>; antisymmetric, real-valued."""
    return -inner_product(f, g).imag


def l2_norm(f: Field) -> float:
    """L2 norm, valid in either representation (Plancherel)."""
    raw = float(np.sum(np.abs(f.values) ** 2))
    if f.rep == PHYSICAL:
        return float(np.sqrt(raw * f.grid.h ** 2))
    return float(np.sqrt(raw / f.grid.side ** 2))


def lebesgue_norm(f: Field, p: float) -> float:
    """(h^2 sum |f|^p)^(1/p); p = inf gives the max modulus.

    Requires the physical representation.
    """
    if f.rep != PHYSICAL:
        raise GridMismatchError("lebesgue_norm requires a physical-space field")
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    return float((np.sum(a ** p) * f.grid.h ** 2) ** (1.0 / p))


def sobolev_seminorm(f: Field, s: float) -> float:
    """Homogeneous Sobolev seminorm of order s in [0, 1].

    Spectral multiplier (2 pi |j/L|)^s; s = 0 reduces to the L2 norm.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if s == 0.0:
        return l2_norm(f)
    F = to_spectral(f)
    w = (TWO_PI * freq_mesh(f.grid)["abs"]) ** (2.0 * s)
    raw = float(np.sum(w * np.abs(F.values) ** 2))
    return float(np.sqrt(raw / f.grid.side ** 2))


def energy(f: Field) -> float:
    """(1/2)|grad f|_2^2 + (1/4)|f|_4^4 on a physical-space field."""
    return 0.5 * sobolev_seminorm(f, 1.0) ** 2 + 0.25 * lebesgue_norm(f, 4.0) ** 4


# -- constructors -------------------------------------------------------------

def constant_field(grid: GridSpec, c: complex) -> Field:
    return Field(grid, np.full((grid.n, grid.n), c, dtype=np.complex128), PHYSICAL)


def pure_mode(grid: GridSpec, j: tuple[int, int], amplitude: complex = 1.0) -> Field:
    """Plane wave exp(2 pi i x . j/L) with j on the integer lattice."""
    half = grid.n // 2
    if not (-half <= j[0] < half and -half <= j[1] < half):
        raise ValueError(f"mode {j} outside the lattice for n={grid.n}")
    x = grid.axis_points()
    ph1 = np.exp(TWO_PI * 1j * x * j[0] / grid.side)
    ph2 = np.exp(TWO_PI * 1j * x * j[1] / grid.side)
    return Field(grid, amplitude * np.outer(ph1, ph2), PHYSICAL)


def random_field(grid: GridSpec, seed: int = 0, rng: np.random.Generator | None = None) -> Field:
    rng = np.random.default_rng(seed) if rng is None else rng
    v = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    return Field(grid, v, PHYSICAL)


def random_band_limited(
    grid: GridSpec,
    radius: float,
    seed: int = 0,
    mass: float = 1.0,
    rng: np.random.Generator | None = None,
) -> Field:
    """Gaussian white noise on the modes |j/L| <= radius, normalized to ``mass``."""
    rng = np.random.default_rng(seed) if rng is None else rng
    mesh = freq_mesh(grid)
    mask = mesh["abs"] <= radius
    coeffs = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    F = Field(grid, np.where(mask, coeffs, 0.0), SPECTRAL)
    nrm = l2_norm(F)
    if nrm == 0.0:
        raise ValueError("band contains no lattice modes")
    F = Field(grid, F.values * (mass / nrm), SPECTRAL)
    return to_physical(F)


def indicator_strip(grid: GridSpec, axis: int, lo: float, hi: float) -> Field:
    """Indicator of the strip lo <= x_axis < hi (coordinates in [0, L))."""
    x = grid.axis_points()
    m1 = ((x >= lo) & (x < hi)).astype(float)
    v = m1[:, None] * np.ones(grid.n) if axis == 0 else np.ones(grid.n)[:, None] * m1
    return Field(grid, v, PHYSICAL)


def indicator_box(grid: GridSpec, center: tuple[float, float], half_side: float) -> Field:
    """Indicator of a sup-metric box around ``center`` (torus distances)."""
    x = grid.axis_points()
    out = np.ones((grid.n, grid.n))
    for ax, c in enumerate(center):
        d = np.abs(x - c)
        d = np.minimum(d, grid.side - d)
        m = (d <= half_side).astype(float)
        out *= m[:, None] if ax == 0 else m[None, :]
    return Field(grid, out, PHYSICAL)


def smooth_step(t):
    """C-infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1.

    S(t) = sig(t) / (sig(t) + sig(1-t)) with sig(t) = exp(-1/t) for t > 0.
    This is the one audited smooth profile used by every cutoff in the package.
    Its maximal slope on the unit transition is 2.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return float(out[0]) if scalar else out


def radial_bump(
    grid: GridSpec,
    center: tuple[float, float],
    inner_radius: float,
    outer_radius: float,
    mass: float | None = None,
) -> Field:
    """Smooth radial plateau bump: 1 inside inner_radius, 0 outside outer_radius."""
    if not 0 < inner_radius < outer_radius:
        raise ValueError("need 0 < inner_radius < outer_radius")
    x = grid.axis_points()
    d1 = np.abs(x - center[0]); d1 = np.minimum(d1, grid.side - d1)
    d2 = np.abs(x - center[1]); d2 = np.minimum(d2, grid.side - d2)
    r = np.sqrt(d1[:, None] ** 2 + d2[None, :] ** 2)
    v = smooth_step((outer_radius - r) / (outer_radius - inner_radius))
    f = Field(grid, v, PHYSICAL)
    if mass is not None:
        f = Field(grid, f.values * (mass / l2_norm(f)), PHYSICAL)
    return f
