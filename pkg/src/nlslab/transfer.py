"""Pigeonhole cut placement, nested smooth cutoffs, covering-map transfer
between a small torus and a big-box plane emulation, and mass monitors.

The cutoff family consists of five nested tensor-product cutoffs chi_0..chi_4
adapted to a cut position per axis.  In units of ``u = (1/eta) * depth *
scale * T`` the level-j cutoff equals 1 at offsets beyond (10 - 2j) u from
the cut and 0 within (9 - 2j) u, so consecutive levels are separated by one
unit and each transition occupies exactly one unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    DiagnosticSeries,
    Field,
    GeometryError,
    GridMismatchError,
    GridSpec,
    PHYSICAL,
    l2_norm,
    smooth_step,
    to_physical,
)

#: plateau/zero offsets of level j, in separation units
PLATEAU_UNITS = [10 - 2 * j for j in range(5)]
ZERO_UNITS = [9 - 2 * j for j in range(5)]

#: maximal slope of the audited smooth step on a unit transition
STEP_SLOPE = 2.0


@dataclass(frozen=True)
class CutoffParams:
    """Geometric parameters shared by the quiet-interval search and cutoffs.

    ``eta`` is eps**2.  The separation unit is (1/eta) * depth * scale *
    time_horizon; the strip half-width is 10 units and the subinterval length
    20 units.  ``clamp`` = None forbids clamping, 'auto' shrinks the unit to
    fit the torus, a float scales the unit by that factor.
    """

    depth: int
    scale: float
    time_horizon: float
    eps: float
    clamp: str | float | None = "auto"

    @property
    def eta(self) -> float:
        return self.eps ** 2

    @property
    def unit(self) -> float:
        return self.depth * self.scale * self.time_horizon / self.eta


@dataclass(frozen=True)
class QuietInterval:
    center: float
    strip_mass: float
    unit: float
    count: int
    clamped: bool


def _strip_mass(u0: Field, axis: int, lo: float, hi: float) -> float:
    """L2 norm of u0 restricted to the strip lo <= x_axis < hi."""
    u = to_physical(u0)
    x = u.grid.axis_points()
    mask = (x >= lo) & (x < hi)
    a2 = np.abs(u.values) ** 2
    sliced = a2[mask, :] if axis == 0 else a2[:, mask]
    return float(np.sqrt(np.sum(sliced) * u.grid.h ** 2))


def find_quiet_interval(u0: Field, axis: int, params: CutoffParams) -> QuietInterval:
    """Center of the minimum-mass subinterval of [L/4, L/2] along an axis.

    Subintervals have length 20 units.  With an unclamped geometry admitting
    at least 16 * mass^2 / eta of them, the pigeonhole principle guarantees
    the returned strip mass is at most eps / 4.
    """
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    grid = u0.grid
    L = grid.side
    mass = l2_norm(u0)
    need = max(1, int(np.ceil(16.0 * mass ** 2 / params.eta)))
    unit = params.unit
    length = 20.0 * unit
    avail = int(np.floor((L / 4.0) / length)) if length > 0 else 0
    clamped = False
    if avail < need:
        if params.clamp is None:
            raise GeometryError(
                f"only {avail} subintervals of length {length} fit in [L/4, L/2]; "
                f"{need} are required"
            )
        if params.clamp == "auto":
            target = int(np.clip(need, 2, 64))
            # strips are sharp index ranges; keep at least two columns each
            target = min(target, max(1, int((L / 4.0) / (2.0 * grid.h))))
            unit = (L / 4.0) / (20.0 * target)
        else:
            unit = params.unit * float(params.clamp)
        length = 20.0 * unit
        avail = int(np.floor((L / 4.0) / length))
        # search strips are sharp index ranges; two columns suffice
        if avail < 1 or length < 2.0 * grid.h:
            raise GeometryError(
                f"clamped strip length {length} has no room on h={grid.h}"
            )
        clamped = True

    best_center, best_mass = None, np.inf
    for i in range(avail):
        lo = L / 4.0 + i * length
        m = _strip_mass(u0, axis, lo, lo + length)
        if m < best_mass:
            best_mass = m
            # snap to the lattice so downstream geometry stays grid-aligned
            best_center = round((lo + length / 2.0) / grid.h) * grid.h
    return QuietInterval(best_center, best_mass, unit, avail, clamped)


def _axis_cutoff(x: np.ndarray, cut: float, l_small: float, unit: float, level: int) -> np.ndarray:
    """1-d cutoff along a big-box axis, adapted to the domain [cut - L, cut]."""
    b = ZERO_UNITS[level] * unit
    rise = smooth_step((x - (cut - l_small + b)) / unit)
    fall = smooth_step(((cut - b) - x) / unit)
    return np.minimum(rise, fall)


@dataclass(frozen=True)
class CutoffFamily:
    """Five nested tensor-product cutoffs on the big box.

    Stores the 1-d factors; levels are materialized on demand to keep large
    grids affordable.  ``cuts`` are the cut coordinates in big-box units.
    """

    grid: GridSpec
    l_small: float
    cuts: tuple[float, float]
    unit: float
    eta: float
    clamped: bool
    factors1: tuple[np.ndarray, ...]
    factors2: tuple[np.ndarray, ...]

    def level(self, j: int) -> Field:
        return Field(self.grid, np.outer(self.factors1[j], self.factors2[j]), PHYSICAL)

    def level_values(self, j: int) -> np.ndarray:
        return np.outer(self.factors1[j], self.factors2[j])

    def gradient_sup(self, j: int) -> float:
        """Spectral sup of |grad chi_j|; exact on the tensor lattice."""
        return max(_spectral_slope_sup(self.factors1[j], self.grid),
                   _spectral_slope_sup(self.factors2[j], self.grid))

    def gradient_bound(self) -> float:
        """Slope bound eta / (depth scale T) carried by the construction.

        The realized profile attains STEP_SLOPE times this value: no smooth
        step on a transition of width ``unit`` can have slope below 1/unit.
        """
        return 1.0 / self.unit

    def product_defect(self, i: int, j: int) -> float:
        """max |chi_i chi_j - chi_i| for j > i (nesting identity)."""
        ci = self.level_values(i)
        cj = self.level_values(j)
        return float(np.max(np.abs(ci * cj - ci)))

    def support_gap(self, i: int, j: int) -> float:
        """Distance from supp chi_i to supp(1 - chi_j), j > i, along the axes."""
        gaps = []
        for fi, fj in ((self.factors1[i], self.factors1[j]),
                       (self.factors2[i], self.factors2[j])):
            supp = np.nonzero(fi > 0.0)[0]
            not_plateau = np.nonzero(fj < 1.0)[0]
            if supp.size == 0 or not_plateau.size == 0:
                continue
            d = np.abs(supp[:, None] - not_plateau[None, :]).min()
            gaps.append(d * self.grid.h)
        return min(gaps) if gaps else np.inf

    def cut_mass(self, u0: Field, j: int) -> float:
        """L2 norm of (1 - chi_j) u0."""
        u = to_physical(u0)
        if u.grid != self.grid:
            raise GridMismatchError("field and cutoff grids differ")
        return float(
            np.sqrt(np.sum(np.abs((1.0 - self.level_values(j)) * u.values) ** 2))
            * self.grid.h
        )


def _spectral_slope_sup(factor: np.ndarray, grid: GridSpec) -> float:
    fhat = np.fft.fft(factor)
    k = np.fft.fftfreq(grid.n, d=grid.h)
    k[grid.n // 2] = 0.0  # odd-derivative convention at Nyquist
    d = np.fft.ifft(2j * np.pi * k * fhat)
    return float(np.max(np.abs(d.real)))


def build_cutoffs(
    c1: float,
    c2: float,
    params: CutoffParams,
    big_grid: GridSpec,
    l_small: float,
    tile: tuple[int, int],
    unit: float | None = None,
) -> CutoffFamily:
    """Construct the nested family adapted to cut centers (c1, c2).

    ``c1, c2`` are cut coordinates on the small torus; ``tile`` selects the
    fundamental domain of the big box the unwrapped data occupies, so the cut
    lines sit at c + (tile + 1) * l_small... i.e. the domain is
    [cut - l_small, cut] per axis with cut = c + (tile_i + 1) * l_small.
    """
    if unit is None:
        unit = params.unit
    clamped = unit != params.unit
    if 20.0 * unit >= l_small:
        if params.clamp is None:
            raise GeometryError(
                f"cutoff pattern span 20*unit = {20 * unit} exceeds the domain side {l_small}"
            )
        unit = l_small / 40.0
        clamped = True
    if unit < 2.0 * big_grid.h:
        raise GeometryError(f"transition unit {unit} unresolved at spacing {big_grid.h}")
    k = big_grid.side / l_small
    if abs(k - round(k)) > 1e-12:
        raise GridMismatchError("big box side must be an integer multiple of l_small")
    x = big_grid.axis_points()
    fams = []
    for c, t in ((c1, tile[0]), (c2, tile[1])):
        cut = c + (t + 1) * l_small
        if cut - l_small < 0 or cut > big_grid.side:
            raise GeometryError(
                f"unwrapped domain [{cut - l_small}, {cut}] leaves the big box"
            )
        fams.append(tuple(_axis_cutoff(x, cut, l_small, unit, j) for j in range(5)))
    return CutoffFamily(
        grid=big_grid,
        l_small=l_small,
        cuts=(c1 + (tile[0] + 1) * l_small, c2 + (tile[1] + 1) * l_small),
        unit=unit,
        eta=params.eta,
        clamped=clamped,
        factors1=fams[0],
        factors2=fams[1],
    )


def mass_outside(traj, chi: Field) -> DiagnosticSeries:
    """Series of integral |1 - chi|^2 |u(t)|^2 over the snapshots of traj."""
    c = to_physical(chi)
    w = np.abs(1.0 - c.values) ** 2
    vals = []
    for snap in traj.snapshots:
        u = to_physical(snap)
        if u.grid != c.grid:
            raise GridMismatchError("trajectory and cutoff grids differ")
        vals.append(float(np.sum(w * np.abs(u.values) ** 2) * u.grid.h ** 2))
    return DiagnosticSeries(np.asarray(traj.times), np.asarray(vals), "mass_outside")


# -- covering-map transfer ----------------------------------------------------

def _fold_factor(big: GridSpec, l_small: float) -> tuple[int, GridSpec]:
    k = big.side / l_small
    ki = int(round(k))
    if abs(k - ki) > 1e-12 or ki < 1 or big.n % ki != 0:
        raise GridMismatchError(
            f"big box side {big.side} is not a commensurate multiple of {l_small}"
        )
    return ki, GridSpec(l_small, big.n // ki)


def push_forward(f: Field, l_small: float) -> Field:
    """Fold a big-box field onto the torus: sum over lattice translates."""
    fp = to_physical(f)
    k, small = _fold_factor(fp.grid, l_small)
    v = fp.values.reshape(k, small.n, k, small.n).sum(axis=(0, 2))
    return Field(small, v, PHYSICAL)


def pull_back(g: Field, big_grid: GridSpec, placement: Field | None = None) -> Field:
    """Tile a torus field periodically over the big box.

    With ``placement`` the tiling is restricted by pointwise multiplication
    (an indicator or cutoff on the big grid).
    """
    gp = to_physical(g)
    k, small = _fold_factor(big_grid, gp.grid.side)
    if small.n != gp.grid.n:
        raise GridMismatchError("grids are not commensurate (different spacings)")
    v = np.tile(gp.values, (k, k))
    if placement is not None:
        pv = to_physical(placement)
        if pv.grid != big_grid:
            raise GridMismatchError("placement must live on the big grid")
        v = v * pv.values
    return Field(big_grid, v, PHYSICAL)


def one_tile_indicator(big_grid: GridSpec, l_small: float, tile: tuple[int, int]) -> Field:
    """Indicator of the fundamental domain tile + [0, l_small)^2."""
    k, small = _fold_factor(big_grid, l_small)
    if not (0 <= tile[0] < k and 0 <= tile[1] < k):
        raise ValueError(f"tile {tile} outside the {k} x {k} tiling")
    v = np.zeros((big_grid.n, big_grid.n))
    s = small.n
    v[tile[0] * s:(tile[0] + 1) * s, tile[1] * s:(tile[1] + 1) * s] = 1.0
    return Field(big_grid, v, PHYSICAL)


def boundary_mass(f: Field, margin: float) -> float:
    """L2 mass within sup-coordinate distance ``margin`` of the box frame."""
    fp = to_physical(f)
    L = fp.grid.side
    if not margin < L / 2:
        raise ValueError(f"margin {margin} must be below half the side {L / 2}")
    x = fp.grid.axis_points()
    near = (x < margin) | (x >= L - margin)
    mask = near[:, None] | near[None, :]
    return float(np.sum(np.abs(fp.values[mask]) ** 2) * fp.grid.h ** 2)
