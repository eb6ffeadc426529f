"""Scaling / translation / Galilei symmetry operators and decoupling
diagnostics.

The basic unitary operator acts as

    [g f](x) = N exp(2 pi i x . xi) f(N (x - x0)),

with dyadic scale N realized exactly by relabeling the grid (side L -> L/N,
same point count, values times N), translation by a lattice vector of the
output grid, and modulation by a frequency on the output lattice.  The
propagated variant applies the free flow for a time shift first.  The
space-time version transports whole trajectories; its Galilei drift is
4 pi xi t in the cycles-per-length frequency convention used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    Field,
    GridMismatchError,
    GridSpec,
    PHYSICAL,
    SPECTRAL,
    TWO_PI,
    ensure_rep,
    freq_mesh,
    inner_product,
    l2_norm,
    lebesgue_norm,
    to_physical,
    to_spectral,
)
from .dynamics import Trajectory, linear_propagate

#: Galilei drift velocity per unit frequency (cycles-per-length convention)
DRIFT_COEFF = 2.0 * TWO_PI


@dataclass(frozen=True)
class SymParams:
    """Scale, frequency shift, translation and time shift of one operator."""

    scale: float = 1.0
    freq_shift: tuple[float, float] = (0.0, 0.0)
    shift: tuple[float, float] = (0.0, 0.0)
    time_shift: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def _check_dyadic(scale: float) -> None:
    k = np.log2(scale)
    if abs(k - round(k)) > 1e-12:
        raise ValueError(f"scale {scale} is not a power of two")


def _check_lattice(value: float, spacing: float, what: str) -> None:
    r = value / spacing
    if abs(r - round(r)) > 1e-9:
        raise ValueError(f"{what} {value} is not on the lattice of spacing {spacing}")


def _translate(f: Field, shift: tuple[float, float]) -> Field:
    """Exact spectral translation f(. - shift); valid for any real shift."""
    if shift[0] == 0.0 and shift[1] == 0.0:
        return f
    F = to_spectral(f)
    mesh = freq_mesh(f.grid)
    phase = np.exp(-TWO_PI * 1j * (mesh["xi1"] * shift[0] + mesh["xi2"] * shift[1]))
    return ensure_rep(Field(f.grid, F.values * phase, SPECTRAL), f.rep)


def _modulate(f: Field, xi: tuple[float, float]) -> Field:
    if xi[0] == 0.0 and xi[1] == 0.0:
        return f
    fp = to_physical(f)
    x = f.grid.axis_points()
    ph = np.exp(TWO_PI * 1j * x * xi[0])[:, None] * np.exp(TWO_PI * 1j * x * xi[1])[None, :]
    return ensure_rep(Field(f.grid, fp.values * ph, PHYSICAL), f.rep)


def _rescale(f: Field, scale: float) -> Field:
    """x -> scale * x as an exact grid relabeling: side L -> L/scale, values * scale."""
    if scale == 1.0:
        return f
    out_grid = GridSpec(f.grid.side / scale, f.grid.n)
    return Field(out_grid, f.values * scale, f.rep)


def apply_symmetry(f: Field, p: SymParams) -> Field:
    """[g f](x) = N exp(2 pi i x.xi) f(N(x - x0)); unitary on L2.

    The output lives on the rescaled grid (side L/N).  x0 must lie on the
    output spatial lattice and xi on the output frequency lattice.
    """
    _check_dyadic(p.scale)
    out_side = f.grid.side / p.scale
    h_out = out_side / f.grid.n
    for c in p.shift:
        _check_lattice(c, h_out, "translation component")
    for c in p.freq_shift:
        _check_lattice(c, 1.0 / out_side, "frequency-shift component")
    out = _rescale(f, p.scale)
    out = _translate(out, p.shift)
    return _modulate(out, p.freq_shift)


def apply_symmetry_inverse(f: Field, p: SymParams) -> Field:
    _check_dyadic(p.scale)
    out = _modulate(f, (-p.freq_shift[0], -p.freq_shift[1]))
    out = _translate(out, (-p.shift[0], -p.shift[1]))
    return _rescale(out, 1.0 / p.scale)


def apply_propagated_symmetry(f: Field, p: SymParams) -> Field:
    """g applied after the free flow for the time shift: g exp(i t0 Lap) f."""
    return apply_symmetry(linear_propagate(f, p.time_shift), p)


def apply_propagated_symmetry_inverse(f: Field, p: SymParams) -> Field:
    return linear_propagate(apply_symmetry_inverse(f, p), -p.time_shift)


def apply_spacetime_symmetry(traj: Trajectory, p: SymParams, out_times) -> list[Field]:
    """Space-time transport of a trajectory.

    At output time t the source time is t0 + t N^2 (linear interpolation
    between snapshots) and the spatial map is

        N exp(2 pi i x.xi) exp(-4 pi^2 i t |xi|^2) v(., N(x - x0 - 4 pi xi t)),

    the drift being realized spectrally so off-lattice displacements stay
    exact on band-limited data.
    """
    _check_dyadic(p.scale)
    out_side = traj.grid.side / p.scale
    h_out = out_side / traj.grid.n
    for c in p.shift:
        _check_lattice(c, h_out, "translation component")
    for c in p.freq_shift:
        _check_lattice(c, 1.0 / out_side, "frequency-shift component")

    t_src = traj.times
    out = []
    for t in np.atleast_1d(np.asarray(out_times, dtype=float)):
        s = p.time_shift + t * p.scale ** 2
        if s < t_src[0] - 1e-12 or s > t_src[-1] + 1e-12:
            raise ValueError(f"source time {s} outside trajectory range")
        i = int(np.clip(np.searchsorted(t_src, s) - 1, 0, len(t_src) - 2))
        w = (s - t_src[i]) / (t_src[i + 1] - t_src[i])
        w = float(np.clip(w, 0.0, 1.0))
        a = to_physical(traj.snapshots[i]).values
        b = to_physical(traj.snapshots[i + 1]).values
        fld = Field(traj.grid, (1.0 - w) * a + w * b, PHYSICAL)

        drift = (
            p.shift[0] + DRIFT_COEFF * p.freq_shift[0] * t,
            p.shift[1] + DRIFT_COEFF * p.freq_shift[1] * t,
        )
        g = _rescale(fld, p.scale)
        g = _translate(g, drift)
        g = _modulate(g, p.freq_shift)
        xi_sq = p.freq_shift[0] ** 2 + p.freq_shift[1] ** 2
        scalar = np.exp(-4.0 * np.pi ** 2 * 1j * t * xi_sq)
        out.append(Field(g.grid, g.values * scalar, g.rep))
    return out


def orthogonality_gap(p: SymParams, q: SymParams) -> float:
    """Scalar separation functional of two parameter quadruples.

    Scale ratios + relative frequency separation + rescaled time separation
    + rescaled drift-corrected translation separation.  Always >= 2.
    """
    np_, nq = p.scale, q.scale
    gap = np_ / nq + nq / np_
    dxi = np.asarray(p.freq_shift) - np.asarray(q.freq_shift)
    gap += float(dxi @ dxi) / (np_ * nq)
    tp = p.time_shift / np_ ** 2
    tq = q.time_shift / nq ** 2
    gap += np_ * nq * abs(tp - tq)
    dx = np.asarray(p.shift) - np.asarray(q.shift) - 2.0 * tp * dxi
    gap += np_ * nq * float(np.sqrt(dx @ dx))
    return float(gap)


def decoupling_l2(traj_a: Trajectory, traj_b: Trajectory) -> float:
    """Space-time L2 norm of the pointwise product of two trajectories."""
    if traj_a.grid != traj_b.grid:
        raise GridMismatchError("trajectories live on different grids")
    if len(traj_a.times) != len(traj_b.times) or not np.allclose(
        traj_a.times, traj_b.times, atol=1e-12, rtol=0
    ):
        raise GridMismatchError("trajectories sample different times")
    vals = []
    for fa, fb in zip(traj_a.snapshots, traj_b.snapshots):
        prod = to_physical(fa).values * to_physical(fb).values
        vals.append(float(np.sum(np.abs(prod) ** 2)) * traj_a.grid.h ** 2)
    return float(np.sqrt(np.trapezoid(vals, traj_a.times)))


def mass_decoupling_defect(profiles: list[tuple[Field, SymParams]]) -> float:
    """| ||sum_j G_j phi_j||^2 - sum_j ||phi_j||^2 | for compatible parameters."""
    if not profiles:
        raise ValueError("need at least one profile")
    pieces = [apply_propagated_symmetry(f, p) for f, p in profiles]
    g0 = pieces[0].grid
    for g in pieces[1:]:
        if g.grid != g0:
            raise GridMismatchError("profiles map to different grids")
    total = pieces[0].values.copy()
    for g in pieces[1:]:
        total = total + ensure_rep(g, pieces[0].rep).values
    combined = Field(g0, total, pieces[0].rep)
    return abs(l2_norm(combined) ** 2 - sum(l2_norm(f) ** 2 for f, _ in profiles))
