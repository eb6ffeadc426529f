"""Operator-norm probes via power iteration on T* T.

Each probe estimates the L2 -> L2 norm of a composed multiplier/cutoff
operator, records its iteration count and final residual, and carries the
comparison value the estimate is measured against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .grid import Field, GridSpec, GridMismatchError, l2_norm, random_field, to_physical
from .multipliers import SymbolSpec, apply_multiplier, check_nyquist
from .transfer import pull_back, push_forward

POWER_TOL = 1e-9
POWER_MAXITER = 500


@dataclass(frozen=True)
class OperatorProbe:
    operator_id: str
    params: dict
    norm_estimate: float
    bound: float
    iterations: int
    residual: float
    converged: bool

    CSV_HEADER = "operator_id,parameters,estimated_norm,bound,iterations,residual"

    def csv_row(self) -> str:
        par = ";".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return (
            f"{self.operator_id},{par},{self.norm_estimate!r},{self.bound!r},"
            f"{self.iterations},{self.residual!r}"
        )


def power_iteration(apply_op, apply_adj, v0: Field, tol: float = POWER_TOL,
                    max_iter: int = POWER_MAXITER):
    """Largest singular value of the operator via iteration of T* T.

    Returns (sigma, iterations, residual, converged); residual is the last
    relative change of the eigenvalue estimate.
    """
    v = v0
    nrm = l2_norm(v)
    if nrm == 0:
        raise ValueError("zero start vector")
    v = Field(v.grid, v.values / nrm, v.rep)
    lam_prev = None
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = apply_op(v)
        lam = l2_norm(w) ** 2
        if lam == 0.0:
            return 0.0, it, 0.0, True
        u = apply_adj(w)
        unrm = l2_norm(u)
        v = Field(u.grid, u.values / unrm, u.rep)
        if lam_prev is not None:
            residual = abs(lam - lam_prev) / lam
            if residual < tol:
                return float(np.sqrt(lam)), it, residual, True
        lam_prev = lam
    return float(np.sqrt(lam_prev)), max_iter, residual, False


def sup_distance_cells(mask_a: np.ndarray, mask_b: np.ndarray) -> int:
    """Sup-metric torus distance between two lattice index sets, in cells.

    Found by binary search over box dilations of ``mask_a``.
    """
    if mask_a.shape != mask_b.shape:
        raise GridMismatchError("masks must share a shape")
    if not mask_a.any() or not mask_b.any():
        raise ValueError("both sets must be nonempty")

    def overlaps(r: int) -> bool:
        if r == 0:
            dil = mask_a
        else:
            dil = ndimage.maximum_filter(
                mask_a.astype(np.uint8), size=2 * r + 1, mode="wrap"
            ).astype(bool)
        return bool(np.any(dil & mask_b))

    lo, hi = 0, mask_a.shape[0] // 2
    if overlaps(lo):
        return 0
    while not overlaps(hi):
        # masks on a torus always meet within n/2 box-dilations
        hi = min(2 * hi, mask_a.shape[0])
        if hi >= mask_a.shape[0]:
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if overlaps(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _as_mask(f: Field) -> np.ndarray:
    v = to_physical(f).values
    if np.max(np.abs(v.imag)) > 1e-12:
        raise ValueError("indicator field must be real-valued")
    return np.abs(v.real) > 0.5


def mismatch_norm(E: Field, F: Field, spec: SymbolSpec, seed: int = 7) -> OperatorProbe:
    """Norm of g -> chi_E P (chi_F g) for disjoint sets at distance >= 1."""
    if E.grid != F.grid:
        raise GridMismatchError("indicator fields must share a grid")
    grid = E.grid
    check_nyquist(spec, grid)
    me, mf = _as_mask(E), _as_mask(F)
    if np.any(me & mf):
        raise ValueError("sets overlap; a positive separation is required")
    dist_cells = sup_distance_cells(me, mf)
    A = dist_cells * grid.h
    if A < 1.0:
        raise ValueError(f"separation {A} is below the required distance 1")

    def op(g: Field) -> Field:
        masked = Field(grid, to_physical(g).values * mf)
        return Field(grid, to_physical(apply_multiplier(masked, spec)).values * me)

    def adj(g: Field) -> Field:
        masked = Field(grid, to_physical(g).values * me)
        return Field(grid, to_physical(apply_multiplier(masked, spec)).values * mf)

    sigma, iters, res, ok = power_iteration(op, adj, random_field(grid, seed))
    depth = spec.depth if spec.depth is not None else 1
    scale = spec.scale if spec.scale is not None else spec.cutoff
    return OperatorProbe(
        "mismatch",
        {"family": spec.family, "depth": depth, "scale": scale, "A": A},
        sigma,
        1.0 / (depth * scale * A),
        iters,
        res,
        ok,
    )


def commutator_norm(chi: Field, spec: SymbolSpec, seed: int = 7,
                    bound: float | None = None) -> OperatorProbe:
    """Norm of the commutator g -> chi (P g) - P (chi g) for real chi in [0,1]."""
    grid = chi.grid
    check_nyquist(spec, grid)
    c = to_physical(chi).values
    if np.max(np.abs(c.imag)) > 1e-12 or c.real.min() < -1e-12 or c.real.max() > 1 + 1e-12:
        raise ValueError("cutoff must be real-valued with range in [0, 1]")
    c = c.real

    def op(g: Field) -> Field:
        pg = to_physical(apply_multiplier(g, spec))
        cg = Field(grid, to_physical(g).values * c)
        return Field(grid, c * pg.values - to_physical(apply_multiplier(cg, spec)).values)

    def adj(g: Field) -> Field:
        # (chi P - P chi)* = -(chi P - P chi) for real chi and a real symbol
        out = op(g)
        return Field(grid, -out.values)

    sigma, iters, res, ok = power_iteration(op, adj, random_field(grid, seed))
    scale = spec.scale if spec.scale is not None else spec.cutoff
    if bound is None:
        bound = 1.0 / scale
    depth = spec.depth if spec.depth is not None else 1
    return OperatorProbe(
        "commutator",
        {"family": spec.family, "depth": depth, "scale": scale},
        sigma,
        bound,
        iters,
        res,
        ok,
    )


def plane_torus_gap(chi: Field, depth: int, scale: float, l_small: float,
                    seed: int = 7) -> OperatorProbe:
    """Norm of g -> chi (P_box - P_fold) (chi g).

    P_box applies the graded multiplier on the big box; P_fold realizes the
    small-torus multiplier by fold, multiplier, periodic unfold.  chi must be
    real and supported in a single fundamental domain of the covering map.
    """
    from .multipliers import graded

    big = chi.grid
    spec = graded(depth, scale)
    check_nyquist(spec, big)
    k = big.side / l_small
    if abs(k - round(k)) > 1e-12 or round(k) < 1:
        raise GridMismatchError("big box side must be an integer multiple of l_small")
    n_small = big.n // int(round(k))
    small = GridSpec(l_small, n_small)
    check_nyquist(spec, small)
    c = to_physical(chi).values
    if np.max(np.abs(c.imag)) > 1e-12:
        raise ValueError("cutoff must be real-valued")
    c = c.real
    _check_one_domain_support(c, big.n, int(round(k)))

    def op(g: Field) -> Field:
        cg = Field(big, to_physical(g).values * c)
        box = to_physical(apply_multiplier(cg, spec)).values
        folded = apply_multiplier(push_forward(cg, l_small), spec)
        unfolded = to_physical(pull_back(folded, big)).values
        return Field(big, c * (box - unfolded))

    # chi (A - B) chi with self-adjoint A, B and real chi is self-adjoint
    sigma, iters, res, ok = power_iteration(op, op, random_field(big, seed))
    return OperatorProbe(
        "plane_torus_gap",
        {"depth": depth, "scale": scale, "l_small": l_small, "big_side": big.side},
        sigma,
        1.0 / scale,
        iters,
        res,
        ok,
    )


def _check_one_domain_support(c: np.ndarray, n_big: int, k: int) -> None:
    """chi must vanish outside some k x k fundamental tile of the covering."""
    n_small = n_big // k
    support = np.abs(c) > 0
    idx = np.nonzero(support.any(axis=1))[0], np.nonzero(support.any(axis=0))[0]
    for ax_idx in idx:
        if ax_idx.size == 0:
            return
        span = ax_idx.max() - ax_idx.min() + 1
        if span > n_small:
            raise ValueError("cutoff support spans more than one fundamental domain")
