"""Time evolution for the cubic-flow family and its truncated variants.

The equation family is

    i u_t + Lap u = alpha^4 * Cut[ P F(P u) ],    F(u) = |u|^2 u,

with ``P`` an optional radial multiplier, ``Cut`` an optional outer low-pass,
and 0 <= alpha <= 1 (alpha = 0 is the free flow regardless of multipliers).

Two one-step schemes are provided.  ``rk4_ip`` is classical RK4 applied in
the interaction picture w(t) = exp(-i t Lap) u, so the stiff linear part is
treated exactly.  ``implicit_midpoint`` solves the midpoint equations by
fixed-point iteration with the linear part inverted spectrally; it is a
symplectic one-step method for the canonical structure and conserves the
mass up to the solver residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (
    AliasingError,
    ConvergenceError,
    DiagnosticSeries,
    Field,
    GridSpec,
    PHYSICAL,
    SPECTRAL,
    TWO_PI,
    ensure_rep,
    freq_mesh,
    l2_norm,
    lebesgue_norm,
    sobolev_seminorm,
    to_physical,
    to_spectral,
)
from .multipliers import SymbolSpec, check_nyquist, lowpass, sample_symbol

RK4_IP = "rk4_ip"
IMPLICIT_MIDPOINT = "implicit_midpoint"


@dataclass(frozen=True)
class EquationSpec:
    """Coefficients of one member of the cubic-flow family."""

    alpha: float = 1.0
    multiplier: SymbolSpec | None = None
    outer_cut: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.outer_cut is not None and not self.outer_cut > 0:
            raise ValueError("outer_cut must be positive when present")

    @property
    def rhs_support_radius(self) -> float:
        """Spectral radius of the nonlinear term; inf when unconstrained."""
        radii = []
        if self.multiplier is not None:
            radii.append(self.multiplier.support_radius)
        if self.outer_cut is not None:
            radii.append(lowpass(self.outer_cut).support_radius)
        return min(radii) if radii else np.inf


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str = RK4_IP
    dt: float = 1e-2
    fp_tol: float = 1e-12
    fp_maxiter: int = 50

    def __post_init__(self):
        if self.scheme not in (RK4_IP, IMPLICIT_MIDPOINT):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    snapshots: list[Field]
    equation: EquationSpec
    integrator: IntegratorSpec
    mass: DiagnosticSeries
    hamiltonian: DiagnosticSeries
    meta: dict = dc_field(default_factory=dict)

    @property
    def grid(self) -> GridSpec:
        return self.snapshots[0].grid


def default_dt(eq: EquationSpec, grid: GridSpec) -> float:
    """0.1 / (4 pi^2 sigma^2) for support radius sigma, clamped to <= 1e-2.

    Resolves the fastest retained linear phase by >= 60 samples per period.
    """
    sigma = eq.rhs_support_radius
    if not np.isfinite(sigma):
        return 1e-2
    return float(min(1e-2, 0.1 / (4.0 * np.pi ** 2 * sigma ** 2)))


def linear_propagate(f: Field, t: float) -> Field:
    """Free flow: spectral multiplication by exp(-4 pi^2 i t |j/L|^2)."""
    F = to_spectral(f)
    phase = np.exp(-4.0 * np.pi ** 2 * 1j * t * freq_mesh(f.grid)["sq"])
    return ensure_rep(Field(f.grid, F.values * phase, SPECTRAL), f.rep)


def check_alias_guard(eq: EquationSpec, grid: GridSpec) -> None:
    """Exact-ODE guard: three times the retained support radius below Nyquist.

    The cubic of a field with spectrum radius rho has radius 3 rho; keeping
    3 * (effective nonlinearity support) below Nyquist makes the discrete
    truncated system an exact finite-dimensional flow rather than an aliased
    approximation, for data inside the truncated state space.  Unconstrained
    equations (no multiplier, no cut) are the plain collocation system and
    carry no guard.
    """
    sigma = eq.rhs_support_radius
    if not np.isfinite(sigma) or eq.alpha == 0.0:
        return
    if 3.0 * sigma >= grid.nyquist:
        raise AliasingError(
            f"3 x retained radius {sigma} reaches Nyquist {grid.nyquist}; "
            "refine the grid or tighten the truncation"
        )


class _Rhs:
    """Spectral-array right-hand side alpha^4 Cut[P F(P .)] for one grid."""

    def __init__(self, eq: EquationSpec, grid: GridSpec):
        self.grid = grid
        self.h2 = grid.h ** 2
        self.a4 = eq.alpha ** 4
        self.mult = (
            sample_symbol(eq.multiplier, grid) if eq.multiplier is not None else None
        )
        self.cut = (
            sample_symbol(lowpass(eq.outer_cut), grid)
            if eq.outer_cut is not None
            else None
        )

    def __call__(self, u_hat: np.ndarray) -> np.ndarray:
        if self.a4 == 0.0:
            return np.zeros_like(u_hat)
        w = u_hat * self.mult if self.mult is not None else u_hat
        u = np.fft.ifft2(np.fft.ifftshift(w)) / self.h2
        c = np.fft.fftshift(np.fft.fft2((u.real ** 2 + u.imag ** 2) * u)) * self.h2
        if self.mult is not None:
            c *= self.mult
        if self.cut is not None:
            c *= self.cut
        return self.a4 * c


def nonlinear_rhs(f: Field, eq: EquationSpec) -> Field:
    """alpha^4 Cut[P F(P f)]; output confined to the outer symbol support."""
    if eq.multiplier is not None:
        check_nyquist(eq.multiplier, f.grid)
    if eq.outer_cut is not None:
        check_nyquist(lowpass(eq.outer_cut), f.grid)
    check_alias_guard(eq, f.grid)
    rhs = _Rhs(eq, f.grid)
    out = Field(f.grid, rhs(to_spectral(f).values), SPECTRAL)
    return ensure_rep(out, f.rep)


def _rk4_ip_step(u_hat, dt, rhs, lam):
    """One RK4 step in the interaction picture; state and return are spectral."""
    ph_h = np.exp(1j * lam * (dt / 2.0))  # exp(i (dt/2) Lap)
    ph_f = ph_h * ph_h
    k1 = -1j * rhs(u_hat)
    k2 = -1j * np.conj(ph_h) * rhs(ph_h * (u_hat + (dt / 2.0) * k1))
    k3 = -1j * np.conj(ph_h) * rhs(ph_h * (u_hat + (dt / 2.0) * k2))
    k4 = -1j * np.conj(ph_f) * rhs(ph_f * (u_hat + dt * k3))
    v = u_hat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ph_f * v


def _midpoint_step(u_hat, dt, rhs, lam, tol, maxiter):
    """One implicit-midpoint step solved by fixed-point iteration.

    The midpoint equations in spectral form are

        (1 - i dt lam / 2) u+ = (1 + i dt lam / 2) u - i dt R((u + u+) / 2)

    with lam the Laplacian symbol; the linear solve is diagonal.
    """
    half = 0.5j * dt * lam
    denom = 1.0 - half
    lin = (1.0 + half) * u_hat
    u_next = lin / denom  # Cayley predictor
    scale = max(1.0, float(np.linalg.norm(u_next)))
    for _ in range(maxiter):
        mid = 0.5 * (u_hat + u_next)
        candidate = (lin - 1j * dt * rhs(mid)) / denom
        delta = float(np.linalg.norm(candidate - u_next))
        u_next = candidate
        if delta <= tol * scale:
            return u_next
    raise ConvergenceError(
        f"midpoint fixed-point iteration did not reach {tol} in {maxiter} iterations"
    )


def step(f: Field, eq: EquationSpec, integ: IntegratorSpec, dt: float | None = None) -> Field:
    """Advance one time step; dt may override (sign included) for reversal tests."""
    if dt is None:
        dt = integ.dt
    check_alias_guard(eq, f.grid)
    if eq.alpha == 0.0:
        return linear_propagate(f, dt)
    rhs = _Rhs(eq, f.grid)
    lam = -4.0 * np.pi ** 2 * freq_mesh(f.grid)["sq"]
    u_hat = to_spectral(f).values
    if integ.scheme == RK4_IP:
        out = _rk4_ip_step(u_hat, dt, rhs, lam)
    else:
        out = _midpoint_step(u_hat, dt, rhs, lam, integ.fp_tol, integ.fp_maxiter)
    if not np.all(np.isfinite(out)):
        raise ConvergenceError("non-finite state after one step")
    return ensure_rep(Field(f.grid, out, SPECTRAL), f.rep)


def equation_hamiltonian(f: Field, eq: EquationSpec) -> float:
    """Conserved functional (1/2)|grad u|_2^2 + (alpha^4/4)|P u|_4^4."""
    fp = to_physical(f)
    grad2 = sobolev_seminorm(fp, 1.0) ** 2
    if eq.alpha == 0.0:
        return 0.5 * grad2
    if eq.multiplier is not None:
        w = to_spectral(fp).values * sample_symbol(eq.multiplier, fp.grid)
        pu = to_physical(Field(fp.grid, w, SPECTRAL))
    else:
        pu = fp
    return 0.5 * grad2 + 0.25 * eq.alpha ** 4 * lebesgue_norm(pu, 4.0) ** 4


def evolve(
    f0: Field,
    eq: EquationSpec,
    integ: IntegratorSpec,
    t_final: float,
    snapshot_stride: int = 1,
    keep_snapshots: bool = True,
    snapshot_hook=None,
) -> Trajectory:
    """March from t = 0 to t_final, recording every ``snapshot_stride`` steps.

    ``t_final`` must be an integer multiple of dt (within roundoff).  The
    optional ``snapshot_hook(t, field)`` runs at every recorded time; with
    ``keep_snapshots=False`` the trajectory stores only the final state,
    which keeps long big-grid runs within memory.
    """
    grid = f0.grid
    dt = integ.dt
    nsteps = int(round(t_final / dt))
    if nsteps < 1 or abs(nsteps * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError(f"t_final {t_final} is not a positive multiple of dt {dt}")
    if snapshot_stride < 1:
        raise ValueError("snapshot_stride must be >= 1")
    check_alias_guard(eq, grid)

    rhs = _Rhs(eq, grid)
    lam = -4.0 * np.pi ** 2 * freq_mesh(grid)["sq"]
    linear = eq.alpha == 0.0
    if linear:
        ph_step = np.exp(1j * lam * dt)

    u_hat = to_spectral(f0).values.copy()
    times, snaps, masses, hams = [], [], [], []

    def record(t, arr):
        fld = to_physical(Field(grid, arr.copy(), SPECTRAL))
        times.append(t)
        masses.append(l2_norm(fld) ** 2)
        hams.append(equation_hamiltonian(fld, eq))
        if snapshot_hook is not None:
            snapshot_hook(t, fld)
        if keep_snapshots:
            snaps.append(fld)
        else:
            snaps[:] = [fld]

    record(0.0, u_hat)
    for k in range(1, nsteps + 1):
        if linear:
            u_hat *= ph_step
        elif integ.scheme == RK4_IP:
            u_hat = _rk4_ip_step(u_hat, dt, rhs, lam)
        else:
            u_hat = _midpoint_step(u_hat, dt, rhs, lam, integ.fp_tol, integ.fp_maxiter)
        if not np.all(np.isfinite(u_hat)):
            raise ConvergenceError(f"non-finite state at step {k} (t = {k * dt})")
        if k % snapshot_stride == 0 or k == nsteps:
            record(k * dt, u_hat)

    t_arr = np.asarray(times)
    return Trajectory(
        times=t_arr,
        snapshots=snaps,
        equation=eq,
        integrator=integ,
        mass=DiagnosticSeries(t_arr, np.asarray(masses), "mass"),
        hamiltonian=DiagnosticSeries(t_arr, np.asarray(hams), "hamiltonian"),
        meta={
            "stiffness": dt * 4.0 * np.pi ** 2 * grid.nyquist ** 2,
            "nsteps": nsteps,
        },
    )


def conserved_report(traj: Trajectory) -> tuple[DiagnosticSeries, DiagnosticSeries]:
    """Relative drift series for the mass and the equation's Hamiltonian."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")

    def drift(series: DiagnosticSeries, label: str) -> DiagnosticSeries:
        ref = series.values[0]
        den = abs(ref) if ref != 0 else 1.0
        return DiagnosticSeries(series.times, (series.values - ref) / den, label)

    return drift(traj.mass, "mass_drift"), drift(traj.hamiltonian, "hamiltonian_drift")


def strichartz_norms(traj: Trajectory) -> dict[str, float]:
    """Mixed space-time norms by composite trapezoid over the snapshots.

    Returns sup-in-time L2, L3_t L6_x, L4_{t,x}, and their S-norm combination
    (the first plus the second).
    """
    if len(traj.snapshots) < 2:
        raise ValueError("need at least two snapshots for time quadrature")
    t = traj.times
    l2s, l6c, l4q = [], [], []
    for snap in traj.snapshots:
        fp = to_physical(snap)
        l2s.append(l2_norm(fp))
        l6c.append(lebesgue_norm(fp, 6.0) ** 3)
        l4q.append(lebesgue_norm(fp, 4.0) ** 4)
    sup_l2 = float(np.max(l2s))
    l3l6 = float(np.trapezoid(l6c, t) ** (1.0 / 3.0))
    l4 = float(np.trapezoid(l4q, t) ** 0.25)
    return {"sup_l2": sup_l2, "l3l6": l3l6, "l4": l4, "s_norm": sup_l2 + l3l6}
