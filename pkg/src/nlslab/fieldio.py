"""Binary snapshot format and trajectory persistence.

Snapshot format "NLSF1": magic bytes ``NLSF1\\0``, little-endian u32 n,
f64 side length, u8 representation flag (0 physical, 1 spectral), then n^2
complex values as interleaved f64 pairs, row-major.  Spectral values are
stored in centered frequency order.

A trajectory directory holds ``manifest.txt`` (plain key=value), numbered
NLSF1 snapshots, and ``conserved.csv`` with the mass/Hamiltonian series.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import DiagnosticSeries, Field, GridSpec, PHYSICAL, SPECTRAL

MAGIC = b"NLSF1\x00"
_REP_FLAG = {PHYSICAL: 0, SPECTRAL: 1}
_FLAG_REP = {0: PHYSICAL, 1: SPECTRAL}


def write_field(path, f: Field) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", f.grid.n))
        fh.write(struct.pack("<d", f.grid.side))
        fh.write(struct.pack("<B", _REP_FLAG[f.rep]))
        inter = np.empty((f.grid.n, f.grid.n, 2), dtype="<f8")
        inter[..., 0] = f.values.real
        inter[..., 1] = f.values.imag
        fh.write(inter.tobytes(order="C"))


def read_field(path) -> Field:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        (side,) = struct.unpack("<d", fh.read(8))
        (flag,) = struct.unpack("<B", fh.read(1))
        if flag not in _FLAG_REP:
            raise ValueError(f"{path}: bad representation flag {flag}")
        raw = np.frombuffer(fh.read(16 * n * n), dtype="<f8").reshape(n, n, 2)
        values = raw[..., 0] + 1j * raw[..., 1]
    return Field(GridSpec(side, n), values, _FLAG_REP[flag])


def save_trajectory(dirpath, traj) -> None:
    from .multipliers import SymbolSpec

    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    eq, integ = traj.equation, traj.integrator
    lines = {
        "n": traj.grid.n,
        "side": repr(traj.grid.side),
        "scheme": integ.scheme,
        "dt": repr(integ.dt),
        "alpha": repr(eq.alpha),
        "outer_cut": repr(eq.outer_cut) if eq.outer_cut is not None else "none",
        "snapshots": len(traj.snapshots),
    }
    if eq.multiplier is None:
        lines["multiplier"] = "none"
    else:
        m = eq.multiplier
        lines["multiplier"] = m.family
        if m.cutoff is not None:
            lines["multiplier_cutoff"] = repr(m.cutoff)
        if m.depth is not None:
            lines["multiplier_depth"] = m.depth
            lines["multiplier_scale"] = repr(m.scale)
    with open(d / "manifest.txt", "w") as fh:
        for k, v in lines.items():
            fh.write(f"{k}={v}\n")
    with open(d / "conserved.csv", "w") as fh:
        fh.write("t,mass,hamiltonian\n")
        for t, m, ha in zip(traj.times, traj.mass.values, traj.hamiltonian.values):
            fh.write(f"{t!r},{m!r},{ha!r}\n")
    for i, snap in enumerate(traj.snapshots):
        write_field(d / f"snap_{i:06d}.nlsf", snap)


def load_trajectory(dirpath):
    from .dynamics import EquationSpec, IntegratorSpec, Trajectory
    from .multipliers import SymbolSpec

    d = Path(dirpath)
    manifest = {}
    for line in (d / "manifest.txt").read_text().splitlines():
        if line.strip():
            k, _, v = line.partition("=")
            manifest[k] = v
    mult = None
    fam = manifest["multiplier"]
    if fam != "none":
        if fam == "graded":
            mult = SymbolSpec(fam, depth=int(manifest["multiplier_depth"]),
                              scale=float(manifest["multiplier_scale"]))
        else:
            mult = SymbolSpec(fam, cutoff=float(manifest["multiplier_cutoff"]))
    cut = manifest["outer_cut"]
    eq = EquationSpec(
        alpha=float(manifest["alpha"]),
        multiplier=mult,
        outer_cut=None if cut == "none" else float(cut),
    )
    integ = IntegratorSpec(scheme=manifest["scheme"], dt=float(manifest["dt"]))
    count = int(manifest["snapshots"])
    snaps = [read_field(d / f"snap_{i:06d}.nlsf") for i in range(count)]
    rows = (d / "conserved.csv").read_text().splitlines()[1:]
    t, mass, ham = [], [], []
    for row in rows:
        a, b, c = row.split(",")
        t.append(float(a)); mass.append(float(b)); ham.append(float(c))
    t = np.asarray(t)
    return Trajectory(
        times=t,
        snapshots=snaps,
        equation=eq,
        integrator=integ,
        mass=DiagnosticSeries(t, np.asarray(mass), "mass"),
        hamiltonian=DiagnosticSeries(t, np.asarray(ham), "hamiltonian"),
        meta={"loaded_from": str(d)},
    )
