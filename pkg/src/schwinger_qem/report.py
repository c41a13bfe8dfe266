"""Region errors, device gate budgets, and CSV export of run artifacts.

Conventions shared by every artifact:

* Region labels: "P" is the prediction window (l0 above the learning
  boundary), "LP" the full ramp domain. Masks come from DomainSpec.
* The region error sums per-level RMS deviations over the level set; it is
  a sum of RMS values, not an RMS over the pooled points.
* CSV floats are written with 17 significant digits so a read-back
  round-trips bit for bit; optional integer fields serialize as empty
  strings when absent.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .validation import check_int, require

REGION_LABELS = ("P", "LP")

# Slice budgets of the reference transpilation used for device-cost
# reporting. Keyed (circuit_kind, mass_ratio_preset); "orig" is the plain
# evolution circuit, "grec" the generator-conjugated one. Our own compiler
# emits fewer RZ per slice (90/160 for the massless preset) because it
# skips redundant frame rotations; budgets can be computed either way.
REFERENCE_SLICE_COUNTS = {
    ("orig", 0): {"CX": 50, "RZ": 130, "SX": 40},
    ("orig", 10): {"CX": 50, "RZ": 131, "SX": 40},
    ("grec", 0): {"CX": 70, "RZ": 240, "SX": 80},
    ("grec", 10): {"CX": 70, "RZ": 241, "SX": 80},
}

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class RegionError:
    """Summed per-level RMS deviation of mitigated lines from the exact ones."""

    method: str
    region: str
    value: float
    levels: tuple[int, ...]
    n_points: int


def region_error(em_lines, ed_lines, mask, region, method="em"):
    """Error of energy-measurement lines against exact lines on a region.

    Args:
        em_lines: dict level -> energy array on the common time grid.
        ed_lines: dict level -> exact reference array, same grid.
        mask: boolean array selecting the region's time points.
        region: label recorded on the result ("P" or "LP" conventionally).
        method: label recorded on the result.
    """
    mask = np.asarray(mask, dtype=bool)
    require(mask.any(), "region selects no time points", field="mask")
    require(set(em_lines) == set(ed_lines), "level sets differ", field="em_lines")
    require(len(em_lines) > 0, "need at least one level", field="em_lines")
    total = 0.0
    for alpha in sorted(em_lines):
        em = np.asarray(em_lines[alpha], dtype=float)
        ed = np.asarray(ed_lines[alpha], dtype=float)
        require(em.shape == ed.shape == mask.shape, "grids differ", field="em_lines")
        total += float(np.sqrt(np.mean((em[mask] - ed[mask]) ** 2)))
    return RegionError(
        method=method,
        region=str(region),
        value=total,
        levels=tuple(sorted(em_lines)),
        n_points=int(mask.sum()),
    )


@dataclass(frozen=True)
class GateBudget:
    """Total device-gate counts of a full mitigated-line measurement."""

    method: str
    n_evol: int
    per_slice: dict[str, int]
    totals: dict[str, int]
    n_steps: int
    n_levels: int


def gate_budget(method, n_evol, per_slice_counts, n_steps, n_levels=2):
    """Closed-form gate totals for a full measurement campaign.

    Each time point i is measured from a fresh evolution of i slices, giving
    the triangular factor (n+1)(n+2)/2 per line. Folding makes the ZNE
    workload quadratic in n_evol (noise factors 1, 3, ..., 2 n_evol - 1 sum
    to n_evol^2) while the GREC workload is linear (n_evol unfolded ramps).
    """
    require(method in ("zne", "grec"), "unknown method", field="method")
    n_steps = check_int(n_steps, "n_steps", minimum=1)
    n_levels = check_int(n_levels, "n_levels", minimum=1)
    if method == "zne":
        n_evol = check_int(n_evol, "n_evol", minimum=2)
        weight = n_evol**2
    else:
        n_evol = check_int(n_evol, "n_evol", minimum=3)
        weight = n_evol
    triangular = (n_steps + 1) * (n_steps + 2) // 2
    totals = {}
    for kind, per_slice in per_slice_counts.items():
        per_slice = check_int(per_slice, f"per_slice[{kind}]", minimum=0)
        totals[kind] = n_levels * per_slice * triangular * weight
    return GateBudget(
        method=method,
        n_evol=n_evol,
        per_slice=dict(per_slice_counts),
        totals=totals,
        n_steps=n_steps,
        n_levels=n_levels,
    )


def improvement(e_grec, e_zne, e_noisy):
    """Relative error gain of GREC over ZNE, negative when GREC wins."""
    e_noisy = float(e_noisy)
    require(e_noisy > 0, "noisy baseline must be positive", field="e_noisy")
    return (float(e_grec) - float(e_zne)) / e_noisy


# ---------------------------------------------------------------------------
# CSV artifacts


@dataclass(frozen=True)
class EnergyRecord:
    """One measured sample of one line, as exported to energy_lines.csv."""

    run_id: str
    variant: str
    alpha: int
    tau: int | None
    r: int | None
    f: int | None
    i: int
    t: float
    l0: float
    energy: float


ENERGY_HEADER = ["run_id", "variant", "alpha", "tau", "r", "f", "i", "t", "l0", "energy"]
ETA_HEADER = ["alpha", "i", "r", "eta"]
METRIC_HEADER = ["method", "n_evol", "region", "error", "N_CX", "N_RZ", "N_SX"]


def _fmt_float(x):
    return FLOAT_FORMAT % float(x)


def _fmt_opt_int(x):
    return "" if x is None else str(int(x))


def records_from_line(run_id, variant, line, tau=None, r=None, f=None):
    """Expand an EvolvedLine into EnergyRecord rows."""
    return [
        EnergyRecord(
            run_id=run_id,
            variant=variant,
            alpha=line.alpha,
            tau=tau,
            r=r,
            f=f,
            i=i,
            t=float(line.times[i]),
            l0=float(line.l0_values[i]),
            energy=float(line.energies[i]),
        )
        for i in range(len(line.energies))
    ]


def records_from_arrays(run_id, variant, alpha, times, l0_values, energies, tau=None, r=None, f=None):
    """EnergyRecord rows for a line that exists only as arrays."""
    return [
        EnergyRecord(
            run_id=run_id,
            variant=variant,
            alpha=alpha,
            tau=tau,
            r=r,
            f=f,
            i=i,
            t=float(times[i]),
            l0=float(l0_values[i]),
            energy=float(energies[i]),
        )
        for i in range(len(energies))
    ]


def write_energy_lines(path, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENERGY_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.run_id,
                    rec.variant,
                    rec.alpha,
                    _fmt_opt_int(rec.tau),
                    _fmt_opt_int(rec.r),
                    _fmt_opt_int(rec.f),
                    rec.i,
                    _fmt_float(rec.t),
                    _fmt_float(rec.l0),
                    _fmt_float(rec.energy),
                ]
            )


def read_energy_lines(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        require(header == ENERGY_HEADER, f"unexpected header in {path}", field="path")
        for row in reader:
            records.append(
                EnergyRecord(
                    run_id=row[0],
                    variant=row[1],
                    alpha=int(row[2]),
                    tau=int(row[3]) if row[3] else None,
                    r=int(row[4]) if row[4] else None,
                    f=int(row[5]) if row[5] else None,
                    i=int(row[6]),
                    t=float(row[7]),
                    l0=float(row[8]),
                    energy=float(row[9]),
                )
            )
    return records


def write_etas(path, eta_tables):
    """Write {alpha: EtaTable} as long-format rows alpha, i, r, eta."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ETA_HEADER)
        for alpha in sorted(eta_tables):
            etas = eta_tables[alpha].etas
            for i in range(etas.shape[0]):
                for r in range(etas.shape[1]):
                    writer.writerow([alpha, i, r, _fmt_float(etas[i, r])])


def read_etas(path):
    """Read etas.csv back into {alpha: array (n_points, R+1)}."""
    cells: dict[int, dict[tuple[int, int], float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        require(header == ETA_HEADER, f"unexpected header in {path}", field="path")
        for row in reader:
            alpha, i, r = int(row[0]), int(row[1]), int(row[2])
            cells.setdefault(alpha, {})[(i, r)] = float(row[3])
    out = {}
    for alpha, entries in cells.items():
        n_i = 1 + max(i for i, _ in entries)
        n_r = 1 + max(r for _, r in entries)
        arr = np.zeros((n_i, n_r))
        for (i, r), v in entries.items():
            arr[i, r] = v
        out[alpha] = arr
    return out


def write_metrics(path, rows):
    """Write metric rows: dicts with METRIC_HEADER keys (counts optional)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row["method"],
                    _fmt_opt_int(row.get("n_evol")),
                    row["region"],
                    _fmt_float(row["error"]),
                    _fmt_opt_int(row.get("N_CX")),
                    _fmt_opt_int(row.get("N_RZ")),
                    _fmt_opt_int(row.get("N_SX")),
                ]
            )


def read_metrics(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        require(header == METRIC_HEADER, f"unexpected header in {path}", field="path")
        for row in reader:
            rows.append(
                {
                    "method": row[0],
                    "n_evol": int(row[1]) if row[1] else None,
                    "region": row[2],
                    "error": float(row[3]),
                    "N_CX": int(row[4]) if row[4] else None,
                    "N_RZ": int(row[5]) if row[5] else None,
                    "N_SX": int(row[6]) if row[6] else None,
                }
            )
    return rows


def write_table(path, header, rows):
    """Generic plot-data table; floats full precision, ints plain."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            out = []
            for cell in row:
                if cell is None:
                    out.append("")
                elif isinstance(cell, (int, np.integer)):
                    out.append(str(int(cell)))
                elif isinstance(cell, float):
                    out.append(_fmt_float(cell))
                else:
                    out.append(str(cell))
            writer.writerow(out)


def export(out_dir, run_id, energy_records, eta_tables, metric_rows, plot_tables):
    """Write the full artifact set under out_dir/run_id.

    plot_tables maps a relative name (without extension) to (header, rows);
    every table lands in the plotdata subdirectory. Returns the run directory.
    """
    run_dir = os.path.join(out_dir, run_id)
    plot_dir = os.path.join(run_dir, "plotdata")
    os.makedirs(plot_dir, exist_ok=True)
    try:
        write_energy_lines(os.path.join(run_dir, "energy_lines.csv"), energy_records)
        write_etas(os.path.join(run_dir, "etas.csv"), eta_tables)
        write_metrics(os.path.join(run_dir, "metrics.csv"), metric_rows)
        for name, (header, rows) in plot_tables.items():
            write_table(os.path.join(plot_dir, name + ".csv"), header, rows)
    except OSError as exc:
        raise OSError(f"failed writing artifacts under {run_dir}: {exc}") from exc
    return run_dir
