"""Experiment orchestration from exact spectra to mitigation metrics.

A run simulates, per preset, the exact reference lines, the clean and noisy
circuit evolutions of the main ramp, the rotation-conjugated lines on the
training ramps and on the main ramp, and the folded-noise family for the
extrapolation baseline. Mitigation sweeps both hyperparameters (training
lines for the regression, noise factors for the extrapolation), picks each
minimum on the prediction window, and reports region errors, gate budgets,
and the head-to-head improvement.

The fold-1 member of the extrapolation family reuses the plain noisy line
rather than re-simulating it, so the two are sample-identical by
construction. Every stochastic choice (rotation draws, shot noise) comes
from a stream derived off the master seed and the job's labels, which makes
reruns bit-identical regardless of worker scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .circuit import NoiseModel, compile_slice, count_gates
from .evolve import evolve_energy_lines, rng_stream
from .grec import (
    EtaTable,
    TrainingSet,
    fit_etas,
    mitigate_line,
    sweep_training_lines,
    trend_check,
)
from .model import apply_added_noise, build_hamiltonian
from .pauli import NoiseRotation
from .report import (
    REFERENCE_SLICE_COUNTS,
    export,
    gate_budget,
    improvement,
    records_from_arrays,
    region_error,
)
from .spectrum import ideal_lines, locate_critical_point
from .zne import ZneSeries, mitigate_line_zne, sweep_fold_counts

LEVELS = (0, 1)


@dataclass(frozen=True)
class SpectrumResult:
    """Exact lines on the main grid plus the located critical point."""

    l0_values: np.ndarray
    ed: dict[int, np.ndarray]
    critical: object


@dataclass(frozen=True)
class EvolutionData:
    """All simulated lines of one run, aligned on the main time grid."""

    times: np.ndarray
    l0_values: np.ndarray
    levels: tuple[int, ...]
    ed: dict[int, np.ndarray]
    ideal_circuit: dict[int, np.ndarray]
    noisy: dict[int, np.ndarray]
    added_main: dict[int, np.ndarray] | None
    training: dict[int, TrainingSet] | None
    training_l0_values: dict[int, np.ndarray]
    zne: dict[int, ZneSeries] | None


@dataclass(frozen=True)
class MitigationSummary:
    e_noisy: float
    e_noisy_lp: float
    e_trotter: float
    e_trotter_lp: float
    grec_sweep: dict[int, float]
    zne_sweep: dict[int, float]
    best_n_train: int
    best_n_evol_zne: int
    e_grec_min: float
    e_zne_min: float
    e_grec_lp: float
    e_zne_lp: float
    improvement: float
    eta_tables: dict[int, EtaTable]
    grec_line: dict[int, np.ndarray]
    zne_line: dict[int, np.ndarray]
    beyond_star: dict[str, float] | None
    trend: dict[int, dict[str, float]]


@dataclass(frozen=True)
class RunOutput:
    config: object
    spectrum: SpectrumResult
    data: EvolutionData
    summary: MitigationSummary
    run_dir: str | None = None


def simulate_spectrum(config):
    """Exact lines on the main ramp grid and the critical-point locator."""
    params = config.params()
    l0s = config.main_schedule().l0_values()
    tracked = ideal_lines(params, l0s, levels=LEVELS)
    critical = locate_critical_point(params, config.domain())
    return SpectrumResult(l0_values=l0s, ed=dict(tracked.energies),
                          critical=critical)


def _rotation(config, r):
    return NoiseRotation.sample(rng_stream(config.seed, "rotation", r))


def _shot_rng(config, job):
    if config.n_shots is None:
        return None
    return rng_stream(config.seed, "shots", job[0], *job[1:])


def _line_jobs(config, include_zne=True, include_grec=True):
    """Independent simulation jobs; each owns its density matrices."""
    jobs = [("ideal",), ("noisy",)]
    if include_zne:
        for f in config.zne_folds()[1:]:
            jobs.append(("zne", f))
    if include_grec:
        for r in range(1, config.n_realizations + 1):
            jobs.append(("an_main", r))
        for tau in range(1, config.n_train + 1):
            for r in range(1, config.n_realizations + 1):
                jobs.append(("an_train", tau, r))
    return jobs


def _run_line_job(config, job):
    """Simulate one job; returns (job, {alpha: energies})."""
    params = config.params()
    noise = NoiseModel(config.noise_p)
    kind = job[0]
    schedule = config.main_schedule()
    kwargs = {"noise": noise, "n_shots": config.n_shots,
              "rng": _shot_rng(config, job)}
    if kind == "ideal":
        kwargs["noise"] = None
    elif kind == "zne":
        kwargs["fold"] = job[1]
    elif kind == "an_main":
        kwargs["rotation"] = _rotation(config, job[1])
    elif kind == "an_train":
        tau, r = job[1], job[2]
        schedule = config.training_schedules()[tau - 1]
        kwargs["rotation"] = _rotation(config, r)
    elif kind != "noisy":
        raise RuntimeError(f"unknown job {job!r}")
    lines = evolve_energy_lines(params, schedule, LEVELS, **kwargs)
    return job, {a: lines[a].energies for a in LEVELS}


def simulate_lines(config, include_zne=True, include_grec=True):
    """Run every line of the experiment, optionally on a worker pool.

    The zne or grec families can be skipped for the focused subcommands;
    their EvolutionData fields are then None.
    """
    params = config.params()
    schedule = config.main_schedule()
    times = schedule.times()
    l0s = schedule.l0_values()

    jobs = _line_jobs(config, include_zne, include_grec)
    runner = partial(_run_line_job, config)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = dict(pool.map(runner, jobs))
    else:
        results = dict(runner(job) for job in jobs)

    ed = dict(ideal_lines(params, l0s, levels=LEVELS).energies)

    added_main = None
    training = None
    train_l0 = {}
    if include_grec:
        train_scheds = config.training_schedules()
        train_l0 = {tau: sched.l0_values()
                    for tau, sched in enumerate(train_scheds, start=1)}
        train_ed = {tau: dict(ideal_lines(params, grid, levels=LEVELS).energies)
                    for tau, grid in train_l0.items()}
        added_main = {
            a: np.stack([results[("an_main", r)][a]
                         for r in range(1, config.n_realizations + 1)])
            for a in LEVELS
        }
        training = {}
        for a in LEVELS:
            ideal = np.stack([train_ed[tau][a]
                              for tau in range(1, config.n_train + 1)])
            noisy = np.stack([
                np.stack([results[("an_train", tau, r)][a]
                          for r in range(1, config.n_realizations + 1)])
                for tau in range(1, config.n_train + 1)
            ])
            training[a] = TrainingSet(ideal=ideal, noisy=noisy,
                                      taus=tuple(range(1, config.n_train + 1)))

    zne = None
    if include_zne:
        folds = config.zne_folds()
        zne = {}
        for a in LEVELS:
            stack = [results[("noisy",)][a]]
            stack += [results[("zne", f)][a] for f in folds[1:]]
            zne[a] = ZneSeries(folds, np.stack(stack))

    return EvolutionData(
        times=times,
        l0_values=l0s,
        levels=LEVELS,
        ed=ed,
        ideal_circuit={a: results[("ideal",)][a] for a in LEVELS},
        noisy={a: results[("noisy",)][a] for a in LEVELS},
        added_main=added_main,
        training=training,
        training_l0_values=train_l0,
        zne=zne,
    )


def best_setting(sweep):
    """Key of the smallest error; ties go to the cheaper configuration."""
    return min(sweep, key=lambda k: (sweep[k], k))


def mitigate(config, data):
    """Hyperparameter sweeps, best mitigated lines, and region errors."""
    domain = config.domain()
    l0s = data.l0_values
    p_mask = domain.prediction_mask(l0s)
    learn_mask = domain.learning_mask(l0s)
    lp_mask = learn_mask | p_mask

    def err(lines, mask, region, method):
        return region_error(lines, data.ed, mask, region, method=method).value

    e_noisy = err(data.noisy, p_mask, "P", "noisy_orig")
    grec_values = range(config.n_realizations + 1, config.n_train + 1)
    grec_sweep = sweep_training_lines(
        data.training, data.added_main, data.ed, p_mask,
        n_train_values=grec_values,
    )
    best_n_train = best_setting(grec_sweep)
    eta_tables = {
        a: fit_etas(data.training[a].truncated(best_n_train)) for a in data.levels
    }
    grec_line = {a: mitigate_line(data.added_main[a], eta_tables[a])
                 for a in data.levels}

    zne_sweep = sweep_fold_counts(
        data.zne,
        lambda lines: err(lines, p_mask, "P", "zne"),
        n_evol_values=range(2, config.n_evol_zne + 1),
    )
    best_n_evol = best_setting(zne_sweep)
    zne_line = {a: mitigate_line_zne(data.zne[a].truncated(best_n_evol))
                for a in data.levels}

    beyond = domain.beyond_star_mask(l0s)
    beyond_star = None
    if beyond.any():
        beyond_star = {
            "grec": err(grec_line, beyond, "Pstar", "grec"),
            "zne": err(zne_line, beyond, "Pstar", "zne"),
            "n_points": int(beyond.sum()),
        }

    trend = {}
    for a in data.levels:
        slope, intercept, residual = trend_check(
            grec_line[a], data.ed[a], l0s, learn_mask
        )
        correction = np.abs(slope * l0s + intercept)
        trend[a] = {
            "slope": slope,
            "intercept": intercept,
            "residual": residual,
            "max_correction": float(correction.max()),
            "negligible": bool(correction.max() < 0.1 * e_noisy),
        }

    return MitigationSummary(
        e_noisy=e_noisy,
        e_noisy_lp=err(data.noisy, lp_mask, "LP", "noisy_orig"),
        e_trotter=err(data.ideal_circuit, p_mask, "P", "ideal_circuit"),
        e_trotter_lp=err(data.ideal_circuit, lp_mask, "LP", "ideal_circuit"),
        grec_sweep=grec_sweep,
        zne_sweep=zne_sweep,
        best_n_train=best_n_train,
        best_n_evol_zne=best_n_evol,
        e_grec_min=grec_sweep[best_n_train],
        e_zne_min=zne_sweep[best_n_evol],
        e_grec_lp=err(grec_line, lp_mask, "LP", "grec"),
        e_zne_lp=err(zne_line, lp_mask, "LP", "zne"),
        improvement=improvement(grec_sweep[best_n_train],
                                zne_sweep[best_n_evol], e_noisy),
        eta_tables=eta_tables,
        grec_line=grec_line,
        zne_line=zne_line,
        beyond_star=beyond_star,
        trend=trend,
    )


def slice_counts(config, kind):
    """Per-slice gate counts for budget reporting.

    Calibrated presets use the reference-transpilation counts so budgets are
    comparable across compilers; other models fall back to the counts of our
    own compiled first slice.
    """
    mg = config.mass_ratio
    key = (kind, int(mg))
    if config.n_sites == 6 and mg == int(mg) and key in REFERENCE_SLICE_COUNTS:
        return dict(REFERENCE_SLICE_COUNTS[key])
    params = config.params()
    schedule = config.main_schedule()
    l0 = float(schedule.l0_values()[1])
    dt = config.total_time / config.n_steps
    if kind == "grec":
        psum = apply_added_noise(params, l0, _rotation(config, 1))
    else:
        psum = build_hamiltonian(params, l0)
    counts = count_gates(compile_slice(psum, dt))
    return {k: counts[k] for k in ("CX", "RZ", "SX")}


def _budget_cells(config, method, n_evol, counts):
    budget = gate_budget(method, n_evol, counts, config.n_steps,
                         n_levels=len(LEVELS))
    return {f"N_{k}": budget.totals[k] for k in ("CX", "RZ", "SX")}


def metric_rows(config, summary):
    """metrics.csv rows: baselines, every swept configuration, extras."""
    rows = [
        {"method": "noisy_orig", "region": "P", "error": summary.e_noisy},
        {"method": "noisy_orig", "region": "LP", "error": summary.e_noisy_lp},
        {"method": "ideal_circuit", "region": "P", "error": summary.e_trotter},
        {"method": "ideal_circuit", "region": "LP",
         "error": summary.e_trotter_lp},
    ]
    zne_counts = slice_counts(config, "orig")
    for n_evol in sorted(summary.zne_sweep):
        rows.append({"method": "zne", "n_evol": n_evol, "region": "P",
                     "error": summary.zne_sweep[n_evol],
                     **_budget_cells(config, "zne", n_evol, zne_counts)})
    rows.append({"method": "zne", "n_evol": summary.best_n_evol_zne,
                 "region": "LP", "error": summary.e_zne_lp})
    grec_counts = slice_counts(config, "grec")
    for n_train in sorted(summary.grec_sweep):
        n_evol = n_train + 1
        rows.append({"method": "grec", "n_evol": n_evol, "region": "P",
                     "error": summary.grec_sweep[n_train],
                     **_budget_cells(config, "grec", n_evol, grec_counts)})
    rows.append({"method": "grec", "n_evol": summary.best_n_train + 1,
                 "region": "LP", "error": summary.e_grec_lp})
    if summary.beyond_star is not None:
        rows.append({"method": "grec", "n_evol": summary.best_n_train + 1,
                     "region": "Pstar", "error": summary.beyond_star["grec"]})
        rows.append({"method": "zne", "n_evol": summary.best_n_evol_zne,
                     "region": "Pstar", "error": summary.beyond_star["zne"]})
    return rows


def energy_records(config, data, summary=None):
    """Every simulated line as exportable rows; mitigated lines when given."""
    run_id = config.run_id
    times, l0s = data.times, data.l0_values
    records = []

    def add(variant, alpha, energies, tau=None, r=None, f=None,
            grid=None):
        records.extend(records_from_arrays(
            run_id, variant, alpha, times, l0s if grid is None else grid,
            energies, tau=tau, r=r, f=f,
        ))

    for a in data.levels:
        add("ideal_ed", a, data.ed[a])
    if data.training is not None:
        for tau in sorted(data.training_l0_values):
            for a in data.levels:
                add("ideal_ed", a, data.training[a].ideal[tau - 1], tau=tau,
                    grid=data.training_l0_values[tau])
    for a in data.levels:
        add("ideal_circuit", a, data.ideal_circuit[a])
    for a in data.levels:
        add("noisy_orig", a, data.noisy[a])
    if data.training is not None:
        for r in range(1, config.n_realizations + 1):
            for a in data.levels:
                add("added_noise", a, data.added_main[a][r - 1], r=r)
        for tau in sorted(data.training_l0_values):
            for r in range(1, config.n_realizations + 1):
                for a in data.levels:
                    add("added_noise", a,
                        data.training[a].noisy[tau - 1, r - 1],
                        tau=tau, r=r, grid=data.training_l0_values[tau])
    if data.zne is not None:
        folds = data.zne[data.levels[0]].folds
        for idx, f in enumerate(folds):
            if f == 1:
                continue  # the fold-1 member is the noisy_orig line above
            for a in data.levels:
                add("zne", a, data.zne[a].energies[idx], f=f)
    if summary is not None:
        for a in data.levels:
            add("grec_mitigated", a, summary.grec_line[a])
        for a in data.levels:
            add("zne_mitigated", a, summary.zne_line[a])
    return records


def spectrum_tables(spectrum):
    header = ["i", "l0"] + [f"E{a}" for a in sorted(spectrum.ed)]
    rows = []
    for i in range(len(spectrum.l0_values)):
        rows.append([i, float(spectrum.l0_values[i])]
                    + [float(spectrum.ed[a][i]) for a in sorted(spectrum.ed)])
    crit = spectrum.critical
    return {
        "ed_lines": (header, rows),
        "critical_point": (["l0_star", "gap", "is_crossing"],
                           [[crit.l0_star, crit.gap, int(crit.is_crossing)]]),
    }


def plot_tables(config, spectrum, summary):
    tables = spectrum_tables(spectrum)
    tables["grec_sweep"] = (
        ["n_train", "n_evol", "error"],
        [[k, k + 1, summary.grec_sweep[k]] for k in sorted(summary.grec_sweep)],
    )
    tables["zne_sweep"] = (
        ["n_evol", "error"],
        [[k, summary.zne_sweep[k]] for k in sorted(summary.zne_sweep)],
    )
    tables["trend"] = (
        ["alpha", "slope", "intercept", "residual", "max_correction",
         "noisy_error", "negligible"],
        [[a, t["slope"], t["intercept"], t["residual"], t["max_correction"],
          summary.e_noisy, int(t["negligible"])]
         for a, t in sorted(summary.trend.items())],
    )
    tables["improvement"] = (
        ["e_grec_min", "n_evol_grec", "e_zne_min", "n_evol_zne", "e_noisy",
         "improvement"],
        [[summary.e_grec_min, summary.best_n_train + 1, summary.e_zne_min,
          summary.best_n_evol_zne, summary.e_noisy, summary.improvement]],
    )
    return tables


def run_all(config, write=True):
    """Full pipeline; returns the in-memory results and the artifact dir."""
    spectrum = simulate_spectrum(config)
    data = simulate_lines(config)
    summary = mitigate(config, data)
    run_dir = None
    if write:
        run_dir = export(
            config.out_dir,
            config.run_id,
            energy_records(config, data, summary),
            summary.eta_tables,
            metric_rows(config, summary),
            plot_tables(config, spectrum, summary),
        )
    return RunOutput(config=config, spectrum=spectrum, data=data,
                     summary=summary, run_dir=run_dir)
