"""Command-line front end.

Subcommands run increasingly large parts of the pipeline: ``spectrum``
locates the level crossing from exact diagonalization, ``evolve`` simulates
every configured line, ``grec`` and ``zne`` run one mitigation method each
with its hyperparameter sweep, ``report`` computes the full comparison
table, and ``all`` writes the complete artifact set. Results land under
out_dir/<run_id>; the run id derives from the configuration, never from the
clock, so reruns with one seed are byte-identical.

Exit codes: 0 success, 1 simulation failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_config_file, resolve_config
from .grec import fit_etas, sweep_training_lines
from .pipeline import (
    best_setting,
    energy_records,
    run_all,
    simulate_lines,
    simulate_spectrum,
    spectrum_tables,
)
from .report import (
    region_error,
    write_energy_lines,
    write_etas,
    write_table,
)
from .validation import ValidationError
from .zne import sweep_fold_counts


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="key = value settings file")
    common.add_argument("--out-dir", metavar="PATH",
                        help="artifact root (default out)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--mg", type=float, choices=(0.0, 10.0),
                        help="calibrated mass-ratio preset")
    common.add_argument("--n-train", type=int,
                        help="training ramps available to the regression")
    common.add_argument("--n-evol-zne", type=int,
                        help="largest extrapolation fold count")
    common.add_argument("--noise-p", type=float,
                        help="Z-flip probability per rotation gate")
    shots = common.add_mutually_exclusive_group()
    shots.add_argument("--exact", action="store_true",
                       help="exact expectation values (default)")
    shots.add_argument("--shots", type=int,
                       help="sampled measurement with this budget per point")
    common.add_argument("--workers", type=int,
                        help="parallel line simulations")

    parser = argparse.ArgumentParser(
        prog="schwinger-qem",
        description="Adiabatic level simulation with error mitigation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common],
                   help="exact lines and critical point")
    sub.add_parser("evolve", parents=[common],
                   help="simulate all configured lines")
    sub.add_parser("grec", parents=[common],
                   help="fit, mitigate, and sweep the regression method")
    sub.add_parser("zne", parents=[common],
                   help="fold, extrapolate, and sweep the baseline method")
    sub.add_parser("report", parents=[common],
                   help="errors, budgets, and improvement table")
    sub.add_parser("all", parents=[common], help="full pipeline")
    return parser


def _load_config(args):
    file_values = parse_config_file(args.config) if args.config else None
    flags = {
        "mass_ratio": args.mg,
        "seed": args.seed,
        "n_train": args.n_train,
        "n_evol_zne": args.n_evol_zne,
        "noise_p": args.noise_p,
        "n_shots": args.shots,
        "workers": args.workers,
        "out_dir": args.out_dir,
    }
    return resolve_config(file_values, flags)


def _run_dir(config):
    path = os.path.join(config.out_dir, config.run_id)
    os.makedirs(os.path.join(path, "plotdata"), exist_ok=True)
    return path


def _write_plots(run_dir, tables):
    for name, (header, rows) in tables.items():
        write_table(os.path.join(run_dir, "plotdata", name + ".csv"),
                    header, rows)


def cmd_spectrum(config):
    spectrum = simulate_spectrum(config)
    run_dir = _run_dir(config)
    _write_plots(run_dir, spectrum_tables(spectrum))
    crit = spectrum.critical
    kind = "crossing" if crit.is_crossing else "avoided crossing"
    print(f"critical point: l0* = {crit.l0_star:.7f} "
          f"(gap {crit.gap:.3e}, {kind})")
    print(f"wrote {run_dir}/plotdata")
    return 0


def cmd_evolve(config):
    data = simulate_lines(config)
    records = energy_records(config, data)
    run_dir = _run_dir(config)
    path = os.path.join(run_dir, "energy_lines.csv")
    write_energy_lines(path, records)
    print(f"wrote {len(records)} samples to {path}")
    return 0


def cmd_grec(config):
    data = simulate_lines(config, include_zne=False)
    p_mask = config.domain().prediction_mask(data.l0_values)
    sweep = sweep_training_lines(
        data.training, data.added_main, data.ed, p_mask,
        n_train_values=range(config.n_realizations + 1, config.n_train + 1),
    )
    best = best_setting(sweep)
    tables = {a: fit_etas(data.training[a].truncated(best))
              for a in data.levels}
    run_dir = _run_dir(config)
    write_etas(os.path.join(run_dir, "etas.csv"), tables)
    _write_plots(run_dir, {"grec_sweep": (
        ["n_train", "n_evol", "error"],
        [[k, k + 1, sweep[k]] for k in sorted(sweep)],
    )})
    print(f"regression best: n_train = {best} (n_evol = {best + 1}), "
          f"error(P) = {sweep[best]:.6g}")
    print(f"wrote {run_dir}/etas.csv")
    return 0


def cmd_zne(config):
    data = simulate_lines(config, include_grec=False)
    p_mask = config.domain().prediction_mask(data.l0_values)

    def error_fn(lines):
        return region_error(lines, data.ed, p_mask, "P", method="zne").value

    sweep = sweep_fold_counts(
        data.zne, error_fn, n_evol_values=range(2, config.n_evol_zne + 1)
    )
    best = best_setting(sweep)
    run_dir = _run_dir(config)
    _write_plots(run_dir, {"zne_sweep": (
        ["n_evol", "error"],
        [[k, sweep[k]] for k in sorted(sweep)],
    )})
    print(f"extrapolation best: n_evol = {best}, error(P) = {sweep[best]:.6g}")
    print(f"wrote {run_dir}/plotdata/zne_sweep.csv")
    return 0


def _print_report(config, out):
    s = out.summary
    crit = out.spectrum.critical
    kind = "crossing" if crit.is_crossing else "avoided crossing"
    print(f"model: mg = {config.mass_ratio:g}, N = {config.n_sites}, "
          f"n_steps = {config.n_steps}, seed = {config.seed}")
    print(f"critical point: l0* = {crit.l0_star:.7f} "
          f"(gap {crit.gap:.3e}, {kind})")
    print(f"{'method':<14} {'n_evol':>6} {'error(P)':>12} {'error(LP)':>12}")
    print(f"{'noisy':<14} {'-':>6} {s.e_noisy:>12.6f} {s.e_noisy_lp:>12.6f}")
    print(f"{'ideal circuit':<14} {'-':>6} {s.e_trotter:>12.6f} "
          f"{s.e_trotter_lp:>12.6f}")
    print(f"{'zne (best)':<14} {s.best_n_evol_zne:>6} {s.e_zne_min:>12.6f} "
          f"{s.e_zne_lp:>12.6f}")
    print(f"{'grec (best)':<14} {s.best_n_train + 1:>6} {s.e_grec_min:>12.6f} "
          f"{s.e_grec_lp:>12.6f}")
    if s.beyond_star is not None:
        print(f"beyond l0*: grec {s.beyond_star['grec']:.6f}, "
              f"zne {s.beyond_star['zne']:.6f} "
              f"({s.beyond_star['n_points']} points)")
    print(f"improvement over zne: {100 * s.improvement:+.1f}% of the noisy error")


def cmd_report(config):
    out = run_all(config)
    _print_report(config, out)
    print(f"wrote {out.run_dir}")
    return 0


def cmd_all(config):
    out = run_all(config)
    _print_report(config, out)
    print(f"wrote {out.run_dir}")
    return 0


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "grec": cmd_grec,
    "zne": cmd_zne,
    "report": cmd_report,
    "all": cmd_all,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](config)
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
