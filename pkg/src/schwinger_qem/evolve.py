"""Adiabatic ramps of low-lying eigenstates on the simulated device.

One first-order Trotter slice per time step, each built from the Hamiltonian
frozen at the new ramp point. The measured observable is always the clean
Hamiltonian at that same point, also when the evolution generator is
conjugated by local rotations (added noise) or when slices are folded for
noise amplification. Energies therefore live on a common grid across all
variants of a run, which is what the mitigation stage regresses over.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .circuit import (
    DensityState,
    apply_circuit_stack,
    compile_slice,
    fold_slice,
    measure_energy,
)
from .model import apply_added_noise, build_hamiltonian
from .spectrum import eigensolve, ideal_lines, prepare_initial_state
from .validation import check_int, require

DEFAULT_FOLD_FACTORS = tuple(range(1, 20, 2))


def rng_stream(master_seed, *key):
    """Independent deterministic generator for a named sub-stream.

    String key parts hash via crc32, so streams are stable across runs and
    platforms as long as the labels stay the same.
    """
    master_seed = check_int(master_seed, "master_seed", minimum=0)
    words = [master_seed]
    for part in key:
        if isinstance(part, str):
            words.append(zlib.crc32(part.encode("utf-8")))
        else:
            words.append(check_int(part, "stream key", minimum=0))
    return np.random.default_rng(np.random.SeedSequence(words))


@dataclass(frozen=True)
class EvolvedLine:
    """Energies measured after each Trotter slice along one ramp."""

    times: np.ndarray
    l0_values: np.ndarray
    energies: np.ndarray
    alpha: int
    fold: int

    def __len__(self):
        return len(self.energies)


def evolve_energy_lines(
    params,
    schedule,
    alphas=(0, 1),
    *,
    noise=None,
    rotation=None,
    fold=1,
    n_shots=None,
    rng=None,
):
    """Run one ramp for several levels at once; the levels share every slice.

    Returns a dict alpha -> EvolvedLine. With sampling noise on, draws are
    ordered by time step and then by level, so a rerun with the same rng
    stream reproduces every line bit for bit.

    Args:
        params: lattice model parameters.
        schedule: RampSchedule fixing the l0 path and step count.
        alphas: eigenstate indices prepared at the start of the ramp.
        noise: intrinsic device NoiseModel, or None for a clean device.
        rotation: NoiseRotation conjugating the evolution generator; the
            measured observable stays unrotated.
        fold: odd local folding factor applied to every slice.
        n_shots: per-point sampling budget; None measures exactly.
        rng: generator for the sampling draw, required with n_shots.
    """
    fold = check_int(fold, "fold", minimum=1)
    require(fold % 2 == 1, "fold factor must be odd", field="fold")
    alphas = tuple(check_int(a, "alpha", minimum=0) for a in alphas)
    require(len(alphas) >= 1, "need at least one level", field="alphas")
    require(len(set(alphas)) == len(alphas), "duplicate levels", field="alphas")
    times = schedule.times()
    l0s = schedule.l0_values()
    dt = schedule.total_time / schedule.n_steps

    starts = [prepare_initial_state(params, float(l0s[0]), a) for a in alphas]
    rhos = np.stack([np.outer(v, v.conj()) for v in starts])
    energies = np.empty((len(alphas), len(times)))
    h_first = build_hamiltonian(params, float(l0s[0]))
    for j in range(len(alphas)):
        energies[j, 0] = measure_energy(
            DensityState(rhos[j]), h_first, n_shots=n_shots, rng=rng
        )
    conjugate = rotation is not None and not rotation.is_identity
    for i in range(1, len(times)):
        l0 = float(l0s[i])
        observable = build_hamiltonian(params, l0)
        generator = (
            apply_added_noise(params, l0, rotation) if conjugate else observable
        )
        circuit = compile_slice(generator, dt)
        if fold > 1:
            circuit = fold_slice(circuit, fold)
        rhos = apply_circuit_stack(rhos, params.n_sites, circuit, noise=noise)
        for j in range(len(alphas)):
            energies[j, i] = measure_energy(
                DensityState(rhos[j]), observable, n_shots=n_shots, rng=rng
            )
    return {
        a: EvolvedLine(
            times=times,
            l0_values=l0s,
            energies=energies[j],
            alpha=a,
            fold=fold,
        )
        for j, a in enumerate(alphas)
    }


def evolve_energy_line(params, schedule, alpha, **kwargs):
    """Single-level version of evolve_energy_lines."""
    return evolve_energy_lines(params, schedule, (alpha,), **kwargs)[alpha]


def run_fold_family(
    params,
    schedule,
    alphas=(0, 1),
    folds=DEFAULT_FOLD_FACTORS,
    *,
    noise=None,
    n_shots=None,
    rng_factory=None,
):
    """Evolve the same ramp at several folding factors.

    Returns a dict fold -> {alpha -> EvolvedLine}. ``rng_factory(fold)``
    supplies an independent generator per member when sampling noise is on.
    """
    folds = tuple(check_int(f, "fold", minimum=1) for f in folds)
    require(len(folds) == len(set(folds)), "duplicate fold factors", field="folds")
    out = {}
    for f in folds:
        rng = rng_factory(f) if rng_factory is not None else None
        out[f] = evolve_energy_lines(
            params,
            schedule,
            alphas,
            noise=noise,
            fold=f,
            n_shots=n_shots,
            rng=rng,
        )
    return out


def exact_reference_line(params, schedule, alpha, **tracking_kwargs):
    """Tracked exact-diagonalization energies on the schedule's grid."""
    lines = ideal_lines(params, schedule.l0_values(), levels=(alpha,), **tracking_kwargs)
    return lines.energies[alpha]


def adiabaticity_check(params, schedule, alpha):
    """Minimum overlap of the exactly ramped state with the tracked line.

    Evolves with the exact stepwise propagator (no Trotter split, no noise),
    so the result isolates how adiabatic the schedule itself is. Values near
    one justify comparing device runs against tracked eigenstate lines.
    """
    l0s = schedule.l0_values()
    dt = schedule.total_time / schedule.n_steps
    tracked = ideal_lines(params, l0s, levels=(alpha,), keep_states=True)
    line_states = tracked.states[alpha]
    psi = prepare_initial_state(params, float(l0s[0]), alpha)
    worst = 1.0
    for i in range(1, len(l0s)):
        sl = eigensolve(
            build_hamiltonian(params, float(l0s[i])), 2**params.n_sites
        )
        phases = np.exp(-1j * sl.energies * dt)
        psi = sl.states @ (phases * (sl.states.conj().T @ psi))
        worst = min(worst, float(np.abs(line_states[:, i].conj() @ psi) ** 2))
    return worst
