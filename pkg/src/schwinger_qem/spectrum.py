"""Exact diagonalization, level tracking and crossing location.

Levels are tracked along a background-field grid by maximal eigenvector
overlap, so a line keeps its physical identity when the sorted order of
eigenvalues swaps at a crossing. Eigenvector phases are fixed by making the
largest-magnitude component real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .model import build_hamiltonian
from .pauli import to_dense


class TrackingError(RuntimeError):
    """Raised when eigenvector continuation becomes ambiguous."""


# Two levels closer than this at the ramp start count as degenerate.
DEGENERACY_TOL = 1e-9

# A located gap minimum below this counts as a crossing at working
# resolution: the hybridization window is then far narrower than any ramp
# grid used here, so tracked lines swap and slow ramps pass diabatically.
CROSSING_GAP_TOL = 1e-4


def _fix_phase(vec):
    mags = np.abs(vec)
    top = mags.max()
    # first component within an ulp-safe band of the maximum; plain argmax
    # is unstable when symmetric states carry exact magnitude ties
    k = int(np.argmax(mags >= top * (1.0 - 1e-12)))
    pivot = vec[k]
    if pivot == 0:
        return vec
    return vec * (abs(pivot) / pivot)


@dataclass
class SpectrumSlice:
    """Lowest part of the spectrum at one background-field value."""

    l0: float | None
    energies: np.ndarray
    states: np.ndarray  # column j is the eigenvector of energies[j]


def eigensolve(psum, k, l0=None, check_residual=False):
    """k lowest eigenpairs of a Hermitian Pauli sum.

    Args:
        psum: operator to diagonalize (dense route, register <= 12 sites).
        k: number of eigenpairs, 1 <= k <= 2**n_sites.
        l0: optional background-field tag stored on the result.
        check_residual: verify ||H v - E v|| for every returned pair.
    """
    dim = 2**psum.n_sites
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    h = to_dense(psum)
    scale = max(1.0, float(np.abs(h).max()))
    if np.abs(h - h.conj().T).max() > 1e-12 * scale:
        raise ValueError("operator is not Hermitian")
    evals, evecs = np.linalg.eigh(h)
    states = np.column_stack([_fix_phase(evecs[:, j]) for j in range(k)])
    out = SpectrumSlice(l0=l0, energies=evals[:k].copy(), states=states)
    if check_residual:
        for j in range(k):
            r = h @ states[:, j] - out.energies[j] * states[:, j]
            if np.linalg.norm(r) > 1e-10 * scale:
                raise RuntimeError(f"eigenpair {j} residual too large")
    return out


@dataclass
class TrackedLines:
    """Energy lines followed through the grid by eigenvector overlap."""

    l0_grid: np.ndarray
    energies: dict[int, np.ndarray]
    min_overlap: dict[int, float]
    states: dict[int, np.ndarray] | None = None

    def line(self, alpha):
        return self.energies[alpha]


def ideal_lines(params, l0_grid, levels=(0, 1), k_extra=2, keep_states=False,
                min_overlap=0.5):
    """Track the requested levels across a background-field grid.

    Level alpha starts as the (alpha+1)-th lowest eigenvalue at l0_grid[0];
    at each later point the candidate with maximal squared overlap continues
    the line (one-to-one assignment). An overlap below ``min_overlap`` means
    the grid is too coarse to follow the state and raises TrackingError.
    """
    l0_grid = np.asarray(l0_grid, dtype=float)
    if l0_grid.ndim != 1 or len(l0_grid) < 1:
        raise ValueError("l0_grid must be a non-empty 1D array")
    levels = tuple(sorted(set(int(a) for a in levels)))
    if levels[0] < 0:
        raise ValueError("levels must be non-negative")
    dim = 2**params.n_sites
    k = min(dim, max(levels) + 1 + k_extra)

    first = eigensolve(build_hamiltonian(params, l0_grid[0]), k, l0=l0_grid[0])
    vecs = {a: first.states[:, a].copy() for a in levels}
    energies = {a: [first.energies[a]] for a in levels}
    worst = {a: 1.0 for a in levels}
    kept = {a: [vecs[a]] for a in levels} if keep_states else None

    for l0 in l0_grid[1:]:
        cur = eigensolve(build_hamiltonian(params, l0), k, l0=l0)
        overlap = np.zeros((len(levels), k))
        for row, a in enumerate(levels):
            overlap[row] = np.abs(cur.states.conj().T @ vecs[a]) ** 2
        rows, cols = linear_sum_assignment(-overlap)
        for row, col in zip(rows, cols):
            a = levels[row]
            best = overlap[row, col]
            if best < min_overlap:
                raise TrackingError(
                    f"line {a} lost at l0 = {l0:.8g} (overlap {best:.3f}); "
                    "refine the grid"
                )
            worst[a] = min(worst[a], float(best))
            vecs[a] = cur.states[:, col].copy()
            energies[a].append(cur.energies[col])
            if keep_states:
                kept[a].append(vecs[a])
    return TrackedLines(
        l0_grid=l0_grid,
        energies={a: np.array(energies[a]) for a in levels},
        min_overlap=worst,
        states={a: np.column_stack(kept[a]) for a in levels} if keep_states else None,
    )


def prepare_initial_state(params, l0, alpha):
    """Exact eigenstate used as the starting point of an adiabatic run."""
    alpha = int(alpha)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    dim = 2**params.n_sites
    k = min(dim, alpha + 2)
    sl = eigensolve(build_hamiltonian(params, l0), k, l0=l0)
    spacings = np.diff(sl.energies[: alpha + 2])
    if len(spacings) and np.min(np.abs(spacings[max(0, alpha - 1):])) < DEGENERACY_TOL:
        raise TrackingError(
            f"level {alpha} is degenerate at l0 = {l0:.8g}; starting state undefined"
        )
    return sl.states[:, alpha].copy()


@dataclass
class CriticalPoint:
    """Location of the minimal gap between the two lowest levels."""

    l0_star: float
    gap: float
    is_crossing: bool


def locate_critical_point(params, domain, coarse=241, xatol=1e-9):
    """Find where the two lowest sorted levels cross or come closest.

    A coarse scan over the domain brackets the minimum of the sorted gap;
    golden-section refinement pins it down. A residual gap below
    ``CROSSING_GAP_TOL`` is reported as an exact crossing.
    """

    def gap(l0):
        sl = eigensolve(build_hamiltonian(params, float(l0)), 2)
        return float(sl.energies[1] - sl.energies[0])

    grid = np.linspace(domain.l0_min, domain.l0_max, int(coarse))
    gaps = np.array([gap(v) for v in grid])
    i = int(np.argmin(gaps))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if lo == hi:
        best_l0, best_gap = float(grid[i]), float(gaps[i])
    else:
        res = minimize_scalar(
            gap, bounds=(lo, hi), method="bounded", options={"xatol": xatol}
        )
        best_l0, best_gap = float(res.x), float(res.fun)
    return CriticalPoint(
        l0_star=best_l0, gap=best_gap, is_crossing=best_gap < CROSSING_GAP_TOL
    )
