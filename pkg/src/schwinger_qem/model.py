"""Spin formulation of the lattice Schwinger model and its ramp schedules.

The Hamiltonian on N sites (N even, open boundaries) after integrating out
gauge links and adding a charge-sector penalty consists of five groups:

* hopping        (x/2) (X_n X_{n+1} + Y_n Y_{n+1})      for n = 0..N-2
* long-range ZZ  (1/2) (N - k - 1 + penalty) Z_n Z_k    for n < k
* single Z       (N/4 - ceil(n/2)/2 + l0 (N - n - 1)) Z_n   for n = 0..N-2
* staggered mass (m/g) sqrt(x) (-1)^n Z_n               for n = 0..N-1
* constant       l0^2 (N-1) + l0 N/2 + N^2/8 + penalty N/4

with x = (N / V)^2 and l0 the background field, the adiabatic ramp parameter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pauli import NoiseRotation, PauliString, PauliSum, canonicalize, conjugate_pauli
from .validation import check_int, check_scalar, require


@dataclass(frozen=True)
class ModelParams:
    """Static model parameters; the background field l0 is passed separately."""

    n_sites: int
    volume: float
    mass_ratio: float
    charge_penalty: float

    def __post_init__(self):
        n = check_int(self.n_sites, "N", minimum=2)
        require(n % 2 == 0, "must be even", field="N")
        v = check_scalar(self.volume, "V")
        require(v > 0, "must be positive", field="V")
        mg = check_scalar(self.mass_ratio, "mg", minimum=0.0)
        lam = check_scalar(self.charge_penalty, "lambda")
        require(lam > 0, "must be positive", field="lambda")
        if lam < 10.0:
            warnings.warn(
                "charge penalty below 10 barely separates charge sectors",
                stacklevel=2,
            )
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "volume", v)
        object.__setattr__(self, "mass_ratio", mg)
        object.__setattr__(self, "charge_penalty", lam)

    @property
    def x(self):
        """Squared inverse lattice spacing (N / V)^2."""
        return (self.n_sites / self.volume) ** 2


@dataclass(frozen=True)
class DomainSpec:
    """Background-field window split into a learning and a prediction region.

    The learning region is [l0_min, l0_int], the prediction region is
    (l0_int, l0_max] with a strictly greater lower edge; l0_star marks where
    the two tracked levels cross or come closest.
    """

    l0_min: float
    l0_int: float
    l0_star: float
    l0_max: float

    def __post_init__(self):
        vals = [
            check_scalar(getattr(self, name), name)
            for name in ("l0_min", "l0_int", "l0_star", "l0_max")
        ]
        require(
            vals[0] < vals[1] < vals[2] < vals[3],
            "need l0_min < l0_int < l0_star < l0_max",
            field="domain",
        )
        for name, v in zip(("l0_min", "l0_int", "l0_star", "l0_max"), vals):
            object.__setattr__(self, name, v)

    @property
    def span(self):
        return self.l0_max - self.l0_min

    def _edge_tol(self):
        # Grid points that mathematically sit on l0_int land on either side
        # of it in floating point; snap them into the learning region.
        return 1e-9 * self.span

    def prediction_mask(self, l0):
        """Boolean mask of grid values inside the prediction region."""
        l0 = np.asarray(l0, dtype=float)
        return l0 > self.l0_int + self._edge_tol()

    def learning_mask(self, l0):
        l0 = np.asarray(l0, dtype=float)
        inside = (l0 >= self.l0_min - self._edge_tol()) & (
            l0 <= self.l0_int + self._edge_tol()
        )
        return inside

    def beyond_star_mask(self, l0):
        """Prediction-region values strictly past the level-crossing point."""
        l0 = np.asarray(l0, dtype=float)
        return l0 > self.l0_star + self._edge_tol()


@dataclass(frozen=True)
class RampSchedule:
    """Linear background-field ramp l0(t) = l0_start + (l0_end - l0_start) t / T."""

    l0_start: float
    l0_end: float
    total_time: float
    n_steps: int
    kind: str = "main"
    tau: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "l0_start", check_scalar(self.l0_start, "l0_start"))
        object.__setattr__(self, "l0_end", check_scalar(self.l0_end, "l0_end"))
        t = check_scalar(self.total_time, "T")
        require(t > 0, "must be positive", field="T")
        object.__setattr__(self, "total_time", t)
        object.__setattr__(self, "n_steps", check_int(self.n_steps, "n_steps", minimum=1))
        require(self.kind in ("main", "train"), "unknown ramp kind", field="kind")

    def times(self):
        """Sample times t_i = i T / n_steps, i = 0..n_steps."""
        return np.arange(self.n_steps + 1) * self.total_time / self.n_steps

    def l0_values(self):
        return ramp_value(self, self.times())


def ramp_value(schedule, t):
    """Background field at time(s) t in [0, T]; endpoints are exact."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > schedule.total_time):
        raise ValueError("time outside [0, T]")
    out = schedule.l0_start + (schedule.l0_end - schedule.l0_start) * (
        t_arr / schedule.total_time
    )
    out = np.where(t_arr == 0.0, schedule.l0_start, out)
    out = np.where(t_arr == schedule.total_time, schedule.l0_end, out)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def training_schedules(domain, total_time, n_steps, n_train, endpoints=None):
    """Shallower-and-shallower training ramps inside the learning region.

    Ramp tau (tau = 1..n_train) runs from l0_min to the endpoint
    l0_min + (l0_int - l0_min) (11 - tau) / 10, so tau = 1 ends exactly on
    l0_int (nearest the prediction region) and tau = 11 stays at l0_min.
    ``endpoints`` overrides the 11-point endpoint grid with custom values.
    """
    n_train = check_int(n_train, "n_train", minimum=2, maximum=11)
    if endpoints is not None:
        endpoints = [check_scalar(e, "endpoints") for e in endpoints]
        require(
            len(endpoints) == n_train,
            f"need {n_train} endpoints, got {len(endpoints)}",
            field="endpoints",
        )
        for e in endpoints:
            require(
                domain.l0_min <= e <= domain.l0_int,
                "training endpoints must stay inside the learning region",
                field="endpoints",
            )
    out = []
    for tau in range(1, n_train + 1):
        if endpoints is not None:
            end = endpoints[tau - 1]
        else:
            w = (11 - tau) / 10.0
            # Convex combination keeps the tau = 1 endpoint exactly on l0_int
            # and the tau = 11 endpoint exactly on l0_min.
            end = (1.0 - w) * domain.l0_min + w * domain.l0_int
        if end == domain.l0_min:
            # Degenerate constant ramp; encode as an (allowed) zero-slope line.
            sched = RampSchedule(domain.l0_min, domain.l0_min, total_time, n_steps,
                                 "train", tau)
        else:
            sched = RampSchedule(domain.l0_min, end, total_time, n_steps, "train", tau)
        out.append(sched)
    return out


def build_hamiltonian(params, l0):
    """Assemble the five Hamiltonian groups at background field l0."""
    l0 = check_scalar(l0, "l0")
    n = params.n_sites
    x = params.x
    lam = params.charge_penalty
    terms = []
    for q in range(n - 1):
        terms.append(PauliString.from_sites(n, {q: "X", q + 1: "X"}, x / 2.0))
        terms.append(PauliString.from_sites(n, {q: "Y", q + 1: "Y"}, x / 2.0))
    for q in range(n - 1):
        for k in range(q + 1, n):
            coeff = 0.5 * (n - k - 1 + lam)
            terms.append(PauliString.from_sites(n, {q: "Z", k: "Z"}, coeff))
    for q in range(n - 1):
        coeff = n / 4.0 - ((q + 1) // 2) / 2.0 + l0 * (n - q - 1)
        terms.append(PauliString.from_sites(n, {q: "Z"}, coeff))
    mass = params.mass_ratio * math.sqrt(x)
    for q in range(n):
        terms.append(PauliString.from_sites(n, {q: "Z"}, mass * (-1) ** q))
    const = l0 * l0 * (n - 1) + 0.5 * l0 * n + n * n / 8.0 + lam * n / 4.0
    terms.append(PauliString(("I",) * n, const))
    return canonicalize(PauliSum.from_terms(terms, n))


def apply_added_noise(params, l0, rotation):
    """Hamiltonian with every non-identity Pauli factor conjugated by W.

    Used as the evolution generator of added-noise runs; measurements keep
    the unperturbed Hamiltonian.
    """
    base = build_hamiltonian(params, l0)
    images = {axis: conjugate_pauli(axis, rotation) for axis in "XYZ"}
    out = []
    for term in base.terms:
        partial = [((), term.coefficient)]
        for axis in term.axes:
            options = images[axis] if axis != "I" else (("I", 1.0),)
            partial = [
                (axes + (label,), coeff * weight)
                for axes, coeff in partial
                for label, weight in options
            ]
        for axes, coeff in partial:
            out.append(PauliString(axes, coeff))
    return canonicalize(PauliSum.from_terms(out, base.n_sites))


# Calibrated parameter sets: both share N = 6, V = 30, penalty 100; the
# background-field windows bracket the first avoided or exact level crossing.
PRESET_PARAMS = {
    0: ModelParams(n_sites=6, volume=30.0, mass_ratio=0.0, charge_penalty=100.0),
    10: ModelParams(n_sites=6, volume=30.0, mass_ratio=10.0, charge_penalty=100.0),
}

PRESET_DOMAINS = {
    0: DomainSpec(0.511527, 0.512187, 0.512360, 0.512527),
    10: DomainSpec(1.832633, 1.833293, 1.833466, 1.833633),
}


def get_preset(mass_ratio):
    """(ModelParams, DomainSpec) for a calibrated mass ratio (0 or 10)."""
    key = int(mass_ratio)
    if key not in PRESET_PARAMS or key != mass_ratio:
        raise ValueError(f"no preset for mass ratio {mass_ratio!r}; have 0 and 10")
    return PRESET_PARAMS[key], PRESET_DOMAINS[key]
