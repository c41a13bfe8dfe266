"""Gate-level density-matrix simulation in the {CX, ID, RZ, SX, X} basis.

Compilation maps each Pauli-sum term exp(-i c P dt) onto single-qubit basis
changes, a CX parity ladder onto the last involved qubit, and one central
RZ(2 c dt). Basis changes are fixed RZ/SX sequences:

    X axis:  enter [RZ(pi/2), SX, RZ(pi/2)]   leave [RZ(pi/2), SX, RZ(pi/2)]
    Y axis:  enter [SX]                        leave [RZ(pi), SX, RZ(pi)]

Identity terms never emit gates; their evolution phase is tracked per slice
as a classical scalar so the circuit value equals the exact term-exponential
product, not just up to a global phase.

The only noise location in the simulator is a Z flip applied with
probability p after every RZ gate:  rho -> (1-p) rho + p Z_q rho Z_q.
Everything else is noiseless; added Hamiltonian noise enters upstream by
conjugating the generator, not by extra gates here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .pauli import PauliSum, expectation, is_canonical, string_expectation
from .validation import check_int, check_scalar, require

GATE_KINDS = ("CX", "ID", "RZ", "SX", "X")

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

# scalar corrections making each emitted basis-change sequence equal the
# exact change-of-frame unitary (Hadamard resp. x-axis quarter rotations)
_PHASE_H = np.exp(0.25j * np.pi)
_PHASE_Y_PRE = np.exp(-0.25j * np.pi)
_PHASE_Y_POST = np.exp(0.75j * np.pi)


class Gate(NamedTuple):
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None


@dataclass(frozen=True)
class GateCircuit:
    """Ordered gate list with per-Trotter-slice boundaries and phases.

    ``slice_marks[k]`` is the index one past the last gate of slice k. The
    circuit's value as an operator is phase * G_last @ ... @ G_first with
    phase the product of the per-slice scalars.
    """

    gates: tuple[Gate, ...]
    n_qubits: int
    slice_marks: tuple[int, ...]
    slice_phases: tuple[complex, ...]

    def __post_init__(self):
        require(self.n_qubits >= 1, "need at least one qubit", field="n_qubits")
        marks = tuple(int(m) for m in self.slice_marks)
        require(
            len(marks) == len(self.slice_phases),
            "one phase per slice",
            field="slice_phases",
        )
        prev = 0
        for m in marks:
            require(m >= prev, "slice marks must be non-decreasing", field="slice_marks")
            prev = m
        require(
            not marks or marks[-1] == len(self.gates),
            "last slice mark must close the gate list",
            field="slice_marks",
        )
        for g in self.gates:
            require(g.kind in GATE_KINDS, f"unknown gate kind {g.kind!r}", field="gates")
            for q in g.qubits:
                require(0 <= q < self.n_qubits, "gate off the register", field="gates")
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "slice_marks", marks)
        object.__setattr__(
            self, "slice_phases", tuple(complex(p) for p in self.slice_phases)
        )

    @property
    def n_slices(self):
        return len(self.slice_marks)

    @property
    def phase(self):
        out = 1.0 + 0.0j
        for p in self.slice_phases:
            out *= p
        return out

    def slice_gates(self, k):
        lo = self.slice_marks[k - 1] if k else 0
        return self.gates[lo : self.slice_marks[k]]


@dataclass(frozen=True)
class NoiseModel:
    """Intrinsic device noise: Z-flip probability applied after each RZ."""

    p_zflip: float = 0.0

    def __post_init__(self):
        p = check_scalar(self.p_zflip, "p_zflip", minimum=0.0, maximum=1.0)
        object.__setattr__(self, "p_zflip", p)


@dataclass
class DensityState:
    """Density matrix on a register; site 0 is the most significant bit."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be square")
        n = int(round(math.log2(rho.shape[0])))
        if 2**n != rho.shape[0]:
            raise ValueError("rho dimension must be a power of two")
        self.rho = rho
        self._n_sites = n

    @property
    def n_sites(self):
        return self._n_sites

    @classmethod
    def from_statevector(cls, vec):
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if not np.isclose(norm, 1.0, atol=1e-10):
            raise ValueError("statevector must be normalized")
        return cls(np.outer(vec, vec.conj()))

    def validate(self, atol=1e-9):
        """Check Hermiticity, unit trace and positivity; raise on failure."""
        if np.abs(self.rho - self.rho.conj().T).max() > atol:
            raise ValueError("density matrix lost Hermiticity")
        if abs(np.trace(self.rho) - 1.0) > atol:
            raise ValueError("density matrix lost unit trace")
        low = np.linalg.eigvalsh(self.rho).min()
        if low < -atol:
            raise ValueError(f"density matrix has negative weight {low:g}")
        return self


# ---------------------------------------------------------------------------
# compilation


def _pre_sequence(axis, q):
    if axis == "Z":
        return (), 1.0 + 0.0j
    if axis == "X":
        seq = (
            Gate("RZ", (q,), math.pi / 2),
            Gate("SX", (q,)),
            Gate("RZ", (q,), math.pi / 2),
        )
        return seq, _PHASE_H
    if axis == "Y":
        return (Gate("SX", (q,)),), _PHASE_Y_PRE
    raise ValueError(f"cannot compile axis {axis!r}")


def _post_sequence(axis, q):
    if axis == "Z":
        return (), 1.0 + 0.0j
    if axis == "X":
        seq = (
            Gate("RZ", (q,), math.pi / 2),
            Gate("SX", (q,)),
            Gate("RZ", (q,), math.pi / 2),
        )
        return seq, _PHASE_H
    if axis == "Y":
        seq = (
            Gate("RZ", (q,), math.pi),
            Gate("SX", (q,)),
            Gate("RZ", (q,), math.pi),
        )
        return seq, _PHASE_Y_POST
    raise ValueError(f"cannot compile axis {axis!r}")


def compile_slice(psum, dt):
    """One first-order Trotter slice of exp(-i H dt) over the canonical terms.

    Terms act in canonical order (the first term is applied first). Identity
    terms contribute only to the slice phase.
    """
    dt = check_scalar(dt, "dt")
    require(len(psum) > 0, "cannot compile an empty sum", field="psum")
    require(is_canonical(psum), "sum must be canonical", field="psum")
    gates: list[Gate] = []
    phase = 1.0 + 0.0j
    for term in psum.terms:
        if term.is_identity:
            phase *= np.exp(-1j * term.coefficient * dt)
            continue
        support = term.support()
        for q in support:
            seq, corr = _pre_sequence(term.axes[q], q)
            gates.extend(seq)
            phase *= corr
        for a, b in zip(support, support[1:]):
            gates.append(Gate("CX", (a, b)))
        gates.append(Gate("RZ", (support[-1],), 2.0 * term.coefficient * dt))
        for a, b in reversed(list(zip(support, support[1:]))):
            gates.append(Gate("CX", (a, b)))
        for q in reversed(support):
            seq, corr = _post_sequence(term.axes[q], q)
            gates.extend(seq)
            phase *= corr
    return GateCircuit(
        gates=tuple(gates),
        n_qubits=psum.n_sites,
        slice_marks=(len(gates),),
        slice_phases=(phase,),
    )


def _invert_gates(gates):
    """Time-reversed inverse gate list and its scalar correction.

    The true inverse operator equals correction * (product of the returned
    list); SX lacks a native inverse in the basis and expands to
    RZ(pi) SX RZ(pi) at the cost of a factor i.
    """
    inv: list[Gate] = []
    corr = 1.0 + 0.0j
    for g in reversed(gates):
        if g.kind == "RZ":
            inv.append(Gate("RZ", g.qubits, -g.angle))
        elif g.kind == "SX":
            q = g.qubits
            inv.extend((Gate("RZ", q, math.pi), Gate("SX", q), Gate("RZ", q, math.pi)))
            corr *= 1j
        else:  # CX, X, ID are involutions
            inv.append(g)
    return tuple(inv), corr


def invert_circuit(circuit):
    """Circuit whose value is the exact inverse operator."""
    gates: list[Gate] = []
    marks: list[int] = []
    phases: list[complex] = []
    for k in reversed(range(circuit.n_slices)):
        inv, corr = _invert_gates(circuit.slice_gates(k))
        gates.extend(inv)
        marks.append(len(gates))
        phases.append(np.conj(circuit.slice_phases[k]) * corr)
    return GateCircuit(tuple(gates), circuit.n_qubits, tuple(marks), tuple(phases))


def fold_slice(circuit, f):
    """Replace each Trotter slice U by U (U^dag U)^((f-1)/2), f odd.

    The folded circuit implements the same operator with f times the gate
    load, which scales the accumulated intrinsic noise for extrapolation.
    """
    f = check_int(f, "f", minimum=1)
    require(f % 2 == 1, "fold factor must be odd", field="f")
    if f == 1:
        return circuit
    m = (f - 1) // 2
    gates: list[Gate] = []
    marks: list[int] = []
    phases: list[complex] = []
    for k in range(circuit.n_slices):
        body = circuit.slice_gates(k)
        phi = circuit.slice_phases[k]
        inv, corr = _invert_gates(body)
        inv_phase = np.conj(phi) * corr
        gates.extend(body)
        folded_phase = phi
        for _ in range(m):
            gates.extend(inv)
            gates.extend(body)
            folded_phase *= inv_phase * phi
        marks.append(len(gates))
        phases.append(folded_phase)
    return GateCircuit(tuple(gates), circuit.n_qubits, tuple(marks), tuple(phases))


def count_gates(circuit):
    """Gate totals by kind, including zero counts for unused kinds."""
    out = {k: 0 for k in GATE_KINDS}
    for g in circuit.gates:
        out[g.kind] += 1
    return out


# ---------------------------------------------------------------------------
# application

_BIT_CACHE: dict[tuple[int, int], np.ndarray] = {}
_FLIP_CACHE: dict[tuple[int, int], np.ndarray] = {}
_CX_CACHE: dict[tuple[int, int, int], np.ndarray] = {}
_RZ_CACHE: dict = {}
_RZ_CACHE_CAP = 512  # about 33 MB of 64x64 blocks at six sites


def _bits(n, q):
    key = (n, q)
    if key not in _BIT_CACHE:
        _BIT_CACHE[key] = (np.arange(2**n) >> (n - 1 - q)) & 1
    return _BIT_CACHE[key]


def _flip(n, q):
    key = (n, q)
    if key not in _FLIP_CACHE:
        _FLIP_CACHE[key] = np.arange(2**n) ^ (1 << (n - 1 - q))
    return _FLIP_CACHE[key]


def _cx(n, c, t):
    key = (n, c, t)
    if key not in _CX_CACHE:
        idx = np.arange(2**n)
        _CX_CACHE[key] = idx ^ (_bits(n, c) << (n - 1 - t))
    return _CX_CACHE[key]


def _permute_both(rho, perm):
    """Conjugate by a permutation: rho -> rho[perm, :][:, perm] batched."""
    return np.take(np.take(rho, perm, axis=-2), perm, axis=-1)


def _rz_window(n, q, angle, p):
    """Elementwise map of RZ(angle) conjugation fused with the Z-flip channel.

    rho -> rho * W with W = v v^dag scaled by (1-p) + p s s^T off the
    diagonal blocks; angles repeat heavily across slices, so entries are
    cached with a hard cap to bound memory.
    """
    key = (n, q, angle, p)
    hit = _RZ_CACHE.get(key)
    if hit is not None:
        return hit
    bits = _bits(n, q)
    v = np.where(bits == 0, np.exp(-0.5j * angle), np.exp(0.5j * angle))
    w = np.outer(v, v.conj())
    if p > 0.0:
        s = 1.0 - 2.0 * bits
        w *= (1.0 - p) + p * np.outer(s, s)
    if len(_RZ_CACHE) >= _RZ_CACHE_CAP:
        _RZ_CACHE.clear()
    _RZ_CACHE[key] = w
    return w


def _run_gates(rho, n, gates, p):
    """Apply gates in place on rho with shape (..., dim, dim)."""
    for g in gates:
        kind = g.kind
        if kind == "RZ":
            rho *= _rz_window(n, g.qubits[0], g.angle, p)
        elif kind == "CX":
            rho = _permute_both(rho, _cx(n, *g.qubits))
        elif kind == "SX":
            perm = _flip(n, g.qubits[0])
            left = np.take(rho, perm, axis=-2)
            right = np.take(rho, perm, axis=-1)
            flipped = np.take(left, perm, axis=-1)
            # (rho + X rho X + i (rho X - X rho)) / 2 with few temporaries
            right -= left
            right *= 0.5j
            flipped += rho
            flipped *= 0.5
            flipped += right
            rho = flipped
        elif kind == "X":
            rho = _permute_both(rho, _flip(n, g.qubits[0]))
        # ID: nothing
    return rho


def apply_circuit(state, circuit, noise=None, validate=False):
    """Run the circuit on a copy of the state under the intrinsic noise model.

    Args:
        state: input DensityState (left untouched).
        circuit: GateCircuit to apply.
        noise: NoiseModel; None means noiseless.
        validate: re-check density-matrix invariants on the result.
    """
    if state.n_sites != circuit.n_qubits:
        raise ValueError(
            f"state on {state.n_sites} sites, circuit on {circuit.n_qubits}"
        )
    p = float(noise.p_zflip) if noise is not None else 0.0
    rho = _run_gates(state.rho.copy(), state.n_sites, circuit.gates, p)
    out = DensityState(rho)
    if validate:
        out.validate()
    return out


def apply_circuit_stack(rhos, n_qubits, circuit, noise=None):
    """Apply one circuit to a stack of density matrices (B, dim, dim).

    The stacked form amortizes per-gate dispatch when several states ride
    the same circuit, such as the two tracked levels of a run.
    """
    if circuit.n_qubits != n_qubits:
        raise ValueError("circuit register does not match the stack")
    p = float(noise.p_zflip) if noise is not None else 0.0
    return _run_gates(rhos.copy(), n_qubits, circuit.gates, p)


def dense_unitary(circuit):
    """Dense operator of the circuit including its tracked phase."""
    n = circuit.n_qubits
    if n > 12:
        raise ValueError("dense circuit build limited to 12 qubits")
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        if g.kind == "RZ":
            q = g.qubits[0]
            v = np.where(
                _bits(n, q) == 0, np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)
            )
            u = v[:, None] * u
        elif g.kind == "CX":
            u = u[_cx(n, *g.qubits)]
        elif g.kind == "X":
            u = u[_flip(n, g.qubits[0])]
        elif g.kind == "SX":
            perm = _flip(n, g.qubits[0])
            u = 0.5 * ((1 + 1j) * u + (1 - 1j) * u[perm])
        # ID: nothing
    return circuit.phase * u


def measure_energy(state, psum, n_shots=None, rng=None):
    """Energy of the state under the given observable.

    Exact expectation by default. With ``n_shots`` the sampling error of a
    per-term estimate is modeled analytically as one Gaussian draw with
    variance sum_j c_j^2 (1 - <P_j>^2) / n_shots.
    """
    value = expectation(psum, state.rho)
    if n_shots is None:
        return value
    n_shots = check_int(n_shots, "n_shots", minimum=1)
    if rng is None:
        raise ValueError("shot-noise mode needs an rng for reproducibility")
    var = 0.0
    for term in psum.terms:
        if term.is_identity:
            continue
        mean = string_expectation(term.axes, state.rho).real
        var += term.coefficient**2 * max(0.0, 1.0 - min(1.0, mean * mean)) / n_shots
    return value + rng.normal(0.0, math.sqrt(var))
