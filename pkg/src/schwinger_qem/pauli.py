"""Pauli-string operator algebra on a register of spin sites.

Conventions fixed here and relied on by every other module:

* Site 0 is the leftmost, i.e. most significant, Kronecker factor of any
  dense materialization. Basis index bit ``n_sites - 1 - q`` therefore
  addresses site ``q``.
* A sum is in canonical form when no two terms share an axes vector, terms
  with |coefficient| below ``DROP_TOL`` are dropped, and the remaining terms
  are ordered lexicographically by their axes tuple (``I < X < Y < Z``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AXIS_LABELS = ("I", "X", "Y", "Z")

# Coefficients at or below this magnitude count as zero during canonicalization.
DROP_TOL = 1e-14

# Dense materialization is refused above this register size (memory guard).
MAX_DENSE_SITES = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """One weighted tensor product of single-site Pauli operators."""

    axes: tuple[str, ...]
    coefficient: float

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValueError("axes must be non-empty")
        for a in axes:
            if a not in AXIS_LABELS:
                raise ValueError(f"unknown Pauli label {a!r}")
        coeff = float(self.coefficient)
        if not math.isfinite(coeff):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "coefficient", coeff)

    @property
    def n_sites(self):
        return len(self.axes)

    @property
    def is_identity(self):
        return all(a == "I" for a in self.axes)

    def support(self):
        """Sites acted on by a non-identity factor, ascending."""
        return tuple(q for q, a in enumerate(self.axes) if a != "I")

    @classmethod
    def from_sites(cls, n_sites, site_axes, coefficient):
        """Build a string from a ``{site: axis}`` mapping; other sites get I."""
        axes = ["I"] * n_sites
        for q, a in site_axes.items():
            if not 0 <= q < n_sites:
                raise ValueError(f"site {q} outside register of {n_sites}")
            axes[q] = a
        return cls(tuple(axes), coefficient)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings on a fixed register.

    The register size carries the lattice size N; evenness of N is a property
    of the physical model and is enforced there, not here.
    """

    terms: tuple[PauliString, ...]
    n_sites: int

    def __post_init__(self):
        terms = tuple(self.terms)
        n = int(self.n_sites)
        if n < 1:
            raise ValueError("n_sites must be positive")
        for t in terms:
            if t.n_sites != n:
                raise ValueError(
                    f"term on {t.n_sites} sites in a sum on {n} sites"
                )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "n_sites", n)

    def __len__(self):
        return len(self.terms)

    @classmethod
    def from_terms(cls, terms, n_sites=None):
        terms = tuple(terms)
        if n_sites is None:
            if not terms:
                raise ValueError("cannot infer register size from an empty sum")
            n_sites = terms[0].n_sites
        return cls(terms, n_sites)

    def coefficient_map(self):
        """Axes -> summed coefficient, without dropping or sorting."""
        out: dict[tuple[str, ...], float] = {}
        for t in self.terms:
            out[t.axes] = out.get(t.axes, 0.0) + t.coefficient
        return out


def canonicalize(psum):
    """Merge duplicate axes, drop negligible coefficients, sort terms."""
    merged = psum.coefficient_map()
    terms = tuple(
        PauliString(axes, c)
        for axes, c in sorted(merged.items())
        if abs(c) > DROP_TOL
    )
    return PauliSum(terms, psum.n_sites)


def is_canonical(psum):
    seen = set()
    prev = None
    for t in psum.terms:
        if t.axes in seen or abs(t.coefficient) <= DROP_TOL:
            return False
        if prev is not None and t.axes < prev:
            return False
        seen.add(t.axes)
        prev = t.axes
    return True


def _string_dense(axes):
    out = PAULI_MATRICES[axes[0]]
    for a in axes[1:]:
        out = np.kron(out, PAULI_MATRICES[a])
    return out


def to_dense(psum):
    """Dense Hermitian matrix of the sum, site 0 leftmost factor."""
    if psum.n_sites > MAX_DENSE_SITES:
        raise ValueError(
            f"refusing dense build on {psum.n_sites} sites "
            f"(limit {MAX_DENSE_SITES})"
        )
    dim = 2**psum.n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for t in psum.terms:
        out += t.coefficient * _string_dense(t.axes)
    return out


def _site_bits(n_sites, dim):
    """bits[q, b] = value of site q's bit in basis index b."""
    idx = np.arange(dim)
    return np.array(
        [(idx >> (n_sites - 1 - q)) & 1 for q in range(n_sites)], dtype=np.int64
    )


def string_expectation(axes, rho):
    """<P> = tr(P rho) for a single unweighted Pauli string.

    Pauli strings are signed permutations of the computational basis, so the
    trace reduces to one pass over rho without materializing P.
    """
    n = len(axes)
    dim = rho.shape[0]
    if dim != 2**n:
        raise ValueError(f"density matrix has dim {dim}, string needs {2**n}")
    bits = _site_bits(n, dim)
    flip = 0
    sign = np.ones(dim, dtype=complex)
    for q, a in enumerate(axes):
        b = bits[q]
        if a == "X":
            flip ^= 1 << (n - 1 - q)
        elif a == "Y":
            flip ^= 1 << (n - 1 - q)
            sign = sign * np.where(b == 0, 1.0j, -1.0j)
        elif a == "Z":
            sign = sign * np.where(b == 0, 1.0, -1.0)
    perm = np.arange(dim) ^ flip
    # tr(P rho) = sum_j sign_j rho[j, perm(j)]
    return complex(np.sum(sign * rho[np.arange(dim), perm]))


def expectation(psum, rho, imag_tol=1e-10):
    """tr(H rho) for a canonical or raw sum; the imaginary residue must vanish.

    Args:
        psum: operator whose expectation is taken.
        rho: density matrix, shape (2**n_sites, 2**n_sites).
        imag_tol: largest tolerated |imaginary part| before erroring.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = 2**psum.n_sites
    if rho.shape != (dim, dim):
        raise ValueError(f"rho shape {rho.shape} does not match dim {dim}")
    value = 0.0 + 0.0j
    for t in psum.terms:
        value += t.coefficient * string_expectation(t.axes, rho)
    if abs(value.imag) > imag_tol:
        raise ValueError(f"expectation has imaginary residue {value.imag:g}")
    return float(value.real)


@dataclass(frozen=True)
class NoiseRotation:
    """Per-Pauli-type frame rotation used to perturb a Hamiltonian.

    ``angles`` holds one (phi1, phi2, phi3) triple for each of X, Y, Z in that
    order. The rotation conjugates every appearance of a Pauli type by the
    unitary

        W = [[cos(phi1/2),            -exp(i phi3) sin(phi1/2)],
             [exp(i phi2) sin(phi1/2), exp(i (phi2+phi3)) cos(phi1/2)]]

    which is unitary for any real angles, so conjugation preserves Hermiticity
    and the +-1 spectrum of the image.
    """

    angles: tuple[tuple[float, float, float], ...]
    seed: int | None = None

    def __post_init__(self):
        angles = tuple(tuple(float(v) for v in triple) for triple in self.angles)
        if len(angles) != 3 or any(len(t) != 3 for t in angles):
            raise ValueError("angles must be three (phi1, phi2, phi3) triples")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def zero(cls):
        z = (0.0, 0.0, 0.0)
        return cls((z, z, z))

    @classmethod
    def sample(cls, seed):
        """Draw phi3 ~ U[-1, 1] per Pauli type; phi1 = phi2 = 0."""
        rng = np.random.default_rng(seed)
        phi3 = rng.uniform(-1.0, 1.0, size=3)
        return cls(
            tuple((0.0, 0.0, float(p)) for p in phi3),
            seed=None if not np.isscalar(seed) else int(seed),
        )

    @property
    def is_identity(self):
        return all(v == 0.0 for triple in self.angles for v in triple)

    def angles_for(self, axis):
        try:
            return self.angles[("X", "Y", "Z").index(axis)]
        except ValueError:
            raise ValueError(f"no rotation for axis {axis!r}") from None

    def dense_w(self, axis):
        phi1, phi2, phi3 = self.angles_for(axis)
        c, s = math.cos(phi1 / 2.0), math.sin(phi1 / 2.0)
        return np.array(
            [
                [c, -np.exp(1j * phi3) * s],
                [np.exp(1j * phi2) * s, np.exp(1j * (phi2 + phi3)) * c],
            ],
            dtype=complex,
        )


def conjugate_pauli(axis, rotation, drop_tol=DROP_TOL):
    """Expand W^dag P W over the single-site Pauli basis.

    Returns ``((label, weight), ...)`` with real weights; the identity weight
    is exactly zero in theory (conjugation preserves tracelessness) and is
    dropped with everything below ``drop_tol``.
    """
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"can only conjugate X, Y or Z, got {axis!r}")
    w = rotation.dense_w(axis)
    image = w.conj().T @ PAULI_MATRICES[axis] @ w
    out = []
    for label in AXIS_LABELS:
        weight = 0.5 * np.trace(PAULI_MATRICES[label].conj().T @ image)
        if abs(weight.imag) > 1e-12:
            raise ValueError("conjugated Pauli image has complex weights")
        if abs(weight.real) > drop_tol:
            out.append((label, float(weight.real)))
    return tuple(out)
